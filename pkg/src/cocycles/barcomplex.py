"""Bar-resolution cochain complexes C^n(G, A) and their cohomology.

Coefficients are finite abelian groups presented as products of cyclic
factors; the circle shows up as its bounded subgroup (1/M)Z/Z, which is
enough because |G| annihilates all positive-degree cohomology.  Cochain
values are stored as numpy residue arrays, so the coboundary is pure
index arithmetic over the multiplication table and is exact.

The coboundary convention is the standard inhomogeneous one,

  (d xi)(g0, ..., gn) = g0 . xi(g1, ..., gn)
                        + sum_{k=1}^{n} (-1)^k xi(g0, ..., g_{k-1} g_k, ..., gn)
                        + (-1)^{n+1} xi(g0, ..., g_{n-1}),

whose low-degree cases reproduce the familiar cocycle identities
xi(gh) = xi(g) + g.xi(h) and g.xi(h,k) - xi(gh,k) + xi(g,hk) - xi(g,h) = 0.

Cohomology groups are computed as Smith-normal-form quotients of the
integer lattices behind ker d_n / im d_{n-1}, and double-checked on
demand by an independent Howell-form rank count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .circle import CircleValue
from .intlinalg import (
    column_basis,
    divisible_image_tail,
    kernel_mod,
    lattice_quotient,
    solve_divisible,
    solve_mod,
    span_size_mod,
)


class UnsupportedDegreeError(ValueError):
    pass


class CoefficientModule:
    """A finite abelian coefficient group with a G-action.

    ``orders`` lists the cyclic factors; a value is a residue vector mod
    those orders.  ``kind`` is "circle" for the bounded circle (1/M)Z/Z
    (a single factor of order M) or "cyclics" for a plain product.  The
    action, if any, is one integer matrix per group element, verified to
    be a homomorphism into the automorphisms of the carrier.
    """

    def __init__(self, group, orders, action=None, kind="cyclics"):
        self.group = group
        self.orders = tuple(int(m) for m in orders)
        if any(m <= 0 for m in self.orders):
            raise ValueError("cyclic orders must be positive")
        self.kind = kind
        self.k = len(self.orders)
        if action is not None:
            action = np.array(action, dtype=np.int64)
            if action.shape != (group.order, self.k, self.k):
                raise ValueError("action must give one k x k matrix per group element")
            self._validate_action(action)
        self.action = action

    @classmethod
    def circle(cls, group, M):
        return cls(group, (int(M),), kind="circle")

    @classmethod
    def cyclics(cls, group, orders, action=None):
        return cls(group, orders, action=action, kind="cyclics")

    def with_bound(self, M):
        """The same module with the circle bound replaced by M."""
        if self.kind != "circle":
            raise ValueError("only circle modules carry a denominator bound")
        if self.action is not None:
            return CoefficientModule(self.group, (M,), action=self.action, kind="circle")
        return CoefficientModule.circle(self.group, M)

    @property
    def M(self):
        if self.kind != "circle":
            raise ValueError("not a circle module")
        return self.orders[0]

    def _validate_action(self, action):
        G = self.group
        k = self.k
        eye = np.eye(k, dtype=np.int64)
        if self.kind == "circle":
            # circle matrices act on all of Q/Z, so congruences mod the
            # window bound are not enough: demand exact integer identities
            if not (action[G.identity] == eye).all():
                raise ValueError("identity must act trivially (exactly, on circle coefficients)")
            for a in G.elements():
                for b in G.elements():
                    if not (action[G.mul(a, b)] == action[a] @ action[b]).all():
                        raise ValueError(
                            f"circle action must be exactly multiplicative; fails at ({a}, {b})"
                        )
            for g in G.elements():
                if not (action[g] @ action[G.inv(g)] == eye).all():
                    raise ValueError(f"circle action matrix of {g} is not invertible over Z")
            return
        if not self._mat_eq(action[G.identity], eye):
            raise ValueError("identity must act trivially")
        for g in G.elements():
            for i in range(k):
                for j in range(k):
                    if (int(action[g, i, j]) * self.orders[j]) % self.orders[i] != 0:
                        raise ValueError(f"action matrix of {g} is not a homomorphism")
        for a in G.elements():
            for b in G.elements():
                if not self._mat_eq(action[G.mul(a, b)], action[a] @ action[b]):
                    raise ValueError(f"action is not multiplicative at ({a}, {b})")
        for g in G.elements():
            if not self._mat_eq(action[g] @ action[G.inv(g)], eye):
                raise ValueError(f"action matrix of {g} is not invertible")

    def _mat_eq(self, A, B):
        mods = np.array(self.orders, dtype=np.int64)[:, None]
        return bool((((A - B) % mods) == 0).all())

    def reduce(self, values):
        return np.mod(values, np.array(self.orders, dtype=np.int64))

    def act(self, g, values):
        """Apply the automorphism of g to an array of values (..., k)."""
        if self.action is None:
            return values
        return self.reduce(values @ self.action[g].T)

    def rank_dim(self):
        return self.k

    def zero(self):
        return np.zeros(self.k, dtype=np.int64)

    def compatible(self, other) -> bool:
        return (
            self.group == other.group
            and self.orders == other.orders
            and self.kind == other.kind
            and (
                (self.action is None and other.action is None)
                or (
                    self.action is not None
                    and other.action is not None
                    and (self.action == other.action).all()
                )
            )
        )

    def __repr__(self):
        return f"CoefficientModule({self.kind}, orders={self.orders})"


class GroupCochain:
    """An n-cochain: a total residue table on G^n (degree 0: one value)."""

    def __init__(self, module: CoefficientModule, degree: int, values):
        if degree < 0:
            raise ValueError("degree must be nonnegative")
        G = module.group
        values = np.array(values, dtype=np.int64)
        expected = (G.order,) * degree + (module.k,)
        if values.shape != expected:
            raise ValueError(f"values must have shape {expected}, got {values.shape}")
        self.module = module
        self.degree = degree
        self.values = module.reduce(values)

    @classmethod
    def zero(cls, module, degree):
        G = module.group
        return cls(module, degree, np.zeros((G.order,) * degree + (module.k,), dtype=np.int64))

    def _check_mate(self, other):
        if self.degree != other.degree or not self.module.compatible(other.module):
            raise ValueError("cochains live in different groups")

    def __add__(self, other):
        self._check_mate(other)
        return GroupCochain(self.module, self.degree, self.values + other.values)

    def __sub__(self, other):
        self._check_mate(other)
        return GroupCochain(self.module, self.degree, self.values - other.values)

    def __neg__(self):
        return GroupCochain(self.module, self.degree, -self.values)

    def __eq__(self, other):
        if isinstance(other, GroupCochain):
            return (
                self.degree == other.degree
                and self.module.orders == other.module.orders
                and (self.values == other.values).all()
            )
        return NotImplemented

    def __hash__(self):
        return hash((self.degree, self.module.orders, self.values.tobytes()))

    def is_zero(self) -> bool:
        return not self.values.any()

    def circle_value(self, *args) -> CircleValue:
        """Value at a tuple of group elements, as an exact circle point."""
        if self.module.kind != "circle":
            raise ValueError("circle_value needs circle coefficients")
        v = self.values[tuple(args)] if args else self.values
        return CircleValue(Fraction(int(v[0]), self.module.M))

    def __repr__(self):
        return f"GroupCochain(degree={self.degree}, orders={self.module.orders})"


def _merge_meshes(group, degree):
    """Cached fancy-index meshes for the n+1 middle terms of the coboundary."""
    key = ("bar-mesh", degree)
    cache = group._mesh_cache
    if key in cache:
        return cache[key]
    n1 = degree + 1
    G = group.order
    grids = np.indices((G,) * n1, dtype=np.int64)
    meshes = []
    for k in range(1, n1):
        idx = []
        for j in range(n1):
            if j < k - 1:
                idx.append(grids[j])
            elif j == k - 1:
                idx.append(group.table[grids[k - 1], grids[k]])
            elif j > k:
                idx.append(grids[j])
        meshes.append(tuple(idx))
    cache[key] = (grids, meshes)
    return cache[key]


def _coboundary_values(module: CoefficientModule, degree: int, values) -> np.ndarray:
    """Raw (unreduced) coboundary table; honest signed integer arithmetic."""
    G = module.group
    n = degree
    order = G.order
    if n == 0:
        out = np.zeros((order, module.k), dtype=np.int64)
        for g in G.elements():
            acted = values if module.action is None else values @ module.action[g].T
            out[g] = acted - values
        return out
    grids, meshes = _merge_meshes(G, n)
    # term 0: g0 . xi(g1, ..., gn)
    if module.action is None:
        total = np.broadcast_to(values, (order,) * (n + 1) + (module.k,)).copy()
    else:
        total = np.einsum("gij,...j->g...i", module.action, values)
    sign = 1
    for k in range(1, n + 1):
        sign = -sign
        total = total + sign * values[meshes[k - 1]]
    sign = -sign
    # last term: (-1)^(n+1) xi(g0, ..., g_{n-1}), independent of gn
    total = total + sign * np.expand_dims(values, axis=n)
    return total


def coboundary(xi: GroupCochain) -> GroupCochain:
    """The inhomogeneous bar coboundary; squares to zero exactly.

    >>> from .groups import build_group
    >>> G = build_group("z2")
    >>> mod = CoefficientModule.circle(G, 4)
    >>> chi = GroupCochain(mod, 1, [[0], [2]])   # the character 0, 1/2
    >>> coboundary(chi).is_zero()
    True
    """
    return GroupCochain(
        xi.module, xi.degree + 1, _coboundary_values(xi.module, xi.degree, xi.values)
    )


def is_cocycle(xi: GroupCochain) -> bool:
    return coboundary(xi).is_zero()


def random_cochain(module: CoefficientModule, degree: int, rng) -> GroupCochain:
    G = module.group
    shape = (G.order,) * degree + (module.k,)
    highs = np.broadcast_to(np.array(module.orders, dtype=np.int64), shape)
    vals = rng.integers(0, highs)
    return GroupCochain(module, degree, vals)


def _coboundary_matrix(module: CoefficientModule, degree: int) -> np.ndarray:
    """Honest signed integer matrix of d: C^degree -> C^(degree+1).

    Never reduced mod the orders: the composite of two of these is the
    zero matrix over Z, which the divisible-coefficient tests rely on.
    """
    G = module.group
    dim_in = (G.order ** degree) * module.k
    cols = []
    for j in range(dim_in):
        basis = np.zeros(dim_in, dtype=np.int64)
        basis[j] = 1
        raw = _coboundary_values(module, degree, basis.reshape((G.order,) * degree + (module.k,)))
        cols.append(raw.reshape(-1))
    if not cols:
        return np.zeros(((G.order ** (degree + 1)) * module.k, 0), dtype=np.int64)
    return np.stack(cols, axis=1)


def _order_vector(module, degree) -> np.ndarray:
    G = module.group
    return np.tile(np.array(module.orders, dtype=np.int64), G.order ** degree)


def is_coboundary(xi: GroupCochain) -> Optional[GroupCochain]:
    """A witness eta with d(eta) = xi, or None.

    For "cyclics" coefficients the carrier is the honest coefficient
    group and the system is solved over it.  For "circle" coefficients
    the carrier (1/M)Z/Z is a window into the divisible circle T, so the
    witness is allowed any rational denominator; it comes back over a
    finer circle module whose bound records the denominators used.
    Degree-0 cochains are coboundaries only when zero (there is no C^-1).

    >>> from .groups import build_group
    >>> G = build_group("z2")
    >>> mod = CoefficientModule.circle(G, 4)
    >>> chi = GroupCochain(mod, 1, [[0], [2]])
    >>> is_coboundary(chi) is None   # the nontrivial character of Z_2
    True
    """
    if xi.degree == 0:
        return GroupCochain.zero(xi.module, 0) if xi.is_zero() else None
    mod = xi.module
    A = _coboundary_matrix(mod, xi.degree - 1)
    n_args = (mod.group.order,) * (xi.degree - 1)
    if mod.kind == "circle":
        b = [Fraction(int(v), mod.M) for v in xi.values.reshape(-1)]
        x = solve_divisible(A, b)
        if x is None:
            return None
        denom = 1
        for v in x:
            denom = denom * v.denominator // np.gcd(denom, v.denominator)
        bound = int(np.lcm(denom, mod.M))
        fine = mod.with_bound(bound)
        vals = np.array([int(v * bound) for v in x], dtype=np.int64)
        eta = GroupCochain(fine, xi.degree - 1, vals.reshape(n_args + (fine.k,)))
        if not (coboundary(eta) == lift_bound(xi, bound)):
            raise AssertionError("solver returned a bogus witness")
        return eta
    b = xi.values.reshape(-1)
    x = solve_mod(A, b, _order_vector(mod, xi.degree), _order_vector(mod, xi.degree - 1))
    if x is None:
        return None
    eta = GroupCochain(mod, xi.degree - 1, x.reshape(n_args + (mod.k,)))
    if not (coboundary(eta) == xi):
        raise AssertionError("solver returned a bogus witness")
    return eta


def lift_bound(xi: GroupCochain, bound: int) -> GroupCochain:
    """The same circle cochain seen inside (1/bound)Z/Z."""
    mod = xi.module
    if mod.kind != "circle":
        raise ValueError("lift_bound applies to circle coefficients")
    if bound % mod.M != 0:
        raise ValueError("new bound must be a multiple of the old one")
    scale = bound // mod.M
    return GroupCochain(mod.with_bound(bound), xi.degree, xi.values * scale)


def normalize_cochain(xi: GroupCochain) -> GroupCochain:
    """A cohomologous cocycle vanishing whenever an argument is the identity.

    The adjustment is a coboundary found by an exact linear solve on the
    identity slices, so the class is untouched.  Requires a cocycle
    (arbitrary cochains need not admit a normalization).
    """
    if xi.degree < 1 or xi.degree > 3:
        raise ValueError("normalization is provided for degrees 1..3")
    if not is_cocycle(xi):
        raise ValueError("normalization is only guaranteed for cocycles")
    mod = xi.module
    G = mod.group
    e = G.identity
    A = _coboundary_matrix(mod, xi.degree - 1)
    n_out = xi.degree
    shape = (G.order,) * n_out
    mask = np.zeros(shape, dtype=bool)
    for ax in range(n_out):
        sl = [slice(None)] * n_out
        sl[ax] = e
        mask[tuple(sl)] = True
    rows = np.repeat(mask.reshape(-1), mod.k)
    A_sub = A[rows, :]
    b_sub = xi.values.reshape(-1)[rows]
    x = solve_mod(A_sub, b_sub, _order_vector(mod, xi.degree)[rows], _order_vector(mod, xi.degree - 1))
    if x is None:
        raise AssertionError("a cocycle failed to normalize; this should not happen")
    eta = GroupCochain(mod, xi.degree - 1, x.reshape((G.order,) * (xi.degree - 1) + (mod.k,)))
    out = xi - coboundary(eta)
    if not _vanishes_on_identity(out):
        raise AssertionError("normalization left a nonzero identity slice")
    return out


def _vanishes_on_identity(xi: GroupCochain) -> bool:
    e = xi.module.group.identity
    v = xi.values
    return all(not np.take(v, e, axis=ax).any() for ax in range(xi.degree))


@dataclass
class FinAbReport:
    """Invariant-factor presentation of a computed cohomology group."""

    invariant_factors: tuple
    representatives: list
    M: Optional[int] = None
    label: str = ""
    meta: dict = field(default_factory=dict)

    @property
    def order(self) -> int:
        out = 1
        for d in self.invariant_factors:
            out *= d
        return out

    def group_name(self) -> str:
        if not self.invariant_factors:
            return "0"
        return " + ".join(f"Z/{d}" for d in self.invariant_factors)

    def same_group(self, other) -> bool:
        return tuple(self.invariant_factors) == tuple(other.invariant_factors)

    def __str__(self):
        return f"{self.label or 'H'} = {self.group_name()}"


def cohomology(
    group,
    module: CoefficientModule,
    degree: int,
    M: Optional[int] = None,
    check_stability: bool = False,
) -> FinAbReport:
    """H^degree(G, A) = ker d / im d with representative cocycles.

    For circle coefficients the computation runs inside (1/M)Z/Z with
    M = |G|^2 by default; ``check_stability`` recomputes at 2M and
    insists the invariant factors agree.

    >>> from .groups import build_group
    >>> G = build_group("z3")
    >>> cohomology(G, CoefficientModule.circle(G, 9), 1).invariant_factors
    (3,)
    """
    if degree > 3:
        raise UnsupportedDegreeError(
            f"degree {degree} not supported: matrices scale like |G|^4"
        )
    if module.kind == "circle":
        module = module.with_bound(int(M) if M is not None else group.order ** 2)
    report = _cohomology_once(group, module, degree)
    if check_stability and module.kind == "circle":
        doubled = _cohomology_once(group, module.with_bound(2 * module.M), degree)
        if tuple(doubled.invariant_factors) != tuple(report.invariant_factors):
            raise AssertionError(
                "cohomology is not stable under doubling the denominator bound: "
                f"{report.invariant_factors} vs {doubled.invariant_factors}"
            )
        report.meta["stability"] = "ok"
    return report


def _cohomology_once(group, module, degree) -> FinAbReport:
    D_up = _coboundary_matrix(module, degree)
    Z = kernel_mod(D_up, _order_vector(module, degree + 1))
    periodic = np.diag(_order_vector(module, degree))
    if degree == 0:
        B = periodic
    elif module.kind == "circle":
        # values in (1/M)Z/Z are a window into the divisible circle: the
        # coboundary subgroup is { xi : xi = d(eta) over T }, cut down to
        # the window, which the cokernel rows of d turn into congruences
        D_down = _coboundary_matrix(module, degree - 1)
        tail = divisible_image_tail(D_down)
        B = kernel_mod(tail, np.full(tail.shape[0], module.M, dtype=np.int64))
    else:
        D_down = _coboundary_matrix(module, degree - 1)
        B = np.hstack([D_down, periodic]) if D_down.shape[1] else periodic
    B = column_basis(B)
    pairs = lattice_quotient(Z, B)
    factors = []
    reps = []
    for d, gen in pairs:
        if d == 0:
            raise AssertionError("cohomology of a finite group came out infinite")
        factors.append(d)
        shape = (group.order,) * degree + (module.k,)
        reps.append(GroupCochain(module, degree, np.array(gen, dtype=np.int64).reshape(shape)))
    order = np.argsort(factors, kind="stable")
    factors = [factors[i] for i in order]
    reps = [reps[i] for i in order]
    report = FinAbReport(
        invariant_factors=tuple(factors),
        representatives=reps,
        M=module.M if module.kind == "circle" else None,
        label=f"H^{degree}({group.name})",
    )
    _verify_report(report, degree)
    return report


def _verify_report(report: FinAbReport, degree: int):
    reps = report.representatives
    for r in reps:
        if not is_cocycle(r):
            raise AssertionError("cohomology representative fails the cocycle test")
    for i in range(len(reps)):
        if is_coboundary(reps[i]) is not None:
            raise AssertionError("cohomology generator is a coboundary")
        for j in range(i + 1, len(reps)):
            if is_coboundary(reps[i] - reps[j]) is not None:
                raise AssertionError("two cohomology generators are cohomologous")


def cohomology_order_bruteforce(
    group, module: CoefficientModule, degree: int, witness_factor: Optional[int] = None
) -> int:
    """|H^degree(G, T)| by Howell-form rank counting -- no SNF involved.

    |Z| comes from rank-nullity over Z/M.  The T-coboundaries inside the
    (1/M)Z/Z window are counted with the finite-group identity
    |S meet V| = |S| |V| / |S + V| inside (Z/(M*C))^dim, where S is the
    span of the coboundary columns, V = C*(Z/MC)^dim is the window, and
    C is a denominator allowance for witnesses (default |G|*M, checked
    by doubling).  Circle coefficients only (single modulus).
    """
    if module.kind != "circle":
        raise ValueError("the brute-force rank count works over circle coefficients")
    Mb = module.M
    D_up = _coboundary_matrix(module, degree)
    dim = D_up.shape[1]
    im_up = span_size_mod(D_up.T.tolist(), Mb) if dim else 1
    ker = (Mb**dim) // im_up
    if degree == 0:
        return ker
    D_down = _coboundary_matrix(module, degree - 1)
    C = int(witness_factor) if witness_factor else group.order * Mb

    def boundary_count(c):
        # inside (Z/Mc)^dim: S = span of coboundary columns (witnesses with
        # denominator M*c), V = c*(Z/Mc)^dim the (1/M)-valued window
        ring = Mb * c
        rows = (D_down.T % ring).tolist() if D_down.shape[1] else []
        s_size = span_size_mod(rows, ring) if rows else 1
        window = (c * np.eye(dim, dtype=np.int64)).tolist()
        joint_size = span_size_mod(rows + window, ring)
        return s_size * (Mb**dim) // joint_size

    nb = boundary_count(C)
    if boundary_count(2 * C) != nb:
        raise AssertionError("witness denominator allowance is unstable; raise it")
    return ker // nb


def cup_carry(u_table, v: GroupCochain) -> GroupCochain:
    """Degree-4 pairing (p,q,r,s) -> u(p,q) * v(r,s) of an integer table
    with a 2-cochain; bilinear in both slots.

    >>> from .groups import build_group
    >>> G = build_group("z2")
    >>> mod = CoefficientModule.circle(G, 2)
    >>> v = GroupCochain(mod, 2, [[[0], [0]], [[0], [1]]])
    >>> u = [[0, 0], [0, 1]]
    >>> int(cup_carry(u, v).values[1, 1, 1, 1, 0])
    1
    """
    u = np.array(u_table, dtype=np.int64)
    G = v.module.group
    if v.degree != 2 or u.shape != (G.order, G.order):
        raise ValueError("cup_carry pairs a Q x Q integer table with a 2-cochain")
    vals = np.einsum("pq,rsk->pqrsk", u, v.values)
    return GroupCochain(v.module, 4, vals)
