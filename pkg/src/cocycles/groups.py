"""Finite groups as dense multiplication tables, with quotients and sections.

Desk scale only (|G| up to a few dozen): groups are stored as full
Cayley tables over element indices, every axiom is checked exhaustively
at construction time, and all derived data (quotients, sections, the
section 2-cocycle) is computed by direct table arithmetic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .intlinalg import smith_normal_form


class GroupConstructionError(ValueError):
    pass


class FiniteGroup:
    """A finite group presented by its multiplication table.

    ``table[a, b]`` is the index of the product a*b.  Construction
    checks closure, associativity (exhaustively), a two-sided identity
    and inverses; failures name the offending entry or triple.
    """

    def __init__(self, table, name: str = "G"):
        table = np.array(table, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1]:
            raise GroupConstructionError("multiplication table must be square")
        n = table.shape[0]
        if n == 0:
            raise GroupConstructionError("a group has at least one element")
        if table.min() < 0 or table.max() >= n:
            bad = np.argwhere((table < 0) | (table >= n))[0]
            raise GroupConstructionError(
                f"table is not closed: entry at ({bad[0]}, {bad[1]}) is out of range"
            )
        # associativity: (ab)c == a(bc), checked on all triples at once
        left = table[table, :]            # left[a, b, c] = (ab)c
        right = table[:, table]           # right[a, b, c] = a(bc)
        if not (left == right).all():
            a, b, c = (int(x) for x in np.argwhere(left != right)[0])
            raise GroupConstructionError(
                f"table is not associative: ({a}*{b})*{c} != {a}*({b}*{c})"
            )
        identity = None
        for e in range(n):
            if (table[e, :] == np.arange(n)).all() and (table[:, e] == np.arange(n)).all():
                identity = e
                break
        if identity is None:
            raise GroupConstructionError("table has no two-sided identity")
        inverses = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.nonzero(table[a, :] == identity)[0]
            if hits.size == 0 or table[hits[0], a] != identity:
                raise GroupConstructionError(f"element {a} has no two-sided inverse")
            inverses[a] = hits[0]
        self.table = table
        self.order = n
        self.identity = int(identity)
        self.inverses = inverses
        self.name = name
        self._mesh_cache: dict = {}

    def mul(self, a, b) -> int:
        return int(self.table[a, b])

    def inv(self, a) -> int:
        return int(self.inverses[a])

    def conj(self, g, a) -> int:
        """g * a * g^-1."""
        return self.mul(self.mul(g, a), self.inv(g))

    def elements(self):
        return range(self.order)

    def element_order(self, a) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    def center(self):
        return [a for a in self.elements() if (self.table[a, :] == self.table[:, a]).all()]

    def __eq__(self, other):
        if isinstance(other, FiniteGroup):
            return self.order == other.order and (self.table == other.table).all()
        return NotImplemented

    def __hash__(self):
        return hash((self.order, self.table.tobytes()))

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={self.order})"


_PRESET_RE = re.compile(r"^z(\d+)$|^d(\d+)$")


def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupConstructionError("cyclic group needs n >= 1")
    idx = np.arange(n)
    return FiniteGroup((idx[:, None] + idx[None, :]) % n, name=f"z{n}")


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of the n-gon, order 2n; element r^a f^b has index a + n*b."""
    if n < 1:
        raise GroupConstructionError("dihedral group needs n >= 1")
    size = 2 * n
    table = np.zeros((size, size), dtype=np.int64)
    for a in range(n):
        for b in range(2):
            for c in range(n):
                for d in range(2):
                    rot = (a + (c if b == 0 else -c)) % n
                    table[a + n * b, c + n * d] = rot + n * ((b + d) % 2)
    return FiniteGroup(table, name=f"d{n}")


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """Direct product with lexicographic element indexing (g, h) -> g*|H| + h."""
    n, m = G.order, H.order
    table = np.zeros((n * m, n * m), dtype=np.int64)
    for g1 in range(n):
        for h1 in range(m):
            for g2 in range(n):
                for h2 in range(m):
                    table[g1 * m + h1, g2 * m + h2] = G.mul(g1, g2) * m + H.mul(h1, h2)
    return FiniteGroup(table, name=f"{G.name}x{H.name}")


def build_group(spec) -> FiniteGroup:
    """Build a group from a preset name, an explicit table, or a file dict.

    Presets: ``z<n>`` (cyclic), ``d<n>`` (dihedral, order 2n), and
    ``x``-joined products such as ``z2xz2`` or ``z2xz4``.

    >>> build_group("z1").order
    1
    >>> G = build_group("z2xz2")
    >>> all(G.inv(a) == a for a in G.elements())
    True
    >>> len(build_group("d4").center())
    2
    """
    if isinstance(spec, FiniteGroup):
        return spec
    if isinstance(spec, str):
        name = spec.strip().lower().replace("_", "").replace("⊕", "x")
        parts = name.split("x")
        groups = []
        for part in parts:
            m = _PRESET_RE.match(part)
            if not m:
                raise GroupConstructionError(f"unknown preset {part!r}")
            if m.group(1) is not None:
                groups.append(cyclic(int(m.group(1))))
            else:
                groups.append(dihedral(int(m.group(2))))
        G = groups[0]
        for H in groups[1:]:
            G = direct_product(G, H)
        return G
    if isinstance(spec, dict):
        return FiniteGroup(spec["table"], name=spec.get("name", "G"))
    return FiniteGroup(spec)


def preset_names(max_order: Optional[int] = None):
    """The preset groups exercised by the verification suites."""
    names = ["z1", "z2", "z3", "z4", "z5", "z6", "z7", "z8",
             "z2xz2", "z2xz3", "z2xz4", "z2xz2xz2", "d3", "d4"]
    if max_order is None:
        return names
    return [n for n in names if build_group(n).order <= max_order]


@dataclass(frozen=True)
class SubgroupData:
    """A verified subgroup of ``parent`` given by a sorted element set."""

    parent: FiniteGroup
    elements: tuple
    normal: bool = field(init=False)
    central: bool = field(init=False)

    def __post_init__(self):
        G = self.parent
        elems = tuple(sorted(set(int(e) for e in self.elements)))
        object.__setattr__(self, "elements", elems)
        if G.identity not in elems:
            raise GroupConstructionError("subgroup must contain the identity")
        eset = set(elems)
        for a in elems:
            if G.inv(a) not in eset:
                raise GroupConstructionError(f"subgroup not closed under inverse at {a}")
            for b in elems:
                if G.mul(a, b) not in eset:
                    raise GroupConstructionError(f"subgroup not closed under product at ({a}, {b})")
        normal = all(G.conj(g, a) in eset for g in G.elements() for a in elems)
        central = all(G.mul(g, a) == G.mul(a, g) for g in G.elements() for a in elems)
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "central", central)

    def __contains__(self, a):
        return int(a) in set(self.elements)

    @property
    def order(self):
        return len(self.elements)


class GroupHom:
    """A verified homomorphism, stored as the image array over the domain."""

    def __init__(self, domain: FiniteGroup, codomain: FiniteGroup, image):
        image = np.array(image, dtype=np.int64)
        if image.shape != (domain.order,):
            raise GroupConstructionError("image array must cover the domain")
        if image[domain.identity] != codomain.identity:
            raise GroupConstructionError("homomorphism must send identity to identity")
        for a in domain.elements():
            for b in domain.elements():
                if image[domain.mul(a, b)] != codomain.mul(int(image[a]), int(image[b])):
                    raise GroupConstructionError(
                        f"not a homomorphism at pair ({a}, {b})"
                    )
        self.domain = domain
        self.codomain = codomain
        self.image = image

    def __call__(self, a) -> int:
        return int(self.image[a])

    def kernel(self) -> SubgroupData:
        ker = [a for a in self.domain.elements() if self(a) == self.codomain.identity]
        return SubgroupData(self.domain, tuple(ker))

    def is_surjective(self) -> bool:
        return len(set(self.image.tolist())) == self.codomain.order


def quotient(G: FiniteGroup, N: SubgroupData):
    """Quotient group Q = G/N and the projection, for normal N.

    Cosets are labeled by their least element; Q's identity is coset 0
    of the identity.  A non-normal N raises with a conjugation witness.

    >>> Q, pi = quotient(build_group("z4"), SubgroupData(build_group("z4"), (0, 2)))
    >>> Q.order
    2
    """
    if N.parent is not G and N.parent != G:
        raise GroupConstructionError("subgroup belongs to a different group")
    if not N.normal:
        eset = set(N.elements)
        for g in G.elements():
            for a in N.elements:
                if G.conj(g, a) not in eset:
                    raise GroupConstructionError(
                        f"subgroup is not normal: {g}*{a}*{g}^-1 = {G.conj(g, a)} escapes"
                    )
    # coset of g: {g*n}
    coset_key = {}
    for g in G.elements():
        members = sorted(G.mul(g, n) for n in N.elements)
        coset_key[g] = tuple(members)
    reps = sorted(set(coset_key.values()), key=lambda c: c[0])
    # identity coset first
    id_coset = coset_key[G.identity]
    reps.sort(key=lambda c: (c != id_coset, c[0]))
    index_of = {c: i for i, c in enumerate(reps)}
    proj = np.array([index_of[coset_key[g]] for g in G.elements()], dtype=np.int64)
    q = len(reps)
    table = np.zeros((q, q), dtype=np.int64)
    for i, ci in enumerate(reps):
        for j, cj in enumerate(reps):
            table[i, j] = proj[G.mul(ci[0], cj[0])]
    Q = FiniteGroup(table, name=f"{G.name}/N{len(N.elements)}")
    pi = GroupHom(G, Q, proj)
    return Q, pi


class Section:
    """A normalized cross-section s: Q -> G of a surjection pi, s(1) = 1."""

    def __init__(self, quotient_map: GroupHom, choice):
        pi = quotient_map
        choice = np.array(choice, dtype=np.int64)
        if choice.shape != (pi.codomain.order,):
            raise GroupConstructionError("section must cover the quotient")
        for q in pi.codomain.elements():
            if pi(int(choice[q])) != q:
                raise GroupConstructionError(f"section fails pi o s = id at {q}")
        if choice[pi.codomain.identity] != pi.domain.identity:
            raise GroupConstructionError("section must be normalized: s(1) = 1")
        self.quotient_map = pi
        self.choice = choice

    def __call__(self, q) -> int:
        return int(self.choice[q])


def make_section(pi: GroupHom, policy: str = "least-index") -> Section:
    """Deterministic section of a surjective homomorphism.

    ``least-index`` picks the smallest preimage per element (and the
    identity over the identity); ``random:<seed>`` draws any preimage,
    still normalized, for invariance testing.

    >>> G = build_group("z6")
    >>> Q, pi = quotient(G, SubgroupData(G, (0, 3)))
    >>> [make_section(pi)(q) for q in Q.elements()]
    [0, 1, 2]
    """
    if not pi.is_surjective():
        raise GroupConstructionError("section requires a surjective map")
    choice = np.zeros(pi.codomain.order, dtype=np.int64)
    if policy == "least-index":
        for q in pi.codomain.elements():
            choice[q] = min(g for g in pi.domain.elements() if pi(g) == q)
    elif policy.startswith("random"):
        seed = int(policy.split(":")[1]) if ":" in policy else 0
        rng = np.random.default_rng(seed)
        for q in pi.codomain.elements():
            pre = [g for g in pi.domain.elements() if pi(g) == q]
            choice[q] = int(rng.choice(pre))
    else:
        raise ValueError(f"unknown section policy {policy!r}")
    choice[pi.codomain.identity] = pi.domain.identity
    return Section(pi, choice)


class SectionCocycle:
    """The N-valued data attached to a section s of pi: G -> Q.

    ``pair(p, q) = s(p) s(q) s(pq)^-1`` is the classical 2-cocycle of
    the extension, and ``of_element(g) = s(pi(g)) g^-1`` its elementwise
    companion; both take values in ker(pi).
    """

    def __init__(self, section: Section):
        pi = section.quotient_map
        G, Q = pi.domain, pi.codomain
        ker = pi.kernel()
        if not ker.central:
            raise GroupConstructionError(
                "section cocycle requires the kernel to be central in G"
            )
        n = Q.order
        pair = np.zeros((n, n), dtype=np.int64)
        for p in range(n):
            for q in range(n):
                v = G.mul(G.mul(section(p), section(q)), G.inv(section(Q.mul(p, q))))
                if v not in ker:
                    raise AssertionError("section cocycle escaped the kernel")
                pair[p, q] = v
        self.section = section
        self.kernel = ker
        self.pair_table = pair

    def pair(self, p, q) -> int:
        return int(self.pair_table[p, q])

    def of_element(self, g) -> int:
        s = self.section
        pi = s.quotient_map
        G = pi.domain
        v = G.mul(s(pi(g)), G.inv(g))
        return v


def section_cocycle(section: Section) -> SectionCocycle:
    """Cocycle data of a section whose kernel is central.

    >>> G = build_group("z4")
    >>> Q, pi = quotient(G, SubgroupData(G, (0, 2)))
    >>> section_cocycle(make_section(pi)).pair(1, 1)
    2
    """
    return SectionCocycle(section)


def abelian_basis(G: FiniteGroup, elements=None):
    """Cyclic decomposition of a finite abelian group (or central subgroup).

    Returns (orders, basis, logmap): ``orders`` are invariant factors
    e_1 | e_2 | ..., ``basis`` the corresponding generators (element
    indices), and ``logmap`` a dict sending each covered element to its
    coordinate tuple mod the orders.  Computed from the Smith normal
    form of the relation lattice of the full multiplication table.
    """
    elems = sorted(set(int(e) for e in elements)) if elements is not None else list(G.elements())
    k = len(elems)
    pos = {e: i for i, e in enumerate(elems)}
    for a in elems:
        for b in elems:
            if G.mul(a, b) != G.mul(b, a):
                raise GroupConstructionError("abelian_basis needs commuting elements")
            if G.mul(a, b) not in pos:
                raise GroupConstructionError("element set is not closed")
    rel_cols = []
    for a in elems:
        for b in elems:
            col = np.zeros(k, dtype=np.int64)
            col[pos[a]] += 1
            col[pos[b]] += 1
            col[pos[G.mul(a, b)]] -= 1
            rel_cols.append(col)
    R = np.array(rel_cols, dtype=np.int64).T if rel_cols else np.zeros((k, 0), dtype=np.int64)
    sf = smith_normal_form(R)
    orders, basis_cols = [], []
    for i in range(k):
        d = int(sf.D[i, i]) if i < min(sf.D.shape) else 0
        if d == 1:
            continue
        if d == 0:
            raise AssertionError("finite group produced a free summand")
        orders.append(d)
        basis_cols.append(np.asarray(sf.uinv[:, i], dtype=np.int64))

    def materialize(col):
        g = G.identity
        for idx, c in enumerate(col):
            e = elems[idx]
            c = int(c)
            step = e if c >= 0 else G.inv(e)
            for _ in range(abs(c)):
                g = G.mul(g, step)
        return g

    basis = [materialize(c) for c in basis_cols]
    logmap = {}
    for a in elems:
        coords = sf.U @ np.eye(k, dtype=np.int64)[pos[a]]
        logmap[a] = tuple(int(coords[i]) % orders[j] for j, i in enumerate(
            [i for i in range(k) if (int(sf.D[i, i]) if i < min(sf.D.shape) else 0) != 1]
        ))
    return orders, basis, logmap
