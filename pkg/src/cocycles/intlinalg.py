"""Exact integer linear algebra kernels.

Everything downstream (cohomology groups, coboundary witnesses, the
modular-obstruction quotient) reduces to three problems over Z:

* Smith normal form  D = U A V  with unimodular U, V;
* kernels / solves of integer linear systems;
* quotients  K / L  of a lattice by a finite-index sublattice, returned
  as invariant factors with adapted generators.

A fourth, independent path -- the Howell form over Z/M -- is kept
deliberately separate from the SNF machinery so it can cross-check
ranks and subgroup sizes computed the first way.

Matrices are numpy int64 arrays.  Intermediate entries are watched; if
they threaten int64 overflow the computation is redone with Python-int
object arrays (slow but exact).
"""

from __future__ import annotations

from math import gcd
from typing import Optional

import numpy as np

_OVERFLOW_LIMIT = 1 << 55


class OverflowGuard(Exception):
    """Raised internally when int64 entries grow past the safe window."""


def _as_matrix(a, dtype=np.int64):
    m = np.array(a, dtype=dtype)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def _check_magnitude(*mats):
    for m in mats:
        if m.size and m.dtype != object and int(np.abs(m).max()) > _OVERFLOW_LIMIT:
            raise OverflowGuard


class SmithForm:
    """Result of a Smith normal form computation: D = U @ A @ V.

    ``uinv`` satisfies U @ uinv == I; it is what lattice quotients need
    to read off adapted generators.
    """

    __slots__ = ("D", "U", "V", "uinv", "rank")

    def __init__(self, D, U, V, uinv):
        self.D = D
        self.U = U
        self.V = V
        self.uinv = uinv
        self.rank = int(np.count_nonzero(D.diagonal())) if min(D.shape) else 0

    def divisors(self):
        """Nonzero diagonal entries d_1 | d_2 | ... of D."""
        return [int(x) for x in self.D.diagonal() if x != 0]


def smith_normal_form(A) -> SmithForm:
    """Smith normal form over Z with full transform tracking.

    >>> sf = smith_normal_form([[2, 4], [6, 8]])
    >>> sf.divisors()
    [2, 4]
    >>> bool((sf.U @ np.array([[2, 4], [6, 8]]) @ sf.V == sf.D).all())
    True
    """
    A = _as_matrix(A)
    try:
        return _snf_engine(A.copy())
    except OverflowGuard:
        return _snf_engine(A.astype(object))


def _abs_argmin_nonzero(sub):
    """Index (i, j) of a nonzero entry of minimal absolute value, or None."""
    if sub.dtype == object:
        best = None
        for i in range(sub.shape[0]):
            for j in range(sub.shape[1]):
                v = abs(sub[i, j])
                if v and (best is None or v < best[0]):
                    best = (v, i, j)
        return None if best is None else (best[1], best[2])
    nz = np.nonzero(sub)
    if len(nz[0]) == 0:
        return None
    k = int(np.argmin(np.abs(sub[nz])))
    return int(nz[0][k]), int(nz[1][k])


def _snf_engine(A) -> SmithForm:
    rows, cols = A.shape
    U = np.eye(rows, dtype=A.dtype)
    uinv = np.eye(rows, dtype=A.dtype)
    V = np.eye(cols, dtype=A.dtype)

    def swap_rows(i, j):
        if i != j:
            A[[i, j], :] = A[[j, i], :]
            U[[i, j], :] = U[[j, i], :]
            uinv[:, [i, j]] = uinv[:, [j, i]]

    def swap_cols(i, j):
        if i != j:
            A[:, [i, j]] = A[:, [j, i]]
            V[:, [i, j]] = V[:, [j, i]]

    def negate_row(i):
        A[i, :] = -A[i, :]
        U[i, :] = -U[i, :]
        uinv[:, i] = -uinv[:, i]

    for t in range(min(rows, cols)):
        while True:
            pos = _abs_argmin_nonzero(A[t:, t:])
            if pos is None:
                break
            swap_rows(t, t + pos[0])
            swap_cols(t, t + pos[1])
            if A[t, t] < 0:
                negate_row(t)

            dirty = True
            while dirty:
                dirty = False
                piv = A[t, t]
                col = A[t + 1 :, t]
                if col.size and np.any(col != 0):
                    q = col // piv
                    A[t + 1 :, :] -= np.outer(q, A[t, :])
                    U[t + 1 :, :] -= np.outer(q, U[t, :])
                    uinv[:, t] += uinv[:, t + 1 :] @ q
                    rem = np.nonzero(A[t + 1 :, t])[0]
                    if rem.size:
                        swap_rows(t, t + 1 + int(rem[0]))
                        dirty = True
                        continue
                row = A[t, t + 1 :]
                if row.size and np.any(row != 0):
                    piv = A[t, t]
                    q = row // piv
                    A[:, t + 1 :] -= np.outer(A[:, t], q)
                    V[:, t + 1 :] -= np.outer(V[:, t], q)
                    rem = np.nonzero(A[t, t + 1 :])[0]
                    if rem.size:
                        swap_cols(t, t + 1 + int(rem[0]))
                        dirty = True
            # pivot must divide the whole trailing block
            piv = int(A[t, t])
            fixed = True
            if piv != 0 and rows - t > 1 and cols - t > 1:
                block = A[t + 1 :, t + 1 :]
                if block.dtype == object:
                    bad = next(
                        (j for i in range(block.shape[0]) for j in range(block.shape[1]) if block[i, j] % piv != 0),
                        None,
                    )
                else:
                    mods = np.nonzero(block % piv)
                    bad = int(mods[1][0]) if len(mods[0]) else None
                if bad is not None:
                    A[:, t] += A[:, t + 1 + bad]
                    V[:, t] += V[:, t + 1 + bad]
                    fixed = False
            if fixed:
                break
        _check_magnitude(A, U, V, uinv)

    return SmithForm(A, U, V, uinv)


def kernel_basis(A) -> np.ndarray:
    """Basis (as columns) of {x in Z^n : A x = 0}.

    >>> kernel_basis([[1, 2, 3]]).shape
    (3, 2)
    """
    A = _as_matrix(A)
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=np.int64)
    sf = smith_normal_form(A)
    return np.array(sf.V[:, sf.rank :])


def solve_int(A, b) -> Optional[np.ndarray]:
    """One integer solution x of A x = b, or None.

    >>> solve_int([[2, 0], [0, 3]], [4, 9]).tolist()
    [2, 3]
    >>> solve_int([[2]], [3]) is None
    True
    """
    A = _as_matrix(A)
    b = np.array(b, dtype=A.dtype).reshape(-1)
    if b.shape[0] != A.shape[0]:
        raise ValueError("dimension mismatch in solve_int")
    if A.shape[1] == 0:
        return np.zeros(0, dtype=np.int64) if not b.any() else None
    if A.shape[0] == 0:
        return np.zeros(A.shape[1], dtype=np.int64)
    sf = smith_normal_form(A)
    z = _solve_diagonal(sf, b)
    return None if z is None else sf.V @ z


def _solve_diagonal(sf: SmithForm, b):
    c = sf.U @ b
    n = sf.D.shape[1]
    z = np.zeros(n, dtype=sf.D.dtype)
    for i in range(min(sf.D.shape)):
        d = int(sf.D[i, i])
        ci = int(c[i])
        if d == 0:
            if ci != 0:
                return None
        else:
            if ci % d != 0:
                return None
            z[i] = ci // d
    for i in range(min(sf.D.shape), sf.D.shape[0]):
        if int(c[i]) != 0:
            return None
    return z


def column_basis(A) -> np.ndarray:
    """Basis (as columns) of the lattice spanned by the columns of A."""
    A = _as_matrix(A)
    if A.shape[1] == 0 or not np.any(A):
        return np.zeros((A.shape[0], 0), dtype=np.int64)
    sf = smith_normal_form(A)
    cols = [np.asarray(sf.uinv[:, i]) * int(sf.D[i, i]) for i in range(sf.rank)]
    return np.stack(cols, axis=1)


def solve_columns(K, L) -> np.ndarray:
    """Integer Y with K @ Y = L; raises if a column of L is outside span(K)."""
    K = _as_matrix(K)
    L = _as_matrix(L)
    if L.shape[1] == 0:
        return np.zeros((K.shape[1], 0), dtype=np.int64)
    sf = smith_normal_form(K)
    cols = []
    for j in range(L.shape[1]):
        z = _solve_diagonal(sf, L[:, j].astype(sf.D.dtype))
        if z is None:
            raise ValueError("column outside the spanning lattice")
        cols.append(sf.V @ z)
    return np.stack(cols, axis=1)


def lattice_quotient(K, L):
    """Invariant factors and adapted generators of span(K)/span(L).

    ``K`` must be a basis matrix (independent columns) and span(L) a
    sublattice of span(K).  Returns [(order, generator_column), ...] with
    every order != 1; order 0 marks a free summand.

    >>> [(d, list(map(int, g))) for d, g in lattice_quotient(np.eye(2, dtype=np.int64), [[2, 0], [0, 4]])]
    [(2, [1, 0]), (4, [0, 1])]
    """
    K = _as_matrix(K)
    L = _as_matrix(L)
    r = K.shape[1]
    if r == 0:
        return []
    Y = solve_columns(K, L)
    sf = smith_normal_form(Y)
    gens = K @ sf.uinv
    out = []
    for i in range(r):
        d = int(sf.D[i, i]) if i < min(sf.D.shape) else 0
        if d == 1:
            continue
        out.append((d, np.array(gens[:, i])))
    return out


def solve_mod(A, b, row_mods, col_mods) -> Optional[np.ndarray]:
    """Solve A x = b (mod row_mods componentwise), x reduced mod col_mods.

    Both moduli vectors hold positive integers; the system is lifted to
    Z by slack columns and handed to the integer solver.

    >>> solve_mod([[2]], [1], [4], [4]) is None
    True
    >>> int(solve_mod([[3]], [1], [4], [4])[0])
    3
    """
    A = _as_matrix(A)
    b = np.array(b, dtype=np.int64).reshape(-1)
    row_mods = np.array(row_mods, dtype=np.int64).reshape(-1)
    col_mods = np.array(col_mods, dtype=np.int64).reshape(-1)
    if A.shape != (len(row_mods), len(col_mods)):
        raise ValueError("moduli do not match the matrix shape")
    if A.shape[0] == 0:
        return np.zeros(A.shape[1], dtype=np.int64)
    lifted = np.hstack([A, np.diag(row_mods)])
    x = solve_int(lifted, b)
    if x is None:
        return None
    sol = x[: A.shape[1]]
    return np.array([int(v) % int(m) for v, m in zip(sol, col_mods)], dtype=np.int64)


def kernel_mod(A, row_mods) -> np.ndarray:
    """Basis columns of the lattice {x in Z^n : A x = 0 mod row_mods}.

    The result contains the trivial periodicity only insofar as it lies
    in the kernel; callers add their own periodicity generators before
    quotienting.
    """
    A = _as_matrix(A)
    row_mods = np.array(row_mods, dtype=np.int64).reshape(-1)
    if A.shape[0] == 0:
        return np.eye(A.shape[1], dtype=np.int64)
    lifted = np.hstack([A, np.diag(row_mods)])
    ker = kernel_basis(lifted)
    proj = ker[: A.shape[1], :]
    return column_basis(proj)


def solve_divisible(A, b) -> Optional[list]:
    """Solve A x = b (mod 1) with x ranging over the divisible group (Q/Z)^n.

    ``b`` is a vector of Fractions.  Because Q/Z is divisible, the Smith
    form makes the solvability criterion exact: with D = U A V the
    system has a solution iff the rows of U b beyond the rank are
    integral, and then x = V w mod 1 with w_i = (U b)_i / d_i.  Returns
    the Fraction solution (reduced mod 1) or None.

    >>> from fractions import Fraction
    >>> solve_divisible([[2]], [Fraction(1, 4)])
    [Fraction(1, 8)]
    >>> solve_divisible([[0]], [Fraction(1, 4)]) is None
    True
    """
    from fractions import Fraction

    A = _as_matrix(A)
    b = [Fraction(v) for v in b]
    if len(b) != A.shape[0]:
        raise ValueError("dimension mismatch in solve_divisible")
    if A.shape[1] == 0:
        return [] if all(v.denominator == 1 for v in b) else None
    if A.shape[0] == 0:
        return [Fraction(0)] * A.shape[1]
    sf = smith_normal_form(A)
    c = [sum(Fraction(int(sf.U[i, j])) * b[j] for j in range(len(b))) for i in range(A.shape[0])]
    w = [Fraction(0)] * A.shape[1]
    for i in range(min(A.shape)):
        d = int(sf.D[i, i])
        if d == 0:
            if c[i].denominator != 1:
                return None
        else:
            w[i] = c[i] / d
    for i in range(min(A.shape), A.shape[0]):
        if c[i].denominator != 1:
            return None
    x = [sum(Fraction(int(sf.V[i, j])) * w[j] for j in range(A.shape[1])) % 1 for i in range(A.shape[1])]
    return x


def divisible_image_tail(A):
    """Rows T with: b in A (Q/Z)^n + Z^m  iff  T b is integral.

    These are the rows of the Smith U beyond the rank; they present the
    cokernel of A and turn membership of b in the divisible image into
    finitely many integrality conditions.
    """
    A = _as_matrix(A)
    if A.shape[1] == 0:
        return np.eye(A.shape[0], dtype=np.int64)
    sf = smith_normal_form(A)
    return np.array(sf.U[sf.rank :, :])


# ---------------------------------------------------------------------------
# Howell form over Z/M: the independent rank oracle.
# ---------------------------------------------------------------------------


def _xgcd(a, b):
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def _mod_inverse(a, M):
    g, s, _ = _xgcd(a % M, M)
    if g != 1:
        raise ValueError(f"{a} is not invertible mod {M}")
    return s % M


def _unit_for(a, M):
    """Unit u mod M with u*a == gcd(a, M) (mod M)."""
    a %= M
    if a == 0:
        return 1
    g = gcd(a, M)
    a0 = a // g
    m0 = M // g
    u = _mod_inverse(a0 % m0, m0)
    if u == 0:
        u = 1
    while gcd(u, M) != 1:
        u += m0
    return u % M


def _pivot(row):
    return next(i for i, v in enumerate(row) if v)


def howell_form(rows, M):
    """Howell normal form of the row span of ``rows`` inside (Z/M)^n.

    Computed directly over the ring Z/M (no integer SNF involved), so it
    can cross-check the SNF-based computations.  Returns rows (tuples)
    with strictly increasing pivot columns, leading entries dividing M,
    and entries above each pivot reduced mod that pivot.
    """
    M = int(M)
    if M <= 0:
        raise ValueError("modulus must be positive")
    queue = [[int(v) % M for v in r] for r in rows]
    queue = [r for r in queue if any(r)]
    if not queue:
        return []
    n = len(queue[0])
    result = []
    for j in range(n):
        pivot_row = None
        rest = []
        for r in queue:
            if r[j] == 0:
                rest.append(r)
                continue
            if pivot_row is None:
                pivot_row = r
                continue
            g, s, t = _xgcd(pivot_row[j], r[j])
            comb = [(s * a + t * b) % M for a, b in zip(pivot_row, r)]
            q1, q2 = pivot_row[j] // g, r[j] // g
            r1 = [(a - q1 * c) % M for a, c in zip(pivot_row, comb)]
            r2 = [(b - q2 * c) % M for b, c in zip(r, comb)]
            pivot_row = comb
            if any(r1):
                rest.append(r1)
            if any(r2):
                rest.append(r2)
        if pivot_row is not None:
            u = _unit_for(pivot_row[j], M)
            pivot_row = [(u * v) % M for v in pivot_row]
            result.append(pivot_row)
            lead = pivot_row[j]
            ann = M // gcd(lead, M)
            shifted = [(ann * v) % M for v in pivot_row]
            if any(shifted):
                rest.append(shifted)
        queue = rest
    # reduce entries above each pivot mod the pivot
    for i in range(len(result) - 1, -1, -1):
        r = result[i]
        j = _pivot(r)
        lead = r[j]
        for i2 in range(i):
            r2 = result[i2]
            if r2[j]:
                q = r2[j] // lead
                result[i2] = [(a - q * b) % M for a, b in zip(r2, r)]
    return [tuple(r) for r in result]


def span_size_mod(rows, M) -> int:
    """Cardinality of the subgroup of (Z/M)^n generated by ``rows``."""
    size = 1
    for r in howell_form(rows, M):
        lead = r[_pivot(r)]
        size *= M // gcd(lead, M)
    return size
