"""Dense exact linear algebra over the prime field F_p.

Matrices are numpy int64 arrays with entries reduced to 0..p-1; every
operation is exact modular arithmetic (no floating point anywhere).
Maps act on column vectors, so a map V -> W of dimensions (s, t) is a
t x s matrix and composition is matrix product.

Subspaces of F_p^d are handled as matrices whose *columns* span them;
`column_space` returns the unique reduced canonical basis, so two
subspaces are equal iff their canonical bases are equal arrays.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def as_fp(a, p: int) -> np.ndarray:
    """Coerce to an immutable int64 array reduced mod p."""
    m = np.array(a, dtype=np.int64) % p
    m.setflags(write=False)
    return m


def zeros(rows: int, cols: int) -> np.ndarray:
    m = np.zeros((rows, cols), dtype=np.int64)
    m.setflags(write=False)
    return m


def eye(n: int) -> np.ndarray:
    m = np.eye(n, dtype=np.int64)
    m.setflags(write=False)
    return m


def inv_mod(a: int, p: int) -> int:
    return pow(int(a) % p, p - 2, p)


def matmul(p: int, *factors: np.ndarray) -> np.ndarray:
    """Product of maps, reducing mod p after each multiplication."""
    out = factors[0]
    for f in factors[1:]:
        out = (out @ f) % p
    out = np.ascontiguousarray(out)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Rref:
    """Reduced row echelon form: rank, pivot columns, the reduced
    matrix, and a kernel basis (columns spanning the null space)."""

    rank: int
    pivots: tuple[int, ...]
    matrix: np.ndarray
    kernel: np.ndarray


def rref(a, p: int) -> Rref:
    m = np.array(a, dtype=np.int64) % p
    if m.ndim != 2:
        raise ValueError("rref expects a 2d matrix")
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            m[[r, i]] = m[[i, r]]
        m[r] = (m[r] * inv_mod(m[r, c], p)) % p
        col = m[:, c].copy()
        col[r] = 0
        hit = np.nonzero(col)[0]
        if hit.size:
            m[hit] = (m[hit] - np.outer(col[hit], m[r])) % p
        pivots.append(c)
        r += 1
    # kernel basis: one column per free coordinate
    free = [c for c in range(cols) if c not in set(pivots)]
    kern = np.zeros((cols, len(free)), dtype=np.int64)
    for j, c in enumerate(free):
        kern[c, j] = 1
        for i, pc in enumerate(pivots):
            kern[pc, j] = (-m[i, c]) % p
    m.setflags(write=False)
    kern.setflags(write=False)
    return Rref(rank=len(pivots), pivots=tuple(pivots), matrix=m, kernel=kern)


def rank(a, p: int) -> int:
    return rref(a, p).rank


def kernel_basis(a, p: int) -> np.ndarray:
    return rref(a, p).kernel


def column_space(a, p: int) -> np.ndarray:
    """Canonical basis of the column span: columns are the nonzero rows
    of the row-reduced transpose, transposed back."""
    r = rref(np.array(a, dtype=np.int64).T, p)
    basis = r.matrix[: r.rank].T.copy()
    basis.setflags(write=False)
    return basis


def row_space(a, p: int) -> np.ndarray:
    r = rref(a, p)
    rows = r.matrix[: r.rank].copy()
    rows.setflags(write=False)
    return rows


def subspace_equal(a, b, p: int) -> bool:
    """Equality of the column spans of a and b."""
    return np.array_equal(column_space(a, p), column_space(b, p))


def subspace_contains(a, b, p: int) -> bool:
    """Does the column span of a contain every column of b?"""
    a = np.array(a, dtype=np.int64)
    b = np.array(b, dtype=np.int64)
    if b.size == 0:
        return True
    return rank(a, p) == rank(np.hstack([a, b]), p)


def sum_spaces(p: int, *spaces: np.ndarray) -> np.ndarray:
    parts = [s for s in spaces if s.size]
    if not parts:
        dim = spaces[0].shape[0] if spaces else 0
        return zeros(dim, 0)
    return column_space(np.hstack(parts), p)


def solve(a, b, p: int) -> np.ndarray | None:
    """Solve a @ x = b column-wise; None if inconsistent.

    Returns the unique solution with zero entries in all non-pivot
    coordinates (the least solution in the fixed coordinate order),
    which keeps every construction downstream reproducible.
    """
    a = np.array(a, dtype=np.int64) % p
    b = np.array(b, dtype=np.int64) % p
    single = b.ndim == 1
    if single:
        b = b[:, None]
    n = a.shape[1]
    r = rref(np.hstack([a, b]), p)
    for i, c in enumerate(r.pivots):
        if c >= n:
            return None
    x = np.zeros((n, b.shape[1]), dtype=np.int64)
    for i, c in enumerate(r.pivots):
        x[c] = r.matrix[i, n:]
    x.setflags(write=False)
    return x[:, 0] if single else x


def inverse(a, p: int) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    if a.shape[0] != a.shape[1]:
        raise ValueError("inverse of a non-square matrix")
    x = solve(a, eye(a.shape[0]), p)
    if x is None or rank(a, p) != a.shape[0]:
        raise ValueError("matrix is singular")
    return x


def is_invertible(a, p: int) -> bool:
    a = np.array(a, dtype=np.int64)
    return a.shape[0] == a.shape[1] and rank(a, p) == a.shape[0]


@dataclass(frozen=True)
class Quotient:
    """Quotient of F_p^dim by a subspace: projection (q x dim), section
    (dim x q) with proj @ section = id, and the killed subspace's pivot
    coordinates."""

    proj: np.ndarray
    section: np.ndarray
    pivots: tuple[int, ...]


def quotient_space(dim: int, subspace, p: int) -> Quotient:
    """Quotient map for F_p^dim / <columns of subspace>.

    The quotient basis is the set of non-pivot standard coordinates of
    the reduced subspace, in their natural order.
    """
    sub = np.array(subspace, dtype=np.int64)
    if sub.size == 0:
        sub = np.zeros((dim, 0), dtype=np.int64)
    r = rref(sub.T, p)
    piv = r.pivots
    nonpiv = [c for c in range(dim) if c not in set(piv)]
    q = len(nonpiv)
    proj = np.zeros((q, dim), dtype=np.int64)
    for j, c in enumerate(nonpiv):
        proj[j, c] = 1
    # reducing a pivot coordinate rewrites it as minus the tail of its
    # echelon row on the non-pivot coordinates
    for i, c in enumerate(piv):
        proj[:, c] = (-r.matrix[i, nonpiv]) % p
    section = np.zeros((dim, q), dtype=np.int64)
    for j, c in enumerate(nonpiv):
        section[c, j] = 1
    proj.setflags(write=False)
    section.setflags(write=False)
    return Quotient(proj=proj, section=section, pivots=piv)


def random_matrix(rng, rows: int, cols: int, p: int) -> np.ndarray:
    m = np.array([[rng.randrange(p) for _ in range(cols)] for _ in range(rows)],
                 dtype=np.int64).reshape(rows, cols)
    m.setflags(write=False)
    return m
