"""The base ring F_p[[x1..xn]] at finite adic precision.

A `RingConfig` fixes the prime p, the number of variables n and the
maximal precision N.  The ring is only ever touched through its
artinian level quotients A_k = A/m^(k+1) (m the maximal ideal), whose
F_p-basis is the set of monomials of total degree <= k in a fixed
graded lexicographic order.  A `TruncatedSeries` is an element of the
ring known up to degree N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import linalg


class PrecisionError(Exception):
    """A level beyond the configured precision was requested."""


class ConfigMismatch(Exception):
    """Operands created over different ring configurations."""


def _is_prime(p: int) -> bool:
    if p < 2:
        return False
    d = 2
    while d * d <= p:
        if p % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class RingConfig:
    """Ambient data (p, n, N): coefficients F_p, n variables, precision N."""

    p: int
    n: int
    N: int

    def __post_init__(self):
        if not _is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if self.n < 1:
            raise ValueError("need at least one variable")
        if self.N < 0:
            raise ValueError("precision must be >= 0")

    def check_level(self, k: int) -> None:
        if not (0 <= k <= self.N):
            raise PrecisionError(f"level {k} exceeds precision {self.N}")

    def with_precision(self, new_n: int) -> "RingConfig":
        return RingConfig(self.p, self.n, new_n)

    def dim(self, k: int) -> int:
        """F_p-dimension of A_k: monomials of degree <= k in n variables."""
        return comb(self.n + k, self.n)

    def monomials(self, k: int) -> tuple[tuple[int, ...], ...]:
        self.check_level(k)
        return _monomials(self.n, k)

    def monomial_index(self, k: int) -> dict[tuple[int, ...], int]:
        self.check_level(k)
        return _monomial_index(self.n, k)

    def variable(self, i: int) -> "TruncatedSeries":
        e = tuple(1 if j == i else 0 for j in range(self.n))
        return TruncatedSeries(self, {e: 1})

    def one(self) -> "TruncatedSeries":
        return TruncatedSeries(self, {(0,) * self.n: 1})

    def zero(self) -> "TruncatedSeries":
        return TruncatedSeries(self, {})

    def series(self, coeffs: dict[tuple[int, ...], int]) -> "TruncatedSeries":
        return TruncatedSeries(self, coeffs)

    def multiplication_matrix(self, f: "TruncatedSeries", k: int) -> np.ndarray:
        """Matrix of multiplication by f on the monomial basis of A_k."""
        self.check_level(k)
        mons = self.monomials(k)
        idx = self.monomial_index(k)
        d = len(mons)
        m = np.zeros((d, d), dtype=np.int64)
        for e, c in f.coeffs.items():
            de = sum(e)
            for j, b in enumerate(mons):
                if sum(b) + de > k:
                    continue
                tgt = tuple(x + y for x, y in zip(e, b))
                m[idx[tgt], j] = (m[idx[tgt], j] + c) % self.p
        m.setflags(write=False)
        return m

    def level_actions(self, k: int) -> tuple[np.ndarray, ...]:
        """Multiplication by each variable on A_k."""
        return tuple(self.multiplication_matrix(self.variable(i), k)
                     for i in range(self.n))

    def truncation_matrix(self, k_from: int, k_to: int) -> np.ndarray:
        """Coordinate matrix of the quotient A_{k_from} -> A_{k_to}."""
        if k_to > k_from:
            raise ValueError("truncation must lower the level")
        self.check_level(k_from)
        src = self.monomial_index(k_from)
        mons_to = self.monomials(k_to)
        m = np.zeros((len(mons_to), self.dim(k_from)), dtype=np.int64)
        for i, e in enumerate(mons_to):
            m[i, src[e]] = 1
        m.setflags(write=False)
        return m


@lru_cache(maxsize=None)
def _monomials(n: int, k: int) -> tuple[tuple[int, ...], ...]:
    # graded lexicographic: by total degree, then higher power of an
    # earlier variable first (x1^2 before x1*x2 before x2^2)
    out: list[tuple[int, ...]] = []
    for d in range(k + 1):
        block = [e for e in itertools.product(range(d + 1), repeat=n)
                 if sum(e) == d]
        block.sort(reverse=True)
        out.extend(block)
    return tuple(out)


@lru_cache(maxsize=None)
def _monomial_index(n: int, k: int) -> dict[tuple[int, ...], int]:
    return {e: i for i, e in enumerate(_monomials(n, k))}


@dataclass(frozen=True)
class TruncatedSeries:
    """Element of F_p[[x1..xn]] known modulo m^(N+1).

    `coeffs` maps exponent vectors (degree <= N) to nonzero residues;
    the canonical form never stores explicit zeros.
    """

    config: RingConfig
    coeffs: dict[tuple[int, ...], int] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for e, c in self.coeffs.items():
            if len(e) != self.config.n:
                raise ValueError(f"exponent vector {e} has wrong arity")
            if sum(e) > self.config.N:
                continue
            c %= self.config.p
            if c:
                clean[tuple(int(x) for x in e)] = c
        object.__setattr__(self, "coeffs", clean)

    def _same(self, other: "TruncatedSeries") -> None:
        if self.config != other.config:
            raise ConfigMismatch("series over different ring configs")

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._same(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = (out.get(e, 0) + c) % self.config.p
        return TruncatedSeries(self.config, out)

    def __neg__(self) -> "TruncatedSeries":
        return TruncatedSeries(
            self.config, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def __mul__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._same(other)
        cfg = self.config
        out: dict[tuple[int, ...], int] = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if sum(e) > cfg.N:
                    continue
                out[e] = (out.get(e, 0) + c1 * c2) % cfg.p
        return TruncatedSeries(cfg, out)

    def scale(self, c: int) -> "TruncatedSeries":
        return TruncatedSeries(
            self.config, {e: c * v for e, v in self.coeffs.items()})

    def order(self) -> int:
        """Adic order: minimal total degree of a nonzero term.

        The zero truncation returns the sentinel N + 1, to be read as
        "order at least N + 1": precision loss is explicit, never an
        infinity pretending to be knowledge.
        """
        if not self.coeffs:
            return self.config.N + 1
        return min(sum(e) for e in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def truncate(self, k: int) -> "TruncatedSeries":
        return TruncatedSeries(
            self.config,
            {e: c for e, c in self.coeffs.items() if sum(e) <= k})

    def rebase(self, cfg: RingConfig) -> "TruncatedSeries":
        """Move to another precision of the same base ring."""
        if (cfg.p, cfg.n) != (self.config.p, self.config.n):
            raise ConfigMismatch("rebase must preserve p and n")
        return TruncatedSeries(cfg, dict(self.coeffs))

    def vector(self, k: int) -> np.ndarray:
        """Coefficient vector on the monomial basis of A_k."""
        idx = self.config.monomial_index(k)
        v = np.zeros(self.config.dim(k), dtype=np.int64)
        for e, c in self.coeffs.items():
            if sum(e) <= k:
                v[idx[e]] = c
        v.setflags(write=False)
        return v

    @staticmethod
    def from_vector(cfg: RingConfig, k: int, v) -> "TruncatedSeries":
        mons = cfg.monomials(k)
        return TruncatedSeries(cfg, {mons[i]: int(c) for i, c in enumerate(v)})

    def __eq__(self, other) -> bool:
        return (isinstance(other, TruncatedSeries)
                and self.config == other.config
                and self.coeffs == other.coeffs)

    def __hash__(self):
        return hash((self.config, tuple(sorted(self.coeffs.items()))))

    def __repr__(self):
        if not self.coeffs:
            return "0"
        def mono(e):
            parts = []
            for i, a in enumerate(e):
                if a == 1:
                    parts.append(f"x{i + 1}")
                elif a > 1:
                    parts.append(f"x{i + 1}^{a}")
            return "*".join(parts) or "1"
        terms = sorted(self.coeffs.items(), key=lambda t: (sum(t[0]), tuple(-x for x in t[0])))
        return " + ".join(f"{c}*{mono(e)}" if mono(e) != "1" else str(c)
                          for e, c in terms)


class SeriesMatrix:
    """Matrix over the truncated power-series ring (rows x cols)."""

    def __init__(self, cfg: RingConfig, entries, cols: int | None = None):
        self.config = cfg
        self.entries = [list(row) for row in entries]
        self.rows = len(self.entries)
        if self.rows:
            self.cols = len(self.entries[0])
        else:
            self.cols = 0 if cols is None else cols
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged series matrix")
            for f in row:
                if f.config != cfg:
                    raise ConfigMismatch("entry over a different config")

    @staticmethod
    def zero(cfg: RingConfig, rows: int, cols: int) -> "SeriesMatrix":
        z = cfg.zero()
        return SeriesMatrix(cfg, [[z] * cols for _ in range(rows)], cols=cols)

    def transpose(self) -> "SeriesMatrix":
        return SeriesMatrix(
            self.config,
            [[self.entries[i][j] for i in range(self.rows)]
             for j in range(self.cols)],
            cols=self.rows)

    def scale(self, c: int) -> "SeriesMatrix":
        return SeriesMatrix(
            self.config,
            [[f.scale(c) for f in row] for row in self.entries],
            cols=self.cols)

    def __matmul__(self, other: "SeriesMatrix") -> "SeriesMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        cfg = self.config
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = cfg.zero()
                for t in range(self.cols):
                    acc = acc + self.entries[i][t] * other.entries[t][j]
                row.append(acc)
            out.append(row)
        return SeriesMatrix(cfg, out, cols=other.cols)

    def is_zero(self) -> bool:
        return all(f.is_zero() for row in self.entries for f in row)

    def rebase(self, cfg: RingConfig) -> "SeriesMatrix":
        return SeriesMatrix(cfg, [[f.rebase(cfg) for f in row]
                                  for row in self.entries], cols=self.cols)

    def level_matrix(self, k: int) -> np.ndarray:
        """Block matrix of the induced map A_k^cols -> A_k^rows.

        Free-module coordinates are component-major: basis element
        (component j, monomial e) sits at index j*dim(A_k) + index(e).
        """
        cfg = self.config
        b = cfg.dim(k)
        m = np.zeros((self.rows * b, self.cols * b), dtype=np.int64)
        for i in range(self.rows):
            for j in range(self.cols):
                f = self.entries[i][j]
                if not f.is_zero():
                    m[i * b:(i + 1) * b, j * b:(j + 1) * b] = \
                        cfg.multiplication_matrix(f, k)
        m.setflags(write=False)
        return m

    def column_vectors(self, k: int) -> np.ndarray:
        """Columns as level-k coefficient vectors in A_k^rows."""
        b = self.config.dim(k)
        m = np.zeros((self.rows * b, self.cols), dtype=np.int64)
        for j in range(self.cols):
            for i in range(self.rows):
                m[i * b:(i + 1) * b, j] = self.entries[i][j].vector(k)
        m.setflags(write=False)
        return m

    def __eq__(self, other) -> bool:
        return (isinstance(other, SeriesMatrix)
                and self.config == other.config
                and self.entries == other.entries)

    def __repr__(self):
        return f"SeriesMatrix({self.rows}x{self.cols})"


def min_order(m: SeriesMatrix) -> int:
    """Least adic order among the entries (N+1 for the zero matrix)."""
    orders = [f.order() for row in m.entries for f in row]
    return min(orders, default=m.config.N + 1)
