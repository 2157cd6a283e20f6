"""Finite-dimensional modules over the artinian level rings A_k.

A `LevelModule` is an F_p-space of dimension d together with the n
commuting generator actions X_1..X_n (multiplication by the variables);
m^(k+1) acts as zero.  A `LevelMap` is an F_p-matrix intertwining the
actions.  Everything downstream (towers, complexes, duality) reduces to
kernels, cokernels and solves over these modules.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import linalg
from .ring import ConfigMismatch, RingConfig, SeriesMatrix, TruncatedSeries


class LevelMismatch(Exception):
    """Operands live at different levels where equality is required."""


class ValidationError(Exception):
    """A structural invariant failed."""


class LevelModule:
    def __init__(self, cfg: RingConfig, level: int, actions, labels=None):
        cfg.check_level(level)
        self.config = cfg
        self.level = level
        acts = []
        for a in actions:
            m = np.array(a, dtype=np.int64) % cfg.p
            m.setflags(write=False)
            acts.append(m)
        if len(acts) != cfg.n:
            raise ValueError("one action per variable required")
        self.actions = tuple(acts)
        self.dim = int(acts[0].shape[0]) if acts else 0
        for a in acts:
            if a.shape != (self.dim, self.dim):
                raise ValueError("action extents disagree")
        self.labels = tuple(labels) if labels is not None else None

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(cfg: RingConfig, level: int) -> "LevelModule":
        return LevelModule(cfg, level, [np.zeros((0, 0), dtype=np.int64)
                                        for _ in range(cfg.n)])

    @staticmethod
    def free(cfg: RingConfig, level: int, rank: int, labels=None) -> "LevelModule":
        """A_k^rank on the component-major basis (component, monomial)."""
        acts = [np.kron(np.eye(rank, dtype=np.int64), x)
                for x in cfg.level_actions(level)]
        if labels is None:
            labels = list(range(rank))
        mons = cfg.monomials(level)
        basis = [(z, e) for z in labels for e in mons]
        return LevelModule(cfg, level, acts, labels=basis)

    # -- structure ----------------------------------------------------

    def action_of_monomial(self, e: tuple[int, ...]) -> np.ndarray:
        e = tuple(int(a) for a in e)
        cache = self.__dict__.setdefault("_mono_cache", {})
        if e in cache:
            return cache[e]
        if sum(e) == 0:
            m = linalg.eye(self.dim)
        else:
            # peel one variable off and recurse so products are shared
            i = next(j for j, a in enumerate(e) if a)
            prev = self.action_of_monomial(
                tuple(a - 1 if j == i else a for j, a in enumerate(e)))
            m = linalg.matmul(self.config.p, self.actions[i], prev)
        cache[e] = m
        return m

    def series_operator(self, f: TruncatedSeries) -> np.ndarray:
        """Matrix of multiplication by a series (evaluated on actions)."""
        p = self.config.p
        out = np.zeros((self.dim, self.dim), dtype=np.int64)
        for e, c in f.coeffs.items():
            out = (out + c * self.action_of_monomial(e)) % p
        out.setflags(write=False)
        return out

    def ideal_power_span(self, t: int) -> np.ndarray:
        """Canonical basis of m^t * M (zero-column matrix for t = 0 span M)."""
        if t == 0:
            return linalg.eye(self.dim)
        p = self.config.p
        cols = [self.action_of_monomial(e)
                for e in _exact_degree_monomials(self.config.n, t)]
        if not cols:
            return linalg.zeros(self.dim, 0)
        return linalg.column_space(np.hstack(cols), p)

    def ideal_power_kernel(self, t: int) -> np.ndarray:
        """Canonical basis of the m^t-kernel {v : m^t v = 0}."""
        mats = [self.action_of_monomial(e)
                for e in _exact_degree_monomials(self.config.n, t)]
        if not mats:
            return linalg.eye(self.dim)
        stacked = np.vstack(mats)
        return linalg.column_space(linalg.kernel_basis(stacked, self.config.p),
                                   self.config.p)

    def minimal_generator_count(self) -> int:
        return self.dim - int(self.ideal_power_span(1).shape[1])

    def check(self) -> None:
        """Assert commutation and nilpotency (m^(k+1) acts as zero)."""
        p = self.config.p
        for i in range(len(self.actions)):
            for j in range(i + 1, len(self.actions)):
                a, b = self.actions[i], self.actions[j]
                if not np.array_equal((a @ b) % p, (b @ a) % p):
                    raise ValidationError(f"actions {i} and {j} do not commute")
        for e in _exact_degree_monomials(self.config.n, self.level + 1):
            if np.any(self.action_of_monomial(e)):
                raise ValidationError(
                    f"monomial {e} of degree {self.level + 1} acts nonzero")

    def __repr__(self):
        return f"LevelModule(level={self.level}, dim={self.dim})"


@dataclass(frozen=True)
class LevelMap:
    """A-linear map between level modules (possibly at different levels,
    the target then being a module over the source's level ring through
    the quotient)."""

    source: LevelModule
    target: LevelModule
    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.int64) % self.source.config.p
        if m.shape != (self.target.dim, self.source.dim):
            raise ValueError(
                f"matrix shape {m.shape} does not match "
                f"({self.target.dim}, {self.source.dim})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.source.config != self.target.config:
            raise ConfigMismatch("map across ring configs")

    @property
    def config(self):
        return self.source.config

    def check(self) -> None:
        p = self.config.p
        for xs, xt in zip(self.source.actions, self.target.actions):
            if not np.array_equal((self.matrix @ xs) % p,
                                  (xt @ self.matrix) % p):
                raise ValidationError("map does not commute with the actions")

    def compose(self, other: "LevelMap") -> "LevelMap":
        """self after other."""
        if other.target is not self.source and other.target.dim != self.source.dim:
            raise ValueError("composition shape mismatch")
        return LevelMap(other.source, self.target,
                        linalg.matmul(self.config.p, self.matrix, other.matrix))

    def is_surjective(self) -> bool:
        return linalg.rank(self.matrix, self.config.p) == self.target.dim

    def is_injective(self) -> bool:
        return linalg.rank(self.matrix, self.config.p) == self.source.dim

    def is_bijective(self) -> bool:
        return (self.source.dim == self.target.dim
                and self.is_surjective())

    def __repr__(self):
        return (f"LevelMap({self.source.dim}->{self.target.dim}, "
                f"level {self.source.level}->{self.target.level})")


def identity_map(m: LevelModule) -> LevelMap:
    return LevelMap(m, m, linalg.eye(m.dim))


def zero_map(src: LevelModule, tgt: LevelModule) -> LevelMap:
    return LevelMap(src, tgt, linalg.zeros(tgt.dim, src.dim))


@lru_cache(maxsize=None)
def _exact_degree_monomials(n: int, t: int):
    block = [e for e in itertools.product(range(t + 1), repeat=n)
             if sum(e) == t]
    block.sort(reverse=True)
    return tuple(block)


# -- submodule / quotient plumbing -------------------------------------


def submodule(ambient: LevelModule, basis, level: int | None = None):
    """Module structure on an action-invariant subspace.

    `basis` has the subspace vectors as columns; returns the module (at
    `level`, default the ambient level) and the inclusion map.
    """
    p = ambient.config.p
    basis = np.array(basis, dtype=np.int64) % p
    lvl = ambient.level if level is None else lvl_check(ambient, level)
    acts = []
    for x in ambient.actions:
        moved = linalg.matmul(p, x, basis)
        coords = linalg.solve(basis, moved, p)
        if coords is None:
            raise ValidationError("subspace is not action-invariant")
        acts.append(coords)
    mod = LevelModule(ambient.config, lvl, acts)
    return mod, LevelMap(mod, ambient, basis)


def lvl_check(ambient: LevelModule, level: int) -> int:
    ambient.config.check_level(level)
    return level


def quotient_module(ambient: LevelModule, subspace, level: int | None = None):
    """Quotient by an action-invariant subspace; returns (module, projection)."""
    p = ambient.config.p
    q = linalg.quotient_space(ambient.dim, subspace, p)
    lvl = ambient.level if level is None else level
    acts = [linalg.matmul(p, q.proj, x, q.section) for x in ambient.actions]
    mod = LevelModule(ambient.config, lvl, acts)
    return mod, LevelMap(ambient, mod, q.proj), q.section


# -- the level operations ----------------------------------------------


def module_from_presentation(cfg: RingConfig, k: int, relations: SeriesMatrix,
                             rank: int):
    """Cokernel of A_k^s -> A_k^r given by the relation columns.

    Returns (module, projection from the free module of rank r).
    """
    cfg.check_level(k)
    if relations.rows != rank:
        raise ValueError(
            f"relation matrix has {relations.rows} rows, expected {rank}")
    free = LevelModule.free(cfg, k, rank)
    gens = relations.column_vectors(k)
    cols = [gens]
    for e in cfg.monomials(k):
        if sum(e) == 0:
            continue
        cols.append(linalg.matmul(cfg.p, free.action_of_monomial(e), gens))
    span = np.hstack(cols) if gens.size else linalg.zeros(free.dim, 0)
    mod, proj, _ = quotient_module(free, span)
    return mod, proj


def kernel(f: LevelMap):
    """Kernel with its inclusion (a module at the source's level)."""
    basis = linalg.kernel_basis(f.matrix, f.config.p)
    basis = linalg.column_space(basis, f.config.p)
    mod, incl = submodule(f.source, basis)
    return mod, incl


def image(f: LevelMap):
    """Image with inclusion into the target and the factor map from the source."""
    p = f.config.p
    basis = linalg.column_space(f.matrix, p)
    mod, incl = submodule(f.target, basis, level=f.target.level)
    factor = linalg.solve(basis, f.matrix, p)
    return mod, incl, LevelMap(f.source, mod, factor)


def cokernel(f: LevelMap):
    """Cokernel with its projection."""
    mod, proj, _ = quotient_module(f.target, f.matrix)
    return mod, proj


def tensor(m: LevelModule, n: LevelModule):
    """M tensor N over A_k: quotient of the F_p tensor product by the
    relations (x_i u) ⊗ v - u ⊗ (x_i v)."""
    if m.level != n.level:
        raise LevelMismatch("tensor of modules at different levels")
    if m.config != n.config:
        raise ConfigMismatch("tensor across ring configs")
    p = m.config.p
    dm, dn = m.dim, n.dim
    rel_blocks = []
    for xm, xn in zip(m.actions, n.actions):
        op = (np.kron(xm, np.eye(dn, dtype=np.int64))
              - np.kron(np.eye(dm, dtype=np.int64), xn)) % p
        rel_blocks.append(op)
    span = linalg.column_space(np.hstack(rel_blocks), p)
    big = LevelModule(m.config, m.level,
                      [np.kron(xm, np.eye(dn, dtype=np.int64)) % p
                       for xm in m.actions])
    mod, proj, _ = quotient_module(big, span)
    return mod, proj


def hom_module(m: LevelModule, n: LevelModule):
    """Hom_{A_k}(M, N): the action-commuting matrices, with the module
    structure by post-composition.  Returns (module, basis) where basis
    columns are vec'd matrices (column-major)."""
    if m.level != n.level:
        raise LevelMismatch("hom of modules at different levels")
    p = m.config.p
    dm, dn = m.dim, n.dim
    constraints = []
    for xm, xn in zip(m.actions, n.actions):
        constraints.append(
            (np.kron(xm.T, np.eye(dn, dtype=np.int64))
             - np.kron(np.eye(dm, dtype=np.int64), xn)) % p)
    basis = linalg.column_space(
        linalg.kernel_basis(np.vstack(constraints), p), p)
    acts = []
    for xn in n.actions:
        post = np.kron(np.eye(dm, dtype=np.int64), xn) % p
        coords = linalg.solve(basis, linalg.matmul(p, post, basis), p)
        acts.append(coords)
    mod = LevelModule(m.config, m.level, acts)
    return mod, basis


def hom_element(m: LevelModule, n: LevelModule, vec) -> LevelMap:
    """Reassemble a vec'd hom-space vector into an actual map."""
    mat = np.array(vec, dtype=np.int64).reshape((n.dim, m.dim), order="F")
    return LevelMap(m, n, mat)


def base_change(m: LevelModule, k: int | None = None):
    """M / m^(k+1) M at the lower level k (default: one step down).

    Returns (module at level k, canonical projection).
    """
    if k is None:
        k = m.level - 1
    if k < 0:
        raise ValueError("cannot base change below level 0")
    if k > m.level:
        raise ValueError("base change must lower the level")
    span = m.ideal_power_span(k + 1)
    mod, proj, _ = quotient_module(m, span, level=k)
    return mod, proj


def base_change_map(f: LevelMap, k: int):
    """Induced map between the level-k base changes."""
    ms, ps = base_change(f.source, k)
    mt, pt = base_change(f.target, k)
    p = f.config.p
    # well-defined because f is A-linear: f(m^(k+1) src) ⊆ m^(k+1) tgt
    sec = section_of(ps)
    mat = linalg.matmul(p, pt.matrix, f.matrix, sec)
    return LevelMap(ms, mt, mat), ps, pt


def section_of(proj: LevelMap) -> np.ndarray:
    """A right inverse of a surjective map (deterministic solve)."""
    sec = linalg.solve(proj.matrix, linalg.eye(proj.target.dim),
                       proj.config.p)
    if sec is None:
        raise ValidationError("map is not surjective")
    return sec


def is_free(m: LevelModule):
    """Freeness test over the local artinian level ring.

    Returns (flag, generator vectors): free iff dim = (minimal
    generator count) * dim(A_k) and the evident cover by the free
    module on lifted minimal generators is bijective.
    """
    cfg = m.config
    g = m.minimal_generator_count()
    if m.dim != g * cfg.dim(m.level):
        return False, None
    if g == 0:
        return True, linalg.zeros(m.dim, 0)
    rad = m.ideal_power_span(1)
    q = linalg.quotient_space(m.dim, rad, cfg.p)
    gens = q.section  # lifts of a basis of M/mM
    cover = _free_cover_matrix(m, gens)
    if linalg.rank(cover, cfg.p) == m.dim:
        return True, gens
    return False, None


def _free_cover_matrix(m: LevelModule, gens: np.ndarray) -> np.ndarray:
    """Matrix of A_k^g -> M sending (component t, monomial e) to x^e g_t."""
    cfg = m.config
    mons = cfg.monomials(m.level)
    cols = []
    for t in range(gens.shape[1]):
        v = gens[:, t]
        for e in mons:
            cols.append(linalg.matmul(cfg.p, m.action_of_monomial(e),
                                      v.reshape(-1, 1))[:, 0])
    if not cols:
        return linalg.zeros(m.dim, 0)
    out = np.stack(cols, axis=1)
    out.setflags(write=False)
    return out


def free_cover(m: LevelModule):
    """Surjection from a free module on minimal generators."""
    cfg = m.config
    rad = m.ideal_power_span(1)
    q = linalg.quotient_space(m.dim, rad, cfg.p)
    gens = q.section
    free = LevelModule.free(cfg, m.level, gens.shape[1])
    return LevelMap(free, m, _free_cover_matrix(m, gens)), gens


def direct_sum_modules(mods: list[LevelModule]):
    """Block direct sum with injections and projections."""
    cfg = mods[0].config
    lvl = mods[0].level
    for m in mods:
        if m.level != lvl:
            raise LevelMismatch("direct sum of modules at different levels")
    dims = [m.dim for m in mods]
    total = sum(dims)
    acts = []
    for i in range(cfg.n):
        big = np.zeros((total, total), dtype=np.int64)
        off = 0
        for m in mods:
            big[off:off + m.dim, off:off + m.dim] = m.actions[i]
            off += m.dim
        acts.append(big)
    out = LevelModule(cfg, lvl, acts)
    injections, projections = [], []
    off = 0
    for m in mods:
        inj = np.zeros((total, m.dim), dtype=np.int64)
        inj[off:off + m.dim] = np.eye(m.dim, dtype=np.int64)
        injections.append(LevelMap(m, out, inj))
        projections.append(LevelMap(out, m, inj.T))
        off += m.dim
    return out, injections, projections


def is_isomorphic(m: LevelModule, n: LevelModule, seed: int = 0,
                  retries: int = 24) -> bool:
    """Isomorphism of level modules.

    Solves the commutant system Hom(M, N) and looks for an invertible
    element: random combinations first (seeded, >= 3 retries), then a
    deterministic search over the basis and over sums of basis pairs.
    """
    if m.config != n.config or m.level != n.level or m.dim != n.dim:
        return False
    if m.dim == 0:
        return True
    p = m.config.p
    _, basis = hom_module(m, n)
    h = basis.shape[1]
    if h == 0:
        return False
    rng = random.Random(seed)
    for _ in range(max(3, retries)):
        coeffs = np.array([rng.randrange(p) for _ in range(h)], dtype=np.int64)
        cand = (basis @ coeffs).reshape((n.dim, m.dim), order="F") % p
        if linalg.is_invertible(cand, p):
            return True
    for j in range(h):
        cand = basis[:, j].reshape((n.dim, m.dim), order="F")
        if linalg.is_invertible(cand, p):
            return True
    for i in range(h):
        for j in range(i + 1, h):
            for c in range(1, p):
                cand = ((basis[:, i] + c * basis[:, j]) % p) \
                    .reshape((n.dim, m.dim), order="F")
                if linalg.is_invertible(cand, p):
                    return True
    return False
