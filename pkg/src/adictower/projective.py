"""Adically projective towers and the splitting-lift algorithm.

Over the local artinian level rings, projective means free, so formal
projectivity of a tower is a level-wise freeness test.  A surjection
onto a formally projective tower from an adically free one splits, and
the splitting is built level by level: split at level 0 (everything is
a vector space there), then repeatedly correct an arbitrary splitting
of the next level by a lift of its defect through the kernel tower.
The defect lift exists because base change is right exact (the kernel
transitions are surjective) and the level modules are projective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .level import LevelModule, ValidationError, is_free, submodule
from .tower import DecayingFree, TowerModule, TowerMorphism


def is_formally_projective(tower: TowerModule) -> dict:
    """Level-wise freeness verdicts and the overall one."""
    per_level = []
    for k in range(tower.config.N + 1):
        flag, _ = is_free(tower.level(k))
        per_level.append(bool(flag))
    return {"per_level": per_level, "formally_projective": all(per_level)}


@dataclass
class SplittingTower:
    """An inverse system of splittings of a tower surjection from an
    adically free module: alpha_k ∘ beta_k = id and the beta squares
    commute with the transitions."""

    free: TowerModule
    module: TowerModule
    alphas: list[np.ndarray]
    betas: list[np.ndarray]

    def check(self) -> None:
        cfg = self.free.config
        p = cfg.p
        for k in range(cfg.N + 1):
            pk = self.module.level(k)
            comp = linalg.matmul(p, self.alphas[k], self.betas[k])
            if not np.array_equal(comp, linalg.eye(pk.dim)):
                raise ValidationError(f"alpha∘beta is not id at level {k}")
        for k in range(cfg.N):
            lhs = linalg.matmul(p, self.free.transitions[k].matrix,
                                self.betas[k + 1])
            rhs = linalg.matmul(p, self.betas[k],
                                self.module.transitions[k].matrix)
            if not np.array_equal(lhs, rhs):
                raise ValidationError(
                    f"beta compatibility square fails at level {k}")


def _linear_splitting(fk: LevelModule, pk: LevelModule,
                      alpha: np.ndarray) -> np.ndarray | None:
    """Deterministic A_k-linear right inverse of alpha, or None."""
    p = fk.config.p
    df, dp = fk.dim, pk.dim
    rows = [np.kron(np.eye(dp, dtype=np.int64), alpha) % p]
    rhs = [np.eye(dp, dtype=np.int64).reshape(-1, order="F")]
    for xf, xp in zip(fk.actions, pk.actions):
        rows.append((np.kron(np.eye(dp, dtype=np.int64), xf)
                     - np.kron(xp.T, np.eye(df, dtype=np.int64))) % p)
        rhs.append(np.zeros(dp * df, dtype=np.int64))
    sol = linalg.solve(np.vstack(rows), np.concatenate(rhs), p)
    if sol is None:
        return None
    return sol.reshape((df, dp), order="F")


def lift_splittings(alpha: TowerMorphism) -> SplittingTower:
    """Compatible splittings of a level-wise surjection from an
    adically free tower onto a formally projective one.

    Implements the inductive construction: any splitting at the next
    level is corrected by a lift of its incompatibility defect through
    the surjective kernel transition, so that the corrected splitting
    commutes with the one already built.
    """
    free, mod = alpha.source, alpha.target
    cfg = free.config
    p = cfg.p
    verdict = is_formally_projective(mod)
    if not verdict["formally_projective"]:
        raise ValidationError("target tower is not formally projective")
    alphas = [alpha.level_matrix(k) for k in range(cfg.N + 1)]
    for k, a in enumerate(alphas):
        if linalg.rank(a, p) != mod.level(k).dim:
            raise ValidationError(f"surjection fails at level {k}")
    betas: list[np.ndarray] = []
    beta0 = _linear_splitting(free.level(0), mod.level(0), alphas[0])
    if beta0 is None:
        raise ValidationError("no splitting at level 0")
    betas.append(beta0)
    kernels = [linalg.column_space(linalg.kernel_basis(a, p), p)
               for a in alphas]
    for k in range(cfg.N):
        fk1, pk1 = free.level(k + 1), mod.level(k + 1)
        prime = _linear_splitting(fk1, pk1, alphas[k + 1])
        if prime is None:
            raise ValidationError(f"no splitting at level {k + 1}")
        theta_p = mod.transitions[k].matrix
        theta_f = free.transitions[k].matrix
        chi = (linalg.matmul(p, betas[k], theta_p)
               - linalg.matmul(p, theta_f, prime)) % p
        if np.any(linalg.matmul(p, alphas[k], chi)):
            raise ValidationError("defect does not land in the kernel")
        kk, kk1 = kernels[k], kernels[k + 1]
        chi_coords = linalg.solve(kk, chi, p)
        if chi_coords is None:
            raise ValidationError("defect escaped the kernel basis")
        phi = linalg.solve(kk, linalg.matmul(p, theta_f, kk1), p)
        if phi is None:
            raise ValidationError("kernel transition not defined")
        lift = _defect_lift(fk1, pk1, kk1, phi, chi_coords)
        if lift is None:
            raise ValidationError(f"defect lift failed at level {k + 1}")
        betas.append((prime + linalg.matmul(p, kk1, lift)) % p)
    out = SplittingTower(free=free, module=mod, alphas=alphas, betas=betas)
    out.check()
    return out


def _defect_lift(fk1: LevelModule, pk1: LevelModule, kernel_basis: np.ndarray,
                 phi: np.ndarray, chi_coords: np.ndarray):
    """A-linear T with phi ∘ T = chi (in kernel coordinates), so the
    corrected splitting is prime + kernel_basis @ T."""
    p = fk1.config.p
    dl = kernel_basis.shape[1]
    dp = pk1.dim
    rows = [np.kron(np.eye(dp, dtype=np.int64), phi) % p]
    rhs = [(chi_coords % p).reshape(-1, order="F")]
    for xf, xp in zip(fk1.actions, pk1.actions):
        # K T must intertwine the actions: Xf K T = K T Xp
        rows.append((np.kron(np.eye(dp, dtype=np.int64),
                             linalg.matmul(p, xf, kernel_basis))
                     - np.kron(xp.T, kernel_basis)) % p)
        rhs.append(np.zeros(rows[-1].shape[0], dtype=np.int64))
    sol = linalg.solve(np.vstack(rows), np.concatenate(rhs), p)
    if sol is None:
        return None
    return sol.reshape((dl, dp), order="F")


def cover_from_minimal_generators(mod: TowerModule):
    """Surjection onto a tower from the adically free module on its
    minimal generators (level-0 dimension many)."""
    cfg = mod.config
    g0 = mod.level(0).dim
    free = DecayingFree.finite(cfg, tuple(range(g0)))
    ft = free.tower()
    gens = mod.section_matrix(0)   # lifts of a level-0 basis to level N
    cols = []
    for t in range(g0):
        v = gens[:, t]
        for e in cfg.monomials(cfg.N):
            cols.append(linalg.matmul(cfg.p, mod.top.action_of_monomial(e),
                                      v.reshape(-1, 1))[:, 0])
    top = (np.stack(cols, axis=1) if cols
           else linalg.zeros(mod.top.dim, 0))
    alpha = TowerMorphism(ft, mod, top)
    for k in range(cfg.N + 1):
        if linalg.rank(alpha.level_matrix(k), cfg.p) != mod.level(k).dim:
            raise ValidationError(f"minimal cover not surjective at {k}")
    return free, alpha


@dataclass
class SummandCertificate:
    """An idempotent endomorphism of an adically free tower whose image
    is isomorphic to the given formally projective tower."""

    free: TowerModule
    idempotents: list[np.ndarray]
    splitting: SplittingTower

    def check(self) -> None:
        p = self.free.config.p
        for k, e in enumerate(self.idempotents):
            if not np.array_equal(linalg.matmul(p, e, e), e):
                raise ValidationError(f"e∘e differs from e at level {k}")


def summand_certificate(mod: TowerModule) -> SummandCertificate:
    """Realize a formally projective tower as a direct summand of an
    adically free one: split the minimal cover and take e = beta∘alpha."""
    free, alpha = cover_from_minimal_generators(mod)
    split = lift_splittings(alpha)
    p = mod.config.p
    idems = [linalg.matmul(p, split.betas[k], split.alphas[k])
             for k in range(mod.config.N + 1)]
    cert = SummandCertificate(free=free.tower(), idempotents=idems,
                              splitting=split)
    cert.check()
    return cert


def idempotent_image_tower(free_tower: TowerModule, top_idempotent):
    """The image tower of an idempotent endomorphism of a free tower,
    with the corestriction morphism onto it.

    Images of idempotents are direct summands, so the level-wise images
    form an honest tower and the result is formally projective."""
    cfg = free_tower.config
    p = cfg.p
    e = TowerMorphism(free_tower, free_tower, top_idempotent)
    bases = []
    levels = []
    for k in range(cfg.N + 1):
        ek = e.level_matrix(k)
        if not np.array_equal(linalg.matmul(p, ek, ek), ek):
            raise ValidationError(f"not idempotent at level {k}")
        basis = linalg.column_space(ek, p)
        m, _ = submodule(free_tower.level(k), basis, level=k)
        bases.append(basis)
        levels.append(m)
    transitions = []
    from .level import LevelMap
    for k in range(cfg.N):
        mat = linalg.solve(bases[k],
                           linalg.matmul(p, free_tower.transitions[k].matrix,
                                         bases[k + 1]), p)
        if mat is None:
            raise ValidationError("image tower transitions undefined")
        transitions.append(LevelMap(levels[k + 1], levels[k], mat))
    tower = TowerModule(levels, transitions)
    alpha_top = linalg.solve(bases[cfg.N], e.level_matrix(cfg.N), p)
    alpha = TowerMorphism(free_tower, tower, alpha_top)
    return tower, alpha, bases


def split_surjection_of_towers(alpha: TowerMorphism) -> SplittingTower:
    """Splitting of a tower surjection with formally projective target;
    the checkable form of "surjections onto projectives split"."""
    return lift_splittings(alpha)
