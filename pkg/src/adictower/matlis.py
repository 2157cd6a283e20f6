"""Matlis duality, Bass numbers, and the cofiniteness criterion.

Torsion objects live as directed systems with explicit stage budgets.
The injective hull of the residue field has stage t the vector-space
dual of the level ring A_t with the contragredient action; dualizing
the level tower of a finitely generated module gives its Matlis dual,
and dualizing stages back recovers the module, which is the checkable
finite-budget form of the duality.  A torsion complex is
cohomologically cofinite exactly when all its residue Ext spaces are
finite, detected here as eventual-image rank stabilization of the
stage-wise Ext systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .complexes import ComplexMap
from .indmodule import IndTorsionModule
from .koszul import (IndComplex, dual_spec, koszul, tensor_free_level,
                     tensor_free_tower, tensor_free_tower_map,
                     torsion_telescope)
from .level import (LevelMap, LevelModule, ValidationError, free_cover,
                    is_isomorphic, submodule)
from .ring import RingConfig, SeriesMatrix, TruncatedSeries
from .tower import FgPresentation, complete_fg


class NotCofinite(Exception):
    """Stage dimensions grow without socle stabilization."""


def injective_hull(cfg: RingConfig, stages: int | None = None
                   ) -> IndTorsionModule:
    """The injective hull of the residue field: stage t is the linear
    dual of A_t with the contragredient action, the transitions are the
    duals of the ring surjections."""
    budget = stages if stages is not None else cfg.N + 1
    if budget > cfg.N + 1:
        raise ValueError("stage budget exceeds the precision window")
    mods = []
    for t in range(budget):
        acts = [x.T.copy() for x in cfg.level_actions(t)]
        mods.append(LevelModule(cfg, t, acts))
    transitions = []
    for t in range(budget - 1):
        tr = cfg.truncation_matrix(t + 1, t).T
        transitions.append(LevelMap(mods[t], mods[t + 1], tr))
    return IndTorsionModule(stages=mods, transitions=transitions,
                            label="injective hull")


def matlis_dual_fg(pres: FgPresentation, stages: int | None = None
                   ) -> IndTorsionModule:
    """Matlis dual of a presented module: dualize its level tower."""
    cfg = pres.config
    budget = stages if stages is not None else cfg.N + 1
    if budget > cfg.N + 1:
        raise ValueError("stage budget exceeds the precision window")
    tower = complete_fg(pres)
    mods = []
    for t in range(budget):
        lvl = tower.level(t)
        mods.append(LevelModule(cfg, t, [x.T.copy() for x in lvl.actions]))
    transitions = []
    for t in range(budget - 1):
        tr = tower.transitions[t].matrix.T
        transitions.append(LevelMap(mods[t], mods[t + 1], tr))
    return IndTorsionModule(stages=mods, transitions=transitions,
                            label="matlis dual", meta={"source": pres})


def dual_tower_of_stages(t: IndTorsionModule):
    """Dualize the stages back: level modules with surjections, the
    candidate tower of the dual module."""
    mods = []
    surjections = []
    for s in t.stages:
        mods.append(LevelModule(t.config, s.level,
                                [x.T.copy() for x in s.actions]))
    for i, tr in enumerate(t.transitions):
        surjections.append(LevelMap(mods[i + 1], mods[i], tr.matrix.T))
    return mods, surjections


def saturate_stages(t: IndTorsionModule) -> IndTorsionModule:
    """Replace stage s by the full m^(s+1)-kernel of the last stage.

    Inputs produced by `matlis_dual_fg` are already saturated; for a
    general directed system this aligns the stages with the kernels the
    duality argument needs, to the extent the budget shows them."""
    amb = t.stages[-1]
    cfg = t.config
    p = cfg.p
    bases = [amb.ideal_power_kernel(s + 1) for s in range(len(t.stages))]
    stages = []
    transitions = []
    for s, basis in enumerate(bases):
        mod, _ = submodule(amb, basis, level=s)
        stages.append(mod)
    for s in range(len(bases) - 1):
        mat = linalg.solve(bases[s + 1], bases[s], p)
        if mat is None:
            raise ValidationError("saturation chain is not ascending")
        transitions.append(LevelMap(stages[s], stages[s + 1], mat))
    return IndTorsionModule(stages=stages, transitions=transitions,
                            label=f"saturated({t.label})", meta=dict(t.meta))


def matlis_dual_back(t: IndTorsionModule) -> FgPresentation:
    """Reconstruct a finitely generated presentation whose Matlis dual
    matches the given torsion system stage-wise.

    Requires socle stabilization within the budget (otherwise the
    system is not cofinite and reconstruction is refused) and a full
    stage window (budget N+1), since relations are read off at the top
    stage."""
    cfg = t.config
    if t.budget() < cfg.N + 1:
        raise ValueError("reconstruction wants stages 0..N")
    if not t.socle_stabilized():
        raise NotCofinite(
            f"socle dimensions {t.socle_dims()} keep growing at the "
            f"stage budget: not cofinite")
    sat = saturate_stages(t)
    if sat.stages[-1].dim != t.stages[-1].dim:
        raise NotCofinite("stages are not saturated and do not exhaust "
                          "the budgeted kernel")
    mods, _ = dual_tower_of_stages(sat)
    top = mods[-1]
    cover, _ = free_cover(top)
    g = cover.source.dim // cfg.dim(cfg.N)
    kern = linalg.column_space(
        linalg.kernel_basis(cover.matrix, cfg.p), cfg.p)
    cols = _minimal_generator_columns(cfg, kern, g, cfg.N)
    return FgPresentation.of_columns(cfg, g, cols)


def _minimal_generator_columns(cfg, basis, rank, level):
    """Minimal generators of a submodule of a free level module, as
    series columns."""
    p = cfg.p
    if basis.shape[1] == 0:
        return []
    free = LevelModule.free(cfg, level, rank)
    rad = linalg.column_space(
        np.hstack([linalg.matmul(p, x, basis) for x in free.actions]), p)
    coords = linalg.solve(basis, rad, p)
    q = linalg.quotient_space(basis.shape[1], coords, p)
    gens = linalg.matmul(p, basis, q.section)
    b = cfg.dim(level)
    cols = []
    for t in range(gens.shape[1]):
        col = [TruncatedSeries.from_vector(cfg, level,
                                           gens[r * b:(r + 1) * b, t])
               for r in range(rank)]
        cols.append(col)
    return cols


def double_dual_check(pres: FgPresentation) -> dict:
    """The two finite-budget forms of double duality.

    (a) canonical: dualizing the dual stages returns the original tower
    data on the nose (the evaluation isomorphism is the identity in
    coordinates); (b) roundtrip: reconstructing a presentation from the
    dual and completing it gives stage-wise isomorphic towers."""
    cfg = pres.config
    tower = complete_fg(pres)
    dual = matlis_dual_fg(pres)
    mods, surjections = dual_tower_of_stages(dual)
    canonical = True
    for t in range(cfg.N + 1):
        a, b = tower.level(t), mods[t]
        if a.dim != b.dim or any(not np.array_equal(x, y)
                                 for x, y in zip(a.actions, b.actions)):
            canonical = False
    for t in range(cfg.N):
        if not np.array_equal(tower.transitions[t].matrix,
                              surjections[t].matrix):
            canonical = False
    back = matlis_dual_back(dual)
    back_tower = complete_fg(back)
    roundtrip = all(
        back_tower.level(t).dim == tower.level(t).dim
        and is_isomorphic(back_tower.level(t), tower.level(t))
        for t in range(cfg.N + 1))
    return {"canonical_identity": canonical, "roundtrip_iso": roundtrip,
            "reconstructed_rank": back.rank}


# -- residue Ext systems over the stages ---------------------------------


def _stage_ext_system(t: IndTorsionModule):
    """The directed system of dual-Koszul tensor complexes over the
    stages, with the induced chain maps."""
    cfg = t.config
    spec = dual_spec(koszul(cfg).spec)
    stages = []
    layouts = []
    from .complexes import single_module_complex
    for s in t.stages:
        cx, layout = tensor_free_level(spec, single_module_complex(s))
        stages.append(cx)
        layouts.append(layout)
    transitions = []
    for i, tr in enumerate(t.transitions):
        maps = {}
        for j in range(stages[i].lo, stages[i].hi + 1):
            r = spec.rank(j)
            block = np.kron(np.eye(r, dtype=np.int64), tr.matrix) % cfg.p
            maps[j] = LevelMap(stages[i].term(j), stages[i + 1].term(j),
                               block)
        transitions.append(ComplexMap(stages[i], stages[i + 1], maps,
                                      check=True))
    return IndComplex(stages=stages, transitions=transitions,
                      label=f"residue ext of {t.label}")


def _telescope_ext_system(ind: IndComplex) -> IndComplex:
    """Residue Ext system of a telescope: dual-Koszul tensor of every
    stage complex with the induced transitions."""
    cfg = ind.stages[0].config
    spec = dual_spec(koszul(cfg).spec)
    built = [tensor_free_tower(spec, s) for s in ind.stages]
    transitions = [
        tensor_free_tower_map(spec, ind.transitions[i],
                              built[i], built[i + 1])
        for i in range(len(ind.transitions))]
    return IndComplex(stages=[b[0] for b in built], transitions=transitions,
                      label=f"residue ext of {ind.label}")


@dataclass
class BassProfile:
    """Bass numbers with stabilization stamps: values[q] is the
    eventual-image rank seen at the budget, certified[q] marks the
    double-agreement stamp; uncertified entries are to be read as
    "at least values[q] at this budget"."""

    values: dict
    certified: dict
    stage_dims: dict
    budget: int

    def finite_all(self) -> bool:
        return all(self.certified.values())

    def display(self, q: int) -> str:
        if self.certified.get(q, False):
            return str(self.values[q])
        return f">= {self.values[q]} (budget {self.budget})"


def bass_numbers(obj, q_range=None) -> BassProfile:
    """Bass numbers: stabilized ranks of the residue Ext over the
    stages of a torsion system (or telescope)."""
    if isinstance(obj, IndTorsionModule):
        system = _stage_ext_system(obj)
    elif isinstance(obj, IndComplex):
        system = _telescope_ext_system(obj)
    else:
        raise TypeError("bass numbers want a torsion system or telescope")
    degs = (list(q_range) if q_range is not None
            else list(system.degree_range()))
    values, certified, stage_dims = {}, {}, {}
    for q in degs:
        out = system.colimit_analysis(q)
        values[q] = out["rank"]
        certified[q] = out["certified"]
        stage_dims[q] = out["stage_dims"]
    return BassProfile(values=values, certified=certified,
                       stage_dims=stage_dims, budget=system.budget())


def is_cohomologically_cofinite(obj, q_range=None) -> dict:
    """Finiteness of every residue Ext of a torsion complex, the
    criterion for cohomological cofiniteness.

    Verdicts: cofinite (all degrees certified finite), not cofinite at
    budget (some degree grew monotonically through the budget), or
    undetermined."""
    profile = bass_numbers(obj, q_range)
    if profile.finite_all():
        verdict = "cofinite"
    else:
        growing = []
        for q, ok in profile.certified.items():
            if ok:
                continue
            dims = profile.stage_dims[q]
            table_growth = all(b > a for a, b in zip(dims, dims[1:])) \
                and len(dims) >= 3
            growing.append(table_growth)
        verdict = "not_cofinite_at_budget" if any(growing) else \
            "undetermined"
    return {
        "verdict": verdict,
        "cofinite": verdict == "cofinite",
        "profile": profile,
        "stamp": f"stages 0..{profile.budget - 1}, double-agreement "
                 f"certificates per degree",
    }


def growing_window_module(cfg: RingConfig, stages: int | None = None
                          ) -> IndTorsionModule:
    """The growing direct sum of cyclic torsion modules: stage t is the
    sum of A/m^i for i = 1..t+1; its socle grows with the stage, so it
    is not cofinite."""
    budget = stages if stages is not None else cfg.N + 1
    if budget > cfg.N + 1:
        raise ValueError("stage budget exceeds the precision window")
    from .level import direct_sum_modules
    mods = []
    for t in range(budget):
        pieces = [_cyclic_power_quotient(cfg, t, i) for i in range(1, t + 2)]
        mods.append(direct_sum_modules(pieces)[0])
    transitions = []
    for t in range(budget - 1):
        src, tgt = mods[t], mods[t + 1]
        # the first t+1 summands of the next stage are the same modules
        # in the same coordinates, so the transition is the coordinate
        # inclusion
        mat = np.zeros((tgt.dim, src.dim), dtype=np.int64)
        mat[:src.dim, :] = np.eye(src.dim, dtype=np.int64)
        transitions.append(LevelMap(src, tgt, mat))
    return IndTorsionModule(stages=mods, transitions=transitions,
                            label="growing window sum")


def _cyclic_power_quotient(cfg: RingConfig, level: int, i: int
                           ) -> LevelModule:
    """A/m^i realized at the given level."""
    import itertools

    from .level import module_from_presentation
    mons = [e for e in itertools.product(range(i + 1), repeat=cfg.n)
            if sum(e) == i]
    mons.sort(reverse=True)
    row = [TruncatedSeries(cfg, {tuple(e): 1}) for e in mons]
    rel_matrix = SeriesMatrix(cfg, [row], cols=len(row))
    mod, _ = module_from_presentation(cfg, level, rel_matrix, 1)
    return mod


def torsion_module_in_degree_zero(t: IndTorsionModule) -> IndTorsionModule:
    return t


def hartshorne_compare_n1(t: IndTorsionModule) -> dict:
    """The two cofiniteness pipelines over one variable.

    (a) residue Ext finiteness of the torsion system; (b) Matlis
    reconstruction: dualize back to a candidate finitely generated
    module and verify the dual matches stage-wise.  The report records
    both verdicts and their agreement."""
    cfg = t.config
    if cfg.n != 1:
        raise ValueError("this comparison is implemented over one variable")
    ext_out = is_cohomologically_cofinite(t)
    pipeline_a = ext_out["cofinite"]
    try:
        back = matlis_dual_back(t)
        dual = matlis_dual_fg(back)
        sat = saturate_stages(t)
        ok = all(
            dual.stages[s].dim == sat.stages[s].dim
            and is_isomorphic(dual.stages[s], sat.stages[s])
            for s in range(min(dual.budget(), sat.budget())))
        pipeline_b = bool(ok)
        reconstruction = {"rank": back.rank, "stage_match": ok}
    except NotCofinite as exc:
        pipeline_b = False
        reconstruction = {"refused": str(exc)}
    return {
        "ext_pipeline": pipeline_a,
        "duality_pipeline": pipeline_b,
        "agree": pipeline_a == pipeline_b,
        "ext_report": ext_out,
        "reconstruction": reconstruction,
    }


def cofiniteness_of_derived_torsion(pres: FgPresentation,
                                    stages: int = 4) -> dict:
    """Cofiniteness verdict for the derived torsion of a presented
    module, computed through the telescope."""
    tel = torsion_telescope(pres, stages=stages)
    return is_cohomologically_cofinite(tel)
