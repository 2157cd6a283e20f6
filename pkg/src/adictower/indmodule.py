"""Directed systems of torsion modules.

An `IndTorsionModule` is a chain T_0 -> T_1 -> ... with T_t a level-t
module (killed by m^(t+1)) and injective A-linear transitions; it is
the finite-budget avatar of a torsion module such as an adic-torsion
submodule, an injective hull, or a local cohomology module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .level import LevelMap, LevelModule, ValidationError


@dataclass
class IndTorsionModule:
    stages: list[LevelModule]
    transitions: list[LevelMap]
    label: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.transitions) != max(len(self.stages) - 1, 0):
            raise ValueError("need one transition per adjacent stage pair")

    @property
    def config(self):
        return self.stages[0].config

    def budget(self) -> int:
        return len(self.stages)

    def stage_dims(self) -> list[int]:
        return [s.dim for s in self.stages]

    def check(self) -> None:
        """Assert the directed-system invariants."""
        for t, s in enumerate(self.stages):
            if s.level != t:
                raise ValidationError(f"stage {t} sits at level {s.level}")
            s.check()
        for t, f in enumerate(self.transitions):
            f.check()
            if not f.is_injective():
                raise ValidationError(f"transition {t} is not injective")
            tgt = self.stages[t + 1]
            killed = tgt.ideal_power_kernel(t + 1)
            if not linalg.subspace_contains(killed, f.matrix,
                                            self.config.p):
                raise ValidationError(
                    f"stage {t} does not land in the m^{t + 1}-kernel "
                    f"of stage {t + 1}")

    def transition_into(self, t_from: int, t_to: int) -> np.ndarray:
        """Composed transition matrix stage t_from -> stage t_to."""
        if t_to < t_from:
            raise ValueError("transitions only go up")
        m = linalg.eye(self.stages[t_from].dim)
        for t in range(t_from, t_to):
            m = linalg.matmul(self.config.p, self.transitions[t].matrix, m)
        return m

    def socle_dims(self) -> list[int]:
        """Dimension of the m-kernel of every stage."""
        return [int(s.ideal_power_kernel(1).shape[1]) for s in self.stages]

    def socle_stabilized(self) -> bool:
        """True when the last two stages have the same socle dimension."""
        dims = self.socle_dims()
        return len(dims) >= 2 and dims[-1] == dims[-2]


def image_rank_table(dims: list[int], maps: list[np.ndarray],
                     p: int) -> list[list[int]]:
    """Rank of every composite V_t -> V_s (s >= t) in a directed system.

    Row t holds [rank(V_t -> V_t), rank(V_t -> V_t+1), ...].  The
    colimit of the system has dimension lim_t (lim_s rank(V_t -> V_s))
    when those ranks stabilize; callers certify stabilization by
    comparing the last two entries of the relevant rows.
    """
    table = []
    for t in range(len(dims)):
        m = linalg.eye(dims[t])
        row = [dims[t]]
        for s in range(t, len(dims) - 1):
            m = linalg.matmul(p, maps[s], m)
            row.append(linalg.rank(m, p))
        table.append(row)
    return table


def colimit_rank(dims: list[int], maps: list[np.ndarray], p: int):
    """(rank, certified) for the colimit of a directed system.

    The rank reported is the eventual-image dimension seen from the
    last two stages; `certified` demands both the inner (target) and
    outer (source) stabilization, the double-agreement convention used
    everywhere at finite budget.
    """
    table = image_rank_table(dims, maps, p)
    if len(dims) < 3:
        return (dims[-1] if dims else 0), False
    # eventual image of stage t measured at the final stage
    eventual = [row[-1] for row in table]
    inner_ok = all(len(row) >= 2 and row[-1] == row[-2]
                   for row in table[:-2])
    outer_ok = eventual[-3] == eventual[-2]
    return eventual[-2], bool(inner_ok and outer_ok)
