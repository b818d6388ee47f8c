"""Contest mechanics of the asymmetric hawk-dove game.

All randomness is taken from a ``numpy.random.Generator`` through its
``random()`` method only, so the compiled engine can replay exactly the
same stream.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

RHP_MAX = 10.0


class Tactic(enum.IntEnum):
    HAWK = 0
    DOVE = 1


@dataclass(frozen=True)
class GameParams:
    """Reward ``v``, cost of losing a fight ``c`` and win-probability scale ``a``."""

    v: float = 4.0
    c: float = 30.0
    a: float = 1.0

    def __post_init__(self):
        if not self.v > 0:
            raise ValueError(f"v must be positive, got {self.v}")
        if not self.c >= 0:
            raise ValueError(f"c must be non-negative, got {self.c}")
        if not self.a > 0:
            raise ValueError(f"a must be positive, got {self.a}")

    @property
    def hawk_probability(self) -> float:
        if self.c <= self.v:
            return 1.0
        return self.v / self.c


@dataclass(frozen=True)
class ContestOutcome:
    payoff_a: float
    payoff_b: float
    winner: Optional[int]  # 0 for player A, 1 for player B, None for dove-dove


def win_probability(rhp_a: float, rhp_b: float, params: GameParams) -> float:
    """Chance that A beats B in an escalated fight (logistic in the RHP gap)."""
    z = (rhp_a - rhp_b) / params.a
    # split on sign so exp never overflows and 1 - p stays exact in both halves
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def draw_rhp(n: int, rng: np.random.Generator) -> np.ndarray:
    """Fresh uniform RHP on [0, 10) for ``n`` players."""
    return np.array([RHP_MAX * rng.random() for _ in range(n)])


def mixed_ess_tactic(params: GameParams, rng: np.random.Generator) -> Tactic:
    if rng.random() < params.hawk_probability:
        return Tactic.HAWK
    return Tactic.DOVE


def resolve_contest(
    tactic_a: Tactic,
    tactic_b: Tactic,
    rhp_a: float,
    rhp_b: float,
    params: GameParams,
    rng: np.random.Generator,
) -> ContestOutcome:
    if tactic_a == Tactic.DOVE and tactic_b == Tactic.DOVE:
        half = params.v / 2.0
        return ContestOutcome(half, half, None)
    if tactic_a == Tactic.HAWK and tactic_b == Tactic.DOVE:
        return ContestOutcome(params.v, 0.0, 0)
    if tactic_a == Tactic.DOVE and tactic_b == Tactic.HAWK:
        return ContestOutcome(0.0, params.v, 1)
    if rng.random() < win_probability(rhp_a, rhp_b, params):
        return ContestOutcome(params.v, -params.c, 0)
    return ContestOutcome(-params.c, params.v, 1)
