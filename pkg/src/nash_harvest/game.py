"""One round of the five-player harvest game and its acceptance rule.

Each round offers strategy 0 (keep the current set) and strategies 1..m
(swap one harvested stand for a candidate).  Payoffs are separable: in a
joint profile ``(s_1, ..., s_n)`` player ``i`` receives ``u[i][s_i]``, the
utility of the plan variant that player backs.  A swap is adopted only if
its diagonal profile ``(k, ..., k)`` is a pure Nash equilibrium, i.e. ``k``
is a weakly best response for every player at once.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from nash_harvest.indicators import IndicatorVector

N_PLAYERS = 5
PLAYER_NAMES = ("carbon", "diversity", "volume", "suitability", "protection")


@dataclass(frozen=True, slots=True)
class Strategy:
    index: int
    out_id: str | None = None
    in_id: str | None = None

    @property
    def kind(self) -> str:
        return "keep" if self.index == 0 else "swap"


KEEP = Strategy(0)


@dataclass(frozen=True)
class GameConfig:
    volume_plan: float
    candidates: int = 10
    strict_improver_required: bool = True

    def __post_init__(self):
        if not self.volume_plan > 0:
            raise ValueError("volume_plan must be positive")
        if self.candidates < 1:
            raise ValueError("candidates must be at least 1")


@dataclass(frozen=True, slots=True)
class UtilityTable:
    u: tuple[tuple[float, ...], ...]  # u[player][strategy]

    @property
    def n_players(self) -> int:
        return len(self.u)

    @property
    def n_strategies(self) -> int:
        return len(self.u[0]) if self.u else 0

    def column(self, k: int) -> tuple[float, ...]:
        return tuple(row[k] for row in self.u)


@dataclass(frozen=True)
class GameOutcome:
    accepted: Strategy | None
    nash_diagonal: frozenset[int]
    improvement: tuple[float, ...] = field(default=(0.0,) * N_PLAYERS)


def utilities_of(vec: IndicatorVector, volume_plan: float) -> tuple[float, float, float, float, float]:
    """Payoffs of the five players for one harvest plan."""
    x3 = vec.x3 if vec.x3 < volume_plan else volume_plan
    return (-vec.x1, -vec.x2, x3, -vec.x4, -vec.x5)


def build_utilities(keep: IndicatorVector, swaps: Sequence[IndicatorVector], config: GameConfig) -> UtilityTable:
    """Utility table for Keep (column 0) followed by each swap's resulting vector."""
    columns = [utilities_of(v, config.volume_plan) for v in (keep, *swaps)]
    return UtilityTable(tuple(zip(*columns)))


def _rows(u: UtilityTable | Sequence[Sequence[float]]) -> Sequence[Sequence[float]]:
    return u.u if isinstance(u, UtilityTable) else u


def diagonal_nash(u: UtilityTable | Sequence[Sequence[float]]) -> frozenset[int]:
    """Strategies that are a weakly best response for every player simultaneously."""
    rows = _rows(u)
    if not rows:
        return frozenset()
    best = [max(row) for row in rows]
    m = len(rows[0])
    return frozenset(k for k in range(m) if all(row[k] >= b for row, b in zip(rows, best)))


def payoff_tensors(u: UtilityTable | Sequence[Sequence[float]]) -> list[np.ndarray]:
    """Materialise the full joint-profile payoff array of every player.

    Tensor ``i`` has one axis per player and entry ``[s_1, ..., s_n] = u[i][s_i]``.
    """
    table = np.asarray(_rows(u), dtype=float)
    n, m = table.shape
    tensors = []
    for i in range(n):
        shape = [1] * n
        shape[i] = m
        tensors.append(np.broadcast_to(table[i].reshape(shape), (m,) * n))
    return tensors


def pure_nash_profiles(tensors: Sequence[np.ndarray]) -> set[tuple[int, ...]]:
    """All pure profiles where no player gains by a unilateral deviation."""
    stable = np.ones(tensors[0].shape, dtype=bool)
    for i, payoff in enumerate(tensors):
        stable &= payoff >= payoff.max(axis=i, keepdims=True)
    return {tuple(int(x) for x in p) for p in np.argwhere(stable)}


def full_nash_oracle(u: UtilityTable | Sequence[Sequence[float]]) -> set[tuple[int, ...]]:
    """Pure Nash equilibria of the separable game by exhaustive profile enumeration."""
    rows = _rows(u)
    if len(rows[0]) > 11:
        raise ValueError("exhaustive oracle supports at most 11 strategies")
    return pure_nash_profiles(payoff_tensors(rows))


def brute_force_nash(u: UtilityTable | Sequence[Sequence[float]]) -> set[tuple[int, ...]]:
    """Loop-based twin of :func:`full_nash_oracle` for small games."""
    rows = _rows(u)
    n, m = len(rows), len(rows[0])
    found = set()
    for profile in itertools.product(range(m), repeat=n):
        if all(rows[i][profile[i]] >= rows[i][dev] for i in range(n) for dev in range(m)):
            found.add(profile)
    return found


def decide(u: UtilityTable, config: GameConfig, strategies: Sequence[Strategy] | None = None) -> GameOutcome:
    """Pick the swap to adopt this round, or none.

    Candidates are the diagonal Nash strategies other than Keep; by default a
    candidate also needs at least one player strictly better off than under
    Keep.  Ties go to the most strict improvers, then the lowest index.
    """
    rows = _rows(u)
    nash = diagonal_nash(rows)
    best_k, best_count = None, -1
    for k in sorted(nash):
        if k == 0:
            continue
        count = sum(1 for row in rows if row[k] > row[0])
        if config.strict_improver_required and count == 0:
            continue
        if count > best_count:
            best_k, best_count = k, count
    if best_k is None:
        return GameOutcome(None, nash, (0.0,) * len(rows))
    chosen = strategies[best_k] if strategies is not None else Strategy(best_k)
    return GameOutcome(chosen, nash, tuple(row[best_k] - row[0] for row in rows))
