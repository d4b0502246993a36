"""Iterated swap search: many rounds per game, many games from one initial plan."""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Collection, Iterable, Mapping, Sequence

import numpy as np

from nash_harvest.game import GameConfig, build_utilities, decide, utilities_of
from nash_harvest.growth import Horizon, SpeciesParams
from nash_harvest.indicators import (
    IndicatorVector,
    ScoreTable,
    StandScores,
    SuitabilityMap,
    aggregate,
    protective_count,
    score_dataset,
)
from nash_harvest.stands import Dataset

logger = logging.getLogger(__name__)

INDICATORS = ("x1", "x2", "x3", "x4", "x5")


class InsufficientComplement(ValueError):
    pass


class CacheDrift(RuntimeError):
    pass


@dataclass(frozen=True)
class RunConfig:
    iterations: int = 100_000
    games: int = 100
    seed: int = 0
    candidates: int = 10
    resync_interval: int = 10_000
    thin: int = 100
    volume_plan: float | None = None  # None: harvested volume of H0
    strict_improver_required: bool = True

    def __post_init__(self):
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.games < 1:
            raise ValueError("games must be at least 1")
        if self.candidates < 1 or self.resync_interval < 1 or self.thin < 1:
            raise ValueError("candidates, resync_interval and thin must be positive")

    def game_config(self, initial_volume: float) -> GameConfig:
        plan = self.volume_plan if self.volume_plan is not None else initial_volume
        return GameConfig(plan, self.candidates, self.strict_improver_required)


@dataclass(frozen=True, slots=True)
class Sample:
    iteration: int
    vector: IndicatorVector
    accepted: bool
    out_id: str | None = None
    in_id: str | None = None


@dataclass
class Trajectory:
    samples: list[Sample] = field(default_factory=list)
    thinning: int = 100

    def accepted_swaps(self) -> list[tuple[str, str]]:
        return [(s.out_id, s.in_id) for s in self.samples if s.accepted]

    def records(self, game: int) -> Iterable[dict]:
        for s in self.samples:
            v = s.vector
            yield {
                "game": game,
                "iter": s.iteration,
                "x1_t": v.x1,
                "x2_frac": v.x2,
                "x3_m3": v.x3,
                "x4_frac": v.x4,
                "x5_ha": v.x5,
                "accepted": s.accepted,
                "out_id": s.out_id,
                "in_id": s.in_id,
            }


class HarvestSet:
    """Current harvest set with exact running indicator sums.

    Members and complement are kept as position-indexed lists so a swap and a
    uniform draw are both O(1).
    """

    def __init__(self, table: ScoreTable, members: Iterable[str]):
        self.table = table
        self.members: list[str] = list(members)
        member_set = set(self.members)
        if len(member_set) != len(self.members):
            raise ValueError("harvest set contains duplicate ids")
        unknown = member_set.difference(table.position)
        if unknown:
            raise KeyError(f"ids not in dataset: {sorted(unknown)[:5]}")
        self.complement: list[str] = [sid for sid in table.ids if sid not in member_set]
        self.member_pos = {sid: i for i, sid in enumerate(self.members)}
        self.complement_pos = {sid: i for i, sid in enumerate(self.complement)}
        self.sums = table.sums(self.members)
        self.cached = table.vector(self.sums, len(self.members))

    @property
    def size(self) -> int:
        return len(self.members)

    def member_set(self) -> frozenset[str]:
        return frozenset(self.members)

    def swap(self, out_id: str, in_id: str, sums: list[int] | None = None) -> None:
        mp = self.member_pos.pop(out_id)
        cp = self.complement_pos.pop(in_id)
        self.members[mp] = in_id
        self.complement[cp] = out_id
        self.member_pos[in_id] = mp
        self.complement_pos[out_id] = cp
        if sums is None:
            ro, ri = self.table.row(out_id), self.table.row(in_id)
            sums = [s + i - o for s, i, o in zip(self.sums, ri, ro)]
        self.sums = sums
        self.cached = self.table.vector(sums, self.size)

    def scratch(self) -> IndicatorVector:
        return aggregate(self.table.scores, self.members)

    def resync(self) -> float:
        """Check the cache against a full recomputation; returns the worst relative gap."""
        fresh = self.scratch()
        gap = max(abs(a - b) / max(abs(b), 1e-300) if a != b else 0.0
                  for a, b in zip(self.cached.as_tuple(), fresh.as_tuple()))
        if gap > 1e-6:
            raise CacheDrift(f"cached indicators drifted by {gap:.3g} relative")
        self.sums = self.table.sums(self.members)
        self.cached = fresh
        return gap


def game_seed(seed: int, game_index: int) -> int:
    """Independent 64-bit stream seed for one game of an experiment."""
    state = np.random.SeedSequence([seed & (2**64 - 1), game_index]).generate_state(2, dtype=np.uint64)
    return (int(state[0]) << 64) | int(state[1])


def _check_h0(table: ScoreTable, h0: Collection[str], candidates: int) -> None:
    if not h0:
        raise ValueError("initial harvest set is empty")
    if len(table.ids) - len(set(h0)) < candidates:
        raise InsufficientComplement(
            f"only {len(table.ids) - len(set(h0))} stands outside H0, need {candidates} candidates")


def run_game(dataset: Dataset, h0: Collection[str], params: Mapping[str, SpeciesParams] | None,
             mapping: SuitabilityMap | None, run_config: RunConfig, game_index: int = 0, *,
             horizon: Horizon = Horizon(), scores: Mapping[str, StandScores] | None = None,
             ) -> tuple[frozenset[str], Trajectory]:
    """Play one game from ``h0`` and return the final harvest set and its trajectory."""
    if scores is None:
        scores = score_dataset(dataset, params, mapping, horizon)
    table = ScoreTable(scores)
    _check_h0(table, h0, run_config.candidates)
    hs = HarvestSet(table, h0)
    config = run_config.game_config(hs.cached.x3)
    rng = random.Random(game_seed(run_config.seed, game_index))

    traj = Trajectory([Sample(0, hs.cached, False)], run_config.thin)
    n_candidates = config.candidates
    thin, resync_every = run_config.thin, run_config.resync_interval
    rows, position, shifts = table.rows, table.position, table.shifts
    e1, e2, e3, e4, e5 = (1 << s for s in shifts)
    accepted_total = 0

    for it in range(1, run_config.iterations + 1):
        members, complement = hs.members, hs.complement
        size = len(members)
        out_id = members[rng.randrange(size)]
        in_ids = [complement[p] for p in rng.sample(range(len(complement)), n_candidates)]
        o1, o2, o3, o4, o5 = rows[position[out_id]]
        s1, s2, s3, s4, s5 = hs.sums
        m2, m4 = size * e2, size * e4
        cand_sums = []
        cand_vecs = []
        for in_id in in_ids:
            r1, r2, r3, r4, r5 = rows[position[in_id]]
            sums = [s1 + r1 - o1, s2 + r2 - o2, s3 + r3 - o3, s4 + r4 - o4, s5 + r5 - o5]
            cand_sums.append(sums)
            cand_vecs.append(IndicatorVector(sums[0] / e1, sums[1] / m2, sums[2] / e3,
                                             sums[3] / m4, sums[4] / e5))
        outcome = decide(build_utilities(hs.cached, cand_vecs, config), config)
        if outcome.accepted is not None:
            k = outcome.accepted.index
            in_id = in_ids[k - 1]
            hs.swap(out_id, in_id, cand_sums[k - 1])
            accepted_total += 1
            traj.samples.append(Sample(it, hs.cached, True, out_id, in_id))
        elif it % thin == 0:
            traj.samples.append(Sample(it, hs.cached, False))
        if it % resync_every == 0:
            hs.resync()

    initial, final = traj.samples[0].vector, hs.cached
    logger.info(
        "game %d: %d/%d swaps accepted; protective stands %d -> %d",
        game_index, accepted_total, run_config.iterations,
        protective_count(scores, h0), protective_count(scores, hs.members),
    )
    logger.debug("game %d: initial %s final %s", game_index, initial, final)
    return hs.member_set(), traj


@dataclass
class GameResult:
    game_index: int
    h_final: list[str]  # dataset order
    initial: IndicatorVector
    final: IndicatorVector
    accepted: int
    trajectory: Trajectory


@dataclass
class ExperimentResult:
    games: list[GameResult]
    volume_plan: float
    summary: dict[str, dict[str, float]]
    selection_frequency: dict[str, int]
    representative: int  # game_index


def summarize(finals: Sequence[IndicatorVector]) -> dict[str, dict[str, float]]:
    values = np.array([v.as_tuple() for v in finals], dtype=float)
    return {
        name: {
            "mean": float(values[:, j].mean()),
            "std": float(values[:, j].std()),
            "min": float(values[:, j].min()),
            "max": float(values[:, j].max()),
        }
        for j, name in enumerate(INDICATORS)
    }


def representative_game(initial: IndicatorVector, games: Sequence[GameResult], volume_plan: float) -> int:
    """Game whose final payoffs, scaled by the initial payoffs, sit closest to the cross-game mean."""
    base = np.array([abs(x) or 1.0 for x in utilities_of(initial, volume_plan)])
    scaled = np.array([np.array(utilities_of(g.final, volume_plan)) / base for g in games])
    dist = np.linalg.norm(scaled - scaled.mean(axis=0), axis=1)
    return games[int(np.argmin(dist))].game_index


def _play(args) -> tuple[int, frozenset[str], Trajectory]:
    dataset, h0, scores, run_config, game_index = args
    h_final, traj = run_game(dataset, h0, None, None, run_config, game_index, scores=scores)
    return game_index, h_final, traj


def run_experiment(dataset: Dataset, h0: Collection[str], params: Mapping[str, SpeciesParams],
                   mapping: SuitabilityMap, run_config: RunConfig, *, horizon: Horizon = Horizon(),
                   workers: int = 1, game_indices: Sequence[int] | None = None) -> ExperimentResult:
    """Play ``run_config.games`` independent games from the same ``h0``.

    Results are ordered by game index however the games were scheduled.
    """
    scores = score_dataset(dataset, params, mapping, horizon)
    table = ScoreTable(scores)
    _check_h0(table, h0, run_config.candidates)
    initial = aggregate(scores, h0)
    volume_plan = run_config.game_config(initial.x3).volume_plan
    indices = list(game_indices) if game_indices is not None else list(range(run_config.games))
    jobs = [(dataset, list(h0), scores, run_config, g) for g in indices]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            played = list(pool.map(_play, jobs))
    else:
        played = [_play(job) for job in jobs]

    order = {sid: i for i, sid in enumerate(dataset.ids)}
    games = []
    for game_index, h_final, traj in sorted(played, key=lambda p: p[0]):
        games.append(GameResult(
            game_index=game_index,
            h_final=sorted(h_final, key=order.__getitem__),
            initial=traj.samples[0].vector,
            final=aggregate(scores, h_final),
            accepted=sum(1 for s in traj.samples if s.accepted),
            trajectory=traj,
        ))
    frequency: dict[str, int] = {}
    for g in games:
        for sid in g.h_final:
            frequency[sid] = frequency.get(sid, 0) + 1
    frequency = {sid: frequency[sid] for sid in sorted(frequency, key=order.__getitem__)}
    return ExperimentResult(
        games=games,
        volume_plan=volume_plan,
        summary=summarize([g.final for g in games]),
        selection_frequency=frequency,
        representative=representative_game(initial, games, volume_plan),
    )


def replay(h0: Iterable[str], swaps: Iterable[tuple[str, str]]) -> frozenset[str]:
    """Apply a sequence of (out, in) swaps to ``h0``."""
    current = set(h0)
    for out_id, in_id in swaps:
        if out_id not in current or in_id in current:
            raise ValueError(f"invalid swap {out_id!r} -> {in_id!r}")
        current.remove(out_id)
        current.add(in_id)
    return frozenset(current)
