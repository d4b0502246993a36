"""The five harvest-plan indicators and their per-stand contributions.

x1  lost CO2 uptake over the horizon, t (sum over H)
x2  mean per-stand Shannon-Wiener index (fraction; shown as %)
x3  harvested standing volume, m3 (sum over H)
x4  mean share of habitat-suitable species (fraction)
x5  harvested protective area, ha (sum over H)

Sums and means are evaluated exactly and rounded once, so any two routes to
the same harvest set (scratch aggregation, incremental swaps) give
bit-identical vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Collection, Iterable, Mapping, Sequence

from nash_harvest.growth import Horizon, SpeciesParams, co2_sequestration
from nash_harvest.stands import Dataset, ForestStand, SpeciesShare, stand_volume

SUM_FIELDS = ("x1", "x3", "x5")
MEAN_FIELDS = ("x2", "x4")


class UnknownHabitat(KeyError):
    def __init__(self, habitat: str):
        super().__init__(habitat)
        self.habitat = habitat

    def __str__(self) -> str:
        return f"habitat {self.habitat!r} missing from suitability map"


class EmptyHarvestSet(ValueError):
    pass


@dataclass(frozen=True)
class StandScores:
    id: str
    lost_co2: float
    shannon: float
    volume: float
    suitability: float
    protective_area: float

    def values(self) -> tuple[float, float, float, float, float]:
        return (self.lost_co2, self.shannon, self.volume, self.suitability, self.protective_area)


@dataclass(frozen=True)
class IndicatorVector:
    x1: float
    x2: float
    x3: float
    x4: float
    x5: float

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return astuple(self)

    def as_dict(self) -> dict[str, float]:
        return {f.name: getattr(self, f.name) for f in fields(self)}


SuitabilityMap = Mapping[str, frozenset]


def load_suitability(path: str | Path) -> dict[str, frozenset]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return {h.strip().lower(): frozenset(s.strip().lower() for s in species)
            for h, species in raw.items() if not h.startswith("_")}


def dump_suitability(mapping: SuitabilityMap, path: str | Path, note: str | None = None) -> None:
    payload: dict = {"_note": note} if note else {}
    payload.update({h: sorted(species) for h, species in mapping.items()})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def shannon_wiener(shares: Iterable[SpeciesShare | float]) -> float:
    """Base-10 Shannon-Wiener index over recorded covers (no renormalisation)."""
    covers = [s.cover if isinstance(s, SpeciesShare) else float(s) for s in shares]
    return 0.0 - math.fsum(p * math.log10(p) for p in covers if p > 0)


def suitability(stand: ForestStand, mapping: SuitabilityMap) -> float:
    try:
        suitable = mapping[stand.habitat]
    except KeyError:
        raise UnknownHabitat(stand.habitat) from None
    return math.fsum(s.cover for s in stand.shares if s.species in suitable)


def score_stand(stand: ForestStand, params_by_species: Mapping[str, SpeciesParams],
                mapping: SuitabilityMap, horizon: Horizon = Horizon()) -> StandScores:
    return StandScores(
        id=stand.id,
        lost_co2=co2_sequestration(stand, params_by_species, horizon),
        shannon=shannon_wiener(stand.shares),
        volume=stand_volume(stand),
        suitability=suitability(stand, mapping),
        protective_area=stand.area if stand.is_protective else 0.0,
    )


def score_dataset(dataset: Dataset, params_by_species: Mapping[str, SpeciesParams],
                  mapping: SuitabilityMap, horizon: Horizon = Horizon()) -> dict[str, StandScores]:
    return {s.id: score_stand(s, params_by_species, mapping, horizon) for s in dataset}


def to_fixed(values: Sequence[float]) -> tuple[list[int], int]:
    """Exact integer images of ``values`` on a common ``2**-shift`` grid."""
    ratios = [float(v).as_integer_ratio() for v in values]
    shift = max((d.bit_length() - 1 for _, d in ratios), default=0)
    return [n << (shift - (d.bit_length() - 1)) for n, d in ratios], shift


def vector_from_sums(sums: Sequence[int], shifts: Sequence[int], size: int) -> IndicatorVector:
    """Round exact fixed-point sums to an indicator vector (one rounding per field)."""
    s1, s2, s3, s4, s5 = sums
    e1, e2, e3, e4, e5 = shifts
    return IndicatorVector(
        s1 / (1 << e1),
        s2 / (size << e2),
        s3 / (1 << e3),
        s4 / (size << e4),
        s5 / (1 << e5),
    )


def aggregate(scores: Mapping[str, StandScores], harvest: Collection[str]) -> IndicatorVector:
    """Indicator vector of harvest set ``harvest``, recomputed from scratch."""
    members = list(harvest)
    if not members:
        raise EmptyHarvestSet("harvest set is empty")
    rows = [scores[i].values() for i in members]
    sums, shifts = [], []
    for column in zip(*rows):
        ints, shift = to_fixed(column)
        sums.append(sum(ints))
        shifts.append(shift)
    return vector_from_sums(sums, shifts, len(members))


def apply_swap_delta(vec: IndicatorVector, out_scores: StandScores, in_scores: StandScores,
                     size: int) -> IndicatorVector:
    """Floating-point update of ``vec`` for exchanging one member of a set of ``size``."""
    if size < 1:
        raise ValueError("harvest set size must be at least 1")
    if size == 1:
        return IndicatorVector(*in_scores.values())
    o, i = out_scores.values(), in_scores.values()
    return IndicatorVector(
        vec.x1 + (i[0] - o[0]),
        vec.x2 + (i[1] - o[1]) / size,
        vec.x3 + (i[2] - o[2]),
        vec.x4 + (i[3] - o[3]) / size,
        vec.x5 + (i[4] - o[4]),
    )


def protective_count(scores: Mapping[str, StandScores], harvest: Iterable[str]) -> int:
    return sum(1 for i in harvest if scores[i].protective_area > 0)


class ScoreTable:
    """Per-stand scores in exact fixed point for O(1) incremental set sums."""

    def __init__(self, scores: Mapping[str, StandScores]):
        self.scores = dict(scores)
        self.ids = list(self.scores)
        columns = list(zip(*(s.values() for s in self.scores.values()))) or [()] * 5
        fixed = [to_fixed(col) for col in columns]
        self.shifts = tuple(shift for _, shift in fixed)
        # rows[pos] = (fixed x1, x2, x3, x4, x5) of stand ids[pos]
        self.rows = [tuple(r) for r in zip(*(ints for ints, _ in fixed))]
        self.position = {sid: pos for pos, sid in enumerate(self.ids)}

    def row(self, stand_id: str) -> tuple[int, ...]:
        return self.rows[self.position[stand_id]]

    def sums(self, harvest: Iterable[str]) -> list[int]:
        totals = [0, 0, 0, 0, 0]
        for sid in harvest:
            r = self.rows[self.position[sid]]
            for k in range(5):
                totals[k] += r[k]
        return totals

    def vector(self, sums: Sequence[int], size: int) -> IndicatorVector:
        return vector_from_sums(sums, self.shifts, size)
