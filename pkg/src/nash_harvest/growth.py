"""Reference growth curves and predicted CO2 uptake of a stand."""

from __future__ import annotations

import bisect
import json
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from nash_harvest.stands import ForestStand

logger = logging.getLogger(__name__)

CO2_PER_C = 44.0 / 12.0
FIT_KNOTS = (20, 30, 40)


class MissingKnots(ValueError):
    pass


class UnknownSpecies(KeyError):
    def __init__(self, species: str):
        super().__init__(species)
        self.species = species

    def __str__(self) -> str:
        return f"no species parameters for {self.species!r}"


@dataclass(frozen=True)
class SpeciesParams:
    species: str
    growth_table: Mapping[int, float]  # age [years] -> cumulative volume [m3/ha]
    carbon_fraction: float = 0.5
    wood_density: float = 0.45  # t dry mass per m3
    harvest_age: int | None = None

    def __post_init__(self):
        table = {int(a): float(v) for a, v in self.growth_table.items()}
        if not table:
            raise ValueError(f"{self.species}: empty growth table")
        object.__setattr__(self, "growth_table", dict(sorted(table.items())))
        values = list(self.growth_table.values())
        if any(b < a for a, b in zip(values, values[1:])):
            raise ValueError(f"{self.species}: growth table must be non-decreasing in age")
        if not 0.45 <= self.carbon_fraction <= 0.55:
            raise ValueError(f"{self.species}: carbon_fraction {self.carbon_fraction} outside [0.45, 0.55]")
        if not self.wood_density > 0:
            raise ValueError(f"{self.species}: wood_density must be positive")

    @cached_property
    def _knots(self) -> tuple[list[int], list[float]]:
        return list(self.growth_table), list(self.growth_table.values())

    @cached_property
    def young_fit(self) -> tuple[float, float]:
        """Coefficients (c1, c2) of V(a) = c1*a + c2*a**2 fitted to the 20/30/40 knots."""
        missing = [a for a in FIT_KNOTS if a not in self.growth_table]
        if missing:
            raise MissingKnots(f"{self.species}: growth table lacks knots {missing}")
        ages = np.array(FIT_KNOTS, dtype=float)
        design = np.column_stack([ages, ages**2])
        target = np.array([self.growth_table[a] for a in FIT_KNOTS])
        (c1, c2), *_ = np.linalg.lstsq(design, target, rcond=None)
        return float(c1), float(c2)

    def continuity_gap(self) -> float:
        """Absolute jump at age 20 between the young-age fit and the table."""
        c1, c2 = self.young_fit
        return abs(c1 * 20 + c2 * 400 - self.growth_table[20])

    def to_dict(self) -> dict:
        return {
            "growth_table": {str(a): v for a, v in self.growth_table.items()},
            "carbon_fraction": self.carbon_fraction,
            "wood_density": self.wood_density,
            "harvest_age": self.harvest_age,
        }


@dataclass(frozen=True)
class Horizon:
    start_year: int = 2023
    span: int = 10

    def __post_init__(self):
        if self.span <= 0:
            raise ValueError("horizon span must be positive")

    @property
    def end_year(self) -> int:
        return self.start_year + self.span


def volume_at_age(params: SpeciesParams, age: float) -> float:
    """Reference volume [m3/ha] of a fully stocked stand at ``age``.

    Piecewise linear between table knots, constant past the last knot, and a
    through-origin quadratic below the first fitted knot (age 20).
    """
    if age < 0:
        raise ValueError(f"negative age {age}")
    ages, values = params._knots
    if age < FIT_KNOTS[0]:
        c1, c2 = params.young_fit
        return max(0.0, c1 * age + c2 * age * age)
    if age >= ages[-1]:
        return values[-1]
    if age < ages[0]:
        raise MissingKnots(f"{params.species}: growth table starts at age {ages[0]}")
    i = bisect.bisect_right(ages, age)
    a0, a1 = ages[i - 1], ages[i]
    v0, v1 = values[i - 1], values[i]
    return v0 + (v1 - v0) * (age - a0) / (a1 - a0)


def co2_sequestration(stand: ForestStand, params_by_species: Mapping[str, SpeciesParams],
                      horizon: Horizon = Horizon()) -> float:
    """Tons of CO2 the stand is predicted to take up over the horizon if left standing."""
    parts = []
    for share in stand.shares:
        params = params_by_species.get(share.species)
        if params is None:
            raise UnknownSpecies(share.species)
        growth = volume_at_age(params, share.age + horizon.span) - volume_at_age(params, share.age)
        # clamps a non-monotone young-age fit
        growth = max(growth, 0.0)
        parts.append(growth * stand.area * share.cover * params.wood_density
                     * params.carbon_fraction * CO2_PER_C)
    return math.fsum(parts)


def load_species_params(path: str | Path) -> dict[str, SpeciesParams]:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    params = {}
    for species, entry in raw.items():
        if species.startswith("_"):
            continue
        key = species.strip().lower()
        p = SpeciesParams(
            species=key,
            growth_table={int(a): float(v) for a, v in entry["growth_table"].items()},
            carbon_fraction=float(entry.get("carbon_fraction", 0.5)),
            wood_density=float(entry["wood_density"]),
            harvest_age=entry.get("harvest_age"),
        )
        if all(a in p.growth_table for a in FIT_KNOTS):
            gap = p.continuity_gap()
            logger.info("%s: young-age fit residual at age 20 = %.4g m3/ha (%.2f%% of V(20))",
                        key, gap, 100 * gap / p.growth_table[20] if p.growth_table[20] else 0.0)
        params[key] = p
    return params


def dump_species_params(params: Mapping[str, SpeciesParams], path: str | Path, note: str | None = None) -> None:
    payload: dict = {}
    if note:
        payload["_note"] = note
    payload.update({k: p.to_dict() for k, p in params.items()})
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=False)
        fh.write("\n")
