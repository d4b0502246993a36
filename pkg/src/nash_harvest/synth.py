"""Reproducible synthetic forest districts.

The "torun-like" profile mimics the composition of a lowland pine district:
mostly fresh coniferous habitat, mostly protective forest, pine-dominated
volume.  Growth curves are synthetic Chapman-Richards placeholders, not
measured reference models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from nash_harvest.growth import SpeciesParams, dump_species_params, load_species_params, volume_at_age
from nash_harvest.indicators import dump_suitability, load_suitability
from nash_harvest.stands import Dataset, ForestStand, Function, SpeciesShare, write_ids, write_stands

SYNTHETIC_NOTE = "SYNTHETIC placeholder growth curves (Chapman-Richards); not measured reference models"

# species: (asymptote m3/ha, rate 1/yr, shape, wood density t/m3, carbon fraction, harvest age)
CURVES = {
    "pine": (560, 0.025, 1.9, 0.42, 0.50, 100),
    "oak": (560, 0.018, 1.8, 0.57, 0.50, 140),
    "birch": (330, 0.035, 1.8, 0.51, 0.48, 70),
    "alder": (420, 0.030, 1.8, 0.43, 0.49, 80),
    "poplar": (480, 0.045, 1.7, 0.35, 0.47, 50),
    "beech": (600, 0.018, 2.0, 0.56, 0.49, 120),
    "spruce": (620, 0.025, 2.0, 0.38, 0.51, 90),
    "fir": (650, 0.020, 2.0, 0.36, 0.51, 100),
    "larch": (500, 0.030, 1.9, 0.46, 0.51, 100),
    "ash": (450, 0.025, 1.8, 0.56, 0.49, 100),
    "hornbeam": (380, 0.022, 1.8, 0.63, 0.48, 90),
    "maple": (400, 0.025, 1.8, 0.52, 0.49, 90),
}

SUITABILITY = {
    "fresh coniferous forest": ["pine", "spruce", "larch"],
    "dry coniferous forest": ["pine"],
    "wet coniferous forest": ["pine", "spruce", "birch"],
    "fresh deciduous forest": ["oak", "beech", "spruce", "fir"],
    "wet deciduous forest": ["oak", "ash", "hornbeam", "alder"],
    "alder forest": ["alder", "ash"],
    "riparian forest": ["ash", "oak", "poplar", "alder"],
}

# habitat: (area weight, dominant species weights, admixture species[, species-count weights])
MAX_AGE = 140
CONIFER_COUNTS = (0.85, 0.13, 0.02, 0.0)

PINE_DISTRICT_HABITATS = {
    "fresh coniferous forest": (0.639, {"pine": 0.98, "spruce": 0.01, "larch": 0.01},
                                ["birch", "oak", "pine"], CONIFER_COUNTS),
    "dry coniferous forest": (0.018, {"pine": 1.0}, ["birch"], CONIFER_COUNTS),
    "wet coniferous forest": (0.010, {"pine": 0.8, "spruce": 0.1, "birch": 0.1}, ["birch", "alder", "spruce"],
                              CONIFER_COUNTS),
    "fresh deciduous forest": (0.211, {"oak": 0.10, "pine": 0.75, "beech": 0.05, "birch": 0.04, "hornbeam": 0.02,
                                       "maple": 0.02, "spruce": 0.02},
                               ["oak", "beech", "hornbeam", "birch", "maple", "pine", "ash"]),
    "wet deciduous forest": (0.043, {"oak": 0.35, "ash": 0.15, "alder": 0.2, "birch": 0.15, "poplar": 0.15},
                             ["oak", "ash", "alder", "birch", "hornbeam"]),
    "alder forest": (0.032, {"alder": 0.85, "ash": 0.1, "birch": 0.05}, ["ash", "birch", "poplar"]),
    "riparian forest": (0.047, {"poplar": 0.4, "ash": 0.2, "oak": 0.15, "alder": 0.15, "maple": 0.1},
                        ["oak", "ash", "alder", "poplar", "maple"]),
}

PROFILES = {
    "torun-like": {"habitats": PINE_DISTRICT_HABITATS, "protective": 0.917, "h0_fraction": 0.1, "species_counts":
                   (0.4, 0.35, 0.18, 0.07)},
    "mixed": {"habitats": {h: (1.0 / len(PINE_DISTRICT_HABITATS), v[1], v[2]) for h, v in PINE_DISTRICT_HABITATS.items()},
              "protective": 0.5, "h0_fraction": 0.1, "species_counts": (0.25, 0.35, 0.25, 0.15)},
}


@dataclass
class SyntheticDistrict:
    dataset: Dataset
    params: dict[str, SpeciesParams]
    suitability: dict[str, frozenset]
    h0: list[str]

    def write(self, out_dir: str | Path) -> dict[str, Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = {
            "stands": out / "stands.csv",
            "species_params": out / "species_params.json",
            "suitability": out / "suitability.json",
            "h0": out / "h0.txt",
        }
        write_stands(self.dataset, paths["stands"])
        dump_species_params(self.params, paths["species_params"], SYNTHETIC_NOTE)
        dump_suitability(self.suitability, paths["suitability"])
        write_ids(self.h0, paths["h0"])
        return paths


def chapman_richards_params(species: str) -> SpeciesParams:
    A, k, p, density, cf, harvest_age = CURVES[species]
    table = {a: round(A * (1 - math.exp(-k * a)) ** p, 1) for a in range(20, 121, 10)}
    return SpeciesParams(species, table, cf, density, harvest_age)


def build_default_params() -> dict[str, SpeciesParams]:
    return {s: chapman_richards_params(s) for s in CURVES}


def default_species_params() -> dict[str, SpeciesParams]:
    with resources.as_file(resources.files("nash_harvest") / "data" / "species_params.json") as path:
        return load_species_params(path)


def default_suitability() -> dict[str, frozenset]:
    with resources.as_file(resources.files("nash_harvest") / "data" / "suitability.json") as path:
        return load_suitability(path)


def _tenths_split(rng: np.random.Generator, k: int) -> list[float]:
    """Covers for ``k`` species in 10% steps summing to 1, first one largest."""
    if k == 1:
        return [1.0]
    dominant = int(rng.integers(5, 10 - (k - 1) + 1))
    rest = 10 - dominant
    parts = [1] * (k - 1)
    for _ in range(rest - (k - 1)):
        parts[int(rng.integers(0, k - 1))] += 1
    return [dominant / 10] + [q / 10 for q in parts]


def generate_synthetic(n_stands: int, seed: int = 0, profile: str = "torun-like",
                       h0_size: int | None = None) -> SyntheticDistrict:
    if n_stands < 20:
        raise ValueError("n_stands must be at least 20")
    try:
        prof = PROFILES[profile]
    except KeyError:
        raise ValueError(f"unknown profile {profile!r}; choose from {sorted(PROFILES)}") from None
    rng = np.random.default_rng(seed)
    params = default_species_params()
    habitats = list(prof["habitats"])
    weights = np.array([prof["habitats"][h][0] for h in habitats])
    weights = weights / weights.sum()

    stands = []
    for n in range(n_stands):
        habitat = habitats[int(rng.choice(len(habitats), p=weights))]
        _, dominant_w, admixture, *rest = prof["habitats"][habitat]
        counts = np.array(rest[0] if rest else prof["species_counts"])
        dom_names = list(dominant_w)
        dom_p = np.array([dominant_w[s] for s in dom_names])
        dominant = dom_names[int(rng.choice(len(dom_names), p=dom_p / dom_p.sum()))]
        pool = [s for s in admixture if s != dominant]
        k = min(1 + int(rng.choice(len(counts), p=counts)), 1 + len(pool))
        others = [pool[i] for i in rng.choice(len(pool), size=k - 1, replace=False)] if k > 1 else []
        covers = _tenths_split(rng, k)
        base_age = int(rng.integers(5, MAX_AGE + 1))
        shares = []
        for species, cover in zip([dominant, *others], covers):
            age = base_age if species == dominant else max(1, base_age + int(rng.integers(-15, 16)))
            full = volume_at_age(params[species], age)
            volume = round(cover * full * float(rng.lognormal(0.0, 0.15)), 1)
            shares.append(SpeciesShare(species, cover, age, volume))
        area = round(float(np.clip(rng.lognormal(math.log(2.5), 0.6), 0.2, 20.0)), 2)
        function = Function.PROTECTIVE if rng.random() < prof["protective"] else Function.ECONOMIC
        stand_id = f"12-24-1-{n // 400 + 1:02d}-{n % 400 + 1:03d} -{'abcdfghijklm'[n % 12]}"
        stands.append(ForestStand(stand_id, habitat, area, function, tuple(shares)))

    # initial harvest plan: weighted draw favouring stands near their dominant species' harvest age
    maturity = np.array([s.shares[0].age / (params[s.shares[0].species].harvest_age or 100) for s in stands])
    weights = np.clip(maturity, 0.05, 1.2)
    n_h0 = h0_size if h0_size is not None else round(prof["h0_fraction"] * n_stands)
    if not 1 <= n_h0 <= n_stands - 10:
        raise ValueError(f"h0_size must be in [1, {n_stands - 10}]")
    chosen = set(rng.choice(n_stands, size=n_h0, replace=False, p=weights / weights.sum()).tolist())
    h0 = [s.id for i, s in enumerate(stands) if i in chosen]
    suitability = {h: frozenset(v) for h, v in SUITABILITY.items()}
    return SyntheticDistrict(Dataset(tuple(stands)), params, suitability, h0)
