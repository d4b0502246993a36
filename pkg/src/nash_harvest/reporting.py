"""Harvest-set statistics, age histograms, normalised trajectories and run files."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from nash_harvest import __version__
from nash_harvest.indicators import EmptyHarvestSet, IndicatorVector
from nash_harvest.simulator import ExperimentResult, RunConfig, Sample, Trajectory
from nash_harvest.stands import Dataset, Function

OTHER = "Other"
OTHER_THRESHOLD = 0.01  # share of total harvested volume


class ZeroInitialIndicator(ValueError):
    def __init__(self, name: str):
        super().__init__(f"initial value of {name} is zero; cannot normalise")
        self.name = name


@dataclass(frozen=True)
class SpeciesRow:
    species: str
    mean_age: float | None  # volume-weighted
    age_std: float | None
    mean_age_unweighted: float | None
    volume: float  # m3


@dataclass
class StrategyStats:
    habitat_mix: dict[str, float]  # % of harvested area
    function_mix: dict[str, float]  # % of harvested area
    species: list[SpeciesRow]
    total_volume: float  # m3
    total_area: float = 0.0
    n_stands: int = 0

    def rows(self) -> Iterable[list[str]]:
        yield ["section", "name", "percent", "mean_age", "age_std", "mean_age_unweighted", "volume_1e3_m3"]
        for h, pct in self.habitat_mix.items():
            yield ["habitat", h, f"{pct:.1f}", "", "", "", ""]
        for f, pct in self.function_mix.items():
            yield ["function", f, f"{pct:.1f}", "", "", "", ""]
        for r in self.species:
            age = lambda v: "" if v is None else f"{v:.1f}"
            yield ["species", r.species, "", age(r.mean_age), age(r.age_std), age(r.mean_age_unweighted),
                   f"{r.volume / 1000:.1f}"]
        yield ["total", "volume", "", "", "", "", f"{self.total_volume / 1000:.3f}"]
        yield ["total", "area_ha", "", "", "", "", f"{self.total_area:.2f}"]
        yield ["total", "stands", "", "", "", "", str(self.n_stands)]


def _weighted_age(pairs: Sequence[tuple[int, float]]) -> tuple[float | None, float | None, float | None]:
    if not pairs:
        return None, None, None
    unweighted = math.fsum(a for a, _ in pairs) / len(pairs)
    total = math.fsum(w for _, w in pairs)
    if total <= 0:
        return None, None, unweighted
    mean = math.fsum(a * w for a, w in pairs) / total
    var = math.fsum(w * (a - mean) ** 2 for a, w in pairs) / total
    return mean, math.sqrt(var), unweighted


def render_stats(dataset: Dataset, harvest: Iterable[str]) -> StrategyStats:
    """Table-style summary of a harvest set: habitat/function mix and per-species volume and age."""
    stands = [dataset[sid] for sid in harvest]
    if not stands:
        raise EmptyHarvestSet("harvest set is empty")
    area = math.fsum(s.area for s in stands)
    habitat: dict[str, float] = {}
    function = {Function.PROTECTIVE.value: 0.0, Function.ECONOMIC.value: 0.0}
    per_species: dict[str, list[tuple[int, float]]] = {}
    for s in stands:
        habitat[s.habitat] = habitat.get(s.habitat, 0.0) + s.area
        function[s.function.value] += s.area
        for share in s.shares:
            per_species.setdefault(share.species, []).append((share.age, share.standing_volume * s.area))
    volumes = {sp: math.fsum(v for _, v in pairs) for sp, pairs in per_species.items()}
    total = math.fsum(volumes.values())

    rows, other_pairs = [], []
    for sp in sorted(volumes, key=lambda k: (-volumes[k], k)):
        if total > 0 and volumes[sp] < OTHER_THRESHOLD * total:
            other_pairs.extend(per_species[sp])
            continue
        rows.append(SpeciesRow(sp, *_weighted_age(per_species[sp]), volume=volumes[sp]))
    if other_pairs:
        rows.append(SpeciesRow(OTHER, None, None, None, math.fsum(v for _, v in other_pairs)))

    return StrategyStats(
        habitat_mix={h: 100 * a / area for h, a in sorted(habitat.items(), key=lambda kv: (-kv[1], kv[0]))},
        function_mix={f: 100 * a / area for f, a in function.items()},
        species=rows,
        total_volume=total,
        total_area=area,
        n_stands=len(stands),
    )


@dataclass(frozen=True)
class AgeBin:
    start: int
    count: int
    volume: float  # m3


@dataclass
class AgeHistogram:
    bin_width: int
    bins: dict[str, list[AgeBin]] = field(default_factory=dict)

    def total_count(self) -> int:
        return sum(b.count for bins in self.bins.values() for b in bins)


def render_histograms(dataset: Dataset, before: Iterable[str], after: Iterable[str],
                      bin_width: int = 25) -> tuple[AgeHistogram, AgeHistogram]:
    """Per-species age histograms of (stand, species) entries for two harvest sets, on shared bins."""
    if bin_width <= 0:
        raise ValueError("bin_width must be positive")
    sets = [[dataset[sid] for sid in before], [dataset[sid] for sid in after]]
    entries = [[(sh.species, sh.age, sh.standing_volume * st.area) for st in stands for sh in st.shares]
               for stands in sets]
    species = sorted({sp for es in entries for sp, _, _ in es})
    top_age = max((age for es in entries for _, age, _ in es), default=-1)
    n_bins = top_age // bin_width + 1 if top_age >= 0 else 0

    out = []
    for es in entries:
        counts = {sp: [0] * n_bins for sp in species}
        vols = {sp: [0.0] * n_bins for sp in species}
        for sp, age, vol in es:
            counts[sp][age // bin_width] += 1
            vols[sp][age // bin_width] += vol
        out.append(AgeHistogram(bin_width, {
            sp: [AgeBin(i * bin_width, counts[sp][i], vols[sp][i]) for i in range(n_bins)] for sp in species
        }))
    return out[0], out[1]


def histogram_rows(before: AgeHistogram, after: AgeHistogram) -> Iterable[list]:
    yield ["set", "species", "bin_start", "bin_end", "count", "volume_m3"]
    for label, hist in (("H0", before), ("HN", after)):
        for sp, bins in hist.bins.items():
            for b in bins:
                yield [label, sp, b.start, b.start + hist.bin_width, b.count, f"{b.volume:.1f}"]


def normalize_trajectory(traj: Trajectory | Sequence[Sample]) -> dict[str, list]:
    """Indicator series divided by their values at the first sample."""
    samples = traj.samples if isinstance(traj, Trajectory) else list(traj)
    if not samples:
        return {"iter": [], "x1": [], "x2": [], "x3": [], "x4": [], "x5": []}
    base = samples[0].vector.as_dict()
    for name, value in base.items():
        if value == 0:
            raise ZeroInitialIndicator(name)
    series: dict[str, list] = {"iter": [s.iteration for s in samples]}
    for name, value in base.items():
        series[name] = [getattr(s.vector, name) / value for s in samples]
    series["accepted"] = [s.accepted for s in samples]
    return series


PAYOFF_ROWS = (
    ("carbon", "kt", lambda v: f"{-v.x1 / 1000:+.4g}"),
    ("diversity", "%", lambda v: f"{-v.x2 * 100:+.4g}"),
    ("volume", "m3", lambda v: f"{v.x3:+.1f}"),
    ("suitability", "-", lambda v: f"{-v.x4:+.4g}"),
    ("protection", "ha", lambda v: f"{-v.x5:+.1f}"),
)


def payoff_rows(initial: IndicatorVector, final: IndicatorVector) -> Iterable[list[str]]:
    """Signed payoffs (-x1, -x2, x3, -x4, -x5) in display units; volume shown uncapped."""
    yield ["player", "unit", "H0", "HN"]
    for name, unit, fmt in PAYOFF_ROWS:
        yield [name, unit, fmt(initial), fmt(final)]


def write_tsv(rows: Iterable[Sequence], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, delimiter="\t", lineterminator="\n").writerows(rows)


def write_csv(rows: Iterable[Sequence], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        csv.writer(fh, lineterminator="\n").writerows(rows)


def trajectory_lines(result: ExperimentResult) -> Iterable[str]:
    for g in result.games:
        for record in g.trajectory.records(g.game_index):
            yield json.dumps(record)


def write_run(out_dir: str | Path, result: ExperimentResult, manifest: Mapping) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "manifest": out / "manifest.json",
        "trajectory": out / "trajectory.jsonl",
        "results": out / "results.json",
        "h_final": out / "h_final.txt",
    }
    with open(paths["manifest"], "w", encoding="utf-8") as fh:
        json.dump({**manifest, "code_version": __version__, "volume_plan": result.volume_plan}, fh, indent=2)
        fh.write("\n")
    with open(paths["trajectory"], "w", encoding="utf-8") as fh:
        for line in trajectory_lines(result):
            fh.write(line + "\n")
    results = {
        "volume_plan": result.volume_plan,
        "representative_game": result.representative,
        "summary": result.summary,
        "games": [
            {"game": g.game_index, "accepted": g.accepted, "initial": g.initial.as_dict(),
             "final": g.final.as_dict(), "h_final": g.h_final}
            for g in result.games
        ],
        "selection_frequency": result.selection_frequency,
    }
    with open(paths["results"], "w", encoding="utf-8") as fh:
        json.dump(results, fh, indent=1)
        fh.write("\n")
    rep = next(g for g in result.games if g.game_index == result.representative)
    with open(paths["h_final"], "w", encoding="utf-8") as fh:
        fh.writelines(f"{sid}\n" for sid in rep.h_final)
    return paths


def read_trajectories(path: str | Path) -> dict[int, Trajectory]:
    """Parse a trajectory JSONL file back into per-game trajectories."""
    out: dict[int, Trajectory] = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            r = json.loads(line)
            vec = IndicatorVector(r["x1_t"], r["x2_frac"], r["x3_m3"], r["x4_frac"], r["x5_ha"])
            out.setdefault(r["game"], Trajectory()).samples.append(
                Sample(r["iter"], vec, r["accepted"], r["out_id"], r["in_id"]))
    return out


def manifest_for(paths: Mapping[str, str | Path], run_config: RunConfig, horizon, n_stands: int,
                 h0_size: int) -> dict:
    return {
        "inputs": {k: str(Path(v).resolve()) for k, v in paths.items()},
        "config": asdict(run_config),
        "seed": run_config.seed,
        "horizon": {"start_year": horizon.start_year, "span": horizon.span},
        "n_stands": n_stands,
        "h0_size": h0_size,
    }
