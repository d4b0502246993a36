"""Command-line interface: ``nash-harvest validate|synth|run|report``.

Exit codes: 0 success, 1 input validation failure, 2 runtime error.
"""

from __future__ import annotations

import json
import logging
import sys
from functools import wraps
from pathlib import Path

import click

from nash_harvest.growth import Horizon, UnknownSpecies, load_species_params
from nash_harvest.indicators import UnknownHabitat, aggregate, load_suitability, score_dataset
from nash_harvest.reporting import (
    histogram_rows,
    manifest_for,
    normalize_trajectory,
    payoff_rows,
    read_trajectories,
    render_histograms,
    render_stats,
    write_csv,
    write_run,
    write_tsv,
)
from nash_harvest.simulator import RunConfig, run_experiment
from nash_harvest.stands import StandValidationError, parse_stands, read_ids, validate_stands
from nash_harvest.synth import PROFILES, generate_synthetic

log = logging.getLogger("nash_harvest")

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def _guarded(func):
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (StandValidationError, UnknownSpecies, UnknownHabitat) as exc:
            click.echo(f"validation error: {exc}", err=True)
            sys.exit(EXIT_VALIDATION)
        except click.exceptions.Exit:
            raise
        except Exception as exc:  # noqa: BLE001
            click.echo(f"error: {exc}", err=True)
            sys.exit(EXIT_RUNTIME)
    return wrapper


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more log output.")
def cli(verbose: int) -> None:
    """Nash-equilibrium swap search for forest harvest plans."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.argument("stands", type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", type=click.Choice(["strict", "lenient"]), default="strict", show_default=True)
def validate(stands: str, mode: str) -> None:
    """Check a stands CSV and print a JSON-lines validation report."""
    try:
        issues = validate_stands(stands, mode)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    for issue in issues:
        click.echo(json.dumps(issue.to_dict()))
    if any(i.severity == "error" for i in issues):
        sys.exit(EXIT_VALIDATION)


@cli.command()
@click.option("--n", "n_stands", type=int, default=9000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--profile", type=click.Choice(sorted(PROFILES)), default="torun-like", show_default=True)
@click.option("--h0-size", type=int, default=None, help="Stands in the initial plan [default: 10% of --n].")
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@_guarded
def synth(n_stands: int, seed: int, profile: str, h0_size: int | None, out_dir: str) -> None:
    """Write a synthetic district: stands.csv, species_params.json, suitability.json, h0.txt."""
    paths = generate_synthetic(n_stands, seed, profile, h0_size).write(out_dir)
    for name, path in paths.items():
        click.echo(f"{name}\t{path}")


@cli.command()
@click.option("--stands", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--species-params", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--suitability", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--h0", type=click.Path(exists=True, dir_okay=False), required=True,
              help="File with one initial harvest stand id per line.")
@click.option("--iterations", type=click.IntRange(min=0), default=100_000, show_default=True)
@click.option("--games", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--volume-plan", type=float, default=None, help="Planned volume in m3 [default: volume of H0].")
@click.option("--candidates", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--strict-improver/--no-strict-improver", default=True, show_default=True)
@click.option("--thin", type=click.IntRange(min=1), default=100, show_default=True)
@click.option("--resync-interval", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option("--start-year", type=int, default=2023, show_default=True)
@click.option("--span", type=click.IntRange(min=1), default=10, show_default=True)
@click.option("--mode", type=click.Choice(["strict", "lenient"]), default="strict", show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), required=True)
@_guarded
def run(stands, species_params, suitability, h0, iterations, games, seed, volume_plan, candidates,
        strict_improver, thin, resync_interval, start_year, span, mode, workers, out_dir) -> None:
    """Play the swap games and write manifest, trajectory JSONL and results."""
    dataset = parse_stands(stands, mode)
    params = load_species_params(species_params)
    mapping = load_suitability(suitability)
    h0_ids = read_ids(h0)
    missing = [sid for sid in h0_ids if sid not in dataset]
    if missing:
        raise StandValidationError(f"H0 ids not in dataset: {missing[:5]}")
    horizon = Horizon(start_year, span)
    config = RunConfig(iterations=iterations, games=games, seed=seed, candidates=candidates,
                       resync_interval=resync_interval, thin=thin, volume_plan=volume_plan,
                       strict_improver_required=strict_improver)
    result = run_experiment(dataset, h0_ids, params, mapping, config, horizon=horizon, workers=workers)
    manifest = manifest_for({"stands": stands, "species_params": species_params, "suitability": suitability,
                             "h0": h0}, config, horizon, len(dataset), len(h0_ids))
    manifest["mode"] = mode
    paths = write_run(out_dir, result, manifest)
    m = result.summary
    click.echo(f"games={games} iterations={iterations} plan={result.volume_plan:.1f} m3")
    for name in ("x1", "x2", "x3", "x4", "x5"):
        click.echo(f"{name}\tmean={m[name]['mean']:.6g}\tstd={m[name]['std']:.3g}")
    click.echo(f"output\t{paths['results'].parent}")


@cli.command()
@click.option("--run-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--bin-width", type=click.IntRange(min=1), default=25, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None, help="[default: the run dir]")
@_guarded
def report(run_dir: str, bin_width: int, out_dir: str | None) -> None:
    """Render statistics tables, payoffs, age histograms and normalised trajectories."""
    run_path = Path(run_dir)
    out = Path(out_dir) if out_dir else run_path
    out.mkdir(parents=True, exist_ok=True)
    manifest = json.loads((run_path / "manifest.json").read_text(encoding="utf-8"))
    results = json.loads((run_path / "results.json").read_text(encoding="utf-8"))
    inputs = manifest["inputs"]
    dataset = parse_stands(inputs["stands"], manifest.get("mode", "strict"))
    params = load_species_params(inputs["species_params"])
    mapping = load_suitability(inputs["suitability"])
    horizon = Horizon(**manifest["horizon"])
    h0 = read_ids(inputs["h0"])
    rep = next(g for g in results["games"] if g["game"] == results["representative_game"])
    hn = rep["h_final"]

    write_tsv(render_stats(dataset, h0).rows(), out / "stats_h0.tsv")
    write_tsv(render_stats(dataset, hn).rows(), out / "stats_hn.tsv")
    scores = score_dataset(dataset, params, mapping, horizon)
    write_tsv(payoff_rows(aggregate(scores, h0), aggregate(scores, hn)), out / "payoffs.tsv")
    before, after = render_histograms(dataset, h0, hn, bin_width)
    write_csv(histogram_rows(before, after), out / "histograms.csv")

    rows = [["game", "iter", "x1", "x2", "x3", "x4", "x5", "accepted"]]
    for game, traj in sorted(read_trajectories(run_path / "trajectory.jsonl").items()):
        series = normalize_trajectory(traj)
        for j, it in enumerate(series["iter"]):
            rows.append([game, it, *(repr(series[x][j]) for x in ("x1", "x2", "x3", "x4", "x5")),
                         int(series["accepted"][j])])
    write_csv(rows, out / "trajectory_normalized.csv")
    for name in ("stats_h0.tsv", "stats_hn.tsv", "payoffs.tsv", "histograms.csv", "trajectory_normalized.csv"):
        click.echo(f"{name}\t{out / name}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
