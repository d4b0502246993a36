"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line at the end of the run."""

import itertools
import json
import random
import time
from contextlib import contextmanager

import numpy as np
import pytest
from click.testing import CliRunner

from nash_harvest.cli import cli
from nash_harvest.game import diagonal_nash, full_nash_oracle, utilities_of
from nash_harvest.growth import volume_at_age
from nash_harvest.indicators import ScoreTable, aggregate, score_dataset, shannon_wiener, suitability
from nash_harvest.simulator import HarvestSet, RunConfig, replay, run_experiment, run_game
from nash_harvest.synth import default_species_params, generate_synthetic

from conftest import ACCEPTANCE_LINES


@contextmanager
def criterion(name):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        ACCEPTANCE_LINES.append(f"FAIL  {name}  ({type(exc).__name__}: {str(exc).splitlines()[0][:120]})")
        raise
    ACCEPTANCE_LINES.append(f"PASS  {name}  [{time.perf_counter() - start:.1f}s]")


def rel_gap(a, b):
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def test_shannon_examples():
    with criterion("shannon: {0.7,0.3} -> 0.265 +-0.001, monoculture -> 0, ten uniform -> 1 +-1e-9"):
        assert abs(shannon_wiener([0.7, 0.3]) - 0.265) <= 1e-3
        assert shannon_wiener([1.0]) == 0.0
        assert abs(shannon_wiener([0.1] * 10) - 1.0) <= 1e-9


def test_suitability_example(pine_birch_stand):
    with criterion("suitability: pine/birch stand on fresh deciduous forest -> 0.0 exactly"):
        mapping = {"fresh deciduous forest": frozenset({"oak", "beech", "spruce", "fir"})}
        assert suitability(pine_birch_stand, mapping) == 0.0


def nash_tables():
    rng = np.random.default_rng(2024)
    for n in range(1000):
        kind = n % 4
        if kind == 0:
            yield rng.normal(size=(5, 11)).tolist()
        elif kind == 1:
            yield rng.integers(0, 3, size=(5, 11)).astype(float).tolist()
        elif kind == 2:
            yield rng.integers(-1, 1, size=(5, 11)).astype(float).tolist()
        elif n % 100 == 3:
            yield [[float(rng.integers(0, 2))] * 11 for _ in range(5)]
        else:
            # rows share a common best strategy with probability one half
            u = rng.normal(size=(5, 11))
            if rng.random() < 0.5:
                u[:, int(rng.integers(11))] = u.max(axis=1) + 1
            yield u.tolist()


def test_nash_oracle_equivalence():
    with criterion("nash: 1000 random 5x11 tables, diagonal == enumeration diagonal, enumeration == argmax product"):
        start = time.perf_counter()
        hits = 0
        for u in nash_tables():
            profiles = full_nash_oracle(u)
            argmax_sets = [[k for k in range(11) if row[k] == max(row)] for row in u]
            assert profiles == set(itertools.product(*argmax_sets))
            diag = diagonal_nash(u)
            assert diag == {k for k in range(11) if (k,) * 5 in profiles}
            hits += bool(diag)
        assert hits > 100
        assert time.perf_counter() - start < 120


def test_monotonicity_suite(district_500):
    with criterion("monotonicity: 500 stands, |H0|=60, 20000 iterations, 5 games, exact"):
        start = time.perf_counter()
        d = district_500
        assert len(d.dataset) == 500 and len(d.h0) == 60
        res = run_experiment(d.dataset, d.h0, d.params, d.suitability, RunConfig(iterations=20_000, games=5, seed=0))
        scores = score_dataset(d.dataset, d.params, d.suitability)
        plan = res.volume_plan
        accepted = 0
        for g in res.games:
            current = frozenset(d.h0)
            prev = aggregate(scores, current)
            for s in g.trajectory.samples[1:]:
                if not s.accepted:
                    continue
                accepted += 1
                current = replay(current, [(s.out_id, s.in_id)])
                vec = aggregate(scores, current)
                assert vec == s.vector
                before, after = utilities_of(prev, plan), utilities_of(vec, plan)
                assert all(a >= b for a, b in zip(after, before))
                assert any(a > b for a, b in zip(after, before))
                prev = vec
            assert current == frozenset(g.h_final)
            init, fin = g.initial, g.final
            assert fin.x1 <= init.x1 and fin.x2 <= init.x2 and fin.x4 <= init.x4 and fin.x5 <= init.x5
            assert fin.x3 >= min(init.x3, plan)
        assert accepted > 0
        assert time.perf_counter() - start < 60


@pytest.mark.slow
def test_headline_direction():
    with criterion("headline: torun-like, 5 seeds, 2000 stands x 100000 iterations; x1,x2,x4,x5 down, x3 >= plan-0.1%"):
        for seed in range(5):
            d = generate_synthetic(2000, seed=seed)
            res = run_experiment(d.dataset, d.h0, d.params, d.suitability,
                                 RunConfig(iterations=100_000, games=1, seed=seed))
            g = res.games[0]
            init, fin = g.initial, g.final
            assert fin.x1 < init.x1, seed
            assert fin.x2 < init.x2, seed
            assert fin.x4 < init.x4, seed
            assert fin.x5 < init.x5, seed
            assert fin.x3 >= res.volume_plan * (1 - 0.001), seed


def test_cli_determinism(tmp_path):
    with criterion("determinism: two CLI runs, byte-identical trajectory JSONL and identical H_N per game"):
        runner = CliRunner()
        data = tmp_path / "data"
        assert runner.invoke(cli, ["synth", "--n", "500", "--seed", "7", "--out-dir", str(data)]).exit_code == 0
        outs = []
        for name in ("first", "second"):
            out = tmp_path / name
            result = runner.invoke(cli, [
                "run", "--stands", str(data / "stands.csv"), "--species-params", str(data / "species_params.json"),
                "--suitability", str(data / "suitability.json"), "--h0", str(data / "h0.txt"),
                "--iterations", "5000", "--games", "3", "--seed", "99", "--out-dir", str(out)])
            assert result.exit_code == 0, result.output
            outs.append(out)
        a, b = outs
        assert (a / "trajectory.jsonl").read_bytes() == (b / "trajectory.jsonl").read_bytes()
        ga = json.loads((a / "results.json").read_text())["games"]
        gb = json.loads((b / "results.json").read_text())["games"]
        assert len(ga) == 3
        assert [g["h_final"] for g in ga] == [g["h_final"] for g in gb]


def test_incremental_vs_scratch(district_500):
    with criterion("incremental vs scratch: 10000 accepted/rejected swaps within 1e-6 relative"):
        d = district_500
        scores = score_dataset(d.dataset, d.params, d.suitability)
        hs = HarvestSet(ScoreTable(scores), d.h0)
        rng = random.Random(17)
        for _ in range(10_000):
            out_id = hs.members[rng.randrange(hs.size)]
            in_id = hs.complement[rng.randrange(len(hs.complement))]
            if rng.random() < 0.5:
                hs.swap(out_id, in_id)
        fresh = aggregate(scores, hs.members)
        assert all(rel_gap(a, b) <= 1e-6 for a, b in zip(hs.cached.as_tuple(), fresh.as_tuple()))

        h_final, traj = run_game(d.dataset, d.h0, None, None, RunConfig(iterations=10_000, seed=4), 0, scores=scores)
        fresh = aggregate(scores, h_final)
        assert all(rel_gap(a, b) <= 1e-6 for a, b in zip(traj.samples[-1].vector.as_tuple(), fresh.as_tuple()))


def test_growth_extrapolation():
    with criterion("growth: V(0) = 0 for every species, continuity gap at 20 below 5% of V(20)"):
        params = default_species_params()
        assert params
        for p in params.values():
            assert volume_at_age(p, 0) == 0.0
            assert p.continuity_gap() < 0.05 * p.growth_table[20]


def test_throughput():
    with criterion("throughput: >= 5000 iterations/s on 9000 stands"):
        d = generate_synthetic(9000, seed=0)
        scores = score_dataset(d.dataset, d.params, d.suitability)
        iterations = 50_000
        start = time.perf_counter()
        run_game(d.dataset, d.h0, None, None, RunConfig(iterations=iterations, seed=0), 0, scores=scores)
        rate = iterations / (time.perf_counter() - start)
        ACCEPTANCE_LINES.append(f"      measured {rate:,.0f} iterations/s")
        assert rate >= 5000
