import random

import pytest

from nash_harvest.game import utilities_of
from nash_harvest.growth import SpeciesParams
from nash_harvest.indicators import ScoreTable, aggregate, score_dataset
from nash_harvest.simulator import (
    HarvestSet,
    InsufficientComplement,
    RunConfig,
    game_seed,
    replay,
    run_experiment,
    run_game,
)
from nash_harvest.stands import Dataset, ForestStand, Function, SpeciesShare


@pytest.fixture(scope="module")
def scored(district_200):
    d = district_200
    return d, score_dataset(d.dataset, d.params, d.suitability)


def test_zero_iterations(scored):
    d, scores = scored
    h_final, traj = run_game(d.dataset, d.h0, None, None, RunConfig(iterations=0), 0, scores=scores)
    assert h_final == set(d.h0)
    assert len(traj.samples) == 1 and traj.samples[0].iteration == 0


def test_no_admissible_swap():
    table = {a: 5.0 * a for a in range(20, 121, 10)}
    params = {sp: SpeciesParams(sp, table) for sp in ("pine", "oak")}
    mapping = {"fresh deciduous forest": frozenset({"oak"})}
    old = [ForestStand(f"h{i}", "fresh deciduous forest", 1.0, Function.ECONOMIC,
                       (SpeciesShare("pine", 1.0, 130, 600.0),)) for i in range(5)]
    young = [ForestStand(f"c{i}", "fresh deciduous forest", 2.0, Function.PROTECTIVE,
                         (SpeciesShare("pine", 0.5, 30, 70.0), SpeciesShare("oak", 0.5, 30, 70.0)))
             for i in range(20)]
    ds = Dataset(tuple(old + young))
    h0 = [s.id for s in old]
    h_final, traj = run_game(ds, h0, params, mapping, RunConfig(iterations=500, thin=50), 0)
    assert h_final == set(h0)
    assert not any(s.accepted for s in traj.samples)


def test_insufficient_complement(scored):
    d, scores = scored
    h0 = d.dataset.ids[:195]
    with pytest.raises(InsufficientComplement):
        run_game(d.dataset, h0, None, None, RunConfig(iterations=1), 0, scores=scores)


def test_empty_h0(scored):
    d, scores = scored
    with pytest.raises(ValueError):
        run_game(d.dataset, [], None, None, RunConfig(iterations=1), 0, scores=scores)


def test_determinism_and_monotonicity(scored):
    d, scores = scored
    cfg = RunConfig(iterations=5000, seed=42, thin=250)
    h1, t1 = run_game(d.dataset, d.h0, None, None, cfg, 3, scores=scores)
    h2, t2 = run_game(d.dataset, d.h0, None, None, cfg, 3, scores=scores)
    assert h1 == h2
    assert t1.samples == t2.samples
    assert len(h1) == len(d.h0)

    plan = aggregate(scores, d.h0).x3
    prev = utilities_of(t1.samples[0].vector, plan)
    accepted = 0
    for s in t1.samples[1:]:
        cur = utilities_of(s.vector, plan)
        assert all(c >= p for c, p in zip(cur, prev))
        if s.accepted:
            accepted += 1
            assert any(c > p for c, p in zip(cur, prev))
        else:
            assert cur == prev
        prev = cur
    assert accepted > 0
    iters = [s.iteration for s in t1.samples]
    assert iters == sorted(set(iters))


def test_games_differ_by_index(scored):
    d, scores = scored
    cfg = RunConfig(iterations=3000, seed=1)
    a = run_game(d.dataset, d.h0, None, None, cfg, 0, scores=scores)[1]
    b = run_game(d.dataset, d.h0, None, None, cfg, 1, scores=scores)[1]
    assert a.samples != b.samples


def test_replay_reproduces_final_set(scored):
    d, scores = scored
    h_final, traj = run_game(d.dataset, d.h0, None, None, RunConfig(iterations=4000, seed=8), 0, scores=scores)
    assert replay(d.h0, traj.accepted_swaps()) == h_final


def test_trajectory_snapshots_match_scratch(scored):
    d, scores = scored
    h = list(d.h0)
    _, traj = run_game(d.dataset, d.h0, None, None, RunConfig(iterations=4000, seed=9), 0, scores=scores)
    current = set(h)
    for s in traj.samples[1:]:
        if s.accepted:
            current = replay(current, [(s.out_id, s.in_id)])
        assert s.vector == aggregate(scores, current)


def test_harvest_set_exact_cache(scored):
    d, scores = scored
    table = ScoreTable(scores)
    hs = HarvestSet(table, d.h0)
    rng = random.Random(0)
    for step in range(10_000):
        out_id = hs.members[rng.randrange(hs.size)]
        in_id = hs.complement[rng.randrange(len(hs.complement))]
        hs.swap(out_id, in_id)
        if step % 2000 == 0:
            assert hs.resync() == 0.0
    assert hs.cached == hs.scratch()
    assert set(hs.members).isdisjoint(hs.complement)
    assert set(hs.members) | set(hs.complement) == set(d.dataset.ids)


def test_game_seed_stable():
    assert game_seed(7, 0) == game_seed(7, 0)
    assert game_seed(7, 0) != game_seed(7, 1)
    assert game_seed(7, 0) != game_seed(8, 0)


def test_run_config_invariants():
    with pytest.raises(ValueError):
        RunConfig(games=0)
    with pytest.raises(ValueError):
        RunConfig(iterations=-1)


def test_experiment_single_game(scored):
    d, scores = scored
    res = run_experiment(d.dataset, d.h0, d.params, d.suitability, RunConfig(iterations=1000, games=1, seed=3))
    only = res.games[0]
    for name, value in only.final.as_dict().items():
        assert res.summary[name] == {"mean": value, "std": 0.0, "min": value, "max": value}
    assert res.representative == 0
    assert set(res.selection_frequency) == set(only.h_final)


def test_experiment_order_independent(scored):
    d, _ = scored
    cfg = RunConfig(iterations=1500, games=2, seed=4)
    fwd = run_experiment(d.dataset, d.h0, d.params, d.suitability, cfg, game_indices=[0, 1])
    rev = run_experiment(d.dataset, d.h0, d.params, d.suitability, cfg, game_indices=[1, 0])
    assert [g.game_index for g in rev.games] == [0, 1]
    for a, b in zip(fwd.games, rev.games):
        assert a.h_final == b.h_final
        assert a.trajectory.samples == b.trajectory.samples


def test_experiment_parallel_matches_serial(scored):
    d, _ = scored
    cfg = RunConfig(iterations=1000, games=3, seed=6)
    serial = run_experiment(d.dataset, d.h0, d.params, d.suitability, cfg)
    parallel = run_experiment(d.dataset, d.h0, d.params, d.suitability, cfg, workers=2)
    assert [g.h_final for g in serial.games] == [g.h_final for g in parallel.games]
    assert serial.summary == parallel.summary


def test_experiment_aggregate_mean(scored):
    d, _ = scored
    res = run_experiment(d.dataset, d.h0, d.params, d.suitability, RunConfig(iterations=2000, games=10, seed=2))
    for j, name in enumerate(("x1", "x2", "x3", "x4", "x5")):
        values = [g.final.as_tuple()[j] for g in res.games]
        assert res.summary[name]["mean"] == pytest.approx(sum(values) / len(values), rel=1e-12)
        assert res.summary[name]["min"] == min(values)
        assert res.summary[name]["max"] == max(values)
    assert sum(res.selection_frequency.values()) == 10 * len(d.h0)
    assert all(len(g.h_final) == len(d.h0) for g in res.games)


def test_volume_plan_override(scored):
    d, scores = scored
    plan = aggregate(scores, d.h0).x3 * 0.9
    res = run_experiment(d.dataset, d.h0, d.params, d.suitability,
                         RunConfig(iterations=3000, games=1, seed=5, volume_plan=plan))
    assert res.volume_plan == plan
    assert res.games[0].final.x3 >= plan
