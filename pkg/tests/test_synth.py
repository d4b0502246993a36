import math

import pytest

from nash_harvest.growth import load_species_params
from nash_harvest.indicators import load_suitability, score_dataset
from nash_harvest.reporting import render_stats
from nash_harvest.stands import parse_stands, read_ids, stand_volume
from nash_harvest.synth import PROFILES, generate_synthetic


def pine_share(dataset):
    pine = total = 0.0
    for s in dataset:
        for sh in s.shares:
            v = sh.standing_volume * s.area
            total += v
            if sh.species == "pine":
                pine += v
    return pine / total


def test_byte_identical(tmp_path):
    a = generate_synthetic(150, seed=9).write(tmp_path / "a")
    b = generate_synthetic(150, seed=9).write(tmp_path / "b")
    for key in a:
        assert a[key].read_bytes() == b[key].read_bytes()
    c = generate_synthetic(150, seed=10).write(tmp_path / "c")
    assert c["stands"].read_bytes() != a["stands"].read_bytes()


@pytest.mark.parametrize("n, seed", [(200, 0), (500, 1), (2000, 2)])
def test_pine_dominated(n, seed):
    d = generate_synthetic(n, seed=seed)
    assert 0.70 <= pine_share(d.dataset) <= 0.90


def test_torun_like_h0_profile():
    d = generate_synthetic(2000, seed=0)
    stats = render_stats(d.dataset, d.h0)
    assert stats.function_mix["Protective"] > 85
    assert 50 < stats.habitat_mix["fresh coniferous forest"] < 75
    assert stats.species[0].species == "pine"


def test_twenty_stands_valid(tmp_path):
    d = generate_synthetic(20, seed=4)
    assert len(d.dataset) == 20
    for s in d.dataset:
        assert s.area > 0
        assert s.cover_sum <= 1 + 1e-9
        assert all(round(sh.cover * 10) == pytest.approx(sh.cover * 10) for sh in s.shares)
    paths = d.write(tmp_path)
    assert parse_stands(paths["stands"], "strict") == d.dataset
    assert read_ids(paths["h0"]) == d.h0


def test_too_few_stands():
    with pytest.raises(ValueError):
        generate_synthetic(19)


@pytest.mark.parametrize("profile", sorted(PROFILES))
def test_profiles_score(tmp_path, profile):
    d = generate_synthetic(120, seed=1, profile=profile)
    paths = d.write(tmp_path)
    params = load_species_params(paths["species_params"])
    mapping = load_suitability(paths["suitability"])
    scores = score_dataset(parse_stands(paths["stands"]), params, mapping)
    for s in d.dataset:
        assert math.isclose(scores[s.id].volume, stand_volume(s))
    for p in params.values():
        ages = sorted(p.growth_table)
        assert all(p.growth_table[a] <= p.growth_table[b] for a, b in zip(ages, ages[1:]))


def test_h0_size():
    d = generate_synthetic(300, seed=2, h0_size=45)
    assert len(d.h0) == 45 == len(set(d.h0))
    assert len(generate_synthetic(300, seed=2).h0) == 30
    with pytest.raises(ValueError):
        generate_synthetic(300, seed=2, h0_size=295)
