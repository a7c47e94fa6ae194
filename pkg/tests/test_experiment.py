import math

import pytest

from stablci.experiment import (
    CSV_COLUMNS,
    ExperimentSpec,
    certified_interval,
    intersect,
    run_experiment,
    sample_alpha,
    thread_count,
)
from stablci.polycore import mpq
from stablci.systemfile import load_system

from conftest import SYSTEMS

F1 = load_system(SYSTEMS / "ex1_f.sys")
G1 = load_system(SYSTEMS / "ex1_g.sys")
SMALL = (mpq(-6, 100000), mpq(9, 1000))


def spec(samples=12, seed=0, interval=SMALL, norm=2):
    return ExperimentSpec(F1, G1, [0, 1], interval, samples, seed, norm)


def test_sampling_is_open_and_keyed_by_seed_and_index():
    draws = [sample_alpha(5, i, -1, 1) for i in range(200)]
    assert all(-1 < a < 1 for a in draws)
    assert draws == [sample_alpha(5, i, -1, 1) for i in range(200)]
    assert draws != [sample_alpha(6, i, -1, 1) for i in range(200)]


def test_zero_samples():
    rep = run_experiment(spec(samples=0))
    assert rep.rows == [] and rep.means == {} and rep.discard_fraction == 0.0
    assert rep.csv_text().strip() == ",".join(CSV_COLUMNS)


def test_reproducible_across_thread_counts():
    a = run_experiment(spec(seed=3), threads=1).csv_text()
    b = run_experiment(spec(seed=3), threads=4).csv_text()
    assert a == b
    assert a != run_experiment(spec(seed=4), threads=1).csv_text()


def test_ex1_small_run():
    rep = run_experiment(spec(samples=12, seed=1))
    assert rep.kappa_f == pytest.approx(8, abs=1e-9)
    assert rep.kappa_g == pytest.approx(1, abs=1e-9)
    assert rep.discarded == 0
    assert rep.means["relerr_f"] > rep.means["relerr_g"]
    assert rep.means["ub_f"] > rep.means["ub_g"]
    for r in rep.rows:
        assert r.ub_f >= 0 and r.ub_g >= 0
    header, *lines = rep.csv_text().splitlines()
    assert header.split(",") == list(CSV_COLUMNS) and len(lines) == 12
    assert "kappa(f,p)" in rep.table()


def test_norm_criterion_voids_only_the_bound():
    # tau = sqrt(65)*|a| >= 1 for f across the whole interval, while sqrt(2)*|a| < 1 for g
    rep = run_experiment(spec(samples=5, interval=(mpq(2, 10), mpq(3, 10))))
    assert rep.discarded == 0
    assert rep.ub_undefined("f") == 5 and rep.ub_undefined("g") == 0
    assert "ub_f" not in rep.means and rep.means["ub_g"] > 0
    for r in rep.rows:
        assert math.isnan(r.ub_f) and r.relerr_f > 0 and "tau" in r.reason


def test_newton_failures_are_discarded():
    rep = run_experiment(spec(samples=5, interval=(100, 101)))
    assert rep.discarded == 5 and rep.discard_fraction == 1.0
    assert rep.means == {}
    assert all(math.isnan(r.relerr_f) and math.isnan(r.ub_g) for r in rep.rows)
    assert rep.to_dict()["ub_undefined"] == {"f": 0, "g": 0}


def test_spec_validation():
    with pytest.raises(ValueError):
        spec(interval=(1, 0))
    with pytest.raises(ValueError):
        spec(samples=-1)


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("STABLCI_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("STABLCI_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.delenv("STABLCI_THREADS")
    assert thread_count() >= 1


def test_certified_interval_ex1():
    (lo, hi), rep = certified_interval(F1)
    assert float(lo) == pytest.approx(-6.712e-5, abs=1e-8)
    assert float(hi) == pytest.approx(0.0113646, abs=1e-7)
    (lo_g, hi_g), _ = certified_interval(G1)
    assert intersect((lo, hi), (lo_g, hi_g)) == (lo, hi_g)


def test_intersect_handles_open_sides():
    assert intersect((None, 3), (1, None)) == (1, 3)
    assert intersect((None, None), (None, 2)) == (None, 2)
