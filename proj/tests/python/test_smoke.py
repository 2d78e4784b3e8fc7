import math

import pytest

import hhimerge


def test_concentration():
    assert hhimerge.hhi({"a": 0.5, "b": 0.5}) == pytest.approx(0.5)
    assert hhimerge.delta_hhi(0.2, 0.1) == pytest.approx(0.04)
    assert hhimerge.equilibrium_margin(0.5, "ces", 2.0) == pytest.approx(2 / 3)


def test_calibrate_and_solve_round_trip():
    cal = hhimerge.calibrate({"A": 0.5}, "A", 0.5)
    assert cal["price_response"] == pytest.approx(4.0)
    assert cal["firms"][0]["type"] == pytest.approx(2 * 0.5 * math.exp(2))
    eq = hhimerge.solve({"A": cal["firms"][0]["type"]}, "mnl", cal["price_response"], cal["scale"])
    assert eq["h"] == pytest.approx(2.0, rel=1e-12)
    assert eq["firms"][0]["share"] == pytest.approx(0.5, rel=1e-12)


def test_merge_harms_consumers():
    out = hhimerge.merge({"A": 1.0, "B": 1.0}, "A", "B", "mnl", 1.0)
    assert out["delta_cs"] < 0
    assert out["post"]["firms"][0]["id"] == "A+B"


def test_approx_report():
    r = hhimerge.approx({"A": 0.1, "B": 0.1}, "A", "B")
    assert r["dcs_prop1"] == pytest.approx(-2 / 81)
    assert r["dcs_corollary"] == pytest.approx(r["dcs_prop1"], abs=1e-15)
    assert hhimerge.upp({"A": 0.3, "B": 0.2}, "A", "B")["A"] == pytest.approx(0.2 / (0.8 * 0.7))
    split = hhimerge.approx(
        {"A": 0.2, "B": 0.2}, "A", "B",
        products=[("a1", "A", 0.1), ("a2", "A", 0.1), ("b1", "B", 0.1), ("b2", "B", 0.1)],
    )
    assert split["rho2"] == pytest.approx(0.888889, rel=1e-6)


def test_bounds():
    b = hhimerge.rho1_bounds(0.9, 0.08)
    assert b["lower"] == pytest.approx(1.5625)
    assert b["upper"] == pytest.approx(2 / 0.28)
    assert hhimerge.rho1(0.5, 0.5) == pytest.approx(4.0)


def test_monte_carlo_deterministic():
    a = hhimerge.monte_carlo(reps=20, seed=5, threads=1)
    b = hhimerge.monte_carlo(reps=20, seed=5, threads=3)
    assert a["records_csv"] == b["records_csv"]
    assert a["summary"]["n_total"] == 20


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        hhimerge.calibrate({"A": 0.7, "B": 0.6}, "A", 0.5)
    with pytest.raises(hhimerge.DomainError):
        hhimerge.rho1_bounds(0.4, 0.09)
    with pytest.raises(ValueError):
        hhimerge.approx({"A": 0.1}, "A", "A")
