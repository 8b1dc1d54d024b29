"""Acceptance battery: one test per criterion, all driven by the ``suite`` scenario.

The suite runs once per session (serially unless ``WLF_WORKERS`` says
otherwise); criterion 12 runs it a second time with two workers and compares
the JSON summaries byte for byte.  A pass/fail line per criterion is printed
in the terminal summary.
"""

import math
import time

import pytest

from conftest import ACCEPTANCE
from wlfinsler.runner import FAIL, INCONCLUSIVE, INFO, PASS, parse_config, run_scenario, summary_json

SUITE_BUDGET_S = 300.0


@pytest.fixture(scope="module")
def suite():
    cfg = parse_config({"scenario": "suite"})
    start = time.perf_counter()
    res = run_scenario(cfg)
    return cfg, res, time.perf_counter() - start


def _family(res, name):
    prefix = name + "/"
    return {k[len(prefix):]: v for k, v in res.verdicts.items() if k.startswith(prefix)}


def _judge(number, title, verdicts, required=()):
    """Record and assert: no failures, no open inconclusives, required keys pass."""
    bad = sorted(k for k, v in verdicts.items() if v.status in (FAIL, INCONCLUSIVE))
    missing = sorted(k for k in required if k not in verdicts or verdicts[k].status != PASS)
    passed = bool(verdicts) and not bad and not missing
    n_pass = sum(v.status == PASS for v in verdicts.values())
    n_info = sum(v.status == INFO for v in verdicts.values())
    detail = f"{n_pass} pass, {n_info} info, {len(verdicts) - n_pass - n_info} other"
    if bad or missing:
        detail += f"; problems: {(bad + missing)[:5]}"
    ACCEPTANCE[number] = (title, passed, detail)
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} ({detail})")
    assert passed, detail


def test_c01_homogeneity_battery(suite):
    v = _family(suite[1], "homogeneity")
    assert len(v) >= 20
    _judge(1, "homogeneity and metric battery", v)


def test_c02_lorentzian_reduction(suite):
    v = _family(suite[1], "lorentzian_reduction")
    kinds = {k.split("/")[-1] for k in v}
    assert {"gamma", "gamma_tilde", "jacobi_operator", "covariant_derivative"} <= kinds
    _judge(2, "Lorentzian reduction against the FD oracle", v)


def test_c03_curvature_laws(suite):
    _judge(3, "curvature endomorphism laws", _family(suite[1], "curvature_laws"))


def test_c04_beem_census(suite):
    _judge(4, "Beem cone census k = 1..6", _family(suite[1], "beem_census"),
           required=[f"k={k}" for k in range(1, 7)])


def test_c05_geodesic_conservation(suite):
    _judge(5, "geodesic conservation of L", _family(suite[1], "geodesic_conservation"))


def test_c06_weighted_identities(suite):
    v = _family(suite[1], "weighted_identities")
    assert suite[1].summary["weighted_identities"]["runs"]["timelike"] >= 10
    assert suite[1].summary["weighted_identities"]["runs"]["null"] >= 10
    _judge(6, "weighted Jacobi, Riccati and Raychaudhuri residuals", v,
           required=["run_count/timelike", "run_count/null"])


def test_c07_epsilon_range(suite):
    _judge(7, "epsilon range and c coefficient", _family(suite[1], "epsilon_range"),
           required=["c_positive", "spot_values", "eps=1_at_N=inf", "eps=1_at_N=n"])


def test_c08_conjugate_points(suite):
    v = _family(suite[1], "conjugate_points")
    for key in [k for k in v if k.endswith(("K=1", "K=4"))]:
        assert v[key].margin <= 1e-3
    _judge(8, "conjugate points, Bonnet-Myers and no zeros at negative curvature", v)


def test_c09_focusing_bound(suite):
    _judge(9, "focusing bound on 20 randomized weighted runs", _family(suite[1], "focusing_bound"),
           required=["counterexamples"])


def test_c10_weighted_bishop(suite):
    v = {k: x for k, x in suite[1].verdicts.items() if k.endswith("bishop")}
    assert len(v) >= 20
    _judge(10, "weighted Bishop inequality on timelike runs", v)


def test_c11_trapped_surfaces(suite):
    v = _family(suite[1], "trapped_surface")
    assert any(k.endswith("theta_plus") for k in v)
    _judge(11, "trapped-surface machinery", v,
           required=["minkowski/focal_time", "minkowski/s0", "weighted_minkowski/psi_trapped"])


def test_c12_determinism(suite, monkeypatch):
    cfg, first, elapsed = suite
    monkeypatch.setenv("WLF_WORKERS", "2")
    second = run_scenario(cfg)
    same = summary_json(first, cfg) == summary_json(second, cfg)
    v = dict(_family(first, "determinism"))
    assert same, "suite summaries differ between serial and parallel runs"
    _judge(12, "byte-identical JSON summaries (serial vs two workers)", v)


def test_suite_runtime_budget(suite):
    elapsed = suite[2]
    print(f"suite wall time {elapsed:.1f}s")
    assert elapsed < SUITE_BUDGET_S
    assert not math.isnan(elapsed)
