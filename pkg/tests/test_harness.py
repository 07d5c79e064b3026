import dataclasses

import pytest

from tempered_hermite import harness
from tempered_hermite.harness import (CheckResult, FieldLawConfig, FracSuiteConfig, WienerConfig, run_field_law_suite,
                                      run_fractional_calculus_suite, run_wiener_suite)

SMALL_FRAC = FracSuiteConfig(n=128, dx=0.25, alphas=(0.5,), lambdas=(1.0,), functions=((-6.0, -6.0, 4.0),),
                             symbol_tol=1e-7)


def _by_name(results):
    return {r.name: r for r in results}


def test_check_result_validation():
    with pytest.raises(ValueError):
        CheckResult("x", "maybe", 0.0, 0.0)
    d = CheckResult("x", "fail", float("inf"), 0.0).to_dict()
    assert d["statistic"] == "inf"


def test_small_fractional_suite_passes():
    res = run_fractional_calculus_suite(SMALL_FRAC)
    assert [r.name for r in res] == sorted(r.name for r in res)
    assert all(r.status == "pass" for r in res), [r for r in res if r.status != "pass"]


def test_symbol_fault_is_caught():
    res = _by_name(run_fractional_calculus_suite(dataclasses.replace(SMALL_FRAC, symbol_shift=0.01)))
    assert res["frac.symbol"].status == "fail"


def test_empty_function_set_warns():
    res = run_fractional_calculus_suite(dataclasses.replace(SMALL_FRAC, functions=()))
    assert [r.status for r in res if r.name != "frac.runtime"] == ["warn"]


def test_crashing_check_is_a_named_failure(monkeypatch):
    out = harness._run_checks({"demo.boom": lambda: 1 / 0, "demo.ok": lambda: CheckResult("demo.ok", "pass", 0, 0)}, 1)
    assert [(r.name, r.status) for r in out] == [("demo.boom", "fail"), ("demo.ok", "pass")]
    assert "ZeroDivisionError" in out[0].details


def test_threads_do_not_change_results():
    a = run_fractional_calculus_suite(SMALL_FRAC)
    b = run_fractional_calculus_suite(dataclasses.replace(SMALL_FRAC, threads=3))
    strip = lambda rs: [(r.name, r.status, r.statistic) for r in rs if r.name != "frac.runtime"]
    assert strip(a) == strip(b)


def test_runtime_over_budget_warns():
    res = _by_name(run_fractional_calculus_suite(dataclasses.replace(SMALL_FRAC, runtime_budget=0.0)))
    assert res["frac.runtime"].status == "warn"


@pytest.mark.slow
def test_small_field_law_suite():
    cfg = FieldLawConfig(hursts=(0.75,), lambdas=(1.0,), orders=(1,), n_mc=400, spectral_n=100, anchors=4,
                         holder_hursts=(1.5,), k2_cells=32, k2_cell=1 / 8, scale_factors=((0.5, 2.0),),
                         scale_hursts=((0.75, 0.75),), scale_lambdas=((1.0, 1.0),))
    res = _by_name(run_field_law_suite(cfg))
    for name in ("law.covariance_cross_oracle", "law.scaling_identity", "law.scaling_identity_unit_row",
                 "law.stationarity_analytic", "law.axis_pinning", "law.holder_analytic_H1.5"):
        assert res[name].status == "pass", res[name]
    assert res["law.stress_near_half"].status == "warn"
    assert "law.stationarity_mc" in res and res["law.stationarity_mc"].statistic < float("inf")


@pytest.mark.slow
def test_small_wiener_suite():
    cfg = WienerConfig(n_mc=500, n_semimartingale=500)
    res = _by_name(run_wiener_suite(cfg))
    assert res["wiener.semimartingale_gate"].status == "warn"
    assert res["wiener.semimartingale_gate"].details.startswith("unsupported")
    for name in ("wiener.plancherel", "wiener.route_reordering", "wiener.semimartingale_reordering",
                 "wiener.refinement"):
        assert res[name].status == "pass", res[name]
