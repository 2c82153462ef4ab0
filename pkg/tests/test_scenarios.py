import math

import numpy as np
import pytest

import brute
from quasireal.measurement import ProbeBasis, check_completeness
from quasireal.scenarios import (
    BUILTINS,
    DISCRIMINATING_SEED,
    SWEEP_COLUMNS_TAIL,
    Scenario,
    anomalous_weak_value,
    builtin,
    discriminating_fixture,
    erhart_qubit,
    evaluate,
    search_discriminating_seed,
    sweep,
)
from quasireal.uncertainty import output_error_sq, ozawa_error_sq
from quasireal.weak import weak_table

GRID = np.linspace(0, math.pi / 2, 33)


def test_erhart_sweep_matches_closed_forms():
    rows = sweep("erhart", GRID)
    assert len(rows) == 33
    for r in rows:
        phi = r.value
        rep = r.report
        assert abs(rep.eps - 2 * abs(math.sin(phi / 2))) < 1e-10
        assert abs(rep.eta - math.sqrt(2) * abs(math.cos(phi))) < 1e-10
        assert rep.sigma_A == pytest.approx(1, abs=1e-12)
        assert rep.sigma_B == pytest.approx(1, abs=1e-12)
        assert rep.commutator_bound == pytest.approx(1, abs=1e-12)
        assert rep.ozawa_lhs >= 1 - 1e-10
        assert r.evaluation.max_xdev < 1e-10
        assert len(r.row()) == 1 + len(SWEEP_COLUMNS_TAIL)


def test_erhart_closed_forms_brute_forced():
    for phi in GRID:
        sc = erhart_qubit(phi)
        k, r = list(sc.model.kraus), list(sc.model.readouts)
        eps = math.sqrt(brute.ozawa_error_sq(k, r, sc.psi.amplitudes, sc.A.matrix))
        eta = math.sqrt(brute.ozawa_disturbance_sq(k, sc.psi.amplitudes, sc.B.matrix))
        assert abs(eps - 2 * abs(math.sin(phi / 2))) < 1e-10
        assert abs(eta - math.sqrt(2) * abs(math.cos(phi))) < 1e-10


def test_erhart_endpoints():
    rep0 = evaluate(erhart_qubit(0.0)).report
    assert rep0.eps == pytest.approx(0, abs=1e-12) and rep0.eta == pytest.approx(math.sqrt(2))
    rep1 = sweep("erhart", [math.pi / 2])[0].report
    assert rep1.eps == pytest.approx(math.sqrt(2)) and rep1.eta == pytest.approx(0, abs=1e-7)


def test_naive_product_at_small_detuning():
    rep = evaluate(erhart_qubit(0.2)).report
    assert rep.naive_product == pytest.approx(0.277, abs=5e-4)
    assert rep.naive_product < rep.commutator_bound <= rep.ozawa_lhs


def test_naive_product_never_reaches_bound_on_quarter_circle():
    # eps*eta = 2*sqrt(2)*sin(phi/2)*cos(phi) peaks near 0.77 on [0, pi/2]
    products = [r.report.naive_product for r in sweep("erhart", np.linspace(0, math.pi / 2, 1001))]
    assert max(products) == pytest.approx(0.7698, abs=1e-3)


def test_empty_grid():
    assert sweep("erhart", []) == []


def test_unknown_family():
    with pytest.raises(KeyError, match="available"):
        sweep("nope", [0.0])


@pytest.mark.parametrize("s, expected", [(0.9, 19.0), (0.0, 1.0), (-1.0, 0.0), (0.5, 3.0)])
def test_anomalous_weak_values(s, expected):
    sc = anomalous_weak_value(s)
    tab = weak_table(sc.model, sc.psi, sc.A, sc.probe)
    assert abs(tab.weak[0, 0] - expected) < 1e-10


def test_anomalous_s_equal_one_flagged():
    with pytest.warns(UserWarning, match="undefined"):
        sc = anomalous_weak_value(1.0)
    assert not weak_table(sc.model, sc.psi, sc.A, sc.probe).defined[0, 0]


@pytest.mark.parametrize("name", list(BUILTINS))
def test_builtins_are_consistent(name):
    sc = builtin(name)
    assert check_completeness(sc.model) < 1e-10
    assert evaluate(sc).max_xdev < 1e-10


def test_unknown_builtin():
    with pytest.raises(KeyError, match="available"):
        builtin("nope")


def test_scenario_dimension_check():
    sc = erhart_qubit(0.1)
    with pytest.raises(ValueError):
        Scenario("bad", sc.psi, sc.A, sc.B, sc.model, ProbeBasis.computational(3), {})


def test_discriminating_fixture_is_frozen_search_result():
    assert search_discriminating_seed(256) == DISCRIMINATING_SEED
    sc = discriminating_fixture()
    gap = output_error_sq(sc.model, sc.psi, sc.A) - ozawa_error_sq(sc.model, sc.psi, sc.A)
    assert gap > 1.0
    assert sc.dim == 3 and sc.model.n_outcomes == 2


def test_optimal_readouts_replace_readouts():
    sc = builtin("sigma-x-projectors").with_optimal_readouts()
    np.testing.assert_allclose(sc.model.readouts, [1, 1], atol=1e-15)
