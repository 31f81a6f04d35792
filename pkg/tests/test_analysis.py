import numpy as np
import pytest

from sipns import analysis
from sipns.analysis import (
    EXPECTED_DIRECTIONS,
    SweepReport,
    classify,
    default_grid,
    monotonicity_check,
    steady_state,
    sweep,
    threshold_search,
)
from sipns.errors import ParameterDomainError
from sipns.model import MarketState, Scenario, equilibrium

THRESHOLD_BOUNDS = (1e-3, 0.2)


@pytest.fixture(scope="module")
def gamma_threshold():
    from sipns.model import ModelParams

    return threshold_search(ModelParams.default(), Scenario.default(), *THRESHOLD_BOUNDS)


class TestSteadyState:
    def test_equilibrium_start_is_immediate(self, params):
        res = steady_state(params, Scenario(equilibrium(params), horizon=100.0))
        assert res.converged
        assert res.time_to_converge == 0.0
        assert res.residual < 1e-10

    def test_default_start_levels_off(self, params, scenario):
        res = steady_state(params, scenario)
        assert res.converged
        np.testing.assert_allclose(res.state.as_array(), equilibrium(params).as_array(), rtol=1e-3)
        assert res.residual < analysis.STEADY_EPS * max(1.0, res.state.S)

    def test_empty_market_without_inflow(self, params):
        res = steady_state(params.with_(mu=0.0), Scenario(MarketState(10.0, 0.0, 0.0, 0.0), horizon=100.0))
        assert res.converged
        assert res.state.as_array().tolist() == [10.0, 0.0, 0.0, 0.0]

    def test_cap_reported_not_raised(self, params, scenario):
        # unstable equilibrium: oscillations never settle
        res = steady_state(params.with_(gamma_P=0.5), scenario, horizon_cap=500.0)
        assert not res.converged
        assert res.time_to_converge == 500.0


class TestClassify:
    @pytest.mark.parametrize(
        "values, verdict",
        [
            ([1.0, 1.0, 1.0], "constant"),
            ([1.0, 1.001, 0.999], "constant"),
            ([1.0, 2.0, 3.0], "increasing"),
            ([3.0, 2.0, 2.0, 1.0], "decreasing"),
            ([1.0, 2.0, 1.5], "non-monotone"),
            ([5.0], "constant"),
        ],
    )
    def test_examples(self, values, verdict):
        assert classify(values) == verdict


class TestSweep:
    def test_inflow_leaves_susceptibles_alone(self, params, scenario):
        report = sweep(params, "mu", default_grid(params, "mu"), scenario)
        assert report.all_converged
        assert report.verdicts["S"] == "constant"

    def test_infected_exit_rate(self, params, scenario):
        report = sweep(params, "delta_I", default_grid(params, "delta_I"), scenario)
        assert report.verdicts["S"] == "increasing"
        assert [report.verdicts[k] for k in "IPN"] == ["decreasing"] * 3

    def test_positive_comment_rate_profit(self, params, scenario):
        report = sweep(params, "alpha_P", default_grid(params, "alpha_P"), scenario)
        assert report.verdicts["profit"] == "increasing"

    def test_converged_points_match_closed_form(self, params, scenario):
        report = sweep(params, "gamma_I", default_grid(params, "gamma_I"), scenario)
        for pt in report.points:
            assert pt.steady.converged
            eq = equilibrium(params.with_(gamma_I=pt.value))
            np.testing.assert_allclose(pt.steady.state.as_array(), eq.as_array(), rtol=5e-3)

    @pytest.mark.parametrize(
        "parameter, grid",
        [("beta_P", [0.01, 0.0]), ("gamma_P", [0.2, 0.1]), ("nope", [1.0]), ("mu", [])],
    )
    def test_bad_grid_rejected_before_work(self, params, scenario, parameter, grid, monkeypatch):
        calls = []
        monkeypatch.setattr(analysis, "steady_state", lambda *a, **k: calls.append(a))
        with pytest.raises(ParameterDomainError):
            sweep(params, parameter, grid, scenario)
        assert calls == []

    def test_parallel_matches_serial(self, params, scenario):
        grid = default_grid(params, "beta_N")
        a = sweep(params, "beta_N", grid, scenario)
        b = sweep(params, "beta_N", grid, scenario, workers=4)
        assert a.verdicts == b.verdicts
        for p, q in zip(a.points, b.points):
            assert p.value == q.value
            assert p.profit == q.profit
            assert p.steady.state == q.steady.state

    def test_default_grids(self, params):
        g = default_grid(params, "alpha_N")
        assert g[-1] == pytest.approx(params.alpha_N) and g[0] == pytest.approx(params.alpha_N / 10)
        g = default_grid(params, "delta_N")
        assert g[0] == pytest.approx(params.delta_N) and g[-1] == pytest.approx(params.delta_N * 10)
        assert np.all(np.diff(g) > 0)


class TestMonotonicityCheck:
    def test_negative_exit_rate_leaves_susceptibles(self, params, scenario):
        report = sweep(params, "delta_N", default_grid(params, "delta_N"), scenario)
        assert monotonicity_check(report, {"S": "constant"})["S"].passed

    def test_negative_infection_force_hurts_profit(self, params, scenario):
        report = sweep(params, "beta_N", default_grid(params, "beta_N"), scenario)
        assert monotonicity_check(report, {"profit": "decreasing"})["profit"].passed

    def test_constructed_counterexample(self):
        report = SweepReport.from_series("mu", [1.0, 2.0, 3.0], {"S": [1.0, 2.0, 1.5]})
        res = monotonicity_check(report, {"S": "increasing"})["S"]
        assert res.status == "fail"
        assert res.interval == (1, 2)

    def test_flat_series_is_not_increasing(self):
        report = SweepReport.from_series("mu", [1.0, 2.0, 3.0], {"I": [1.0, 1.0, 1.0]})
        assert monotonicity_check(report, {"I": "increasing"})["I"].status == "fail"

    def test_non_converged_is_inconclusive(self):
        report = SweepReport.from_series(
            "mu", [1.0, 2.0], {"S": [1.0, 1.0], "profit": [1.0, 2.0]}, converged=False
        )
        res = monotonicity_check(report, {"S": "constant", "profit": "increasing"})
        assert res["S"].status == "inconclusive"
        assert res["profit"].passed

    @pytest.mark.parametrize("parameter", ["delta_I", "alpha_P", "beta_P", "gamma_P"])
    def test_refining_grid_keeps_passes(self, params, scenario, parameter):
        coarse = default_grid(params, parameter, points=9)
        fine = default_grid(params, parameter, points=17)
        expected = EXPECTED_DIRECTIONS[parameter]
        a = monotonicity_check(sweep(params, parameter, coarse, scenario), expected)
        b = monotonicity_check(sweep(params, parameter, fine, scenario), expected)
        for k, res in a.items():
            if res.passed:
                assert b[k].passed, (parameter, k)

    def test_centred_decade_is_not_monotone(self, params):
        """Documents why default grids end at the base value: across a decade
        centred on it, the closed form itself turns over for alpha_P and alpha_N."""
        for name, output in (("alpha_P", "I"), ("alpha_P", "N"), ("alpha_N", "N")):
            grid = getattr(params, name) * np.logspace(-0.5, 0.5, 9)
            values = [getattr(equilibrium(params.with_(**{name: g})), output) for g in grid]
            assert classify(values) == "non-monotone", (name, output)


class TestThreshold:
    def test_boundary_maximum(self, params, scenario):
        res = threshold_search(params, scenario, 0.01, 1.0, objective=lambda g: -g)
        assert not res.found
        assert res.message == "no interior threshold in bounds"
        assert int(np.argmax(res.grid_profit)) == 0

    def test_symmetric_objective_gives_midpoint(self, params, scenario):
        lo, hi = 0.01, 0.5
        mid = 0.5 * (lo + hi)
        res = threshold_search(params, scenario, lo, hi, objective=lambda g: -((g - mid) ** 2))
        assert res.found
        assert res.bracket[0] <= mid <= res.bracket[1]
        assert abs(res.theta - mid) < 1e-4 * (hi - lo)

    def test_too_few_points(self, params, scenario):
        with pytest.raises(ParameterDomainError):
            threshold_search(params, scenario, 0.01, 1.0, points=9)

    def test_unstable_range_is_inconclusive(self, params, scenario):
        res = threshold_search(params, scenario, 0.2, 0.6)
        assert not res.found
        assert res.inconclusive

    def test_default_family_has_interior_maximum(self, gamma_threshold):
        res = gamma_threshold
        assert res.found
        spacing = np.diff(res.grid)
        k = int(np.argmax(res.grid_profit))
        assert abs(res.theta - res.grid[k]) <= max(spacing[k - 1], spacing[k])
        lo, hi = res.bracket
        assert lo <= res.theta <= hi
        assert hi - lo < 1e-4 * (THRESHOLD_BOUNDS[1] - THRESHOLD_BOUNDS[0])

    def test_theta_beats_bracket_ends(self, params, scenario, gamma_threshold):
        from sipns.solver import profit

        res = gamma_threshold
        for edge in res.bracket:
            assert res.profit >= profit(params.with_(gamma_P=edge), scenario)
        for edge in THRESHOLD_BOUNDS:
            assert res.profit > profit(params.with_(gamma_P=edge), scenario)
