import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import market_states, model_params
from sipns.errors import EvaluationError, ParameterDomainError, StateDomainError
from sipns.kernels import PARAM_NAMES
from sipns.model import MarketState, ModelParams, Scenario, equilibrium, jacobian, residual, vector_field


def fd_jacobian(params, state):
    """Central differences of the vector field, step 1e-6 * max(1, |x_k|).

    Evaluated in exact rational arithmetic so the oracle is free of
    cancellation error; the field is bilinear, so the differences are exact.
    """
    p_exact = {k: Fraction(v) for k, v in params.as_dict().items()}
    x = [Fraction(v) for v in state.as_array()]
    out = np.empty((4, 4))
    for k in range(4):
        h = Fraction(1e-6) * max(1, abs(x[k]))
        up, down = list(x), list(x)
        up[k] += h
        down[k] -= h
        diff = [(a - b) / (2 * h) for a, b in zip(_raw_field(p_exact, up), _raw_field(p_exact, down))]
        out[:, k] = [float(v) for v in diff]
    return out


def _raw_field(p, x):
    s, i, pos, neg = x
    return [
        p["mu"] - p["beta_P"] * pos * s - p["beta_N"] * neg * s + p["gamma_P"] * pos + p["gamma_I"] * i,
        p["beta_P"] * pos * s - (p["alpha_P"] + p["alpha_N"] + p["gamma_I"] + p["delta_I"]) * i,
        p["alpha_P"] * i - (p["gamma_P"] + p["delta_P"]) * pos,
        p["alpha_N"] * i - p["delta_N"] * neg,
    ]


def assert_entrywise_close(analytic, numeric, rtol=1e-5):
    zero = analytic == 0.0
    assert np.all(numeric[zero] == 0.0)
    rel = np.abs(analytic[~zero] - numeric[~zero]) / np.abs(analytic[~zero])
    assert np.all(rel <= rtol), rel.max()


class TestModelParams:
    def test_default_values(self, params):
        assert params.as_dict() == {
            "mu": 1.0, "delta_I": 0.05, "delta_P": 0.05, "delta_N": 0.1, "beta_P": 0.01,
            "beta_N": 0.01, "alpha_P": 0.2, "alpha_N": 0.1, "gamma_P": 0.1, "gamma_I": 0.1,
        }

    @pytest.mark.parametrize("name", ["mu", "delta_I", "delta_P"])
    def test_zero_allowed(self, params, name):
        assert getattr(params.with_(**{name: 0.0}), name) == 0.0

    @pytest.mark.parametrize("name", ["delta_N", "beta_P", "beta_N", "alpha_P", "alpha_N", "gamma_P", "gamma_I"])
    def test_zero_rejected(self, params, name):
        with pytest.raises(ParameterDomainError, match=name):
            params.with_(**{name: 0.0})

    @pytest.mark.parametrize("name", PARAM_NAMES)
    @pytest.mark.parametrize("bad", [-1.0, math.inf, math.nan])
    def test_negative_and_non_finite_rejected(self, params, name, bad):
        with pytest.raises(ParameterDomainError):
            params.with_(**{name: bad})

    def test_array_round_trip(self, params):
        assert ModelParams.from_array(params.as_array()) == params


class TestMarketState:
    def test_roundoff_clamped(self):
        st_ = MarketState(1.0, -5e-10, 0.0, 2.0)
        assert st_.I == 0.0

    def test_negative_rejected(self):
        with pytest.raises(StateDomainError):
            MarketState(1.0, -1e-6, 0.0, 0.0)

    def test_nan_rejected(self):
        with pytest.raises(StateDomainError):
            MarketState(math.nan, 0.0, 0.0, 0.0)

    def test_total(self):
        assert MarketState(1, 2, 3, 4).total == 10


class TestScenario:
    @pytest.mark.parametrize(
        "kwargs",
        [{"horizon": 0.0}, {"horizon": -1.0}, {"rel_tol": 0.0}, {"rel_tol": 1.0}, {"abs_tol": 0.0}, {"max_steps": 0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ParameterDomainError):
            Scenario.default().with_(**kwargs)


class TestVectorField:
    def test_only_inflow_when_market_is_idle(self, params):
        d = vector_field(params, MarketState(42.0, 0.0, 0.0, 0.0))
        assert (d.dS, d.dI, d.dP, d.dN) == (1.0, 0.0, 0.0, 0.0)

    def test_hand_computed_example(self, params):
        d = vector_field(params, MarketState(100.0, 10.0, 5.0, 2.0))
        np.testing.assert_allclose(d.as_array(), [-4.5, 0.5, 1.25, 0.8], rtol=0, atol=1e-12)

    def test_vanishes_at_equilibrium(self, params):
        d = vector_field(params, equilibrium(params))
        assert np.max(np.abs(d.as_array())) < 1e-12

    def test_overflow_reported(self):
        huge = ModelParams.default().with_(beta_P=1e300, beta_N=1e300)
        with pytest.raises(EvaluationError, match="dS"):
            vector_field(huge, MarketState(1e300, 1.0, 1e300, 1e300))

    @given(model_params(), market_states())
    def test_flow_balance(self, p, s):
        d = vector_field(p, s).as_array()
        expected = p.mu - p.delta_I * s.I - p.delta_P * s.P - p.delta_N * s.N - p.beta_N * s.N * s.S
        scale = max(1.0, abs(p.mu), p.beta_P * s.P * s.S, p.beta_N * s.N * s.S, s.I, s.P, s.N)
        assert abs(d.sum() - expected) <= 1e-12 * scale


class TestEquilibrium:
    def test_example_values(self, params):
        eq = equilibrium(params)
        np.testing.assert_allclose(eq.as_array(), [33.75, 1.8045, 2.4060, 1.8045], atol=1e-4)

    def test_matches_symbolic_solution(self, params):
        """Independent route: solve the polynomial system exactly with sympy."""
        S, I, P, N = sp.symbols("S I P N", positive=True)
        q = {k: sp.Rational(str(v)) for k, v in params.as_dict().items()}
        eqs = [
            q["mu"] - q["beta_P"] * P * S - q["beta_N"] * N * S + q["gamma_P"] * P + q["gamma_I"] * I,
            q["beta_P"] * P * S - (q["alpha_P"] + q["alpha_N"] + q["gamma_I"] + q["delta_I"]) * I,
            q["alpha_P"] * I - (q["gamma_P"] + q["delta_P"]) * P,
            q["alpha_N"] * I - q["delta_N"] * N,
        ]
        (sol,) = sp.solve(eqs, [S, I, P, N], dict=True)
        exact = [float(sol[v]) for v in (S, I, P, N)]
        np.testing.assert_allclose(equilibrium(params).as_array(), exact, rtol=1e-14)

    def test_zero_inflow(self, params):
        eq = equilibrium(params.with_(mu=0.0))
        assert eq.S == equilibrium(params).S
        assert (eq.I, eq.P, eq.N) == (0.0, 0.0, 0.0)

    def test_inflow_scaling(self, params):
        a = equilibrium(params)
        b = equilibrium(params.with_(mu=10.0))
        assert b.S == a.S
        np.testing.assert_allclose(b.as_array()[1:], 10 * a.as_array()[1:], rtol=1e-14)

    @given(model_params())
    def test_residual_small(self, p):
        eq = equilibrium(p)
        assert residual(p, eq) < 1e-10 * max(1.0, float(np.max(eq.as_array())))

    @given(model_params(), st.sampled_from(["mu", "delta_N", "beta_N"]), st.floats(0.1, 10.0))
    def test_susceptible_level_ignores(self, p, name, factor):
        moved = p.with_(**{name: getattr(p, name) * factor})
        assert equilibrium(moved).S == equilibrium(p).S


class TestJacobian:
    def test_first_row_on_idle_market(self, params):
        s = 80.0
        jac = jacobian(params, MarketState(s, 0.0, 0.0, 0.0))
        expected = [0.0, params.gamma_I, -params.beta_P * s + params.gamma_P, -params.beta_N * s]
        np.testing.assert_array_equal(jac[0], expected)

    def test_layout(self, params):
        jac = jacobian(params, MarketState(1.0, 1.0, 1.0, 1.0))
        assert jac.shape == (4, 4)
        # dN/dt depends only on I and N
        assert jac[3, 0] == 0.0 and jac[3, 2] == 0.0

    @given(model_params(), market_states())
    def test_matches_finite_differences(self, p, s):
        assert_entrywise_close(jacobian(p, s), fd_jacobian(p, s))

    def test_equilibrium_is_stable_for_default(self, params):
        eig = np.linalg.eigvals(jacobian(params, equilibrium(params)))
        assert np.all(eig.real < 0)
