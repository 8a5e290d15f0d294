import math

import numpy as np
import pytest
from scipy.integrate import cumulative_simpson

from pebodrem.history import DelayFunction, SignalHistory
from pebodrem.models import paper_model
from pebodrem.pebo import PeboState, observer_step, regressor, true_theta
from pebodrem.plant import SystemModel, measure

from conftest import paper_run


def quadrature_model():
    n = 2
    return SystemModel(
        n=n, m=1, p=1, q=n, k=n,
        A=lambda u, y, t: np.zeros((n, n)), B=lambda u, y, t: np.zeros(n),
        D=lambda u, y, t: np.eye(n),
        C=lambda t: np.array([[1.0, 0.0]]), H=lambda t: np.eye(n), Gamma=lambda t: np.zeros((n, n)),
        delay=DelayFunction(lambda t: 0.0, 0.0), u=lambda t: np.zeros(1),
    )


def test_quadrature_filters():
    model = quadrature_model()
    obs = PeboState.initial(model)
    h = 0.01
    for i in range(100):
        obs = observer_step(model, obs, np.zeros(1), i * h, h)
    np.testing.assert_allclose(obs.G, np.eye(2), atol=1e-12)
    np.testing.assert_array_equal(obs.PhiA, np.eye(2))
    np.testing.assert_array_equal(obs.zeta, np.zeros(2))


def test_exosystem_fundamental_matrix_at_quarter_period():
    model = paper_model("C1")
    model.A = lambda u, y, t: np.zeros((2, 2))
    obs = PeboState.initial(model)
    steps = 1000
    h = (math.pi / 6) / steps
    for i in range(steps):
        obs = observer_step(model, obs, np.zeros(1), i * h, h)
    expected = np.array([[0.0, 1.0 / 3.0, 0.0], [-3.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(obs.PhiGamma, expected, atol=1e-10)


def test_observer_accepts_callable_output():
    model = quadrature_model()
    model.A = lambda u, y, t: np.array([[-y[0], 0.0], [0.0, -1.0]])
    obs = PeboState.initial(model)
    h = 0.01
    for i in range(100):
        obs = observer_step(model, obs, lambda t: np.array([2.0]), i * h, h)
    assert obs.PhiA[0, 0] == pytest.approx(math.exp(-2.0), rel=1e-8)


def test_regressor_before_delay_horizon():
    model = paper_model("C1")
    obs = PeboState.initial(model)
    reg = regressor(model, obs, np.array([0.7]), 0.4)
    np.testing.assert_array_equal(reg.Psi, [[1.0, 0.0, 0.0, 0.0, 0.0]])
    np.testing.assert_array_equal(reg.z, [-0.7])


def test_regressor_perfect_initialisation_gives_zero():
    # zeta tracks x exactly when zeta(0) = x(0) and G = 0, eta = 0
    model = quadrature_model()
    model.D = lambda u, y, t: np.zeros((2, 2))
    obs = PeboState.initial(model, zeta0=[1.0, 2.0])
    x_hist = SignalHistory()
    x_hist.append(0.0, [1.0, 2.0])
    for i in range(10):
        obs = observer_step(model, obs, np.zeros(1), i * 0.1, 0.1)
        x_hist.append((i + 1) * 0.1, [1.0, 2.0])
    reg = regressor(model, obs, measure(model, x_hist, 1.0), 1.0)
    assert reg.z[0] == 0.0
    assert true_theta(model, [1.0, 2.0], [0.0, 0.0], zeta0=[1.0, 2.0])[:2] @ np.ones(2) == 0.0


def test_true_theta_with_zero_observer():
    model = paper_model("C1")
    np.testing.assert_array_equal(true_theta(model, [1.0, 2.0], [0.0, 0.3, 1.0]),
                                  [-1.0, -2.0, 0.0, 0.3, 1.0])


@pytest.mark.parametrize("case", ["C1", "C2", "C3"])
def test_lre_identity_along_paper_run(case):
    _, run = paper_run(case, 1e12)
    tr = run.trace
    assert np.abs(tr["z"] - tr["Psi"] @ run.theta).max() <= 1e-5


def test_error_signal_propagates_through_phi_a():
    _, run = paper_run("C1", 1e12)
    tr = run.trace
    theta_e, theta_g = run.theta[:2], run.theta[2:]
    e = tr["zeta"] - tr["x"] + tr["G"] @ theta_g
    np.testing.assert_allclose(e, tr["PhiA"] @ theta_e, atol=1e-5)


def test_liouville_identity():
    model, run = paper_run("C1", 1e12)
    tr = run.trace
    trace_A = np.array([np.trace(model.coefficients(y, t)[0]) for y, t in zip(tr["coupling"], tr["t"])])
    integral = cumulative_simpson(trace_A, x=tr["t"], initial=0.0)
    expected = np.exp(integral)
    rel = np.abs(np.linalg.det(tr["PhiA"]) - expected) / expected
    assert rel.max() <= 1e-5


def test_filters_bounded_on_paper_run():
    _, run = paper_run("C1", 1e12)
    assert run.sup_norms["filters"] < 100.0
