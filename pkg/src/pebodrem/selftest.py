"""Fast numerical invariant checks behind ``observe selftest``."""
from __future__ import annotations

import math

import numpy as np

from .drem import DremState, ie_threshold, mix
from .linalg import adjugate, determinant, rk4_step
from .scenario import convergence_metrics, paper_example, run_scenario


def _adjugate_identity():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(1, 7))
        M = rng.normal(size=(n, n))
        lhs = adjugate(M) @ M
        rhs = determinant(M) * np.eye(n)
        scale = max(1.0, float(np.abs(adjugate(M)).max() * np.abs(M).max() * n))
        worst = max(worst, float(np.abs(lhs - rhs).max()) / scale)
    return worst <= 1e-10, f"max relative residual {worst:.2e}"


def _singular_mixing():
    rng = np.random.default_rng(3)
    B = rng.normal(size=(5, 3))
    Omega = B @ B.T
    theta = rng.normal(size=5)
    calY, Delta = mix(DremState(Omega @ theta, Omega, 1.0))
    ok = abs(Delta) < 1e-12 and float(np.abs(calY).max()) < 1e-10
    return ok, f"Delta={Delta:.1e}, max|calY|={np.abs(calY).max():.1e}"


def _rk4_decay():
    x = rk4_step(lambda t, s: -s, 0.0, np.array([1.0]), 0.1)[0]
    return abs(x - 0.9048375) < 1e-7, f"x(0.1)={x:.8f}"


def _paper_run():
    model, config = paper_example("C1")
    config.gamma, config.T = 1e12, 4.0
    run = run_scenario(model, config, keep_trace=True)
    tr = run.trace
    theta = run.theta
    lre = float(np.abs(tr["z"] - tr["Psi"] @ theta).max())
    w = run.column("w")
    est = float(np.abs((tr["theta_hat"] - theta) + w[:, None] * theta).max())
    t = tr["t"]
    c, s = np.cos(3 * t), np.sin(3 * t)
    closed = np.zeros_like(tr["PhiGamma"])
    closed[:, 0, 0], closed[:, 0, 1], closed[:, 1, 0], closed[:, 1, 1] = c, s / 3, -3 * s, c
    closed[:, 2, 2] = 1.0
    osc = float(np.abs(tr["PhiGamma"] - closed).max())
    m = convergence_metrics(run)
    return [
        ("LRE identity z = Psi theta", lre <= 1e-5, f"max residual {lre:.2e}"),
        ("estimator error equals w times initial error", est <= 1e-6, f"max deviation {est:.2e}"),
        ("exosystem fundamental matrix", osc <= 1e-6, f"max deviation {osc:.2e}"),
        ("fixed-time convergence before t=4",
         m.t_c is not None and m.max_theta_error_after_tc <= 1e-3,
         f"t_c={m.t_c}, theta error {m.max_theta_error_after_tc}"),
    ]


def _threshold():
    rho = ie_threshold(1.0, 1.0 - math.exp(-1.0))
    return abs(rho - 1.0) < 1e-12, f"rho={rho!r}"


def run_checks():
    """Yield ``(name, passed, detail)`` for every check."""
    for name, fn in (("adjugate identity", _adjugate_identity),
                     ("mixing with singular Omega", _singular_mixing),
                     ("RK4 step on x' = -x", _rk4_decay),
                     ("excitation threshold", _threshold)):
        ok, detail = fn()
        yield name, ok, detail
    yield from _paper_run()
