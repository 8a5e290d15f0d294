"""Regressor extension and mixing, gradient estimator, fixed-time estimate."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError
from .linalg import adjugate, rk4_step
from .pebo import PeboState, Regression
from .plant import SystemModel

W_FLOOR = 1e-300


@dataclass(frozen=True)
class DremState:
    Y: np.ndarray      # (N,)
    Omega: np.ndarray  # (N, N)
    lam: float

    @classmethod
    def zeros(cls, size: int, lam: float) -> "DremState":
        if not lam > 0:
            raise ConfigError(f"lambda must be positive, got {lam}")
        return cls(np.zeros(size), np.zeros((size, size)), float(lam))


def drem_step(d: DremState, reg, h: float, t: float = 0.0) -> DremState:
    """One RK4 step of ``Y' = -lam Y + lam Psi^T z``, ``Omega' = -lam Omega + lam Psi^T Psi``.

    ``reg`` is a single ``Regression`` held over the step or a
    ``(start, mid, end)`` triple evaluated at ``t``, ``t + h/2``, ``t + h``.
    """
    N = d.Y.shape[0]
    if isinstance(reg, Regression):
        stages = (reg, reg, reg, reg)
    else:
        r0, rm, r1 = reg
        stages = (r0, rm, rm, r1)
    forcing = [
        np.concatenate((r.Psi.T @ r.z, (r.Psi.T @ r.Psi).ravel())) for r in stages
    ]
    lam = d.lam

    def rhs(tt, s, f):
        return lam * (f - s)

    s = rk4_step(rhs, t, np.concatenate((d.Y, d.Omega.ravel())), h, inputs=forcing)
    return DremState(s[:N], s[N:].reshape(N, N), lam)


def mix(d: DremState):
    """``(adj(Omega) Y, det(Omega))``: one scalar regression per unknown.

    The determinant is the Laplace expansion of the first row over the same
    cofactors, so ``adj(Omega) Omega = det(Omega) I`` holds with one rounding.
    """
    adj = adjugate(d.Omega)
    return adj @ d.Y, float(d.Omega[0] @ adj[:, 0])


def _check_mu(mu: float) -> None:
    if not 0.0 < mu < 1.0:
        raise ConfigError(f"mu must be in (0,1), got {mu}")


def clip(w: float, mu: float) -> float:
    _check_mu(mu)
    return w if w <= 1.0 - mu else 1.0 - mu


def ie_threshold(gamma: float, mu: float) -> float:
    """Excitation level ``int Delta^2`` needed before ``w`` drops to ``1 - mu``."""
    if not gamma > 0:
        raise ConfigError(f"gamma must be positive, got {gamma}")
    _check_mu(mu)
    return -math.log1p(-mu) / gamma


@dataclass(frozen=True)
class FctState:
    theta_hat: np.ndarray
    theta_hat0: np.ndarray
    w: float
    gamma: float
    mu: float
    saturated: bool = False

    @classmethod
    def initial(cls, size: int, gamma: float, mu: float, theta_hat0=None) -> "FctState":
        if not gamma > 0:
            raise ConfigError(f"gamma must be positive, got {gamma}")
        _check_mu(mu)
        th0 = np.zeros(size) if theta_hat0 is None else np.asarray(theta_hat0, dtype=float).reshape(size)
        return cls(th0.copy(), th0.copy(), 1.0, float(gamma), float(mu))


def _phi1(a: float) -> float:
    # (1 - e^-a) / a, continuous at 0
    if a < 1e-8:
        return 1.0 - 0.5 * a
    return -math.expm1(-a) / a


def gradient_step(f: FctState, calY, Delta: float, h: float, calY_next=None, Delta_next=None) -> FctState:
    """Exponential-integrator step of the gradient estimator and of ``w``.

    With frozen ``Delta`` and ``calY`` the update is the exact solution of
    ``theta_hat' = -gamma Delta (Delta theta_hat - calY)``. When the values at
    the end of the step are supplied, the exponent and the forcing use
    trapezoidal averages instead, so ``w`` tracks ``exp(-gamma int Delta^2)``
    evaluated with the trapezoidal rule on the grid.
    """
    calY = np.asarray(calY, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if Delta_next is None:
            a = f.gamma * h * Delta * Delta
            b = f.gamma * h * Delta * calY
        else:
            calY_next = np.asarray(calY_next, dtype=float)
            a = 0.5 * f.gamma * h * (Delta * Delta + Delta_next * Delta_next)
            b = 0.5 * f.gamma * h * (Delta * calY + Delta_next * calY_next)
    if a == 0.0:
        return f
    if not math.isfinite(a) or not np.all(np.isfinite(b)):
        # a -> infinity limit: theta_hat jumps to the regression solution
        D = Delta_next if Delta_next is not None and Delta_next != 0.0 else Delta
        Yv = calY_next if Delta_next is not None and Delta_next != 0.0 else calY
        return replace(f, theta_hat=Yv / D, w=W_FLOOR, saturated=True)
    decay = math.exp(-a)
    theta = decay * f.theta_hat + _phi1(a) * b
    return replace(f, theta_hat=theta, w=max(decay * f.w, W_FLOOR))


def theta_fct(f: FctState) -> np.ndarray:
    """``(theta_hat - w_c theta_hat0) / (1 - w_c)`` with ``w_c = clip(w, mu)``."""
    wc = clip(f.w, f.mu)
    return (f.theta_hat - wc * f.theta_hat0) / (1.0 - wc)


def reconstruct(obs: PeboState, model: SystemModel, f: FctState | np.ndarray, t: float):
    """State and parameter estimates from the current filters and ``theta_fct``.

    ``f`` may also be a parameter vector, used as-is.
    """
    th = theta_fct(f) if isinstance(f, FctState) else np.asarray(f, dtype=float)
    n = model.n
    th_e, th_g = th[:n], th[n:]
    x_hat = obs.zeta - obs.PhiA @ th_e + obs.G @ th_g
    eta_hat = np.asarray(model.H(t), dtype=float) @ (obs.PhiGamma @ th_g)
    return x_hat, eta_hat
