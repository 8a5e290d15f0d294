"""Auxiliary PEBO filters and the delayed linear regression they produce.

The filters

    zeta'    = A zeta + B
    G'       = A G + D H Phi_Gamma
    Phi_A'   = A Phi_A,          Phi_A(t0) = I
    Phi_G'   = Gamma Phi_G,      Phi_G(t0) = I

make ``x = zeta - Phi_A theta_e + G theta_Gamma`` hold for constant unknowns
``theta_e = zeta(t0) - x(t0) + G(t0) xi(t0)`` and ``theta_Gamma = xi(t0)``.
Evaluating that identity at the delayed time gives ``z = Psi theta``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .history import SignalHistory, delayed_time
from .linalg import frobenius, rk4_step
from .plant import SystemModel


class Regression(NamedTuple):
    Psi: np.ndarray  # (p, n + k)
    z: np.ndarray    # (p,)


@dataclass
class PeboState:
    zeta: np.ndarray
    G: np.ndarray
    PhiA: np.ndarray
    PhiGamma: np.ndarray
    zeta_history: SignalHistory = field(default_factory=SignalHistory, repr=False)
    G_history: SignalHistory = field(default_factory=SignalHistory, repr=False)
    PhiA_history: SignalHistory = field(default_factory=SignalHistory, repr=False)
    sup_norm: float = 0.0

    @classmethod
    def initial(cls, model: SystemModel, zeta0=None, G0=None, capacity: int = 1024) -> "PeboState":
        """Filters at ``t0``: zero ``zeta``/``G`` unless given, identity fundamentals."""
        n, k = model.n, model.k
        zeta = np.zeros(n) if zeta0 is None else np.asarray(zeta0, dtype=float).reshape(n)
        G = np.zeros((n, k)) if G0 is None else np.asarray(G0, dtype=float).reshape(n, k)
        obs = cls(
            zeta, G, np.eye(n), np.eye(k),
            SignalHistory(capacity), SignalHistory(capacity), SignalHistory(capacity),
        )
        obs.record(model.t0)
        return obs

    def record(self, t: float) -> None:
        self.zeta_history.append(t, self.zeta)
        self.G_history.append(t, self.G)
        self.PhiA_history.append(t, self.PhiA)
        self.sup_norm = max(
            self.sup_norm,
            frobenius(self.zeta),
            frobenius(self.G),
            frobenius(self.PhiA),
            frobenius(self.PhiGamma),
        )

    def discard_before(self, t: float) -> None:
        for hist in (self.zeta_history, self.G_history, self.PhiA_history):
            hist.discard_before(t)


def _stage_values(y):
    # one value for all four stages, or the per-stage list from plant_step
    if callable(y):
        return None, y
    if isinstance(y, (tuple, list)) and len(y) == 4:
        return tuple(np.asarray(v, dtype=float) for v in y), None
    v = np.asarray(y, dtype=float)
    return (v, v, v, v), None


def observer_step(model: SystemModel, obs: PeboState, y, t: float, h: float) -> PeboState:
    """Advance the four filters by one RK4 step and record the new values.

    ``y`` is the output signal that enters ``A``, ``B``, ``D``: a single array
    (held over the step), a callable of time, or the four stage values returned
    by ``plant_step``.
    """
    n, k = model.n, model.k
    nG = n * k
    stages, y_of_t = _stage_values(y)

    def rhs(tt, s, yy=None):
        if yy is None:
            yy = y_of_t(tt)
        A, B, D = model.coefficients(yy, tt)
        zeta = s[:n]
        G = s[n:n + nG].reshape(n, k)
        PhiA = s[n + nG:n + nG + n * n].reshape(n, n)
        PhiG = s[n + nG + n * n:].reshape(k, k)
        M = D @ np.asarray(model.H(tt), dtype=float) @ PhiG
        return np.concatenate((
            A @ zeta + B,
            (A @ G + M).ravel(),
            (A @ PhiA).ravel(),
            (np.asarray(model.Gamma(tt), dtype=float) @ PhiG).ravel(),
        ))

    s0 = np.concatenate((obs.zeta, obs.G.ravel(), obs.PhiA.ravel(), obs.PhiGamma.ravel()))
    s = rk4_step(rhs, t, s0, h, inputs=stages)
    obs.zeta = s[:n]
    obs.G = s[n:n + nG].reshape(n, k)
    obs.PhiA = s[n + nG:n + nG + n * n].reshape(n, n)
    obs.PhiGamma = s[n + nG + n * n:].reshape(k, k)
    obs.record(t + h)
    return obs


def regressor(model: SystemModel, obs: PeboState, y, t: float) -> Regression:
    """``Psi(t) = C(phi) [Phi_A(phi) | -G(phi)]`` and ``z(t) = C(phi) zeta(phi) - y(t)``.

    ``y`` is the delayed measurement at ``t``.
    """
    phi = delayed_time(t, model.delay, model.t0)
    last = obs.zeta_history.last_time
    if phi > last:
        phi = last
    C = np.asarray(model.C(phi), dtype=float)
    PhiA = obs.PhiA_history.sample(phi)
    G = obs.G_history.sample(phi)
    Psi = C @ np.hstack((PhiA, -G))
    z = C @ obs.zeta_history.sample(phi) - np.asarray(y, dtype=float)
    return Regression(Psi, z)


def true_theta(model: SystemModel, x0, xi0, zeta0=None, G0=None) -> np.ndarray:
    """The constant vector ``col(theta_e, theta_Gamma)`` the regression encodes."""
    x0 = np.asarray(x0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    zeta0 = np.zeros(model.n) if zeta0 is None else np.asarray(zeta0, dtype=float)
    G0 = np.zeros((model.n, model.k)) if G0 is None else np.asarray(G0, dtype=float)
    theta_e = zeta0 - x0 + G0 @ xi0
    return np.concatenate((theta_e, xi0))
