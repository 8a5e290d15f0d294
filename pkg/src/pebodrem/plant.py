"""Ground-truth system: affine-in-the-states dynamics, exosystem, delayed output."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, OutOfRangeError
from .history import DelayFunction, SignalHistory, delayed_time
from .linalg import frobenius, rk4_step

COUPLINGS = ("measured", "instantaneous")


@dataclass
class SystemModel:
    """Known matrix functions of the plant and its parameter exosystem.

    ``A``, ``B`` and ``D`` take ``(u, y, t)``. Vectors are 1-D arrays, so
    ``B`` returns shape ``(n,)`` and ``u`` returns shape ``(m,)``.

    ``coupling`` selects which output signal enters ``A``, ``B``, ``D``:
    ``"measured"`` uses the delayed measurement ``y(t) = C(phi) x(phi)``,
    ``"instantaneous"`` uses the current output ``C(t) x(t)``. The observer
    always receives exactly the values the plant used, stage by stage.
    """

    n: int
    m: int
    p: int
    q: int
    k: int
    A: Callable
    B: Callable
    D: Callable
    C: Callable
    H: Callable
    Gamma: Callable
    delay: DelayFunction
    u: Callable
    coupling: str = "measured"
    name: str = "custom"
    t0: float = 0.0

    def __post_init__(self):
        if self.coupling not in COUPLINGS:
            raise ValueError(f"coupling must be one of {COUPLINGS}, got {self.coupling!r}")

    def coefficients(self, y, t):
        """``(A(t), B(t), D(t))`` for the given coupling output ``y``."""
        u = self.u(t)
        return (
            np.asarray(self.A(u, y, t), dtype=float),
            np.asarray(self.B(u, y, t), dtype=float),
            np.asarray(self.D(u, y, t), dtype=float),
        )

    def check_shapes(self, t: float | None = None) -> None:
        """Evaluate every matrix function once and verify declared shapes."""
        t = self.t0 if t is None else t
        y = np.zeros(self.p)
        A, B, D = self.coefficients(y, t)
        expected = {
            "A": (A.shape, (self.n, self.n)),
            "B": (B.shape, (self.n,)),
            "D": (D.shape, (self.n, self.q)),
            "C": (np.shape(self.C(t)), (self.p, self.n)),
            "H": (np.shape(self.H(t)), (self.q, self.k)),
            "Gamma": (np.shape(self.Gamma(t)), (self.k, self.k)),
            "u": (np.shape(self.u(t)), (self.m,)),
        }
        for name, (got, want) in expected.items():
            if tuple(got) != want:
                raise DimensionError(f"{name}(t) has shape {tuple(got)}, expected {want}")


@dataclass
class PlantState:
    x: np.ndarray
    xi: np.ndarray
    sup_x: float = field(default=0.0, compare=False)
    sup_xi: float = field(default=0.0, compare=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.xi = np.asarray(self.xi, dtype=float)
        self.sup_x = max(self.sup_x, frobenius(self.x))
        self.sup_xi = max(self.sup_xi, frobenius(self.xi))


def eta_of(model: SystemModel, t: float, xi) -> np.ndarray:
    """Time-varying parameter ``eta = H(t) xi``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (model.k,):
        raise DimensionError(f"xi has shape {xi.shape}, expected ({model.k},)")
    return np.asarray(model.H(t), dtype=float) @ xi


def measure(model: SystemModel, x_history: SignalHistory, t: float) -> np.ndarray:
    """Delayed output ``C(phi) x(phi)`` with ``phi = max(t0, t - d(t))``.

    If the delayed time lies past the newest sample (delay shorter than the
    step), the newest sample is used.
    """
    phi = delayed_time(t, model.delay, model.t0)
    if len(x_history) and phi > x_history.last_time:
        phi = x_history.last_time
    x_phi = x_history.sample(phi)
    return np.asarray(model.C(phi), dtype=float) @ x_phi


def plant_step(
    model: SystemModel,
    state: PlantState,
    x_history: SignalHistory,
    t: float,
    h: float,
):
    """Advance plant and exosystem by one RK4 step.

    Returns ``(new_state, coupling)`` where ``coupling`` lists the output value
    fed into ``A``, ``B``, ``D`` at each of the four RK4 stages. Passing it to
    the observer makes both integrators see identical coefficients.
    """
    n = model.n
    if not len(x_history):
        raise OutOfRangeError("x_history is empty; record the initial state first")
    used = []

    if model.coupling == "measured":
        y_mid = measure(model, x_history, t + 0.5 * h)
        ys = (measure(model, x_history, t), y_mid, y_mid, measure(model, x_history, t + h))

        def output(i, tt, x):
            return ys[i]
    else:
        def output(i, tt, x):
            return np.asarray(model.C(tt), dtype=float) @ x

    stage = iter(range(4))

    def rhs(tt, s):
        i = next(stage)
        x, xi = s[:n], s[n:]
        y = output(i, tt, x)
        used.append(y)
        A, B, D = model.coefficients(y, tt)
        eta = np.asarray(model.H(tt), dtype=float) @ xi
        dx = A @ x + D @ eta + B
        dxi = np.asarray(model.Gamma(tt), dtype=float) @ xi
        return np.concatenate((dx, dxi))

    s = rk4_step(rhs, t, np.concatenate((state.x, state.xi)), h)
    new = PlantState(s[:n], s[n:], sup_x=state.sup_x, sup_xi=state.sup_xi)
    return new, tuple(used)
