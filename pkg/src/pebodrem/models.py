"""Built-in plant models: the two-state example with a harmonic exosystem."""
from __future__ import annotations

import math

import numpy as np

from .errors import ConfigError
from .history import DelayFunction
from .plant import SystemModel

PAPER_X0 = (1.0, 2.0)
PAPER_XI0 = (0.0, 0.3, 1.0)

_C = np.array([[1.0, 0.0]])
_H = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]])
_GAMMA = np.array([[0.0, 1.0, 0.0], [-9.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
_U = np.array([-1.0])

DELAY_CASES = {
    "C1": DelayFunction(lambda t: 1.0, 1.0),
    "C2": DelayFunction(lambda t: 1.0 + 0.25 * math.sin(t), 1.25),
    "C3": DelayFunction(lambda t: 0.1 + math.cos(3.0 * t) ** 2, 1.1),
}


def delay_case(case: str) -> DelayFunction:
    try:
        return DELAY_CASES[case]
    except KeyError:
        raise ConfigError(f"unknown delay case {case!r}; expected one of {sorted(DELAY_CASES)}") from None


def _A(u, y, t):
    s = math.sin(t)
    return np.array([[-y[0] * y[0], 1.0], [-s * s, 0.0]])


def _B(u, y, t):
    return np.array([0.0, y[0] ** 3 * u[0]])


def _D(u, y, t):
    return np.array([[-2.0 * math.sin(t), 0.0], [0.0, -y[0] ** 3]])


def paper_model(case: str = "C1", coupling: str = "instantaneous") -> SystemModel:
    """n=2, m=p=1, q=2, k=3 example driven by u = -1.

    ``eta(t) = (1 + 0.1 sin 3t, 1 + 0.3 cos 3t)`` for ``xi(0) = (0, 0.3, 1)``.
    """
    return SystemModel(
        n=2, m=1, p=1, q=2, k=3,
        A=_A, B=_B, D=_D,
        C=lambda t: _C,
        H=lambda t: _H,
        Gamma=lambda t: _GAMMA,
        delay=delay_case(case),
        u=lambda t: _U,
        coupling=coupling,
        name="paper" if coupling == "instantaneous" else "paper-measured",
    )


# model_id -> factory(case)
BUILTIN_MODELS = {
    "paper": lambda case: paper_model(case, "instantaneous"),
    "paper-measured": lambda case: paper_model(case, "measured"),
}

DEFAULT_ICS = {
    "paper": (PAPER_X0, PAPER_XI0),
    "paper-measured": (PAPER_X0, PAPER_XI0),
}


def build_model(model_id: str, case: str) -> SystemModel:
    if model_id == "custom":
        raise ConfigError("model_id 'custom' needs a SystemModel built through the Python API")
    try:
        factory = BUILTIN_MODELS[model_id]
    except KeyError:
        raise ConfigError(
            f"unknown model_id {model_id!r}; expected one of {sorted(BUILTIN_MODELS)} or 'custom'"
        ) from None
    return factory(case)
