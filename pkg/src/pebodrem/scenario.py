"""Scenario configuration, plant/observer co-simulation and run metrics."""
from __future__ import annotations

import json
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .drem import DremState, FctState, drem_step, gradient_step, ie_threshold, mix, reconstruct, theta_fct
from .errors import ConfigError
from .history import SignalHistory
from .linalg import frobenius
from .models import DEFAULT_ICS, build_model, paper_model
from .pebo import PeboState, regressor, observer_step, true_theta
from .plant import PlantState, SystemModel, eta_of, measure, plant_step

DELAY_CASE_IDS = ("C1", "C2", "C3", "custom")

# JSON key -> attribute name
_JSON_KEYS = {
    "model_id": "model_id",
    "x0": "x0",
    "xi0": "xi0",
    "h": "h",
    "T": "T",
    "lambda": "lam",
    "gamma": "gamma",
    "mu": "mu",
    "delay_case": "delay_case",
    "seed": "seed",
    "out_path": "out_path",
}


@dataclass
class ScenarioConfig:
    model_id: str = "paper"
    x0: tuple | None = None
    xi0: tuple | None = None
    h: float = 1e-3
    T: float = 30.0
    lam: float = 1.0
    gamma: float = 1e10
    mu: float = 0.01
    delay_case: str = "C1"
    seed: int = 0  # reserved; runs are deterministic
    out_path: str | None = None

    def validate(self) -> "ScenarioConfig":
        if not (isinstance(self.h, (int, float)) and self.h > 0):
            raise ConfigError(f"h must be > 0, got {self.h!r}")
        if not (isinstance(self.T, (int, float)) and self.T > self.h):
            raise ConfigError(f"T must be greater than h, got T={self.T!r}")
        if not self.lam > 0:
            raise ConfigError(f"lambda must be > 0, got {self.lam!r}")
        if not self.gamma > 0:
            raise ConfigError(f"gamma must be > 0, got {self.gamma!r}")
        if not 0.0 < self.mu < 1.0:
            raise ConfigError("mu must be in (0,1)")
        if self.delay_case not in DELAY_CASE_IDS:
            raise ConfigError(f"delay_case must be one of {DELAY_CASE_IDS}, got {self.delay_case!r}")
        for key in ("x0", "xi0"):
            v = getattr(self, key)
            if v is not None and not all(isinstance(e, (int, float)) and math.isfinite(e) for e in v):
                raise ConfigError(f"{key} must be an array of finite numbers")
        return self

    @property
    def steps(self) -> int:
        return int(round(self.T / self.h))

    def initial_conditions(self):
        x0, xi0 = self.x0, self.xi0
        if x0 is None or xi0 is None:
            defaults = DEFAULT_ICS.get(self.model_id)
            if defaults is None:
                raise ConfigError(f"x0 and xi0 are required for model_id {self.model_id!r}")
            x0 = defaults[0] if x0 is None else x0
            xi0 = defaults[1] if xi0 is None else xi0
        return np.asarray(x0, dtype=float), np.asarray(xi0, dtype=float)

    def to_json_dict(self) -> dict:
        out = {}
        for key, attr in _JSON_KEYS.items():
            v = getattr(self, attr)
            out[key] = list(v) if isinstance(v, tuple) else v
        return out


def config_from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(data) - set(_JSON_KEYS))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        attr = _JSON_KEYS[key]
        if key in ("x0", "xi0") and value is not None:
            if not isinstance(value, list):
                raise ConfigError(f"{key} must be an array")
            value = tuple(value)
        elif key in ("h", "T", "lambda", "gamma", "mu"):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{key} must be a number, got {value!r}")
            value = float(value)
        elif key == "seed":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"seed must be an integer, got {value!r}")
        elif key in ("model_id", "delay_case") and not isinstance(value, str):
            raise ConfigError(f"{key} must be a string, got {value!r}")
        elif key == "out_path" and value is not None and not isinstance(value, str):
            raise ConfigError(f"out_path must be a string, got {value!r}")
        kwargs[attr] = value
    return ScenarioConfig(**kwargs).validate()


def load_config(path) -> ScenarioConfig:
    """Read and validate a JSON scenario file; missing keys take defaults."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return config_from_dict(data)


def paper_example(case: str = "C1", coupling: str = "instantaneous"):
    """The two-state example with one of the delay cases C1, C2, C3."""
    if case not in ("C1", "C2", "C3"):
        raise ConfigError(f"unknown delay case {case!r}; expected C1, C2 or C3")
    model = paper_model(case, coupling)
    config = ScenarioConfig(model_id=model.name, delay_case=case).validate()
    return model, config


def model_for(config: ScenarioConfig) -> SystemModel:
    return build_model(config.model_id, config.delay_case)


@dataclass
class EstimateRecord:
    t: float
    x: np.ndarray
    x_hat: np.ndarray
    eta: np.ndarray
    eta_hat: np.ndarray
    theta_fct: np.ndarray
    w: float
    Delta: float
    converged: bool


@dataclass
class ObserverInit:
    """Observer initial values; everything defaults to zero."""

    zeta0: np.ndarray | None = None
    G0: np.ndarray | None = None
    theta_hat0: np.ndarray | None = None
    Y0: np.ndarray | None = None
    Omega0: np.ndarray | None = None


@dataclass
class ScenarioRun(Sequence):
    """Result of ``run_scenario``: a sequence of ``EstimateRecord`` plus context."""

    records: list
    config: ScenarioConfig
    theta: np.ndarray
    sup_norms: dict
    trace: dict | None = None
    saturated: bool = False

    def __getitem__(self, i):
        return self.records[i]

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


_TRACE_KEYS = ("t", "x", "xi", "y", "coupling", "zeta", "G", "PhiA", "PhiGamma",
               "Psi", "z", "Y", "Omega", "calY", "theta_hat")


def run_scenario(
    model: SystemModel,
    config: ScenarioConfig,
    init: ObserverInit | None = None,
    keep_trace: bool = False,
) -> ScenarioRun:
    """Co-simulate plant, PEBO filters, DREM and the estimator on one grid.

    One record per grid point, starting at ``t0``. With ``keep_trace`` the
    internal signals are kept as arrays in ``run.trace``.
    """
    config.validate()
    # overflow surfaces as NumericalFailure from the integrator instead
    with np.errstate(over="ignore", invalid="ignore"):
        return _run(model, config, init or ObserverInit(), keep_trace)


def _run(model, config, init, keep_trace):
    h, steps, t0 = config.h, config.steps, model.t0
    N = model.n + model.k
    x0, xi0 = config.initial_conditions()
    if x0.shape != (model.n,) or xi0.shape != (model.k,):
        raise ConfigError(
            f"x0/xi0 must have lengths {model.n}/{model.k}, got {x0.shape[0]}/{xi0.shape[0]}"
        )

    capacity = steps + 2 if keep_trace else max(64, int(2 * (model.delay.d_max + 4 * h) / h) + 16)
    x_hist = SignalHistory(capacity)
    x_hist.append(t0, x0)
    plant = PlantState(x0, xi0)
    obs = PeboState.initial(model, init.zeta0, init.G0, capacity=capacity)
    drem = DremState.zeros(N, config.lam)
    if init.Y0 is not None or init.Omega0 is not None:
        drem = DremState(
            np.zeros(N) if init.Y0 is None else np.asarray(init.Y0, dtype=float),
            np.zeros((N, N)) if init.Omega0 is None else np.asarray(init.Omega0, dtype=float),
            config.lam,
        )
    fct = FctState.initial(N, config.gamma, config.mu, init.theta_hat0)
    theta = true_theta(model, x0, xi0, init.zeta0, init.G0)
    sup = {"x": 0.0, "xi": 0.0, "filters": 0.0, "Y": 0.0, "Omega": 0.0}
    trace = {key: [] for key in _TRACE_KEYS} if keep_trace else None
    keep_window = model.delay.d_max + 2 * h

    y0 = measure(model, x_hist, t0)
    reg = regressor(model, obs, y0, t0)
    calY, Delta = mix(drem)
    records = []

    def emit(t, y, coupling, reg, calY, Delta):
        x_hat, eta_hat = reconstruct(obs, model, fct, t)
        records.append(EstimateRecord(
            t=t, x=plant.x, x_hat=x_hat, eta=eta_of(model, t, plant.xi), eta_hat=eta_hat,
            theta_fct=theta_fct(fct), w=fct.w, Delta=Delta,
            converged=fct.w <= 1.0 - fct.mu,
        ))
        sup["Y"] = max(sup["Y"], frobenius(drem.Y))
        sup["Omega"] = max(sup["Omega"], frobenius(drem.Omega))
        if trace is not None:
            for key, val in (("t", t), ("x", plant.x), ("xi", plant.xi), ("y", y),
                             ("coupling", coupling), ("zeta", obs.zeta), ("G", obs.G),
                             ("PhiA", obs.PhiA), ("PhiGamma", obs.PhiGamma), ("Psi", reg.Psi),
                             ("z", reg.z), ("Y", drem.Y), ("Omega", drem.Omega),
                             ("calY", calY), ("theta_hat", fct.theta_hat)):
                trace[key].append(np.array(val, dtype=float))

    def coupling_at(t):
        if model.coupling == "measured":
            return measure(model, x_hist, t)
        return np.asarray(model.C(t), dtype=float) @ plant.x

    emit(t0, y0, coupling_at(t0), reg, calY, Delta)
    for i in range(steps):
        t = t0 + i * h
        t_next = t0 + (i + 1) * h
        plant, used = plant_step(model, plant, x_hist, t, h)
        x_hist.append(t_next, plant.x)
        obs = observer_step(model, obs, used, t, h)
        t_mid = t + 0.5 * h
        reg_mid = regressor(model, obs, measure(model, x_hist, t_mid), t_mid)
        y_next = measure(model, x_hist, t_next)
        reg_next = regressor(model, obs, y_next, t_next)
        drem = drem_step(drem, (reg, reg_mid, reg_next), h, t)
        calY_next, Delta_next = mix(drem)
        fct = gradient_step(fct, calY, Delta, h, calY_next, Delta_next)
        reg, calY, Delta = reg_next, calY_next, Delta_next
        emit(t_next, y_next, coupling_at(t_next), reg, calY, Delta)
        if trace is None and i % 512 == 511:
            horizon = t_next - keep_window
            x_hist.discard_before(horizon)
            obs.discard_before(horizon)

    sup["x"], sup["xi"], sup["filters"] = plant.sup_x, plant.sup_xi, obs.sup_norm
    if trace is not None:
        trace = {key: np.array(vals) for key, vals in trace.items()}
    return ScenarioRun(records, config, theta, sup, trace, saturated=fct.saturated)


@dataclass
class Metrics:
    t_c: float | None
    interval_exciting: bool
    max_x_error_after_tc: float | None
    max_eta_error_after_tc: float | None
    max_theta_error_after_tc: float | None
    int_delta2: float
    rho: float
    sup_norms: dict = field(default_factory=dict)

    def summary_lines(self):
        fmt = lambda v: "none" if v is None else f"{v:.6g}"
        yield f"t_c                      {fmt(self.t_c)}"
        yield f"interval exciting        {self.interval_exciting}"
        yield f"int Delta^2 / rho        {self.int_delta2:.6g} / {self.rho:.6g}"
        yield f"max |x - x_hat|, t>=t_c  {fmt(self.max_x_error_after_tc)}"
        yield f"max |eta - eta_hat|      {fmt(self.max_eta_error_after_tc)}"
        yield f"max |theta_fct - theta|  {fmt(self.max_theta_error_after_tc)}"
        for key, val in self.sup_norms.items():
            yield f"sup |{key}|{' ' * (18 - len(key))} {val:.6g}"


def convergence_metrics(records, gamma: float | None = None, mu: float | None = None,
                        theta=None) -> Metrics:
    """Convergence time, post-convergence errors and excitation level of a run."""
    if not len(records):
        raise ValueError("records must not be empty")
    sup = {}
    if isinstance(records, ScenarioRun):
        gamma = records.config.gamma if gamma is None else gamma
        mu = records.config.mu if mu is None else mu
        theta = records.theta if theta is None else theta
        sup = dict(records.sup_norms)
        records = records.records
    if gamma is None or mu is None:
        raise ValueError("gamma and mu are required for plain record sequences")
    t = np.array([r.t for r in records])
    delta = np.array([r.Delta for r in records])
    int_delta2 = float(np.trapezoid(delta * delta, t)) if len(t) > 1 else 0.0
    rho = ie_threshold(gamma, mu)
    idx = next((i for i, r in enumerate(records) if r.w <= 1.0 - mu), None)
    if idx is None:
        return Metrics(None, False, None, None, None, int_delta2, rho, sup)
    after = records[idx:]
    ex = max(float(np.linalg.norm(r.x - r.x_hat)) for r in after)
    ee = max(float(np.linalg.norm(r.eta - r.eta_hat)) for r in after)
    et = None
    if theta is not None:
        theta = np.asarray(theta, dtype=float)
        et = max(float(np.max(np.abs(r.theta_fct - theta))) for r in after)
    return Metrics(float(records[idx].t), True, ex, ee, et, int_delta2, rho, sup)


def write_csv(records, out) -> None:
    """Write records as CSV (17 significant digits) to a path or text stream."""
    if isinstance(records, ScenarioRun):
        records = records.records
    first = records[0]
    n, q, N = first.x.shape[0], first.eta.shape[0], first.theta_fct.shape[0]
    header = (["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"xhat{i}" for i in range(1, n + 1)]
              + [f"eta{i}" for i in range(1, q + 1)] + [f"etahat{i}" for i in range(1, q + 1)]
              + [f"thetafct{i}" for i in range(1, N + 1)] + ["w", "Delta", "converged"])

    def rows():
        yield ",".join(header) + "\n"
        for r in records:
            vals = [r.t, *r.x, *r.x_hat, *r.eta, *r.eta_hat, *r.theta_fct, r.w, r.Delta]
            yield ",".join(format(float(v), ".17g") for v in vals) + f",{int(r.converged)}\n"

    if hasattr(out, "write"):
        out.writelines(rows())
        return
    with open(out, "w", newline="") as fh:
        fh.writelines(rows())
