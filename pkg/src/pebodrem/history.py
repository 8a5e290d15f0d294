"""Recorded trajectories on the integration grid and lookups at delayed times."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, OrderingError, OutOfRangeError


@dataclass(frozen=True)
class DelayFunction:
    """Known measurement delay ``d(t)`` with its bound ``d_max``.

    ``d_max`` is only used to size history buffers.
    """

    d: Callable[[float], float]
    d_max: float

    def __call__(self, t: float) -> float:
        return float(self.d(t))


def delayed_time(t: float, delay: DelayFunction | Callable[[float], float], t0: float = 0.0) -> float:
    """Clamped delayed time ``max(t0, t - d(t))``.

    Before the delay horizon has filled, measurements refer back to ``t0``.
    """
    return max(t0, t - float(delay(t)))


class SignalHistory:
    """Time-indexed samples of an array-valued signal.

    Samples are kept in a growable buffer. ``sample`` interpolates linearly
    between the two bracketing grid points and returns stored values exactly
    when queried on a recorded time.
    """

    def __init__(self, capacity: int = 1024):
        self._times = np.empty(max(int(capacity), 1))
        self._values: np.ndarray | None = None
        self._start = 0
        self._stop = 0

    def __len__(self) -> int:
        return self._stop - self._start

    @property
    def times(self) -> np.ndarray:
        return self._times[self._start:self._stop]

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            return np.empty((0,))
        return self._values[self._start:self._stop]

    @property
    def shape(self):
        return None if self._values is None else self._values.shape[1:]

    @property
    def first_time(self) -> float:
        if not len(self):
            raise OutOfRangeError("history is empty")
        return float(self._times[self._start])

    @property
    def last_time(self) -> float:
        if not len(self):
            raise OutOfRangeError("history is empty")
        return float(self._times[self._stop - 1])

    def latest(self) -> np.ndarray:
        return self._values[self._stop - 1].copy()

    def append(self, t: float, v) -> None:
        v = np.asarray(v, dtype=float)
        if self._values is None:
            self._values = np.empty((self._times.shape[0],) + v.shape)
        elif v.shape != self._values.shape[1:]:
            raise DimensionError(
                f"sample shape {v.shape} does not match history shape {self._values.shape[1:]}"
            )
        if len(self) and not t > self._times[self._stop - 1]:
            raise OrderingError(
                f"time {t!r} is not after the last recorded time {self._times[self._stop - 1]!r}"
            )
        if self._stop == self._times.shape[0]:
            self._grow()
        self._times[self._stop] = t
        self._values[self._stop] = v
        self._stop += 1

    def _grow(self):
        live = len(self)
        # compact first; only reallocate when the live window really is full
        cap = self._times.shape[0]
        new_cap = cap if live <= cap // 2 else 2 * cap
        times = np.empty(new_cap)
        values = np.empty((new_cap,) + self._values.shape[1:])
        times[:live] = self._times[self._start:self._stop]
        values[:live] = self._values[self._start:self._stop]
        self._times, self._values = times, values
        self._start, self._stop = 0, live

    def discard_before(self, t: float) -> None:
        """Drop samples strictly older than the grid point at or below ``t``."""
        if len(self) < 2:
            return
        i = int(np.searchsorted(self.times, t, side="right")) - 1
        if i > 0:
            self._start += min(i, len(self) - 1)

    def sample(self, tq: float) -> np.ndarray:
        n = len(self)
        if n == 0:
            raise OutOfRangeError(f"cannot sample empty history at t={tq!r}")
        times = self.times
        t_first, t_last = times[0], times[-1]
        if tq < t_first or tq > t_last:
            raise OutOfRangeError(
                f"t={tq!r} is outside the recorded range [{t_first!r}, {t_last!r}]"
            )
        i = int(np.searchsorted(times, tq, side="right")) - 1
        vals = self._values[self._start:self._stop]
        if times[i] == tq:
            return vals[i].copy()
        s = (tq - times[i]) / (times[i + 1] - times[i])
        return (1.0 - s) * vals[i] + s * vals[i + 1]
