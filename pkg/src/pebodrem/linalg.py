"""Small dense matrix helpers and the fixed-step integrator.

Everything here works on numpy arrays. ``determinant`` and ``adjugate`` accept
stacks of square matrices (shape ``(..., n, n)``) so the adjugate can evaluate
all of its cofactors in one vectorised call.
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionError, NumericalFailure

# Stage times of the classical Runge-Kutta scheme, as fractions of the step.
RK4_NODES = (0.0, 0.5, 0.5, 1.0)


def _as_square(M) -> np.ndarray:
    A = np.asarray(M, dtype=float)
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DimensionError(f"expected a square matrix, got shape {A.shape}")
    if A.shape[-1] == 0:
        raise DimensionError("matrix dimension must be at least 1")
    return A


def _det_elimination(A: np.ndarray) -> np.ndarray:
    # Gaussian elimination with partial pivoting, vectorised over the batch.
    # A zero pivot column means the matrix is singular: that entry gets det 0.
    A = A.copy()
    n = A.shape[-1]
    batch = A.shape[:-2]
    A = A.reshape((-1, n, n))
    det = np.ones(A.shape[0])
    rows = np.arange(A.shape[0])
    for col in range(n):
        piv = col + np.argmax(np.abs(A[:, col:, col]), axis=1)
        swap = piv != col
        if swap.any():
            r = rows[swap]
            tmp = A[r, col, :].copy()
            A[r, col, :] = A[r, piv[swap], :]
            A[r, piv[swap], :] = tmp
            det[swap] = -det[swap]
        p = A[:, col, col]
        zero = p == 0.0
        det = np.where(zero, 0.0, det * p)
        if col == n - 1:
            break
        safe = np.where(zero, 1.0, p)
        factors = A[:, col + 1:, col] / safe[:, None]
        factors[zero] = 0.0
        A[:, col + 1:, :] -= factors[:, :, None] * A[:, col, None, :]
    return det.reshape(batch)


def _det4(A: np.ndarray) -> np.ndarray:
    # Laplace expansion along the top two rows: 2x2 minors of rows (0, 1)
    # paired with complementary 2x2 minors of rows (2, 3).
    a = A[..., 0, :]
    b = A[..., 1, :]
    c = A[..., 2, :]
    d = A[..., 3, :]
    s0 = a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]
    s1 = a[..., 0] * b[..., 2] - a[..., 2] * b[..., 0]
    s2 = a[..., 0] * b[..., 3] - a[..., 3] * b[..., 0]
    s3 = a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1]
    s4 = a[..., 1] * b[..., 3] - a[..., 3] * b[..., 1]
    s5 = a[..., 2] * b[..., 3] - a[..., 3] * b[..., 2]
    c5 = c[..., 2] * d[..., 3] - c[..., 3] * d[..., 2]
    c4 = c[..., 1] * d[..., 3] - c[..., 3] * d[..., 1]
    c3 = c[..., 1] * d[..., 2] - c[..., 2] * d[..., 1]
    c2 = c[..., 0] * d[..., 3] - c[..., 3] * d[..., 0]
    c1 = c[..., 0] * d[..., 2] - c[..., 2] * d[..., 0]
    c0 = c[..., 0] * d[..., 1] - c[..., 1] * d[..., 0]
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0


def determinant(M) -> float | np.ndarray:
    """Determinant of a square matrix (or of each matrix in a stack).

    Sizes 1-3 use the closed forms, size 4 a Laplace expansion over 2x2
    minors, larger sizes pivoted elimination.
    """
    A = _as_square(M)
    n = A.shape[-1]
    if n == 1:
        out = A[..., 0, 0].copy()
    elif n == 2:
        out = A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0]
    elif n == 3:
        out = (
            A[..., 0, 0] * (A[..., 1, 1] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 1])
            - A[..., 0, 1] * (A[..., 1, 0] * A[..., 2, 2] - A[..., 1, 2] * A[..., 2, 0])
            + A[..., 0, 2] * (A[..., 1, 0] * A[..., 2, 1] - A[..., 1, 1] * A[..., 2, 0])
        )
    elif n == 4:
        out = _det4(A)
    else:
        out = _det_elimination(A)
    if np.ndim(out) == 0:
        return float(out)
    return out


_MINOR_INDEX: dict[int, np.ndarray] = {}


def _minor_index(n: int) -> np.ndarray:
    idx = _MINOR_INDEX.get(n)
    if idx is None:
        keep = [[j for j in range(n) if j != i] for i in range(n)]
        idx = np.array(keep)
        _MINOR_INDEX[n] = idx
    return idx


def adjugate(M) -> np.ndarray:
    """Transpose of the cofactor matrix.

    Computed from the cofactors themselves rather than ``inv(M) * det(M)``,
    so ``adjugate(M) @ M == determinant(M) * I`` also holds for singular M.
    """
    A = _as_square(M)
    n = A.shape[-1]
    if n == 1:
        return np.ones_like(A)
    if n == 2:
        out = np.empty_like(A)
        out[..., 0, 0] = A[..., 1, 1]
        out[..., 0, 1] = -A[..., 0, 1]
        out[..., 1, 0] = -A[..., 1, 0]
        out[..., 1, 1] = A[..., 0, 0]
        return out
    keep = _minor_index(n)
    # minors[..., i, j, :, :] is A with row i and column j removed
    minors = A[..., keep[:, None, :, None], keep[None, :, None, :]]
    cof = np.asarray(determinant(minors))
    sign = np.where((np.add.outer(np.arange(n), np.arange(n)) % 2) == 0, 1.0, -1.0)
    return np.swapaxes(cof * sign, -1, -2)


def frobenius(M) -> float:
    """Frobenius norm (Euclidean norm for vectors)."""
    v = np.ravel(M)
    return math.sqrt(float(np.dot(v, v)))


def rk4_step(
    f: Callable,
    t: float,
    s: np.ndarray,
    h: float,
    inputs: Sequence | None = None,
) -> np.ndarray:
    """One classical Runge-Kutta step of ``s' = f(t, s)``.

    If ``inputs`` is given it must hold one exogenous value per stage (in the
    order of ``RK4_NODES``) and ``f`` is called as ``f(t, s, u)``. This lets a
    caller replay exactly the signals another integrator saw at its stages.
    """
    if not h > 0:
        raise ValueError(f"step must be positive, got {h}")
    if inputs is not None and len(inputs) != 4:
        raise ValueError("inputs must provide one value per RK4 stage")

    def call(i, tt, ss):
        k = f(tt, ss) if inputs is None else f(tt, ss, inputs[i])
        k = np.asarray(k, dtype=float)
        if not math.isfinite(k.sum()):
            raise NumericalFailure(f"non-finite derivative at t={tt!r}", t=tt)
        return k

    s = np.asarray(s, dtype=float)
    k1 = call(0, t, s)
    k2 = call(1, t + 0.5 * h, s + 0.5 * h * k1)
    k3 = call(2, t + 0.5 * h, s + 0.5 * h * k2)
    k4 = call(3, t + h, s + h * k3)
    return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
