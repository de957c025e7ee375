"""Least squares and lasso regression with R-squared scoring."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LinearFit", "SolverError", "lasso_fit", "ols_fit", "predict", "r2_score"]

_LASSO_TOL = 1e-7
_LASSO_MAX_SWEEPS = 10_000


class SolverError(ValueError):
    """Raised when the design matrix cannot be solved (rank deficiency etc.)."""


@dataclass(frozen=True)
class LinearFit:
    coef: np.ndarray
    intercept: float
    converged: bool = True


def _as_2d(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
    return X


def _as_1d(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim == 2 and y.shape[1] == 1:
        y = y[:, 0]
    if y.ndim != 1:
        raise ValueError(f"y must be a vector, got shape {y.shape}")
    return y


def ols_fit(X, y) -> LinearFit:
    """Ordinary least squares with intercept, solved by QR with a pivot check."""
    X = _as_2d(X)
    y = _as_1d(y)
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]}")
    if n <= p:
        raise SolverError(f"need more rows than columns, got {n}x{p}")
    A = np.column_stack([np.ones(n), X])
    q, r = np.linalg.qr(A)
    diag = np.abs(np.diag(r))
    if diag.min() <= max(n, p + 1) * np.finfo(np.float64).eps * diag.max():
        raise SolverError("design matrix is rank deficient")
    beta = np.linalg.solve(r, q.T @ y)
    return LinearFit(coef=beta[1:], intercept=float(beta[0]))


def predict(fit: LinearFit, X) -> np.ndarray:
    X = _as_2d(X)
    return X @ fit.coef + fit.intercept


def r2_score(y_true, y_pred) -> float:
    """Coefficient of determination: 1 - SS_res / SS_tot."""
    y_true = _as_1d(y_true)
    y_pred = _as_1d(y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError("y_true and y_pred must have the same length")
    resid = y_true - y_pred
    tot = y_true - y_true.mean()
    ss_tot = float(tot @ tot)
    if ss_tot == 0.0:
        raise ValueError("r2_score undefined for constant y_true")
    return 1.0 - float(resid @ resid) / ss_tot


def _soft_threshold(z: float, t: float) -> float:
    if z > t:
        return z - t
    if z < -t:
        return z + t
    return 0.0


def lasso_fit(X, y, alpha: float) -> LinearFit:
    """Minimize (1/(2n)) ||y - Xw - b||^2 + alpha * ||w||_1 by coordinate descent.

    Columns are standardized internally for conditioning; the reported
    coefficients and the penalty apply to the original scale, and the
    intercept is unpenalized.  Stops when no coefficient moves by more
    than 1e-7 in a full sweep.  If the sweep budget runs out the best
    iterate is returned with ``converged=False``.
    """
    if alpha < 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    X = _as_2d(X)
    y = _as_1d(y)
    n, p = X.shape
    if y.shape[0] != n:
        raise ValueError(f"X has {n} rows but y has {y.shape[0]}")

    x_mean = X.mean(axis=0)
    y_mean = y.mean()
    Xc = X - x_mean
    yc = y - y_mean
    scale = np.sqrt((Xc * Xc).mean(axis=0))
    active = scale > 0.0  # constant columns center to zero and stay at coefficient 0
    Xs = Xc / np.where(active, scale, 1.0)

    w = np.zeros(p)  # coefficients in the standardized scale
    resid = yc.copy()
    thresh = np.where(active, alpha / np.where(active, scale, 1.0), np.inf)
    converged = False
    for _ in range(_LASSO_MAX_SWEEPS):
        max_delta = 0.0
        for j in range(p):
            if not active[j]:
                continue
            xj = Xs[:, j]
            w_old = w[j]
            rho = (xj @ resid) / n + w_old  # standardized columns: (1/n)||xj||^2 == 1
            w_new = _soft_threshold(rho, thresh[j])
            if w_new != w_old:
                resid -= (w_new - w_old) * xj
                w[j] = w_new
            # track movement on the original coefficient scale
            max_delta = max(max_delta, abs(w_new - w_old) / scale[j])
        if max_delta < _LASSO_TOL:
            converged = True
            break

    coef = np.where(active, w / np.where(active, scale, 1.0), 0.0)
    intercept = float(y_mean - x_mean @ coef)
    return LinearFit(coef=coef, intercept=intercept, converged=converged)


def lasso_objective(X, y, fit: LinearFit, alpha: float) -> float:
    """Objective value (1/(2n)) ||y - Xw - b||^2 + alpha ||w||_1 for a fit."""
    X = _as_2d(X)
    y = _as_1d(y)
    r = y - predict(fit, X)
    return float(r @ r) / (2.0 * len(y)) + alpha * float(np.abs(fit.coef).sum())
