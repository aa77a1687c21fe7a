"""Weighted fit of ``y = y0 + A0 * exp(-x / t)``."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass

import numpy as np

log = logging.getLogger(__name__)

MAX_ITER = 200


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    y0: float
    A0: float
    t: float
    sigma_y0: float
    sigma_A0: float
    sigma_t: float
    residual_norm: float
    converged: bool
    iterations: int
    bootstrap_sigma_t: float | None = None

    @property
    def params(self) -> np.ndarray:
        return np.array([self.y0, self.A0, self.t])

    def to_dict(self) -> dict:
        return asdict(self)


def model(x, y0: float, a0: float, t: float) -> np.ndarray:
    return y0 + a0 * np.exp(-np.asarray(x, dtype=float) / t)


def jacobian(x, y0: float, a0: float, t: float) -> np.ndarray:
    """Columns d/dy0, d/dA0, d/dt."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-x / t)
    return np.column_stack([np.ones_like(x), e, a0 * x * e / t**2])


def initial_guess(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Log-linear regression on ``y - min(y)`` shifted just below zero."""
    span = float(np.ptp(y)) or 1.0
    floor = float(np.min(y)) - 1e-3 * span
    z = y - floor
    slope, intercept = np.polyfit(x, np.log(z), 1)
    if slope < 0:
        t0 = -1.0 / slope
    else:
        t0 = max(float(np.ptp(x)), 1e-12) / 2.0
    return np.array([floor, math.exp(intercept), t0])


def _levenberg_marquardt(x, y, w, p0):
    p = p0.astype(float).copy()
    r = (y - model(x, *p)) * np.sqrt(w)
    cost = float(r @ r)
    lam = 1e-3
    sw = np.sqrt(w)[:, None]
    for it in range(1, MAX_ITER + 1):
        j = jacobian(x, *p) * sw
        jtj = j.T @ j
        g = j.T @ r
        improved = False
        while lam < 1e16:
            a = jtj + lam * np.diag(np.diag(jtj) + 1e-300)
            try:
                step = np.linalg.solve(a, g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            trial = p + step
            if trial[2] <= 0:
                lam *= 10
                continue
            r_new = (y - model(x, *trial)) * np.sqrt(w)
            cost_new = float(r_new @ r_new)
            if cost_new <= cost:
                small = np.all(np.abs(step) <= 1e-13 * (np.abs(p) + 1e-13))
                p, r, lam = trial, r_new, max(lam / 10, 1e-12)
                done = small or cost - cost_new <= 1e-15 * max(cost, 1e-300)
                cost = cost_new
                improved = True
                break
            lam *= 10
        if not improved or done:
            return p, cost, it, True
    return p, cost, MAX_ITER, False


def fit_exponential(x, y, sigma=None, bootstrap: int = 0, seed: int = 0) -> FitResult:
    """Fit an offset exponential decay.

    ``sigma`` are one-sigma point errors; when all are positive they weight
    the fit and the covariance is taken as absolute, otherwise points are
    unweighted and the covariance is scaled by the reduced chi-square.  With
    ``bootstrap > 0`` the lifetime error is also estimated by refitting
    ``bootstrap`` noisy replicas of the fitted curve.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("x and y must be 1-D arrays of equal length")
    if x.size < 4:
        raise FitError(f"need at least 4 points, got {x.size}")
    weighted = sigma is not None and np.all(np.asarray(sigma, dtype=float) > 0)
    if weighted:
        sigma = np.asarray(sigma, dtype=float)
        w = 1.0 / sigma**2
    else:
        w = np.ones_like(y)
    y_pos = y[y > 0]
    if y_pos.size >= 2 and y_pos.max() < 10 * y_pos.min():
        log.info("data span less than one decade of decay; lifetime poorly constrained")

    p0 = initial_guess(x, y)
    p, chi2, iterations, converged = _levenberg_marquardt(x, y, w, p0)
    j = jacobian(x, *p) * np.sqrt(w)[:, None]
    try:
        cov = np.linalg.inv(j.T @ j)
    except np.linalg.LinAlgError:
        cov = np.full((3, 3), np.inf)
    if not weighted:
        dof = max(x.size - 3, 1)
        cov = cov * chi2 / dof
    sig = np.sqrt(np.clip(np.diag(cov), 0, None))
    residual = float(np.linalg.norm(y - model(x, *p)))

    boot = None
    if bootstrap > 0:
        rng = np.random.default_rng(seed)
        fitted = model(x, *p)
        noise = sigma if weighted else np.full_like(y, residual / math.sqrt(max(x.size - 3, 1)))
        ts = []
        for _ in range(bootstrap):
            yb = fitted + rng.normal(0.0, noise)
            pb, _, _, ok = _levenberg_marquardt(x, yb, w, p)
            if ok:
                ts.append(pb[2])
        boot = float(np.std(ts, ddof=1)) if len(ts) > 1 else None

    if not converged:
        log.warning("exponential fit did not converge in %d iterations", MAX_ITER)
    return FitResult(
        y0=float(p[0]), A0=float(p[1]), t=float(p[2]),
        sigma_y0=float(sig[0]), sigma_A0=float(sig[1]), sigma_t=float(sig[2]),
        residual_norm=residual, converged=bool(converged and p[2] > 0),
        iterations=iterations, bootstrap_sigma_t=boot,
    )
