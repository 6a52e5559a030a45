"""
Weighted nonlinear least squares for decay curves.

Two models, both with a free offset::

    gaussian_decay     y = offset + A exp(-t^2 / tau^2)
    exponential_decay  y = offset + A exp(-t / tau)

``tau`` is the 1/e lifetime in either case. The optimizer is MINPACK's
Levenberg-Marquardt (via scipy) with analytic Jacobians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from .curves import DecayCurve
from .errors import DomainError, FitError

MODELS = ("gaussian_decay", "exponential_decay")
MIN_POINTS = 5
_TOL = 1e-14
_MAX_NFEV = 2000


def model_value(model: str, t, amplitude: float, offset: float, tau: float):
    t = np.asarray(t, dtype=float)
    if model == "gaussian_decay":
        return offset + amplitude * np.exp(-(t / tau) ** 2)
    if model == "exponential_decay":
        return offset + amplitude * np.exp(-t / tau)
    raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")


def _jacobian(model: str, t: np.ndarray, p: np.ndarray) -> np.ndarray:
    amplitude, _, tau = p
    if model == "gaussian_decay":
        e = np.exp(-(t / tau) ** 2)
        d_tau = amplitude * e * 2.0 * t ** 2 / tau ** 3
    else:
        e = np.exp(-t / tau)
        d_tau = amplitude * e * t / tau ** 2
    return np.column_stack([e, np.ones_like(t), d_tau])


@dataclass(frozen=True)
class FitResult:
    model: str
    amplitude: float
    offset: float
    tau_1e: float
    covariance: np.ndarray  # order: amplitude, offset, tau
    reduced_chi2: float
    identifiable: bool = True
    n_points: int = 0
    n_evaluations: int = 0

    @property
    def tau_err(self) -> Optional[float]:
        if not self.identifiable:
            return None
        return float(math.sqrt(max(self.covariance[2, 2], 0.0)))

    def value_at(self, t):
        return model_value(self.model, t, self.amplitude, self.offset, self.tau_1e)

    def initial_value(self):
        """Fitted y(0) = offset + amplitude and its standard error."""
        c = self.covariance
        var = c[0, 0] + c[1, 1] + 2.0 * c[0, 1]
        return self.offset + self.amplitude, math.sqrt(max(var, 0.0))

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "amplitude": self.amplitude,
            "offset": self.offset,
            "tau_1e_s": self.tau_1e if self.identifiable else None,
            "tau_err_s": self.tau_err,
            "covariance": self.covariance.tolist(),
            "reduced_chi2": self.reduced_chi2,
            "identifiable": self.identifiable,
            "n_points": self.n_points,
        }


def _weights(sigmas: np.ndarray):
    """Per-point sigma used in the residuals and whether it is absolute.

    Points with sigma = 0 next to points with sigma > 0 (e.g. an exact
    t = 0 normalisation point) get the smallest positive sigma.
    """
    positive = sigmas[sigmas > 0]
    if positive.size == 0:
        return np.ones_like(sigmas), False
    return np.where(sigmas > 0, sigmas, positive.min()), True


def _initial_guess(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    amplitude = float(y.max() - y.min())
    offset = float(y.min())
    target = offset + amplitude / math.e
    tau = float(t[np.argmin(np.abs(y - target))])
    if tau <= 0:
        tau = float(t[-1] - t[0]) / 2.0 or 1.0
    # curves that rise instead of decay
    if y[np.argmin(t)] < y[np.argmax(t)]:
        amplitude, offset = -amplitude, float(y.max())
    return np.array([amplitude, offset, tau])


def _solve(model, t, y, sig, p0):
    def residuals(p):
        return (model_value(model, t, p[0], p[1], p[2]) - y) / sig

    def jac(p):
        return _jacobian(model, t, p) / sig[:, None]

    return least_squares(residuals, p0, jac=jac, method="lm", x_scale="jac",
                         ftol=_TOL, xtol=_TOL, gtol=_TOL, max_nfev=_MAX_NFEV)


def _flat_result(model, y, n):
    cov = np.zeros((3, 3))
    return FitResult(model, 0.0, float(np.mean(y)), math.inf, cov, 0.0,
                     identifiable=False, n_points=n)


def fit_decay(curve: DecayCurve, model: str = "gaussian_decay") -> FitResult:
    """Fit ``model`` to ``curve``; returns parameters, covariance and reduced chi^2.

    Raises FitError with diagnostics when the optimizer does not
    converge after one restart from a 10 % longer lifetime.
    """
    if model not in MODELS:
        raise DomainError(f"unknown model {model!r}; expected one of {MODELS}")
    t, y = np.asarray(curve.times), np.asarray(curve.values)
    n = t.size
    if n < MIN_POINTS:
        raise FitError(f"need at least {MIN_POINTS} samples to fit, got {n}", {"n_points": n})
    if not np.all(np.isfinite(y)):
        raise FitError("curve contains non-finite values")

    scale = max(float(np.max(np.abs(y))), 1e-300)
    if float(np.ptp(y)) <= 1e-12 * scale:
        return _flat_result(model, y, n)

    sig, absolute = _weights(np.asarray(curve.sigmas))
    p0 = _initial_guess(t, y)
    attempts = []
    for start in (p0, p0 * np.array([1.0, 1.0, 1.1])):
        res = _solve(model, t, y, sig, start)
        attempts.append({"status": int(res.status), "message": res.message,
                         "nfev": int(res.nfev), "x": res.x.tolist()})
        if res.success and res.x[2] != 0 and np.all(np.isfinite(res.x)):
            if model == "exponential_decay" and res.x[2] < 0:
                continue
            break
    else:
        raise FitError(f"{model} fit did not converge", {"attempts": attempts})

    amplitude, offset, tau = res.x
    tau = abs(tau)  # gaussian is even in tau
    dof = n - 3
    chi2 = float(np.sum(res.fun ** 2))
    red = chi2 / dof if dof > 0 else math.nan

    J = _jacobian(model, t, np.array([amplitude, offset, tau])) / sig[:, None]
    cov = np.linalg.pinv(J.T @ J)
    if not absolute:
        cov = cov * (red if dof > 0 else 0.0)
    cov = 0.5 * (cov + cov.T)

    identifiable = abs(amplitude) > 1e-9 * scale
    if not identifiable:
        return _flat_result(model, y, n)
    return FitResult(model, float(amplitude), float(offset), float(tau), cov, red,
                     identifiable=True, n_points=n, n_evaluations=int(res.nfev))


def lifetime_with_error(fit: FitResult):
    """(tau, sigma_tau) in seconds, or None when the lifetime is unidentifiable."""
    if not fit.identifiable:
        return None
    return fit.tau_1e, fit.tau_err


def format_lifetime(tau: float, sigma: Optional[float]) -> str:
    """Compact value(uncertainty) notation, e.g. ``123(1) μs`` or ``1.83(1) ms``."""
    if tau < 1e-3:
        unit, factor = "μs", 1e6
    else:
        unit, factor = "ms", 1e3
    value = tau * factor
    if not sigma:
        return f"{value:.3g} {unit}"
    err = sigma * factor
    decimals = max(0, -int(math.floor(math.log10(err))))
    digit = round(err * 10 ** decimals)
    if digit >= 10:  # e.g. 0.96 rounds to 1.0
        decimals = max(0, decimals - 1)
        digit = round(err * 10 ** decimals)
    return f"{value:.{decimals}f}({digit}) {unit}"


def log_log_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx, ly = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])
