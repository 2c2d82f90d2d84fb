"""Power-law fit of ``alpha_k`` and calibration of the bowl exponent ``tau``."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.optimize

from .geomcoeff import GeometricCoefficients, geometric_coefficients
from .potentials import power_bowl_spec
from .spectral import SolverSettings

__all__ = [
    "BracketError",
    "PowerLawFit",
    "TauCalibration",
    "fit_power_law",
    "beta_of_tau",
    "optimize_tau",
    "DEFAULT_BRACKET",
]

DEFAULT_BRACKET = (2.5, 4.5)


class BracketError(ValueError):
    def __init__(self, msg, beta_lo=None, beta_hi=None):
        super().__init__(msg)
        self.beta_lo = beta_lo
        self.beta_hi = beta_hi


@dataclass(frozen=True)
class PowerLawFit:
    """``alpha_k ~ A [k (N - k)]^beta`` with goodness ``f = |residuals| / n``."""

    A: float
    beta: float
    f: float


@dataclass(frozen=True)
class TauCalibration:
    N: int
    tau: float
    alpha: Optional[GeometricCoefficients]
    fit: Optional[PowerLawFit]
    iterations: int


def fit_power_law(alpha) -> PowerLawFit:
    """Least-squares fit in linear ``alpha`` space, started from a log-log line."""
    a = alpha.alpha if isinstance(alpha, GeometricCoefficients) else np.asarray(alpha, dtype=float)
    N = len(a) + 1
    if N < 3:
        raise ValueError("need N >= 3 (two coefficients) for a power-law fit")
    if np.any(a <= 0):
        raise ValueError("power-law fit needs strictly positive coefficients")
    k = np.arange(1, N)
    s = k * (N - k)
    logs = np.log(s)
    if np.ptp(logs) == 0:
        raise ValueError("power-law exponent undetermined for N=3 (all k(N-k) equal)")
    beta0, logA0 = np.polyfit(logs, np.log(a), 1)

    def resid(p):
        return p[0] * s ** p[1] - a

    def jac(p):
        sb = s ** p[1]
        return np.column_stack([sb, p[0] * sb * logs])

    res = scipy.optimize.least_squares(resid, [math.exp(logA0), beta0], jac=jac, method="lm",
                                       xtol=1e-15, ftol=1e-15, gtol=1e-15)
    A, beta = res.x
    f = math.sqrt(float(np.sum(res.fun**2))) / len(a)
    return PowerLawFit(float(A), float(beta), f)


def beta_of_tau(N: int, tau: float, settings: SolverSettings = SolverSettings(),
                check: bool = False):
    """Fitted exponent for the bowl potential ``100 eps |(L/2-x)/(L/2)|^tau`` on ``L = 100``."""
    if not tau > 0:
        raise ValueError("tau must be > 0")
    coeffs = geometric_coefficients(power_bowl_spec(tau), N, settings, check=check)
    fit = fit_power_law(coeffs)
    return fit.beta, fit, coeffs


def optimize_tau(N: int, bracket=DEFAULT_BRACKET, tol: float = 1e-4,
                 settings: SolverSettings = SolverSettings(),
                 beta_fn: Optional[Callable[[float], float]] = None) -> TauCalibration:
    """Root of ``beta(tau) = 1/2`` by Brent's method.

    ``beta_fn`` replaces the full pipeline (useful for tests); it maps ``tau``
    to the fitted exponent.
    """
    cache = {}

    def beta(tau):
        if tau not in cache:
            cache[tau] = beta_fn(tau) if beta_fn else beta_of_tau(N, tau, settings)
        return cache[tau] if beta_fn else cache[tau][0]

    lo, hi = bracket
    b_lo, b_hi = beta(lo) - 0.5, beta(hi) - 0.5
    if b_lo * b_hi > 0:
        raise BracketError(
            f"bracket ({lo}, {hi}) does not straddle beta = 1/2: "
            f"beta({lo}) = {b_lo + 0.5:.6f}, beta({hi}) = {b_hi + 0.5:.6f}",
            b_lo + 0.5, b_hi + 0.5,
        )
    tau, info = scipy.optimize.brentq(lambda t: beta(t) - 0.5, lo, hi, xtol=1e-9, rtol=1e-12,
                                      full_output=True)
    b = beta(tau)
    final = cache[tau]
    if abs(b - 0.5) > tol:
        raise ArithmeticError(f"root finder stopped at beta = {b:.8f}, outside tolerance {tol:g}")
    if beta_fn:
        return TauCalibration(N, float(tau), None, None, info.iterations)
    _, fit, coeffs = final
    return TauCalibration(N, float(tau), coeffs, fit, info.iterations)
