"""XX/XXZ spin chain built from geometric coefficients, single-excitation dynamics.

Times are in ``hbar / eps`` (``hbar = 1``), couplings in ``eps``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.optimize

from .geomcoeff import GeometricCoefficients

__all__ = [
    "SpinChainModel",
    "FidelityCurve",
    "TransferSummary",
    "from_alpha",
    "semicircle_couplings",
    "single_excitation_hamiltonian",
    "amplitudes",
    "fidelity",
    "fidelity_curve",
    "optimal_time",
    "find_t_out",
    "write_curve_csv",
]


@dataclass(frozen=True, eq=False)
class SpinChainModel:
    """Couplings ``J[k-1] = J_k`` for bonds ``k = 1..N-1`` and anisotropy ``Delta``."""

    J: np.ndarray
    Delta: float = 0.0
    g: float = 1.0
    kappa: float = 2.0

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        if J.ndim != 1 or len(J) < 1:
            raise ValueError("need at least one coupling")
        object.__setattr__(self, "J", J)

    @property
    def N(self) -> int:
        return len(self.J) + 1

    @cached_property
    def _eig(self):
        return np.linalg.eigh(single_excitation_hamiltonian(self))


@dataclass(frozen=True)
class FidelityCurve:
    times: np.ndarray
    F: np.ndarray
    total_probability: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class TransferSummary:
    t0: float
    t_out: float
    F_t0: float
    F_t_out: float

    def to_dict(self) -> dict:
        return {"t0": self.t0, "t_out": self.t_out, "F_t0": self.F_t0, "F_t_out": self.F_t_out,
                "t_out_over_t0": self.t_out / self.t0}


def from_alpha(alpha, g: float = 1.0, kappa: float = 2.0) -> SpinChainModel:
    """``J_k = -alpha_k / g`` and ``Delta = 1 - 2 / kappa``."""
    if not g > 0:
        raise ValueError(f"g must be > 0, got {g}")
    if not kappa > 0:
        raise ValueError(f"kappa must be > 0, got {kappa}")
    a = alpha.alpha if isinstance(alpha, GeometricCoefficients) else np.asarray(alpha, dtype=float)
    return SpinChainModel(-a / g, 1.0 - 2.0 / kappa, g, kappa)


def semicircle_couplings(N: int, lam: float = 1.0) -> SpinChainModel:
    """Perfect-transfer profile ``J_k = -lam sqrt(k (N - k))`` with ``Delta = 0``."""
    if N < 2:
        raise ValueError("need N >= 2")
    if not lam > 0:
        raise ValueError("lam must be > 0")
    k = np.arange(1, N)
    return SpinChainModel(-lam * np.sqrt(k * (N - k)), 0.0)


def single_excitation_hamiltonian(model: SpinChainModel) -> np.ndarray:
    """Chain Hamiltonian restricted to states with one up spin.

    Basis ``|m>`` has the up spin on site ``m``. Hopping is ``-J_m``; the
    diagonal is ``-(Delta/2) sum_k J_k s_k(m)`` where ``s_k(m) = -1`` on the
    (at most two) bonds touching site ``m`` and ``+1`` elsewhere.
    """
    J = model.J
    N = model.N
    H = np.diag(-J, 1) + np.diag(-J, -1)
    if model.Delta != 0.0:
        total = J.sum()
        touching = np.zeros(N)
        touching[:-1] += J
        touching[1:] += J
        H[np.diag_indices(N)] = -0.5 * model.Delta * (total - 2.0 * touching)
    return H


def amplitudes(model: SpinChainModel, t) -> np.ndarray:
    """``<m| exp(-i H t) |1>`` for all sites ``m``; shape ``(N,)`` or ``(len(t), N)``."""
    E, U = model._eig
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise ValueError("times must be >= 0")
    phases = np.exp(-1j * np.outer(tt, E))
    amp = (phases * U[0]) @ U.T
    return amp[0] if np.ndim(t) == 0 else amp


def fidelity(model: SpinChainModel, t):
    """Transfer probability ``|<N| exp(-i H t) |1>|^2``."""
    E, U = model._eig
    tt = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(tt < 0):
        raise ValueError("times must be >= 0")
    amp = np.exp(-1j * np.outer(tt, E)) @ (U[0] * U[-1])
    F = np.abs(amp) ** 2
    return float(F[0]) if np.ndim(t) == 0 else F


def fidelity_curve(model: SpinChainModel, times) -> FidelityCurve:
    amp = amplitudes(model, np.asarray(times, dtype=float))
    prob = np.abs(amp) ** 2
    return FidelityCurve(np.asarray(times, dtype=float), prob[:, -1], prob.sum(axis=1))


def optimal_time(model: SpinChainModel) -> float:
    """``t0 = pi sqrt(N - 1) / (2 |J_1|)``."""
    J1 = abs(float(model.J[0]))
    if J1 == 0.0:
        raise ZeroDivisionError("J_1 = 0: no transfer time defined")
    return math.pi * math.sqrt(model.N - 1) / (2.0 * J1)


def find_t_out(model: SpinChainModel, window=(0.5, 1.1), n_scan: int = 2000,
               rtol: float = 1e-6) -> TransferSummary:
    """Locate the fidelity maximum near ``t0``.

    Scans ``[0.5 t0, 1.1 t0]`` on ``n_scan`` uniform points (first maximum
    wins ties) and polishes the best bracket by golden-section search.
    """
    t0 = optimal_time(model)
    ts = np.linspace(window[0] * t0, window[1] * t0, n_scan)
    Fs = fidelity(model, ts)
    i = int(np.argmax(Fs))
    best_t, best_F = float(ts[i]), float(Fs[i])
    if 0 < i < n_scan - 1:
        xtol = rtol * t0
        res = scipy.optimize.minimize_scalar(
            lambda t: -fidelity(model, t), bracket=(ts[i - 1], ts[i], ts[i + 1]),
            method="golden", options={"xtol": xtol / ts[i]},
        )
        if -res.fun > best_F and ts[i - 1] <= res.x <= ts[i + 1]:
            best_t, best_F = float(res.x), float(-res.fun)
    F0 = fidelity(model, t0)
    if F0 > best_F:
        best_t, best_F = t0, F0
    return TransferSummary(t0, best_t, F0, best_F)


def write_curve_csv(curve: FidelityCurve, path, header=()):
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["t", "F", "total_probability"])
        tot = curve.total_probability if curve.total_probability is not None else [""] * len(curve.F)
        for t, F, p in zip(curve.times, curve.F, tot):
            w.writerow([repr(float(t)), repr(float(F)), repr(float(p)) if p != "" else ""])
