"""Robustness of calibrated chains against potential noise and tilt.

Each noise realization gets its own random stream derived from
``(master_seed, V0 index, realization index)``, so results do not depend on
execution order or on the number of worker processes.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geomcoeff import geometric_coefficients
from .potentials import GOLDEN_XI, QuasiPeriodicNoise, Tilt, power_bowl_spec, sample_noise_phases
from .spectral import SolverSettings
from .spinchain import find_t_out, fidelity, from_alpha

__all__ = [
    "NoiseSweepConfig",
    "NoiseRow",
    "EnsembleStats",
    "SlopeFit",
    "TiltPoint",
    "realization_rng",
    "run_noise_sweep",
    "fit_delta_alpha_slope",
    "run_tilt_sweep",
    "write_noise_csv",
    "write_delta_alpha_csv",
    "write_tilt_csv",
]

NOISE_V0_GRID = tuple(round(0.01 * i, 2) for i in range(1, 11))


@dataclass(frozen=True)
class NoiseSweepConfig:
    N: int
    tau: float
    V0_grid: tuple
    M: int = 200
    master_seed: int = 0
    settings: SolverSettings = SolverSettings()
    xi: float = GOLDEN_XI

    def __post_init__(self):
        object.__setattr__(self, "V0_grid", tuple(float(v) for v in self.V0_grid))
        if any(v < 0 for v in self.V0_grid):
            raise ValueError("noise strengths must be >= 0")
        if self.M < 1:
            raise ValueError("need M >= 1 realizations")


@dataclass
class NoiseRow:
    """Statistics over the realizations at one noise strength.

    ``F_out`` is the fidelity at each realization's own retrieval time;
    ``F_fixed`` is evaluated at the noiseless retrieval time.
    ``delta_alpha[r, k-1] = alpha_k - alpha_k^phi``.
    """

    V0: float
    F_out: np.ndarray
    F_fixed: np.ndarray
    delta_alpha: np.ndarray
    phases: np.ndarray
    n_failed: int = 0
    failures: list = field(default_factory=list)

    @property
    def n_ok(self) -> int:
        return len(self.F_out)

    @property
    def mean_F(self) -> float:
        return float(np.mean(self.F_out))

    @property
    def std_F(self) -> float:
        return float(np.std(self.F_out, ddof=1)) if self.n_ok > 1 else 0.0

    @property
    def sem_F(self) -> float:
        return self.std_F / math.sqrt(self.n_ok)

    @property
    def mean_F_fixed(self) -> float:
        return float(np.mean(self.F_fixed))

    @property
    def std_F_fixed(self) -> float:
        return float(np.std(self.F_fixed, ddof=1)) if self.n_ok > 1 else 0.0

    @property
    def mean_delta_alpha(self) -> np.ndarray:
        return self.delta_alpha.mean(axis=0)

    @property
    def std_delta_alpha(self) -> np.ndarray:
        if self.n_ok < 2:
            return np.zeros(self.delta_alpha.shape[1])
        return self.delta_alpha.std(axis=0, ddof=1)


@dataclass
class EnsembleStats:
    config: NoiseSweepConfig
    alpha0: np.ndarray
    t_out0: float
    F0: float
    rows: list

    def row(self, V0: float) -> NoiseRow:
        for r in self.rows:
            if math.isclose(r.V0, V0, rel_tol=0, abs_tol=1e-12):
                return r
        raise KeyError(V0)

    def report(self) -> dict:
        cfg = self.config
        return {
            "N": cfg.N, "tau": cfg.tau, "M": cfg.M, "master_seed": cfg.master_seed,
            "xi": cfg.xi, "settings": cfg.settings.as_dict(cfg.N),
            "noiseless": {"F_t_out": self.F0, "t_out": self.t_out0,
                          "alpha": [float(a) for a in self.alpha0]},
            "rows": [
                {"V0": r.V0, "mean_F": r.mean_F, "std_F": r.std_F, "sem_F": r.sem_F,
                 "mean_F_fixed_t_out": r.mean_F_fixed, "std_F_fixed_t_out": r.std_F_fixed,
                 "mean_delta_alpha": r.mean_delta_alpha.tolist(),
                 "std_delta_alpha": r.std_delta_alpha.tolist(),
                 "n_ok": r.n_ok, "n_failed": r.n_failed, "failures": r.failures}
                for r in self.rows
            ],
        }


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    slope_uncertainty: float


@dataclass(frozen=True)
class TiltPoint:
    V0: float
    F_t_out: float
    t_out: float
    F_t0: float


def realization_rng(master_seed: int, v0_index: int, realization: int) -> np.random.Generator:
    seq = np.random.SeedSequence(master_seed, spawn_key=(v0_index, realization))
    return np.random.default_rng(seq)


def _realization(task):
    cfg, iv, r, t_out0 = task
    V0 = cfg.V0_grid[iv]
    phi1, phi2 = sample_noise_phases(realization_rng(cfg.master_seed, iv, r))
    spec = power_bowl_spec(cfg.tau).with_terms(QuasiPeriodicNoise(V0, phi1, phi2, cfg.xi))
    try:
        coeffs = geometric_coefficients(spec, cfg.N, cfg.settings, check=False)
        model = from_alpha(coeffs)
        summary = find_t_out(model)
    except (ArithmeticError, RuntimeError, ValueError, np.linalg.LinAlgError) as exc:
        return iv, r, (phi1, phi2), None, f"{type(exc).__name__}: {exc}"
    return iv, r, (phi1, phi2), (coeffs.alpha, summary.F_t_out, fidelity(model, t_out0)), None


def _map(fn, tasks, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks, chunksize=4))
    return [fn(t) for t in tasks]


def _noiseless(N, tau, settings):
    coeffs = geometric_coefficients(power_bowl_spec(tau), N, settings, check=False)
    return coeffs.alpha, find_t_out(from_alpha(coeffs))


def run_noise_sweep(cfg: NoiseSweepConfig, workers: int = 1) -> EnsembleStats:
    """Monte-Carlo sweep over quasi-periodic noise strengths.

    Failed realizations are excluded from the statistics and listed in
    ``NoiseRow.failures``.
    """
    alpha0, base = _noiseless(cfg.N, cfg.tau, cfg.settings)
    tasks = [(cfg, iv, r, base.t_out) for iv in range(len(cfg.V0_grid)) for r in range(cfg.M)]
    results = _map(_realization, tasks, workers)
    rows = []
    for iv, V0 in enumerate(cfg.V0_grid):
        mine = [res for res in results if res[0] == iv]
        ok = [res for res in mine if res[3] is not None]
        failures = [{"realization": res[1], "phases": list(res[2]), "error": res[4]}
                    for res in mine if res[3] is None]
        n_k = cfg.N - 1
        rows.append(NoiseRow(
            V0=V0,
            F_out=np.array([res[3][1] for res in ok]),
            F_fixed=np.array([res[3][2] for res in ok]),
            delta_alpha=np.array([alpha0 - res[3][0] for res in ok]).reshape(len(ok), n_k),
            phases=np.array([res[2] for res in ok]).reshape(len(ok), 2),
            n_failed=len(failures),
            failures=failures,
        ))
    return EnsembleStats(cfg, alpha0, base.t_out, base.F_t_out, rows)


def fit_delta_alpha_slope(stats) -> SlopeFit:
    """Line through the origin of ``mean_k std_phi(delta alpha_k)`` against ``V0``.

    Accepts :class:`EnsembleStats` or an iterable of ``(V0, y)`` pairs.
    """
    if isinstance(stats, EnsembleStats):
        pts = [(r.V0, float(np.mean(r.std_delta_alpha))) for r in stats.rows if r.V0 > 0 and r.n_ok > 1]
    else:
        pts = [(float(v), float(y)) for v, y in stats if v > 0]
    if len(pts) < 3:
        raise ValueError("slope fit needs at least 3 nonzero noise strengths")
    v, y = np.array(pts).T
    svv = float(np.dot(v, v))
    slope = float(np.dot(v, y)) / svv
    resid = y - slope * v
    unc = math.sqrt(float(np.dot(resid, resid)) / (len(v) - 1) / svv)
    if not slope > 0:
        raise ValueError(f"degenerate data: slope {slope} is not positive")
    return SlopeFit(slope, unc)


def run_tilt_sweep(N: int, tau: float, V0_grid: Sequence[float],
                   settings: SolverSettings = SolverSettings(), workers: int = 1) -> list:
    """Retrieval fidelity with a linear tilt added to the calibrated bowl."""
    tasks = [(N, tau, float(V0), settings) for V0 in V0_grid]
    return _map(_tilt_point, tasks, workers)


def _tilt_point(task):
    N, tau, V0, settings = task
    spec = power_bowl_spec(tau)
    if V0 != 0.0:
        spec = spec.with_terms(Tilt(V0))
    coeffs = geometric_coefficients(spec, N, settings, check=False)
    s = find_t_out(from_alpha(coeffs))
    return TiltPoint(V0, s.F_t_out, s.t_out, s.F_t0)


def _header(fh, header):
    for line in header:
        fh.write(f"# {line}\n")


def write_noise_csv(stats: EnsembleStats, path, header=()):
    with open(path, "w", newline="") as fh:
        _header(fh, header)
        w = csv.writer(fh)
        w.writerow(["V0", "mean_F", "std_F", "sem_F", "mean_F_fixed_t_out", "std_F_fixed_t_out",
                    "n_ok", "n_failed"])
        for r in stats.rows:
            w.writerow([r.V0, repr(r.mean_F), repr(r.std_F), repr(r.sem_F), repr(r.mean_F_fixed),
                        repr(r.std_F_fixed), r.n_ok, r.n_failed])


def write_delta_alpha_csv(stats: EnsembleStats, path, header=()):
    with open(path, "w", newline="") as fh:
        _header(fh, header)
        w = csv.writer(fh)
        w.writerow(["V0", "k", "mean_delta_alpha", "std_delta_alpha"])
        for r in stats.rows:
            for k, (m, s) in enumerate(zip(r.mean_delta_alpha, r.std_delta_alpha), start=1):
                w.writerow([r.V0, k, repr(float(m)), repr(float(s))])


def write_tilt_csv(points, path, header=()):
    with open(path, "w", newline="") as fh:
        _header(fh, header)
        w = csv.writer(fh)
        w.writerow(["V0", "F_t_out", "t_out", "F_t0"])
        for p in points:
            w.writerow([p.V0, repr(p.F_t_out), repr(p.t_out), repr(p.F_t0)])
