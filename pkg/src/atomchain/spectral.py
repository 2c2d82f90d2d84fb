"""Single-particle eigenstates in a hard-wall box, expanded in sine waves.

Solves ``-psi'' + V psi = E psi`` on ``[0, L]`` with ``psi(0) = psi(L) = 0``
using the basis ``phi_n(x) = sqrt(2/L) sin(n pi x / L)``, ``n = 1..n_basis``.
Potential matrix elements are computed by composite Gauss-Legendre
quadrature of ``V(x) cos(d pi x / L)``.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import scipy.linalg

from .potentials import DomainError, Grid, PotentialSpec, composite_gauss_legendre, evaluate

__all__ = [
    "SpectralError",
    "InsufficientGridError",
    "SolverSettings",
    "SineBasis",
    "SpectralSolution",
    "default_grid",
    "build_hamiltonian",
    "solve",
    "eval_wavefunction",
    "eval_derivative",
    "wavefunctions",
    "derivatives",
    "write_spectrum_csv",
]

# node-chunk size for on-the-fly trig tables
_CHUNK = 4096
# cache full trig tables up to this many entries (per table)
_CACHE_LIMIT = 16_000_000


class SpectralError(RuntimeError):
    """Eigensolver failure; ``residuals`` holds per-state residual norms."""

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class InsufficientGridError(ValueError):
    pass


@dataclass(frozen=True)
class SolverSettings:
    """Discretization parameters.

    ``n_basis=None`` means ``max(200, 12 N)``. The quadrature uses
    ``panels_per_basis * n_basis`` equal panels of ``order`` Gauss-Legendre
    nodes each, so the panel width is at most ``L / (4 n_basis)`` by default.
    """

    n_basis: Optional[int] = None
    order: int = 16
    panels_per_basis: int = 4

    def basis_size(self, N: int) -> int:
        return self.n_basis if self.n_basis is not None else max(200, 12 * N)

    def doubled(self, N: int) -> "SolverSettings":
        return replace(self, n_basis=2 * self.basis_size(N))

    def as_dict(self, N: Optional[int] = None) -> dict:
        nb = self.n_basis if N is None else self.basis_size(N)
        return {"n_basis": nb, "order": self.order, "panels_per_basis": self.panels_per_basis}


@dataclass(frozen=True)
class SineBasis:
    box_length: float
    n_basis: int

    def __post_init__(self):
        if self.n_basis < 1:
            raise ValueError("n_basis must be >= 1")
        if not self.box_length > 0:
            raise ValueError("box_length must be > 0")

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, self.n_basis + 1)

    @property
    def k(self) -> np.ndarray:
        """Wave numbers ``n pi / L``."""
        return self.n * (math.pi / self.box_length)


@dataclass(frozen=True)
class SpectralSolution:
    """Lowest ``N`` eigenpairs; ``psi_i = sum_n coefficients[i, n] phi_n``."""

    basis: SineBasis
    energies: np.ndarray
    coefficients: np.ndarray
    spec: Optional[PotentialSpec] = None
    grid: Optional[Grid] = field(default=None, repr=False)
    settings: Optional[SolverSettings] = None

    @property
    def N(self) -> int:
        return len(self.energies)

    @property
    def box_length(self) -> float:
        return self.basis.box_length


@functools.lru_cache(maxsize=8)
def _default_grid(box_length: float, n_panels: int, order: int) -> Grid:
    grid = composite_gauss_legendre(box_length, n_panels, order)
    object.__setattr__(grid, "_cache_key", (box_length, n_panels, order))
    return grid


def default_grid(box_length: float, n_basis: int, settings: SolverSettings = SolverSettings()) -> Grid:
    """Composite Gauss-Legendre grid following the settings' panel rule.

    The panel count is even, so ``L/2`` (kink of the bowl potential) is
    always a panel edge.
    """
    n_panels = settings.panels_per_basis * n_basis
    n_panels += n_panels % 2
    return _default_grid(float(box_length), n_panels, settings.order)


@functools.lru_cache(maxsize=4)
def _cached_tables(key, n_max: int):
    grid = _default_grid(*key)
    theta = grid.points * (math.pi / grid.box_length)
    d = np.arange(n_max + 1)[:, None]
    arg = d * theta
    return np.cos(arg), np.sin(arg)


def _trig_chunks(grid: Grid, n_max: int):
    """Yield ``(slice, cos(d theta), sin(d theta))`` for ``d = 0..n_max``."""
    key = getattr(grid, "_cache_key", None)
    n_nodes = len(grid.points)
    if key is not None and (n_max + 1) * n_nodes <= _CACHE_LIMIT:
        cos_t, sin_t = _cached_tables(key, n_max)
        yield slice(0, n_nodes), cos_t, sin_t
        return
    theta = grid.points * (math.pi / grid.box_length)
    d = np.arange(n_max + 1)[:, None]
    for start in range(0, n_nodes, _CHUNK):
        sl = slice(start, min(start + _CHUNK, n_nodes))
        arg = d * theta[sl]
        yield sl, np.cos(arg), np.sin(arg)


def _check_grid(basis: SineBasis, grid: Grid):
    L = basis.box_length
    if not math.isclose(grid.box_length, L):
        raise InsufficientGridError(f"grid box length {grid.box_length} != basis box length {L}")
    pts = np.concatenate([[0.0], grid.points, [L]])
    max_gap = float(np.max(np.diff(pts)))
    needed = L / (8 * basis.n_basis)
    if max_gap > needed * (1 + 1e-12):
        raise InsufficientGridError(
            f"grid too coarse for n_basis={basis.n_basis}: largest gap {max_gap:.4g} exceeds "
            f"{needed:.4g} (8 points per half-period of the highest basis function)"
        )


def build_hamiltonian(basis: SineBasis, spec: PotentialSpec, grid: Grid) -> np.ndarray:
    """Hamiltonian matrix in the sine basis.

    ``H[m, n] = delta_mn (n pi / L)^2 + <phi_m|V|phi_n>`` where the potential
    part is ``g(|m - n|) - g(m + n)`` with
    ``g(d) = (1/L) int V(x) cos(d pi x / L) dx``.
    """
    _check_grid(basis, grid)
    nb = basis.n_basis
    wv = grid.weights * evaluate(spec, grid.points)
    g = np.zeros(2 * nb + 1)
    for sl, cos_t, _ in _trig_chunks(grid, 2 * nb):
        g += cos_t @ wv[sl]
    g /= basis.box_length
    n = basis.n
    H = g[np.abs(n[:, None] - n[None, :])] - g[n[:, None] + n[None, :]]
    H[np.diag_indices(nb)] += basis.k**2
    return H


def _order_degenerate(energies, vectors):
    """Within (near-)degenerate clusters, order by dominant basis index."""
    scale = max(1.0, float(np.max(np.abs(energies))))
    order = np.arange(len(energies))
    i = 0
    while i < len(energies):
        j = i + 1
        while j < len(energies) and energies[j] - energies[j - 1] < 1e-10 * scale:
            j += 1
        if j - i > 1:
            dom = np.argmax(np.abs(vectors[:, i:j]), axis=0)
            order[i:j] = i + np.argsort(dom, kind="stable")
        i = j
    return energies[order], vectors[:, order]


def _fix_signs(coefficients, basis: SineBasis):
    """Make each state start out positive from the left wall.

    For an exact eigenstate this is the same as ``psi'(0) > 0``; testing the
    first lobe instead of the wall slope keeps the choice stable when the
    state is so well confined that ``psi'(0)`` is below round-off.
    """
    L = basis.box_length
    x = np.linspace(0.0, L, 16 * basis.n_basis + 1)[1:-1]
    psi = coefficients @ np.sin(np.outer(basis.n, x * (math.pi / L)))
    peak = np.max(np.abs(psi), axis=1, keepdims=True)
    first = np.argmax(np.abs(psi) > 1e-3 * peak, axis=1)
    signs = np.sign(psi[np.arange(len(psi)), first])
    signs[signs == 0] = 1.0
    return coefficients * signs[:, None]


def solve(basis: SineBasis, spec: PotentialSpec, N: int, grid: Optional[Grid] = None,
          settings: Optional[SolverSettings] = None) -> SpectralSolution:
    """Lowest ``N`` eigenpairs of the box Hamiltonian for ``spec``."""
    if not 1 <= N <= basis.n_basis:
        raise ValueError(f"need 1 <= N <= n_basis, got N={N}, n_basis={basis.n_basis}")
    if not math.isclose(spec.box_length, basis.box_length):
        raise ValueError("spec and basis disagree on the box length")
    settings = settings or SolverSettings(n_basis=basis.n_basis)
    if grid is None:
        grid = default_grid(basis.box_length, basis.n_basis, settings)
    H = build_hamiltonian(basis, spec, grid)
    try:
        E, U = scipy.linalg.eigh(H, subset_by_index=(0, N - 1), check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SpectralError(f"eigensolver failed: {exc}") from exc
    residuals = np.linalg.norm(H @ U - U * E, axis=0)
    tol = 1e-9 * max(1.0, float(np.max(np.abs(np.diag(H)))))
    if np.any(residuals > tol):
        raise SpectralError("eigenpairs did not converge", residuals=residuals)
    E, U = _order_degenerate(E, U)
    C = _fix_signs(np.ascontiguousarray(U.T), basis)
    return SpectralSolution(basis, E, C, spec, grid, settings)


def solve_spec(spec: PotentialSpec, N: int, settings: SolverSettings = SolverSettings()) -> SpectralSolution:
    """Convenience wrapper building the basis and grid from ``settings``."""
    basis = SineBasis(spec.box_length, settings.basis_size(N))
    return solve(basis, spec, N, default_grid(spec.box_length, basis.n_basis, settings), settings)


def _positions(sol: SpectralSolution, x):
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0) or np.any(xa > sol.box_length):
        raise DomainError(f"positions must lie in [0, {sol.box_length}]")
    return xa


def wavefunctions(sol: SpectralSolution, x) -> np.ndarray:
    """All ``psi_i(x)``, shape ``(N, len(x))``."""
    xa = np.atleast_1d(_positions(sol, x))
    b = sol.basis
    return math.sqrt(2.0 / b.box_length) * (sol.coefficients @ np.sin(np.outer(b.k, xa)))


def derivatives(sol: SpectralSolution, x) -> np.ndarray:
    """All ``psi_i'(x)``, shape ``(N, len(x))``."""
    xa = np.atleast_1d(_positions(sol, x))
    b = sol.basis
    return math.sqrt(2.0 / b.box_length) * ((sol.coefficients * b.k) @ np.cos(np.outer(b.k, xa)))


def _state_index(sol, i):
    if not 1 <= i <= sol.N:
        raise IndexError(f"state index must be in 1..{sol.N}, got {i}")
    return i - 1


def eval_wavefunction(sol: SpectralSolution, i: int, x):
    """``psi_i(x)`` for the 1-based state index ``i``."""
    row = _state_index(sol, i)
    out = wavefunctions(sol, x)[row]
    return float(out[0]) if np.ndim(x) == 0 else out


def eval_derivative(sol: SpectralSolution, i: int, x):
    """``psi_i'(x)`` for the 1-based state index ``i``."""
    row = _state_index(sol, i)
    out = derivatives(sol, x)[row]
    return float(out[0]) if np.ndim(x) == 0 else out


def boundary_slopes(sol: SpectralSolution) -> np.ndarray:
    """``psi_i'(L)`` for all states, using ``cos(n pi) = (-1)^n``."""
    b = sol.basis
    sign = np.where(b.n % 2 == 0, 1.0, -1.0)
    return math.sqrt(2.0 / b.box_length) * ((sol.coefficients * b.k) @ sign)


def write_spectrum_csv(sol: SpectralSolution, path, n_samples: int = 0, header=()):
    """Write ``(n, E_n)`` rows, then optionally sampled wavefunctions.

    ``header`` lines are written first, each prefixed with ``#``.
    """
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        w = csv.writer(fh)
        w.writerow(["n", "E"])
        for n, E in enumerate(sol.energies, start=1):
            w.writerow([n, repr(float(E))])
        if n_samples:
            x = np.linspace(0.0, sol.box_length, n_samples)
            psi = wavefunctions(sol, x)
            w.writerow([])
            w.writerow(["x"] + [f"psi_{i}" for i in range(1, sol.N + 1)])
            for j, xv in enumerate(x):
                w.writerow([repr(float(xv))] + [repr(float(v)) for v in psi[:, j]])
