"""Geometric exchange coefficients ``alpha_k`` of the effective spin chain.

The production route evaluates

    alpha_k = sum_i psi_i'(L)^2
              + 2 sum_{i,j} sum_{l=0}^{N-1-k} (-1)^{i+j+N-k} C(N-l-2, k-1)
                int_0^L (V - E_i) psi_i psi_j' [lambda^l] det[(B(x) - lambda I)^{(ij)}] dx

where ``B(x)_{mn} = int_0^x psi_m psi_n`` and ``(.)^{(ij)}`` drops column
``i`` and row ``j``. Since ``det[(B - lambda I)^{(ij)}] = (-1)^{i+j}
adj(B - lambda I)_{ij}``, all ``(i, j)`` minors come from one adjugate
polynomial per quadrature node.

:func:`brute_force_alpha` integrates the Slater-determinant definition
directly over the ordered region and is only meant as a cross-check for
``N <= 4``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from math import comb, factorial
from typing import Optional

import numpy as np

from . import __version__
from .potentials import DomainError, Grid, PotentialSpec, evaluate
from .spectral import (
    SineBasis,
    SolverSettings,
    SpectralSolution,
    _trig_chunks,
    boundary_slopes,
    default_grid,
    derivatives,
    solve,
    wavefunctions,
)

__all__ = [
    "ConvergenceError",
    "OverlapMatrix",
    "GeometricCoefficients",
    "overlap_matrix",
    "charpoly_coeffs",
    "adjugate_coeffs",
    "minor",
    "minor_lambda_coeffs",
    "compute_alpha",
    "geometric_coefficients",
    "brute_force_alpha",
    "write_alpha_csv",
]

MAX_CHARPOLY_N = 64


class ConvergenceError(RuntimeError):
    def __init__(self, msg, changes=None):
        super().__init__(msg)
        self.changes = changes


@dataclass(frozen=True)
class OverlapMatrix:
    x: float
    B: np.ndarray


@dataclass(frozen=True)
class GeometricCoefficients:
    """``alpha[k-1]`` holds ``alpha_k`` for ``k = 1..N-1`` (units ell^-3)."""

    N: int
    alpha: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __getitem__(self, k):
        if not 1 <= k <= self.N - 1:
            raise IndexError(f"k must be in 1..{self.N - 1}")
        return float(self.alpha[k - 1])

    def to_dict(self) -> dict:
        return {"N": self.N, "alpha": [float(a) for a in self.alpha], "provenance": self.provenance}


# -- overlap matrix --------------------------------------------------------


def _sine_products(L, p, q, x):
    """``int_0^x phi_p phi_q dy`` for 1-based index arrays ``p, q``."""
    theta = math.pi * x / L
    d = p - q
    s = p + q
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.where(d == 0, theta, np.sin(d * theta) / np.where(d == 0, 1, d))
    return (diff - np.sin(s * theta) / s) / math.pi


def overlap_matrix(sol: SpectralSolution, x: float) -> OverlapMatrix:
    """``B(x)`` in closed form from the sine-basis coefficients."""
    L = sol.box_length
    if not 0.0 <= x <= L:
        raise DomainError(f"x must lie in [0, {L}], got {x}")
    n = sol.basis.n
    S = _sine_products(L, n[:, None], n[None, :], float(x))
    C = sol.coefficients
    B = C @ S @ C.T
    return OverlapMatrix(float(x), 0.5 * (B + B.T))


def _overlap_series(C: np.ndarray) -> np.ndarray:
    """Trig-series tensor ``K`` with ``B(x) = (1/pi) sum_d K[d] s_d(theta)``.

    ``s_0 = theta``, ``s_d = sin(d theta)/d`` and ``theta = pi x / L``.
    """
    N, nb = C.shape
    K = np.zeros((2 * nb + 1, N, N))
    for d in range(nb):
        T = C[:, d:] @ C[:, : nb - d].T
        K[d] += T if d == 0 else T + T.T
    for d in range(2, 2 * nb + 1):
        lo, hi = max(1, d - nb), min(nb, d - 1)
        p = np.arange(lo, hi + 1)
        K[d] -= C[:, p - 1] @ C[:, d - p - 1].T
    return K


# -- characteristic polynomials --------------------------------------------


def _faddeev_leverrier(A: np.ndarray):
    """Batched Faddeev-LeVerrier on ``(..., n, n)``.

    Returns ``(a, Ms)`` with ``det(lambda I - A) = sum_k a[..., k] lambda^k``
    and ``adj(lambda I - A) = sum_{k=1}^n Ms[k-1] lambda^(n-k)``. The matrix
    is rescaled to unit max-norm first and the scale restored afterwards.
    """
    A = np.asarray(A, dtype=float)
    n = A.shape[-1]
    if n > MAX_CHARPOLY_N:
        raise OverflowError(f"characteristic polynomial limited to n <= {MAX_CHARPOLY_N}, got {n}")
    batch = A.shape[:-2]
    s = np.max(np.abs(A), axis=(-2, -1))
    s = np.where(s > 0, s, 1.0)
    As = A / s[..., None, None]
    eye = np.broadcast_to(np.eye(n), batch + (n, n))
    a = np.zeros(batch + (n + 1,))
    a[..., n] = 1.0
    Ms = np.zeros((n,) + batch + (n, n))
    M = np.zeros(batch + (n, n))
    for k in range(1, n + 1):
        M = As @ M + a[..., n - k + 1, None, None] * eye
        Ms[k - 1] = M
        a[..., n - k] = -np.trace(As @ M, axis1=-2, axis2=-1) / k
    powers = np.arange(n + 1)
    a = a * s[..., None] ** (n - powers)
    Ms = Ms * (s[None, ..., None, None] ** np.arange(n).reshape((n,) + (1,) * (len(batch) + 2)))
    return a, Ms


def charpoly_coeffs(M) -> np.ndarray:
    """Coefficients ``c[0..n]`` of ``det(M - lambda I) = sum_l c[l] lambda^l``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("charpoly_coeffs needs a square matrix")
    n = M.shape[0]
    if n == 0:
        return np.array([1.0])
    a, _ = _faddeev_leverrier(M)
    c = (-1) ** n * a
    c[n] = (-1.0) ** n
    return c


def adjugate_coeffs(M) -> np.ndarray:
    """``A[l]`` with ``adj(M - lambda I) = sum_l A[l] lambda^l`` (``l < n``)."""
    M = np.asarray(M, dtype=float)
    n = M.shape[-1]
    _, Ms = _faddeev_leverrier(M)
    # adj(M - lambda I) = (-1)^(n-1) adj(lambda I - M); lambda^l <- Ms[n-l-1]
    return (-1.0) ** (n - 1) * Ms[::-1]


def minor(M, i: int, j: int) -> np.ndarray:
    """Drop column ``i`` and row ``j`` (1-based); no sign factor."""
    M = np.asarray(M)
    n = M.shape[0]
    if M.ndim != 2 or M.shape[1] != n:
        raise ValueError("minor needs a square matrix")
    if not (1 <= i <= n and 1 <= j <= n):
        raise IndexError(f"indices must be in 1..{n}, got i={i}, j={j}")
    return np.delete(np.delete(M, i - 1, axis=1), j - 1, axis=0)


def minor_lambda_coeffs(M, i: int, j: int) -> np.ndarray:
    """Coefficients of ``det[(M - lambda I)^{(ij)}]`` in powers of ``lambda``.

    Note this is not ``charpoly_coeffs(minor(M, i, j))`` when ``i != j``:
    deleting a row and a different column moves some ``lambda`` entries off
    the diagonal of the minor.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    minor(M, i, j)  # index validation
    A = adjugate_coeffs(M)
    return (-1.0) ** (i + j) * A[:, i - 1, j - 1]


def _leave_one_out_coeffs(mu: np.ndarray) -> np.ndarray:
    """``e[..., n, l]``: coefficient of ``lambda^l`` in ``prod_{m != n} (mu_m - lambda)``."""
    *batch, N = mu.shape
    out = np.zeros(tuple(batch) + (N, N))
    for n in range(N):
        p = np.zeros(tuple(batch) + (N,))
        p[..., 0] = 1.0
        for m in range(N):
            if m == n:
                continue
            shifted = np.zeros_like(p)
            shifted[..., 1:] = p[..., :-1]
            p = p * mu[..., m : m + 1] - shifted
        out[..., n, :] = p
    return out


# -- alpha -----------------------------------------------------------------


def _node_fields(sol: SpectralSolution, spec: PotentialSpec, grid: Grid):
    """``psi``, ``psi'`` and ``(V - E_i) psi_i`` at the grid nodes."""
    b = sol.basis
    nb = b.n_basis
    pref = math.sqrt(2.0 / b.box_length)
    C = sol.coefficients
    Ck = C * b.k
    psi = np.empty((sol.N, len(grid)))
    dpsi = np.empty_like(psi)
    for sl, cos_t, sin_t in _trig_chunks(grid, nb):
        psi[:, sl] = pref * (C @ sin_t[1 : nb + 1])
        dpsi[:, sl] = pref * (Ck @ cos_t[1 : nb + 1])
    V = evaluate(spec, grid.points)
    u = (V[None, :] - sol.energies[:, None]) * psi
    return psi, dpsi, u


def _lambda_moments(sol, grid, u, dpsi, method: str, cutoff: float = 1e-20):
    """``G[l] = int u^T A_l(x) psi' dx`` with ``A_l`` the adjugate coefficients."""
    N = sol.N
    nb = sol.basis.n_basis
    K = _overlap_series(sol.coefficients).reshape(2 * nb + 1, N * N) / math.pi
    d = np.arange(1, 2 * nb + 1)[:, None]
    weight = np.max(np.abs(u), axis=0) * np.max(np.abs(dpsi), axis=0)
    keep = weight > cutoff * weight.max()
    theta = grid.points * (math.pi / grid.box_length)
    G = np.zeros(N)
    for sl, _, sin_t in _trig_chunks(grid, 2 * nb):
        mask = keep[sl]
        if not mask.any():
            continue
        idx = np.arange(sl.start, sl.stop)[mask]
        s = np.empty((2 * nb + 1, len(idx)))
        s[0] = theta[idx]
        s[1:] = sin_t[1:, mask] / d
        B = (K.T @ s).T.reshape(len(idx), N, N)
        B = 0.5 * (B + np.swapaxes(B, 1, 2))
        uw = u[:, idx].T * grid.weights[idx, None]
        dw = dpsi[:, idx].T
        if method == "eigen":
            mu, Q = np.linalg.eigh(B)
            a = np.einsum("xi,xin->xn", uw, Q)
            b = np.einsum("xj,xjn->xn", dw, Q)
            e = _leave_one_out_coeffs(mu)
            G += np.einsum("xn,xnl->l", a * b, e)[:N]
        elif method == "faddeev-leverrier":
            A = adjugate_coeffs(B)  # (l, x, i, j)
            G += np.einsum("xi,lxij,xj->l", uw, A, dw)
        else:
            raise ValueError(f"unknown method {method!r}")
    return G


def _assemble(N: int, boundary: float, G: np.ndarray) -> np.ndarray:
    alpha = np.empty(N - 1)
    for k in range(1, N):
        s = sum(comb(N - l - 2, k - 1) * G[l] for l in range(N - k))
        alpha[k - 1] = boundary + 2.0 * (-1) ** (N - k) * s
    return alpha


def compute_alpha(sol: SpectralSolution, spec: Optional[PotentialSpec] = None,
                  grid: Optional[Grid] = None, method: str = "eigen") -> GeometricCoefficients:
    """All ``alpha_k`` for the ``N`` states in ``sol``.

    ``method`` selects how the adjugate polynomial of ``B(x) - lambda I`` is
    expanded: ``"eigen"`` (leave-one-out products of the eigenvalues of the
    symmetric ``B``) or ``"faddeev-leverrier"``.
    """
    spec = spec if spec is not None else sol.spec
    grid = grid if grid is not None else sol.grid
    if spec is None or grid is None:
        raise ValueError("compute_alpha needs the potential spec and quadrature grid")
    N = sol.N
    if N < 2:
        raise ValueError("need N >= 2 particles for a chain")
    _, dpsi, u = _node_fields(sol, spec, grid)
    G = _lambda_moments(sol, grid, u, dpsi, method)
    boundary = float(np.sum(boundary_slopes(sol) ** 2))
    alpha = _assemble(N, boundary, G)
    prov = {
        "spec_hash": spec.digest(),
        "n_basis": sol.basis.n_basis,
        "grid": {"rule": grid.rule, "nodes": len(grid)},
        "method": method,
        "version": __version__,
    }
    return GeometricCoefficients(N, alpha, prov)


def _alpha_at(spec, N, settings, method):
    basis = SineBasis(spec.box_length, settings.basis_size(N))
    grid = default_grid(spec.box_length, basis.n_basis, settings)
    sol = solve(basis, spec, N, grid, settings)
    return compute_alpha(sol, spec, grid, method)


def geometric_coefficients(spec: PotentialSpec, N: int, settings: SolverSettings = SolverSettings(),
                           check: bool = True, rtol: float = 1e-6,
                           method: str = "eigen") -> GeometricCoefficients:
    """Solve and compute ``alpha`` for ``spec``, optionally with a doubling check.

    With ``check=True`` the result at ``settings`` is compared against doubled
    ``n_basis`` (and hence doubled grid density). If the largest relative
    change exceeds ``rtol`` both are doubled once more; if that still fails a
    :class:`ConvergenceError` is raised.
    """
    coarse = _alpha_at(spec, N, settings, method)
    if not check:
        return coarse
    current = settings
    result = coarse
    for attempt in range(2):
        finer_settings = current.doubled(N)
        finer = _alpha_at(spec, N, finer_settings, method)
        change = float(np.max(np.abs(finer.alpha - result.alpha) / np.abs(finer.alpha)))
        if change < rtol:
            prov = dict(result.provenance, convergence={"max_rel_change": change,
                                                        "checked_n_basis": finer_settings.basis_size(N)})
            return GeometricCoefficients(N, result.alpha, prov)
        current, result = finer_settings, finer
    raise ConvergenceError(
        f"alpha not converged: max relative change {change:.3g} > {rtol:g} after escalation",
        changes=change,
    )


# -- brute-force oracle ----------------------------------------------------


def _gl_nodes(a, b, n_panels, order):
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    return (half * xg + 0.5 * (lo + hi)).ravel(), (half * wg).ravel()


def brute_force_alpha(sol: SpectralSolution, k: int, n_panels: int = 24, order: int = 8) -> float:
    """``alpha_k`` straight from the Slater-determinant integral (``N <= 4``).

    Integrates ``(d Phi_0 / d x_N)^2`` at ``x_N = x_k`` over
    ``x_1 < ... < x_{N-1}``, with the non-normalized ``Phi_0 = det[psi_i(x_j)]``.
    The integrand is symmetric in the ``N - 2`` spectator coordinates, so the
    ordered region is replaced by the box with ``k - 1`` spectators in
    ``[0, y]`` and the rest in ``[y, L]``, divided by ``(k-1)! (N-1-k)!``.
    """
    N = sol.N
    if N > 4:
        raise ValueError("brute_force_alpha is limited to N <= 4")
    if N < 2:
        raise ValueError("need N >= 2")
    if not 1 <= k <= N - 1:
        raise IndexError(f"k must be in 1..{N - 1}")
    L = sol.box_length
    n_below, n_above = k - 1, N - 1 - k
    n_spect = N - 2
    ys, wys = _gl_nodes(0.0, L, n_panels, order)
    psi_y = wavefunctions(sol, ys)
    dpsi_y = derivatives(sol, ys)
    total = 0.0
    for iy, (y, wy) in enumerate(zip(ys, wys)):
        axes = []
        if n_below:
            zb, wb = _gl_nodes(0.0, y, n_panels, order)
            axes += [(wavefunctions(sol, zb).T, wb)] * n_below
        if n_above:
            za, wa = _gl_nodes(y, L, n_panels, order)
            axes += [(wavefunctions(sol, za).T, wa)] * n_above
        shape = tuple(len(w) for _, w in axes)
        mats = np.empty(shape + (N, N))
        for a, (vals, _) in enumerate(axes):
            bshape = [1] * n_spect + [N]
            bshape[a] = len(vals)
            mats[..., :, a] = vals.reshape(bshape)
        mats[..., :, N - 2] = psi_y[:, iy]
        mats[..., :, N - 1] = dpsi_y[:, iy]
        g2 = np.linalg.det(mats) ** 2
        for _, w in reversed(axes):
            g2 = g2 @ w
        total += wy * float(g2)
    return total / (factorial(n_below) * factorial(n_above))


def write_alpha_csv(coeffs: GeometricCoefficients, path, header=()):
    with open(path, "w", newline="") as fh:
        for line in header:
            fh.write(f"# {line}\n")
        fh.write(f"# provenance: {json.dumps(coeffs.provenance, sort_keys=True)}\n")
        w = csv.writer(fh)
        w.writerow(["k", "alpha"])
        for k, a in enumerate(coeffs.alpha, start=1):
            w.writerow([k, repr(float(a))])
