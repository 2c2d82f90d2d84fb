"""Trapping potentials inside a hard-wall box ``[0, L]``.

A :class:`PotentialSpec` is a box length plus an ordered list of additive
terms. The hard walls are not a term: they are encoded in the sine basis of
:mod:`atomchain.spectral`.

Units: lengths in ``ell``, energies in ``eps = hbar^2 / (2 m ell^2)``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

__all__ = [
    "GOLDEN_XI",
    "DomainError",
    "PowerBowl",
    "Harmonic",
    "QuasiPeriodicNoise",
    "Tilt",
    "Tabulated",
    "Zero",
    "PotentialSpec",
    "Grid",
    "evaluate",
    "sample_noise_phases",
    "power_bowl_spec",
    "composite_gauss_legendre",
    "uniform_grid",
]

GOLDEN_XI = 2.0 / (1.0 + math.sqrt(5.0))
TWO_PI = 2.0 * math.pi


class DomainError(ValueError):
    """Raised when a position lies outside the box."""


@dataclass(frozen=True)
class PowerBowl:
    """``amplitude * |(L/2 - x) / (L/2)| ** tau``."""

    amplitude: float
    tau: float

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError(f"PowerBowl amplitude must be >= 0, got {self.amplitude}")
        if not self.tau > 0:
            raise ValueError(f"PowerBowl exponent must be > 0, got {self.tau}")

    def __call__(self, x, L):
        half = 0.5 * L
        return self.amplitude * np.abs((half - x) / half) ** self.tau


@dataclass(frozen=True)
class Harmonic:
    """``strength * (x - L/2)**2``, centred in the box."""

    strength: float

    def __call__(self, x, L):
        return self.strength * (x - 0.5 * L) ** 2


@dataclass(frozen=True)
class QuasiPeriodicNoise:
    """Two incommensurate cosines ``V0 [cos(x + phi1) + cos(xi x + phi2)]``."""

    V0: float
    phi1: float
    phi2: float
    xi: float = GOLDEN_XI

    def __post_init__(self):
        for name in ("phi1", "phi2"):
            phi = getattr(self, name)
            if not 0.0 <= phi < TWO_PI:
                raise ValueError(f"{name} must lie in [0, 2pi), got {phi}")

    def __call__(self, x, L):
        return self.V0 * (np.cos(x + self.phi1) + np.cos(self.xi * x + self.phi2))


@dataclass(frozen=True)
class Tilt:
    """Parity-breaking linear term ``V0 (x - L/2)``."""

    V0: float

    def __call__(self, x, L):
        return self.V0 * (x - 0.5 * L)


@dataclass(frozen=True)
class Tabulated:
    """Linearly interpolated samples ``(x_i, V_i)``; constant beyond the ends."""

    xs: tuple
    values: tuple

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        if xs.ndim != 1 or len(xs) < 2 or len(xs) != len(self.values):
            raise ValueError("Tabulated needs >= 2 samples with matching lengths")
        if np.any(np.diff(xs) <= 0):
            raise ValueError("Tabulated sample positions must be strictly increasing")
        object.__setattr__(self, "xs", tuple(float(v) for v in self.xs))
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))

    def __call__(self, x, L):
        return np.interp(x, self.xs, self.values)


@dataclass(frozen=True)
class Zero:
    def __call__(self, x, L):
        return np.zeros_like(np.asarray(x, dtype=float))


PotentialTerm = Union[PowerBowl, Harmonic, QuasiPeriodicNoise, Tilt, Tabulated, Zero]

_TYPE_NAMES = {
    PowerBowl: "power_bowl",
    Harmonic: "harmonic",
    QuasiPeriodicNoise: "quasi_periodic_noise",
    Tilt: "tilt",
    Tabulated: "tabulated",
    Zero: "zero",
}
_TYPES_BY_NAME = {v: k for k, v in _TYPE_NAMES.items()}


def _term_to_dict(term) -> dict:
    d = {"type": _TYPE_NAMES[type(term)]}
    if isinstance(term, PowerBowl):
        d.update(amplitude=term.amplitude, tau=term.tau)
    elif isinstance(term, Harmonic):
        d.update(strength=term.strength)
    elif isinstance(term, QuasiPeriodicNoise):
        d.update(V0=term.V0, phi1=term.phi1, phi2=term.phi2, xi=term.xi)
    elif isinstance(term, Tilt):
        d.update(V0=term.V0)
    elif isinstance(term, Tabulated):
        d.update(samples=[[x, v] for x, v in zip(term.xs, term.values)])
    return d


def _term_from_dict(d: dict):
    d = dict(d)
    try:
        cls = _TYPES_BY_NAME[d.pop("type")]
    except KeyError as exc:
        raise ValueError(f"unknown or missing potential term type: {exc}") from None
    if cls is Tabulated:
        samples = d.pop("samples")
        if d:
            raise ValueError(f"unexpected fields for tabulated term: {sorted(d)}")
        return Tabulated(tuple(s[0] for s in samples), tuple(s[1] for s in samples))
    return cls(**d)


@dataclass(frozen=True)
class PotentialSpec:
    """Box length plus a sum of potential terms."""

    box_length: float = 100.0
    terms: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not self.box_length > 0:
            raise ValueError(f"box_length must be > 0, got {self.box_length}")
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def L(self) -> float:
        return self.box_length

    def __call__(self, x):
        return evaluate(self, x)

    def with_terms(self, *extra) -> "PotentialSpec":
        """Return a copy with ``extra`` terms appended."""
        return PotentialSpec(self.box_length, self.terms + tuple(extra))

    def is_symmetric(self) -> bool:
        """True when every term is mirror symmetric about ``L/2``."""
        return all(
            isinstance(t, (PowerBowl, Harmonic, Zero)) or (isinstance(t, Tilt) and t.V0 == 0)
            for t in self.terms
        )

    def to_dict(self) -> dict:
        return {"box_length": self.box_length, "terms": [_term_to_dict(t) for t in self.terms]}

    @classmethod
    def from_dict(cls, d: dict) -> "PotentialSpec":
        if "box_length" not in d:
            raise ValueError("potential document needs a 'box_length'")
        return cls(float(d["box_length"]), tuple(_term_from_dict(t) for t in d.get("terms", [])))

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "PotentialSpec":
        return cls.from_dict(json.loads(text))

    def digest(self) -> str:
        """Stable short hash of the canonical JSON form."""
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:16]


def power_bowl_spec(tau: float, amplitude: float = 100.0, box_length: float = 100.0) -> PotentialSpec:
    """The bowl trial potential used for state-transfer calibration."""
    return PotentialSpec(box_length, (PowerBowl(amplitude, tau),))


def evaluate(spec: PotentialSpec, x):
    """Sum of all terms at ``x`` (scalar or array), with ``0 <= x <= L``."""
    xa = np.asarray(x, dtype=float)
    L = spec.box_length
    if np.any(xa < 0) or np.any(xa > L) or np.any(np.isnan(xa)):
        raise DomainError(f"positions must lie in [0, {L}]")
    total = np.zeros_like(xa)
    for term in spec.terms:
        total = total + term(xa, L)
    if np.ndim(x) == 0:
        return float(total)
    return total


def sample_noise_phases(rng: np.random.Generator) -> tuple[float, float]:
    """Draw ``(phi1, phi2)`` independently and uniformly on ``[0, 2pi)``."""
    phi1, phi2 = rng.uniform(0.0, TWO_PI, size=2)
    # uniform() can round up to the open endpoint
    return float(phi1 % TWO_PI), float(phi2 % TWO_PI)


@dataclass(frozen=True)
class Grid:
    """Quadrature nodes and weights on ``[0, L]``."""

    points: np.ndarray
    weights: np.ndarray
    rule: str
    box_length: float

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float)
        if p.ndim != 1 or len(p) < 2:
            raise ValueError("a grid needs at least 2 points")
        if np.any(np.diff(p) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if p[0] <= 0 or p[-1] >= self.box_length:
            raise ValueError("grid points must lie strictly inside (0, L)")

    def __len__(self):
        return len(self.points)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def composite_gauss_legendre(box_length: float, n_panels: int, order: int = 16,
                             breakpoints: Iterable[float] = ()) -> Grid:
    """Composite Gauss-Legendre rule with ``n_panels`` equal panels.

    Extra ``breakpoints`` (e.g. a kink of the potential) are inserted as
    panel edges.
    """
    if n_panels < 1 or order < 1:
        raise ValueError("n_panels and order must be positive")
    edges = np.linspace(0.0, box_length, n_panels + 1)
    extra = [b for b in breakpoints if 0 < b < box_length]
    if extra:
        edges = np.unique(np.concatenate([edges, extra]))
    xg, wg = leggauss(order)
    a, b = edges[:-1, None], edges[1:, None]
    half = 0.5 * (b - a)
    points = (half * xg + 0.5 * (a + b)).ravel()
    weights = (half * wg).ravel()
    return Grid(points, weights, "gauss-legendre-composite", box_length)


def uniform_grid(box_length: float, n_points: int) -> Grid:
    """Interior midpoint rule with ``n_points`` cells."""
    h = box_length / n_points
    points = (np.arange(n_points) + 0.5) * h
    return Grid(points, np.full(n_points, h), "uniform", box_length)
