"""Rotationally equivariant solutions ``u = f(r) e^{i p theta}`` and related thresholds.

Two families solve the semi-stiff problem for every ``p != 0``:

* catenoidal ``u_p = alpha (r^p + rho^p r^-p) e^{ip theta} / (1 + rho^p)``, with Hopf constant
  ``c = -p^2 rho^p / (1 + rho^p)^2 < 0``;
* helicoidal ``u~_p = alpha (r^p - rho^p r^-p) e^{ip theta} / (1 - rho^p)``, with
  ``c = +p^2 rho^p / (1 - rho^p)^2 > 0``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .annulus import AnnulusGrid, BoundaryTrace, HarmonicField, harmonic_extension

KINDS = ("catenoidal", "helicoidal")
_ALIASES = {"cat": "catenoidal", "hel": "helicoidal"}


def _kind(kind):
    kind = _ALIASES.get(kind, kind)
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    return kind


class Minimality(str, enum.Enum):
    NON_MINIMIZING = "non_minimizing"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class RadialSolution:
    p: int
    rho: float
    kind: str = "catenoidal"
    alpha: complex = 1.0

    def __post_init__(self):
        if int(self.p) != self.p or self.p == 0:
            raise ValueError(f"p must be a nonzero integer, got {self.p}")
        if not 0 < self.rho < 1:
            raise ValueError(f"rho must lie in (0, 1), got {self.rho}")
        object.__setattr__(self, "kind", _kind(self.kind))
        if abs(abs(self.alpha) - 1) > 1e-12:
            raise ValueError("alpha must be unimodular")

    @property
    def sign(self):
        return 1.0 if self.kind == "catenoidal" else -1.0

    def field(self) -> HarmonicField:
        p, rho = int(self.p), self.rho
        m = abs(p)
        s = self.sign
        # for p < 0 the formula with exponent p equals the one with |p|
        den = 1.0 + s * rho ** m
        A, B = self.alpha / den, s * self.alpha * rho ** m / den
        return HarmonicField(rho, 0, 0, [(p, A, B)])

    def energy(self):
        return radial_energy(self.p, self.rho, self.kind)

    def hopf_constant(self):
        return radial_hopf_constant(self.p, self.rho, self.kind)


def radial_energy(p, rho, kind="catenoidal") -> float:
    """``2 pi |p| (1 -+ rho^|p|) / (1 +- rho^|p|)``."""
    kind = _kind(kind)
    if p == 0:
        raise ValueError("p must be nonzero")
    m = abs(p)
    x = rho ** m
    if kind == "catenoidal":
        return 2 * np.pi * m * (1 - x) / (1 + x)
    return 2 * np.pi * m * (1 + x) / (1 - x)


def radial_hopf_constant(p, rho, kind="catenoidal") -> float:
    """Value of the constant ``z^2 H_u`` for the radial family."""
    kind = _kind(kind)
    m = abs(p)
    x = rho ** m
    if kind == "catenoidal":
        return -m * m * x / (1 + x) ** 2
    return m * m * x / (1 - x) ** 2


def g_threshold(p, rho):
    """``g_p(rho) = (p - 1) rho^p + p rho^(p-1) - 1``."""
    rho = np.asarray(rho, dtype=float)
    return (p - 1) * rho ** p + p * rho ** (p - 1) - 1


def threshold_rho_prime(p, xtol=1e-13) -> float:
    """Unique root of ``g_p`` in ``(0, 1)``; below it ``u_p`` is not a minimizer."""
    if int(p) != p or p < 2:
        raise ValueError(f"threshold defined for integer p >= 2, got {p}")
    return float(bisect(lambda x: g_threshold(p, x), 1e-9, 1 - 1e-9, xtol=xtol, rtol=4 * np.finfo(float).eps))


def minimality_test(p, rho) -> Minimality:
    """One-sided criterion: ``rho < rho'_p`` certifies that ``u_p`` is not minimizing."""
    if p < 2:
        raise ValueError("criterion needs p >= 2")
    if g_threshold(p, rho) < 0:
        return Minimality.NON_MINIMIZING
    return Minimality.INCONCLUSIVE


def comparison_gap(p, rho) -> float:
    """``E(u_p) - E(u_1) - 2 pi (p - 1)``; positive iff ``rho < rho'_p``."""
    return radial_energy(p, rho) - radial_energy(1, rho) - 2 * np.pi * (p - 1)


def steklov_extension(p, q, alpha, rho, n_theta=64) -> HarmonicField:
    """Harmonic extension of ``e^{ip theta}`` (outer) and ``alpha e^{iq theta}`` (inner)."""
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    outer = BoundaryTrace(np.exp(1j * p * th), 1.0)
    inner = BoundaryTrace(alpha * np.exp(1j * q * th), rho)
    return harmonic_extension(inner, outer, rho)


def steklov_compatibility(p, q, alpha, rho, grid: AnnulusGrid | None = None) -> float:
    """Sup of ``|u ^ d_nu u|`` on both circles for the harmonic extension of the traces.

    Vanishes exactly when the extension also satisfies the Neumann part of the
    semi-stiff conditions.
    """
    n_theta = grid.n_theta if grid is not None else 64
    if grid is not None and abs(grid.rho - rho) > 1e-15:
        raise ValueError("grid radius does not match rho")
    f = steklov_extension(p, q, alpha, rho, n_theta)
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    worst = 0.0
    for radius, nu in ((1.0, 1.0), (rho, -1.0)):
        u, ur, _ = f.derivatives(np.full_like(th, radius), th)
        wedge = np.imag(np.conj(u) * nu * ur)
        worst = max(worst, float(np.max(np.abs(wedge))))
    return worst


def half_annulus_reduction_check(p, rho, kind="catenoidal", n_theta=64) -> float:
    """``sup_theta |d_r u(sqrt(rho), theta)|`` for the radial family."""
    f = RadialSolution(p, rho, kind).field()
    th = 2 * np.pi * np.arange(n_theta) / n_theta
    _, ur, _ = f.derivatives(np.full_like(th, np.sqrt(rho)), th)
    return float(np.max(np.abs(ur)))
