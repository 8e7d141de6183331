"""Fields on the annulus ``A_rho = {rho < |z| < 1}``: grids, harmonic extension,
energy, degree and Hopf-differential diagnostics.

Conventions: ``a ^ b = Im(conj(a) b)`` and ``<a, b> = Re(a conj(b))`` for
complex numbers viewed as vectors of the plane.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

log = logging.getLogger(__name__)

MODULUS_THRESHOLD = 1e-12


class DegreeUndefinedError(ValueError):
    """A trace vanishes (or nearly) so its winding number is not defined."""


def _check_rho(rho):
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")


# ---------------------------------------------------------------------------
# grids and traces


@dataclass(frozen=True)
class AnnulusGrid:
    """Tensor grid: ``n_r`` uniform radii on ``[rho, 1]``, ``n_theta`` uniform angles on ``[0, 2pi)``."""

    rho: float
    n_r: int = 101
    n_theta: int = 64

    def __post_init__(self):
        _check_rho(self.rho)
        if self.n_r < 3:
            raise ValueError(f"n_r must be >= 3, got {self.n_r}")
        if self.n_theta < 8 or self.n_theta % 2:
            raise ValueError(f"n_theta must be even and >= 8, got {self.n_theta}")

    @property
    def r(self):
        return np.linspace(self.rho, 1.0, self.n_r)

    @property
    def theta(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @property
    def dr(self):
        return (1.0 - self.rho) / (self.n_r - 1)

    @property
    def dtheta(self):
        return 2 * np.pi / self.n_theta

    def mesh(self):
        """``(R, T)`` arrays of shape ``(n_r, n_theta)``."""
        return np.meshgrid(self.r, self.theta, indexing="ij")

    def integrate(self, values):
        """``int int values dr dtheta`` -- Simpson in ``r``, trapezoid (periodic) in ``theta``."""
        values = np.asarray(values)
        inner = values.mean(axis=1) * 2 * np.pi
        return simpson(inner, x=self.r)

    def refined(self):
        return AnnulusGrid(self.rho, 2 * self.n_r - 1, 2 * self.n_theta)


@dataclass(frozen=True)
class BoundaryTrace:
    samples: np.ndarray
    radius: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        if s.ndim != 1 or s.size < 2:
            raise ValueError("a trace needs a 1-D array of at least two samples")
        object.__setattr__(self, "samples", s)

    @property
    def n_theta(self):
        return self.samples.size

    @property
    def theta(self):
        return 2 * np.pi * np.arange(self.n_theta) / self.n_theta

    @classmethod
    def sample(cls, f, radius, n_theta):
        """Trace of a field (or a ``f(r, theta)`` callable) on the circle ``|z| = radius``."""
        th = 2 * np.pi * np.arange(n_theta) / n_theta
        return cls(np.asarray(f(np.full_like(th, radius), th), dtype=complex), radius)


# ---------------------------------------------------------------------------
# fields


class Field:
    """A complex map on (a neighbourhood of) the closed annulus, in polar coordinates."""

    rho: float | None = None

    def __call__(self, r, theta):
        raise NotImplementedError

    def derivatives(self, r, theta):
        """Return ``(u, u_r, u_theta)``."""
        raise NotImplementedError

    def at(self, z):
        z = np.asarray(z, dtype=complex)
        return self(np.abs(z), np.angle(z))


class SampledField(Field):
    """Wrap a plain ``f(r, theta)`` callable; derivatives by 4th-order central differences."""

    def __init__(self, fn: Callable, h_r=1e-3, h_theta=1e-3, rho=None):
        self.fn = fn
        self.h_r = h_r
        self.h_theta = h_theta
        self.rho = rho

    def __call__(self, r, theta):
        return np.asarray(self.fn(r, theta), dtype=complex)

    def derivatives(self, r, theta):
        r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
        f = self.fn
        hr, ht = self.h_r, self.h_theta
        ur = (-f(r + 2 * hr, theta) + 8 * f(r + hr, theta)
              - 8 * f(r - hr, theta) + f(r - 2 * hr, theta)) / (12 * hr)
        ut = (-f(r, theta + 2 * ht) + 8 * f(r, theta + ht)
              - 8 * f(r, theta - ht) + f(r, theta - 2 * ht)) / (12 * ht)
        return self(r, theta), np.asarray(ur, complex), np.asarray(ut, complex)


class HolomorphicField(Field):
    """``u(z) = f(z)`` with derivative ``f'``; ``u_r = f' e^{i theta}``, ``u_theta = i z f'``."""

    def __init__(self, fn, dfn, rho=None):
        self.fn = fn
        self.dfn = dfn
        self.rho = rho

    def __call__(self, r, theta):
        return self.fn(np.asarray(r) * np.exp(1j * np.asarray(theta)))

    def derivatives(self, r, theta):
        z = np.asarray(r) * np.exp(1j * np.asarray(theta))
        d = self.dfn(z)
        return self.fn(z), d * np.exp(1j * np.asarray(theta)), 1j * z * d


def as_field(f, grid: AnnulusGrid | None = None) -> Field:
    if isinstance(f, Field):
        return f
    if not callable(f):
        raise TypeError(f"cannot use {type(f).__name__} as a field")
    if grid is None:
        return SampledField(f)
    return SampledField(f, h_r=grid.dr, h_theta=grid.dtheta, rho=grid.rho)


@dataclass
class HarmonicField(Field):
    """``u = A0 + B0 ln r + sum_n (A_n r^|n| + B_n r^-|n|) e^{i n theta}``."""

    rho: float
    a0: complex = 0j
    b0: complex = 0j
    modes: list = field(default_factory=list)
    """``(n, A_n, B_n)`` triples with ``n != 0``."""

    def __post_init__(self):
        _check_rho(self.rho)
        self.a0 = complex(self.a0)
        self.b0 = complex(self.b0)
        clean = []
        for n, A, B in self.modes:
            if int(n) == 0:
                raise ValueError("mode n=0 is carried by a0/b0")
            clean.append((int(n), complex(A), complex(B)))
        self.modes = clean

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        tol = 1e-12
        if np.any(r < self.rho - tol) or np.any(r > 1 + tol):
            raise ValueError(f"r outside [{self.rho}, 1]")
        return r

    def __call__(self, r, theta):
        return self.derivatives(r, theta)[0]

    def derivatives(self, r, theta):
        r = self._check_r(r)
        theta = np.asarray(theta, dtype=float)
        r, theta = np.broadcast_arrays(r, theta)
        lr = np.log(r)
        u = self.a0 + self.b0 * lr + 0j * r
        ur = self.b0 / r + 0j
        ut = np.zeros(r.shape, complex)
        for n, A, B in self.modes:
            m = abs(n)
            e = np.exp(1j * n * theta)
            rp, rm = r ** m, r ** (-m)
            radial = A * rp + B * rm
            u = u + radial * e
            ur = ur + m * (A * rp - B * rm) / r * e
            ut = ut + 1j * n * radial * e
        return u, ur, ut

    def to_json(self):
        return {
            "rho": self.rho,
            "a0": {"re": self.a0.real, "im": self.a0.imag},
            "b0": {"re": self.b0.real, "im": self.b0.imag},
            "modes": [{"n": n, "ARe": A.real, "AIm": A.imag, "BRe": B.real, "BIm": B.imag}
                      for n, A, B in self.modes],
        }

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        c = lambda d: complex(d["re"], d["im"])
        return cls(data["rho"], c(data["a0"]), c(data["b0"]),
                   [(m["n"], complex(m["ARe"], m["AIm"]), complex(m["BRe"], m["BIm"]))
                    for m in data["modes"]])

    def laplacian_residual(self, grid: AnnulusGrid):
        """Sup of the 2nd-order five-point polar Laplacian at interior grid nodes."""
        R, T = grid.mesh()
        U = self(R, T)
        h, d = grid.dr, grid.dtheta
        Ri = R[1:-1]
        urr = (U[2:] - 2 * U[1:-1] + U[:-2]) / h ** 2
        ur = (U[2:] - U[:-2]) / (2 * h)
        utt = (np.roll(U, -1, 1) - 2 * U + np.roll(U, 1, 1))[1:-1] / d ** 2
        return float(np.max(np.abs(urr + ur / Ri + utt / Ri ** 2)))


def _fourier(samples):
    """Return a function ``n -> c_n`` with ``samples = sum c_n e^{i n theta}``."""
    N = samples.size
    c = np.fft.fft(samples) / N

    def coef(n):
        if N % 2 == 0 and abs(n) == N // 2:
            return c[N // 2] / 2
        return c[n % N]

    return coef


def harmonic_extension(inner: BoundaryTrace, outer: BoundaryTrace, rho, n_modes=None) -> HarmonicField:
    """Harmonic map on ``A_rho`` taking the prescribed traces on ``|z| = rho`` and ``|z| = 1``."""
    _check_rho(rho)
    if inner.n_theta != outer.n_theta:
        raise ValueError(f"trace sample counts differ: {inner.n_theta} vs {outer.n_theta}")
    N = outer.n_theta
    if n_modes is None:
        n_modes = N // 2 - 1
    if n_modes > N // 2 or n_modes < 0:
        raise ValueError(f"n_modes must be in [0, {N // 2}]")
    a, b = _fourier(inner.samples), _fourier(outer.samples)
    a0, b0 = a(0), b(0)
    lr = np.log(rho)
    modes = []
    for n in range(-n_modes, n_modes + 1):
        if n == 0:
            continue
        an, bn = a(n), b(n)
        if an == 0 and bn == 0:
            continue
        m = abs(n)
        pm = rho ** m
        den = 1.0 - pm * pm
        A = (bn - an * pm) / den
        B = pm * (an - pm * bn) / den
        if abs(A) + abs(B) < 1e-15 * (1 + abs(a0) + abs(b0)):
            continue
        modes.append((n, A, B))
    return HarmonicField(rho, b0, (a0 - b0) / lr, modes)


def eval_field(f: Field, r, theta):
    return f(r, theta)


# ---------------------------------------------------------------------------
# integrals


def dirichlet_energy(f, grid: AnnulusGrid) -> float:
    """``1/2 int (|u_r|^2 + |u_theta|^2 / r^2) r dr dtheta``."""
    f = as_field(f, grid)
    R, T = grid.mesh()
    _, ur, ut = f.derivatives(R, T)
    dens = 0.5 * (np.abs(ur) ** 2 + np.abs(ut) ** 2 / R ** 2) * R
    return float(grid.integrate(dens))


def degree_difference_integral(f, grid: AnnulusGrid) -> float:
    """``int_A d_x u ^ d_y u dx dy = int int u_r ^ u_theta dr dtheta``.

    Equals ``pi (p - q)`` for maps with unimodular traces of degrees ``p``
    (outer) and ``q`` (inner); for other maps it is just the Jacobian integral.
    """
    f = as_field(f, grid)
    R, T = grid.mesh()
    _, ur, ut = f.derivatives(R, T)
    return float(grid.integrate(np.imag(np.conj(ur) * ut)))


def capacity(rho) -> float:
    """Capacity ``2 pi / ln(1/rho)`` of ``A_rho``."""
    _check_rho(rho)
    return 2 * np.pi / np.log(1.0 / rho)


def capacity_potential(rho) -> HarmonicField:
    """Harmonic ``V = 1 - ln r / ln rho``: 0 on the inner circle, 1 on the outer."""
    _check_rho(rho)
    return HarmonicField(rho, 1.0, -1.0 / np.log(rho))


def capacity_quadrature(rho, grid: AnnulusGrid | None = None) -> float:
    """``int |grad V|^2`` of the capacity potential by quadrature (twice its Dirichlet energy)."""
    grid = grid or AnnulusGrid(rho, 401, 16)
    return 2.0 * dirichlet_energy(capacity_potential(rho), grid)


# ---------------------------------------------------------------------------
# degree


def _phase_increments(s):
    return np.angle(np.roll(s, -1) / s)


def winding_degree(trace, sampler=None, threshold=MODULUS_THRESHOLD, max_refine=12) -> int:
    """Winding number of a closed sampled curve about the origin.

    ``trace`` is a :class:`BoundaryTrace` or an array of uniform samples over
    one period.  When ``sampler`` (a ``theta -> value`` callable) is given the
    angular sampling is doubled until every step turns by less than ``pi/2``.
    """
    s = trace.samples if isinstance(trace, BoundaryTrace) else np.asarray(trace, complex)
    n = s.size
    for _ in range(max_refine + 1):
        mod = np.abs(s)
        if np.min(mod) < threshold:
            k = int(np.argmin(mod))
            raise DegreeUndefinedError(f"sample {k} has modulus {mod[k]:.3g}: degree undefined")
        inc = _phase_increments(s)
        if sampler is None or np.max(np.abs(inc)) < np.pi / 2:
            break
        n *= 2
        s = np.asarray(sampler(2 * np.pi * np.arange(n) / n), complex)
    else:
        log.warning("winding refinement stopped at %d samples", n)
    total = inc.sum() / (2 * np.pi)
    return int(np.rint(total))


def trace_degree(f, radius, n_theta=256, threshold=MODULUS_THRESHOLD) -> int:
    """Degree of ``f`` restricted to ``|z| = radius`` with automatic refinement."""
    f = as_field(f)
    sampler = lambda th: f(np.full_like(th, radius), th)
    return winding_degree(BoundaryTrace.sample(f, radius, n_theta), sampler, threshold)


# ---------------------------------------------------------------------------
# Hopf differential


@dataclass
class HopfReport:
    c_estimate: float
    max_real_deviation: float
    max_imag_part: float

    def as_row(self):
        return [self.c_estimate, self.max_real_deviation, self.max_imag_part]


def hopf_density(f, R, T):
    """``z^2 H_u`` from ``4 z^2 H_u = r^2 |u_r|^2 - |u_theta|^2 - 2 i r <u_r, u_theta>``."""
    _, ur, ut = f.derivatives(R, T)
    cross = np.real(ur * np.conj(ut))
    return 0.25 * (R ** 2 * np.abs(ur) ** 2 - np.abs(ut) ** 2 - 2j * R * cross)


def hopf_constant_check(f, grid: AnnulusGrid) -> HopfReport:
    """Constancy and reality of ``z^2 H_u`` over the interior grid nodes."""
    f = as_field(f, grid)
    R, T = grid.mesh()
    w = hopf_density(f, R[1:-1], T[1:-1])
    c = float(np.mean(w.real))
    return HopfReport(c, float(np.max(np.abs(w.real - c))), float(np.max(np.abs(w.imag))))


# ---------------------------------------------------------------------------
# inversion in the middle circle


class KelvinField(Field):
    """``z -> f(rho / conj(z))``, i.e. ``(r, theta) -> f(rho / r, theta)``."""

    def __init__(self, f: Field, rho):
        self.f = f
        self.rho = rho

    def __call__(self, r, theta):
        return self.f(self.rho / np.asarray(r, float), theta)

    def derivatives(self, r, theta):
        r = np.asarray(r, float)
        u, ur, ut = self.f.derivatives(self.rho / r, theta)
        return u, -self.rho / r ** 2 * ur, ut


def kelvin_reflect(f, rho) -> Field:
    """Compose with the inversion ``z -> rho / conj(z)`` fixing ``|z| = sqrt(rho)``."""
    _check_rho(rho)
    if isinstance(f, HarmonicField):
        if abs(f.rho - rho) > 1e-15:
            raise ValueError("reflection radius must match the field's annulus")
        lr = np.log(rho)
        modes = [(n, B * rho ** (-abs(n)), A * rho ** abs(n)) for n, A, B in f.modes]
        return HarmonicField(rho, f.a0 + f.b0 * lr, -f.b0, modes)
    return KelvinField(as_field(f), rho)
