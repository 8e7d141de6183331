"""Jacobi-operator spectra of the p-covered catenoid family.

The catenoid covered ``p`` times is parametrized on the fixed domain
``[-1, 1] x [-pi, pi]`` by

    X_t(r, theta) = (cosh(tpr) cos(p theta), cosh(tpr) sin(p theta), tpr).

After the change of variable ``s = t r`` and a Fourier decomposition in
``theta``, the Jacobi eigenvalue problem reduces to the radial
Sturm-Liouville problem

    -w'' - 2 p^2 sech^2(p s) w = mu w   on [-t, t],   w(-t) = w(t) = 0,

and the eigenvalues of the full operator are ``lambda = mu + n^2``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from scipy.optimize import brentq

log = logging.getLogger(__name__)

#: positive root of ``x tanh(x) = 1``; ``p t_0`` equals this value
XTANH_ROOT_BRACKET = (0.5, 2.0)

DEFAULT_GRID = 2001


class SpectrumError(RuntimeError):
    """A bracket or eigenvalue search failed."""


@dataclass(frozen=True)
class CatenoidFamily:
    p: int
    t: float

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"covering number must be >= 1, got {self.p}")
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")

    def immersion(self, r, theta):
        a = self.t * self.p * np.asarray(r, dtype=float)
        pt = self.p * np.asarray(theta, dtype=float)
        return np.stack(np.broadcast_arrays(np.cosh(a) * np.cos(pt),
                                            np.cosh(a) * np.sin(pt), a))

    def normal(self, r, theta):
        a = self.t * self.p * np.asarray(r, dtype=float)
        pt = self.p * np.asarray(theta, dtype=float)
        sech = 1.0 / np.cosh(a)
        return np.stack(np.broadcast_arrays(sech * np.cos(pt),
                                            sech * np.sin(pt), -np.tanh(a)))


@dataclass(frozen=True)
class FundamentalForms:
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    e: np.ndarray
    f: np.ndarray
    g: np.ndarray
    K: np.ndarray

    @property
    def mean_curvature(self):
        return (self.e * self.G - 2 * self.f * self.F + self.g * self.E) / (
            2 * (self.E * self.G - self.F ** 2))


def fundamental_forms(p, t, r) -> FundamentalForms:
    """Closed-form first and second fundamental forms of ``X_t`` at ``r``."""
    if not t > 0:
        raise ValueError("t must be positive")
    r = np.asarray(r, dtype=float)
    ch2 = np.cosh(t * p * r) ** 2
    zero = np.zeros_like(ch2)
    return FundamentalForms(
        E=t * t * p * p * ch2,
        F=zero,
        G=p * p * ch2,
        e=np.full_like(ch2, t * t * p * p),
        f=zero.copy(),
        g=np.full_like(ch2, -float(p * p)),
        K=-1.0 / ch2 ** 2,
    )


@dataclass
class SpectrumResult:
    t: float
    p: int
    n_grid: int
    mus: np.ndarray
    """Richardson-extrapolated eigenvalues, ascending."""
    raw_mus: np.ndarray
    """Eigenvalues on the ``n_grid`` grid itself."""
    errors: np.ndarray
    """Per-eigenvalue refinement estimates."""
    r: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    """Columns are unit-max eigenvectors on ``r`` (zero at the ends), first one positive."""

    @property
    def refinement_estimate(self) -> float:
        return float(np.max(self.errors))

    def eigenfunction(self, k=0):
        """Linear interpolant of the ``k``-th eigenvector on ``[-t, t]``."""
        vec = self.eigenvectors[:, k]
        r = self.r
        return lambda s: np.interp(s, r, vec)


def _potential(p, s):
    return 2.0 * p * p / np.cosh(p * s) ** 2


def _tridiagonal(p, t, n_grid):
    r = np.linspace(-t, t, n_grid)
    h = r[1] - r[0]
    inner = r[1:-1]
    d = 2.0 / h ** 2 - _potential(p, inner)
    e = np.full(len(inner) - 1, -1.0 / h ** 2)
    return r, d, e


def _raw_eigenvalues(p, t, n_grid, k_eigs):
    _, d, e = _tridiagonal(p, t, n_grid)
    # LAPACK stebz: bisection on Sturm counts
    return eigvalsh_tridiagonal(d, e, select="i", select_range=(0, k_eigs - 1))


def radial_spectrum(p, t, k_eigs=3, n_grid=DEFAULT_GRID, vectors=True) -> SpectrumResult:
    """Lowest ``k_eigs`` eigenvalues of the radial Jacobi problem on ``[-t, t]``.

    Second-order finite differences; the reported ``mus`` are Richardson
    extrapolations across one grid halving, and ``errors`` holds the size of
    that correction.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if n_grid < 201 or n_grid % 2 == 0:
        raise ValueError(f"n_grid must be odd and >= 201, got {n_grid}")
    if k_eigs < 1 or k_eigs > n_grid - 2:
        raise ValueError(f"k_eigs out of range: {k_eigs}")
    coarse = _raw_eigenvalues(p, t, n_grid, k_eigs)
    fine = _raw_eigenvalues(p, t, 2 * n_grid - 1, k_eigs)
    mus = (4.0 * fine - coarse) / 3.0
    errors = np.abs(mus - coarse)

    r, d, e = _tridiagonal(p, t, n_grid)
    vecs = np.zeros((n_grid, k_eigs if vectors else 0))
    if vectors:
        _, inner = eigh_tridiagonal(d, e, select="i", select_range=(0, k_eigs - 1))
        for k in range(k_eigs):
            v = inner[:, k]
            v = v / v[np.argmax(np.abs(v))]
            if k == 0 and v.sum() < 0:
                v = -v
            vecs[1:-1, k] = v
    return SpectrumResult(t=float(t), p=int(p), n_grid=int(n_grid), mus=mus,
                          raw_mus=coarse, errors=errors, r=r, eigenvectors=vecs)


def first_eigenvalue(p, t, n_grid=DEFAULT_GRID) -> float:
    return float(radial_spectrum(p, t, 1, n_grid, vectors=False).mus[0])


def full_spectrum(p, t, n_max=3, k_eigs=3, n_grid=DEFAULT_GRID):
    """Eigenvalues ``mu_j + n^2`` of the Jacobi operator for ``|n| <= n_max``.

    Returns ``(lam, j, n)`` triples sorted by ``lam``; ``j`` counts from 1 and
    each angular mode ``n`` and ``-n`` is listed separately.
    """
    res = radial_spectrum(p, t, k_eigs, n_grid, vectors=False)
    out = [(float(mu + n * n), j + 1, n)
           for j, mu in enumerate(res.mus)
           for n in range(-n_max, n_max + 1)]
    out.sort(key=lambda item: (item[0], item[1], abs(item[2]), item[2]))
    return out


def xtanh_root(tol=1e-14) -> float:
    """Positive root of ``x tanh x = 1`` by plain bisection."""
    lo, hi = XTANH_ROOT_BRACKET
    f = lambda x: x * np.tanh(x) - 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def bifurcation_instant(p, k, tol=1e-8, n_grid=DEFAULT_GRID) -> float:
    """Instant ``t_k`` at which ``mu_1(t) = -k^2``.

    Only ``0 <= k <= p - 1`` have a finite instant, because ``mu_1`` decreases
    monotonically to ``-p^2`` as ``t`` grows.
    """
    if k < 0:
        raise ValueError(f"k must be non-negative, got {k}")
    if k >= p:
        raise SpectrumError(
            f"no finite bifurcation instant for k={k}, p={p}: mu_1(t) > -p^2 for all t")
    target = -float(k * k)
    g = lambda t: first_eigenvalue(p, t, n_grid) - target

    # x tanh x = 1 brackets t_0 from below for every k
    lo = 0.5 * XTANH_ROOT_BRACKET[0] / p
    if g(lo) <= 0:
        raise SpectrumError(f"lower bracket failed at t={lo} (grid {n_grid})")
    hi = 2.0 / p
    while g(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 200.0 / p:
            raise SpectrumError(f"upper bracket failed for p={p}, k={k} (grid {n_grid})")
    t_k = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if abs(g(t_k)) > tol:
        log.warning("mu_1(t_%d) misses %g by %.3g", k, target, abs(g(t_k)))
    return float(t_k)


def jacobi_field_mu0(p, a, b, r):
    """Zero-eigenvalue radial Jacobi field and its ODE residual.

    Returns ``(w, residual)`` where ``w = a tanh(pr) + b (1 - pr tanh(pr))`` and
    ``residual = w'' + 2 p^2 sech^2(pr) w`` from the exact second derivative.
    """
    x = p * np.asarray(r, dtype=float)
    th = np.tanh(x)
    s2 = 1.0 / np.cosh(x) ** 2
    w = a * th + b * (1.0 - x * th)
    w2 = p * p * (-2.0 * a * s2 * th - b * (2.0 * s2 - 2.0 * x * s2 * th))
    return w, w2 + 2.0 * p * p * s2 * w


def transversality(p, t1, dt=1e-4, n_grid=DEFAULT_GRID) -> float:
    """Central-difference slope of ``lambda_2(t) = mu_1(t) + 1`` at ``t1``."""
    slope = (first_eigenvalue(p, t1 + dt, n_grid)
             - first_eigenvalue(p, t1 - dt, n_grid)) / (2.0 * dt)
    if slope >= 0:
        raise SpectrumError(
            f"non-negative eigenvalue slope {slope:.3g} at t={t1}: discretization failure")
    return float(slope)


def mu2_positive_check(p, t1, n_grid=DEFAULT_GRID) -> bool:
    res = radial_spectrum(p, t1, 2, n_grid, vectors=False)
    return bool(res.mus[1] > 0)


def kernel_dimension(p, t, n_max=None, tol=1e-6, k_eigs=None, n_grid=DEFAULT_GRID) -> int:
    """Number of (lambda, n) pairs with ``|lambda| < tol``, counting +n and -n."""
    if n_max is None:
        n_max = p
    if k_eigs is None:
        k_eigs = p + 1
    return sum(1 for lam, _, _ in full_spectrum(p, t, n_max, k_eigs, n_grid)
               if abs(lam) < tol)
