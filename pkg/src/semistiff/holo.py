"""Holomorphic energy minimizers with outer degree ``p > 0`` and inner degree ``q < 0``.

``u(z) = z^q prod_i |x_i| f_{x_i}(z)`` where each factor

    f_x(z) = (1 - z/x) / (1 - z conj(x))
             * prod_{k>=1} (1 - rho^{2k} z/x)(1 - rho^{2k} x/z)
                         / ((1 - rho^{2k}/(z conj(x)))(1 - rho^{2k} z conj(x)))

has a single simple zero in the annulus, at ``x``.  ``|u| = 1`` on both
circles provided ``sum_i ln|x_i| / ln rho = -q``.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .annulus import (AnnulusGrid, DegreeUndefinedError, Field, as_field, dirichlet_energy,
                      hopf_constant_check, trace_degree)

log = logging.getLogger(__name__)

LOG_SPACE_THRESHOLD = 8


class InfeasibleZeroSet(ValueError):
    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class PoleError(ValueError):
    """Evaluation point too close to a pole of a truncated factor."""


def _check(p, q, rho):
    if not (int(p) == p and int(q) == q):
        raise ValueError("degrees must be integers")
    if not (p > 0 > q):
        raise ValueError(f"explicit minimizers need p > 0 > q, got p={p}, q={q}")
    if not 0 < rho < 1:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")


@dataclass(frozen=True)
class ZeroSet:
    rho: float
    p: int
    q: int
    zeros: tuple

    def __post_init__(self):
        _check(self.p, self.q, self.rho)
        z = tuple(complex(x) for x in self.zeros)
        if len(z) != self.p - self.q:
            raise ValueError(f"need p - q = {self.p - self.q} zeros, got {len(z)}")
        for i, x in enumerate(z):
            if not self.rho < abs(x) < 1:
                raise InfeasibleZeroSet(f"zero {i} at modulus {abs(x):.6g} is outside the annulus", i)
        object.__setattr__(self, "zeros", z)

    @property
    def constraint_residual(self):
        return abs(sum(math.log(abs(x)) for x in self.zeros) / math.log(self.rho) + self.q)

    def to_json(self):
        return {"rho": self.rho, "p": self.p, "q": self.q,
                "zeros": [{"re": x.real, "im": x.imag} for x in self.zeros]}

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        return cls(data["rho"], data["p"], data["q"],
                   tuple(complex(z["re"], z["im"]) for z in data["zeros"]))


def default_seeds(p, q, rho):
    """``p - q`` equally spaced points on the circle of modulus ``rho^{|q|/(p-q)}``."""
    n = p - q
    mod = rho ** (abs(q) / n)
    return [mod * np.exp(2j * np.pi * k / n) for k in range(n)]


def make_zero_set(p, q, rho, seeds=None) -> ZeroSet:
    """Rescale seed moduli ``|x| -> |x|^s`` so that ``sum ln|x_i| / ln rho = -q``.

    The common exponent solves a linear equation in ``s``; arguments are kept.
    """
    _check(p, q, rho)
    if not seeds:
        return ZeroSet(rho, p, q, tuple(default_seeds(p, q, rho)))
    seeds = [complex(x) for x in seeds]
    if len(seeds) != p - q:
        raise ValueError(f"need p - q = {p - q} seeds, got {len(seeds)}")
    lr = math.log(rho)
    ell = []
    for i, x in enumerate(seeds):
        if not rho < abs(x) < 1:
            raise InfeasibleZeroSet(f"seed {i} (modulus {abs(x):.6g}) is not inside the annulus", i)
        ell.append(math.log(abs(x)) / lr)
    s = -q / sum(ell)
    for i, e in enumerate(ell):
        if s * e >= 1:
            raise InfeasibleZeroSet(
                f"projection pushes seed {i} to modulus rho^{s * e:.4g}, inside the hole", i)
    zeros = tuple(abs(x) ** s * np.exp(1j * np.angle(x)) for x in seeds)
    return ZeroSet(rho, p, q, zeros)


def truncation_order(rho, eps=1e-14) -> int:
    """Number of product factors so the geometric tail in ``rho^2`` is below ``eps``."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    return int(math.ceil(math.log(eps * (1 - rho * rho)) / (2 * math.log(rho)))) + 5


def _factor_parts(x, z, rho, K):
    """Numerator/denominator pieces of ``f_x`` except the ``(1 - z/x)`` zero factor.

    Returns ``(value, log_derivative, min_denominator)`` of
    ``f_x(z) / (1 - z/x)``.
    """
    xc = np.conj(x)
    r2 = rho * rho
    # at a pole the values are inf/nan; callers reject them through ``min_denominator``
    with np.errstate(divide="ignore", invalid="ignore"):
        den0 = 1 - z * xc
        val = 1.0 / den0
        dlog = xc / den0
        mind = np.abs(den0)
        c = 1.0
        for _ in range(K):
            c *= r2
            a = 1 - c * z / x
            b = 1 - c * x / z
            d1 = 1 - c / (z * xc)
            d2 = 1 - c * z * xc
            val = val * (a * b) / (d1 * d2)
            dlog = dlog - (c / x) / a + (c * x / z ** 2) / b - (c / (z * z * xc)) / d1 + (c * xc) / d2
            mind = np.minimum(mind, np.minimum(np.abs(d1), np.abs(d2)))
    return val, dlog, mind


def f_factor(x, z, rho, eps=1e-14, K=None):
    """Truncated factor ``f_x(z)``; raises :class:`PoleError` near a pole."""
    if not rho < abs(x) < 1:
        raise ValueError("x must lie inside the annulus")
    K = truncation_order(rho, eps) if K is None else K
    z = np.asarray(z, dtype=complex)
    val, _, mind = _factor_parts(x, z, rho, K)
    if np.any(mind < eps):
        raise PoleError("evaluation point within eps of a pole")
    return (1 - z / x) * val


class ProductSolution(Field):
    """Evaluator of ``u(z) = z^q prod |x_i| f_{x_i}(z)`` and its complex derivative."""

    def __init__(self, zero_set: ZeroSet, eps=1e-14):
        self.zero_set = zero_set
        self.eps = eps
        self.truncation_order = truncation_order(zero_set.rho, eps)
        self.rho = zero_set.rho
        self.log_space = (zero_set.p - zero_set.q) > LOG_SPACE_THRESHOLD

    @property
    def p(self):
        return self.zero_set.p

    @property
    def q(self):
        return self.zero_set.q

    def _evaluate(self, z, derivative):
        zs = self.zero_set
        z = np.asarray(z, dtype=complex)
        K = self.truncation_order
        xs = zs.zeros
        # u = L * P with P = prod (1 - z/x_i) carrying the zeros and L zero-free
        logmod = zs.q * np.log(np.abs(z))
        phase = zs.q * np.angle(z)
        L = z ** zs.q + 0j
        dlogL = zs.q / z
        P = np.ones_like(z)
        dP = np.zeros_like(z)
        for x in xs:
            val, dl, mind = _factor_parts(x, z, zs.rho, K)
            if np.any(mind < self.eps):
                raise PoleError("evaluation point within eps of a pole")
            if self.log_space:
                logmod = logmod + math.log(abs(x)) + np.log(np.abs(val))
                phase = phase + np.angle(val)
            else:
                L = L * abs(x) * val
            dlogL = dlogL + dl
            w = 1 - z / x
            dP = dP * w + P * (-1.0 / x)
            P = P * w
        if self.log_space:
            L = np.exp(logmod + 1j * phase)
        u = L * P
        if not derivative:
            return u
        return u, L * (P * dlogL + dP)

    def at(self, z):
        return self._evaluate(z, False)

    def dz(self, z):
        return self._evaluate(z, True)[1]

    def __call__(self, r, theta):
        return self.at(np.asarray(r) * np.exp(1j * np.asarray(theta)))

    def derivatives(self, r, theta):
        e = np.exp(1j * np.asarray(theta))
        z = np.asarray(r) * e
        u, du = self._evaluate(z, True)
        return u, du * e, 1j * z * du


def build_solution(zs: ZeroSet, eps=1e-14) -> ProductSolution:
    return ProductSolution(zs, eps)


# ---------------------------------------------------------------------------
# validation


def argument_principle_count(u, radius_inner, radius_outer, n_samples=256, retries=3) -> int:
    """Number of zeros between two circles: outer winding minus inner winding."""
    f = as_field(u)
    ri, ro = float(radius_inner), float(radius_outer)
    for attempt in range(retries + 1):
        try:
            return trace_degree(f, ro, n_samples) - trace_degree(f, ri, n_samples)
        except DegreeUndefinedError:
            if attempt == retries:
                raise
            bump = 1e-6 * (attempt + 1)
            log.info("zero on a contour; nudging radii by %g", bump)
            ri, ro = ri * (1 + bump), ro * (1 - bump)


@dataclass
class Check:
    name: str
    value: float
    target: float | None = None
    tolerance: float | None = None

    @property
    def passed(self):
        if self.target is None:
            return None
        return abs(self.value - self.target) <= self.tolerance


@dataclass
class ValidationReport:
    checks: list = field(default_factory=list)

    def add(self, *args, **kw):
        self.checks.append(Check(*args, **kw))

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self):
        return all(c.passed is not False for c in self.checks)

    def rows(self):
        yield ["check", "value", "target", "tolerance", "pass"]
        for c in self.checks:
            yield [c.name, c.value, "" if c.target is None else c.target,
                   "" if c.tolerance is None else c.tolerance,
                   "" if c.passed is None else ("pass" if c.passed else "fail")]


def validate_solution(u, grid: AnnulusGrid, degrees=None, modulus_tol=1e-8,
                      energy_rtol=1e-4, hopf_tol=1e-6, n_boundary=512) -> ValidationReport:
    """Boundary modulus, degrees, zero count, energy and Hopf checks.

    ``degrees=(p, q)`` supplies targets for fields that are not product
    solutions; without targets the measured values are reported only.
    """
    f = as_field(u, grid)
    if degrees is None and isinstance(u, ProductSolution):
        degrees = (u.p, u.q)
    rho = grid.rho
    rep = ValidationReport()
    th = 2 * np.pi * np.arange(n_boundary) / n_boundary
    for name, radius in (("outer_modulus_dev", 1.0), ("inner_modulus_dev", rho)):
        dev = float(np.max(np.abs(np.abs(f(np.full_like(th, radius), th)) - 1)))
        rep.add(name, dev, 0.0, modulus_tol)
    try:
        dp = trace_degree(f, 1.0, grid.n_theta)
        dq = trace_degree(f, rho, grid.n_theta)
        count = dp - dq
    except DegreeUndefinedError:
        dp = dq = count = float("nan")
    p, q = degrees if degrees is not None else (None, None)
    rep.add("outer_degree", dp, p, 0 if p is not None else None)
    rep.add("inner_degree", dq, q, 0 if q is not None else None)
    rep.add("zero_count", count, None if p is None else p - q, 0 if p is not None else None)
    E = dirichlet_energy(f, grid)
    if p is not None:
        m = np.pi * (abs(p) + abs(q))
        rep.add("energy", E, m, energy_rtol * max(m, 1e-300))
    else:
        rep.add("energy", E)
    h = hopf_constant_check(f, grid)
    rep.add("hopf_c", h.c_estimate, 0.0 if isinstance(u, ProductSolution) else None,
            hopf_tol if isinstance(u, ProductSolution) else None)
    return rep
