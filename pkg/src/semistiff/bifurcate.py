"""Normal perturbations of the covered catenoid and the bifurcating branch.

Surfaces are written as ``Y = X_t + u N_t`` over ``[-1, 1] x [-pi, pi]`` with
``u`` even in ``r`` and in ``theta`` (the symmetry class used throughout this
module).  Only the quarter ``[0, 1] x [0, pi]`` is stored:

* radial nodes ``r_i = i / (n_r - 1)``, with the ``r = 1`` row held at zero and
  an even ghost row ``u_{-1} = u_1`` across ``r = 0``;
* cell-centred angular nodes ``theta_j = (j + 1/2) pi / n_theta`` with even
  ghosts across ``theta = 0`` and ``theta = pi``.

The unknowns are the rows ``i = 0 .. n_r - 2``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq
from scipy.sparse.linalg import splu

from . import spectrum

log = logging.getLogger(__name__)

EPS = np.finfo(float).eps


class BifurcationError(RuntimeError):
    """Newton divergence, step failure or a missing bifurcation point."""


class ImmersionError(BifurcationError):
    """``EG - F^2`` vanished or ``sup|u|`` reached 1."""


# ---------------------------------------------------------------------------
# grid and state


@dataclass(frozen=True)
class PerturbationGrid:
    p: int
    t: float
    u: np.ndarray = field(repr=False)
    """Quarter-domain values, shape ``(n_r, n_theta)``; last row is the boundary."""

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        if u.ndim != 2 or u.shape[0] < 3 or u.shape[1] < 4:
            raise ValueError(f"bad perturbation shape {u.shape}")
        object.__setattr__(self, "u", u)

    @classmethod
    def zeros(cls, p, t, n_r, n_theta):
        return cls(p, t, np.zeros((n_r, n_theta)))

    @property
    def n_r(self):
        return self.u.shape[0]

    @property
    def n_theta(self):
        return self.u.shape[1]

    @property
    def r(self):
        return np.linspace(0.0, 1.0, self.n_r)

    @property
    def theta(self):
        return (np.arange(self.n_theta) + 0.5) * np.pi / self.n_theta

    @property
    def unknowns(self):
        return self.u[:-1].ravel()

    def with_unknowns(self, x, t=None):
        u = np.zeros_like(self.u)
        u[:-1] = np.reshape(x, (self.n_r - 1, self.n_theta))
        return PerturbationGrid(self.p, self.t if t is None else float(t), u)

    def full_grid(self):
        """Reconstruct ``(r, theta, u)`` on ``[-1, 1] x [-pi, pi)`` by reflection."""
        r = np.concatenate([-self.r[:0:-1], self.r])
        uu = np.concatenate([self.u[:0:-1], self.u], axis=0)
        th = self.theta
        theta = np.concatenate([-th[::-1], th])
        uu = np.concatenate([uu[:, ::-1], uu], axis=1)
        return r, theta, uu


def quadrature_weights(n_r, n_theta):
    """Full-domain L2 weights for the unknown rows of a quarter grid."""
    dr = 1.0 / (n_r - 1)
    dth = np.pi / n_theta
    w_r = np.full(n_r - 1, 2.0 * dr)
    w_r[0] = dr
    return (w_r[:, None] * np.full(n_theta, 2.0 * dth)[None, :]).ravel()


# ---------------------------------------------------------------------------
# geometry of X_t and N_t


def _frame(p, t, r, theta):
    """X, N and their first/second derivatives at the broadcast ``(r, theta)``."""
    a = t * p * r
    ch, sh = np.cosh(a), np.sinh(a)
    sech, th = 1.0 / ch, np.tanh(a)
    c, s = np.cos(p * theta), np.sin(p * theta)
    c, s, ch, sh, sech, th, a = np.broadcast_arrays(c, s, ch, sh, sech, th, a)
    zero = np.zeros_like(a)
    tp = t * p
    g = {}
    g["X"] = np.stack([ch * c, ch * s, a])
    g["Xr"] = tp * np.stack([sh * c, sh * s, np.ones_like(a)])
    g["Xrr"] = tp * tp * np.stack([ch * c, ch * s, zero])
    g["Xt"] = p * np.stack([-ch * s, ch * c, zero])
    g["Xtt"] = -p * p * np.stack([ch * c, ch * s, zero])
    g["Xrt"] = tp * p * np.stack([-sh * s, sh * c, zero])
    g["N"] = np.stack([sech * c, sech * s, -th])
    g["Nr"] = tp * np.stack([-sech * th * c, -sech * th * s, -sech * sech])
    k = sech * th * th - sech ** 3
    g["Nrr"] = tp * tp * np.stack([k * c, k * s, 2 * sech * sech * th])
    g["Nt"] = p * np.stack([-sech * s, sech * c, zero])
    g["Ntt"] = -p * p * np.stack([sech * c, sech * s, zero])
    g["Nrt"] = tp * p * np.stack([sech * th * s, -sech * th * c, zero])
    return g


def _extended(u):
    """Pad quarter values with the symmetry ghosts: one row above, one column each side."""
    ue = np.concatenate([u[1:2], u], axis=0)
    return np.concatenate([ue[:, :1], ue, ue[:, -1:]], axis=1)


def _u_derivatives(u, h, d):
    """Central differences at the unknown rows; returns u, u_r, u_rr, u_th, u_thth, u_rth."""
    e = _extended(u)
    # centre of unknown rows i=0..n_r-2 sits at e[1:-1, 1:-1]
    C = e[1:-1, 1:-1]
    N_, S_ = e[2:, 1:-1], e[:-2, 1:-1]
    E_, W_ = e[1:-1, 2:], e[1:-1, :-2]
    ur = (N_ - S_) / (2 * h)
    urr = (N_ - 2 * C + S_) / h ** 2
    ut = (E_ - W_) / (2 * d)
    utt = (E_ - 2 * C + W_) / d ** 2
    urt = (e[2:, 2:] - e[2:, :-2] - e[:-2, 2:] + e[:-2, :-2]) / (4 * h * d)
    return C, ur, urr, ut, utt, urt


def _dot(a, b):
    return np.einsum("k...,k...->...", a, b)


def _curvature_from_derivatives(Yr, Yt, Yrr, Ytt, Yrt):
    E, F, G = _dot(Yr, Yr), _dot(Yr, Yt), _dot(Yt, Yt)
    W2 = E * G - F * F
    if not np.all(W2 > 0):
        bad = np.argwhere(~(W2 > 0))[0]
        raise ImmersionError(f"EG - F^2 <= 0 at node {tuple(int(b) for b in bad)}")
    n = -np.cross(Yr, Yt, axis=0) / np.sqrt(W2)
    e, f, g = _dot(Yrr, n), _dot(Yrt, n), _dot(Ytt, n)
    return (e * G - 2 * f * F + g * E) / (2 * W2)


def mean_curvature(pg: PerturbationGrid, scheme="hybrid"):
    """Mean curvature of ``Y = X_t + u N_t`` at the unknown nodes.

    ``scheme="hybrid"`` differentiates ``X_t`` and ``N_t`` exactly and only ``u``
    by central differences, so ``u = 0`` gives ``H = 0`` to rounding.
    ``scheme="full"`` forms ``Y`` on the grid and differentiates it by central
    differences, giving the ``O(h^2)`` truncation error of a plain surface
    discretization.
    """
    p, t = pg.p, pg.t
    h = 1.0 / (pg.n_r - 1)
    d = np.pi / pg.n_theta
    r = pg.r[:-1, None]
    th = pg.theta[None, :]
    if scheme == "hybrid":
        u, ur, urr, ut, utt, urt = _u_derivatives(pg.u, h, d)
        g = _frame(p, t, r, th)
        N = g["N"]
        Yr = g["Xr"] + ur * N + u * g["Nr"]
        Yt = g["Xt"] + ut * N + u * g["Nt"]
        Yrr = g["Xrr"] + urr * N + 2 * ur * g["Nr"] + u * g["Nrr"]
        Ytt = g["Xtt"] + utt * N + 2 * ut * g["Nt"] + u * g["Ntt"]
        Yrt = g["Xrt"] + urt * N + ur * g["Nt"] + ut * g["Nr"] + u * g["Nrt"]
    elif scheme == "full":
        e = _extended(pg.u)
        re = np.concatenate([[-h], pg.r])[:, None]
        te = np.concatenate([[-0.5 * d], pg.theta, [np.pi + 0.5 * d]])[None, :]
        g = _frame(p, t, re, te)
        Y = g["X"] + e * g["N"]
        C = Y[:, 1:-1, 1:-1]
        Nn, Ss = Y[:, 2:, 1:-1], Y[:, :-2, 1:-1]
        Ee, Ww = Y[:, 1:-1, 2:], Y[:, 1:-1, :-2]
        Yr = (Nn - Ss) / (2 * h)
        Yt = (Ee - Ww) / (2 * d)
        Yrr = (Nn - 2 * C + Ss) / h ** 2
        Ytt = (Ee - 2 * C + Ww) / d ** 2
        Yrt = (Y[:, 2:, 2:] - Y[:, 2:, :-2] - Y[:, :-2, 2:] + Y[:, :-2, :-2]) / (4 * h * d)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return _curvature_from_derivatives(Yr, Yt, Yrr, Ytt, Yrt)


def jacobi_apply(pg: PerturbationGrid, v):
    """Discrete Jacobi operator ``J_t v`` at the unknown nodes.

    ``J_t = (t^2 p^2 cosh^2(tpr))^{-1} [d_rr + t^2 (d_thth + 2 p^2 sech^2(tpr))]``.
    ``v`` is a quarter-grid array with the same shape as ``pg.u``.
    The mean curvature of ``X_t + eps v N_t`` is ``eps J_t v / 2 + O(eps^2)``.
    """
    p, t = pg.p, pg.t
    v = np.asarray(v, dtype=float)
    if v.shape != pg.u.shape:
        raise ValueError("v must live on the same quarter grid")
    h = 1.0 / (pg.n_r - 1)
    d = np.pi / pg.n_theta
    vc, _, vrr, _, vtt, _ = _u_derivatives(v, h, d)
    ch2 = np.cosh(t * p * pg.r[:-1, None]) ** 2
    return (vrr + t * t * (vtt + 2 * p * p / ch2 * vc)) / (t * t * p * p * ch2)


# ---------------------------------------------------------------------------
# Newton machinery


def _residual(pg, x, t, scheme):
    return mean_curvature(pg.with_unknowns(x, t), scheme).ravel()


def _coloring(n_rows, n_theta):
    i, j = np.divmod(np.arange(n_rows * n_theta), n_theta)
    return (i % 3) * 3 + (j % 3), i, j


def jacobian(pg: PerturbationGrid, scheme="hybrid", h0=None):
    """Sparse finite-difference Jacobian of the residual w.r.t. the unknowns.

    Nine grouped directional differences (columns coloured by ``(i%3, j%3)``)
    recover the full 9-point stencil.
    """
    x = pg.unknowns
    nrow = pg.n_r - 1
    nth = pg.n_theta
    if h0 is None:
        h0 = mean_curvature(pg, scheme).ravel()
    eps = np.sqrt(EPS) * (1.0 + np.max(np.abs(x), initial=0.0))
    color, ci, cj = _coloring(nrow, nth)
    rows, cols, vals = [], [], []
    offsets = [(di, dj) for di in (-1, 0, 1) for dj in (-1, 0, 1)]
    for c in range(9):
        mask = color == c
        xp = x.copy()
        xp[mask] += eps
        dh = (_residual(pg, xp, pg.t, scheme) - h0) / eps
        idx = np.nonzero(mask)[0]
        for di, dj in offsets:
            ri = ci[idx] + di
            rj = cj[idx] + dj
            ok = (ri >= 0) & (ri < nrow) & (rj >= 0) & (rj < nth)
            rk = ri[ok] * nth + rj[ok]
            rows.append(rk)
            cols.append(idx[ok])
            vals.append(dh[rk])
    n = nrow * nth
    return sp.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n, n))


def _dH_dt(pg, h0, scheme):
    dt = np.sqrt(EPS) * max(1.0, pg.t)
    return (mean_curvature(replace(pg, t=pg.t + dt), scheme).ravel() - h0) / dt


def _check_bound(x):
    if np.max(np.abs(x), initial=0.0) >= 1.0:
        raise ImmersionError("sup|u| reached the immersion bound 1")


def newton_solve(pg0: PerturbationGrid, tol=1e-10, max_iter=30, scheme="hybrid"):
    """Solve ``H(X_t + u N_t) = 0`` for ``u`` at fixed ``t``."""
    pg = pg0
    res = mean_curvature(pg, scheme).ravel()
    history = [np.max(np.abs(res))]
    for it in range(max_iter):
        if history[-1] < tol:
            log.debug("newton converged in %d steps, |H|=%.3g", it, history[-1])
            return pg
        J = jacobian(pg, scheme, res)
        dx = splu(J).solve(-res)
        x = pg.unknowns + dx
        _check_bound(x)
        pg = pg.with_unknowns(x)
        res = mean_curvature(pg, scheme).ravel()
        history.append(np.max(np.abs(res)))
        if len(history) >= 4 and history[-1] > history[-2] > history[-3] > history[-4]:
            raise BifurcationError(f"newton diverging: residuals {history[-4:]}")
    if history[-1] < tol:
        return pg
    raise BifurcationError(f"newton did not converge in {max_iter} steps (|H|={history[-1]:.3g})")


# ---------------------------------------------------------------------------
# branch switching and continuation


@dataclass(frozen=True)
class BranchState:
    t: float
    u: PerturbationGrid
    amplitude: float
    residual_norm: float
    step_index: int = 0
    kernel: np.ndarray | None = field(default=None, repr=False, compare=False)
    """Normalized discrete kernel ``u_1`` on the unknown rows (flattened)."""

    @property
    def p(self):
        return self.u.p

    def norm(self):
        w = quadrature_weights(self.u.n_r, self.u.n_theta)
        x = self.u.unknowns
        return float(np.sqrt(np.sum(w * x * x)))


def _radial_operator(p, t, n_r, n_theta):
    h = 1.0 / (n_r - 1)
    d = np.pi / n_theta
    k_th = (2.0 - 2.0 * np.cos(d)) / d ** 2
    m = n_r - 1
    r = np.linspace(0, 1, n_r)[:-1]
    A = np.zeros((m, m))
    idx = np.arange(m)
    A[idx, idx] = -2.0 / h ** 2 + t * t * (2 * p * p / np.cosh(t * p * r) ** 2 - k_th)
    A[idx[:-1], idx[:-1] + 1] = 1.0 / h ** 2
    A[idx[1:], idx[1:] - 1] = 1.0 / h ** 2
    A[0, 1] = 2.0 / h ** 2  # even ghost across r=0
    return A


def discrete_t1(p, n_r, n_theta):
    """Instant where the discrete Jacobian has the ``cos(theta)`` kernel, and that kernel's radial profile."""
    def top(t):
        return np.max(np.linalg.eigvals(_radial_operator(p, t, n_r, n_theta)).real)

    t1 = spectrum.bifurcation_instant(p, 1, n_grid=1001)
    lo, hi = 0.9 * t1, 1.1 * t1
    if not top(lo) < 0 < top(hi):
        raise BifurcationError(f"could not bracket the discrete t_1 near {t1}")
    t1h = brentq(top, lo, hi, xtol=1e-14)
    w, V = np.linalg.eig(_radial_operator(p, t1h, n_r, n_theta))
    v = V[:, np.argmax(w.real)].real
    v = v / v[np.argmax(np.abs(v))]
    return float(t1h), v


def kernel_mode(p, n_r, n_theta):
    """``(t_1h, u_1)``: ``u_1 = v_1(r) cos(theta)`` normalized in the full-domain L2 norm."""
    t1h, v = discrete_t1(p, n_r, n_theta)
    th = (np.arange(n_theta) + 0.5) * np.pi / n_theta
    u1 = (v[:, None] * np.cos(th)[None, :]).ravel()
    w = quadrature_weights(n_r, n_theta)
    u1 /= np.sqrt(np.sum(w * u1 * u1))
    return t1h, u1


def _bordered_newton(pg, t, row, rhs_fn, tol, max_iter, scheme):
    """Newton on ``{H(u,t)=0, row . (x,t) = rhs}``; ``rhs_fn(x, t)`` returns the constraint residual."""
    x = pg.unknowns.copy()
    history = []
    for it in range(max_iter + 1):
        cur = pg.with_unknowns(x, t)
        res = mean_curvature(cur, scheme).ravel()
        c = rhs_fn(x, t)
        err = np.max(np.abs(res))
        history.append(err)
        if err < tol and abs(c) < tol:
            return cur, err
        if it == max_iter:
            break
        if len(history) >= 4 and history[-1] > history[-2] > history[-3] > history[-4]:
            raise BifurcationError(f"bordered newton diverging: {history[-4:]}")
        J = jacobian(cur, scheme, res)
        Ht = _dH_dt(cur, res, scheme)
        M = sp.bmat([[J, Ht[:, None]], [row[None, :-1], np.array([[row[-1]]])]], format="csc")
        dz = splu(M).solve(-np.concatenate([res, [c]]))
        x = x + dz[:-1]
        t = t + dz[-1]
        _check_bound(x)
    raise BifurcationError(f"bordered newton failed (|H|={history[-1]:.3g})")


def branch_switch(p, amp=1e-2, tol=1e-10, n_r=65, n_theta=64, max_iter=30, scheme="hybrid"):
    """First nontrivial state on the branch leaving the catenoid at ``t_1``.

    Solves ``H(t, u) = 0`` together with ``<u, u_1> = amp``.
    """
    if p < 2:
        raise BifurcationError(f"p={p}: no bifurcation instant t_1 (mu_1 > -1 for all t)")
    t1h, u1 = kernel_mode(p, n_r, n_theta)
    pg = PerturbationGrid.zeros(p, t1h, n_r, n_theta)
    if amp == 0:
        return BranchState(t1h, pg, 0.0, float(np.max(np.abs(mean_curvature(pg, scheme)))),
                           kernel=u1)
    w = quadrature_weights(n_r, n_theta)
    wu1 = w * u1
    pg = pg.with_unknowns(amp * u1)
    row = np.concatenate([wu1, [0.0]])
    state, err = _bordered_newton(pg, t1h, row, lambda x, t: wu1 @ x - amp,
                                  tol, max_iter, scheme)
    return BranchState(state.t, state, float(wu1 @ state.unknowns), float(err), kernel=u1)


def mirror_state(state: BranchState) -> BranchState:
    """Image under ``theta -> pi - theta`` (reverses the sign of the kernel component)."""
    u = state.u.u[:, ::-1].copy()
    pg = PerturbationGrid(state.u.p, state.u.t, u)
    amp = state.amplitude
    if state.kernel is not None:
        w = quadrature_weights(pg.n_r, pg.n_theta)
        amp = float((w * state.kernel) @ pg.unknowns)
    return replace(state, u=pg, amplitude=amp)


def continue_branch(start: BranchState, n_steps=10, ds=None, tol=1e-10, max_iter=20,
                    scheme="hybrid", direction=1.0):
    """Pseudo-arclength continuation in ``(u, t)`` from ``start``.

    The first tangent is ``(u_1, 0)`` (times ``direction``); later ones are
    secants between accepted states.  A failed corrector halves ``ds`` up to 5
    times.
    """
    n_r, n_th = start.u.n_r, start.u.n_theta
    w = quadrature_weights(n_r, n_th)
    u1 = start.kernel
    if u1 is None:
        _, u1 = kernel_mode(start.p, n_r, n_th)
    if ds is None:
        ds = abs(start.amplitude) if start.amplitude else 1e-2

    def ip(a, b):
        return float(np.sum(w * a[:-1] * b[:-1]) + a[-1] * b[-1])

    z = np.concatenate([start.u.unknowns, [start.t]])
    tau = direction * np.concatenate([u1, [0.0]])
    tau /= np.sqrt(ip(tau, tau))
    states = [start]
    for k in range(1, n_steps + 1):
        step = ds
        for attempt in range(6):
            zp = z + step * tau
            row = np.concatenate([w * tau[:-1], [tau[-1]]])
            rhs = lambda x, t: float(row[:-1] @ (x - zp[:-1]) + row[-1] * (t - zp[-1]))
            try:
                pg, err = _bordered_newton(start.u.with_unknowns(zp[:-1], zp[-1]), zp[-1],
                                           row, rhs, tol, max_iter, scheme)
                break
            except BifurcationError as exc:
                log.info("continuation step %d failed (%s); halving ds", k, exc)
                step *= 0.5
        else:
            raise BifurcationError(f"continuation step {k} failed after 5 halvings")
        znew = np.concatenate([pg.unknowns, [pg.t]])
        sec = znew - z
        tau = sec / np.sqrt(ip(sec, sec))
        z = znew
        states.append(BranchState(pg.t, pg, float((w * u1) @ pg.unknowns), float(err),
                                  step_index=k, kernel=u1))
    return states


# ---------------------------------------------------------------------------
# diagnostics


@dataclass
class NonsymmetryReport:
    metric: float
    u_min: float
    u_max: float
    noise_floor: float = 0.0

    @property
    def both_signs(self):
        return self.u_min < 0 < self.u_max

    @property
    def significant(self):
        return self.metric > 10.0 * self.noise_floor


def _axis_distance_mid(pg):
    """Distance of ``Y(0, theta)`` from the axis (``N`` is horizontal at ``r = 0``)."""
    return 1.0 + pg.u[0]


def nonsymmetry_metric(state, noise_floor=None) -> NonsymmetryReport:
    """Angular variance of the mid-parallel axis distance, with signed extremes of ``u``."""
    pg = state.u if isinstance(state, BranchState) else state
    rho = _axis_distance_mid(pg)
    floor = trivial_noise_floor(pg.p, pg.t, pg.n_r, pg.n_theta) if noise_floor is None else noise_floor
    return NonsymmetryReport(float(np.var(rho)), float(pg.u[0].min()), float(pg.u[0].max()),
                             float(floor))


def trivial_noise_floor(p, t, n_r, n_theta, scheme="hybrid"):
    """Nonsymmetry of the trivial branch solved on this grid and on the half grid.

    Returns the larger of the two metrics, their difference and machine epsilon.
    """
    vals = []
    for nr, nt in ((n_r, n_theta), ((n_r + 1) // 2, max(4, n_theta // 2))):
        pg = newton_solve(PerturbationGrid.zeros(p, t, nr, nt), tol=1e-12, scheme=scheme)
        vals.append(float(np.var(_axis_distance_mid(pg))))
    return max(vals[0], vals[1], abs(vals[0] - vals[1]), EPS)


@dataclass
class BoundaryReport:
    max_boundary_u: float
    radius_deviation: float
    height_deviation: float
    windings: tuple
    p: int

    @property
    def passed(self):
        return (self.max_boundary_u == 0.0 and self.radius_deviation < 1e-12
                and self.height_deviation < 1e-12 and self.windings == (self.p, self.p))


def surface_points(pg: PerturbationGrid):
    """``(r, theta, Y)`` of the full reconstructed surface; ``Y`` has shape ``(3, n_r', n_theta')``."""
    r, theta, u = pg.full_grid()
    g = _frame(pg.p, pg.t, r[:, None], theta[None, :])
    return r, theta, g["X"] + u * g["N"]


def boundary_cover_check(state) -> BoundaryReport:
    """Both boundary curves must be the ``p``-covered circles of ``X_t``."""
    from .annulus import winding_degree

    pg = state.u if isinstance(state, BranchState) else state
    r, theta, Y = surface_points(pg)
    R0 = np.cosh(pg.t * pg.p)
    rad, hgt, wind = [], [], []
    for row, sign in ((0, -1.0), (-1, 1.0)):
        x, y, z = Y[0, row], Y[1, row], Y[2, row]
        rad.append(np.max(np.abs(np.hypot(x, y) - R0)) / R0)
        hgt.append(np.max(np.abs(z - sign * pg.t * pg.p)))
        wind.append(winding_degree(x + 1j * y))
    return BoundaryReport(float(np.max(np.abs(pg.u[-1]))), float(max(rad)), float(max(hgt)),
                          tuple(int(k) for k in wind), pg.p)


def surface_area(pg: PerturbationGrid) -> float:
    """Discrete area of ``Y`` over the full domain (midpoint rule on quads)."""
    _, _, Y = surface_points(pg)
    Y = np.concatenate([Y, Y[:, :, :1]], axis=2)
    a = Y[:, 1:, 1:] - Y[:, :-1, :-1]
    b = Y[:, :-1, 1:] - Y[:, 1:, :-1]
    return float(0.5 * np.sum(np.linalg.norm(np.cross(a, b, axis=0), axis=0)))


def state_mesh(state, metadata=None):
    """Closed quad mesh of the full surface ``Y`` (periodic in ``theta``)."""
    from .lift import SurfaceMesh

    pg = state.u if isinstance(state, BranchState) else state
    _, _, Y = surface_points(pg)
    meta = {"kind": "perturbed_catenoid", "p": pg.p, "t": pg.t}
    meta.update(metadata or {})
    return SurfaceMesh.from_grid(Y, wrap=True, metadata=meta)


def branch_rows(states, noise_floor=None):
    """``(step, t, amplitude, residual, nonsymmetry)`` rows for a list of states."""
    rows = []
    for s in states:
        rep = nonsymmetry_metric(s, noise_floor=0.0 if noise_floor is None else noise_floor)
        rows.append([s.step_index, s.t, s.amplitude, s.residual_norm, rep.metric])
    return rows
