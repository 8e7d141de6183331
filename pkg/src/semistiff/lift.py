"""Minimal surfaces ``X = (u, h)`` built from solutions on the annulus, and mesh I/O.

A harmonic ``u`` with constant ``z^2 H_u = c`` becomes a conformal minimal
immersion once a third coordinate ``h`` with ``H_u + (d_z h)^2 = 0`` is added:

* ``c < 0``: ``h = 2 sqrt|c| ln r`` (catenoid type, outer circle at height 0);
* ``c > 0``: ``h = -2 sqrt(c) theta`` (helicoid type, multivalued, cut at ``theta = 0``).
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .annulus import AnnulusGrid, as_field, hopf_constant_check, hopf_density

log = logging.getLogger(__name__)


class LiftError(ValueError):
    """The field's Hopf constant has the wrong sign for the requested lift."""


@dataclass
class SurfaceMesh:
    vertices: np.ndarray
    quads: np.ndarray
    dims: tuple
    metadata: dict = field(default_factory=dict)
    boundary: np.ndarray | None = None
    """Boolean mask of vertices on the parameter boundary."""

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.quads = np.asarray(self.quads, dtype=np.int64).reshape(-1, 4)
        if self.quads.size and (self.quads.min() < 0 or self.quads.max() >= len(self.vertices)):
            raise ValueError("face references a missing vertex")
        if self.boundary is None:
            self.boundary = np.zeros(len(self.vertices), bool)

    @classmethod
    def from_grid(cls, X, wrap=False, metadata=None):
        """Quad mesh of a ``(3, n1, n2)`` parameter grid, row-major; ``wrap`` closes the second index."""
        X = np.asarray(X, dtype=float)
        _, n1, n2 = X.shape
        verts = X.reshape(3, -1).T
        idx = np.arange(n1 * n2).reshape(n1, n2)
        if wrap:
            nxt = np.roll(idx, -1, axis=1)
            a, b, c, d = idx[:-1], idx[1:], nxt[1:], nxt[:-1]
        else:
            a, b, c, d = idx[:-1, :-1], idx[1:, :-1], idx[1:, 1:], idx[:-1, 1:]
        quads = np.stack([a.ravel(), b.ravel(), c.ravel(), d.ravel()], axis=1)
        bnd = np.zeros((n1, n2), bool)
        bnd[0] = bnd[-1] = True
        if not wrap:
            bnd[:, 0] = bnd[:, -1] = True
        return cls(verts, quads, (n1, n2), dict(metadata or {}), bnd.ravel())

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.quads)

    def edge_lengths(self):
        v = self.vertices[self.quads]
        return np.linalg.norm(v - np.roll(v, -1, axis=1), axis=2)

    def resolution(self):
        """Longest edge."""
        return float(self.edge_lengths().max())

    def face_normals(self):
        v = self.vertices[self.quads]
        n = np.cross(v[:, 2] - v[:, 0], v[:, 3] - v[:, 1])
        return n / np.linalg.norm(n, axis=1, keepdims=True)

    def orientation_consistent(self):
        """No directed edge is used by two faces (neighbouring faces agree on orientation)."""
        q = self.quads
        e = np.stack([q, np.roll(q, -1, axis=1)], axis=2).reshape(-1, 2)
        return len({tuple(x) for x in e.tolist()}) == len(e)


def _height_derivatives(kind, c, r, theta):
    r, theta = np.broadcast_arrays(np.asarray(r, float), np.asarray(theta, float))
    if kind == "catenoid":
        s = np.sqrt(-c)
        return 2 * s * np.log(r), 2 * s / r, np.zeros_like(r)
    s = np.sqrt(c)
    return -2 * s * theta, np.zeros_like(r), np.full_like(r, -2 * s)


@dataclass(frozen=True)
class LiftHeight:
    """Third coordinate of a lift; exposes ``derivatives(r, theta) -> (h, h_r, h_theta)``."""

    kind: str
    c: float

    def __call__(self, r, theta):
        return self.derivatives(r, theta)[0]

    def derivatives(self, r, theta):
        return _height_derivatives(self.kind, self.c, r, theta)


def catenoid_height(c):
    if not c < 0:
        raise LiftError(f"catenoid-type lift needs c < 0, got c = {c:.3g}")
    return LiftHeight("catenoid", float(c))


def helicoid_height(c):
    if not c > 0:
        raise LiftError(f"helicoid-type lift needs c > 0, got c = {c:.3g}")
    return LiftHeight("helicoid", float(c))


def lift_catenoid_type(u, grid: AnnulusGrid, c_tol=1e-12) -> SurfaceMesh:
    """Mesh of ``(Re u, Im u, 2 sqrt|c| ln r)`` over the periodic field grid."""
    f = as_field(u, grid)
    rep = hopf_constant_check(f, grid)
    if not rep.c_estimate < -c_tol:
        raise LiftError(f"catenoid-type lift needs c < 0, got c = {rep.c_estimate:.3g}")
    h = catenoid_height(rep.c_estimate)
    R, T = grid.mesh()
    w = f(R, T)
    X = np.stack([w.real, w.imag, h(R, T)])
    meta = {"kind": "catenoid", "c": rep.c_estimate, "rho": grid.rho,
            "z0": float(np.sqrt(-rep.c_estimate) * np.log(grid.rho))}
    return SurfaceMesh.from_grid(X, wrap=True, metadata=meta)


def lift_helicoid_type(u, grid: AnnulusGrid, c_tol=1e-12) -> SurfaceMesh:
    """Mesh of ``(Re u, Im u, -2 sqrt(c) theta)`` on ``[rho, 1] x [0, 2 pi]``, open along the seam."""
    f = as_field(u, grid)
    rep = hopf_constant_check(f, grid)
    if not rep.c_estimate > c_tol:
        raise LiftError(f"helicoid-type lift needs c > 0, got c = {rep.c_estimate:.3g}")
    h = helicoid_height(rep.c_estimate)
    th = np.linspace(0, 2 * np.pi, grid.n_theta + 1)
    R, T = np.meshgrid(grid.r, th, indexing="ij")
    w = f(R, T)
    X = np.stack([w.real, w.imag, h(R, T)])
    meta = {"kind": "helicoid", "c": rep.c_estimate, "rho": grid.rho}
    return SurfaceMesh.from_grid(X, wrap=False, metadata=meta)


def _h_derivatives(h, grid, R, T):
    if hasattr(h, "derivatives"):
        return h.derivatives(R, T)
    if np.isscalar(h) or h is None:
        z = np.zeros_like(R)
        return z + (h or 0.0), z, z
    hr, ht = grid.dr, grid.dtheta
    d_r = (-h(R + 2 * hr, T) + 8 * h(R + hr, T) - 8 * h(R - hr, T) + h(R - 2 * hr, T)) / (12 * hr)
    d_t = (-h(R, T + 2 * ht) + 8 * h(R, T + ht) - 8 * h(R, T - ht) + h(R, T - 2 * ht)) / (12 * ht)
    return h(R, T), d_r, d_t


def conformality_residual(u, h, grid: AnnulusGrid) -> float:
    """``sup |H_u + (d_z h)^2|`` over interior nodes, ``d_z = e^{-i theta}(d_r - (i/r) d_theta) / 2``."""
    f = as_field(u, grid)
    R, T = grid.mesh()
    R, T = R[1:-1], T[1:-1]
    z = R * np.exp(1j * T)
    H = hopf_density(f, R, T) / z ** 2
    _, hr, ht = _h_derivatives(h, grid, R, T)
    dzh = 0.5 * np.exp(-1j * T) * (hr - 1j * ht / R)
    return float(np.max(np.abs(H + dzh ** 2)))


def plane_symmetry_check(mesh: SurfaceMesh, z0: float) -> float:
    """Symmetric Hausdorff distance between the vertex cloud and its mirror image in ``z = z0``."""
    v = mesh.vertices
    m = v.copy()
    m[:, 2] = 2 * z0 - m[:, 2]
    d1, _ = cKDTree(v).query(m)
    d2, _ = cKDTree(m).query(v)
    return float(max(d1.max(), d2.max()))


def catenoid_profile_error(mesh: SurfaceMesh, a: float, z0: float) -> float:
    """Max deviation of the axis distance from ``a cosh((z - z0) / a)``."""
    v = mesh.vertices
    R = np.hypot(v[:, 0], v[:, 1])
    return float(np.max(np.abs(R - a * np.cosh((v[:, 2] - z0) / a))))


# ---------------------------------------------------------------------------
# export


def export_mesh(mesh: SurfaceMesh, path, fmt=None, sidecar=True) -> Path:
    """Write an ASCII OBJ or PLY file (plus ``<path>.json`` metadata)."""
    path = Path(path)
    fmt = (fmt or path.suffix.lstrip(".")).lower()
    if fmt not in ("obj", "ply"):
        raise ValueError(f"unsupported mesh format {fmt!r}")
    lines = []
    if fmt == "obj":
        lines.append(f"# vertices {mesh.n_vertices} faces {mesh.n_faces}")
        lines += [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
        lines += ["f " + " ".join(str(i + 1) for i in q) for q in mesh.quads]
    else:
        lines += ["ply", "format ascii 1.0", f"element vertex {mesh.n_vertices}",
                  "property double x", "property double y", "property double z",
                  f"element face {mesh.n_faces}", "property list uchar int vertex_indices",
                  "end_header"]
        lines += [f"{x:.17g} {y:.17g} {z:.17g}" for x, y, z in mesh.vertices]
        lines += ["4 " + " ".join(str(i) for i in q) for q in mesh.quads]
    path.write_text("\n".join(lines) + "\n")
    if sidecar:
        meta = dict(mesh.metadata)
        meta["dims"] = list(mesh.dims)
        meta["format"] = fmt
        Path(str(path) + ".json").write_text(json.dumps(meta, indent=2, default=float))
    return path


def import_mesh(path) -> SurfaceMesh:
    """Read back a mesh written by :func:`export_mesh`."""
    path = Path(path)
    text = path.read_text().splitlines()
    meta = {}
    side = Path(str(path) + ".json")
    if side.exists():
        meta = json.loads(side.read_text())
    dims = tuple(meta.pop("dims", (0, 0)))
    meta.pop("format", None)
    if path.suffix.lower() == ".obj":
        verts = [list(map(float, ln.split()[1:4])) for ln in text if ln.startswith("v ")]
        faces = [[int(k) - 1 for k in ln.split()[1:]] for ln in text if ln.startswith("f ")]
    else:
        nv = nf = 0
        start = 0
        for i, ln in enumerate(text):
            if ln.startswith("element vertex"):
                nv = int(ln.split()[-1])
            elif ln.startswith("element face"):
                nf = int(ln.split()[-1])
            elif ln.strip() == "end_header":
                start = i + 1
                break
        verts = [list(map(float, ln.split())) for ln in text[start:start + nv]]
        faces = [list(map(int, ln.split()[1:])) for ln in text[start + nv:start + nv + nf]]
    return SurfaceMesh(np.array(verts), np.array(faces, dtype=np.int64), dims, meta)
