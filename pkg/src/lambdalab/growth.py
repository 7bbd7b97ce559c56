"""Area of a surface inside Euclidean balls and polynomial growth exponents."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .analytic import CanonicalSurface, Kind
from .mesh import TriMesh

__all__ = [
    "GrowthFit",
    "ball_area_analytic",
    "ball_area_mesh",
    "fit_exponent",
    "bound_exponent",
    "growth_beta",
    "default_radii",
    "growth_fit",
    "mesh_growth_fit",
]


def ball_area_analytic(surface: CanonicalSurface, r: float) -> float:
    """``Area(B_r(0) ∩ M)`` for a model surface centred at the origin."""
    if not r > 0:
        raise ValueError("ball radius must be positive")
    n, k = surface.n, surface.k
    if surface.kind is Kind.PLANE:
        return analytic.unit_ball_volume(n) * r**n
    r0 = surface.r
    sphere_area = analytic.unit_sphere_area(k) * r0**k
    if surface.kind is Kind.SPHERE:
        return sphere_area if r >= r0 else 0.0
    if r <= r0:
        return 0.0
    return sphere_area * analytic.unit_ball_volume(n - k) * math.sqrt(r * r - r0 * r0) ** (n - k)


def _segment_pieces(A, B, rho2):
    """Signed area of disk ∩ triangle (0, A, B) for stacked 2D edges."""
    D = B - A
    dd = np.einsum("ij,ij->i", D, D)
    ad = np.einsum("ij,ij->i", A, D)
    aa = np.einsum("ij,ij->i", A, A)
    disc = ad * ad - dd * (aa - rho2)
    hit = disc > 0
    sq = np.sqrt(np.where(hit, disc, 0.0))
    t1 = np.where(hit, np.clip((-ad - sq) / dd, 0.0, 1.0), 0.0)
    t2 = np.where(hit, np.clip((-ad + sq) / dd, 0.0, 1.0), 0.0)
    P = A + t1[:, None] * D
    Q = A + t2[:, None] * D

    def cross2(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    def sector(u, v):
        return 0.5 * rho2 * np.arctan2(cross2(u, v), np.einsum("ij,ij->i", u, v))

    inside = 0.5 * cross2(P, Q)
    return np.where(hit, sector(A, P) + inside + sector(Q, B), sector(A, B))


def ball_area_mesh(mesh: TriMesh, r: float) -> float:
    """Exact area of the triangles clipped to the ball ``|X| <= r``.

    Each triangle is cut by the disk in which its plane meets the ball,
    using the signed edge decomposition of polygon-circle intersection.
    """
    if not r > 0:
        raise ValueError("ball radius must be positive")
    P = mesh.positions[mesh.triangles]
    areas = mesh.triangle_areas
    inside = np.all(np.einsum("fvj,fvj->fv", P, P) <= r * r, axis=1)
    total = areas[inside].sum()
    cut = ~inside
    if not np.any(cut):
        return float(total)
    P = P[cut]
    nrm = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    nrm /= np.linalg.norm(nrm, axis=1, keepdims=True)
    dist = np.einsum("ij,ij->i", P[:, 0], nrm)
    rho2 = r * r - dist * dist
    live = rho2 > 0
    if not np.any(live):
        return float(total)
    P, nrm, dist, rho2 = P[live], nrm[live], dist[live], rho2[live]
    centre = dist[:, None] * nrm
    e1 = P[:, 1] - P[:, 0]
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(nrm, e1)
    rel = P - centre[:, None, :]
    uv = np.stack([np.einsum("fvj,fj->fv", rel, e1), np.einsum("fvj,fj->fv", rel, e2)], axis=-1)
    clipped = np.zeros(len(P))
    for a, b in ((0, 1), (1, 2), (2, 0)):
        clipped += _segment_pieces(uv[:, a], uv[:, b], rho2)
    return float(total + np.abs(clipped).sum())


def fit_exponent(samples):
    """Least-squares fit of ``log area = log C + d log r``.

    Returns
    -------
    (C, d)
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] != 2 or len(samples) < 4:
        raise ValueError("need at least 4 (r, area) samples")
    r, area = samples.T
    if np.any(r < 1):
        raise ValueError("growth samples need r >= 1")
    if np.any(np.diff(r) <= 0):
        raise ValueError("radii must be strictly increasing")
    if np.any(area <= 0):
        raise ValueError("areas must be positive for a log-log fit")
    x, y = np.log(r), np.log(area)
    d, logC = np.polyfit(x, y, 1)
    if np.ptp(y) == 0:
        d, logC = 0.0, y[0]
    return float(math.exp(logC)), float(d)


def growth_beta(inf_gap2: float) -> float:
    """``beta = inf (lam - H)^2 / 4`` given ``inf (lam - H)^2``."""
    return 0.25 * inf_gap2


def bound_exponent(n: int, lam: float, H_const: float) -> float:
    """Growth exponent ``n + lam^2/2 - 2 beta - inf H^2 / 2`` for constant ``H``."""
    beta = growth_beta((lam - H_const) ** 2)
    return n + lam**2 / 2.0 - 2.0 * beta - H_const**2 / 2.0


def default_radii(surface: CanonicalSurface, count: int = 6) -> np.ndarray:
    """Geometric radius grid starting past the transition region of the surface."""
    start = 1.0 if surface.kind is Kind.PLANE else max(1.0, 8.0 * surface.r)
    return start * 2.0 ** np.arange(count)


@dataclass(frozen=True)
class GrowthFit:
    samples: np.ndarray
    C: float
    d: float
    bound_exponent: float
    beta: float

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=float)
        if np.any(s[:, 0] < 1) or np.any(np.diff(s[:, 0]) <= 0):
            raise ValueError("sample radii must be >= 1 and strictly increasing")
        if np.any(s[:, 1] < 0) or np.any(np.diff(s[:, 1]) < 0):
            raise ValueError("sample areas must be nonnegative and nondecreasing")
        object.__setattr__(self, "samples", s)

    def record(self):
        return {"C": self.C, "d": self.d, "bound_exponent": self.bound_exponent, "beta": self.beta}

    def write(self, csv_path, json_path):
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["r", "area"])
            for r, a in self.samples:
                w.writerow([format(r, ".17g"), format(a, ".17g")])
        with open(json_path, "w") as fh:
            json.dump(self.record(), fh, indent=2)


def growth_fit(samples, n: int, lam: float, inf_H2: float, inf_gap2: float) -> GrowthFit:
    """Fit samples and attach the bound exponent from ``inf H^2`` and ``inf (lam-H)^2``."""
    C, d = fit_exponent(samples)
    beta = growth_beta(inf_gap2)
    bound = n + lam**2 / 2.0 - 2.0 * beta - inf_H2 / 2.0
    return GrowthFit(samples=np.asarray(samples, dtype=float), C=C, d=d, bound_exponent=bound, beta=beta)


def mesh_growth_fit(mesh: TriMesh, radii) -> GrowthFit:
    """Fit ball areas of a surface mesh (n = 2).

    ``lam`` is the Gaussian-weighted mean of ``<X, N> + H`` over interior
    vertices; the infima in the bound exponent are taken over the same set.
    """
    from .mesh import gaussian_measure, shape_operator, vertex_normals

    normals = vertex_normals(mesh)
    H = shape_operator(mesh, normals).H
    interior = ~mesh.boundary_vertices
    q = np.einsum("ij,ij->i", mesh.positions, normals) + H
    w = gaussian_measure(mesh).gauss_weight[interior]
    lam = float(np.dot(q[interior], w) / w.sum())
    Hi = H[interior]
    samples = [(float(r), ball_area_mesh(mesh, float(r))) for r in radii]
    return growth_fit(samples, 2, lam, float(np.min(Hi**2)), float(np.min((lam - Hi) ** 2)))
