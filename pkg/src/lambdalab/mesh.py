"""Oriented triangle surfaces in R^3 and their discrete geometry.

Generators wind every closed surface so that triangle normals point inward,
matching the convention of :mod:`lambdalab.analytic` (unit sphere: N = -X,
H = 2). Curvature is estimated per vertex by least-squares quadric fitting
over the 2-ring, the Gaussian measure uses barycentric (one third) vertex
areas.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import sparse

from .analytic import CurvatureSummary

logger = logging.getLogger(__name__)

__all__ = [
    "MeshError",
    "TriMesh",
    "WeightedMeasure",
    "VertexField",
    "icosphere",
    "sphere",
    "ellipsoid",
    "perturbed_sphere",
    "cylinder_segment",
    "flat_patch",
    "generate",
    "vertex_normals",
    "shape_operator",
    "cotan_weights",
    "cotan_mean_curvature",
    "gaussian_measure",
    "lambda_residual",
]

# Relative floor for triangle areas (against the mean triangle area).
_DEGENERATE_AREA = 1e-12


class MeshError(ValueError):
    """Invalid mesh topology or geometry, or a failed per-vertex estimate."""


def _cross(a, b):
    return np.cross(a, b)


class TriMesh:
    """Oriented triangle mesh.

    Parameters
    ----------
    positions : array_like, shape (nv, 3)
    triangles : array_like of int, shape (nf, 3)
        Vertex indices; the winding defines the orientation.

    Raises
    ------
    MeshError
        On out-of-range indices, degenerate triangles, non-manifold edges or
        inconsistent orientation.
    """

    def __init__(self, positions, triangles):
        self.positions = np.ascontiguousarray(positions, dtype=float)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise MeshError("positions must have shape (nv, 3)")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3 or len(self.triangles) == 0:
            raise MeshError("triangles must have shape (nf, 3) with nf >= 1")
        if not np.all(np.isfinite(self.positions)):
            raise MeshError("positions contain non-finite values")
        nv = len(self.positions)
        if self.triangles.min() < 0 or self.triangles.max() >= nv:
            raise MeshError("triangle index out of range")
        t = self.triangles
        if np.any((t[:, 0] == t[:, 1]) | (t[:, 1] == t[:, 2]) | (t[:, 0] == t[:, 2])):
            raise MeshError("triangle with repeated vertex")

        areas = self.triangle_areas
        mean_area = areas.mean()
        if not mean_area > 0:
            raise MeshError("mesh has zero total area")
        bad = np.flatnonzero(areas < _DEGENERATE_AREA * mean_area)
        if bad.size:
            raise MeshError(f"degenerate triangle(s) {bad[:5].tolist()} (area below 1e-12 x mean)")
        self._check_orientation()

    def _check_orientation(self):
        nv = len(self.positions)
        directed = self._directed_edges
        key = directed[:, 0] * nv + directed[:, 1]
        uniq, counts = np.unique(key, return_counts=True)
        if np.any(counts > 1):
            k = uniq[counts > 1][0]
            raise MeshError(
                f"inconsistent orientation: directed edge ({k // nv}, {k % nv}) used by two triangles"
            )
        undirected_counts = np.unique(np.sort(directed, axis=1) @ np.array([nv, 1]), return_counts=True)[1]
        if np.any(undirected_counts > 2):
            raise MeshError("non-manifold edge shared by more than two triangles")

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def _directed_edges(self):
        t = self.triangles
        return np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]])

    @cached_property
    def edges(self) -> np.ndarray:
        """Unique undirected edges ``(i, j)`` with ``i < j``, sorted."""
        e = np.sort(self._directed_edges, axis=1)
        return np.unique(e, axis=0)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        nv = self.n_vertices
        d = self._directed_edges
        fwd = d[:, 0] * nv + d[:, 1]
        rev = d[:, 1] * nv + d[:, 0]
        return d[~np.isin(fwd, rev)]

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        """Boolean mask of vertices on an open boundary."""
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_edges.ravel()] = True
        return mask

    @property
    def is_closed(self) -> bool:
        return len(self.boundary_edges) == 0

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + self.n_triangles

    @property
    def triangle_vectors(self) -> np.ndarray:
        """Unnormalized triangle normals (twice the area times the unit normal)."""
        p = self.positions[self.triangles]
        return _cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])

    @property
    def triangle_areas(self) -> np.ndarray:
        return 0.5 * np.linalg.norm(self.triangle_vectors, axis=1)

    @property
    def total_area(self) -> float:
        return float(self.triangle_areas.sum())

    @property
    def edge_lengths(self) -> np.ndarray:
        e = self.edges
        return np.linalg.norm(self.positions[e[:, 1]] - self.positions[e[:, 0]], axis=1)

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        e = self.edges
        nv = self.n_vertices
        ones = np.ones(len(e), dtype=np.int8)
        a = sparse.coo_matrix((ones, (e[:, 0], e[:, 1])), shape=(nv, nv))
        return ((a + a.T) > 0).astype(np.int8).tocsr()

    @cached_property
    def two_ring(self):
        """Padded 2-ring neighbourhoods.

        Returns
        -------
        index : ndarray of int, shape (nv, m)
            Neighbour indices, padded with the vertex itself.
        valid : ndarray of bool, shape (nv, m)
        """
        a = self.adjacency.astype(np.int32)
        ring = ((a + a @ a) > 0).tolil()
        ring.setdiag(0)
        ring = ring.tocsr()
        ring.eliminate_zeros()
        counts = np.diff(ring.indptr)
        m = int(counts.max())
        nv = self.n_vertices
        index = np.repeat(np.arange(nv)[:, None], m, axis=1)
        valid = np.arange(m)[None, :] < counts[:, None]
        index[valid] = ring.indices
        return index, valid

    _TOPOLOGY_CACHE = ("_directed_edges", "edges", "boundary_edges", "boundary_vertices", "adjacency", "two_ring")

    def with_positions(self, positions) -> "TriMesh":
        """Same connectivity with new vertex positions.

        Topology caches are shared with ``self``; geometry (finite positions,
        non-degenerate triangles) is revalidated.
        """
        positions = np.ascontiguousarray(positions, dtype=float)
        if positions.shape != self.positions.shape:
            raise MeshError("new positions must keep the vertex count")
        if not np.all(np.isfinite(positions)):
            raise MeshError("positions contain non-finite values")
        other = object.__new__(TriMesh)
        other.positions = positions
        other.triangles = self.triangles
        for name in self._TOPOLOGY_CACHE:
            if name in self.__dict__:
                other.__dict__[name] = self.__dict__[name]
        areas = other.triangle_areas
        if not areas.mean() > 0 or np.any(areas < _DEGENERATE_AREA * areas.mean()):
            raise MeshError("degenerate triangle after position update")
        return other

    def flipped(self) -> "TriMesh":
        return TriMesh(self.positions, self.triangles[:, ::-1])


@dataclass(frozen=True)
class WeightedMeasure:
    """Per-vertex lumped area ``a_i`` and Gaussian weight ``w_i = exp(-|X_i|^2/2) a_i``."""

    lumped_area: np.ndarray
    gauss_weight: np.ndarray

    @property
    def point_weight(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return self.gauss_weight / self.lumped_area

    @property
    def total_weight(self) -> float:
        return float(np.sum(self.gauss_weight))


@dataclass(frozen=True)
class VertexField:
    """Per-vertex scalar values, with an optional mask of excluded vertices."""

    values: np.ndarray
    excluded: np.ndarray | None = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.excluded is not None:
            excluded = np.asarray(self.excluded, dtype=bool)
            if excluded.shape != values.shape:
                raise ValueError("excluded mask must match the field length")
            object.__setattr__(self, "excluded", excluded)

    def __len__(self):
        return len(self.values)

    @property
    def included(self) -> np.ndarray:
        if self.excluded is None:
            return self.values
        return self.values[~self.excluded]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.included)))

    def median_abs(self) -> float:
        return float(np.median(np.abs(self.included)))

    def weighted_l2(self, weights) -> float:
        """``sqrt(sum_i w_i f_i^2)`` over included vertices."""
        weights = np.asarray(weights, dtype=float)
        if self.excluded is not None:
            weights = weights[~self.excluded]
        return float(math.sqrt(np.sum(weights * self.included**2)))


# --------------------------------------------------------------------------
# generators


def _orient_inward(positions, triangles):
    """Flip the whole winding if the signed volume says normals point outward."""
    p = positions[triangles]
    signed = np.einsum("ij,ij->i", p[:, 0], _cross(p[:, 1], p[:, 2])).sum()
    if signed > 0:
        triangles = triangles[:, ::-1].copy()
    return triangles


def icosphere(level: int):
    """Unit icosphere arrays ``(positions, triangles)`` with ``10*4**level + 2`` vertices."""
    if int(level) != level or level < 0:
        raise ValueError("subdivision level must be a non-negative integer")
    t = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    for _ in range(int(level)):
        verts, faces = _subdivide(verts, faces)
    return verts, _orient_inward(verts, faces)


def _subdivide(verts, faces):
    nv = len(verts)
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e = np.sort(e, axis=1)
    uniq, inverse = np.unique(e, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    mid = 0.5 * (verts[uniq[:, 0]] + verts[uniq[:, 1]])
    mid /= np.linalg.norm(mid, axis=1, keepdims=True)
    nf = len(faces)
    ab, bc, ca = (inverse[:nf] + nv, inverse[nf : 2 * nf] + nv, inverse[2 * nf :] + nv)
    a, b, c = faces[:, 0], faces[:, 1], faces[:, 2]
    new_faces = np.concatenate(
        [
            np.stack([a, ab, ca], axis=1),
            np.stack([b, bc, ab], axis=1),
            np.stack([c, ca, bc], axis=1),
            np.stack([ab, bc, ca], axis=1),
        ]
    )
    return np.concatenate([verts, mid]), new_faces


def sphere(r: float = 1.0, level: int = 3) -> TriMesh:
    if not r > 0:
        raise ValueError("radius must be positive")
    v, f = icosphere(level)
    return TriMesh(r * v, f)


def ellipsoid(a: float, b: float, c: float, level: int = 3) -> TriMesh:
    if not (a > 0 and b > 0 and c > 0):
        raise ValueError("semi-axes must be positive")
    v, f = icosphere(level)
    return TriMesh(v * np.array([a, b, c]), f)


def _radial_bump(directions, seed: int, n_modes: int = 6):
    """Smooth deterministic function on the unit sphere with values in [-1, 1]."""
    rng = np.random.default_rng(seed)
    freqs = rng.normal(size=(n_modes, 3))
    freqs *= rng.uniform(1.0, 3.0, size=(n_modes, 1)) / np.linalg.norm(freqs, axis=1, keepdims=True)
    phases = rng.uniform(0.0, 2.0 * math.pi, size=n_modes)
    amps = rng.uniform(0.5, 1.0, size=n_modes)
    g = np.cos(directions @ freqs.T + phases) @ amps
    return g / amps.sum()


def perturbed_sphere(r: float = 1.0, amplitude: float = 0.1, seed: int = 0, level: int = 3) -> TriMesh:
    """Sphere with a smooth random radial perturbation of size at most ``amplitude``."""
    if not r > 0:
        raise ValueError("radius must be positive")
    if amplitude < 0:
        raise ValueError("amplitude must be non-negative")
    if amplitude >= 0.3 * r:
        raise ValueError("amplitude must stay below 0.3 * r (self-intersection risk)")
    v, f = icosphere(level)
    if amplitude == 0:
        return TriMesh(r * v, f)
    radius = r + amplitude * _radial_bump(v, seed)
    return TriMesh(radius[:, None] * v, f)


def cylinder_segment(r: float = 1.0, half_length: float = 4.0, res: int = 64, n_rings: int | None = None) -> TriMesh:
    """Open cylinder ``x^2 + y^2 = r^2``, ``|z| <= half_length``, wound inward.

    ``res`` vertices per ring; ``n_rings`` defaults to a value giving roughly
    square quads. Boundary rings are reported by ``boundary_vertices``.
    """
    if not (r > 0 and half_length > 0):
        raise ValueError("radius and half_length must be positive")
    if res < 3:
        raise ValueError("res must be at least 3")
    if n_rings is None:
        n_rings = max(2, int(round(2.0 * half_length / (2.0 * math.pi * r / res)))) + 1
    theta = 2.0 * math.pi * np.arange(res) / res
    z = np.linspace(-half_length, half_length, n_rings)
    tt, zz = np.meshgrid(theta, z)
    positions = np.stack([r * np.cos(tt), r * np.sin(tt), zz], axis=-1).reshape(-1, 3)

    j, i = np.meshgrid(np.arange(n_rings - 1), np.arange(res), indexing="ij")
    i1 = (i + 1) % res
    p00 = j * res + i
    p10 = j * res + i1
    p01 = (j + 1) * res + i
    p11 = (j + 1) * res + i1
    tri = np.concatenate(
        [np.stack([p00, p11, p10], -1).reshape(-1, 3), np.stack([p00, p01, p11], -1).reshape(-1, 3)]
    )
    mesh = TriMesh(positions, tri)
    # inward: normal of the first triangle must point towards the axis
    n0 = mesh.triangle_vectors[0]
    if np.dot(n0[:2], positions[tri[0, 0], :2]) > 0:
        mesh = mesh.flipped()
    return mesh


def flat_patch(size: float = 1.0, res: int = 16, z: float = 0.0) -> TriMesh:
    """Square grid in the plane ``z = const`` with triangle normals along +z."""
    s = np.linspace(-size, size, res + 1)
    xx, yy = np.meshgrid(s, s)
    positions = np.stack([xx, yy, np.full_like(xx, z)], -1).reshape(-1, 3)
    j, i = np.meshgrid(np.arange(res), np.arange(res), indexing="ij")
    w = res + 1
    p00, p10, p01, p11 = j * w + i, j * w + i + 1, (j + 1) * w + i, (j + 1) * w + i + 1
    tri = np.concatenate(
        [np.stack([p00, p10, p11], -1).reshape(-1, 3), np.stack([p00, p11, p01], -1).reshape(-1, 3)]
    )
    return TriMesh(positions, tri)


_GENERATORS = {
    "sphere": (sphere, ("r", "level")),
    "ellipsoid": (ellipsoid, ("a", "b", "c", "level")),
    "perturbed_sphere": (perturbed_sphere, ("r", "amplitude", "seed", "level")),
    "cylinder_segment": (cylinder_segment, ("r", "half_length", "res", "n_rings")),
    "flat_patch": (flat_patch, ("size", "res", "z")),
}


def generate(spec: dict) -> TriMesh:
    """Build a mesh from a spec such as ``{"kind": "sphere", "r": 1, "level": 3}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind not in _GENERATORS:
        raise ValueError(f"unknown mesh kind {kind!r}; expected one of {sorted(_GENERATORS)}")
    fn, allowed = _GENERATORS[kind]
    unknown = set(spec) - set(allowed)
    if unknown:
        raise ValueError(f"unknown parameter(s) {sorted(unknown)} for {kind}")
    return fn(**spec)


# --------------------------------------------------------------------------
# discrete geometry


def vertex_normals(mesh: TriMesh) -> np.ndarray:
    """Area-weighted unit vertex normals following the triangle winding."""
    tv = mesh.triangle_vectors
    acc = np.zeros((mesh.n_vertices, 3))
    for c in range(3):
        np.add.at(acc, mesh.triangles[:, c], tv)
    norm = np.linalg.norm(acc, axis=1)
    bad = np.flatnonzero(norm <= 1e-300)
    if bad.size:
        raise MeshError(f"zero accumulated normal at vertex {int(bad[0])} (degenerate star)")
    return acc / norm[:, None]


def _tangent_frames(normals):
    """Two unit tangent vectors per normal, right-handed with the normal."""
    helper = np.zeros_like(normals)
    helper[np.arange(len(normals)), np.argmin(np.abs(normals), axis=1)] = 1.0
    e1 = helper - np.einsum("ij,ij->i", helper, normals)[:, None] * normals
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = _cross(normals, e1)
    return e1, e2


def _batched_lstsq(M, y, rcond=1e-10):
    """Column-scaled minimum-norm least squares for stacked systems."""
    scale = np.linalg.norm(M, axis=1)  # (nv, ncol)
    top = scale.max(axis=1, keepdims=True)
    live = scale > 1e-12 * top
    safe = np.where(live, scale, 1.0)
    Ms = np.where(live[:, None, :], M / safe[:, None, :], 0.0)
    U, s, Vt = np.linalg.svd(Ms, full_matrices=False)
    cutoff = rcond * s[:, :1]
    inv_s = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    uty = np.einsum("vmk,vm->vk", U, y)
    coef = np.einsum("vkj,vk->vj", Vt, inv_s * uty)
    return np.where(live, coef / safe, 0.0)


def shape_operator(mesh: TriMesh, normals: np.ndarray | None = None) -> CurvatureSummary:
    """Per-vertex principal curvatures from a 2-ring quadric fit.

    In the tangent frame ``(u, v, w)`` at each vertex (``w`` along the vertex
    normal) the neighbour offsets are fitted by least squares to

        w = a u^2 + b uv + c v^2 + d u + e v + g w^2 + h uw + k vw,

    a general quadric through the vertex. Its normal curvatures at the
    vertex give the shape operator; with ``g = h = k = 0`` this is exactly
    the Hessian of the quadratic height function (corrected for the tilt
    ``d, e``). Spheres, cylinders and ellipsoids are reproduced exactly.

    Curvatures are signed so that they are positive when the surface bends
    towards the normal, and ordered ``kappa_1 >= kappa_2``.

    Raises
    ------
    MeshError
        If a vertex has fewer than five independent neighbours for the
        height terms.
    """
    if normals is None:
        normals = vertex_normals(mesh)
    X = mesh.positions
    index, valid = mesh.two_ring
    D = X[index] - X[:, None, :]
    e1, e2 = _tangent_frames(normals)
    u = np.einsum("vmj,vj->vm", D, e1)
    v = np.einsum("vmj,vj->vm", D, e2)
    w = np.einsum("vmj,vj->vm", D, normals)
    mask = valid.astype(float)
    M = np.stack([u * u, u * v, v * v, u, v, w * w, u * w, v * w], axis=-1) * mask[..., None]
    y = w * mask

    head = M[..., :5]
    head = head / np.maximum(np.linalg.norm(head, axis=1, keepdims=True), 1e-300)
    sv = np.linalg.svd(head, compute_uv=False)
    deficient = np.flatnonzero(sv[:, -1] < 1e-8 * sv[:, 0])
    if deficient.size:
        raise MeshError(
            f"rank-deficient curvature fit at vertex {int(deficient[0])} "
            "(fewer than 5 independent neighbours)"
        )

    a, b, c, d, e, g, h, k = _batched_lstsq(M, y).T
    hess = np.empty((len(X), 3, 3))
    hess[:, 0, 0] = 2 * a
    hess[:, 1, 1] = 2 * c
    hess[:, 2, 2] = 2 * g
    hess[:, 0, 1] = hess[:, 1, 0] = b
    hess[:, 0, 2] = hess[:, 2, 0] = h
    hess[:, 1, 2] = hess[:, 2, 1] = k
    grad_norm = np.sqrt(1.0 + d * d + e * e)
    t1 = np.stack([np.ones_like(d), np.zeros_like(d), d], axis=1)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.stack([np.zeros_like(d), np.ones_like(d), e], axis=1)
    t2 -= np.einsum("ij,ij->i", t2, t1)[:, None] * t1
    t2 /= np.linalg.norm(t2, axis=1, keepdims=True)
    T = np.stack([t1, t2], axis=2)  # (nv, 3, 2)
    W = np.einsum("vai,vab,vbj->vij", T, hess, T) / grad_norm[:, None, None]
    kappas = np.linalg.eigvalsh(W)[:, ::-1]
    return CurvatureSummary.from_kappas(kappas)


def cotan_weights(mesh: TriMesh, clamp: bool = True):
    """Cotangent edge weights ``(cot alpha + cot beta) / 2`` on ``mesh.edges``.

    Returns
    -------
    weights : ndarray, shape (ne,)
    n_clamped : int
        Number of negative weights set to zero (only when ``clamp``).
    """
    X = mesh.positions
    t = mesh.triangles
    nv = mesh.n_vertices
    rows, cols, vals = [], [], []
    for c in range(3):
        i, j, o = t[:, (c + 1) % 3], t[:, (c + 2) % 3], t[:, c]
        a = X[i] - X[o]
        b = X[j] - X[o]
        cot = np.einsum("ij,ij->i", a, b) / np.linalg.norm(_cross(a, b), axis=1)
        rows.append(np.minimum(i, j))
        cols.append(np.maximum(i, j))
        vals.append(0.5 * cot)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)
    key = rows * nv + cols
    edges = mesh.edges
    edge_key = edges[:, 0] * nv + edges[:, 1]
    pos = np.searchsorted(edge_key, key)
    weights = np.bincount(pos, weights=vals, minlength=len(edges))
    n_clamped = 0
    if clamp:
        neg = weights < 0
        n_clamped = int(neg.sum())
        if n_clamped:
            logger.info("clamped %d negative cotan weight(s) to zero", n_clamped)
        weights = np.where(neg, 0.0, weights)
    return weights, n_clamped


def gaussian_measure(mesh: TriMesh) -> WeightedMeasure:
    areas = mesh.triangle_areas / 3.0
    lumped = np.bincount(mesh.triangles.ravel(), weights=np.repeat(areas, 3), minlength=mesh.n_vertices)
    if np.any(lumped <= 0):
        raise MeshError("vertex with zero lumped area (unreferenced vertex)")
    weight = np.exp(-0.5 * np.einsum("ij,ij->i", mesh.positions, mesh.positions)) * lumped
    return WeightedMeasure(lumped_area=lumped, gauss_weight=weight)


def cotan_mean_curvature(mesh: TriMesh, normals: np.ndarray | None = None) -> VertexField:
    """Mean curvature ``<Delta X, N>`` from the cotangent Laplacian (cross-check field)."""
    if normals is None:
        normals = vertex_normals(mesh)
    weights, _ = cotan_weights(mesh, clamp=False)
    e = mesh.edges
    X = mesh.positions
    diff = (X[e[:, 1]] - X[e[:, 0]]) * weights[:, None]
    lap = np.zeros_like(X)
    np.add.at(lap, e[:, 0], diff)
    np.add.at(lap, e[:, 1], -diff)
    lap /= gaussian_measure(mesh).lumped_area[:, None]
    return VertexField(np.einsum("ij,ij->i", lap, normals), excluded=mesh.boundary_vertices)


def lambda_residual(
    mesh: TriMesh,
    lam: float,
    normals: np.ndarray | None = None,
    curvature: CurvatureSummary | None = None,
) -> VertexField:
    """Pointwise ``<X_i, N_i> + H_i - lam``; boundary vertices are excluded."""
    if normals is None:
        normals = vertex_normals(mesh)
    if curvature is None:
        curvature = shape_operator(mesh, normals)
    support = np.einsum("ij,ij->i", mesh.positions, normals)
    return VertexField(support + curvature.H - lam, excluded=mesh.boundary_vertices)
