"""Closed-form model lambda-hypersurfaces and their curvature invariants.

The three model families are the round sphere ``S^n(r)``, the generalized
cylinder ``S^k(r) x R^(n-k)`` and the flat hyperplane ``R^n``. The unit
normal is the inner one, so a sphere of radius ``r`` centred at the origin
has ``N = -X/r``, principal curvatures ``+1/r`` and ``<X, N> = -r``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Kind",
    "CanonicalSurface",
    "CurvatureSummary",
    "make_canonical",
    "lambda_of",
    "support_value",
    "curvature_summary",
    "sectional_and_ricci",
    "weighted_functionals",
    "simons_rhs",
    "unit_sphere_area",
    "unit_ball_volume",
]


class Kind(str, enum.Enum):
    SPHERE = "Sphere"
    CYLINDER = "Cylinder"
    PLANE = "Plane"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        for member in cls:
            if str(value).lower() == member.value.lower():
                return member
        raise ValueError(f"unknown surface kind {value!r}")


@dataclass(frozen=True)
class CanonicalSurface:
    """Descriptor of a model surface; build it through :func:`make_canonical`."""

    kind: Kind
    n: int
    k: int
    r: float

    def to_dict(self):
        return {"kind": self.kind.value, "n": self.n, "k": self.k, "r": self.r}


@dataclass(frozen=True)
class CurvatureSummary:
    """Principal curvatures and the invariants derived from them.

    All fields broadcast over leading axes: ``kappas`` has shape ``(..., n)``
    and the scalar invariants have shape ``(...)``, so one summary can hold
    the values of a single point or of every vertex of a mesh.

    Attributes
    ----------
    kappas : ndarray
        Principal curvatures.
    H : ndarray
        Mean curvature, the sum of the principal curvatures.
    S : ndarray
        Squared norm of the second fundamental form.
    B : ndarray
        Squared norm of the trace-free part, ``S - H**2/n``.
    mus : ndarray
        Trace-free principal curvatures ``kappa_i - H/n``.
    B3 : ndarray
        Sum of cubes of ``mus``.
    f3 : ndarray
        Sum of cubes of ``kappas``.
    """

    kappas: np.ndarray
    H: np.ndarray
    S: np.ndarray
    B: np.ndarray
    mus: np.ndarray
    B3: np.ndarray
    f3: np.ndarray

    @property
    def n(self) -> int:
        return self.kappas.shape[-1]

    @classmethod
    def from_kappas(cls, kappas) -> "CurvatureSummary":
        kappas = np.asarray(kappas, dtype=float)
        if kappas.ndim == 0 or kappas.shape[-1] < 1:
            raise ValueError("kappas must have a trailing axis of length n >= 1")
        n = kappas.shape[-1]
        H = kappas.sum(axis=-1)
        S = (kappas**2).sum(axis=-1)
        mus = kappas - H[..., None] / n
        B = (mus**2).sum(axis=-1)
        B3 = (mus**3).sum(axis=-1)
        f3 = (kappas**3).sum(axis=-1)
        return cls(kappas=kappas, H=H, S=S, B=B, mus=mus, B3=B3, f3=f3)

    def __getitem__(self, index) -> "CurvatureSummary":
        return CurvatureSummary(
            kappas=self.kappas[index],
            H=self.H[index],
            S=self.S[index],
            B=self.B[index],
            mus=self.mus[index],
            B3=self.B3[index],
            f3=self.f3[index],
        )


def make_canonical(kind, n: int, k: int | None = None, r: float | None = None) -> CanonicalSurface:
    """Validate parameters and build a :class:`CanonicalSurface`.

    ``k`` defaults to ``n`` for spheres and ``0`` for planes. The radius is
    ignored (stored as ``nan``) for planes.
    """
    kind = Kind.parse(kind)
    if int(n) != n or n < 2:
        raise ValueError(f"dimension n must be an integer >= 2, got {n!r}")
    n = int(n)
    if kind is Kind.SPHERE:
        k = n if k is None else k
        if k != n:
            raise ValueError(f"a sphere needs k == n, got k={k}, n={n}")
    elif kind is Kind.CYLINDER:
        if k is None or int(k) != k or not 1 <= k <= n - 1:
            raise ValueError(f"a cylinder needs 1 <= k <= n-1, got k={k!r}, n={n}")
    else:
        k = 0 if k is None else k
        if k != 0:
            raise ValueError(f"a plane needs k == 0, got k={k}")
    k = int(k)

    if kind is Kind.PLANE:
        return CanonicalSurface(kind, n, 0, math.nan)
    if r is None or not np.isfinite(r) or r <= 0:
        raise ValueError(f"radius must be positive, got {r!r}")
    return CanonicalSurface(kind, n, k, float(r))


def lambda_of(surface: CanonicalSurface) -> float:
    """Constant ``lambda`` in ``<X, N> + H = lambda`` for a model surface."""
    if surface.kind is Kind.PLANE:
        return 0.0
    return surface.k / surface.r - surface.r


def support_value(surface: CanonicalSurface) -> float:
    """The (constant) support function ``<X, N>`` of a model surface."""
    if surface.kind is Kind.PLANE:
        return 0.0
    return -surface.r


def curvature_summary(surface: CanonicalSurface) -> CurvatureSummary:
    kappas = np.zeros(surface.n)
    if surface.kind is not Kind.PLANE:
        kappas[: surface.k] = 1.0 / surface.r
    return CurvatureSummary.from_kappas(kappas)


def sectional_and_ricci(summary: CurvatureSummary):
    """Sectional curvatures of coordinate planes and the smallest Ricci value.

    From the Gauss equation with a diagonal second fundamental form,
    ``K_ij = kappa_i kappa_j`` for ``i != j`` and
    ``Ric_ii = kappa_i (H - kappa_i)``.

    Returns
    -------
    K : ndarray, shape (n, n)
        Sectional curvatures, zero on the diagonal.
    ricci_min : float
    """
    kappas = np.asarray(summary.kappas, dtype=float)
    if kappas.ndim != 1:
        raise ValueError("sectional_and_ricci expects a single-point summary")
    K = np.outer(kappas, kappas)
    np.fill_diagonal(K, 0.0)
    ricci = K.sum(axis=1)
    return K, float(ricci.min())


def unit_sphere_area(n: int) -> float:
    """Area of the unit n-sphere in R^(n+1)."""
    return 2.0 * math.pi ** ((n + 1) / 2) / math.gamma((n + 1) / 2)


def unit_ball_volume(m: int) -> float:
    """Volume of the unit ball in R^m (1 for m = 0)."""
    return math.pi ** (m / 2) / math.gamma(m / 2 + 1)


def weighted_functionals(surface: CanonicalSurface):
    """Gaussian-weighted area ``A`` and weighted volume ``V`` of a model surface.

    Flat directions contribute a factor ``sqrt(2 pi)`` each, so cylinders and
    the plane report finite values for the whole surface.
    """
    flat = surface.n - surface.k
    flat_factor = math.sqrt(2.0 * math.pi) ** flat
    if surface.kind is Kind.PLANE:
        return flat_factor, 0.0
    r = surface.r
    A = unit_sphere_area(surface.k) * r**surface.k * math.exp(-(r**2) / 2) * flat_factor
    V = support_value(surface) * A
    return A, V


def simons_rhs(summary: CurvatureSummary, lam: float):
    """Right-hand sides that must vanish on a surface with parallel second fundamental form.

    Returns ``(H + S (lam - H), (1 - S) S + lam f3)``.
    """
    rH = summary.H + summary.S * (lam - summary.H)
    rS = (1.0 - summary.S) * summary.S + lam * summary.f3
    return rH, rS
