"""Pinching functionals and pointwise inequalities for lambda-hypersurfaces.

The central quantity is

    lhs = (sqrt(B) + |lam| (n-2) / (2 sqrt(n(n-1))))**2 + (H - lam)**2 / n,
    rhs = 1 + n lam**2 / (4 (n-1)),

with ``B = S - H**2/n``. Complete lambda-hypersurfaces with polynomial area
growth and ``lhs <= rhs`` everywhere are spheres, hyperplanes or one of a
short list of cylinders; :func:`classify_canonical` reproduces that list on
the model surfaces.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import analytic
from .analytic import CanonicalSurface, CurvatureSummary, Kind

__all__ = [
    "CaseTag",
    "PinchingReport",
    "SymmetricTensor3",
    "pinching_coefficient",
    "pinching_gap",
    "focal_quantity",
    "classify_canonical",
    "pinching_report",
    "radius_condition",
    "strict_pinching",
    "sphere_gap_root",
    "b3_bound",
    "kato_defect",
    "kato_split",
    "symmetrize",
]

B_CLAMP = 1e-12


class CaseTag(str, enum.Enum):
    SPHERE_SMALL = "SphereSmall"
    EUCLIDEAN = "Euclidean"
    CYL_1 = "Cyl1"
    CYL_N1 = "CylN1"
    CYL_K = "CylK"
    GAP_VIOLATED = "GapViolated"


def pinching_coefficient(n: int) -> float:
    """``(n-2) / (2 sqrt(n(n-1)))``; zero for surfaces (n = 2)."""
    return (n - 2) / (2.0 * math.sqrt(n * (n - 1)))


def _clamped_B(B):
    B = np.asarray(B, dtype=float)
    if np.any(B < -B_CLAMP):
        raise ValueError(f"B = S - H^2/n is negative ({float(np.min(B)):.3e}); not a valid curvature summary")
    return np.maximum(B, 0.0)


def pinching_gap(summary: CurvatureSummary, lam: float, n: int | None = None):
    """Both sides of the pinching inequality and ``defect = rhs - lhs``.

    Works pointwise on scalar or per-vertex summaries.
    """
    n = summary.n if n is None else n
    if n < 2:
        raise ValueError("pinching needs n >= 2")
    B = _clamped_B(summary.B)
    lhs = (np.sqrt(B) + abs(lam) * pinching_coefficient(n)) ** 2 + (summary.H - lam) ** 2 / n
    rhs = 1.0 + n * lam**2 / (4.0 * (n - 1))
    if np.ndim(lhs) == 0:
        lhs = float(lhs)
    return lhs, rhs, rhs - lhs


def focal_quantity(H, lam: float, n: int):
    """``(H - lam/2)**2 - (n + lam**2/4)``; zero exactly on the spheres."""
    value = (np.asarray(H, dtype=float) - lam / 2.0) ** 2 - (n + lam**2 / 4.0)
    return float(value) if value.ndim == 0 else value


def strict_pinching(summary: CurvatureSummary, lam: float, n: int | None = None, margin: float = 1e-12) -> bool:
    """The strict supremum condition: ``max(lhs) < rhs`` by more than ``margin``."""
    lhs, rhs, _ = pinching_gap(summary, lam, n)
    return bool(np.max(lhs) < rhs - margin * max(1.0, rhs))


def radius_condition(surface: CanonicalSurface, tol: float = 1e-9) -> bool:
    """Radius ranges of the rigidity list, evaluated on a model surface.

    Sphere ``r <= sqrt(n)``; ``S^1(r) x R^(n-1)`` any ``r`` if ``n = 2`` else
    ``r >= 1``; ``S^(n-1)(r) x R`` any ``r`` if ``n = 2`` else
    ``r <= sqrt(n-1)``; middle cylinders only at ``r = sqrt(k)``.
    """
    n, k, r = surface.n, surface.k, surface.r
    slack = 1.0 + tol
    if surface.kind is Kind.PLANE:
        return True
    if surface.kind is Kind.SPHERE:
        return r <= math.sqrt(n) * slack
    if n == 2:
        return True
    if k == 1:
        return r * slack >= 1.0
    if k == n - 1:
        return r <= math.sqrt(n - 1) * slack
    return abs(r - math.sqrt(k)) <= tol * math.sqrt(k)


def _family_tag(surface: CanonicalSurface) -> CaseTag:
    if surface.kind is Kind.PLANE:
        return CaseTag.EUCLIDEAN
    if surface.kind is Kind.SPHERE:
        return CaseTag.SPHERE_SMALL
    if surface.k == 1:
        return CaseTag.CYL_1
    if surface.k == surface.n - 1:
        return CaseTag.CYL_N1
    return CaseTag.CYL_K


def classify_canonical(surface: CanonicalSurface, tol: float = 1e-12) -> CaseTag:
    """Place a model surface in the rigidity list, or report ``GapViolated``.

    Raises
    ------
    RuntimeError
        If the pinching inequality and the radius ranges disagree, which
        would contradict the classification.
    """
    lam = analytic.lambda_of(surface)
    lhs, rhs, _ = pinching_gap(analytic.curvature_summary(surface), lam, surface.n)
    satisfied = lhs <= rhs + tol * max(1.0, rhs)
    radius_ok = radius_condition(surface)
    if satisfied != radius_ok:
        raise RuntimeError(
            f"pinching ({lhs!r} vs {rhs!r}) and radius range disagree for {surface.to_dict()}"
        )
    return _family_tag(surface) if satisfied else CaseTag.GAP_VIOLATED


@dataclass(frozen=True)
class PinchingReport:
    n: int
    lam: float
    lhs: float
    rhs: float
    defect: float
    thm12_defect: float
    case_tag: CaseTag

    def to_dict(self):
        return {
            "n": self.n,
            "lambda": self.lam,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "defect": self.defect,
            "thm12_defect": self.thm12_defect,
            "case_tag": self.case_tag.value,
        }


def pinching_report(surface: CanonicalSurface, tol: float = 1e-12) -> PinchingReport:
    lam = analytic.lambda_of(surface)
    summary = analytic.curvature_summary(surface)
    lhs, rhs, defect = pinching_gap(summary, lam, surface.n)
    return PinchingReport(
        n=surface.n,
        lam=lam,
        lhs=lhs,
        rhs=rhs,
        defect=defect,
        thm12_defect=float(focal_quantity(float(summary.H), lam, surface.n)),
        case_tag=classify_canonical(surface, tol),
    )


def sphere_gap_root(n: int, xtol: float = 1e-14) -> float:
    """Radius where the pinching defect of ``S^n(r)`` changes sign, by bisection."""

    def defect(r):
        s = analytic.make_canonical(Kind.SPHERE, n, n, r)
        return pinching_gap(analytic.curvature_summary(s), analytic.lambda_of(s), n)[2]

    lo, hi = 0.25 * math.sqrt(n), 4.0 * math.sqrt(n)
    return optimize.bisect(defect, lo, hi, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def b3_bound(mus):
    """``B``, ``B3``, the bound ``(n-2)/sqrt(n(n-1)) B**1.5`` and ``bound - |B3|``.

    ``mus`` has shape ``(..., n)`` and must be trace-free.
    """
    mus = np.asarray(mus, dtype=float)
    n = mus.shape[-1]
    if n < 2:
        raise ValueError("need n >= 2")
    trace = mus.sum(axis=-1)
    scale = np.maximum(1.0, np.abs(mus).sum(axis=-1))
    if np.any(np.abs(trace) > 1e-12 * scale):
        raise ValueError("mus must be trace-free")
    B = (mus**2).sum(axis=-1)
    B3 = (mus**3).sum(axis=-1)
    bound = (n - 2) / math.sqrt(n * (n - 1)) * B**1.5
    return B, B3, bound, bound - np.abs(B3)


@dataclass(frozen=True)
class SymmetricTensor3:
    """Fully symmetric 3-tensor ``h_ijk`` (stackable over leading axes)."""

    entries: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.entries, dtype=float)
        if h.ndim < 3 or not (h.shape[-1] == h.shape[-2] == h.shape[-3]):
            raise ValueError("entries must have shape (..., n, n, n)")
        scale = max(1.0, float(np.max(np.abs(h)))) if h.size else 1.0
        for perm in ((1, 0, 2), (0, 2, 1), (2, 1, 0)):
            axes = tuple(range(h.ndim - 3)) + tuple(h.ndim - 3 + p for p in perm)
            if np.max(np.abs(h - h.transpose(axes))) > 1e-14 * scale:
                raise ValueError("tensor is not symmetric under index permutations")
        object.__setattr__(self, "entries", h)

    @property
    def n(self) -> int:
        return self.entries.shape[-1]

    def gradient_H(self) -> np.ndarray:
        """``H_,k = sum_i h_iik``."""
        return np.einsum("...iik->...k", self.entries)


def symmetrize(a) -> np.ndarray:
    """Average over the six index permutations of the last three axes."""
    a = np.asarray(a, dtype=float)
    lead = tuple(range(a.ndim - 3))
    out = np.zeros_like(a)
    for perm in itertools.permutations(range(3)):
        out += a.transpose(lead + tuple(a.ndim - 3 + p for p in perm))
    return out / 6.0


def _index_masks(n):
    i, j, k = np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij")
    all_equal = (i == j) & (j == k)
    # entries h_iik with i != k, counted once per ordered pair (i, k)
    pair = (i == j) & (j != k)
    distinct = (i != j) & (j != k) & (i != k)
    return all_equal, pair, distinct


def kato_defect(T: SymmetricTensor3):
    """Gradient-term inequality ``sum h_ijk^2 - |grad H|^2 / n >= 2 sum h_iik^2 + sum h_ijk^2``.

    Returns
    -------
    total : sum of all squared entries
    trace_term : ``|grad H|^2 / n``
    defect : ``total - trace_term``
    decomposition : pair ``(2 sum_{i != k} h_iik^2, sum_{i,j,k distinct} h_ijk^2)``
    """
    h = T.entries
    n = T.n
    sq = h**2
    all_equal, pair, distinct = _index_masks(n)
    total = sq.sum(axis=(-3, -2, -1))
    grad = T.gradient_H()
    trace_term = (grad**2).sum(axis=-1) / n
    pair_sum = (sq * pair).sum(axis=(-3, -2, -1))
    distinct_sum = (sq * distinct).sum(axis=(-3, -2, -1))
    return total, trace_term, total - trace_term, (2.0 * pair_sum, distinct_sum)


def kato_split(T: SymmetricTensor3):
    """``(3 sum_{i != k} h_iik^2, sum h_iii^2, sum_distinct h_ijk^2)``; their sum is ``total``."""
    sq = T.entries**2
    all_equal, pair, distinct = _index_masks(T.n)
    axes = (-3, -2, -1)
    return 3.0 * (sq * pair).sum(axis=axes), (sq * all_equal).sum(axis=axes), (sq * distinct).sum(axis=axes)
