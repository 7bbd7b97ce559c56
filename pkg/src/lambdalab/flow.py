"""Explicit integration of the weighted volume-preserving mean curvature flow.

Each vertex moves with normal speed ``H_i - alpha``::

    X_i <- X_i + dt * (H_i - alpha) * N_i(t)

where ``alpha`` is the ratio of ``sum H_i <N_i(t), N_i(0)> w_i(0)`` to
``sum <N_i(t), N_i(0)> w_i(0)`` and ``w_i(0)`` are the Gaussian vertex
weights of the initial mesh. The initial normals and weights stay frozen,
which makes the weighted volume ``V(t) = sum <X_i(t), N_i(0)> w_i(0)``
an exact invariant of every step.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import analytic
from .analytic import CanonicalSurface, CurvatureSummary
from .mesh import MeshError, TriMesh, gaussian_measure, shape_operator, vertex_normals

logger = logging.getLogger(__name__)

__all__ = [
    "FlowError",
    "FlowState",
    "FlowRow",
    "FlowTrace",
    "init",
    "alpha",
    "step",
    "run",
    "stability_bound",
    "weighted_area",
    "weighted_volume",
    "stationarity",
    "TRACE_COLUMNS",
]

STABILITY_FACTOR = 0.4
DENOMINATOR_FLOOR = 1e-9
TRACE_COLUMNS = ("t", "area_weighted", "volume_weighted", "alpha", "max_speed", "lambda_residual")


class FlowError(RuntimeError):
    """The flow cannot continue (instability, NaN, decorrelated normals)."""


@dataclass(frozen=True)
class FlowState:
    t: float
    mesh: TriMesh
    ref_positions: np.ndarray
    ref_normals: np.ndarray
    ref_weights: np.ndarray
    normals: np.ndarray
    curvature: CurvatureSummary

    @property
    def positions(self) -> np.ndarray:
        return self.mesh.positions

    @property
    def max_displacement(self) -> float:
        return float(np.max(np.linalg.norm(self.positions - self.ref_positions, axis=1)))


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def init(mesh: TriMesh) -> FlowState:
    if not mesh.is_closed:
        raise MeshError("the flow needs a closed mesh")
    normals = vertex_normals(mesh)
    return FlowState(
        t=0.0,
        mesh=mesh,
        ref_positions=_frozen(mesh.positions),
        ref_normals=_frozen(normals),
        ref_weights=_frozen(gaussian_measure(mesh).gauss_weight),
        normals=normals,
        curvature=shape_operator(mesh, normals),
    )


def alpha(state: FlowState) -> float:
    corr = np.einsum("ij,ij->i", state.normals, state.ref_normals) * state.ref_weights
    den = corr.sum()
    if not den > DENOMINATOR_FLOOR * state.ref_weights.sum():
        raise FlowError(f"alpha denominator {den:.3e} too small (normals decorrelated from t=0)")
    return float(np.dot(state.curvature.H, corr) / den)


def stability_bound(mesh: TriMesh) -> float:
    return STABILITY_FACTOR * float(mesh.edge_lengths.min()) ** 2


def weighted_area(state: FlowState) -> float:
    return gaussian_measure(state.mesh).total_weight


def weighted_volume(state: FlowState) -> float:
    support = np.einsum("ij,ij->i", state.positions, state.ref_normals)
    return float(np.dot(support, state.ref_weights))


def _best_fit_residual(state: FlowState) -> float:
    support = np.einsum("ij,ij->i", state.positions, state.normals)
    q = support + state.curvature.H
    w = gaussian_measure(state.mesh).gauss_weight
    lam = np.dot(q, w) / w.sum()
    return float(np.max(np.abs(q - lam)))


def step(state: FlowState, dt: float) -> FlowState:
    if not dt > 0:
        raise FlowError("time step must be positive")
    bound = stability_bound(state.mesh)
    if dt > bound:
        raise FlowError(f"time step {dt:.3e} exceeds stability bound {bound:.3e}")
    a = alpha(state)
    speed = state.curvature.H - a
    new_positions = state.positions + dt * speed[:, None] * state.normals
    if not np.all(np.isfinite(new_positions)):
        raise FlowError(f"non-finite positions at t={state.t + dt:.6g}")
    try:
        mesh = state.mesh.with_positions(new_positions)
        normals = vertex_normals(mesh)
        curvature = shape_operator(mesh, normals)
    except MeshError as exc:
        raise FlowError(f"mesh degenerated at t={state.t + dt:.6g}: {exc}") from exc
    return replace(state, t=state.t + dt, mesh=mesh, normals=normals, curvature=curvature)


@dataclass(frozen=True)
class FlowRow:
    t: float
    area_weighted: float
    volume_weighted: float
    alpha: float
    max_speed: float
    lambda_residual: float

    def as_tuple(self):
        return tuple(getattr(self, c) for c in TRACE_COLUMNS)


@dataclass
class FlowTrace:
    rows: list[FlowRow] = field(default_factory=list)
    displacement: list[float] = field(default_factory=list)
    error: str | None = None
    final_state: FlowState | None = None

    @property
    def aborted(self) -> bool:
        return self.error is not None

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows])

    def append(self, row: FlowRow, displacement: float):
        if self.rows and not row.t > self.rows[-1].t:
            raise ValueError("trace times must be strictly increasing")
        self.rows.append(row)
        self.displacement.append(displacement)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for row in self.rows:
                writer.writerow([format(v, ".17g") for v in row.as_tuple()])

    @staticmethod
    def read_csv(path) -> "FlowTrace":
        trace = FlowTrace()
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            for rec in reader:
                trace.rows.append(FlowRow(**{c: float(rec[c]) for c in TRACE_COLUMNS}))
        return trace


def _record(state: FlowState) -> FlowRow:
    a = alpha(state)
    return FlowRow(
        t=state.t,
        area_weighted=weighted_area(state),
        volume_weighted=weighted_volume(state),
        alpha=a,
        max_speed=float(np.max(np.abs(state.curvature.H - a))),
        lambda_residual=_best_fit_residual(state),
    )


def run(
    state: FlowState,
    dt: float,
    t_end: float,
    record_every: int = 1,
    on_record: Callable[[FlowState], None] | None = None,
) -> FlowTrace:
    """Integrate to ``t_end`` recording a row every ``record_every`` steps.

    The first row is the input state and the last row the final state. On a
    :class:`FlowError` the partial trace is returned with ``error`` set.
    """
    if int(record_every) != record_every or record_every < 1:
        raise ValueError("record_every must be a positive integer")
    if not t_end > state.t:
        raise ValueError("t_end must exceed the current time")
    trace = FlowTrace()
    n_steps = max(1, math.ceil((t_end - state.t) / dt - 1e-9))
    try:
        trace.append(_record(state), state.max_displacement)
        if on_record:
            on_record(state)
        for s in range(1, n_steps + 1):
            h = min(dt, t_end - state.t) if s == n_steps else dt
            state = step(state, h)
            if s % record_every == 0 or s == n_steps:
                trace.append(_record(state), state.max_displacement)
                if on_record:
                    on_record(state)
    except FlowError as exc:
        logger.error("flow aborted: %s", exc)
        trace.error = str(exc)
    trace.final_state = state
    return trace


def stationarity(target, tol: float):
    """Whether the normal speed ``H - alpha`` vanishes to ``tol``.

    ``target`` is a closed :class:`TriMesh` or a :class:`CanonicalSurface`
    (constant ``H``, so ``alpha = H`` and the speed is zero).

    Returns
    -------
    (is_stationary, max_speed)
    """
    if isinstance(target, CanonicalSurface):
        H = float(analytic.curvature_summary(target).H)
        max_speed = abs(H - H)
    else:
        state = init(target)
        max_speed = float(np.max(np.abs(state.curvature.H - alpha(state))))
    return max_speed <= tol, max_speed
