import numpy as np
import pytest

from lambdalab import flow
from lambdalab import mesh as M
from lambdalab.analytic import make_canonical
from lambdalab.flow import FlowError, FlowRow, FlowTrace, TRACE_COLUMNS
from lambdalab.mesh import MeshError


def test_init_sphere():
    state = flow.init(M.sphere(1.0, 3))
    assert state.ref_normals.shape == (642, 3)
    assert state.t == 0.0
    with pytest.raises(ValueError):
        state.ref_normals[0, 0] = 1.0


def test_init_rejects_open_mesh():
    flow.init(M.ellipsoid(1.0, 1.0, 1.3, 3))
    with pytest.raises(MeshError):
        flow.init(M.cylinder_segment(1.0, 2.0, 16))


def test_alpha_examples():
    assert flow.alpha(flow.init(M.sphere(1.0, 3))) == pytest.approx(2.0, abs=1e-9)
    assert flow.alpha(flow.init(M.sphere(2.0, 2))) == pytest.approx(1.0, abs=1e-9)
    state = flow.init(M.ellipsoid(1.0, 1.0, 1.3, 3))
    w = state.ref_weights
    assert flow.alpha(state) == pytest.approx(np.dot(state.curvature.H, w) / w.sum(), rel=1e-13)


def test_step_conserves_volume():
    state = flow.init(M.ellipsoid(1.0, 1.0, 1.3, 3))
    V0 = flow.weighted_volume(state)
    dt = 0.5 * flow.stability_bound(state.mesh)
    nxt = flow.step(state, dt)
    assert abs(flow.weighted_volume(nxt) - V0) <= 1e-12 * abs(V0)
    assert nxt.max_displacement > 0


def test_step_rejects_large_or_nonpositive_dt():
    state = flow.init(M.sphere(1.0, 2))
    with pytest.raises(FlowError):
        flow.step(state, 2 * flow.stability_bound(state.mesh))
    with pytest.raises(FlowError):
        flow.step(state, 0.0)


@pytest.mark.parametrize("r,level", [(1.0, 3), (2.0, 2), (0.8, 2)])
def test_sphere_is_fixed_point(r, level):
    state = flow.init(M.sphere(r, level))
    for _ in range(100):
        state = flow.step(state, 1e-3)
    assert state.max_displacement <= 1e-6


def test_run_sphere():
    state = flow.init(M.sphere(1.0, 3))
    trace = flow.run(state, 2e-3, 0.1)
    assert not trace.aborted
    assert trace.rows[-1].t == pytest.approx(0.1, abs=1e-12)
    V = trace.column("volume_weighted")
    assert np.max(np.abs(V - V[0])) <= 1e-10 * abs(V[0])
    np.testing.assert_allclose(trace.column("alpha"), 2.0, rtol=0.02)
    assert np.all(np.diff(trace.column("t")) > 0)


def test_run_ellipsoid_conserves_volume_and_records_area():
    state = flow.init(M.ellipsoid(1.0, 1.0, 1.3, 2))
    dt = 0.5 * flow.stability_bound(state.mesh)
    trace = flow.run(state, dt, 0.1, record_every=5)
    assert not trace.aborted
    V = trace.column("volume_weighted")
    assert np.max(np.abs(V - V[0])) <= 1e-9 * abs(V[0])
    assert np.all(np.isfinite(trace.column("area_weighted")))
    res = trace.column("lambda_residual")
    assert res[-1] < res[0]


def test_run_aborts_on_large_dt():
    state = flow.init(M.sphere(1.0, 2))
    trace = flow.run(state, 10 * flow.stability_bound(state.mesh), 0.1)
    assert trace.aborted
    assert len(trace.rows) == 1
    assert "stability" in trace.error


def test_run_record_cadence():
    state = flow.init(M.sphere(1.0, 1))
    trace = flow.run(state, 0.01, 0.1, record_every=3)
    np.testing.assert_allclose(trace.column("t"), [0.0, 0.03, 0.06, 0.09, 0.1], atol=1e-12)
    with pytest.raises(ValueError):
        flow.run(state, 0.01, 0.1, record_every=0)


def test_time_step_refinement_first_order():
    mesh = M.ellipsoid(1.0, 1.0, 1.3, 2)
    dt0 = 0.5 * flow.stability_bound(mesh)
    t_end = 16 * dt0
    finals = []
    for dt in (dt0, dt0 / 2, dt0 / 4):
        trace = flow.run(flow.init(mesh), dt, t_end, record_every=1000)
        finals.append(trace.final_state.positions)
    d1 = np.abs(finals[0] - finals[1]).max()
    d2 = np.abs(finals[1] - finals[2]).max()
    assert d1 / d2 == pytest.approx(2.0, rel=0.25)


def test_trace_csv_round_trip(tmp_path):
    trace = flow.run(flow.init(M.sphere(1.0, 1)), 0.01, 0.05)
    trace.to_csv(tmp_path / "t.csv")
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert tuple(header.split(",")) == TRACE_COLUMNS
    back = FlowTrace.read_csv(tmp_path / "t.csv")
    assert back.rows == trace.rows


def test_trace_times_strictly_increasing():
    trace = FlowTrace()
    row = FlowRow(0.0, 1.0, 1.0, 2.0, 0.0, 0.0)
    trace.append(row, 0.0)
    with pytest.raises(ValueError):
        trace.append(row, 0.0)


def test_stationarity():
    ok, speed = flow.stationarity(M.sphere(1.0, 4), 0.02)
    assert ok and speed <= 0.02
    ok, speed = flow.stationarity(M.ellipsoid(1.0, 1.0, 1.3, 4), 0.02)
    assert not ok and speed > 0.02
    assert flow.stationarity(make_canonical("Plane", 2), 0.02) == (True, 0.0)
