"""Regular integrator: field evaluation, exact-solution oracles, events."""

import math

import numpy as np
import pytest

from pmcurves import (AXIS_CONTACT, ORIGIN_CONTACT, ConstantH, CurveState,
                      Product, Rot, SolverConfig)
from pmcurves.integrate import (derivative_field, integrate_until_event,
                                refine_event)

CFG = SolverConfig()


# ---------------------------------------------------------------------------
# derivative field
# ---------------------------------------------------------------------------

def test_field_cylinder_equilibrium():
    st = CurveState(0.0, 0.0, 1.0, 1.0, 0.0)
    d = derivative_field(st, Rot(3), ConstantH(0.5))
    assert d == pytest.approx((1.0, 0.0, 0.0, 0.0), abs=1e-15)


def test_field_unit_circle():
    st = CurveState(0.0, 0.0, 1.0, 1.0, 0.0)
    d = derivative_field(st, Rot(3), ConstantH(1.0))
    assert d == pytest.approx((1.0, 0.0, 0.0, -1.0), abs=1e-15)


def test_field_minimal_cone():
    r = 1.0 / math.sqrt(2.0)
    st = CurveState(math.sqrt(2.0), 1.0, 1.0, r, r)
    d = derivative_field(st, Product(1, 1), ConstantH(0.0))
    assert d == pytest.approx((r, r, 0.0, 0.0), abs=1e-15)


# ---------------------------------------------------------------------------
# exact-solution integration oracles
# ---------------------------------------------------------------------------

def test_circle_integration_and_event():
    start = CurveState(0.0, 0.0, 1.0, 1.0, 0.0)
    traj, det = integrate_until_event(start, Rot(3), ConstantH(1.0), 3.0, CFG)
    assert det.triggered and det.monitor == "axis"
    # pointwise deviation from x = sin s, y = cos s over the run
    dev = max(max(abs(traj.x[i] - math.sin(traj.s[i])),
                  abs(traj.y[i] - math.cos(traj.s[i])))
              for i in range(len(traj)))
    assert dev <= 100 * CFG.rk_tol
    ev = refine_event(traj, det, Rot(3), ConstantH(1.0), CFG)
    assert ev.kind == AXIS_CONTACT
    assert ev.s_event == pytest.approx(math.pi / 2, abs=1e-6)
    assert ev.contact_point[0] == pytest.approx(1.0, abs=1e-6)
    # slope is measured at the detection radius, so it scales with eps^2
    assert ev.incoming_slope_sq <= 3e-8


def test_cylinder_no_event():
    n, c = 4, 2.0
    h = ConstantH((n - 2) / ((n - 1) * c))
    start = CurveState(0.0, 0.0, c, 1.0, 0.0)
    traj, det = integrate_until_event(start, Rot(n), h, 10.0, CFG)
    assert not det.triggered
    assert traj.s[-1] == pytest.approx(10.0)
    assert np.max(np.abs(traj.y - c)) <= 1e-8


def test_cone_origin_event():
    r = 1.0 / math.sqrt(2.0)
    start = CurveState(0.0, 1.0, 1.0, -r, -r)
    traj, det = integrate_until_event(start, Product(1, 1), ConstantH(0.0), 3.0, CFG)
    assert det.triggered
    ev = refine_event(traj, det, Product(1, 1), ConstantH(0.0), CFG)
    assert ev.kind == ORIGIN_CONTACT
    assert ev.s_event == pytest.approx(math.sqrt(2.0), abs=1e-6)
    assert ev.incoming_slope_sq == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("l,m", [(1, 2), (2, 1), (1, 5)])
def test_cone_slope_limit(l, m):
    xs = math.sqrt(l / (l + m))
    ys = math.sqrt(m / (l + m))
    start = CurveState(0.0, 1.5 * xs, 1.5 * ys, -xs, -ys)
    # the contact is unstable with exponent l+m: steep ratios need a larger
    # detection radius, before rounding noise deflects the trajectory
    cfg = CFG if l + m < 4 else CFG.with_(origin_eps=1e-2)
    traj, det = integrate_until_event(start, Product(l, m), ConstantH(0.0), 3.0, cfg)
    ev = refine_event(traj, det, Product(l, m), ConstantH(0.0), cfg)
    # steep or shallow approaches must still classify as the origin
    assert ev.kind == ORIGIN_CONTACT
    assert ev.incoming_slope_sq == pytest.approx(l / (l + m), abs=1e-6)
    assert ev.s_event == pytest.approx(1.5, abs=1e-6)


def test_renormalization_drift_is_rounding_level():
    start = CurveState(0.0, 0.0, 2.0, 1.0, 0.0)
    traj, _ = integrate_until_event(start, Rot(3), ConstantH(0.9), 4.0, CFG)
    drift = np.abs(traj.xp ** 2 + traj.yp ** 2 - 1.0)
    assert np.max(drift) <= 5e-16


def test_reversibility():
    h = ConstantH(0.8)
    start = CurveState(0.0, 0.0, 2.0, 1.0, 0.0)
    traj, det = integrate_until_event(start, Rot(3), h, 1.0, CFG)
    assert not det.triggered
    end = traj.state(len(traj) - 1)
    back, det2 = integrate_until_event(end, Rot(3), h, 0.0, CFG)
    assert not det2.triggered
    final = back.state(len(back) - 1)
    err = max(abs(final.x - start.x), abs(final.y - start.y),
              abs(final.xp - start.xp), abs(final.yp - start.yp))
    assert err <= 1000 * CFG.rk_tol


def test_event_location_error_on_exact_solution():
    # the circle contact is known exactly at s = pi/2
    start = CurveState(0.0, 0.0, 1.0, 1.0, 0.0)
    traj, det = integrate_until_event(start, Rot(3), ConstantH(1.0), 3.0, CFG)
    ev = refine_event(traj, det, Rot(3), ConstantH(1.0), CFG)
    assert abs(ev.s_event - math.pi / 2) <= 10 * CFG.rk_tol
