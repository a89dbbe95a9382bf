"""Axis-contact chart for rotational type: operator, solver, continuation."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from pmcurves import (AXIS_CONTACT, ConstantH, CurveState, Rot, SingularEvent,
                      SolverConfig, TableH)
from pmcurves.chart_rot import (continue_through_axis, outgoing_axis_chart,
                                phi_apply, solve_singular_rot)
from pmcurves.integrate import integrate_until_event
from pmcurves.quadrature import uniform_grid

CFG = SolverConfig()
EVENT = SingularEvent(AXIS_CONTACT, math.pi / 2, (1.0, 0.0), 0.0)


def bump_field():
    s = np.linspace(-3.0, 3.0, 121)
    return TableH([(float(v), float(0.8 * math.exp(-2.0 * (v - 0.3) ** 2)))
                   for v in s], "cubic", "clamp")


# ---------------------------------------------------------------------------
# the integral operator
# ---------------------------------------------------------------------------

def test_phi_zero_is_fixed():
    grid = uniform_grid(0.2, 64)
    out = phi_apply(np.zeros(64), np.zeros(64), 3, grid)
    assert np.all(out == 0.0)


@pytest.mark.parametrize("n,h", [(3, 1.0), (4, 0.5), (6, -0.75)])
def test_phi_constant_field_closed_form(n, h):
    # closed-form antiderivative: Phi(0)(y) = h*y exactly; the integrand is
    # linear in eta so the product quadrature reproduces it to rounding
    grid = uniform_grid(0.3, 128)
    out = phi_apply(np.zeros(128), np.full(128, h), n, grid)
    np.testing.assert_allclose(out, h * grid, rtol=1e-14, atol=1e-16)


def test_phi_against_brute_force_quadrature():
    # n=3, H~=1, q(y)=y: adaptive quadrature of the same integrand
    n = 3
    n_nodes = 4096
    grid = uniform_grid(0.05, n_nodes)
    out = phi_apply(grid, np.ones(n_nodes), n, grid)

    def integrand(eta):
        return (-(n - 2) * eta ** 3
                + (n - 1) * eta * (1 + eta * eta) ** 1.5) * eta ** (n - 3)

    for j in (63, 1023, 2047, 4095):
        y = grid[j]
        expected = quad(integrand, 0.0, y, epsabs=1e-15, epsrel=1e-13)[0] * y ** (2 - n)
        assert out[j] == pytest.approx(expected, abs=1e-10)


# ---------------------------------------------------------------------------
# the solver
# ---------------------------------------------------------------------------

def test_zero_field_gives_flat_disk_chart():
    chart = solve_singular_rot(ConstantH(0.0), 4, EVENT, -1, CFG)
    assert np.max(np.abs(chart.q)) == 0.0
    np.testing.assert_allclose(chart.x_of_y, 1.0, rtol=0, atol=0)
    np.testing.assert_allclose(chart.s_of_y, math.pi / 2 - chart.grid, atol=1e-15)


def test_circle_chart_matches_analytic():
    # incoming chart of the unit circle x = sin s, y = cos s through (1, 0):
    # q = -y/sqrt(1-y^2), s = pi/2 - asin y, x = sqrt(1-y^2)
    cfg = CFG.with_(chart_nodes=2048)
    chart = solve_singular_rot(ConstantH(1.0), 3, EVENT, -1, cfg)
    y = chart.grid
    np.testing.assert_allclose(chart.q, -y / np.sqrt(1 - y * y), atol=1e-8)
    np.testing.assert_allclose(chart.s_of_y, math.pi / 2 - np.arcsin(y), atol=1e-8)
    np.testing.assert_allclose(chart.x_of_y, np.sqrt(1 - y * y), atol=1e-8)


def test_contraction_and_residual_and_membership():
    for h in (ConstantH(1.0), bump_field()):
        chart = solve_singular_rot(h, 3, EVENT, -1, CFG)
        assert chart.contraction <= 0.9
        assert chart.residual <= CFG.picard_tol
        assert chart.norm_x() <= CFG.norm_bound_M


def test_grid_refinement_second_order():
    charts = {}
    for n_nodes in (256, 512, 1024):
        charts[n_nodes] = solve_singular_rot(ConstantH(1.0), 3, EVENT, -1, CFG,
                                             nodes=n_nodes)
    q_c = charts[256].q
    q_m = charts[512].q[1::2]
    q_f = charts[1024].q[3::4]
    d1 = np.max(np.abs(q_c - q_m))
    d2 = np.max(np.abs(charts[512].q - charts[1024].q[1::2]))
    # halving changes q by <= ~4x the next halving's change
    assert d1 <= 4.5 * d2
    order = math.log2(d1 / d2)
    assert order >= 1.9


def test_ode_consistency_finite_differences():
    # interior finite differences of q satisfy the singular ODE; the
    # truncation residual drops ~4x when the grid is halved
    def fd_residual(chart, h):
        y = chart.grid
        q = chart.q
        hh = y[1] - y[0]
        dq = (q[2:] - q[:-2]) / (2 * hh)
        j = slice(1, -1)
        h_t = chart.orientation * np.array([h(float(v)) for v in chart.s_of_y[j]])
        rhs = (-(chart.n - 2) * q[j] - (chart.n - 2) * q[j] ** 3
               + (chart.n - 1) * h_t * y[j] * (1 + q[j] ** 2) ** 1.5)
        return np.max(np.abs(y[j] * dq - rhs))

    h = ConstantH(1.0)
    r1 = fd_residual(solve_singular_rot(h, 3, EVENT, -1, CFG, nodes=256), h)
    r2 = fd_residual(solve_singular_rot(h, 3, EVENT, -1, CFG, nodes=512), h)
    assert r2 <= r1 / 2.5
    assert r1 <= 1e-4


def test_chart_orientation_sign_convention():
    # incoming chart: s decreases as y grows; outgoing: s increases
    cin = solve_singular_rot(ConstantH(1.0), 3, EVENT, -1, CFG)
    assert np.all(np.diff(cin.s_of_y) < 0)
    assert cin.s_of_y[0] < cin.b
    cout = outgoing_axis_chart(cin, ConstantH(1.0), 3, CFG)
    assert np.all(np.diff(cout.s_of_y) > 0)
    assert cout.s_of_y[0] > cout.b


# ---------------------------------------------------------------------------
# continuation through the contact
# ---------------------------------------------------------------------------

def test_continue_flat_disk_mirror_line():
    chart = solve_singular_rot(ConstantH(0.0), 4, EVENT, -1, CFG)
    st = continue_through_axis(chart, ConstantH(0.0), 4, CFG)
    assert st.xp == pytest.approx(0.0, abs=1e-14)
    assert st.yp == pytest.approx(1.0, abs=1e-14)
    assert st.x == pytest.approx(1.0, abs=1e-14)
    assert st.y == pytest.approx(chart.Y / 2)


def test_continue_circle_chain():
    # the continuation retraces the unit circle: x = sin s, y = |cos s|
    cfg = CFG.with_(chart_nodes=1024)
    chart = solve_singular_rot(ConstantH(1.0), 3, EVENT, -1, cfg)
    st = continue_through_axis(chart, ConstantH(1.0), 3, cfg)
    assert st.s > math.pi / 2
    assert st.x == pytest.approx(math.sin(st.s), abs=1e-8)
    assert st.y == pytest.approx(-math.cos(st.s), abs=1e-8)
    assert st.xp == pytest.approx(math.cos(st.s), abs=1e-7)
    assert st.yp == pytest.approx(math.sin(st.s), abs=1e-7)


def test_shooting_oracle_back_to_contact():
    # backward integration from the stitched state re-approaches the contact
    cfg = CFG.with_(chart_nodes=1024, axis_eps=5e-6, rk_tol=1e-12)
    chart = solve_singular_rot(ConstantH(1.0), 3, EVENT, -1, cfg)
    st = continue_through_axis(chart, ConstantH(1.0), 3, cfg)
    # the outgoing generating curve satisfies the equation with -H
    traj, det = integrate_until_event(st, Rot(3), ConstantH(-1.0),
                                      chart.b - 1.0, cfg)
    assert det.triggered
    end = traj.state(len(traj) - 1)
    dist = math.hypot(end.x - chart.x_b, end.y)
    assert dist <= 10 * CFG.stitch_tol
    assert abs(end.xp) <= 0.05


def test_norm_bound_exhaustion_raises_specific_error():
    # an absurdly small ball bound fails at every width and surfaces as
    # NormBoundExceeded rather than a bare width underflow
    from pmcurves import NormBoundExceeded
    cfg = CFG.with_(norm_bound_M=1e-8, chart_nodes=32)
    with pytest.raises(NormBoundExceeded):
        solve_singular_rot(ConstantH(1.0), 3, EVENT, -1, cfg)
