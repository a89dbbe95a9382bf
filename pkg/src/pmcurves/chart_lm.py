"""Singular charts for O(l+1) x O(m+1) type: axis contact and origin passage.

Case (a), contact with the axis y = 0 at x0 > 0: the slope q = x'/y' solves
the fixed point of

    Psi(q)(y) = y^(-m) int_0^y { -m q^3 + (n-1) H~ eta (1+q^2)^(3/2)
                + l eta (1+q^2) / (int_0^eta q + x0) } eta^(m-1) d eta,

with n = l+m+2.  With l = 0, m = n-2 this is exactly the rotational
operator, node for node.

Case (b), passage through the origin: q(0) = sqrt(l/m) (the tangent of the
minimal cone) and the shifted unknown r = q - sqrt(l/m) solves the fixed
point of

    Theta(r)(y) = y^-(l+m) int_0^y { F1 + F2 + F3 } eta^(l+m-1) d eta,

    F1 = -r^2 (m r + 2 sqrt(lm)),
    F2 = -sqrt(lm) {1 + (r + sqrt(l/m))^2}
          * [(sqrt(m)/eta) int_0^eta r] / [(sqrt(m)/eta) int_0^eta r + sqrt(l)],
    F3 = (n-1) H~(eta) {1 + (r + sqrt(l/m))^2}^(3/2) eta.

The nonlocal inner integrals are accumulated on the same grid with the same
panel rule as the outer integral, so the discrete fixed point is internally
consistent.  Case (b) additionally requires M*Y < sqrt(l/m), which keeps the
running mean denominator positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (AXIS_CONTACT, ORIGIN_CONTACT, CurveState,
                   DenominatorVanished, SingularEvent)
from .chart_rot import _vectorized, width_underflow_error
from .picard import run_picard
from .quadrature import PanelMoments, trapezoid_prefix, uniform_grid

CASE_AXIS = "axis-a"
CASE_ORIGIN = "origin-b"


@dataclass
class SingularChartLM:
    """y-parametrized local solution for the product-type singular cases."""

    case: str
    Y: float
    grid: np.ndarray
    q: np.ndarray                 # slope x'/y' at the nodes
    r: np.ndarray | None          # q - sqrt(l/m), origin case only
    s_of_y: np.ndarray
    x_of_y: np.ndarray
    orientation: int
    b: float
    l: int
    m: int
    x0: float = 0.0               # contact abscissa, axis case only
    contraction: float = 0.0
    sweeps: int = 0
    residual: float = 0.0

    @property
    def half_index(self):
        return len(self.grid) // 2 - 1

    def state_at(self, j):
        q = self.q[j]
        den = math.sqrt(1.0 + q * q)
        return CurveState(float(self.s_of_y[j]), float(self.x_of_y[j]),
                          float(self.grid[j]), float(q / den),
                          float(self.orientation / den))

    def norm_x(self):
        f = self.r if self.r is not None else self.q
        return float(np.max(np.abs(f) / self.grid))


def origin_slope(l, m):
    """Outgoing x' at an origin contact: sqrt(l/(l+m)) (incoming is its
    negative; the square l/(l+m) is the two-sided limit)."""
    if l < 1 or m < 1:
        raise ValueError("origin slope requires l >= 1 and m >= 1")
    return math.sqrt(l / (l + m))


def psi_apply(q, h_tilde, l, m, x0, grid):
    """One application of the case-(a) operator Psi on the grid."""
    q = np.asarray(q, dtype=float)
    n = l + m + 2
    denom = x0 + trapezoid_prefix(q, 0.0, grid)
    if np.min(denom) <= 0.0:
        raise DenominatorVanished("running x(y) denominator vanished in Psi")
    g = (-m * q ** 3 + (n - 1) * h_tilde * grid * (1.0 + q * q) ** 1.5
         + l * grid * (1.0 + q * q) / denom)
    return PanelMoments(grid, m - 1).weighted_prefix(g, 0.0) * grid ** (-float(m))


def theta_apply(r, h_tilde, l, m, grid):
    """One application of the case-(b) operator Theta on the grid."""
    r = np.asarray(r, dtype=float)
    n = l + m + 2
    sql, sqm = math.sqrt(l), math.sqrt(m)
    sqlm = math.sqrt(l * m)
    cone = math.sqrt(l / m)
    mean = sqm * trapezoid_prefix(r, 0.0, grid) / grid
    denom = mean + sql
    if np.min(denom) <= 0.0:
        raise DenominatorVanished("running mean denominator vanished in Theta")
    one_q2 = 1.0 + (r + cone) ** 2
    f1 = -r * r * (m * r + 2.0 * sqlm)
    f2 = -sqlm * one_q2 * mean / denom
    f3 = (n - 1) * h_tilde * one_q2 ** 1.5 * grid
    g = f1 + f2 + f3
    return PanelMoments(grid, l + m - 1).weighted_prefix(g, 0.0) * grid ** (-float(l + m))


def solve_case_a(h, l, m, event, orientation, cfg, nodes=None):
    """Axis-contact chart (x0 > 0) by Picard iteration on Psi.

    Same self-consistent s(y) loop as the rotational solver, with the
    additional running x(y) = x0 + int_0^y q inside the integrand.  The
    candidate width also honours the admissibility bound
    x0 - (M/2) Y^2 > 0 before iterating.  With l = 0 the extra term is
    absent and the solve reproduces the rotational chart node for node.
    """
    if event.kind != AXIS_CONTACT:
        raise ValueError(f"case (a) requires an axis contact, got {event.kind}")
    b = float(event.s_event)
    x0 = float(event.contact_point[0])
    if l > 0 and x0 <= 0.0:
        raise ValueError("case (a) requires a contact abscissa x0 > 0")
    n_nodes = nodes or cfg.chart_nodes
    h_field = _vectorized(h)

    Y = cfg.chart_Y_init
    if l > 0:
        # denominator guard x0 - (M/2) Y^2 > 0
        while cfg.norm_bound_M * Y * Y / 2.0 >= 0.9 * x0:
            Y *= cfg.chart_Y_shrink

    last_failure = None
    while True:
        if Y < 1e3 * np.finfo(float).eps * max(1.0, abs(b)):
            raise width_underflow_error("axis chart", last_failure, b)
        grid = uniform_grid(Y, n_nodes)
        moments = PanelMoments(grid, m - 1)
        prefac = grid ** (2.0 - (m + 2))  # == grid**(-m), matching the rot solver
        n = l + m + 2

        def apply_fn(q, h_tilde):
            g = -m * q ** 3 + (n - 1) * h_tilde * grid * (1.0 + q * q) ** 1.5
            if l > 0:
                denom = x0 + trapezoid_prefix(q, 0.0, grid)
                if np.min(denom) <= 0.0:
                    raise DenominatorVanished("running x(y) vanished in Psi")
                g = g + l * grid * (1.0 + q * q) / denom
            return moments.weighted_prefix(g, 0.0) * prefac

        res = run_picard(apply_fn, lambda q: np.sqrt(1.0 + q * q), 1.0,
                         grid, b, orientation, h_field, cfg)
        if res.ok:
            break
        last_failure = res.failure
        Y *= cfg.chart_Y_shrink

    x_of_y = x0 + trapezoid_prefix(res.f, 0.0, grid)
    return SingularChartLM(case=CASE_AXIS, Y=Y, grid=grid, q=res.f, r=None,
                           s_of_y=res.s_of_y, x_of_y=x_of_y,
                           orientation=orientation, b=b, l=l, m=m, x0=x0,
                           contraction=res.contraction, sweeps=res.sweeps,
                           residual=res.residual)


def solve_case_b(h, l, m, event, orientation, cfg, nodes=None):
    """Origin-passage chart by Picard iteration on Theta.

    The chart carries q(0) = +sqrt(l/m) (the curve lives in the open
    quadrant); the incoming side is the same chart with orientation -1.
    The width satisfies M*Y < sqrt(l/m) before iterating.
    """
    if event.kind != ORIGIN_CONTACT:
        raise ValueError(f"case (b) requires an origin contact, got {event.kind}")
    b = float(event.s_event)
    cone = math.sqrt(l / m)
    rate0 = math.sqrt(1.0 + l / m)
    n_nodes = nodes or cfg.chart_nodes
    h_field = _vectorized(h)

    Y = cfg.chart_Y_init
    while cfg.norm_bound_M * Y >= 0.9 * cone:
        Y *= cfg.chart_Y_shrink

    last_failure = None
    while True:
        if Y < 1e3 * np.finfo(float).eps * max(1.0, abs(b)):
            raise width_underflow_error("origin chart", last_failure, b)
        grid = uniform_grid(Y, n_nodes)
        moments = PanelMoments(grid, l + m - 1)
        prefac = grid ** (-float(l + m))
        n = l + m + 2
        sql, sqm = math.sqrt(l), math.sqrt(m)
        sqlm = math.sqrt(l * m)

        def apply_fn(r, h_tilde):
            mean = sqm * trapezoid_prefix(r, 0.0, grid) / grid
            denom = mean + sql
            if np.min(denom) <= 0.0:
                raise DenominatorVanished("running mean vanished in Theta")
            one_q2 = 1.0 + (r + cone) ** 2
            g = (-r * r * (m * r + 2.0 * sqlm)
                 - sqlm * one_q2 * mean / denom
                 + (n - 1) * h_tilde * one_q2 ** 1.5 * grid)
            return moments.weighted_prefix(g, 0.0) * prefac

        def rate_fn(r):
            q = r + cone
            return np.sqrt(1.0 + q * q)

        res = run_picard(apply_fn, rate_fn, rate0, grid, b, orientation,
                         h_field, cfg)
        if res.ok:
            break
        last_failure = res.failure
        Y *= cfg.chart_Y_shrink

    q = res.f + cone
    x_of_y = trapezoid_prefix(q, cone, grid)  # x(0) = 0 at the origin
    return SingularChartLM(case=CASE_ORIGIN, Y=Y, grid=grid, q=q, r=res.f,
                           s_of_y=res.s_of_y, x_of_y=x_of_y,
                           orientation=orientation, b=b, l=l, m=m,
                           contraction=res.contraction, sweeps=res.sweeps,
                           residual=res.residual)


def outgoing_axis_chart_lm(chart_incoming, h, l, m, cfg):
    """Outgoing case-(a) chart: negated field (axis reflection), orientation +1."""
    event = SingularEvent(AXIS_CONTACT, chart_incoming.b,
                          (chart_incoming.x0, 0.0), 0.0)
    return solve_case_a(h.negated(), l, m, event, +1, cfg,
                        nodes=len(chart_incoming.grid))


def continue_through_axis(chart_incoming, h, l, m, cfg):
    """Stitched outgoing arc-length state at y = Y/2 past an axis contact."""
    if chart_incoming.orientation != -1 or chart_incoming.case != CASE_AXIS:
        raise ValueError("expects the incoming axis chart")
    out = outgoing_axis_chart_lm(chart_incoming, h, l, m, cfg)
    return out.state_at(out.half_index)


def outgoing_origin_chart(chart_incoming, h, l, m, cfg):
    """Outgoing case-(b) chart: same field (the curve re-enters the open
    quadrant, no reflection), orientation +1, q(0) = +sqrt(l/m)."""
    event = SingularEvent(ORIGIN_CONTACT, chart_incoming.b, (0.0, 0.0),
                          l / (l + m))
    return solve_case_b(h, l, m, event, +1, cfg,
                        nodes=len(chart_incoming.grid))


def continue_through_origin(chart_incoming, h, l, m, cfg):
    """Stitched outgoing arc-length state at y = Y/2 past the origin."""
    if chart_incoming.orientation != -1 or chart_incoming.case != CASE_ORIGIN:
        raise ValueError("expects the incoming origin chart")
    out = outgoing_origin_chart(chart_incoming, h, l, m, cfg)
    return out.state_at(out.half_index)
