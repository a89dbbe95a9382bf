"""Singular chart for rotational type: the weighted fixed point at axis contact.

When the curve meets the axis y = 0 the arc-length system degenerates, but
with y as independent variable the slope q = x'/y' obeys

    y dq/dy = -(n-2) q - (n-2) q^3 + (n-1) H~(y) y (1 + q^2)^(3/2),  q(0) = 0,

whose solutions are the fixed points of

    Phi(q)(y) = y^(2-n) * int_0^y { -(n-2) q^3
                + (n-1) H~(eta) eta (1 + q^2)^(3/2) } eta^(n-3) d eta

on the ball sup |q(y)/y| <= M of functions on (0, Y].  H~(y) is
orientation * H(s(y)), with orientation the sign of dy/ds on the side the
chart covers.  Passing the field -H builds the chart of the reflected
continuation beyond the contact (the smooth solution crosses into y < 0 and
the generating curve is its reflection, which satisfies the governing
equation with the opposite sign of H).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (AXIS_CONTACT, ChartWidthUnderflow, CurveState,
                   DenominatorVanished, NormBoundExceeded, SingularEvent)
from .picard import run_picard
from .quadrature import PanelMoments, trapezoid_prefix, uniform_grid


def width_underflow_error(what, last_failure, b):
    """Most specific error for an exhausted chart-width search."""
    if last_failure == "norm":
        return NormBoundExceeded(
            f"{what}: iterate exceeds the weighted-ball bound at every width", s=b)
    if last_failure == "denominator":
        return DenominatorVanished(
            f"{what}: running denominator vanished at every width", s=b)
    return ChartWidthUnderflow(f"{what} width underflow", s=b)


@dataclass
class SingularChartRot:
    """y-parametrized local solution around an axis contact."""

    Y: float
    grid: np.ndarray
    q: np.ndarray
    s_of_y: np.ndarray
    x_of_y: np.ndarray
    orientation: int
    b: float
    x_b: float
    n: int
    contraction: float = 0.0
    sweeps: int = 0
    residual: float = 0.0

    @property
    def half_index(self):
        return len(self.grid) // 2 - 1  # grid[half_index] == Y/2 exactly

    def state_at(self, j):
        """Arc-length CurveState at grid node j."""
        q = self.q[j]
        den = np.sqrt(1.0 + q * q)
        return CurveState(float(self.s_of_y[j]), float(self.x_of_y[j]),
                          float(self.grid[j]), float(q / den),
                          float(self.orientation / den))

    def norm_x(self):
        return float(np.max(np.abs(self.q) / self.grid))


def phi_apply(q, h_tilde, n, grid):
    """One application of the integral operator Phi on the grid.

    Product quadrature: the brace factor is interpolated linearly between
    nodes and integrated exactly against the monomial weight eta^(n-3).
    """
    q = np.asarray(q, dtype=float)
    g = -(n - 2) * q ** 3 + (n - 1) * h_tilde * grid * (1.0 + q * q) ** 1.5
    prefix = PanelMoments(grid, n - 3).weighted_prefix(g, 0.0)
    return prefix * grid ** (2.0 - n)


def solve_singular_rot(h, n, event, orientation, cfg, nodes=None):
    """Solve the axis-contact chart by Picard iteration on Phi.

    The loop couples q with s(y) = b + orientation * int_0^y sqrt(1+q^2);
    H~(y) = orientation * H(s(y)).  The chart width Y shrinks geometrically
    until the iterate stays inside the weighted ball and the measured
    contraction factor is at most 0.9.
    """
    if event.kind != AXIS_CONTACT:
        raise ValueError(f"rotational chart requires an axis contact, got {event.kind}")
    b = float(event.s_event)
    x_b = float(event.contact_point[0])
    n_nodes = nodes or cfg.chart_nodes
    h_field = _vectorized(h)

    Y = cfg.chart_Y_init
    last_failure = None
    while True:
        if Y < 1e3 * np.finfo(float).eps * max(1.0, abs(b)):
            raise width_underflow_error("axis chart", last_failure, b)
        grid = uniform_grid(Y, n_nodes)
        moments = PanelMoments(grid, n - 3)
        prefac = grid ** (2.0 - n)

        def apply_fn(q, h_tilde):
            g = -(n - 2) * q ** 3 + (n - 1) * h_tilde * grid * (1.0 + q * q) ** 1.5
            return moments.weighted_prefix(g, 0.0) * prefac

        res = run_picard(apply_fn, lambda q: np.sqrt(1.0 + q * q), 1.0,
                         grid, b, orientation, h_field, cfg)
        if res.ok:
            break
        last_failure = res.failure
        Y *= cfg.chart_Y_shrink

    x_of_y = x_b + trapezoid_prefix(res.f, 0.0, grid)
    return SingularChartRot(Y=Y, grid=grid, q=res.f, s_of_y=res.s_of_y,
                            x_of_y=x_of_y, orientation=orientation, b=b,
                            x_b=x_b, n=n, contraction=res.contraction,
                            sweeps=res.sweeps, residual=res.residual)


def _vectorized(h):
    """Array-capable view of an H field or plain scalar callable."""
    def h_vec(s):
        out = h(s)
        if np.ndim(out) == 0:
            return np.full(np.shape(s), float(out))
        return np.asarray(out, dtype=float)
    return h_vec


def outgoing_axis_chart(chart_incoming, h, n, cfg):
    """Chart of the continuation past the contact, on the outgoing side.

    The smooth solution crosses into y < 0; its reflection (the generating
    curve) satisfies the equation with -H, so the outgoing chart solves the
    same fixed point with the negated field and orientation +1, anchored at
    the same (b, x_b).
    """
    event = SingularEvent(AXIS_CONTACT, chart_incoming.b,
                          (chart_incoming.x_b, 0.0), 0.0)
    return solve_singular_rot(h.negated(), n, event, +1, cfg,
                              nodes=len(chart_incoming.grid))


def continue_through_axis(chart_incoming, h, n, cfg):
    """Stitched arc-length state on the outgoing side, at y = Y/2.

    ``h`` is the field the incoming chart was solved with; the outgoing
    chart internally uses its negation (reflection through the axis).
    """
    if chart_incoming.orientation != -1:
        raise ValueError("continue_through_axis expects the incoming chart")
    out = outgoing_axis_chart(chart_incoming, h, n, cfg)
    return out.state_at(out.half_index)
