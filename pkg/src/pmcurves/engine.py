"""Global driver: alternate regular integration and singular charts.

The engine keeps the generating curve itself (y >= 0, and x >= 0 for
product type) together with a sheet sign: the underlying smooth solution is
(x, sheet*y), and the generating curve satisfies the governing equation
with the effective field sheet*H.  Each axis contact flips the sheet and
negates the effective field; an origin passage bounces back into the open
quadrant and changes neither.  A y-axis contact is handled by swapping the
roles of x and y, which swaps (l, m) and negates the field, and reusing the
axis-contact machinery.

Windows extending to s < s0 are covered by the reversal symmetry: the
reversed curve (x(-s), y(-s)) solves the same system with the field
-H(-s), so one forward machine serves both directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import chart_lm, chart_rot
from .core import (ARC_LENGTH_CHART, AXIS_CONTACT, ORIGIN_CONTACT,
                   Y_AXIS_CONTACT, Y_CHART, ChartWidthUnderflow, CurveSegment,
                   CurveState, EventPileup, HField, ProfileCurve, Product,
                   Rot, SingularEvent, SolverConfig)
from .integrate import integrate_until_event, refine_event


@dataclass
class RunSpec:
    """One extension run: geometry, field, initial data, window, knobs."""

    geometry: object
    h: HField
    initial: tuple  # (s0, x0, y0, xp0, yp0)
    s_window: tuple
    cfg: SolverConfig = field(default_factory=SolverConfig)
    sample_ds: float = 0.01

    def __post_init__(self):
        s0, x0, y0, xp0, yp0 = (float(v) for v in self.initial)
        if abs(xp0 * xp0 + yp0 * yp0 - 1.0) > 1e-8:
            raise ValueError("initial tangent must be unit length")
        nrm = math.hypot(xp0, yp0)
        self.initial = (s0, x0, y0, xp0 / nrm, yp0 / nrm)
        if y0 <= 0.0:
            raise ValueError("initial point must have y > 0")
        if isinstance(self.geometry, Product) and x0 <= 0.0:
            raise ValueError("product-type initial point must have x > 0")
        lo, hi = (float(v) for v in self.s_window)
        if not lo <= s0 <= hi:
            raise ValueError("s_window must contain the initial arc length")
        self.s_window = (lo, hi)

    def initial_state(self):
        return CurveState(*self.initial)

    def to_json(self):
        from .core import geometry_to_json
        from dataclasses import asdict
        return {"geometry": geometry_to_json(self.geometry),
                "H": self.h.to_json(),
                "initial": list(self.initial),
                "window": list(self.s_window),
                "sample_ds": self.sample_ds,
                "config": asdict(self.cfg)}


def _segment_from_traj(traj, chart, sheet, extra=None):
    s, x, y, xp, yp = traj.s, traj.x, traj.y, traj.xp, traj.yp
    if extra is not None:
        st = extra
        s = np.append(s, st.s)
        x = np.append(x, st.x)
        y = np.append(y, st.y)
        xp = np.append(xp, st.xp)
        yp = np.append(yp, st.yp)
    return CurveSegment(s=s, x=x, y=y, xp=xp, yp=yp, chart=chart, sheet=sheet)


def _contact_state(ev, geometry):
    """Generating-curve state at the contact (incoming one-sided tangent)."""
    if ev.kind == AXIS_CONTACT:
        return CurveState(ev.s_event, ev.contact_point[0], 0.0, 0.0, -1.0)
    if ev.kind == Y_AXIS_CONTACT:
        # emitted with the true (unswapped) coordinates; x' -> -1 as x -> 0
        return CurveState(ev.s_event, 0.0, ev.contact_point[1], -1.0, 0.0)
    xs = math.sqrt(geometry.l / (geometry.l + geometry.m))
    ys = math.sqrt(geometry.m / (geometry.l + geometry.m))
    return CurveState(ev.s_event, 0.0, 0.0, -xs, -ys)


def _chart_arrays(chart, contact, swap=False):
    """Generating-curve sample arrays from a chart's nodes: the contact
    anchor (owned by the previous segment) followed by the nodes up to and
    including the stitch node at Y/2."""
    j = chart.half_index
    s = np.concatenate([[chart.b], chart.s_of_y[: j + 1]])
    xc = np.concatenate([[contact[0]], chart.x_of_y[: j + 1]])
    yc = np.concatenate([[contact[1]], chart.grid[: j + 1]])
    q = chart.q[: j + 1]
    den = np.sqrt(1.0 + q * q)
    q0 = chart.q[0]  # first-node slope approximates the contact limit
    xp = np.concatenate([[q0 / math.sqrt(1 + q0 * q0)], q / den])
    yp = np.concatenate([[chart.orientation / math.sqrt(1 + q0 * q0)],
                         chart.orientation / den])
    if swap:
        xc, yc = yc, xc
        xp, yp = yp, xp
    return s, xc, yc, xp, yp


def _cap_chart_segment(arrays, s_cap):
    """Clip chart samples at s <= s_cap (interpolating the end point) and
    drop the leading contact anchor; when uncapped, also drop the stitch
    node so the restarting regular segment owns it."""
    s, x, y, xp, yp = arrays
    if s[-1] <= s_cap:
        return tuple(a[1:-1] for a in (s, x, y, xp, yp)), False
    keep = s <= s_cap
    k = int(np.argmin(keep))  # first index beyond the cap
    t = (s_cap - s[k - 1]) / (s[k] - s[k - 1])

    def lerp(a):
        return np.append(a[1:k], a[k - 1] + t * (a[k] - a[k - 1]))

    sx, xx, yx, xpx, ypx = (lerp(a) for a in (s, x, y, xp, yp))
    nrm = math.hypot(xpx[-1], ypx[-1])
    xpx[-1] /= nrm
    ypx[-1] /= nrm
    sx[-1] = s_cap
    return (sx, xx, yx, xpx, ypx), True


def _check_event_spacing(prev_s, new_s, axis_eps):
    """Abort on event accumulation: the theory gives no control over
    infinitely many contacts in finite arc length."""
    if prev_s is not None and abs(new_s - prev_s) < 10 * axis_eps:
        raise EventPileup("two singular events closer than 10*axis_eps", s=new_s)


def _extend_forward(geometry, h, state0, s_end, cfg):
    """Extend from state0 forward to s_end; returns (segments, events, passages)."""
    segments, events, passages = [], [], []
    sheet = 1
    h_eff = h
    state = state0
    last_event_s = None

    while True:
        traj, det = integrate_until_event(state, geometry, h_eff, s_end, cfg)
        if not det.triggered:
            segments.append(_segment_from_traj(traj, ARC_LENGTH_CHART, sheet))
            break
        ev = refine_event(traj, det, geometry, h_eff, cfg)
        if ev.s_event > s_end:
            # the contact lies past the window edge; keep the integrated
            # samples (they end within axis_eps of the edge) and stop
            segments.append(_segment_from_traj(traj, ARC_LENGTH_CHART, sheet))
            break
        _check_event_spacing(last_event_s, ev.s_event, cfg.axis_eps)
        last_event_s = ev.s_event
        events.append(ev)
        segments.append(_segment_from_traj(traj, ARC_LENGTH_CHART, sheet,
                                           extra=_contact_state(ev, geometry)))
        if ev.s_event >= s_end:
            break

        if ev.kind == AXIS_CONTACT:
            if isinstance(geometry, Rot):
                chart_in = chart_rot.solve_singular_rot(h_eff, geometry.n, ev, -1, cfg)
                chart_out = chart_rot.outgoing_axis_chart(chart_in, h_eff, geometry.n, cfg)
            else:
                chart_in = chart_lm.solve_case_a(h_eff, geometry.l, geometry.m,
                                                 ev, -1, cfg)
                chart_out = chart_lm.outgoing_axis_chart_lm(
                    chart_in, h_eff, geometry.l, geometry.m, cfg)
            swap = False
            new_sheet, new_h = -sheet, h_eff.negated()
        elif ev.kind == Y_AXIS_CONTACT:
            ev_sw = SingularEvent(AXIS_CONTACT, ev.s_event,
                                  (ev.contact_point[1], 0.0), ev.incoming_slope_sq)
            h_sw = h_eff.negated()  # coordinate swap negates the field
            chart_in = chart_lm.solve_case_a(h_sw, geometry.m, geometry.l,
                                             ev_sw, -1, cfg)
            chart_out = chart_lm.outgoing_axis_chart_lm(
                chart_in, h_sw, geometry.m, geometry.l, cfg)
            swap = True
            new_sheet, new_h = -sheet, h_eff.negated()
        elif ev.kind == ORIGIN_CONTACT:
            chart_in = chart_lm.solve_case_b(h_eff, geometry.l, geometry.m,
                                             ev, -1, cfg)
            chart_out = chart_lm.outgoing_origin_chart(
                chart_in, h_eff, geometry.l, geometry.m, cfg)
            swap = False
            new_sheet, new_h = sheet, h_eff
        else:
            raise ValueError(f"unknown event kind {ev.kind}")

        if chart_out.grid[chart_out.half_index] < 2 * cfg.axis_eps:
            raise ChartWidthUnderflow(
                "outgoing chart too narrow to restart regular integration",
                s=ev.s_event)
        passages.append((ev, chart_in, chart_out))

        # contact anchor in the chart's own frame (swapped for y-axis events)
        anchor = (ev.contact_point[1], 0.0) if swap else ev.contact_point
        arrays, capped = _cap_chart_segment(
            _chart_arrays(chart_out, anchor, swap), s_end)
        if len(arrays[0]):
            segments.append(CurveSegment(*arrays, chart=Y_CHART, sheet=new_sheet))
        if capped:
            break

        st = chart_out.state_at(chart_out.half_index)
        if swap:
            st = CurveState(st.s, st.y, st.x, st.yp, st.xp)
        sheet, h_eff, state = new_sheet, new_h, st
        # the chart segment ends one node before the stitch, so the restart
        # sample continues the strictly increasing arc length

    return segments, events, passages


def _reverse_segments(segments):
    out = []
    for seg in reversed(segments):
        out.append(CurveSegment(
            s=-seg.s[::-1], x=seg.x[::-1].copy(), y=seg.y[::-1].copy(),
            xp=-seg.xp[::-1], yp=-seg.yp[::-1], chart=seg.chart, sheet=seg.sheet))
    return out


def extend(spec):
    """Extend the generating curve over the requested arc-length window.

    Realizes the alternating regular/singular-chart loop; the returned
    ProfileCurve records every event and, per segment, whether its samples
    came from arc-length integration or a y-parametrized chart.
    """
    s0 = spec.initial[0]
    lo, hi = spec.s_window
    state0 = spec.initial_state()
    cfg = spec.cfg

    fwd_segments, fwd_events, fwd_passages = [], [], []
    if hi > s0:
        fwd_segments, fwd_events, fwd_passages = _extend_forward(
            spec.geometry, spec.h, state0, hi, cfg)

    bwd_segments, bwd_events = [], []
    if lo < s0:
        h_rev = spec.h.reflected_negated()
        state_rev = CurveState(-s0, state0.x, state0.y, -state0.xp, -state0.yp)
        segs, evs, _ = _extend_forward(spec.geometry, h_rev, state_rev, -lo, cfg)
        bwd_segments = _reverse_segments(segs)
        bwd_events = [SingularEvent(ev.kind, -ev.s_event, ev.contact_point,
                                    ev.incoming_slope_sq) for ev in reversed(evs)]

    if bwd_segments and fwd_segments:
        # both legs share the initial sample; keep the forward copy
        last = bwd_segments[-1]
        if len(last) > 1:
            bwd_segments[-1] = CurveSegment(
                s=last.s[:-1], x=last.x[:-1], y=last.y[:-1], xp=last.xp[:-1],
                yp=last.yp[:-1], chart=last.chart, sheet=last.sheet)
        else:
            bwd_segments.pop()
    segments = bwd_segments + fwd_segments
    if not segments:
        raise ValueError("empty window")

    return ProfileCurve(segments=segments, events=bwd_events + fwd_events,
                        geometry=spec.geometry, h=spec.h, initial=state0,
                        passages=fwd_passages)


def sweep(spec_template, c_values):
    """Run one extension per initial height c, with the section-3 data
    (x(0), y(0), x'(0), y'(0)) = (0, c, 1, 0); results keyed by c."""
    if not isinstance(spec_template.geometry, Rot):
        raise ValueError("sweep is defined for rotational geometry")
    out = {}
    for c in c_values:
        spec = replace(spec_template, initial=(0.0, 0.0, float(c), 1.0, 0.0))
        out[float(c)] = extend(spec)
    return out
