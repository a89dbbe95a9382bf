"""Arc-length integration away from the singular sets, with event detection.

The second-order system is advanced as a first-order system in
(x, y, x', y') by writing (x'', y'') = kappa * (-y', x'), where the planar
curvature kappa is solved from the scalar governing equation.  This keeps
x'^2 + y'^2 = 1 structurally; after every accepted step the tangent is
additionally projected back onto the unit circle so the constraint holds to
rounding.

Steps use the Dormand-Prince 5(4) embedded pair with PI step control.  The
integrator never crosses the singular sets: monitors on y (rotational) and
on x, y, sqrt(x^2+y^2) (product type) stop it with a bracketing of the
threshold crossing, which refine_event then sharpens and extrapolates to the
actual contact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .core import (AXIS_CONTACT, ORIGIN_CONTACT, Y_AXIS_CONTACT, CurveState,
                   DivisionByAxis, LimitMismatch, Product, Rot,
                   SingularEvent, StepSizeUnderflow)

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)

_MAX_STEPS = 5_000_000


def curvature(x, y, xp, yp, geometry, h_val):
    """Planar curvature solved from the governing equation."""
    if isinstance(geometry, Rot):
        if y <= 0.0:
            raise DivisionByAxis("rotational field evaluated at y <= 0")
        return (geometry.n - 2) * xp / y - (geometry.n - 1) * h_val
    if x <= 0.0 or y <= 0.0:
        raise DivisionByAxis("product field evaluated outside the open quadrant")
    n = geometry.ambient_n
    return geometry.m * xp / y - geometry.l * yp / x - (n - 1) * h_val


def derivative_field(state, geometry, h):
    """First-order field (dx, dy, dx', dy') of the arc-length system."""
    h_val = h(state.s) if callable(h) else float(h)
    k = curvature(state.x, state.y, state.xp, state.yp, geometry, h_val)
    return (state.xp, state.yp, -k * state.yp, k * state.xp)


@dataclass
class EventDetection:
    """Bracketing of a threshold crossing produced by the integrator."""

    triggered: bool
    kind: str | None = None
    s_bracket: tuple = (0.0, 0.0)
    monitor: str | None = None
    left: CurveState | None = None
    step: float = 0.0
    direction: int = 1


@dataclass
class Trajectory:
    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xp: np.ndarray
    yp: np.ndarray

    def __len__(self):
        return len(self.s)

    def state(self, i):
        return CurveState(float(self.s[i]), float(self.x[i]), float(self.y[i]),
                          float(self.xp[i]), float(self.yp[i]))


def _rhs_factory(geometry, h):
    h_call = h.as_callable() if hasattr(h, "as_callable") else h
    if isinstance(geometry, Rot):
        n2 = geometry.n - 2
        n1 = geometry.n - 1

        def f(s, u):
            x, y, xp, yp = u
            if y <= 0.0:
                raise DivisionByAxis("rotational field evaluated at y <= 0", s=s)
            k = n2 * xp / y - n1 * h_call(s)
            return (xp, yp, -k * yp, k * xp)
    else:
        l, m = geometry.l, geometry.m
        n1 = geometry.ambient_n - 1

        def f(s, u):
            x, y, xp, yp = u
            if x <= 0.0 or y <= 0.0:
                raise DivisionByAxis("product field left the open quadrant", s=s)
            k = m * xp / y - l * yp / x - n1 * h_call(s)
            return (xp, yp, -k * yp, k * xp)

    return f


def _dopri_step(f, s, u, h):
    """One Dormand-Prince step; returns (u5, error_estimate)."""
    k = [f(s, u)]
    for i in range(1, 7):
        a = _A[i]
        ui = tuple(u[j] + h * sum(a[r] * k[r][j] for r in range(i))
                   for j in range(4))
        k.append(f(s + _C[i] * h, ui))
    u5 = tuple(u[j] + h * sum(_B5[r] * k[r][j] for r in range(7))
               for j in range(4))
    err = tuple(h * sum(_E[r] * k[r][j] for r in range(7)) for j in range(4))
    return u5, err


def _monitors(geometry, cfg):
    if isinstance(geometry, Rot):
        return (("axis", lambda u: u[1] - cfg.axis_eps),)
    return (
        ("origin", lambda u: math.hypot(u[0], u[1]) - cfg.origin_eps),
        ("axis", lambda u: u[1] - cfg.axis_eps),
        ("y-axis", lambda u: u[0] - cfg.axis_eps),
    )


def integrate_until_event(start, geometry, h, s_limit, cfg):
    """Integrate from ``start`` toward ``s_limit`` (either direction).

    Stops at s_limit or at the first accepted step whose end state crosses a
    singular-set monitor; in the latter case the returned detection brackets
    the crossing.  All accepted steps are recorded; the tangent is projected
    onto the unit circle after each one.
    """
    f = _rhs_factory(geometry, h)
    monitors = _monitors(geometry, cfg)
    direction = 1 if s_limit >= start.s else -1

    s = start.s
    u = (start.x, start.y, start.xp, start.yp)
    out_s = [s]
    out_u = [u]

    h_abs = min(cfg.rk_max_step, 1e-2)
    err_prev = 1.0
    detection = EventDetection(triggered=False, direction=direction)

    steps = 0
    while (s_limit - s) * direction > 0.0:
        if steps > _MAX_STEPS:
            raise StepSizeUnderflow("step budget exceeded", s=s)
        h_abs = min(h_abs, abs(s_limit - s))
        floor = 1e4 * np.finfo(float).eps * max(1.0, abs(s))
        if h_abs < floor:
            raise StepSizeUnderflow("adaptive step underflow", s=s)
        hs = direction * h_abs
        try:
            u_new, err = _dopri_step(f, s, u, hs)
        except DivisionByAxis:
            h_abs *= 0.5
            steps += 1
            continue
        # scaled RMS error
        acc = 0.0
        for j in range(4):
            sc = cfg.rk_tol * (1.0 + max(abs(u[j]), abs(u_new[j])))
            acc += (err[j] / sc) ** 2
        enorm = math.sqrt(acc / 4.0)
        steps += 1
        if enorm > 1.0:
            h_abs *= max(0.2, 0.9 * enorm ** -0.2)
            continue

        # accept: renormalize the tangent
        nrm = math.hypot(u_new[2], u_new[3])
        u_new = (u_new[0], u_new[1], u_new[2] / nrm, u_new[3] / nrm)
        s_new = s + hs
        fired = None
        for name, g in monitors:
            if g(u_new) < 0.0:
                fired = name
                break
        if fired is not None:
            detection = EventDetection(
                triggered=True, kind=None, s_bracket=(s, s_new), monitor=fired,
                left=CurveState(s, *u), step=hs, direction=direction)
            out_s.append(s_new)
            out_u.append(u_new)
            break

        out_s.append(s_new)
        out_u.append(u_new)
        s, u = s_new, u_new
        fac = 0.9 * enorm ** -0.14 * err_prev ** 0.08 if enorm > 0 else 5.0
        h_abs = min(cfg.rk_max_step, h_abs * min(5.0, max(0.2, fac)))
        err_prev = max(enorm, 1e-10)

    arr = np.array(out_u)
    traj = Trajectory(np.array(out_s), arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
    return traj, detection


def _advance(f, left, alpha):
    """Single refined step of size alpha from a stored state (no control)."""
    u = (left.x, left.y, left.xp, left.yp)
    if alpha == 0.0:
        return u
    # a couple of substeps keep the local error negligible for bracketing
    nsub = 4
    s, h = left.s, alpha / nsub
    for _ in range(nsub):
        u, _err = _dopri_step(f, s, u, h)
        s += h
    nrm = math.hypot(u[2], u[3])
    return (u[0], u[1], u[2] / nrm, u[3] / nrm)


def refine_event(samples_tail, detection, geometry, h, cfg):
    """Sharpen a detection into a SingularEvent at the actual contact.

    Root-finds the monitored coordinate's epsilon crossing inside the
    bracket, then extrapolates along the tangent to the contact itself
    (the integrator cannot reach the singular point).  The measured
    incoming slope is sanity-checked against the theoretical limit.
    """
    if not detection.triggered:
        raise ValueError("refine_event requires a triggered detection")
    f = _rhs_factory(geometry, h)
    left = detection.left
    mon = dict(_monitors(geometry, cfg))
    g = mon[detection.monitor]

    hstep = detection.step

    def gg(frac):
        return g(_advance(f, left, frac * hstep))

    if gg(1.0) >= 0.0:
        frac = 1.0
    else:
        frac = brentq(gg, 0.0, 1.0, xtol=1e-14, rtol=8.9e-16)
    u = _advance(f, left, frac * hstep)
    s_star = left.s + frac * hstep
    x, y, xp, yp = u

    kind = detection.monitor
    if isinstance(geometry, Product):
        # reclassify: an axis trigger whose extrapolated contact lies within
        # origin_eps of (0, 0) is really an origin contact
        if kind == "axis" and abs(yp) > 1e-12:
            if abs(x - xp * y / yp) <= cfg.origin_eps:
                kind = "origin"
        elif kind == "y-axis" and abs(xp) > 1e-12:
            if abs(y - yp * x / xp) <= cfg.origin_eps:
                kind = "origin"

    if kind == "axis":
        if abs(yp) < 1e-12:
            raise LimitMismatch("tangent parallel to axis at contact", s=s_star)
        ds = -y / yp  # signed arc advance to y = 0
        b = s_star + ds
        contact = (x + xp * ds, 0.0)
        slope_sq = xp * xp
        if slope_sq > 0.05:
            raise LimitMismatch(
                f"x'^2 = {slope_sq:.3g} at axis contact, expected -> 0", s=b)
        return SingularEvent(AXIS_CONTACT, b, contact, slope_sq)
    if kind == "y-axis":
        if abs(xp) < 1e-12:
            raise LimitMismatch("tangent parallel to y-axis at contact", s=s_star)
        ds = -x / xp
        b = s_star + ds
        contact = (0.0, y + yp * ds)
        slope_sq = yp * yp
        if slope_sq > 0.05:
            raise LimitMismatch(
                f"y'^2 = {slope_sq:.3g} at y-axis contact, expected -> 0", s=b)
        return SingularEvent(Y_AXIS_CONTACT, b, contact, slope_sq)

    # origin
    rad = x * xp + y * yp  # rho * drho/ds
    if abs(rad) < 1e-18:
        raise LimitMismatch("no radial approach rate at origin contact", s=s_star)
    b = s_star - (x * x + y * y) / rad
    slope_sq = xp * xp
    target = geometry.l / (geometry.l + geometry.m)
    if abs(slope_sq - target) > 0.05:
        raise LimitMismatch(
            f"x'^2 = {slope_sq:.6g} at origin contact, expected {target:.6g}", s=b)
    return SingularEvent(ORIGIN_CONTACT, b, (0.0, 0.0), slope_sq)
