"""Domain types shared by all modules and pointwise residuals of the governing equations.

The generating curve (x(s), y(s)) is parametrized by arc length, so
x'(s)^2 + y'(s)^2 = 1 everywhere.  For the classical rotational type the
scalar equation is

    (n-1) H(s) = (n-2) x'/y + (x'' y' - x' y''),

and for the doubly-rotational O(l+1) x O(m+1) type

    l y'/x - m x'/y - (x'' y' - x' y'') + (n-1) H(s) = 0,   n = l + m + 2.

Everything in this module is a pure function of its arguments; there is no
global mutable state.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline


# ---------------------------------------------------------------------------
# errors
# ---------------------------------------------------------------------------

class PMCurveError(Exception):
    """Base class for solver errors; may carry the arc-length position."""

    def __init__(self, message, s=None):
        if s is not None:
            message = f"{message} (at s={s:.12g})"
        super().__init__(message)
        self.s = s


class DivisionByAxis(PMCurveError):
    """A governing-equation term was evaluated on its singular set."""


class StepSizeUnderflow(PMCurveError):
    """Adaptive step fell below the machine-scaled floor; likely an
    unhandled singularity."""


class LimitMismatch(PMCurveError):
    """Measured incoming slope disagrees with the theoretical limit."""


class ChartWidthUnderflow(PMCurveError):
    """Chart width Y shrank below the machine-scaled floor."""


class NormBoundExceeded(PMCurveError):
    """Picard iterate left the weighted ball sup|q(y)/y| <= M."""


class DenominatorVanished(PMCurveError):
    """A running denominator in the Psi/Theta integrand became nonpositive."""


class UnsupportedOrder(PMCurveError):
    """Expansion coefficients are implemented only up to order 2."""


class EventPileup(PMCurveError):
    """Two singular events occurred within 10*axis_eps of arc length."""


# ---------------------------------------------------------------------------
# prescribed mean curvature fields
# ---------------------------------------------------------------------------

class HField:
    """A prescribed mean curvature function H(s), evaluable on all of R.

    Closed set of variants (constant, polynomial, Fourier, table) so runs
    serialize to JSON and reproduce exactly.  Every variant also exposes an
    exact antiderivative, which downstream turning-angle integrals rely on.
    """

    kind = "abstract"

    def __call__(self, s):
        raise NotImplementedError

    def antiderivative(self, s):
        """Integral of H over [0, s] (signed)."""
        raise NotImplementedError

    def negated(self):
        """The field s -> -H(s)."""
        raise NotImplementedError

    def reflected_negated(self):
        """The field s -> -H(-s); appears when the curve is traversed with
        reversed arc length."""
        raise NotImplementedError

    def as_callable(self):
        """A fast scalar closure, for integrator hot loops."""
        return self

    def to_json(self):
        raise NotImplementedError

    @staticmethod
    def from_json(obj):
        if isinstance(obj, str):
            obj = json.loads(obj)
        kind = obj.get("kind")
        if kind == "constant":
            return ConstantH(float(obj["value"]))
        if kind == "polynomial":
            return PolynomialH([float(c) for c in obj["coeffs"]])
        if kind == "fourier":
            return FourierH(float(obj["a0"]),
                            [float(c) for c in obj.get("cos", [])],
                            [float(c) for c in obj.get("sin", [])],
                            float(obj["freq"]))
        if kind == "table":
            samples = [(float(a), float(b)) for a, b in obj["samples"]]
            return TableH(samples, obj.get("interp", "linear"),
                          obj.get("extrap", "clamp"))
        raise ValueError(f"unknown HField kind: {kind!r}")

    def __repr__(self):
        return f"{type(self).__name__}({self.to_json()})"


@dataclass(frozen=True, repr=False)
class ConstantH(HField):
    value: float
    kind = "constant"

    def __call__(self, s):
        if np.ndim(s):
            return np.full(np.shape(s), self.value)
        return self.value

    def antiderivative(self, s):
        return self.value * s

    def negated(self):
        return ConstantH(-self.value)

    def reflected_negated(self):
        return ConstantH(-self.value)

    def as_callable(self):
        v = self.value
        return lambda s: v

    def to_json(self):
        return {"kind": "constant", "value": self.value}


@dataclass(frozen=True, repr=False)
class PolynomialH(HField):
    """H(s) = sum_k coeffs[k] * s**k (ascending powers)."""

    coeffs: tuple
    kind = "polynomial"

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def __call__(self, s):
        return np.polynomial.polynomial.polyval(s, self.coeffs)

    def antiderivative(self, s):
        anti = [0.0] + [c / (k + 1) for k, c in enumerate(self.coeffs)]
        return np.polynomial.polynomial.polyval(s, anti)

    def negated(self):
        return PolynomialH(tuple(-c for c in self.coeffs))

    def reflected_negated(self):
        # -H(-s): coefficient of s^k picks up (-1)^(k+1)
        return PolynomialH(tuple(((-1.0) ** (k + 1)) * c
                                 for k, c in enumerate(self.coeffs)))

    def to_json(self):
        return {"kind": "polynomial", "coeffs": list(self.coeffs)}


@dataclass(frozen=True, repr=False)
class FourierH(HField):
    """H(s) = a0 + sum_k cos_coeffs[k] cos((k+1) w s) + sin_coeffs[k] sin((k+1) w s)."""

    a0: float
    cos_coeffs: tuple
    sin_coeffs: tuple
    frequency: float
    kind = "fourier"

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))

    def __call__(self, s):
        s = np.asarray(s, dtype=float) if np.ndim(s) else float(s)
        out = self.a0 + 0.0 * s if np.ndim(s) else self.a0
        w = self.frequency
        for k, c in enumerate(self.cos_coeffs):
            out = out + c * np.cos((k + 1) * w * s)
        for k, d in enumerate(self.sin_coeffs):
            out = out + d * np.sin((k + 1) * w * s)
        return out

    def antiderivative(self, s):
        w = self.frequency
        out = self.a0 * s
        for k, c in enumerate(self.cos_coeffs):
            kw = (k + 1) * w
            out = out + c * np.sin(kw * s) / kw
        for k, d in enumerate(self.sin_coeffs):
            kw = (k + 1) * w
            out = out + d * (1.0 - np.cos(kw * s)) / kw
        return out

    def negated(self):
        return FourierH(-self.a0, tuple(-c for c in self.cos_coeffs),
                        tuple(-c for c in self.sin_coeffs), self.frequency)

    def reflected_negated(self):
        # -H(-s) = -a0 - sum c cos + sum d sin
        return FourierH(-self.a0, tuple(-c for c in self.cos_coeffs),
                        tuple(c for c in self.sin_coeffs), self.frequency)

    def to_json(self):
        return {"kind": "fourier", "a0": self.a0, "cos": list(self.cos_coeffs),
                "sin": list(self.sin_coeffs), "freq": self.frequency}


class TableH(HField):
    """Tabulated H with declared interpolation (linear|cubic) and
    extrapolation (clamp|periodic).

    Abscissae must be strictly increasing.  Periodic extrapolation wraps s
    into [s_0, s_N) with period s_N - s_0; clamp holds the boundary values.
    """

    kind = "table"

    def __init__(self, samples, interpolation="linear", extrapolation="clamp"):
        samples = [(float(a), float(b)) for a, b in samples]
        if len(samples) < 2:
            raise ValueError("table needs at least two samples")
        xs = np.array([a for a, _ in samples])
        if not np.all(np.diff(xs) > 0):
            raise ValueError("table abscissae must be strictly increasing")
        if interpolation not in ("linear", "cubic"):
            raise ValueError(f"unknown interpolation {interpolation!r}")
        if extrapolation not in ("clamp", "periodic"):
            raise ValueError(f"unknown extrapolation {extrapolation!r}")
        self.samples = samples
        self.interpolation = interpolation
        self.extrapolation = extrapolation
        self._xs = xs
        self._hs = np.array([b for _, b in samples])
        if interpolation == "cubic":
            self._spline = CubicSpline(self._xs, self._hs)
            self._anti = self._spline.antiderivative()
        else:
            self._spline = None
            # cumulative trapezoid at the knots; exact for the interpolant
            seg = 0.5 * (self._hs[1:] + self._hs[:-1]) * np.diff(self._xs)
            self._cum = np.concatenate([[0.0], np.cumsum(seg)])
        self._period = float(self._xs[-1] - self._xs[0])
        self._anti0 = None  # lazy F(0)

    # -- evaluation --------------------------------------------------------

    def _fold(self, s):
        """Map s into the table range per the extrapolation rule; returns
        (folded s, whole periods) with periods = 0 for clamp."""
        lo, hi = self._xs[0], self._xs[-1]
        if self.extrapolation == "clamp":
            return min(max(s, lo), hi), 0
        k = math.floor((s - lo) / self._period)
        return s - k * self._period, k

    def _eval_inside(self, s):
        if self._spline is not None:
            return float(self._spline(s))
        return float(np.interp(s, self._xs, self._hs))

    def __call__(self, s):
        if np.ndim(s):
            return np.array([self(float(v)) for v in np.ravel(s)]).reshape(np.shape(s))
        sf, _ = self._fold(float(s))
        return self._eval_inside(sf)

    # -- exact antiderivative ----------------------------------------------

    def _inside_integral(self, s):
        """Integral of the interpolant from x_0 to s, s inside the range."""
        if self._spline is not None:
            return float(self._anti(s) - self._anti(self._xs[0]))
        j = max(0, min(len(self._xs) - 2, bisect.bisect_right(self._xs, s) - 1))
        x0, x1 = self._xs[j], self._xs[j + 1]
        h0, h1 = self._hs[j], self._hs[j + 1]
        dt = s - x0
        slope = (h1 - h0) / (x1 - x0)
        return float(self._cum[j] + h0 * dt + 0.5 * slope * dt * dt)

    def _anti_global(self, s):
        """An antiderivative of the extended field, valid on all of R."""
        lo, hi = self._xs[0], self._xs[-1]
        if self.extrapolation == "clamp":
            if s < lo:
                return self._hs[0] * (s - lo)
            if s > hi:
                return self._inside_integral(hi) + self._hs[-1] * (s - hi)
            return self._inside_integral(s)
        sf, k = self._fold(s)
        return k * self._inside_integral(hi) + self._inside_integral(sf)

    def antiderivative(self, s):
        if self._anti0 is None:
            self._anti0 = self._anti_global(0.0)
        if np.ndim(s):
            return np.array([self.antiderivative(float(v)) for v in np.ravel(s)]).reshape(np.shape(s))
        return self._anti_global(float(s)) - self._anti0

    # -- transforms ---------------------------------------------------------

    def negated(self):
        return TableH([(a, -b) for a, b in self.samples],
                      self.interpolation, self.extrapolation)

    def reflected_negated(self):
        return TableH([(-a, -b) for a, b in reversed(self.samples)],
                      self.interpolation, self.extrapolation)

    def to_json(self):
        return {"kind": "table", "samples": [[a, b] for a, b in self.samples],
                "interp": self.interpolation, "extrap": self.extrapolation}


def eval_h(h, s):
    """Evaluate the prescribed mean curvature field at arc length s."""
    return h(s)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Rot:
    """O(n-1)-invariant (classical rotational) type in R^n, n >= 3."""

    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("rotational type requires n >= 3")

    @property
    def ambient_n(self):
        return self.n


@dataclass(frozen=True)
class Product:
    """O(l+1) x O(m+1)-invariant type in R^n, n = l + m + 2."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 1 or self.m < 1:
            raise ValueError("product type requires l >= 1 and m >= 1")

    @property
    def ambient_n(self):
        return self.l + self.m + 2


def geometry_from_json(obj):
    if obj.get("type") == "rot":
        return Rot(int(obj["n"]))
    if obj.get("type") == "lm":
        return Product(int(obj["l"]), int(obj["m"]))
    raise ValueError(f"unknown geometry: {obj!r}")


def geometry_to_json(geom):
    if isinstance(geom, Rot):
        return {"type": "rot", "n": geom.n}
    return {"type": "lm", "l": geom.l, "m": geom.m}


# ---------------------------------------------------------------------------
# curve states and events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveState:
    """One point of the arc-length-parametrized generating curve."""

    s: float
    x: float
    y: float
    xp: float
    yp: float

    def unit_speed_defect(self):
        return abs(self.xp * self.xp + self.yp * self.yp - 1.0)

    def position(self):
        return (self.x, self.y)


AXIS_CONTACT = "AxisContact"
Y_AXIS_CONTACT = "YAxisContact"
ORIGIN_CONTACT = "OriginContact"


@dataclass(frozen=True)
class SingularEvent:
    """Contact of the generating curve with the singular set.

    incoming_slope_sq records the measured square of the vanishing-direction
    slope at closest numerical approach: x'^2 for axis contact (limit 0),
    y'^2 for y-axis contact (limit 0), x'^2 for origin contact
    (limit l/(l+m)).
    """

    kind: str
    s_event: float
    contact_point: tuple
    incoming_slope_sq: float

    def to_json(self):
        return {"kind": self.kind, "s": self.s_event,
                "x": self.contact_point[0], "y": self.contact_point[1],
                "slope_sq": self.incoming_slope_sq}


@dataclass
class SolverConfig:
    """Free numerical constants of the whole pipeline.

    chart_Y_init / norm_bound_M seed the (Y, M) pair of the weighted ball
    the Picard solvers contract on; chart_Y_shrink is the retry factor when
    a candidate Y fails the norm or contraction acceptance.
    """

    rk_tol: float = 1e-10
    rk_max_step: float = 0.05
    # contact approaches are dynamically unstable (perturbations grow like
    # y^-g with g = n-2, m, l, or l+m depending on the contact), so rounding
    # noise deflects a trajectory before it reaches a too-small threshold;
    # detection therefore happens at a radius the contact extrapolation can
    # absorb (its error is O(eps^3)), and large exponents may need these
    # raised further
    axis_eps: float = 1e-4
    origin_eps: float = 1e-4
    picard_tol: float = 1e-11
    picard_max_iter: int = 80
    chart_Y_init: float = 0.2
    chart_Y_shrink: float = 0.5
    norm_bound_M: float = 10.0
    stitch_tol: float = 1e-6
    chart_nodes: int = 256

    def __post_init__(self):
        for name in ("rk_tol", "rk_max_step", "axis_eps", "origin_eps",
                     "picard_tol", "chart_Y_init", "norm_bound_M", "stitch_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.chart_Y_shrink < 1.0:
            raise ValueError("chart_Y_shrink must lie in (0, 1)")
        if self.picard_max_iter < 1 or self.chart_nodes < 8:
            raise ValueError("picard_max_iter >= 1 and chart_nodes >= 8 required")
        if self.chart_nodes % 2:
            raise ValueError("chart_nodes must be even (Y/2 must be a node)")

    def with_(self, **kw):
        return replace(self, **kw)


# ---------------------------------------------------------------------------
# profile curve
# ---------------------------------------------------------------------------

ARC_LENGTH_CHART = "arc-length"
Y_CHART = "y-parametrized"


@dataclass
class CurveSegment:
    """Samples of one smooth piece of the curve, between singular events.

    Samples store the generating curve itself (y >= 0); ``sheet`` is the
    sign of the underlying smooth solution's y on this piece, so the signed
    solution is (x, sheet*y).  For product geometry ``sheet`` is the product
    of the two reflection parities.
    """

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    xp: np.ndarray
    yp: np.ndarray
    chart: str = ARC_LENGTH_CHART
    sheet: int = 1

    def __len__(self):
        return len(self.s)

    def state(self, i):
        return CurveState(float(self.s[i]), float(self.x[i]), float(self.y[i]),
                          float(self.xp[i]), float(self.yp[i]))

    def interpolate(self, s):
        """Cubic Hermite interpolation (positions and renormalized tangent)."""
        s = float(s)
        if len(self.s) == 1:
            return self.state(0)
        j = max(0, min(len(self.s) - 2, bisect.bisect_right(self.s, s) - 1))
        s0, s1 = self.s[j], self.s[j + 1]
        h = s1 - s0
        if h <= 0:
            return self.state(j)
        t = (s - s0) / h
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        d00 = 6 * t * (t - 1) / h
        d10 = (1 - t) * (1 - 3 * t)
        d01 = -6 * t * (t - 1) / h
        d11 = t * (3 * t - 2)
        x = (h00 * self.x[j] + h01 * self.x[j + 1]
             + h * (h10 * self.xp[j] + h11 * self.xp[j + 1]))
        y = (h00 * self.y[j] + h01 * self.y[j + 1]
             + h * (h10 * self.yp[j] + h11 * self.yp[j + 1]))
        xp = (d00 * self.x[j] + d01 * self.x[j + 1]
              + d10 * self.xp[j] + d11 * self.xp[j + 1])
        yp = (d00 * self.y[j] + d01 * self.y[j + 1]
              + d10 * self.yp[j] + d11 * self.yp[j + 1])
        nrm = math.hypot(xp, yp)
        if nrm > 0:
            xp, yp = xp / nrm, yp / nrm
        return CurveState(s, float(x), float(y), float(xp), float(yp))


@dataclass
class ProfileCurve:
    """Ordered segments of the extended generating curve plus event markers."""

    segments: list
    events: list
    geometry: object
    h: HField
    initial: CurveState
    passages: list = field(default_factory=list)  # (event, chart_in, chart_out)

    @property
    def s_min(self):
        return float(self.segments[0].s[0])

    @property
    def s_max(self):
        return float(self.segments[-1].s[-1])

    def states(self):
        for seg in self.segments:
            for i in range(len(seg)):
                yield seg.state(i)

    def segment_at(self, s):
        for k, seg in enumerate(self.segments):
            if seg.s[0] - 1e-14 <= s <= seg.s[-1] + 1e-14:
                return k, seg
        if s < self.s_min:
            return 0, self.segments[0]
        return len(self.segments) - 1, self.segments[-1]

    def interpolate(self, s):
        _, seg = self.segment_at(s)
        return seg.interpolate(s)

    def interpolate_signed(self, s):
        """State of the underlying smooth solution (signed y)."""
        k, seg = self.segment_at(s)
        st = seg.interpolate(s)
        if seg.sheet < 0:
            return CurveState(st.s, st.x, -st.y, st.xp, -st.yp), -1
        return st, 1

    def min_y(self):
        return min(float(np.min(seg.y)) for seg in self.segments)

    def resample(self, ds):
        """Resample at spacing ds; returns rows (state, segment index, chart).

        The grid runs from s_min in steps of ds and always ends exactly at
        s_max (the final interval may be shorter)."""
        rows = []
        lo, hi = self.s_min, self.s_max
        grid = []
        k = 0
        while lo + k * ds < hi - 1e-12:
            grid.append(lo + k * ds)
            k += 1
        grid.append(hi)
        for s in grid:
            k, seg = self.segment_at(s)
            rows.append((seg.interpolate(s), k, seg.chart))
        return rows


# ---------------------------------------------------------------------------
# pointwise residuals
# ---------------------------------------------------------------------------

def residual_rot(state, second_derivs, n, h_val):
    """Residual of the rotational governing equation at one curve point.

    Returns (n-1) h - (n-2) x'/y - (x'' y' - x' y''); zero exactly when the
    point satisfies the equation.
    """
    if state.y == 0:
        raise DivisionByAxis("y = 0 in rotational residual", s=state.s)
    xpp, ypp = second_derivs
    return ((n - 1) * h_val - (n - 2) * state.xp / state.y
            - (xpp * state.yp - state.xp * ypp))


def residual_lm(state, second_derivs, l, m, h_val):
    """Residual of the O(l+1) x O(m+1) system at one curve point.

    Returns l y'/x - m x'/y - (x'' y' - x' y'') + (n-1) h with n = l+m+2.
    With l = 0, m = n-2 this reduces to residual_rot for every input.
    """
    if state.x == 0 or state.y == 0:
        raise DivisionByAxis("x = 0 or y = 0 in product residual", s=state.s)
    xpp, ypp = second_derivs
    n = l + m + 2
    return (l * state.yp / state.x - m * state.xp / state.y
            - (xpp * state.yp - state.xp * ypp) + (n - 1) * h_val)
