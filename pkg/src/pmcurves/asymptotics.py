"""Limit objects and expansion coefficients of the large-c family, plus the
quantitative checks behind the positivity, convergence, scaling, and period
statements.

For the family of curves through (0, c) with horizontal initial tangent,
the rescaled quantities F_c = y y'/c and G_c = y x'/c converge, as
c -> infinity, to

    F_inf(s) = -sin eta(s),   G_inf(s) = cos eta(s),
    eta(s)   = (n-1) * int_0^s H(t) dt,

and the limit curve itself is

    Gamma_inf(s) = ( int_0^s cos eta(u) du,  -int_0^s sin eta(u) du ),

the plane curve of curvature -(n-1)H.  The epsilon = 1/c corrections are

    (F1, G1)(s) = U(s) int_0^s ( (n-2) cos eta(t), -sin eta(t) ) dt,
    (F2, G2)(s) = (n-2)(n-3) U(s)
                  int_0^s ( int_0^t cos eta ) ( sin eta(t), -cos eta(t) ) dt,

with U(s) the rotation by eta(s).  The period diagnostics integrate
cos eta, sin eta and the nested area integrand over one candidate period.

eta itself uses the exact antiderivative each H variant carries; the outer
oscillatory integrals are cached on adaptively refined Gauss-Legendre
panels so the triply nested coefficient stays cheap to evaluate.  The
panel caches grow lazily toward whatever range is requested (single
writer); warm them over the full range before sharing an accumulator
across threads.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import Rot, SolverConfig, UnsupportedOrder

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


class _PrefixIntegral:
    """Cached prefix integrals int_0^s f, on adaptive Gauss-Legendre panels."""

    def __init__(self, fn, tol=1e-13, init_width=0.25):
        self.fn = fn
        self.tol = tol
        self.init_width = init_width
        self.edges = [0.0]
        self.sums = [0.0]

    def _gl(self, a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        return half * float(np.dot(_GL_W, self.fn(mid + half * _GL_X)))

    def _refine(self, a, b, depth=0):
        whole = self._gl(a, b)
        mid = 0.5 * (a + b)
        left, right = self._gl(a, mid), self._gl(mid, b)
        if depth >= 40 or abs(whole - (left + right)) <= self.tol * max(1.0, b - a):
            return [(mid, left), (b, right)]
        return self._refine(a, mid, depth + 1) + self._refine(mid, b, depth + 1)

    def _extend_to(self, s):
        while s > self.edges[-1]:
            a = self.edges[-1]
            b = a + self.init_width
            for edge, val in self._refine(a, b):
                self.edges.append(edge)
                self.sums.append(self.sums[-1] + val)
        while s < self.edges[0]:
            b = self.edges[0]
            a = b - self.init_width
            pieces = self._refine(a, b)
            new_edges = [a] + [e for e, _ in pieces[:-1]]
            vals = [v for _, v in pieces]
            base = self.sums[0]
            cum = []
            run = base
            for v in reversed(vals):
                run = run - v
                cum.append(run)
            cum.reverse()  # prefix at new_edges
            self.edges = new_edges + self.edges
            self.sums = cum + self.sums

    def prefix(self, s):
        s = float(s)
        self._extend_to(s)
        i = bisect.bisect_right(self.edges, s) - 1
        i = max(0, min(i, len(self.edges) - 1))
        return self.sums[i] + self._gl(self.edges[i], s)

    def prefix_many(self, ss):
        return np.array([self.prefix(v) for v in np.ravel(ss)]).reshape(np.shape(ss))


class FGPair(NamedTuple):
    F: float
    G: float


@dataclass
class PeriodDiagnostics:
    L: float
    int_cos: float
    int_sin: float
    double_int: float
    signed_area: float

    def to_json(self):
        return {"L": self.L, "int_cos": self.int_cos, "int_sin": self.int_sin,
                "double_int": self.double_int, "signed_area": self.signed_area}


class EtaAccumulator:
    """Turning angle eta(s) = (n-1) int_0^s H and its cached integrals."""

    def __init__(self, h, n):
        self.h = h
        self.n = int(n)
        self._cos = _PrefixIntegral(lambda u: np.cos(self.eta(u)))
        self._sin = _PrefixIntegral(lambda u: np.sin(self.eta(u)))
        self._area_sin = _PrefixIntegral(
            lambda u: self._cos.prefix_many(u) * np.sin(self.eta(u)))
        self._area_cos = _PrefixIntegral(
            lambda u: self._cos.prefix_many(u) * np.cos(self.eta(u)))

    def eta(self, s):
        return (self.n - 1) * self.h.antiderivative(s)

    def rotation(self, s):
        e = self.eta(float(s))
        c, sn = math.cos(e), math.sin(e)
        return np.array([[c, -sn], [sn, c]])


def eta(acc, s):
    """Accumulated turning angle (n-1) int_0^s H(t) dt."""
    return float(acc.eta(float(s)))


def gamma_infinity(acc, s):
    """The limit curve point (int_0^s cos eta, -int_0^s sin eta)."""
    return (acc._cos.prefix(s), -acc._sin.prefix(s))


def fg_infinity(acc, s):
    """(F_inf, G_inf)(s) = (-sin eta, cos eta)."""
    e = acc.eta(float(s))
    return FGPair(-math.sin(e), math.cos(e))


def fg_from_curve(curve, c, s):
    """(y y'/c, y x'/c) interpolated from an extended curve (signed y)."""
    st, _sheet = curve.interpolate_signed(float(s))
    return FGPair(st.y * st.yp / c, st.y * st.xp / c)


def expansion_coeff(acc, k, s):
    """k-th epsilon-expansion coefficient of (F_c, G_c), k in {0, 1, 2}."""
    if k == 0:
        return fg_infinity(acc, s)
    if k == 1:
        v = np.array([(acc.n - 2) * acc._cos.prefix(s), -acc._sin.prefix(s)])
        out = acc.rotation(s) @ v
        return FGPair(float(out[0]), float(out[1]))
    if k == 2:
        fac = (acc.n - 2) * (acc.n - 3)
        v = np.array([acc._area_sin.prefix(s), -acc._area_cos.prefix(s)])
        out = fac * (acc.rotation(s) @ v)
        return FGPair(float(out[0]), float(out[1]))
    raise UnsupportedOrder(f"expansion coefficients stop at k = 2, got {k}")


# ---------------------------------------------------------------------------
# quantitative checks
# ---------------------------------------------------------------------------

def _s_grid(s_range, ds):
    lo, hi = s_range
    n = int(round((hi - lo) / ds))
    return np.linspace(lo, hi, n + 1)


def check_convergence_bound(curve_family, acc, s_range, ds=0.05, slack=1e-3):
    """Check (F_c - F_inf)^2 + (G_c - G_inf)^2 <= 2 (n-2)^2 s^2 / c^2.

    The bound is the integrated estimate from the convergence proof; the
    multiplicative slack absorbs the discretization of the curves.
    """
    n = acc.n
    grid = _s_grid(s_range, ds)
    per_c = {}
    max_ratio = 0.0
    ok = True
    for c, curve in sorted(curve_family.items()):
        worst = 0.0
        sup_dev = 0.0
        for s in grid:
            fc, gc = fg_from_curve(curve, c, s)
            fi, gi = fg_infinity(acc, s)
            val = (fc - fi) ** 2 + (gc - gi) ** 2
            sup_dev = max(sup_dev, math.sqrt(val))
            bound = 2.0 * (n - 2) ** 2 * s * s / (c * c)
            if bound == 0.0:
                if val > 1e-18:
                    ok = False
                    worst = math.inf
                continue
            ratio = val / bound
            worst = max(worst, ratio)
            if ratio > 1.0 + slack:
                ok = False
        per_c[c] = {"max_ratio": worst, "sup_deviation": sup_dev}
        max_ratio = max(max_ratio, worst)
    observed = {"max_ratio": max_ratio, "per_c": per_c}
    if max_ratio > 1.0:
        observed["note"] = ("ratio exceeded 1: the integrated bound "
                            "2(n-2)^2 s^2/c^2 is used; the differential "
                            "inequality carries the looser rate constant "
                            "2*sqrt(2)(n-2)/c")
    return {"check": "thm32-bound", "params": {"n": n, "c": sorted(curve_family),
                                               "s_range": list(s_range), "ds": ds},
            "observed": observed,
            "bound_or_expected": {"ratio_limit": 1.0 + slack},
            "pass": bool(ok)}


def check_expansion_scaling(curve_family, acc, K, s_range, ds=0.05):
    """Fit the epsilon-order of the K-truncated expansion remainder.

    E_K(c) = sup_s |(F_c, G_c) - sum_{k<=K} eps^k (F_k, G_k)| should scale
    like eps^(K+1); the fitted log-log slope must reach K + 1 - 0.25.  For
    n = 3 the k = 2 coefficient vanishes identically, so the K = 2 remainder
    still scales like eps^2 and the threshold drops to 2 - 0.25.
    """
    if K not in (1, 2):
        raise UnsupportedOrder(f"scaling check supports K in {{1, 2}}, got {K}")
    n = acc.n
    grid = _s_grid(s_range, ds)
    coeffs = {}
    for s in grid:
        coeffs[s] = [expansion_coeff(acc, k, s) for k in range(K + 1)]
    eps_list, err_list = [], []
    for c, curve in sorted(curve_family.items()):
        eps = 1.0 / c
        worst = 0.0
        for s in grid:
            fc, gc = fg_from_curve(curve, c, s)
            f_sum = sum(eps ** k * coeffs[s][k].F for k in range(K + 1))
            g_sum = sum(eps ** k * coeffs[s][k].G for k in range(K + 1))
            worst = max(worst, math.hypot(fc - f_sum, gc - g_sum))
        eps_list.append(eps)
        err_list.append(worst)
    slope = float(np.polyfit(np.log(eps_list), np.log(err_list), 1)[0])
    expected = K + 1 if not (K == 2 and n == 3) else 2
    threshold = expected - 0.25
    return {"check": f"thm33-scaling-K{K}",
            "params": {"n": n, "c": sorted(curve_family),
                       "s_range": list(s_range), "ds": ds},
            "observed": {"slope": slope, "eps": eps_list, "E": err_list},
            "bound_or_expected": {"min_slope": threshold},
            "pass": bool(slope >= threshold)}


def monotonicity_defect(h, s_span, increasing_right=True, samples=2001):
    """Largest violation of the positivity theorem's monotonicity hypothesis,
    sampled by central differences (an a.e. condition cannot be checked
    exactly for tabulated fields)."""
    lo, hi = s_span
    s = np.linspace(lo, hi, samples)
    ds = s[1] - s[0]
    hv = np.array([h(float(v)) for v in s])
    dh = (hv[2:] - hv[:-2]) / (2 * ds)
    mid = s[1:-1]
    sign = 1.0 if increasing_right else -1.0
    viol_pos = np.maximum(0.0, -sign * dh[mid > 0])
    viol_neg = np.maximum(0.0, sign * dh[mid < 0])
    out = 0.0
    if viol_pos.size:
        out = max(out, float(np.max(viol_pos)))
    if viol_neg.size:
        out = max(out, float(np.max(viol_neg)))
    return out


def check_positivity(h, c, geometry, s_span, cfg=None, sample_ds=0.02):
    """Run the extension from (0, c, 1, 0) and report the minimum height.

    Positivity is predicted when H(0) > 0 and either c > 1/H(0) with H
    nondecreasing away from 0 (theorem side) or 0 < c < 1/H(0) with H
    nonincreasing away from 0 (reversed side).  The monotonicity hypothesis
    is sampled numerically and only warned about; the caller owns it.
    """
    from .engine import RunSpec, extend

    if not isinstance(geometry, Rot):
        raise ValueError("positivity check applies to rotational geometry")
    cfg = cfg or SolverConfig()
    h0 = float(h(0.0))
    regime = None
    if h0 > 0:
        if c > 1.0 / h0:
            regime = "theorem"
        elif 0 < c < 1.0 / h0:
            regime = "remark"
    defect = monotonicity_defect(h, s_span, increasing_right=(regime != "remark"))
    monotone_ok = defect <= 1e-9

    spec = RunSpec(geometry=geometry, h=h, initial=(0.0, 0.0, float(c), 1.0, 0.0),
                   s_window=tuple(s_span), cfg=cfg, sample_ds=sample_ds)
    curve = extend(spec)
    min_y = 0.0 if curve.events else curve.min_y()
    predicted = regime is not None and monotone_ok
    return {"check": "thm31-positivity",
            "params": {"n": geometry.n, "c": c, "H": h.to_json(),
                       "s_span": list(s_span)},
            "observed": {"min_y": min_y, "events": len(curve.events),
                         "monotonicity_defect": defect, "regime": regime},
            "bound_or_expected": {"predicted_positive": predicted,
                                  "c_threshold": (1.0 / h0 if h0 > 0 else None)},
            "pass": bool(min_y > 0.0) if predicted else True}


def period_diagnostics(acc, L):
    """Necessary-condition integrals over a candidate period L.

    A periodic limit family forces int_0^L cos eta = int_0^L sin eta = 0 and,
    for n > 3, the vanishing of the nested integral whose absolute value is
    the signed area enclosed by the limit curve."""
    L = float(L)
    int_cos = acc._cos.prefix(L)
    int_sin = acc._sin.prefix(L)
    double_int = acc._area_sin.prefix(L)
    return PeriodDiagnostics(L=L, int_cos=int_cos, int_sin=int_sin,
                             double_int=double_int,
                             signed_area=abs(double_int))


def h_periodicity_defect(h, L, samples=1001):
    """max |H(s+L) - H(s)| over one period of samples."""
    s = np.linspace(0.0, L, samples)
    return float(max(abs(float(h(v + L)) - float(h(v))) for v in s))
