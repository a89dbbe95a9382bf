"""Domain types, H-field evaluation/serialization, and residual oracles."""

import json
import math

import numpy as np
import pytest
from scipy.integrate import quad

from pmcurves import (ConstantH, CurveState, DivisionByAxis, FourierH, HField,
                      PolynomialH, Product, Rot, SolverConfig, TableH, eval_h,
                      residual_lm, residual_rot)


# ---------------------------------------------------------------------------
# H field evaluation
# ---------------------------------------------------------------------------

def test_eval_constant():
    assert eval_h(ConstantH(2.0), 5.0) == 2.0


def test_eval_table_linear_midpoint():
    h = TableH([(0.0, 1.0), (1.0, 3.0)], "linear", "clamp")
    assert eval_h(h, 0.5) == pytest.approx(2.0, abs=1e-15)


def test_eval_fourier_at_zero():
    h = FourierH(1.0, [0.5], [], 1.0)
    assert eval_h(h, 0.0) == pytest.approx(1.5, abs=1e-15)


def test_eval_polynomial():
    h = PolynomialH([1.0, 0.0, 1.0])  # 1 + s^2
    assert eval_h(h, 2.0) == pytest.approx(5.0)
    assert eval_h(h, -3.0) == pytest.approx(10.0)


def test_table_clamp_and_periodic():
    t = [(0.0, 1.0), (1.0, 2.0), (2.0, 1.0)]
    clamp = TableH(t, "linear", "clamp")
    assert clamp(-5.0) == pytest.approx(1.0)
    assert clamp(9.0) == pytest.approx(1.0)
    per = TableH(t, "linear", "periodic")
    assert per(2.5) == pytest.approx(per(0.5))
    assert per(-1.5) == pytest.approx(per(0.5))


def test_table_requires_increasing_abscissae():
    with pytest.raises(ValueError):
        TableH([(0.0, 1.0), (0.0, 2.0)])


@pytest.mark.parametrize("h", [
    ConstantH(0.7),
    PolynomialH([1.0, -0.5, 0.25]),
    FourierH(0.3, [0.2, 0.1], [0.4], 1.5),
    TableH([(-2.0, 1.0), (-0.5, 0.3), (0.7, -0.2), (2.0, 0.5)], "linear", "clamp"),
    TableH([(-2.0, 1.0), (-0.5, 0.3), (0.7, -0.2), (2.0, 0.5)], "cubic", "clamp"),
    TableH([(-1.0, 1.0), (0.0, 0.4), (1.5, 0.9)], "linear", "periodic"),
])
def test_json_round_trip(h):
    back = HField.from_json(json.dumps(h.to_json()))
    for s in np.linspace(-4.0, 4.0, 23):
        assert back(float(s)) == pytest.approx(h(float(s)), abs=1e-14)


@pytest.mark.parametrize("h", [
    ConstantH(0.7),
    PolynomialH([1.0, -0.5, 0.25]),
    FourierH(0.3, [0.2, 0.1], [0.4], 1.5),
    TableH([(-2.0, 1.0), (-0.5, 0.3), (0.7, -0.2), (2.0, 0.5)], "linear", "clamp"),
    TableH([(-2.0, 1.0), (-0.5, 0.3), (0.7, -0.2), (2.0, 0.5)], "cubic", "clamp"),
    TableH([(-1.0, 1.0), (0.0, 0.4), (1.5, 0.9)], "linear", "periodic"),
])
@pytest.mark.parametrize("s", [-3.7, -1.2, 0.0, 0.4, 1.9, 5.3])
def test_antiderivative_against_quadrature(h, s):
    # brute-force oracle: adaptive quadrature of the field itself, told about
    # the table kinks so its own error stays below the comparison tolerance
    points = None
    if isinstance(h, TableH):
        lo, hi = min(0.0, s), max(0.0, s)
        knots = [a for a, _ in h.samples]
        if h.extrapolation == "periodic":
            period = knots[-1] - knots[0]
            k0 = math.floor((lo - knots[0]) / period) - 1
            k1 = math.ceil((hi - knots[0]) / period) + 1
            knots = [a + k * period for k in range(k0, k1 + 1) for a in knots[:-1]]
        points = sorted(set(a for a in knots if lo < a < hi))
    expected, _ = quad(lambda t: h(t), 0.0, s, limit=400, points=points or None)
    assert h.antiderivative(s) == pytest.approx(expected, abs=1e-10)


@pytest.mark.parametrize("h", [
    ConstantH(0.7),
    PolynomialH([1.0, -0.5, 0.25]),
    FourierH(0.3, [0.2], [0.4], 1.5),
    TableH([(-2.0, 1.0), (0.7, -0.2), (2.0, 0.5)], "linear", "clamp"),
])
def test_field_transforms(h):
    neg = h.negated()
    refl = h.reflected_negated()
    for s in np.linspace(-3.0, 3.0, 13):
        s = float(s)
        assert neg(s) == pytest.approx(-h(s), abs=1e-14)
        assert refl(s) == pytest.approx(-h(-s), abs=1e-14)


# ---------------------------------------------------------------------------
# geometry invariants
# ---------------------------------------------------------------------------

def test_geometry_validation():
    assert Rot(3).ambient_n == 3
    assert Product(1, 2).ambient_n == 5
    with pytest.raises(ValueError):
        Rot(2)
    with pytest.raises(ValueError):
        Product(0, 3)


def test_solver_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(rk_tol=-1.0)
    with pytest.raises(ValueError):
        SolverConfig(chart_Y_shrink=1.5)


# ---------------------------------------------------------------------------
# residuals
# ---------------------------------------------------------------------------

def test_residual_rot_cylinder():
    n, c = 4, 1.5
    st = CurveState(0.0, 0.0, c, 1.0, 0.0)
    h = (n - 2) / ((n - 1) * c)
    assert residual_rot(st, (0.0, 0.0), n, h) == pytest.approx(0.0, abs=1e-15)


def test_residual_rot_unit_circle():
    # x = sin s, y = cos s solves the n=3 equation with H = 1; oracle is the
    # symbolic substitution of the parametrization
    s = math.pi / 4
    st = CurveState(s, math.sin(s), math.cos(s), math.cos(s), -math.sin(s))
    second = (-math.sin(s), -math.cos(s))
    assert residual_rot(st, second, 3, 1.0) == pytest.approx(0.0, abs=1e-14)


def test_residual_rot_perturbed_cylinder_matches_independent_formula():
    n, c, hval = 5, 2.0, 0.3
    yp = 0.1
    xp = math.sqrt(1.0 - yp * yp)
    st = CurveState(0.0, 0.0, c, xp, yp)
    second = (0.02, -0.01)
    got = residual_rot(st, second, n, hval)
    # independent re-evaluation of the same algebra
    expected = (n - 1) * hval - (n - 2) * xp / c - (second[0] * yp - xp * second[1])
    assert got == pytest.approx(expected, rel=1e-13)
    assert got != 0.0


def test_residual_rot_axis_guard():
    st = CurveState(0.0, 1.0, 0.0, 0.0, 1.0)
    with pytest.raises(DivisionByAxis):
        residual_rot(st, (0.0, 0.0), 3, 1.0)


def test_residual_lm_minimal_cone():
    s = 1.0
    r = 1.0 / math.sqrt(2.0)
    st = CurveState(s, s * r, s * r, r, r)
    assert residual_lm(st, (0.0, 0.0), 1, 1, 0.0) == pytest.approx(0.0, abs=1e-14)


def test_residual_lm_sphere():
    # quarter circle x = cos s, y = sin s in n = 4: symbolic substitution
    # gives (l+m+1)/R + (n-1) h = 0, so h = -1 for R = 1
    s = math.pi / 4
    st = CurveState(s, math.cos(s), math.sin(s), -math.sin(s), math.cos(s))
    second = (-math.cos(s), -math.sin(s))
    assert residual_lm(st, second, 1, 1, -1.0) == pytest.approx(0.0, abs=1e-14)
    # dropping the h-term leaves exactly (l+m+1)/R = +3
    assert residual_lm(st, second, 1, 1, 0.0) == pytest.approx(3.0, abs=1e-13)


def test_residual_lm_reduces_to_rot_for_l_zero():
    rng = np.random.default_rng(42)
    for _ in range(50):
        n = int(rng.integers(3, 7))
        theta = rng.uniform(0, 2 * math.pi)
        st = CurveState(rng.uniform(-1, 1), rng.uniform(0.2, 2.0),
                        rng.uniform(0.2, 2.0), math.cos(theta), math.sin(theta))
        second = (rng.uniform(-2, 2), rng.uniform(-2, 2))
        hval = rng.uniform(-2, 2)
        a = residual_lm(st, second, 0, n - 2, hval)
        b = residual_rot(st, second, n, hval)
        assert a == pytest.approx(b, rel=1e-13, abs=1e-13)


def test_residual_lm_axis_guards():
    st = CurveState(0.0, 0.0, 1.0, 0.0, 1.0)
    with pytest.raises(DivisionByAxis):
        residual_lm(st, (0.0, 0.0), 1, 1, 0.0)
