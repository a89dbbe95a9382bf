"""Generating curves of rotational and doubly-rotational hypersurfaces with
prescribed mean curvature, extended through axis and origin contacts."""

__version__ = "0.1.0"

from .core import (ARC_LENGTH_CHART, AXIS_CONTACT, ORIGIN_CONTACT,
                   Y_AXIS_CONTACT, Y_CHART, ChartWidthUnderflow, ConstantH,
                   CurveSegment, CurveState, DenominatorVanished,
                   DivisionByAxis, EventPileup, FourierH, HField,
                   LimitMismatch, NormBoundExceeded, PMCurveError,
                   PolynomialH, ProfileCurve, Product, Rot, SingularEvent,
                   SolverConfig, StepSizeUnderflow, TableH, UnsupportedOrder,
                   eval_h, residual_lm, residual_rot)
from .integrate import (EventDetection, Trajectory, derivative_field,
                        integrate_until_event, refine_event)
from .chart_rot import (SingularChartRot, continue_through_axis, phi_apply,
                        solve_singular_rot)
from .chart_lm import (SingularChartLM, continue_through_origin, origin_slope,
                       psi_apply, solve_case_a, solve_case_b, theta_apply)
from .asymptotics import (EtaAccumulator, FGPair, PeriodDiagnostics,
                          check_convergence_bound, check_expansion_scaling,
                          check_positivity, eta, expansion_coeff,
                          fg_from_curve, fg_infinity, gamma_infinity,
                          period_diagnostics)
from .engine import RunSpec, extend, sweep

__all__ = [name for name in dir() if not name.startswith("_")]
