"""Self-consistent Picard driver shared by the singular-chart solvers.

The fixed-point operators take the pulled-back curvature H~(y) as given,
but H is prescribed in arc length and the chart map s(y) depends on the
unknown through ds/dy = +-sqrt(1 + q^2).  The driver therefore folds s(y)
into the iteration state: each sweep applies the integral operator with the
current H~, then refreshes s(y) from the new iterate.  The s-update is
Lipschitz in the iterate, so for small chart widths the combined map stays
contractive; the empirical contraction factor is measured and a candidate
width Y is accepted only when it is at most 0.9 and the iterate stays in
the weighted ball sup |f(y)/y| <= M.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DenominatorVanished
from .quadrature import trapezoid_prefix


@dataclass
class PicardResult:
    ok: bool
    f: np.ndarray | None = None
    s_of_y: np.ndarray | None = None
    contraction: float = 0.0
    sweeps: int = 0
    residual: float = float("inf")
    failure: str | None = None


def run_picard(apply_fn, rate_fn, rate0, grid, b, orientation, h_field, cfg):
    """Iterate f <- apply_fn(f, H~) with the s(y) coupling until the
    X-norm increment drops below picard_tol.

    apply_fn(f, h_tilde) evaluates the integral operator on the grid and may
    raise DenominatorVanished; rate_fn(f) gives |ds/dy| at the nodes and
    rate0 its limit at y = 0.  h_tilde is orientation * H(s(y)).
    """
    n_nodes = len(grid)
    f = np.zeros(n_nodes)
    s = b + orientation * rate0 * grid
    M = cfg.norm_bound_M
    prev_inc = None
    contraction = 0.0
    converged = False
    sweeps = 0

    for sweeps in range(1, cfg.picard_max_iter + 1):
        h_tilde = orientation * np.asarray(h_field(s), dtype=float)
        try:
            f_new = apply_fn(f, h_tilde)
        except DenominatorVanished:
            return PicardResult(ok=False, failure="denominator", sweeps=sweeps)
        if np.max(np.abs(f_new) / grid) > M:
            return PicardResult(ok=False, failure="norm", sweeps=sweeps)
        inc = float(np.max(np.abs(f_new - f) / grid))
        s = b + orientation * trapezoid_prefix(rate_fn(f_new), rate0, grid)
        f = f_new
        if prev_inc is not None and prev_inc > 100.0 * cfg.picard_tol:
            contraction = max(contraction, inc / prev_inc)
        if inc < cfg.picard_tol:
            converged = True
            break
        prev_inc = inc

    if not converged:
        return PicardResult(ok=False, failure="no-convergence", sweeps=sweeps,
                            contraction=contraction)
    if contraction > 0.9:
        return PicardResult(ok=False, failure="contraction", sweeps=sweeps,
                            contraction=contraction)

    # fixed-point residual in the X-norm, with the final s(y)
    h_tilde = orientation * np.asarray(h_field(s), dtype=float)
    try:
        residual = float(np.max(np.abs(f - apply_fn(f, h_tilde)) / grid))
    except DenominatorVanished:
        return PicardResult(ok=False, failure="denominator", sweeps=sweeps)
    return PicardResult(ok=True, f=f, s_of_y=s, contraction=contraction,
                        sweeps=sweeps, residual=residual)
