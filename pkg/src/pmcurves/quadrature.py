"""Product quadrature against monomial weights on (0, Y].

The singular charts repeatedly evaluate

    I(y_j) = integral_0^{y_j} g(eta) * eta^p  d eta

on a uniform grid y_j = j*Y/N, where the weight eta^p is known analytically
and g is only available at the nodes.  Each panel integrates the linear
interpolant of g against the exact monomial moments, which keeps full
accuracy where the weight vanishes or is flat near eta = 0 and makes the
scheme second order in the grid spacing.  With p = 0 it reduces to the
composite trapezoid rule, which the nonlocal inner integrals reuse so the
discrete fixed point stays internally consistent.
"""

from __future__ import annotations

import numpy as np


def uniform_grid(Y, n_nodes):
    """Nodes y_j = j*Y/n, j = 1..n (the origin is kept implicit)."""
    return np.linspace(Y / n_nodes, Y, n_nodes)


class PanelMoments:
    """Precomputed monomial moments of the panels of a uniform grid."""

    def __init__(self, grid, p):
        self.grid = np.asarray(grid, dtype=float)
        self.p = int(p)
        edges = np.concatenate([[0.0], self.grid])
        self.left = edges[:-1]
        self.width = np.diff(edges)
        # m0 = int eta^p, m1 = int eta^(p+1) over each panel
        self.m0 = (edges[1:] ** (p + 1) - edges[:-1] ** (p + 1)) / (p + 1)
        self.m1 = (edges[1:] ** (p + 2) - edges[:-1] ** (p + 2)) / (p + 2)

    def weighted_prefix(self, gvals, g0=0.0):
        """Prefix integrals I_j = int_0^{y_j} g_lin(eta) eta^p d eta.

        gvals holds g at the grid nodes; g0 is the value at eta = 0.
        """
        g = np.asarray(gvals, dtype=float)
        gl = np.concatenate([[g0], g[:-1]])
        slope = (g - gl) / self.width
        panel = gl * self.m0 + slope * (self.m1 - self.left * self.m0)
        return np.cumsum(panel)


def trapezoid_prefix(vals, v0, grid):
    """Prefix integrals of the piecewise-linear interpolant (weightless)."""
    v = np.asarray(vals, dtype=float)
    edges = np.concatenate([[0.0], np.asarray(grid, dtype=float)])
    vl = np.concatenate([[v0], v[:-1]])
    panel = 0.5 * (vl + v) * np.diff(edges)
    return np.cumsum(panel)
