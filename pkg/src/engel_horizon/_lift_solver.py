"""Constrained least squares for integrated lifts over loop templates.

With the x-perturbation held fixed, every lifted coordinate is affine in the
coefficients of the slope perturbation, because the lift is nothing but
repeated cumulative trapezoidal quadrature. Closure and endpoint conditions
are therefore linear constraints, and tracking the original coordinates is a
linear least-squares objective.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import cumtrapz, wrap_step

DAMPING = 1e-8


@dataclass
class LiftSolution:
    coeffs: np.ndarray
    u: np.ndarray
    levels: list  # lifted coordinates, one array per integration depth
    closing: np.ndarray  # end-value residuals of every level
    response: np.ndarray  # d(closing)/d(coeffs), the linear response model


def _lift_levels(u, x, seeds, periodic):
    levels = []
    ends = []
    f = u
    for s in seeds:
        L = s + cumtrapz(f, x)
        end = L[-1] + wrap_step(f, x) if periodic else L[-1]
        levels.append(L)
        ends.append(end)
        f = L
    return levels, np.array(ends)


def _lift_columns(basis, x, periodic, depth):
    """Lifted response of every basis column with zero seeds."""
    cols = []
    ends = []
    f = basis
    for _ in range(depth):
        L = np.vstack([np.zeros((1, f.shape[1])), np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(x)[:, None], axis=0)])
        end = L[-1] + (0.5 * (f[-1] + f[0]) * (x[0] - x[-1]) if periodic else 0.0)
        cols.append(L)
        ends.append(end)
        f = L
    return cols, np.array(ends)


def solve_lift(x, u_base, basis, targets, seeds, end_targets, periodic=False, u_target=None, damping=DAMPING, weights=None, sample_weights=None):
    """Choose coefficients so the lift of ``u_base + basis @ c`` over ``x`` ends on target.

    Parameters
    ----------
    x : (n,) ndarray
        Perturbed first coordinate on the local samples.
    u_base : (n,) ndarray
        Slope coordinate before adding the basis.
    basis : (n, m) ndarray
        Slope perturbation shapes (zero at the local endpoints).
    targets : list of (n,) ndarrays
        Coordinates each lift level should track, innermost first.
    seeds : list of floats
        Values of each lift level at the first local sample.
    end_targets : list of floats
        Required end value of each level (after the closing segment when
        ``periodic``).
    u_target : (n,) ndarray, optional
        Slope values to track; defaults to ``u_base``.
    weights : sequence of floats, optional
        Tracking weight of the slope and of each level (default all 1).
    sample_weights : (n,) ndarray, optional
        Extra per-sample weight on every tracking row.
    """
    depth = len(seeds)
    n, m = basis.shape
    u_target = u_base if u_target is None else u_target
    base_levels, base_ends = _lift_levels(u_base, x, seeds, periodic)
    col_levels, col_ends = _lift_columns(basis, x, periodic, depth)

    wts = np.ones(depth + 1) if weights is None else np.asarray(weights, dtype=float)
    sw = np.ones(n) if sample_weights is None else np.sqrt(np.asarray(sample_weights, dtype=float))
    rows = [(wts[0] * sw)[:, None] * basis]
    rhs = [wts[0] * sw * (u_target - u_base)]
    for k, (L0, Lc, tgt) in enumerate(zip(base_levels, col_levels, targets)):
        rows.append((wts[k + 1] * sw)[:, None] * Lc)
        rhs.append(wts[k + 1] * sw * (tgt - L0))
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    C = col_ends
    d = np.asarray(end_targets, dtype=float) - base_ends

    G = A.T @ A
    lam = damping * max(np.trace(G) / max(m, 1), 1e-300)
    K = np.zeros((m + depth, m + depth))
    K[:m, :m] = G + lam * np.eye(m)
    K[:m, m:] = C.T
    K[m:, :m] = C
    sol = np.linalg.lstsq(K, np.concatenate([A.T @ b, d]), rcond=None)[0]
    coeffs = sol[:m]
    u = u_base + basis @ coeffs
    levels, ends = _lift_levels(u, x, seeds, periodic)
    return LiftSolution(coeffs, u, levels, ends - np.asarray(end_targets, dtype=float), C)
