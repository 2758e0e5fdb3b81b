"""Closed-form weighted least-squares fit of a motion model to one region.

Minimizes ``E(A, b) = sum_u w_u ||F_u - A lift(u) - b||^2``. Weights are
rescaled to sum to 1 before solving (the minimizer does not depend on their
scale); the reported energy uses the caller's original weights.

Two equivalent forms are provided:

* fit_wls: homogeneous moments, ``M* = L_Fu L_uu^-1`` with ``M = [A b]``.
* fit_wls_centered: centred covariances, ``A* = S_FO S_OO^-1``,
  ``b* = mu_F - A* mu_O``.

Both add the same ridge ``r I`` to the (d+1)x(d+1) homogeneous moment matrix
(normalized weights), so they agree for every ridge value.
"""

from __future__ import annotations

import logging

import numpy as np

from gwm_segment.errors import DimensionMismatch, SingularSystem, ZeroWeight
from gwm_segment.flowfield.containers import FlowField
from gwm_segment.motion.models import (
    CoordNormalization,
    ModelFamily,
    MotionModelParams,
    design_matrix,
)

logger = logging.getLogger(__name__)

# relative ridge: r = DEFAULT_RIDGE_SCALE * trace(L_uu) / (d + 1)
DEFAULT_RIDGE_SCALE = 1e-9

_MAX_CONDITION = 1.0 / np.finfo(np.float64).eps


def default_ridge(trace_uu: float, family: ModelFamily) -> float:
    """Default ridge for a homogeneous moment matrix with the given trace."""
    return DEFAULT_RIDGE_SCALE * trace_uu / (ModelFamily.parse(family).dim + 1)


def _prepare(
    flow: FlowField,
    weights: np.ndarray,
    family: ModelFamily,
    norm: CoordNormalization | None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray, float, ModelFamily]:
    """Flatten inputs: (F (N,2), X (N,d+1), w (N,), total weight, family)."""
    family = ModelFamily.parse(family)
    norm = norm or CoordNormalization.for_shape(flow.shape)
    if (norm.height, norm.width) != tuple(flow.shape):
        raise DimensionMismatch("coordinate normalization does not match the flow lattice")
    w = np.asarray(weights, dtype=np.float64).reshape(-1)
    if w.size != flow.width * flow.height:
        raise DimensionMismatch(f"{w.size} weights for {flow.width * flow.height} pixels")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite and non-negative")
    total = float(w.sum())
    if not total > 0:
        raise ZeroWeight("weights sum to zero")
    F = flow.data.reshape(-1, 2).astype(np.float64)
    X = design_matrix(norm, family)
    return F, X, w, total, family


def _solve(lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``lhs @ X = rhs`` for a symmetric positive (semi)definite ``lhs``."""
    cond = np.linalg.cond(lhs)
    if not np.isfinite(cond) or cond > _MAX_CONDITION:
        raise SingularSystem(f"moment matrix is singular (condition number {cond:.3g})")
    try:
        return np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(str(e)) from e


def weighted_energy(F: np.ndarray, X: np.ndarray, M: np.ndarray, w: np.ndarray) -> float:
    """``sum_u w_u ||F_u - M xbar_u||^2`` evaluated directly."""
    residual = F - X @ M.T
    return float(np.dot(w, np.einsum("nc,nc->n", residual, residual)))


def fit_wls(
    flow: FlowField,
    weights: np.ndarray,
    family: ModelFamily | str,
    norm: CoordNormalization | None = None,
    ridge: float | None = None,
) -> MotionModelParams:
    """Fit ``M = [A b]`` from homogeneous second moments.

    Args:
        flow: Flow field of the frame.
        weights: Non-negative per-pixel weights, shape (H, W) or (H*W,).
        family: Model family.
        norm: Coordinate normalization (defaults to the flow lattice).
        ridge: Absolute ridge on the normalized moment matrix, or None for
            ``1e-9 * trace(L_uu) / (d + 1)``.

    Returns:
        Fitted parameters; ``energy`` is the unridged objective.

    Raises:
        ZeroWeight: weights sum to zero.
        SingularSystem: the ridged moment matrix cannot be inverted.
    """
    F, X, w, total, family = _prepare(flow, weights, family, norm)
    wn = w / total

    lam_uu = (X * wn[:, None]).T @ X
    lam_fu = (F * wn[:, None]).T @ X
    r = default_ridge(np.trace(lam_uu), family) if ridge is None else float(ridge)

    M = _solve(lam_uu + r * np.eye(family.dim + 1), lam_fu.T).T
    energy = weighted_energy(F, X, M, w)
    return MotionModelParams.from_matrix(family, M, energy=energy, weight_total=total)


def fit_wls_centered(
    flow: FlowField,
    weights: np.ndarray,
    family: ModelFamily | str,
    norm: CoordNormalization | None = None,
    ridge: float | None = None,
) -> MotionModelParams:
    """Fit ``(A, b)`` from weighted means and centred covariances.

    With ``c = 1 + ridge`` the ridged homogeneous system reduces to

        A (S_OO + r I + (r/c) mu_O mu_O^T) = S_FO + (r/c) mu_F mu_O^T
        b = (mu_F - A mu_O) / c

    which is the plain centred solution when ``r = 0``. Arguments, result
    and errors are as for fit_wls.
    """
    F, X, w, total, family = _prepare(flow, weights, family, norm)
    wn = w / total
    d = family.dim
    lifted = X[:, :d]

    mu_o = wn @ lifted
    mu_f = wn @ F
    centred_o = lifted - mu_o
    centred_f = F - mu_f
    sigma_oo = (centred_o * wn[:, None]).T @ centred_o
    sigma_fo = (centred_f * wn[:, None]).T @ centred_o

    trace_uu = np.trace(sigma_oo) + float(mu_o @ mu_o) + 1.0
    r = default_ridge(trace_uu, family) if ridge is None else float(ridge)
    c = 1.0 + r
    k = r / c

    lhs = sigma_oo + r * np.eye(d) + k * np.outer(mu_o, mu_o)
    rhs = sigma_fo + k * np.outer(mu_f, mu_o)
    A = _solve(lhs, rhs.T).T if d else np.zeros((2, 0))
    b = (mu_f - A @ mu_o) / c

    M = np.hstack([A, b[:, None]])
    energy = weighted_energy(F, X, M, w)
    return MotionModelParams(family, A, b, energy=energy, weight_total=total)
