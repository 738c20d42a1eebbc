"""Linear inference on Gaussian second moments.

For jointly Gaussian outcomes, the best estimator of a target quadrature
from a set of measured coordinates is linear, and the residual variance is
the Schur complement

    V(target | est) = V(target) - c^T Gamma^+ c,

where c is the covariance vector between target and estimators and Gamma
the estimators' covariance block. The optimal gains are g = Gamma^+ c.
All entropic quantities are in bits (base-2 logarithms).

These formulas are exact for Gaussian states. If applied to second moments
estimated from non-Gaussian data they yield a lower bound on the mutual
information instead.
"""

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .gaussian import GaussianState, Quadrature

#: Absolute variance below which an estimator is considered degenerate.
DEGENERATE_VARIANCE_TOL = 1e-12

#: Relative eigenvalue cutoff (times the trace) for the pseudo-inverse of a
#: near-singular estimator covariance block. Perfectly correlated player
#: modes make the block singular; the inference variance is still
#: well-defined as a limit and the pseudo-inverse realises it.
PINV_CUTOFF = 1e-10


class DegenerateEstimatorError(ValueError):
    """Raised when a fixed estimator has (numerically) zero variance."""


@dataclass(frozen=True)
class JointVariable:
    """A collective degree of freedom: a gain per mode in one basis.

    ``quadrature`` is the announced basis of the contributing outcomes.
    Without a layout context it is read as the physical quadrature of every
    mode in ``gains``; the key-rate layer resolves it through the party
    layout's announcement map instead.

    The gains map must be nonempty. Optimal inference on an uncorrelated
    estimator set legitimately returns all-zero gains ("nothing helps");
    feeding such a variable back into :func:`conditional_variance_fixed`
    raises :class:`DegenerateEstimatorError` because its variance vanishes.
    """

    quadrature: Quadrature
    gains: Mapping

    def __post_init__(self):
        gains = dict(self.gains)
        if not gains:
            raise ValueError("joint variable needs at least one mode gain")
        object.__setattr__(self, "gains", gains)


@dataclass(frozen=True)
class ConditioningResult:
    """Outcome of an optimal-inference computation."""

    conditional_variance: float
    gains: JointVariable
    unconditional_variance: float

    def __post_init__(self):
        if not 0.0 < self.conditional_variance <= self.unconditional_variance:
            raise ValueError(
                f"conditional variance {self.conditional_variance} must lie in "
                f"(0, {self.unconditional_variance}]")


def _pinv_psd(matrix: np.ndarray) -> np.ndarray:
    """Pseudo-inverse of a PSD matrix with eigenvalue cutoff PINV_CUTOFF * trace."""
    eigval, eigvec = np.linalg.eigh(matrix)
    cutoff = PINV_CUTOFF * max(np.trace(matrix), 0.0)
    inv = np.where(eigval > cutoff, 1.0 / np.where(eigval > cutoff, eigval, 1.0), 0.0)
    return (eigvec * inv) @ eigvec.T


def _coord_indices(state: GaussianState, coords: Iterable) -> np.ndarray:
    return np.array([state.quad_index(mode, quad) for mode, quad in coords], dtype=int)


def conditional_variance_coords(
    state: GaussianState,
    target: tuple,
    estimator_coords: Sequence,
) -> tuple:
    """Optimal inference of a target coordinate from arbitrary coordinates.

    Args:
        state: The Gaussian state supplying the moments.
        target: (mode, quadrature) of the variable to infer.
        estimator_coords: Sequence of (mode, quadrature) pairs the estimator
            may combine; must not contain the target itself.

    Returns:
        (conditional_variance, gains, unconditional_variance) with gains as
        an array aligned with ``estimator_coords``.
    """
    coords = list(estimator_coords)
    if not coords:
        raise ValueError("estimator coordinate set must be nonempty")
    t_idx = state.quad_index(*target)
    e_idx = _coord_indices(state, coords)
    if t_idx in e_idx:
        raise ValueError("estimator coordinates must exclude the target")
    v_target = state.cov[t_idx, t_idx]
    c = state.cov[t_idx, e_idx]
    gamma = state.cov[np.ix_(e_idx, e_idx)]
    gains = _pinv_psd(gamma) @ c
    explained = float(c @ gains)
    return float(v_target - explained), gains, float(v_target)


def conditional_variance_optimal(
    state: GaussianState,
    target: tuple,
    estimator_modes: Sequence,
    quadrature: Quadrature,
) -> ConditioningResult:
    """Minimum inference variance of a target given a set of modes.

    The estimator is the optimal linear combination of ``quadrature`` over
    ``estimator_modes`` (a Schur complement; the block pseudo-inverse covers
    singular covariance blocks).
    """
    modes = list(estimator_modes)
    if not modes:
        raise ValueError("estimator mode set must be nonempty")
    if target[0] in modes:
        raise ValueError("estimator modes must exclude the target mode")
    coords = [(mode, quadrature) for mode in modes]
    v_cond, gains, v_unc = conditional_variance_coords(state, target, coords)
    joint = JointVariable(quadrature, dict(zip(modes, gains)))
    return ConditioningResult(v_cond, joint, v_unc)


def conditional_variance_fixed(
    state: GaussianState,
    target: tuple,
    estimator: JointVariable,
) -> float:
    """Inference variance of a target given a *fixed* joint variable.

    Returns Var(target) - Cov(target, est)^2 / Var(est) for the scalar
    estimator est = sum_j gains[j] * (quadrature of mode j).
    """
    coords = [(mode, estimator.quadrature) for mode in estimator.gains]
    g = np.array([estimator.gains[mode] for mode in estimator.gains], dtype=float)
    t_idx = state.quad_index(*target)
    e_idx = _coord_indices(state, coords)
    var_est = float(g @ state.cov[np.ix_(e_idx, e_idx)] @ g)
    if var_est <= DEGENERATE_VARIANCE_TOL:
        raise DegenerateEstimatorError(
            f"estimator variance {var_est:.3e} is degenerate")
    cov_te = float(state.cov[t_idx, e_idx] @ g)
    return float(state.cov[t_idx, t_idx] - cov_te**2 / var_est)


def gaussian_mutual_information(unconditional_variance: float,
                                conditional_variance: float) -> float:
    """Mutual information (bits) between a Gaussian variable and its estimator.

    I = H(target) - H(target | est) = (1/2) log2(V / V_cond); requires
    0 < V_cond <= V.
    """
    if not conditional_variance > 0.0:
        raise ValueError("conditional variance must be positive")
    if conditional_variance > unconditional_variance:
        raise ValueError(
            f"conditional variance {conditional_variance} exceeds the "
            f"unconditional variance {unconditional_variance}")
    return 0.5 * float(np.log2(unconditional_variance / conditional_variance))
