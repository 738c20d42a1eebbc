"""Shared state builders and independent closed-form oracles for the tests.

Everything here is derived by hand from 2x2/4x4 moment propagation so the
tests never trust the code path they are checking.
"""

import math

import numpy as np

from cvqss import GaussianState, apply_beamsplitter, squeezed_vacuum, tensor


def two_mode_squeezed(r: float, labels=("A", "B")) -> GaussianState:
    """Two-mode squeezed vacuum from two squeezers on a balanced splitter.

    Quadrature moments (vacuum variance 1/2): diagonal cosh(2r)/2, x-x
    correlation +sinh(2r)/2, p-p correlation -sinh(2r)/2.
    """
    mode_a = squeezed_vacuum(r, "x", label=labels[0])
    mode_b = squeezed_vacuum(r, "p", label=labels[1])
    return apply_beamsplitter(tensor(mode_a, mode_b), labels[0], labels[1], 0.5)


def tmsv_conditional_variance(r: float) -> float:
    """Closed form for V(X_A | X_B) on the two-mode squeezed state."""
    return 1.0 / (2.0 * math.cosh(2.0 * r))


def product_vacuum(labels) -> GaussianState:
    """Uncorrelated vacua on the given labels."""
    dim = 2 * len(labels)
    return GaussianState(np.zeros(dim), 0.5 * np.eye(dim), tuple(labels))


def chain_expected_cov(r: float, transmissivity: float) -> np.ndarray:
    """Hand-propagated covariance of the lossy three-mode chain resource.

    p-squeezed inputs (V_x = a = exp(2r)/2, V_p = b = exp(-2r)/2), unit
    x-x gates on A-B and B-C, then loss T on B and C. Ordering
    (x_A, p_A, x_B, p_B, x_C, p_C).
    """
    a = 0.5 * math.exp(2.0 * r)
    b = 0.5 * math.exp(-2.0 * r)
    big_t = transmissivity
    t = math.sqrt(big_t)
    vac = 0.5 * (1.0 - big_t)

    cov = np.zeros((6, 6))
    cov[0, 0] = a                                # x_A
    cov[1, 1] = a + b                            # p_A = p0_A + x_B
    cov[2, 2] = big_t * a + vac                  # x_B
    cov[3, 3] = big_t * (b + 2 * a) + vac        # p_B = p0_B + x_A + x_C
    cov[4, 4] = big_t * a + vac                  # x_C
    cov[5, 5] = big_t * (a + b) + vac            # p_C = p0_C + x_B
    cov[0, 3] = cov[3, 0] = t * a                # (x_A, p_B)
    cov[1, 2] = cov[2, 1] = t * a                # (p_A, x_B)
    cov[1, 5] = cov[5, 1] = t * a                # (p_A, p_C), common x_B
    cov[2, 5] = cov[5, 2] = big_t * a            # (x_B, p_C)
    cov[3, 4] = cov[4, 3] = big_t * a            # (p_B, x_C)
    return cov


def _solve22(g11, g12, g22, c1, c2) -> float:
    """c^T Gamma^{-1} c for a symmetric 2x2 block, written out explicitly."""
    det = g11 * g22 - g12 * g12
    return (c1 * (g22 * c1 - g12 * c2) + c2 * (g11 * c2 - g12 * c1)) / det


def chain_expected_variances(r: float, transmissivity: float) -> dict:
    """Closed forms for the four inference variances on the chain resource.

    The dealer's x is inferred from (p_B, x_C) announced in key rounds; the
    dealer's p from (x_B, p_C) announced in check rounds; the dishonest
    bounds restrict to the single honest coordinate.
    """
    a = 0.5 * math.exp(2.0 * r)
    b = 0.5 * math.exp(-2.0 * r)
    big_t = transmissivity
    t = math.sqrt(big_t)
    vac = 0.5 * (1.0 - big_t)

    v_x = a - _solve22(big_t * (b + 2 * a) + vac, big_t * a, big_t * a + vac,
                       t * a, 0.0)
    v_p = (a + b) - _solve22(big_t * a + vac, big_t * a,
                             big_t * (a + b) + vac, t * a, t * a)
    v_p_given_c = (a + b) - (t * a) ** 2 / (big_t * (a + b) + vac)
    v_p_given_b = (a + b) - (t * a) ** 2 / (big_t * a + vac)
    return {
        "v_x_given_all": v_x,
        "v_p_given_all": v_p,
        "v_p_given_c_only": v_p_given_c,
        "v_p_given_b_only": v_p_given_b,
    }
