"""Multimode Gaussian states as first and second moments, plus symplectic maps.

Conventions used throughout the package (fixed here, asserted everywhere):

* Quadrature ordering is ``x1, p1, x2, p2, ..., xm, pm`` so that each mode
  occupies a contiguous 2x2 block of the covariance matrix.
* Natural units with hbar = 1 and ``x = (a + a^dag)/sqrt(2)``,
  ``p = (a - a^dag)/(i sqrt(2))``, hence ``[x, p] = i`` and the vacuum
  variance of each quadrature is 1/2.
* A covariance matrix is physical (bona fide) iff all of its symplectic
  eigenvalues are >= 1/2; it describes a pure state iff they all equal 1/2.

All operations are pure: they take immutable states and return new ones,
so values can be shared freely across threads.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

#: Tolerance for the symplectic-invariance check S Omega S^T = Omega.
SYMPLECTIC_TOL = 1e-12

#: Relative tolerance for covariance-matrix symmetry.
SYMMETRY_RTOL = 1e-12

#: Slack on the bona-fide condition min(nu) >= 1/2 (loss channels and
#: eigensolvers leave rounding at this scale).
BONA_FIDE_TOL = 1e-9

#: Vacuum variance of a single quadrature under the conventions above.
VACUUM_VARIANCE = 0.5

Quadrature = str  # "x" or "p"

_QUAD_OFFSET = {"x": 0, "p": 1}


class UnphysicalStateError(ValueError):
    """Raised when an operation requires a bona-fide covariance matrix."""


def _check_quadrature(quadrature: str) -> str:
    if quadrature not in _QUAD_OFFSET:
        raise ValueError(f"quadrature must be 'x' or 'p', got {quadrature!r}")
    return quadrature


def symplectic_form(num_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form with 2x2 blocks [[0, 1], [-1, 0]]."""
    block = np.array([[0.0, 1.0], [-1.0, 0.0]])
    return np.kron(np.eye(num_modes), block)


def symplectic_eigenvalues(cov: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a covariance matrix, sorted ascending.

    Computed as the moduli of the eigenvalues of ``i Omega cov``, which come
    in +/- pairs; one representative per pair is returned.
    """
    cov = np.asarray(cov, dtype=float)
    num_modes = cov.shape[0] // 2
    spectrum = np.linalg.eigvals(1j * symplectic_form(num_modes) @ cov)
    return np.sort(np.abs(spectrum))[::2]


@dataclass(frozen=True)
class GaussianState:
    """A Gaussian state of ``m`` labelled modes.

    Attributes:
        mean: Length-2m vector of quadrature means, ordering x1,p1,...,xm,pm.
        cov: Symmetric 2m x 2m covariance matrix in the same ordering.
        labels: Unique identifier per mode.

    The constructor enforces shape consistency, label uniqueness and
    symmetry of ``cov``; physicality (the bona-fide condition) is *not*
    enforced, so that diagnostics can be run on deliberately broken
    matrices; see :func:`validate`.
    """

    mean: np.ndarray
    cov: np.ndarray
    labels: tuple

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.asarray(self.cov, dtype=float)
        labels = tuple(self.labels)
        if len(set(labels)) != len(labels):
            raise ValueError(f"mode labels must be unique, got {labels}")
        dim = 2 * len(labels)
        if mean.shape != (dim,):
            raise ValueError(f"mean must have length {dim}, got {mean.shape}")
        if cov.shape != (dim, dim):
            raise ValueError(f"cov must be {dim}x{dim}, got {cov.shape}")
        scale = max(np.abs(cov).max(), 1.0)
        asym = np.abs(cov - cov.T).max()
        if asym > SYMMETRY_RTOL * scale:
            raise ValueError(f"cov is not symmetric (residual {asym:.3e})")
        # Symmetrise exactly so chained transforms cannot accumulate skew.
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "labels", labels)

    @property
    def num_modes(self) -> int:
        return len(self.labels)

    def mode_index(self, label) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"unknown mode {label!r}; state has {self.labels}") from None

    def quad_index(self, label, quadrature: Quadrature) -> int:
        """Row/column index of a (mode, quadrature) coordinate."""
        return 2 * self.mode_index(label) + _QUAD_OFFSET[_check_quadrature(quadrature)]

    def variance(self, label, quadrature: Quadrature) -> float:
        i = self.quad_index(label, quadrature)
        return float(self.cov[i, i])

    def covariance(self, coord_a: tuple, coord_b: tuple) -> float:
        """Covariance between two (mode, quadrature) coordinates."""
        i = self.quad_index(*coord_a)
        j = self.quad_index(*coord_b)
        return float(self.cov[i, j])


@dataclass(frozen=True)
class SymplecticTransform:
    """A linear map on quadratures: mean -> S mean, cov -> S cov S^T.

    The constructor rejects matrices that fail the symplectic invariant
    ``S Omega S^T = Omega`` beyond :data:`SYMPLECTIC_TOL`.
    """

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] % 2:
            raise ValueError(f"symplectic matrix must be 2m x 2m, got {matrix.shape}")
        omega = symplectic_form(matrix.shape[0] // 2)
        residual = np.abs(matrix @ omega @ matrix.T - omega).max()
        if residual > SYMPLECTIC_TOL:
            raise ValueError(f"matrix is not symplectic (residual {residual:.3e})")
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    def apply(self, state: GaussianState) -> GaussianState:
        if self.matrix.shape[0] != 2 * state.num_modes:
            raise ValueError("transform dimension does not match the state")
        s = self.matrix
        return GaussianState(s @ state.mean, s @ state.cov @ s.T, state.labels)


@dataclass(frozen=True)
class StateDiagnostics:
    """Physicality report for a covariance matrix; see :func:`validate`."""

    symmetry_residual: float
    symplectic_eigenvalues: tuple
    min_symplectic_eigenvalue: float
    purity: float
    physical: bool

    @property
    def pure(self) -> bool:
        return self.physical and self.purity >= 1.0 - 1e-9


def vacuum(num_modes: int, labels: Sequence | None = None) -> GaussianState:
    """The ``num_modes``-mode vacuum: zero mean, cov = (1/2) identity."""
    if num_modes < 1:
        raise ValueError("need at least one mode")
    if labels is None:
        labels = tuple(f"m{i}" for i in range(num_modes))
    dim = 2 * num_modes
    return GaussianState(np.zeros(dim), VACUUM_VARIANCE * np.eye(dim), labels)


def squeezed_vacuum(r: float, squeezed_quadrature: Quadrature = "p",
                    label="m0") -> GaussianState:
    """Single-mode squeezed vacuum with squeezing parameter ``r >= 0``.

    The squeezed quadrature has variance exp(-2r)/2, its conjugate
    exp(+2r)/2; flip ``squeezed_quadrature`` rather than passing r < 0.
    """
    if r < 0:
        raise ValueError("squeezing parameter must be >= 0; "
                         "choose squeezed_quadrature to flip the orientation")
    _check_quadrature(squeezed_quadrature)
    v_squeezed = 0.5 * math.exp(-2.0 * r)
    v_anti = 0.5 * math.exp(2.0 * r)
    if squeezed_quadrature == "x":
        diag = [v_squeezed, v_anti]
    else:
        diag = [v_anti, v_squeezed]
    return GaussianState(np.zeros(2), np.diag(diag), (label,))


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    """Product state of two Gaussian states with disjoint mode labels."""
    overlap = set(a.labels) & set(b.labels)
    if overlap:
        raise ValueError(f"mode labels collide: {sorted(overlap, key=str)}")
    dim_a, dim_b = 2 * a.num_modes, 2 * b.num_modes
    cov = np.zeros((dim_a + dim_b, dim_a + dim_b))
    cov[:dim_a, :dim_a] = a.cov
    cov[dim_a:, dim_a:] = b.cov
    return GaussianState(np.concatenate([a.mean, b.mean]), cov, a.labels + b.labels)


def _embed_pair(state: GaussianState, i, j, block: np.ndarray) -> SymplecticTransform:
    """Lift a 4x4 two-mode symplectic block acting on modes (i, j)."""
    idx = [state.quad_index(i, "x"), state.quad_index(i, "p"),
           state.quad_index(j, "x"), state.quad_index(j, "p")]
    full = np.eye(2 * state.num_modes)
    for a, ia in enumerate(idx):
        for b, ib in enumerate(idx):
            full[ia, ib] = block[a, b]
    return SymplecticTransform(full)


def cz_transform(state: GaussianState, i, j, weight: float) -> SymplecticTransform:
    """Symplectic matrix of the x-x coupling gate between modes i and j.

    Heisenberg action: p_i -> p_i + weight * x_j, p_j -> p_j + weight * x_i,
    positions unchanged.
    """
    if i == j:
        raise ValueError("coupling gate needs two distinct modes")
    block = np.eye(4)
    block[1, 2] = weight
    block[3, 0] = weight
    return _embed_pair(state, i, j, block)


def apply_cz(state: GaussianState, i, j, weight: float) -> GaussianState:
    return cz_transform(state, i, j, weight).apply(state)


def beamsplitter_transform(state: GaussianState, i, j,
                           transmissivity: float) -> SymplecticTransform:
    """Symplectic matrix of a beam splitter with cos(theta) = sqrt(T).

    Sign convention: the reflected port carries the minus sign on mode j,
    i.e. x_i -> sqrt(T) x_i + sqrt(1-T) x_j and
    x_j -> -sqrt(1-T) x_i + sqrt(T) x_j (same for p), so T = 0 swaps the
    modes up to a sign on mode j.
    """
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    if not 0.0 <= transmissivity <= 1.0:
        raise ValueError(f"transmissivity must lie in [0, 1], got {transmissivity}")
    c = math.sqrt(transmissivity)
    s = math.sqrt(1.0 - transmissivity)
    block = np.array([
        [c, 0.0, s, 0.0],
        [0.0, c, 0.0, s],
        [-s, 0.0, c, 0.0],
        [0.0, -s, 0.0, c],
    ])
    return _embed_pair(state, i, j, block)


def apply_beamsplitter(state: GaussianState, i, j, transmissivity: float) -> GaussianState:
    return beamsplitter_transform(state, i, j, transmissivity).apply(state)


def partial_trace(state: GaussianState, keep: Sequence) -> GaussianState:
    """Reduced state on ``keep``, preserving the original mode order."""
    keep_set = set(keep)
    if not keep_set:
        raise ValueError("keep-set must be nonempty")
    unknown = keep_set - set(state.labels)
    if unknown:
        raise ValueError(f"unknown modes in keep-set: {sorted(unknown, key=str)}")
    kept_labels = tuple(lab for lab in state.labels if lab in keep_set)
    idx = []
    for lab in kept_labels:
        idx.extend([state.quad_index(lab, "x"), state.quad_index(lab, "p")])
    idx = np.array(idx)
    return GaussianState(state.mean[idx], state.cov[np.ix_(idx, idx)], kept_labels)


def validate(state: GaussianState) -> StateDiagnostics:
    """Diagnostics on a state: symmetry, symplectic spectrum, purity.

    Reports and never raises. ``physical`` is True iff every symplectic
    eigenvalue is >= 1/2 - BONA_FIDE_TOL; purity is the product of
    1/(2 nu_k) over the symplectic eigenvalues (1 for pure states).
    """
    scale = max(np.abs(state.cov).max(), 1.0)
    residual = float(np.abs(state.cov - state.cov.T).max() / scale)
    nus = symplectic_eigenvalues(state.cov)
    min_nu = float(nus.min())
    purity = float(np.prod(1.0 / (2.0 * nus)))
    return StateDiagnostics(
        symmetry_residual=residual,
        symplectic_eigenvalues=tuple(float(n) for n in nus),
        min_symplectic_eigenvalue=min_nu,
        purity=purity,
        physical=bool(min_nu >= VACUUM_VARIANCE - BONA_FIDE_TOL),
    )
