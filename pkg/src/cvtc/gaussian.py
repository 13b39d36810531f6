r"""Covariance-matrix algebra for Gaussian states of bosonic modes.

Conventions used throughout the package:

* quadratures are interleaved, :math:`R = (q_0, p_0, q_1, p_1, \dots)`;
* :math:`q = (a + a^\dagger)/\sqrt2`, :math:`p = (a - a^\dagger)/(i\sqrt2)`,
  so the vacuum covariance matrix is :math:`\mathbb{1}/2`;
* :math:`\sigma_{kl} = \tfrac12\langle\{R_k, R_l\}\rangle - \langle R_k\rangle\langle R_l\rangle`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np
import scipy.linalg

from .errors import InvalidArgumentError, NumericError

SYMMETRY_RTOL = 1e-12
PHYSICALITY_TOL = 1e-10
CONDITION_LIMIT = 1e12

MOMENTUM_FLIP = np.diag([1.0, -1.0])


class CovarianceMatrix:
    """Immutable real symmetric ``2n x 2n`` second-moment matrix.

    Parameters
    ----------
    matrix : array_like
        Square matrix of even size in interleaved ordering.
    check_physical : bool
        If true, also require the uncertainty relation to hold.
    """

    __slots__ = ("_matrix",)

    def __init__(self, matrix, *, check_physical: bool = False):
        arr = np.array(matrix, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2 or arr.size == 0:
            raise InvalidArgumentError(f"covariance matrix must be square of even size, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("covariance matrix has non-finite entries")
        scale = np.maximum(1.0, np.abs(arr))
        if np.any(np.abs(arr - arr.T) > SYMMETRY_RTOL * scale):
            raise InvalidArgumentError("covariance matrix is not symmetric")
        arr = 0.5 * (arr + arr.T)
        arr.setflags(write=False)
        self._matrix = arr
        if check_physical and not self.is_physical():
            raise InvalidArgumentError(
                f"covariance matrix violates the uncertainty relation "
                f"(min eigenvalue {self.min_uncertainty_eigenvalue():.3e})"
            )

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    @property
    def n_modes(self) -> int:
        return self._matrix.shape[0] // 2

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._matrix.copy() if copy else self._matrix
        return self._matrix.astype(dtype)

    def __repr__(self) -> str:
        return f"CovarianceMatrix(n_modes={self.n_modes})"

    def block(self, i: int, j: int) -> np.ndarray:
        """2x2 block coupling modes ``i`` and ``j``."""
        return self._matrix[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def allclose(self, other, atol: float = 1e-12) -> bool:
        other = np.asarray(other, dtype=float)
        return other.shape == self._matrix.shape and np.allclose(self._matrix, other, rtol=0.0, atol=atol)

    def min_uncertainty_eigenvalue(self) -> float:
        """Smallest eigenvalue of :math:`\\sigma + \\tfrac{i}{2}J`; zero for pure states."""
        return hermitian_min_eigenvalue(self._matrix + 0.5j * symplectic_form(self.n_modes))

    def is_physical(self, tol: float = PHYSICALITY_TOL) -> bool:
        return self.min_uncertainty_eigenvalue() >= -tol

    def purity(self) -> float:
        """``Tr rho^2 = det(2 sigma)^{-1/2}``."""
        sign, logdet = np.linalg.slogdet(2.0 * self._matrix)
        if sign <= 0:
            raise NumericError("covariance matrix is not positive definite")
        return float(np.exp(-0.5 * logdet))

    def scaled(self, factor: float) -> "CovarianceMatrix":
        return CovarianceMatrix(factor * self._matrix)


@dataclass(frozen=True)
class GaussianState:
    """Covariance matrix plus first moments."""

    cm: CovarianceMatrix
    mean: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if not isinstance(self.cm, CovarianceMatrix):
            object.__setattr__(self, "cm", CovarianceMatrix(self.cm))
        if self.mean is None:
            mean = np.zeros(2 * self.cm.n_modes)
        else:
            mean = np.array(self.mean, dtype=float).reshape(-1)
        if mean.shape != (2 * self.cm.n_modes,):
            raise InvalidArgumentError(
                f"mean vector has length {mean.size}, expected {2 * self.cm.n_modes}"
            )
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)

    @property
    def n_modes(self) -> int:
        return self.cm.n_modes


@dataclass(frozen=True)
class Bipartition:
    """Set of modes whose momenta flip sign under partial transposition."""

    transposed_modes: frozenset

    def __post_init__(self):
        modes = frozenset(int(k) for k in self.transposed_modes)
        if not modes:
            raise InvalidArgumentError("bipartition must transpose at least one mode")
        if min(modes) < 0:
            raise InvalidArgumentError("mode indices must be non-negative")
        object.__setattr__(self, "transposed_modes", modes)

    def validate(self, n_modes: int) -> None:
        if max(self.transposed_modes) >= n_modes:
            raise InvalidArgumentError(
                f"mode index {max(self.transposed_modes)} out of range for {n_modes} modes"
            )
        if len(self.transposed_modes) == n_modes:
            raise InvalidArgumentError("bipartition must be a proper subset of the modes")

    def __str__(self) -> str:
        return "{" + ",".join(str(k) for k in sorted(self.transposed_modes)) + "}"


BipartitionLike = Union[Bipartition, Iterable[int], int]


def as_bipartition(value: BipartitionLike) -> Bipartition:
    if isinstance(value, Bipartition):
        return value
    if isinstance(value, (int, np.integer)):
        return Bipartition(frozenset([int(value)]))
    return Bipartition(frozenset(value))


def all_bipartitions(n_modes: int) -> list[Bipartition]:
    """Every unordered split of ``n_modes`` modes, each listed once.

    Mode 0 is never in the transposed set; a split and its complement give the
    same partial-transpose spectrum.
    """
    if n_modes < 2:
        raise InvalidArgumentError("need at least two modes to form a bipartition")
    out = []
    others = range(1, n_modes)
    for mask in range(1, 2 ** (n_modes - 1)):
        out.append(Bipartition(frozenset(k for i, k in enumerate(others) if mask >> i & 1)))
    return out


def _check_modes(n_modes) -> int:
    if isinstance(n_modes, bool) or not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be a positive integer, got {n_modes!r}")
    return int(n_modes)


def vacuum_cm(n_modes: int) -> CovarianceMatrix:
    n = _check_modes(n_modes)
    return CovarianceMatrix(0.5 * np.eye(2 * n))


def thermal_cm(n_modes: int, nu: float) -> CovarianceMatrix:
    """Thermal state with ``nu`` mean photons in every mode."""
    n = _check_modes(n_modes)
    if not np.isfinite(nu) or nu < 0:
        raise InvalidArgumentError(f"thermal photon number must be >= 0, got {nu}")
    return CovarianceMatrix((nu + 0.5) * np.eye(2 * n))


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal ``J = (+)_k [[0, -1], [1, 0]]``."""
    n = _check_modes(n_modes)
    return np.kron(np.eye(n), np.array([[0.0, -1.0], [1.0, 0.0]]))


def squeezing_symplectic(xi: complex) -> np.ndarray:
    r"""Symplectic matrix of :math:`S(\xi) = \exp(\tfrac12\xi b^{\dagger 2} - \tfrac12\xi^* b^2)`.

    With :math:`\xi = r e^{i\theta}` this is
    :math:`\cosh r\,\mathbb{1} + \sinh r\,[[\cos\theta, \sin\theta], [\sin\theta, -\cos\theta]]`.
    """
    r, theta = abs(xi), np.angle(xi)
    rot = np.array([[np.cos(theta), np.sin(theta)], [np.sin(theta), -np.cos(theta)]])
    return np.cosh(r) * np.eye(2) + np.sinh(r) * rot


def hermitian_min_eigenvalue(matrix: np.ndarray) -> float:
    try:
        return float(np.linalg.eigvalsh(matrix)[0])
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"Hermitian eigensolver failed: {exc}") from exc


def _flip_vector(n_modes: int, bipartition: Bipartition) -> np.ndarray:
    bipartition.validate(n_modes)
    signs = np.ones(2 * n_modes)
    for k in bipartition.transposed_modes:
        signs[2 * k + 1] = -1.0
    return signs


def partial_transpose(cm: CovarianceMatrix, bipartition: BipartitionLike) -> CovarianceMatrix:
    """Return ``Lambda sigma Lambda`` with ``p_k -> -p_k`` on the transposed modes."""
    bip = as_bipartition(bipartition)
    signs = _flip_vector(cm.n_modes, bip)
    return CovarianceMatrix(cm.matrix * np.outer(signs, signs))


def ppt_min_eigenvalue(cm: CovarianceMatrix, bipartition: BipartitionLike) -> float:
    """Minimum eigenvalue of the partially transposed ``Lambda sigma Lambda - (i/2) J``.

    A negative value certifies inseparability across the bipartition.
    """
    transposed = partial_transpose(cm, bipartition).matrix
    return hermitian_min_eigenvalue(transposed - 0.5j * symplectic_form(cm.n_modes))


def _quadrature_indices(modes: Iterable[int]) -> np.ndarray:
    return np.array([i for k in modes for i in (2 * k, 2 * k + 1)], dtype=int)


def reduce(state: GaussianState | CovarianceMatrix, keep: Iterable[int]):
    """Partial trace: keep the listed modes (in the order given).

    Returns the same type as ``state``.
    """
    keep = list(keep)
    n = state.n_modes
    if not keep:
        raise InvalidArgumentError("must keep at least one mode")
    if len(set(keep)) != len(keep) or min(keep) < 0 or max(keep) >= n:
        raise InvalidArgumentError(f"invalid mode selection {keep} for {n} modes")
    idx = _quadrature_indices(keep)
    if isinstance(state, CovarianceMatrix):
        return CovarianceMatrix(state.matrix[np.ix_(idx, idx)])
    return GaussianState(CovarianceMatrix(state.cm.matrix[np.ix_(idx, idx)]), state.mean[idx])


def split_blocks(cm: CovarianceMatrix, measured: Iterable[int]):
    """Blocks ``(A, C, B)`` of ``cm`` with ``A`` on ``measured`` and ``B`` on the rest.

    ``C`` has shape ``(len(A), len(B))``.
    """
    measured = list(measured)
    rest = [k for k in range(cm.n_modes) if k not in measured]
    ia, ib = _quadrature_indices(measured), _quadrature_indices(rest)
    s = cm.matrix
    return s[np.ix_(ia, ia)], s[np.ix_(ia, ib)], s[np.ix_(ib, ib)]


def condition_on_gaussian_measurement(
    state: GaussianState | CovarianceMatrix,
    povm_cm,
    measured: Iterable[int] = (0,),
) -> tuple[CovarianceMatrix, np.ndarray]:
    r"""Condition the unmeasured modes on a Gaussian measurement.

    Parameters
    ----------
    state : GaussianState or CovarianceMatrix
        Joint state; its modes split into ``measured`` (block ``A``) and the rest (``B``).
    povm_cm : array_like
        Covariance matrix ``M`` of the Gaussian POVM seed.
    measured : iterable of int
        Modes acted on by the measurement.

    Returns
    -------
    sigma_c : CovarianceMatrix
        :math:`B - C^T (A+M)^{-1} C`, independent of the outcome.
    gain : ndarray
        :math:`C^T (A+M)^{-1}`; the conditional mean is ``gain @ (outcome - E[outcome])``.
    """
    cm = state if isinstance(state, CovarianceMatrix) else state.cm
    measured = list(measured)
    if not measured or len(measured) >= cm.n_modes:
        raise InvalidArgumentError("measured modes must be a non-empty proper subset")
    a, c, b = split_blocks(cm, measured)
    m = np.asarray(povm_cm, dtype=float)
    if m.shape != a.shape:
        raise InvalidArgumentError(f"POVM covariance has shape {m.shape}, expected {a.shape}")
    total = a + m
    if not np.all(np.isfinite(total)) or np.linalg.cond(total) > CONDITION_LIMIT:
        raise NumericError("A + M is singular or ill-conditioned")
    try:
        factor = scipy.linalg.cho_factor(total)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"A + M is not positive definite: {exc}") from exc
    gain = scipy.linalg.cho_solve(factor, c).T
    return CovarianceMatrix(b - gain @ c), gain


def fidelity_to_pure(clone: GaussianState, target: GaussianState) -> float:
    r"""Overlap ``Tr(rho_clone rho_target)``, which is the fidelity when the target is pure.

    .. math:: F = \det(\sigma_1+\sigma_2)^{-1/2}\exp\{-\tfrac12 d^T(\sigma_1+\sigma_2)^{-1}d\}
    """
    if clone.n_modes != target.n_modes:
        raise InvalidArgumentError("clone and target must have the same number of modes")
    total = clone.cm.matrix + target.cm.matrix
    d = clone.mean - target.mean
    sign, logdet = np.linalg.slogdet(total)
    if sign <= 0:
        raise NumericError("sum of covariance matrices is not positive definite")
    return float(np.exp(-0.5 * logdet - 0.5 * d @ np.linalg.solve(total, d)))


def fidelity_to_coherent(clone: GaussianState, target_mean) -> float:
    """Fidelity of a single-mode Gaussian state with the coherent state of mean ``target_mean``."""
    if clone.n_modes != 1:
        raise InvalidArgumentError("fidelity_to_coherent expects a single-mode clone")
    return fidelity_to_pure(clone, GaussianState(vacuum_cm(1), target_mean))


def coherent_mean(alpha: complex) -> np.ndarray:
    """Quadrature mean ``sqrt(2) (Re alpha, Im alpha)`` of the coherent state ``|alpha>``."""
    return np.sqrt(2.0) * np.array([complex(alpha).real, complex(alpha).imag])
