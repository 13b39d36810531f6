"""PPT separability of SU(2,1) states under thermal and lossy noise.

The generic partial-transpose eigenvalue test is the ground truth.  The
closed-form thresholds and the factorised characteristic polynomials are
kept verbatim and are cross-checked against it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.optimize

from .channels import evolve
from .errors import InvalidArgumentError, NumericError
from .gaussian import (
    Bipartition,
    BipartitionLike,
    CovarianceMatrix,
    as_bipartition,
    partial_transpose,
    ppt_min_eigenvalue,
    symplectic_form,
)
from .states import SupportSpec, build_cm, thermal_cm_of_support

BOUNDARY_TOL = 1e-10
ROOT_XTOL = 1e-10
ROOT_MAXITER = 200


class Verdict(str, enum.Enum):
    INSEPARABLE = "inseparable"
    BOUNDARY = "separable-boundary"
    PPT_POSITIVE = "ppt-positive"

    @classmethod
    def from_eigenvalue(cls, value: float, tol: float = BOUNDARY_TOL) -> "Verdict":
        if value < -tol:
            return cls.INSEPARABLE
        if value <= tol:
            return cls.BOUNDARY
        return cls.PPT_POSITIVE


@dataclass(frozen=True)
class BipartitionResult:
    bipartition: Bipartition
    min_eigenvalue: float
    verdict: Verdict


@dataclass(frozen=True)
class SeparabilityReport:
    per_bipartition: tuple

    @property
    def fully_inseparable(self) -> bool:
        """All listed bipartitions are PPT-violating.

        For three modes and the three 1-vs-2 splits this is necessary and
        sufficient; for more modes it is evidence only.
        """
        return all(r.verdict is Verdict.INSEPARABLE for r in self.per_bipartition)

    def eigenvalue(self, bipartition: BipartitionLike) -> float:
        bip = as_bipartition(bipartition)
        for r in self.per_bipartition:
            if r.bipartition == bip:
                return r.min_eigenvalue
        raise KeyError(str(bip))


def ppt_report(cm: CovarianceMatrix, bipartitions: Iterable[BipartitionLike] | None = None) -> SeparabilityReport:
    """PPT verdicts over ``bipartitions`` (default: every single mode against the rest)."""
    if bipartitions is None:
        bipartitions = range(cm.n_modes)
    results = []
    for b in bipartitions:
        bip = as_bipartition(b)
        value = ppt_min_eigenvalue(cm, bip)
        results.append(BipartitionResult(bip, value, Verdict.from_eigenvalue(value)))
    return SeparabilityReport(tuple(results))


def tripartite_report(cm: CovarianceMatrix) -> SeparabilityReport:
    if cm.n_modes != 3:
        raise InvalidArgumentError(f"tripartite_report needs 3 modes, got {cm.n_modes}")
    return ppt_report(cm, (0, 1, 2))


# -- root finding ------------------------------------------------------------

def first_crossing(
    func: Callable[[float], float],
    start: float,
    step: float,
    limit: float,
    xtol: float = ROOT_XTOL,
) -> float:
    """Smallest ``x > start`` where ``func`` turns non-negative, or ``inf`` before ``limit``.

    ``func(start)`` must be negative.  The bracket grows by doubling the
    distance from ``start``; the crossing is then refined by bisection.
    """
    f_lo = func(start)
    if f_lo >= 0:
        raise InvalidArgumentError("function must be negative at the start of the search")
    lo, dist = start, step
    while True:
        hi = start + dist
        if hi > limit:
            hi = limit
        f_hi = func(hi)
        if f_hi >= 0:
            break
        if hi >= limit:
            return math.inf
        lo, dist = hi, 2.0 * dist
    if f_hi == 0:
        return hi
    try:
        return scipy.optimize.bisect(func, lo, hi, xtol=xtol, maxiter=ROOT_MAXITER)
    except RuntimeError as exc:
        raise NumericError(f"bisection did not converge: {exc}") from exc


# -- thermal generation --------------------------------------------------------

def thermal_threshold_closed(nk: float) -> float:
    """Thermal photons above which mode ``k`` (holding ``nk`` photons) becomes separable."""
    if nk < 0:
        raise InvalidArgumentError(f"photon number must be >= 0, got {nk}")
    return nk + math.sqrt(nk * (nk + 1.0))


def thermal_threshold_numeric(spec: SupportSpec, mode: int) -> float:
    """Threshold in ``nu`` from bisection on the generic PPT eigenvalue of ``{mode}``."""
    def lam(nu):
        return ppt_min_eigenvalue(thermal_cm_of_support(spec, nu), mode)

    if lam(0.0) >= -BOUNDARY_TOL:
        return 0.0
    return first_crossing(lam, 0.0, 1.0, 1e8)


def _check_spec_m2(spec: SupportSpec) -> None:
    if spec.m != 2:
        raise InvalidArgumentError(f"closed-form thresholds are for m = 2, got m = {spec.m}")


def cubic_factors_thermal(spec: SupportSpec, nu: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form cubic factors of the characteristic polynomial of ``2 omega_1`` (thermal case).

    Coefficients are ordered from ``lambda^3`` down.  The second factor does not
    match the generic spectrum; see :func:`check_cubic_factors`.
    """
    _check_spec_m2(spec)
    n1, n2 = spec.photon_numbers
    n0 = spec.n0
    q1 = np.array([
        1.0,
        -2.0 * (2.0 * (1 + n0) + nu * (3 + 4 * n0)),
        4.0 * (1 + n1 + 2 * n2 + nu * (4 + 4 * n1 + 6 * n2 + nu * (3 + 4 * n0))),
        -8.0 * nu * (1 + n1 + nu * (2 + nu + 2 * n1)),
    ])
    q2 = np.array([
        1.0,
        -2.0 * (1 + 2 * n0 + nu * (3 + 4 * n0)),
        4.0 * (n1 + 2 * nu * (1 + n0) + nu ** 2 * (3 + 4 * n0)),
        -8.0 * (1 + nu) * (nu ** 2 - 2 * n1 - 2 * nu * n1),
    ])
    return q1, q2


def cubic_factors_lossy(spec: SupportSpec, t: float, gamma: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form cubic factors for ``2 omega_1(t)`` in a purely lossy channel (``mu = 0``)."""
    _check_spec_m2(spec)
    n1, n2 = spec.photon_numbers
    n0 = spec.n0
    g = math.exp(-gamma * t)
    q1 = np.array([
        -1.0,
        4.0 * (1 + g * n0),
        4.0 * (-1 - g * (2 * n1 + 3 * n2 - g * n0)),
        8.0 * g * n2 * (1 - g),
    ])
    q2 = np.array([
        -1.0,
        2.0 * (1 + 2 * g * n0),
        4.0 * (-g * (2 * n1 + n2) + g * g * n0),
        -8.0 * g * g * n1,
    ])
    return q1, q2


@dataclass(frozen=True)
class CubicCheck:
    """Comparison of a factorised characteristic polynomial with the generic spectrum."""

    roots: np.ndarray
    eigenvalues: np.ndarray
    factor_consistent: tuple
    max_root_mismatch: float
    det_from_roots: float
    det_generic: float

    @property
    def consistent(self) -> bool:
        return all(self.factor_consistent)


def check_cubic_factors(factors: Sequence[np.ndarray], cm: CovarianceMatrix, mode: int = 1,
                        tol: float = 1e-8) -> CubicCheck:
    """Match the roots of each factor against eigenvalues of ``2 omega_mode``.

    A factor is consistent only if every one of its roots is an eigenvalue of
    ``2 omega``.  Nothing is corrected; the caller decides what to trust.
    """
    omega = partial_transpose(cm, mode).matrix - 0.5j * symplectic_form(cm.n_modes)
    eig = np.sort(2.0 * np.linalg.eigvalsh(omega))
    flags, roots = [], []
    remaining = list(eig)
    worst = 0.0
    for coeffs in factors:
        r = np.roots(coeffs)
        r = np.sort(r.real if np.all(np.abs(r.imag) < 1e-9 * max(1.0, np.max(np.abs(r)))) else r)
        roots.extend(np.atleast_1d(r))
        ok = True
        for root in np.atleast_1d(r):
            dist = np.abs(np.asarray(remaining) - root)
            i = int(np.argmin(dist))
            worst = max(worst, float(dist[i]))
            if dist[i] > tol * max(1.0, abs(root)):
                ok = False
            else:
                remaining.pop(i)
        flags.append(ok)
    prod = 1.0
    for coeffs in factors:
        prod *= -coeffs[-1] / coeffs[0]
    return CubicCheck(
        roots=np.array(roots),
        eigenvalues=eig,
        factor_consistent=tuple(flags),
        max_root_mismatch=worst,
        det_from_roots=float(np.real(prod)),
        det_generic=float(np.prod(eig)),
    )


# -- lossy propagation -------------------------------------------------------

def lossy_threshold_mode0(n_tot: float, mu: float, gamma: float = 1.0) -> float:
    """Time after which mode 0 separates; ``N_tot = N_0 + N_1 + N_2``.

    Returns ``inf`` for ``mu = 0``: mode 0 then stays entangled at every time.
    """
    if gamma <= 0:
        raise InvalidArgumentError(f"loss rate must be > 0, got {gamma}")
    if mu < 0 or n_tot < 0:
        raise InvalidArgumentError("mu and n_tot must be >= 0")
    half = 0.5 * n_tot
    if mu == 0:
        return math.inf if n_tot > 0 else 0.0
    return math.log1p((math.sqrt(half * (half + 1.0)) - half) / mu) / gamma


def lossy_threshold_expression(t: float, spec: SupportSpec, mu: float, gamma: float = 1.0,
                               mode: int = 1) -> float:
    """Left-hand side of the mode-1 inseparability condition (``< 0`` means inseparable).

    ``mode = 2`` applies the ``N_1 <-> N_2`` exchange.
    """
    _check_spec_m2(spec)
    if mode not in (1, 2):
        raise InvalidArgumentError(f"mode must be 1 or 2, got {mode}")
    n1, n2 = spec.photon_numbers if mode == 1 else spec.photon_numbers[::-1]
    n0 = spec.n0
    g = math.exp(-gamma * t)
    return (-8 * g * g * n1
            + 8 * (g - 1) * g * (g * n0 - 2 * n1 - n2) * mu
            + 8 * (g - 1) ** 2 * (1 + 2 * g * n0) * mu ** 2
            - 8 * (g - 1) ** 3 * mu ** 3)


def lossy_threshold_mode1(spec: SupportSpec, mu: float, gamma: float = 1.0, mode: int = 1,
                          t_max: float | None = None) -> float:
    """First sign change of :func:`lossy_threshold_expression` in ``t``; ``inf`` if none."""
    if gamma <= 0:
        raise InvalidArgumentError(f"loss rate must be > 0, got {gamma}")
    if mu < 0:
        raise InvalidArgumentError(f"mu must be >= 0, got {mu}")
    t_max = 1e3 / gamma if t_max is None else t_max
    if spec.photon_numbers[mode - 1] == 0:
        return 0.0
    if mu == 0:
        # the expression reduces to -8 g^2 N_mode, negative at every finite time
        return math.inf
    return first_crossing(lambda t: lossy_threshold_expression(t, spec, mu, gamma, mode),
                          0.0, 1.0 / gamma, t_max)


def lossy_threshold_numeric(spec: SupportSpec, mode: int, mu: float, gamma: float = 1.0,
                            t_max: float | None = None) -> float:
    """Separation time of ``{mode}`` from bisection on the generic PPT eigenvalue.

    All modes share the same channel (equal loss rate and ``mu``).
    """
    t_max = 1e3 / gamma if t_max is None else t_max
    sigma = build_cm(spec)

    def lam(t):
        return ppt_min_eigenvalue(evolve(sigma, gamma * t, mu), mode)

    if lam(0.0) >= -BOUNDARY_TOL:
        return 0.0
    return first_crossing(lam, 0.0, 1.0 / gamma, t_max)


def certify_no_threshold(spec: SupportSpec, mode: int, mu: float, gamma: float = 1.0,
                         t_max: float = 20.0, n_points: int = 401) -> bool:
    """True if ``{mode}`` stays PPT-violating (eigenvalue strictly negative) on ``[0, t_max]``."""
    sigma = build_cm(spec)
    for t in np.linspace(0.0, t_max, n_points):
        if ppt_min_eigenvalue(evolve(sigma, gamma * t, mu), mode) >= 0:
            return False
    return True
