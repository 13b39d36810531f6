"""SU(m,1) coherent states: covariance matrices from photon numbers and a Fock-space oracle.

The state is parameterised by the mean photon numbers ``N_1..N_m`` of the
clone modes; mode 0 carries ``N_0 = sum N_k``.  Amplitude phases are fixed to
zero (they can be removed by local rotations).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import InvalidArgumentError, TruncationError
from .gaussian import MOMENTUM_FLIP, CovarianceMatrix

FOCK_DEFICIT_LIMIT = 1e-6


@dataclass(frozen=True)
class SupportSpec:
    """Photon numbers ``N_1..N_m`` of the support state; ``n0`` is derived."""

    photon_numbers: tuple

    def __post_init__(self):
        values = tuple(float(v) for v in np.atleast_1d(self.photon_numbers))
        if not values:
            raise InvalidArgumentError("support needs at least one clone mode")
        if any(not math.isfinite(v) or v < 0 for v in values):
            raise InvalidArgumentError(f"photon numbers must be finite and >= 0, got {values}")
        object.__setattr__(self, "photon_numbers", values)

    @classmethod
    def symmetric(cls, m: int, n: float) -> "SupportSpec":
        return cls((n,) * m)

    @classmethod
    def optimal_symmetric(cls, m: int) -> "SupportSpec":
        """``N_h = 1/(m(m-1))``, the ideal symmetric telecloning optimum."""
        if m < 2:
            raise InvalidArgumentError("symmetric cloning needs m >= 2")
        return cls.symmetric(m, 1.0 / (m * (m - 1)))

    @property
    def m(self) -> int:
        return len(self.photon_numbers)

    @property
    def n0(self) -> float:
        return math.fsum(self.photon_numbers)

    def swapped(self, i: int, j: int) -> "SupportSpec":
        """Copy with clone modes ``i`` and ``j`` (1-based) exchanged."""
        values = list(self.photon_numbers)
        values[i - 1], values[j - 1] = values[j - 1], values[i - 1]
        return SupportSpec(tuple(values))


def build_cm(spec: SupportSpec) -> CovarianceMatrix:
    """Covariance matrix of the (m+1)-mode SU(m,1) coherent state."""
    ns = np.asarray(spec.photon_numbers)
    n0 = spec.n0
    diag = np.repeat(np.concatenate([[n0], ns]) + 0.5, 2)
    sigma = np.diag(diag)
    for h, nh in enumerate(ns, start=1):
        a = math.sqrt(nh * (n0 + 1.0)) * MOMENTUM_FLIP
        sigma[0:2, 2 * h:2 * h + 2] = a
        sigma[2 * h:2 * h + 2, 0:2] = a
        for j in range(h + 1, spec.m + 1):
            b = math.sqrt(nh * ns[j - 1]) * np.eye(2)
            sigma[2 * h:2 * h + 2, 2 * j:2 * j + 2] = b
            sigma[2 * j:2 * j + 2, 2 * h:2 * h + 2] = b
    return CovarianceMatrix(sigma)


def thermal_cm_of_support(spec: SupportSpec, nu: float) -> CovarianceMatrix:
    """State generated from a thermal background of ``nu`` photons per mode: ``(2nu+1) sigma_m``."""
    if not math.isfinite(nu) or nu < 0:
        raise InvalidArgumentError(f"thermal photon number must be >= 0, got {nu}")
    return build_cm(spec).scaled(2.0 * nu + 1.0)


@dataclass(frozen=True)
class FockAmplitudes:
    """Truncated Fock expansion ``{(n_1..n_m): c}``; mode 0 holds ``sum n_k`` photons."""

    m: int
    cutoff: int
    amplitudes: dict = field(repr=False)
    deficit: float

    @property
    def norm(self) -> float:
        return 1.0 - self.deficit


def _compositions(m: int, total_max: int) -> Iterator[tuple]:
    """All ``(n_1..n_m)`` with non-negative entries summing to at most ``total_max``."""
    if m == 1:
        for n in range(total_max + 1):
            yield (n,)
        return
    for n in range(total_max + 1):
        for rest in _compositions(m - 1, total_max - n):
            yield (n,) + rest


def fock_coefficients(spec: SupportSpec, cutoff: int) -> FockAmplitudes:
    """Amplitudes of the SU(m,1) state up to ``cutoff`` total clone photons.

    ``c = sqrt(Z) prod C_k^{n_k} sqrt((sum n)!) / sqrt(prod n_k!)`` with
    ``C_k = sqrt(N_k/(1+N_0))`` and ``Z = 1/(1+N_0)``, evaluated in log space.
    """
    if cutoff < 0 or int(cutoff) != cutoff:
        raise InvalidArgumentError(f"cutoff must be a non-negative integer, got {cutoff}")
    cutoff = int(cutoff)
    n0 = spec.n0
    log_z = -math.log1p(n0)
    log_c = [math.log(nk) - math.log1p(n0) if nk > 0 else None for nk in spec.photon_numbers]
    amps = {}
    for ns in _compositions(spec.m, cutoff):
        if any(n and lc is None for n, lc in zip(ns, log_c)):
            continue
        total = sum(ns)
        log_amp = 0.5 * log_z + 0.5 * math.lgamma(total + 1)
        for n, lc in zip(ns, log_c):
            if n:
                log_amp += 0.5 * n * lc - 0.5 * math.lgamma(n + 1)
        amps[ns] = math.exp(log_amp)
    deficit = max(0.0, 1.0 - math.fsum(c * c for c in amps.values()))
    return FockAmplitudes(spec.m, cutoff, amps, deficit)


def _lower(state: dict, mode: int) -> dict:
    """Apply the annihilation operator of ``mode`` to a sparse occupation-basis vector."""
    out = {}
    for occ, amp in state.items():
        n = occ[mode]
        if n:
            new = occ[:mode] + (n - 1,) + occ[mode + 1:]
            out[new] = out.get(new, 0.0) + amp * math.sqrt(n)
    return out


def _inner(bra: dict, ket: dict) -> complex:
    keys = bra.keys() & ket.keys()
    return complex(sum(np.conj(bra[k]) * ket[k] for k in keys))


def cm_from_state_vector(state: dict, n_modes: int) -> CovarianceMatrix:
    """Covariance matrix of a sparse Fock-basis state vector ``{(n_0..n_{M-1}): amplitude}``.

    The vector is normalised internally.
    """
    norm = _inner(state, state).real
    lowered = [_lower(state, k) for k in range(n_modes)]
    a = np.array([_inner(state, lowered[k]) for k in range(n_modes)]) / norm
    ad_a = np.empty((n_modes, n_modes), dtype=complex)      # <a_j^dag a_k>
    a_a = np.empty((n_modes, n_modes), dtype=complex)       # <a_j a_k>
    for j in range(n_modes):
        for k in range(n_modes):
            ad_a[j, k] = _inner(lowered[j], lowered[k]) / norm
            a_a[j, k] = _inner(state, _lower(lowered[k], j)) / norm
    # central moments
    ad_a -= np.outer(a.conj(), a)
    a_a -= np.outer(a, a)
    sigma = np.empty((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        for k in range(n_modes):
            delta = 0.5 if j == k else 0.0
            sigma[2 * j, 2 * k] = (a_a[j, k] + ad_a[j, k]).real + delta
            sigma[2 * j + 1, 2 * k + 1] = (-a_a[j, k] + ad_a[j, k]).real + delta
            sigma[2 * j, 2 * k + 1] = (a_a[j, k] + ad_a[j, k]).imag
            sigma[2 * k + 1, 2 * j] = sigma[2 * j, 2 * k + 1]
    return CovarianceMatrix(sigma)


def cm_from_fock(amps: FockAmplitudes) -> CovarianceMatrix:
    """Second moments of the truncated (m+1)-mode state, computed from ladder operators."""
    if amps.deficit >= FOCK_DEFICIT_LIMIT:
        raise TruncationError(f"Fock cutoff {amps.cutoff} too small", amps.deficit)
    state = {(sum(ns),) + ns: c for ns, c in amps.amplitudes.items()}
    return cm_from_state_vector(state, amps.m + 1)
