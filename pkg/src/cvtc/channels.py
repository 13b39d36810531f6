"""Lossy thermal channels acting on covariance matrices.

Each mode ``k`` sees a Markovian channel with effective time ``tau_k`` (loss
rate times time) and ``mu`` thermal photons; the transmissivity is
``exp(-tau_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .gaussian import CovarianceMatrix
from .states import SupportSpec, build_cm


@dataclass(frozen=True)
class NoiseParams:
    """Noise budget of the telecloning protocol.

    Attributes
    ----------
    nu : float
        Thermal photons in the generation stage.
    mu : float
        Thermal photons of the propagation channels (equal for every mode).
    tau0 : float
        Effective propagation time of mode ``a_0``.
    tauc : float
        Effective propagation time of every clone mode.
    delta : float
        Detection noise ``(1 - eta)/eta``.
    """

    nu: float = 0.0
    mu: float = 0.0
    tau0: float = 0.0
    tauc: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in ("nu", "mu", "tau0", "tauc", "delta"):
            value = float(getattr(self, name))
            if not math.isfinite(value) or value < 0:
                raise InvalidArgumentError(f"{name} must be finite and >= 0, got {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_efficiency(cls, eta: float, **kwargs) -> "NoiseParams":
        if not 0 < eta <= 1:
            raise InvalidArgumentError(f"detection efficiency must be in (0, 1], got {eta}")
        return cls(delta=(1.0 - eta) / eta, **kwargs)

    def with_split(self, tau_total: float, tau0: float) -> "NoiseParams":
        """Same noise with the line time ``tau_total`` split as ``tau0 + (tau_total - tau0)``."""
        if not 0 <= tau0 <= tau_total:
            raise InvalidArgumentError(f"need 0 <= tau0 <= tau_total, got {tau0}, {tau_total}")
        return NoiseParams(self.nu, self.mu, tau0, tau_total - tau0, self.delta)

    @property
    def tau_total(self) -> float:
        return self.tau0 + self.tauc

    @property
    def gamma0(self) -> float:
        return math.exp(-self.tau0)

    @property
    def gammac(self) -> float:
        return math.exp(-self.tauc)

    @property
    def gamma_total(self) -> float:
        return math.exp(-self.tau_total)

    @property
    def kappa(self) -> float:
        return self.mu + 0.5

    @property
    def zeta(self) -> float:
        return 1.0 + 2.0 * self.nu

    @property
    def x(self) -> float:
        """``kappa/zeta - 1/2``, written as ``(mu - nu)/(1 + 2 nu)`` to avoid cancellation."""
        return (self.mu - self.nu) / (1.0 + 2.0 * self.nu)


def evolve(cm: CovarianceMatrix, per_mode_tau, mu: float) -> CovarianceMatrix:
    """Propagate every mode through its own lossy thermal channel.

    ``sigma -> G^{1/2} sigma G^{1/2} + (1 - G)(mu + 1/2)`` with
    ``G = (+)_k exp(-tau_k) 1_2``.  A scalar ``per_mode_tau`` applies to all modes.
    """
    taus = np.asarray(per_mode_tau, dtype=float)
    if taus.ndim == 0:
        taus = np.full(cm.n_modes, float(taus))
    if taus.shape != (cm.n_modes,):
        raise InvalidArgumentError(f"need {cm.n_modes} effective times, got {taus.size}")
    # +inf is allowed and means the stationary state
    if np.any(np.isnan(taus)) or np.any(taus < 0):
        raise InvalidArgumentError("effective times must be >= 0")
    if not math.isfinite(mu) or mu < 0:
        raise InvalidArgumentError(f"channel thermal photons must be >= 0, got {mu}")
    g = np.repeat(np.exp(-taus), 2)
    root = np.sqrt(g)
    return CovarianceMatrix(cm.matrix * np.outer(root, root) + np.diag((1.0 - g) * (mu + 0.5)))


def build_noisy_support(spec: SupportSpec, noise: NoiseParams) -> CovarianceMatrix:
    """Support state generated from ``nu`` thermal photons and sent through the channels.

    Assembled block by block from the closed-form expressions (mode 0 with
    ``tau0``, every clone mode with ``tauc``), independently of :func:`evolve`.
    """
    zeta, kappa = noise.zeta, noise.kappa
    g0, gc = noise.gamma0, noise.gammac
    ideal = build_cm(spec).matrix
    m = spec.m
    out = np.empty_like(ideal)
    out[0:2, 0:2] = zeta * g0 * ideal[0:2, 0:2] + kappa * (1.0 - g0) * np.eye(2)
    cross = zeta * math.sqrt(g0 * gc)
    out[0:2, 2:] = cross * ideal[0:2, 2:]
    out[2:, 0:2] = cross * ideal[2:, 0:2]
    out[2:, 2:] = zeta * gc * ideal[2:, 2:] + kappa * (1.0 - gc) * np.eye(2 * m)
    return CovarianceMatrix(out)
