"""1 -> m telecloning over an SU(m,1) support in phase space.

Mode 0 of the support is jointly measured with the input mode ``b``
(double homodyne of ``Z = b + a_0^dag``); the outcome is broadcast and every
clone mode is displaced by it.  Averaging over outcomes gives the clone
covariance matrices, which are compared with the closed forms.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channels import NoiseParams
from .errors import InvalidArgumentError, UnsupportedInputError
from .gaussian import (
    MOMENTUM_FLIP,
    CovarianceMatrix,
    GaussianState,
    coherent_mean,
    condition_on_gaussian_measurement,
    fidelity_to_pure,
    reduce,
    split_blocks,
    squeezing_symplectic,
)
from .states import SupportSpec, build_cm

MC_SHARD_SIZE = 1 << 14


@dataclass(frozen=True)
class InputState:
    """Pure single-mode state ``S(xi) D(alpha) |0>`` to be cloned."""

    alpha: complex = 0j
    xi: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "xi", complex(self.xi))
        if not (math.isfinite(abs(self.alpha)) and math.isfinite(abs(self.xi))):
            raise InvalidArgumentError("input amplitudes must be finite")

    @property
    def is_coherent(self) -> bool:
        return self.xi == 0

    def symplectic(self) -> np.ndarray:
        return squeezing_symplectic(self.xi)

    def state(self) -> GaussianState:
        s = self.symplectic()
        return GaussianState(CovarianceMatrix(0.5 * s @ s.T), s @ coherent_mean(self.alpha))


@dataclass(frozen=True)
class Clone:
    h: int
    n: float
    fidelity: float
    state: GaussianState


@dataclass(frozen=True)
class CloneReport:
    """Averaged output of the protocol.

    ``outcome_gain`` maps the measurement outcome (mode-0 quadrature frame) to
    the clone displacements; ``conditional_gain`` is the Gaussian update of
    the clone means given the outcome.
    """

    clones: tuple
    output: GaussianState
    outcome_gain: np.ndarray
    conditional_gain: np.ndarray
    outcome_mean: np.ndarray
    outcome_cov: np.ndarray

    @property
    def fidelities(self) -> list:
        return [c.fidelity for c in self.clones]

    @property
    def noises(self) -> list:
        return [c.n for c in self.clones]


def ideal_clone_noise(spec: SupportSpec) -> list:
    """Thermal photons added to every clone by the noiseless protocol."""
    root0 = math.sqrt(spec.n0 + 1.0)
    return [(root0 - math.sqrt(nh)) ** 2 for nh in spec.photon_numbers]


def ideal_fidelities(spec: SupportSpec) -> list:
    return [1.0 / (1.0 + n) for n in ideal_clone_noise(spec)]


def heterodyne_povm_cm(inp: InputState, delta: float = 0.0) -> np.ndarray:
    """Seed covariance ``P sigma_in P + (delta/2) 1`` of the double-homodyne POVM on mode 0.

    Squeezed inputs are only modelled with perfect detection.
    """
    if not math.isfinite(delta) or delta < 0:
        raise InvalidArgumentError(f"detection noise must be >= 0, got {delta}")
    if not inp.is_coherent and delta > 0:
        raise UnsupportedInputError("squeezed inputs are only supported with ideal detection")
    sigma_in = inp.state().cm.matrix
    return MOMENTUM_FLIP @ sigma_in @ MOMENTUM_FLIP + 0.5 * delta * np.eye(2)


def squeezed_support_cm(spec: SupportSpec, xi: complex) -> CovarianceMatrix:
    """Support for a squeezed input: ``S(xi*)`` on mode 0 and ``S(xi)`` on every clone mode."""
    s = squeezing_symplectic(xi)
    s_conj = squeezing_symplectic(np.conj(xi))
    total = np.zeros((2 * (spec.m + 1),) * 2)
    total[0:2, 0:2] = s_conj
    for h in range(1, spec.m + 1):
        total[2 * h:2 * h + 2, 2 * h:2 * h + 2] = s
    return CovarianceMatrix(total @ build_cm(spec).matrix @ total.T)


def _outcome_law(support: GaussianState, inp: InputState, delta: float):
    """Gaussian law of the outcome ``X = x_0 - P x_b`` plus the blocks used downstream."""
    a, c, b = split_blocks(support.cm, [0])
    povm = heterodyne_povm_cm(inp, delta)
    mean_in = inp.state().mean
    mean = support.mean[:2] - MOMENTUM_FLIP @ mean_in
    return a, c, b, povm, a + povm, mean


def _as_state(support) -> GaussianState:
    if isinstance(support, GaussianState):
        return support
    if isinstance(support, CovarianceMatrix):
        return GaussianState(support)
    return GaussianState(CovarianceMatrix(support))


def run_protocol(support, inp: InputState | None = None, delta: float = 0.0) -> CloneReport:
    """Average the protocol over all outcomes and score every clone against the input.

    ``support`` is an (m+1)-mode CovarianceMatrix or GaussianState with mode 0
    held by the sender.
    """
    inp = InputState() if inp is None else inp
    state = _as_state(support)
    m = state.n_modes - 1
    if m < 1:
        raise InvalidArgumentError("support needs at least two modes")
    a, c, b, povm, outcome_cov, outcome_mean = _outcome_law(state, inp, delta)
    _, gain_k = condition_on_gaussian_measurement(state.cm, povm, [0])
    gain_d = -np.tile(MOMENTUM_FLIP, (m, 1))
    cross = gain_d @ c
    sigma = b + gain_d @ outcome_cov @ gain_d.T + cross + cross.T
    mean = state.mean[2:] + gain_d @ outcome_mean
    output = GaussianState(CovarianceMatrix(sigma), mean)
    target = inp.state()
    clones = []
    for h in range(1, m + 1):
        clone = reduce(output, [h - 1])
        fid = fidelity_to_pure(clone, target)
        clones.append(Clone(h, 1.0 / fid - 1.0, fid, clone))
    return CloneReport(tuple(clones), output, gain_d, gain_k, outcome_mean, outcome_cov)


def clone_fidelity_closed(spec: SupportSpec, noise: NoiseParams, h: int) -> float:
    """Fidelity of clone ``h`` (1-based) over a noisy support, as a closed expression."""
    if not 1 <= h <= spec.m:
        raise InvalidArgumentError(f"clone index must be in 1..{spec.m}, got {h}")
    n0, nh = spec.n0, spec.photon_numbers[h - 1]
    zeta, kappa = noise.zeta, noise.kappa
    g0, gc = noise.gamma0, noise.gammac
    inner = (g0 * (n0 + 0.5 - kappa / zeta)
             + gc * (nh + 0.5 - kappa / zeta)
             - 2.0 * math.sqrt(g0 * gc * nh * (n0 + 1.0)))
    return 1.0 / (1.0 + 0.5 * noise.delta + 2.0 * kappa + zeta * inner)


# -- Monte Carlo oracle --------------------------------------------------------

@dataclass(frozen=True)
class MonteCarloReport:
    """Sampled clone moments next to the averaged analytic ones.

    ``outcome_z_mean`` and ``outcome_z_var`` describe the complex outcome
    ``z = (X_q + i X_p)/sqrt(2)``; the variance is per real component.
    """

    samples: int
    seed: int
    mean: np.ndarray
    cov: np.ndarray
    mean_stderr: np.ndarray
    cov_stderr: np.ndarray
    mean_z: np.ndarray
    cov_z: np.ndarray
    outcome_z_mean: complex
    outcome_z_var: tuple
    analytic: CloneReport

    @property
    def max_abs_z(self) -> float:
        return float(max(np.max(np.abs(self.mean_z)), np.max(np.abs(self.cov_z))))


def thread_count() -> int:
    cap = os.environ.get("CVTC_THREADS")
    default = min(8, os.cpu_count() or 1)
    if cap is None:
        return default
    try:
        return max(1, int(cap))
    except ValueError:
        raise InvalidArgumentError(f"CVTC_THREADS must be an integer, got {cap!r}") from None


def _shard_moments(k: int, n: int, seed: int, law):
    """Mean and scatter of ``n`` sampled clone quadratures plus outcome moments."""
    outcome_mean, outcome_chol, cond_chol, gain_k, gain_d, mean_b = law
    rng = np.random.default_rng([seed, k])
    x = outcome_mean + rng.standard_normal((n, 2)) @ outcome_chol.T
    centre = mean_b + (x - outcome_mean) @ gain_k.T + x @ gain_d.T
    y = centre + rng.standard_normal((n, cond_chol.shape[0])) @ cond_chol.T
    y_mean = y.mean(axis=0)
    dy = y - y_mean
    x_mean = x.mean(axis=0)
    dx = x - x_mean
    return n, y_mean, dy.T @ dy, x_mean, dx.T @ dx


def _combine(parts):
    """Pairwise (Chan) merge of per-shard means and scatter matrices, in shard order."""
    n, mean, scatter = parts[0]
    for n_b, mean_b, scatter_b in parts[1:]:
        total = n + n_b
        delta = mean_b - mean
        mean = mean + delta * (n_b / total)
        scatter = scatter + scatter_b + np.outer(delta, delta) * (n * n_b / total)
        n = total
    return n, mean, scatter


def monte_carlo_protocol(support, inp: InputState | None = None, delta: float = 0.0,
                         samples: int = 100_000, seed: int = 0) -> MonteCarloReport:
    """Sample outcomes and clone quadratures, then compare with :func:`run_protocol`.

    Samples are drawn in fixed-size shards, each seeded by ``(seed, shard)``;
    results do not depend on the number of threads.
    """
    if int(samples) != samples or samples < 1:
        raise InvalidArgumentError(f"samples must be a positive integer, got {samples}")
    samples = int(samples)
    inp = InputState() if inp is None else inp
    state = _as_state(support)
    analytic = run_protocol(state, inp, delta)
    _, _, _, povm, outcome_cov, outcome_mean = _outcome_law(state, inp, delta)
    sigma_c, gain_k = condition_on_gaussian_measurement(state.cm, povm, [0])
    law = (
        outcome_mean,
        np.linalg.cholesky(outcome_cov),
        np.linalg.cholesky(sigma_c.matrix),
        gain_k,
        analytic.outcome_gain,
        state.mean[2:],
    )
    sizes = [MC_SHARD_SIZE] * (samples // MC_SHARD_SIZE)
    if samples % MC_SHARD_SIZE:
        sizes.append(samples % MC_SHARD_SIZE)
    with ThreadPoolExecutor(max_workers=min(thread_count(), len(sizes))) as pool:
        shards = list(pool.map(lambda k: _shard_moments(k, sizes[k], seed, law), range(len(sizes))))
    n, mean, scatter = _combine([(s[0], s[1], s[2]) for s in shards])
    _, x_mean, x_scatter = _combine([(s[0], s[3], s[4]) for s in shards])
    dof = max(n - 1, 1)
    cov = scatter / dof
    x_cov = x_scatter / dof

    true_mean = analytic.output.mean
    true_cov = analytic.output.cm.matrix
    diag = np.diag(true_cov)
    mean_se = np.sqrt(diag / n)
    cov_se = np.sqrt((np.outer(diag, diag) + true_cov ** 2) / n)
    return MonteCarloReport(
        samples=n,
        seed=seed,
        mean=mean,
        cov=cov,
        mean_stderr=mean_se,
        cov_stderr=cov_se,
        mean_z=(mean - true_mean) / mean_se,
        cov_z=(cov - true_cov) / cov_se,
        outcome_z_mean=complex(x_mean[0], x_mean[1]) / math.sqrt(2.0),
        outcome_z_var=(x_cov[0, 0] / 2.0, x_cov[1, 1] / 2.0),
        analytic=analytic,
    )
