"""Optimal supports for telecloning.

Two problems are covered: the asymmetric trade-off (smallest noise on clone 1
once the other clones' noise is fixed) and the symmetric protocol under
noise, optimised over the photons per clone ``N`` and the source location
``gamma_0 = exp(-tau_0)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.optimize

from .channels import NoiseParams
from .errors import InfeasibleError, InvalidArgumentError, NumericError
from .states import SupportSpec

FIXED_POINT_TOL = 1e-10
FIXED_POINT_MAXITER = 500
FIXED_POINT_DAMPING = 0.5
N_CAP = 1e6
RADICAND_TOL = 1e-12
RADICAND_SNAP = 1e-13


# -- asymmetric trade-off ------------------------------------------------------

@dataclass(frozen=True)
class TradeoffResult:
    """Best clone-1 noise for fixed noise on the other clones.

    ``attainable`` is false when the closed-form optimum needs photon numbers
    outside the physical range (some ``n_j > N_0 + 1`` or a negative ``N_1``);
    the true constrained minimum then lies on the boundary and is larger.
    """

    n1_min: float
    N0_opt: float
    F1_max: float
    feasible: bool
    attainable: bool
    support: SupportSpec | None


def _check_noises(n_js) -> list:
    values = [float(v) for v in n_js]
    if not values:
        raise InvalidArgumentError("need the noise of at least one other clone")
    if any(not math.isfinite(v) or v < 0 for v in values):
        raise InvalidArgumentError(f"clone noises must be finite and >= 0, got {values}")
    return values


def _radicand(N0: float, n_js: Sequence[float]) -> float:
    root0 = math.sqrt(N0 + 1.0)
    return N0 - math.fsum((root0 - math.sqrt(n)) ** 2 for n in n_js)


def support_for_noises(N0: float, n_js: Sequence[float]) -> SupportSpec:
    """Support with total photons ``N0`` giving noise ``n_j`` on clones ``2..m``.

    Raises InfeasibleError if no such support exists.  Shortfalls within
    rounding (``RADICAND_TOL``) are clipped to zero.
    """
    n_js = _check_noises(n_js)
    root0 = math.sqrt(N0 + 1.0)
    slack = RADICAND_TOL * max(1.0, N0)
    if any(n > N0 + 1.0 + slack for n in n_js):
        raise InfeasibleError(f"clone noise above N0 + 1 = {N0 + 1.0} cannot be reached")
    others = [(root0 - math.sqrt(n)) ** 2 if n <= N0 + 1.0 else 0.0 for n in n_js]
    n1 = N0 - math.fsum(others)
    if n1 < -slack:
        raise InfeasibleError(f"N0 = {N0} is too small for the requested clone noises")
    return SupportSpec((max(n1, 0.0), *others))


def n1_given_N0(N0: float, n_js: Sequence[float]) -> float:
    """Noise on clone 1 when the support holds ``N0`` photons in total."""
    if not math.isfinite(N0) or N0 < 0:
        raise InvalidArgumentError(f"N0 must be finite and >= 0, got {N0}")
    spec = support_for_noises(N0, n_js)
    return (math.sqrt(N0 + 1.0) - math.sqrt(spec.photon_numbers[0])) ** 2


def _n1_or_inf(N0, n_js):
    try:
        return n1_given_N0(N0, n_js)
    except InfeasibleError:
        return math.inf


def n1_min_closed(n_js: Sequence[float], m: int | None = None, *, strict: bool = True) -> TradeoffResult:
    """Closed-form optimum of :func:`n1_given_N0` over ``N0``.

    With ``strict`` an infeasible request raises InfeasibleError; otherwise a
    result with ``feasible=False`` and NaN entries is returned.
    """
    n_js = _check_noises(n_js)
    m = len(n_js) + 1 if m is None else int(m)
    if m < 2 or len(n_js) != m - 1:
        raise InvalidArgumentError(f"need m - 1 = {m - 1} clone noises, got {len(n_js)}")
    if any(n <= 0 for n in n_js):
        raise InvalidArgumentError("clone noises must be > 0")
    if m == 2:
        n2 = n_js[0]
        n1, N0 = 1.0 / (4.0 * n2), n2 + 1.0 / (4.0 * n2)
    else:
        s1 = math.fsum(math.sqrt(n) for n in n_js)
        s2 = math.fsum(n_js)
        # (sum sqrt n_j)^2 expanded into pairwise products so that landmark
        # inputs sitting exactly on radicand = 0 stay there
        cross = math.fsum(math.sqrt(a * b) for i, a in enumerate(n_js) for b in n_js[i + 1:])
        terms = [(3 - m) * s2, 2.0 * cross, -(m - 2.0)]
        radicand = (m - 1) * math.fsum(terms)
        if abs(radicand) <= RADICAND_SNAP * (m - 1) * math.fsum(abs(t) for t in terms):
            radicand = 0.0
        if radicand < 0:
            if strict:
                raise InfeasibleError("requested fidelities exceed what any support can deliver")
            return TradeoffResult(math.nan, math.nan, math.nan, False, False, None)
        root = math.sqrt(radicand)
        n1 = (s1 - root) ** 2 / (m - 2) ** 2
        N0 = ((m - 1) * s1 - root) ** 2 / ((m - 1) ** 2 * (m - 2) ** 2) - 1.0
    try:
        support = support_for_noises(N0, n_js) if N0 >= -RADICAND_TOL else None
    except InfeasibleError:
        support = None
    return TradeoffResult(n1, N0, 1.0 / (1.0 + n1), True, support is not None, support)


def _feasible_edge(inside: float, outside: float, n_js) -> float:
    """Bisect between a feasible and an infeasible ``N0`` down to rounding."""
    for _ in range(200):
        mid = 0.5 * (inside + outside)
        if math.isfinite(_n1_or_inf(mid, n_js)):
            inside = mid
        else:
            outside = mid
        if abs(inside - outside) <= 1e-15 * max(1.0, abs(inside)):
            break
    return inside


def n1_min_numeric(n_js: Sequence[float]) -> tuple[float, float]:
    """``(n1_min, N0_opt)`` by direct 1-D minimisation of :func:`n1_given_N0`.

    The feasible ``N0`` set is an interval (possibly a single point).  It is
    found around the maximiser of the radicand; Brent's bounded method then
    minimises ``n1`` inside it.
    """
    n_js = _check_noises(n_js)
    lo = max(0.0, max(n_js) - 1.0)
    hi = lo + 10.0 * (2.0 + max(n_js) + sum(1.0 / n for n in n_js if n > 0))
    res = scipy.optimize.minimize_scalar(lambda x: -_radicand(x, n_js), bounds=(lo, hi),
                                         method="bounded", options={"xatol": 1e-14})
    centre = float(res.x)
    if not math.isfinite(_n1_or_inf(centre, n_js)):
        raise InfeasibleError("no feasible N0 found for the requested clone noises")
    left = lo if math.isfinite(_n1_or_inf(lo, n_js)) else _feasible_edge(centre, lo, n_js)
    right = hi if math.isfinite(_n1_or_inf(hi, n_js)) else _feasible_edge(centre, hi, n_js)
    candidates = [(n1_given_N0(x, n_js), x) for x in (left, centre, right)]
    if right > left:
        res = scipy.optimize.minimize_scalar(lambda x: _n1_or_inf(x, n_js), bounds=(left, right),
                                             method="bounded", options={"xatol": 1e-13})
        if math.isfinite(res.fun):
            candidates.append((float(res.fun), float(res.x)))
    best, best_x = min(candidates)
    return float(best), float(best_x)


def tradeoff_m2(F2: float) -> float:
    """Best clone-1 fidelity for 1 -> 2 cloning with clone 2 fixed at ``F2``."""
    if not 0 < F2 <= 1:
        raise InvalidArgumentError(f"fidelity must be in (0, 1], got {F2}")
    return 4.0 * (1.0 - F2) / (4.0 - 3.0 * F2)


def f1_max_tradeoff_m3(F2: float, F3: float) -> tuple[float, SupportSpec]:
    """Best clone-1 fidelity for 1 -> 3 cloning with clones 2, 3 fixed, and the support reaching it."""
    for f in (F2, F3):
        if not 0 < f < 1:
            raise InvalidArgumentError(f"fixed fidelities must be in (0, 1), got {f}")
    if F2 > tradeoff_m2(F3) * (1 + 1e-12):
        raise InfeasibleError(f"F2 = {F2} exceeds the 1 -> 2 bound {tradeoff_m2(F3)} set by F3 = {F3}")
    a, b = 1.0 / F2 - 1.0, 1.0 / F3 - 1.0
    root_ab = math.sqrt(a * b)
    inner = math.sqrt(max(0.0, 2.0 * (2.0 * root_ab - 1.0)))
    f1 = 1.0 / (1.0 + (math.sqrt(a) + math.sqrt(b) - inner) ** 2)
    n1 = max(0.0, root_ab - 0.5)
    n2 = (math.sqrt(b) - math.sqrt(n1)) ** 2
    n3 = (math.sqrt(a) - math.sqrt(n1)) ** 2
    return f1, SupportSpec((n1, n2, n3))


def ratio_constrained_n1(q_js: Sequence[float], m: int | None = None) -> float:
    """Smallest clone-1 noise when clone ``j`` is held at ``q_j`` times that noise."""
    q_js = [float(q) for q in q_js]
    m = len(q_js) + 1 if m is None else int(m)
    if len(q_js) != m - 1 or m < 2:
        raise InvalidArgumentError(f"need m - 1 = {m - 1} ratios, got {len(q_js)}")
    if any(not math.isfinite(q) or q < 1 for q in q_js):
        raise InvalidArgumentError(f"ratios must be finite and >= 1, got {q_js}")
    denom = (1.0 + math.fsum(math.sqrt(q) for q in q_js)) ** 2 - (m - 1) * (1.0 + math.fsum(q_js))
    if denom <= 0:
        raise InfeasibleError(f"no support realises the noise ratios {q_js}")
    return (m - 1) / denom


def ratio_constrained_fixed_point(q_js: Sequence[float], start: float = 1.0) -> float:
    """Solve ``n1 = n1_min(q_j n1)`` by damped iteration (cross-check of the ratio formula)."""
    q_js = [float(q) for q in q_js]
    n1 = start
    for _ in range(FIXED_POINT_MAXITER):
        target = n1_min_closed([q * n1 for q in q_js]).n1_min
        new = (1.0 - FIXED_POINT_DAMPING) * n1 + FIXED_POINT_DAMPING * target
        if abs(new - n1) < FIXED_POINT_TOL:
            return new
        n1 = new
    raise NumericError(f"fixed point did not converge in {FIXED_POINT_MAXITER} iterations")


# -- symmetric protocol under noise ------------------------------------------

class Regime(str, enum.Enum):
    SHORT_TIME = "short-time"
    NEGATIVE_X = "long-time-negative-x"
    MIDRANGE_X_DIVERGENT = "long-time-midrange-x-divergentN"
    MIDRANGE_X_FINITE = "long-time-midrange-x-finiteN"
    LARGE_X_FINITE = "long-time-large-x-finiteN"


@dataclass(frozen=True)
class OptimizationResult:
    """Best symmetric support and source location for a fixed total line time.

    ``N_opt`` is ``inf`` when the fidelity keeps growing with ``N``; ``F_max``
    is then the finite limit.  The numeric optimiser leaves ``regime`` and
    ``closed_form`` unset.
    """

    tau_total: float
    tau0_opt: float
    N_opt: float
    F_max: float
    regime: Regime | None = None
    closed_form: str | None = None

    @property
    def divergent(self) -> bool:
        return math.isinf(self.N_opt)


def _check_m(m) -> int:
    if isinstance(m, bool) or int(m) != m or m < 2:
        raise InvalidArgumentError(f"number of clones must be an integer >= 2, got {m}")
    return int(m)


def symmetric_f(N: float, gamma0: float, x: float, gammaT: float, m: int) -> float:
    """Noise-dependent part of the inverse symmetric fidelity (smaller is better)."""
    m = _check_m(m)
    if not N >= 0 or not 0 < gammaT <= 1:
        raise InvalidArgumentError(f"need N >= 0 and 0 < gammaT <= 1, got N={N}, gammaT={gammaT}")
    slack = 1e-14
    if not gammaT * (1 - slack) <= gamma0 <= 1 + slack:
        raise InvalidArgumentError(f"gamma0 must lie in [gammaT, 1], got {gamma0}")
    return (gammaT / gamma0) * (N - x) + gamma0 * (m * N - x) - 2.0 * math.sqrt(gammaT * N * (m * N + 1.0))


def symmetric_fidelity(N: float, gamma0: float, noise: NoiseParams, m: int) -> float:
    """Clone fidelity of the symmetric protocol; the line time is ``noise.tau_total``."""
    f = symmetric_f(N, gamma0, noise.x, noise.gamma_total, m)
    return 1.0 / (noise.zeta * f + 2.0 * noise.kappa + 1.0 + 0.5 * noise.delta)


@dataclass(frozen=True)
class StationaryPoint:
    N: float
    gamma0: float
    in_domain: bool


def stationary_points(x: float, gammaT: float, m: int) -> tuple[StationaryPoint, StationaryPoint]:
    """The two interior critical points of :func:`symmetric_f` (saddles where they exist).

    Coordinates are NaN where the expressions leave the reals.
    """
    m = _check_m(m)

    def point(N, g_sq):
        g = math.sqrt(g_sq) if g_sq >= 0 else math.nan
        ok = N > 0 and gammaT < g < 1
        return StationaryPoint(N, g, bool(ok))

    d1 = 1.0 - x * (m - 1)
    s1_N = x / d1 if d1 != 0 else math.nan
    s1_g = gammaT * x / (x + 1.0)
    s2_N = x / (m * (1.0 + x * (m - 1))) if 1.0 + x * (m - 1) != 0 else math.nan
    s2_g = gammaT * (1.0 + m * x) / (m * x) if x != 0 else math.nan
    return point(s1_N, s1_g), point(s2_N, s2_g)


def fidelity_a(noise: NoiseParams, m: int) -> float:
    mu, nu, delta, gT = noise.mu, noise.nu, noise.delta, noise.gamma_total
    return 2.0 * m / (-2.0 - 4.0 * nu + m * (delta + 2.0 * (2.0 + mu + nu + (nu - mu) * gT)))


def fidelity_b(noise: NoiseParams, m: int) -> float:
    mu, nu, delta, gT = noise.mu, noise.nu, noise.delta, noise.gamma_total
    return 2.0 / (delta + 2.0 * (2.0 + mu + nu) - 2.0 * (1.0 + mu + nu) * gT)


def fidelity_c(noise: NoiseParams, m: int) -> float:
    mu, nu, delta, gT = noise.mu, noise.nu, noise.delta, noise.gamma_total
    return 1.0 / (2.0 + 0.5 * delta + 2.0 * mu - math.sqrt(gT / m) * (1.0 + mu + nu + m * (mu - nu)))


def _candidate(regime: Regime, noise: NoiseParams, m: int) -> OptimizationResult:
    tau_t, gT = noise.tau_total, noise.gamma_total
    if regime is Regime.SHORT_TIME:
        return OptimizationResult(tau_t, tau_t, 1.0 / (m * (m * gT - 1.0)), fidelity_a(noise, m), regime, "a")
    if regime in (Regime.NEGATIVE_X, Regime.MIDRANGE_X_DIVERGENT):
        return OptimizationResult(tau_t, 0.5 * (tau_t + math.log(m)), math.inf, fidelity_c(noise, m), regime, "c")
    gap = 1.0 - m * gT
    n_opt = gT / gap if gap > 0 else math.inf
    return OptimizationResult(tau_t, tau_t, n_opt, fidelity_b(noise, m), regime, "b")


def optimize_symmetric_closed(noise: NoiseParams, m: int) -> OptimizationResult:
    """Select the optimal regime from ``(x, tau_T, m)`` and evaluate its closed form.

    Boundaries in ``tau_T`` are half-open (short-time strictly below ``ln m``);
    at the exact ``x`` boundaries both neighbouring forms are evaluated and the
    larger fidelity wins.
    """
    m = _check_m(m)
    x, tau_t = noise.x, noise.tau_total
    if tau_t < math.log(m):
        return _candidate(Regime.SHORT_TIME, noise, m)
    edge = 1.0 / (m - 1)
    candidates = []
    if x <= 0:
        candidates.append(Regime.NEGATIVE_X)
    if 0 <= x <= edge:
        tau_switch = math.inf if x == 0 else math.log((1.0 + x) ** 2 / (m * x * x))
        candidates.append(Regime.MIDRANGE_X_DIVERGENT if tau_t < tau_switch else Regime.MIDRANGE_X_FINITE)
    if x >= edge:
        candidates.append(Regime.LARGE_X_FINITE)
    results = [_candidate(r, noise, m) for r in candidates]
    return max(results, key=lambda r: r.F_max)


def _best_on_edge(fn, log_lo, log_hi, n=64):
    """Maximise ``fn(log N)`` on an interval: coarse scan, then bounded Brent."""
    grid = np.linspace(log_lo, log_hi, n)
    vals = np.array([fn(t) for t in grid])
    i = int(np.argmax(vals))
    a, c = grid[max(i - 1, 0)], grid[min(i + 1, n - 1)]
    res = scipy.optimize.minimize_scalar(lambda t: -fn(t), bounds=(a, c), method="bounded",
                                         options={"xatol": 1e-12})
    if -res.fun >= vals[i]:
        return float(res.x), float(-res.fun)
    return float(grid[i]), float(vals[i])


def optimize_symmetric_numeric(noise: NoiseParams, m: int, grid: int = 64, refine: bool = True,
                               n_min: float = 1e-8, n_cap: float = N_CAP) -> OptimizationResult:
    """Numerically maximise the symmetric fidelity over ``N`` and ``gamma_0``.

    A ``log N x gamma_0`` grid seeds a bounded Nelder-Mead refinement, and
    both ``gamma_0`` edges are searched separately.  When the best fidelity
    sits at ``N_cap`` and still increases there, the optimum is reported as
    divergent: ``F_max`` is extrapolated from the profile
    ``g(N) = max_gamma0 F`` by Richardson's rule ``2 g(2N) - g(N)``.
    """
    m = _check_m(m)
    if grid < 32:
        raise InvalidArgumentError(f"grid must be >= 32 per axis, got {grid}")
    gT = noise.gamma_total
    log_lo, log_hi = math.log(n_min), math.log(n_cap)

    def fid(log_n, g0):
        g0 = min(1.0, max(gT, g0))
        return symmetric_fidelity(math.exp(log_n), g0, noise, m)

    log_ns = np.linspace(log_lo, log_hi, grid)
    g0s = np.linspace(gT, 1.0, grid)
    table = np.array([[fid(t, g) for g in g0s] for t in log_ns])
    i, j = np.unravel_index(int(np.argmax(table)), table.shape)
    best = (float(table[i, j]), float(log_ns[i]), float(g0s[j]))

    if refine:
        span = max(1.0 - gT, 1e-12)
        res = scipy.optimize.minimize(
            lambda v: -fid(v[0], gT + span * v[1]),
            x0=[best[1], (best[2] - gT) / span],
            method="Nelder-Mead",
            bounds=[(log_lo, log_hi), (0.0, 1.0)],
            options={"xatol": 1e-9, "fatol": 1e-15, "maxiter": 20000, "maxfev": 40000},
        )
        if -res.fun > best[0]:
            best = (float(-res.fun), float(res.x[0]), gT + span * float(res.x[1]))
        for g_edge in (gT, 1.0):
            t, v = _best_on_edge(lambda t: fid(t, g_edge), log_lo, log_hi)
            if v > best[0]:
                best = (v, t, g_edge)

    def profile(n):
        res = scipy.optimize.minimize_scalar(lambda g: -fid(math.log(n), g), bounds=(gT, 1.0),
                                             method="bounded", options={"xatol": 1e-13})
        return float(-res.fun), float(res.x)

    f_cap, g_cap = profile(n_cap)
    f_half, _ = profile(0.5 * n_cap)
    at_cap = best[1] >= log_hi - 1e-6 or f_cap >= best[0] - 1e-12
    if at_cap and f_cap > f_half:
        f_inf = 2.0 * f_cap - f_half
        return OptimizationResult(noise.tau_total, -math.log(g_cap), math.inf, f_inf)
    f_best, log_n, g0 = best
    return OptimizationResult(noise.tau_total, -math.log(g0), math.exp(log_n), f_best)


@dataclass(frozen=True)
class Baselines:
    """Best fidelities with the source at the sender (``tau_0 = 0``) and at the midpoint."""

    F_tau0_zero: float
    N_tau0_zero: float
    F_midpoint: float
    N_midpoint: float


def baseline_fidelities(noise: NoiseParams, m: int) -> Baselines:
    m = _check_m(m)
    mu, nu, delta, tau_t = noise.mu, noise.nu, noise.delta, noise.tau_total
    f_zero = 2.0 * m / (m * (delta + 2.0 * (2.0 + mu + nu))
                        - 2.0 * math.exp(-tau_t) * (1.0 + m * (mu - nu) + 2.0 * nu))
    f_mid = 2.0 * m / (m * (4.0 + delta + 4.0 * mu)
                       - 2.0 * math.exp(-0.5 * tau_t) * (1.0 + 2.0 * nu + 2.0 * m * (mu - nu)))
    return Baselines(f_zero, 1.0 / (m * (m * math.exp(tau_t) - 1.0)), f_mid, 1.0 / (m * (m - 1.0)))
