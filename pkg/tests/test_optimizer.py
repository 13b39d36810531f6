import math

import numpy as np
import pytest
import scipy.optimize

from cvtc.channels import NoiseParams
from cvtc.errors import InfeasibleError, InvalidArgumentError
from cvtc.optimizer import (
    Regime,
    baseline_fidelities,
    f1_max_tradeoff_m3,
    n1_given_N0,
    n1_min_closed,
    n1_min_numeric,
    optimize_symmetric_closed,
    optimize_symmetric_numeric,
    ratio_constrained_fixed_point,
    ratio_constrained_n1,
    stationary_points,
    support_for_noises,
    symmetric_f,
    symmetric_fidelity,
    tradeoff_m2,
)
from cvtc.states import build_cm
from cvtc.telecloning import run_protocol


def test_support_for_noises_round_trip():
    spec = support_for_noises(2.0, [0.5, 0.8])
    fids = run_protocol(build_cm(spec)).fidelities
    assert fids[1] == pytest.approx(1 / 1.5, abs=1e-12)
    assert fids[2] == pytest.approx(1 / 1.8, abs=1e-12)
    assert fids[0] == pytest.approx(1 / (1 + n1_given_N0(2.0, [0.5, 0.8])), abs=1e-12)
    with pytest.raises(InfeasibleError):
        support_for_noises(0.1, [0.01, 0.01])
    with pytest.raises(InfeasibleError):
        support_for_noises(0.5, [2.0])


def test_closed_and_numeric_trade_off_agree(rng):
    checked = 0
    while checked < 25:
        m = int(rng.integers(2, 6))
        n_js = list(rng.uniform(0.3, 3.0, m - 1))
        res = n1_min_closed(n_js, strict=False)
        if not res.feasible or not res.attainable:
            continue
        n1, N0 = n1_min_numeric(n_js)
        assert n1 == pytest.approx(res.n1_min, abs=1e-9)
        assert N0 == pytest.approx(res.N0_opt, abs=1e-5)
        checked += 1


def test_unattainable_optimum_is_a_lower_bound():
    # optimum would need N0 < n_j - 1, so the true minimum is larger
    n_js = [0.3, 3.0, 3.0]
    res = n1_min_closed(n_js)
    assert not res.attainable
    n1, _ = n1_min_numeric(n_js)
    assert n1 > res.n1_min


def test_degenerate_feasible_set():
    # n_j = 1/2 twice: single feasible N0
    res = n1_min_closed([0.5, 0.5])
    assert res.n1_min == pytest.approx(2.0, abs=1e-12)
    assert res.attainable
    n1, N0 = n1_min_numeric([0.5, 0.5])
    assert n1 == pytest.approx(2.0, abs=1e-5)


def test_infeasible_requests():
    with pytest.raises(InfeasibleError):
        n1_min_closed([0.1, 0.1])
    res = n1_min_closed([0.1, 0.1], strict=False)
    assert not res.feasible and math.isnan(res.n1_min)
    with pytest.raises(InvalidArgumentError):
        n1_min_closed([0.5], m=3)
    with pytest.raises(InvalidArgumentError):
        n1_min_closed([])


def test_m2_branch_matches_tradeoff():
    for f2 in (0.55, 2 / 3, 0.9):
        res = n1_min_closed([1 / f2 - 1])
        assert res.F1_max == pytest.approx(tradeoff_m2(f2), abs=1e-12)
    assert tradeoff_m2(2 / 3) == pytest.approx(2 / 3)
    assert tradeoff_m2(1.0) == 0.0


def test_m3_support_delivers_requested_fidelities():
    for f2, f3 in ((0.7, 0.6), (0.62, 0.66), (2 / 3, 2 / 3)):
        f1, spec = f1_max_tradeoff_m3(f2, f3)
        fids = run_protocol(build_cm(spec)).fidelities
        assert fids == pytest.approx([f1, f2, f3], abs=1e-9)
    with pytest.raises(InfeasibleError):
        f1_max_tradeoff_m3(0.95, 0.95)


def test_ratio_formula():
    for m in (2, 3, 6):
        assert ratio_constrained_n1([1.0] * (m - 1)) == pytest.approx((m - 1) / m)
    q = [1.5, 2.0]
    assert ratio_constrained_fixed_point(q) == pytest.approx(ratio_constrained_n1(q), abs=1e-8)
    with pytest.raises(InvalidArgumentError):
        ratio_constrained_n1([0.5])
    with pytest.raises(InfeasibleError):
        ratio_constrained_n1([1.0, 100.0])


def test_symmetric_f_domain():
    with pytest.raises(InvalidArgumentError):
        symmetric_f(0.1, 0.2, 0.0, 0.5, 2)
    with pytest.raises(InvalidArgumentError):
        symmetric_f(-1.0, 1.0, 0.0, 0.5, 2)
    with pytest.raises(InvalidArgumentError):
        symmetric_f(0.1, 1.0, 0.0, 0.5, 1)


def test_symmetric_fidelity_matches_ideal_optimum():
    noise = NoiseParams()
    for m in (2, 4):
        assert symmetric_fidelity(1 / (m * (m - 1)), 1.0, noise, m) == pytest.approx(m / (2 * m - 1))


def test_stationary_points_are_critical():
    x, gT, m = 0.05, 0.2, 3
    for p in stationary_points(x, gT, m):
        if not p.in_domain:
            continue
        grad = scipy.optimize.approx_fprime([p.N, p.gamma0], lambda v: symmetric_f(v[0], v[1], x, gT, m), 1e-8)
        assert np.allclose(grad, 0.0, atol=1e-5)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_baselines_are_one_dimensional_optima(m):
    noise = NoiseParams(nu=0.01, mu=0.03, delta=0.02, tauc=1.5)
    base = baseline_fidelities(noise, m)
    gT = noise.gamma_total

    def best(g0):
        res = scipy.optimize.minimize_scalar(lambda t: -symmetric_fidelity(math.exp(t), g0, noise, m),
                                             bounds=(-20, 10), method="bounded", options={"xatol": 1e-12})
        return -res.fun, math.exp(res.x)

    f_zero, n_zero = best(1.0)
    assert base.F_tau0_zero == pytest.approx(f_zero, abs=1e-9)
    assert base.N_tau0_zero == pytest.approx(n_zero, rel=1e-4)
    assert base.F_midpoint == pytest.approx(best(math.sqrt(gT))[0], abs=1e-9)
    assert optimize_symmetric_closed(noise, m).F_max >= max(base.F_tau0_zero, base.F_midpoint) - 1e-12


def test_short_time_places_source_at_receivers():
    noise = NoiseParams(mu=0.05, nu=0.2, delta=0.05, tauc=0.3)
    res = optimize_symmetric_closed(noise, 3)
    assert res.regime is Regime.SHORT_TIME
    assert res.tau0_opt == pytest.approx(noise.tau_total)


def test_divergent_regime_numeric_reports_infinite_photons():
    m = 2
    noise = NoiseParams(mu=0.05, nu=0.2, delta=0.05, tauc=math.log(m) + 1.0)
    closed = optimize_symmetric_closed(noise, m)
    assert closed.divergent and closed.regime is Regime.NEGATIVE_X
    numeric = optimize_symmetric_numeric(noise, m)
    assert numeric.divergent
    assert numeric.F_max == pytest.approx(closed.F_max, abs=1e-6)
    assert numeric.tau0_opt == pytest.approx(closed.tau0_opt, abs=1e-2)


def test_numeric_never_beats_closed(rng):
    for _ in range(8):
        m = int(rng.integers(2, 6))
        noise = NoiseParams(nu=rng.uniform(0, 0.3), mu=rng.uniform(0, 1), delta=rng.uniform(0, 0.2),
                            tauc=rng.uniform(0.05, 4.0))
        closed = optimize_symmetric_closed(noise, m)
        numeric = optimize_symmetric_numeric(noise, m)
        assert numeric.F_max <= closed.F_max + 1e-6
        assert numeric.F_max == pytest.approx(closed.F_max, abs=1e-6)


def test_classical_bound_below_form_b():
    noise = NoiseParams(mu=1.5, delta=0.1, tauc=3.0)
    res = optimize_symmetric_closed(noise, 3)
    assert res.closed_form == "b"
    assert res.F_max < 0.5
