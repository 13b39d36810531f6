import math

import numpy as np
import pytest

from cvtc.channels import evolve
from cvtc.errors import InvalidArgumentError
from cvtc.gaussian import vacuum_cm
from cvtc.separability import (
    Verdict,
    certify_no_threshold,
    check_cubic_factors,
    cubic_factors_lossy,
    cubic_factors_thermal,
    first_crossing,
    lossy_threshold_expression,
    lossy_threshold_mode0,
    lossy_threshold_mode1,
    lossy_threshold_numeric,
    ppt_report,
    thermal_threshold_closed,
    thermal_threshold_numeric,
    tripartite_report,
)
from cvtc.states import SupportSpec, build_cm, thermal_cm_of_support


def test_verdict_band():
    assert Verdict.from_eigenvalue(-1e-3) is Verdict.INSEPARABLE
    assert Verdict.from_eigenvalue(-1e-12) is Verdict.BOUNDARY
    assert Verdict.from_eigenvalue(1e-12) is Verdict.BOUNDARY
    assert Verdict.from_eigenvalue(1e-3) is Verdict.PPT_POSITIVE


def test_support_is_fully_inseparable():
    rep = tripartite_report(build_cm(SupportSpec((0.4, 1.2))))
    assert rep.fully_inseparable
    assert rep.eigenvalue(0) < 0
    with pytest.raises(KeyError):
        rep.eigenvalue([1, 2])
    with pytest.raises(InvalidArgumentError):
        tripartite_report(vacuum_cm(2))


def test_vacuum_is_boundary():
    rep = ppt_report(vacuum_cm(3))
    assert all(r.verdict is Verdict.BOUNDARY for r in rep.per_bipartition)
    assert not rep.fully_inseparable


def test_first_crossing():
    assert first_crossing(lambda x: x - 3.7, 0.0, 1.0, 100.0) == pytest.approx(3.7, abs=1e-9)
    assert math.isinf(first_crossing(lambda x: -1.0, 0.0, 1.0, 50.0))
    with pytest.raises(InvalidArgumentError):
        first_crossing(lambda x: 1.0, 0.0, 1.0, 10.0)


def test_thermal_threshold_closed_values():
    assert thermal_threshold_closed(1.0) == pytest.approx(1 + math.sqrt(2))
    assert thermal_threshold_closed(0.0) == 0.0


@pytest.mark.parametrize("ns", [(0.3, 0.8), (2.0, 1.0), (4.5, 0.1)])
def test_thermal_threshold_sign_change(ns):
    spec = SupportSpec(ns)
    for mode, nk in enumerate((spec.n0, *ns)):
        nu_star = thermal_threshold_closed(nk)
        below = ppt_report(thermal_cm_of_support(spec, 0.99 * nu_star), [mode]).per_bipartition[0]
        above = ppt_report(thermal_cm_of_support(spec, 1.01 * nu_star), [mode]).per_bipartition[0]
        assert below.verdict is Verdict.INSEPARABLE
        assert above.verdict is Verdict.PPT_POSITIVE
        assert thermal_threshold_numeric(spec, mode) == pytest.approx(nu_star, rel=1e-8)


def test_thermal_q1_factor_matches_spectrum():
    spec = SupportSpec((1.0, 1.0))
    for nu in (0.0, 0.3, 1.0, 2.5):
        check = check_cubic_factors(cubic_factors_thermal(spec, nu), thermal_cm_of_support(spec, nu))
        assert check.factor_consistent[0]


def test_thermal_q2_has_negative_root_without_thermal_noise():
    spec = SupportSpec((0.7, 1.3))
    _, q2 = cubic_factors_thermal(spec, 0.0)
    assert np.min(np.roots(q2).real) < 0


@pytest.mark.xfail(strict=True, reason="closed-form second thermal cubic factor has wrong linear and constant terms")
@pytest.mark.parametrize("nu", [0.3, 1.0])
def test_thermal_q2_factor_reproduces_determinant(nu):
    spec = SupportSpec((1.0, 1.0))
    check = check_cubic_factors(cubic_factors_thermal(spec, nu), thermal_cm_of_support(spec, nu))
    assert check.det_from_roots == pytest.approx(check.det_generic, rel=1e-8)


# at nu = 0 both determinants vanish, so only the roots can tell
@pytest.mark.xfail(strict=True, reason="closed-form second thermal cubic factor has a doubled constant term at nu = 0")
def test_thermal_q2_roots_match_spectrum_without_thermal_noise():
    spec = SupportSpec((0.7, 1.3))
    check = check_cubic_factors(cubic_factors_thermal(spec, 0.0), build_cm(spec))
    assert check.consistent


def test_thermal_q2_mismatch_is_flagged():
    spec = SupportSpec((1.0, 2.0))
    check = check_cubic_factors(cubic_factors_thermal(spec, 0.5), thermal_cm_of_support(spec, 0.5))
    assert check.factor_consistent == (True, False)
    assert not check.consistent


@pytest.mark.xfail(strict=True, reason="closed-form second thermal cubic factor changes sign at the wrong nu")
def test_thermal_q2_constant_term_flips_at_threshold():
    spec = SupportSpec((1.0, 1.0))
    nu_star = thermal_threshold_closed(1.0)
    _, below = cubic_factors_thermal(spec, 0.99 * nu_star)
    _, above = cubic_factors_thermal(spec, 1.01 * nu_star)
    assert -below[-1] < 0 < -above[-1]


@pytest.mark.parametrize("t", [0.0, 0.2, 1.0, 3.0])
def test_lossy_factors_match_spectrum(t):
    spec = SupportSpec((0.6, 1.4))
    check = check_cubic_factors(cubic_factors_lossy(spec, t), evolve(build_cm(spec), t, 0.0))
    assert check.consistent
    assert check.max_root_mismatch < 1e-8


def test_cubic_factors_need_two_clones():
    with pytest.raises(InvalidArgumentError):
        cubic_factors_lossy(SupportSpec((1.0,)), 0.1)


def test_lossy_threshold_mode0_closed_value():
    n_tot, mu = 4.0, 0.5
    t = lossy_threshold_mode0(n_tot, mu)
    assert t == pytest.approx(math.log1p((math.sqrt(6.0) - 2.0) / 0.5))
    assert lossy_threshold_mode0(n_tot, mu, gamma=2.0) == pytest.approx(t / 2)
    with pytest.raises(InvalidArgumentError):
        lossy_threshold_mode0(1.0, 0.1, gamma=0.0)


def test_lossy_expression_sign_brackets_threshold():
    spec = SupportSpec((1.0, 2.0))
    for mode in (1, 2):
        t = lossy_threshold_mode1(spec, 0.4, mode=mode)
        assert lossy_threshold_expression(0.99 * t, spec, 0.4, mode=mode) < 0
        assert lossy_threshold_expression(1.01 * t, spec, 0.4, mode=mode) > 0


def test_lossy_thresholds_scale_with_rate():
    spec = SupportSpec((0.8, 0.3))
    t1 = lossy_threshold_mode1(spec, 0.2)
    assert lossy_threshold_mode1(spec, 0.2, gamma=4.0) == pytest.approx(t1 / 4, rel=1e-8)
    assert lossy_threshold_numeric(spec, 1, 0.2, gamma=4.0) == pytest.approx(t1 / 4, rel=1e-6)


def test_mode0_separates_last_with_equal_photons():
    spec = SupportSpec((1.0, 1.0))
    mu = 0.5
    t0 = lossy_threshold_mode0(2 * spec.n0, mu)
    t1 = lossy_threshold_mode1(spec, mu, mode=1)
    t2 = lossy_threshold_mode1(spec, mu, mode=2)
    assert t1 == pytest.approx(t2)
    assert t1 < t0


def test_zero_channel_noise_never_separates():
    spec = SupportSpec((0.5, 2.0))
    for mode in (1, 2):
        assert math.isinf(lossy_threshold_mode1(spec, 0.0, mode=mode))
    assert certify_no_threshold(spec, 0, 0.0, t_max=20.0)
    assert not certify_no_threshold(spec, 1, 1.0, t_max=20.0)


def test_empty_clone_mode_is_separable_from_start():
    spec = SupportSpec((0.0, 1.0))
    assert lossy_threshold_mode1(spec, 0.3, mode=1) == 0.0
    assert lossy_threshold_numeric(spec, 1, 0.3) == 0.0
