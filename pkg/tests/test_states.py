import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtc.errors import InvalidArgumentError, TruncationError
from cvtc.gaussian import symplectic_form
from cvtc.states import (
    SupportSpec,
    build_cm,
    cm_from_fock,
    cm_from_state_vector,
    fock_coefficients,
    thermal_cm_of_support,
)

photons = st.lists(st.floats(0.0, 4.0), min_size=1, max_size=5)


def test_spec_validation():
    with pytest.raises(InvalidArgumentError):
        SupportSpec(())
    with pytest.raises(InvalidArgumentError):
        SupportSpec((1.0, -0.5))
    with pytest.raises(InvalidArgumentError):
        SupportSpec.optimal_symmetric(1)
    spec = SupportSpec((0.2, 0.7, 1.1))
    assert spec.m == 3
    assert spec.n0 == pytest.approx(2.0)
    assert spec.swapped(1, 3).photon_numbers == (1.1, 0.7, 0.2)


def test_twin_beam_blocks():
    sigma = build_cm(SupportSpec((2.0,))).matrix
    s = math.sqrt(2.0 * 3.0)
    assert np.allclose(sigma, [[2.5, 0, s, 0], [0, 2.5, 0, -s], [s, 0, 2.5, 0], [0, -s, 0, 2.5]])


@settings(max_examples=60, deadline=None)
@given(photons)
def test_support_is_pure(ns):
    cm = build_cm(SupportSpec(tuple(ns)))
    assert cm.purity() == pytest.approx(1.0, rel=1e-9)
    assert cm.min_uncertainty_eigenvalue() > -1e-9 * (1 + sum(ns))


@settings(max_examples=30, deadline=None)
@given(photons)
def test_support_is_symplectically_diagonalisable_to_vacuum(ns):
    sigma = build_cm(SupportSpec(tuple(ns))).matrix
    n = sigma.shape[0] // 2
    nu = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    assert np.allclose(nu, 0.5, atol=1e-8 * (1 + sum(ns)))


def test_thermal_scaling():
    spec = SupportSpec((0.4, 0.9))
    assert np.allclose(thermal_cm_of_support(spec, 0.3).matrix, 1.6 * build_cm(spec).matrix)
    with pytest.raises(InvalidArgumentError):
        thermal_cm_of_support(spec, -1.0)


def test_fock_amplitudes_normalise():
    amps = fock_coefficients(SupportSpec((0.3, 0.2)), 40)
    assert amps.deficit < 1e-12
    assert amps.norm == pytest.approx(1.0)
    # a zero photon number forces no photons in that mode
    zero = fock_coefficients(SupportSpec((0.0, 0.4)), 10)
    assert all(k[0] == 0 for k in zero.amplitudes)


def test_fock_oracle_single_mode_support():
    spec = SupportSpec((0.3,))
    sigma = cm_from_fock(fock_coefficients(spec, 30))
    assert np.max(np.abs(sigma.matrix - build_cm(spec).matrix)) < 1e-9


def test_fock_truncation_error():
    with pytest.raises(TruncationError) as info:
        cm_from_fock(fock_coefficients(SupportSpec((3.0,)), 5))
    assert info.value.deficit > 1e-6
    with pytest.raises(InvalidArgumentError):
        fock_coefficients(SupportSpec((0.1,)), -1)


def test_state_vector_moments():
    # |1> has <a^dag a> = 1 and no coherence
    sigma = cm_from_state_vector({(1,): 1.0}, 1)
    assert np.allclose(sigma.matrix, 1.5 * np.eye(2))
    # (|0> + |1>)/sqrt2 has <a> = 1/2
    sigma = cm_from_state_vector({(0,): 1.0, (1,): 1.0}, 1)
    assert sigma.matrix[0, 0] == pytest.approx(0.5 + 0.5 - 0.5)
