import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dicke_probe.errors import InstabilityError
from dicke_probe.fock import covariance_from_two_mode, two_mode_ground_fock
from dicke_probe.model import (
    ModelParams,
    closed_form_covariance,
    covariance_derivative,
    covariance_derivative_fd,
    d_crit,
    d_trk,
    dipole_gauge_ground_state,
    dipole_gauge_map,
    ground_energy,
    ground_state_covariance,
    hamiltonian_kernel,
    lambda_crit,
    polariton_frequencies,
    quadratic_ground_state,
    require_stable,
)
from dicke_probe.symplectic import symplectic_eigenvalues


@st.composite
def stable_params(draw):
    wa = draw(st.floats(0.2, 3.0))
    wb = draw(st.floats(0.2, 3.0))
    lam = draw(st.floats(0.0, 1.5))
    p = ModelParams(wa, wb, lam, 0.0)
    d = d_crit(p) + draw(st.floats(0.05, 2.0)) * wa
    return p.with_d(d)


def test_derived_couplings():
    p = ModelParams(1.0, 2.0, 0.6, 0.1)
    assert d_trk(p) == pytest.approx(0.18)
    assert d_crit(p) == pytest.approx(0.18 - 0.25)
    assert lambda_crit(p) == pytest.approx(np.sqrt(2) / 2)
    assert p.margin == pytest.approx(0.1 - d_crit(p))


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams(0.0, 1.0, 0.1, 0.0)
    with pytest.raises(ValueError):
        ModelParams(1.0, 1.0, -0.1, 0.0)


def test_require_stable_reports_threshold():
    p = ModelParams(1.0, 1.0, 0.6, 0.0)
    with pytest.raises(InstabilityError) as info:
        require_stable(p)
    assert info.value.d_crit == pytest.approx(0.36 - 0.25)
    with pytest.raises(InstabilityError):
        ground_state_covariance(p)


def test_uncoupled_polariton_frequencies():
    spec = polariton_frequencies(ModelParams(1.0, 0.5, 0.0, 0.3))
    assert spec.omega_u == pytest.approx(np.sqrt(1.0 * (1.0 + 1.2)))
    assert spec.omega_l == pytest.approx(0.5)


def test_uncoupled_ground_state_is_squeezed_vacuum():
    wa, d = 1.0, 0.3
    sigma = ground_state_covariance(ModelParams(wa, 1.0, 0.0, d))
    s = np.sqrt(wa / (wa + 4 * d))
    assert np.allclose(sigma[:2, :2], 0.5 * np.diag([s, 1 / s]))
    assert np.allclose(sigma[2:, 2:], 0.5 * np.eye(2))


@settings(max_examples=80, deadline=None)
@given(stable_params())
def test_covariance_routes_agree(p):
    sigma = ground_state_covariance(p)
    assert np.allclose(symplectic_eigenvalues(sigma), 0.5, atol=1e-10)
    assert np.allclose(sigma, closed_form_covariance(p), atol=1e-10)
    kernel, freqs = hamiltonian_kernel(p)
    assert np.allclose(sigma, quadratic_ground_state(kernel, freqs), atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(stable_params())
def test_analytic_derivative_matches_finite_differences(p):
    d_an, d_fd = covariance_derivative(p), covariance_derivative_fd(p)
    assert np.allclose(d_an, d_fd, atol=1e-7 * max(1.0, np.abs(d_an).max()))


def test_polariton_frequencies_are_kernel_invariants():
    p = ModelParams(1.3, 0.7, 0.4, 0.05)
    spec = polariton_frequencies(p)
    kernel, freqs = hamiltonian_kernel(p)
    a = np.sqrt(freqs)[:, None] * kernel * np.sqrt(freqs)[None, :]
    assert np.allclose(sorted([spec.omega_l**2, spec.omega_u**2]), np.linalg.eigvalsh(a))


def test_ground_state_against_truncated_fock_diagonalization():
    p = ModelParams(1.0, 0.8, 0.3, 0.05)
    psi = two_mode_ground_fock(p, cutoff=30)
    assert psi.norm_deficit < 1e-12
    assert psi.energy == pytest.approx(ground_energy(p), abs=1e-11)
    assert np.allclose(covariance_from_two_mode(psi), ground_state_covariance(p), atol=1e-10)


def test_dipole_gauge_map_swaps_frequencies():
    p = ModelParams(1.0, 2.0, 0.3, 0.1)
    q = dipole_gauge_map(p)
    assert (q.omega_a, q.omega_b, q.lam, q.d) == (2.0, 1.0, 0.3, 0.1)


def test_dipole_ground_state_is_mode_swap_of_coulomb_state():
    wa, wb, lam, d = 1.0, 2.0, 0.3, 0.1
    sigma, dsigma = dipole_gauge_ground_state(wa, wb, lam, d)
    swapped = dipole_gauge_map(ModelParams(wa, wb, lam, d))
    perm = [2, 3, 0, 1]
    assert np.allclose(sigma[np.ix_(perm, perm)], ground_state_covariance(swapped), atol=1e-12)
    assert np.allclose(dsigma[np.ix_(perm, perm)], covariance_derivative(swapped), atol=1e-12)
