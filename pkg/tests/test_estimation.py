import warnings

import numpy as np
import pytest

from dicke_probe import estimation as est
from dicke_probe.errors import CutoffError, InstabilityError
from dicke_probe.fock import two_mode_ground_fock
from dicke_probe.model import ModelParams, closed_form_covariance, covariance_derivative, ground_state_covariance


def test_uncoupled_qfi_is_squeezing_qfi():
    for d in (0.0, 0.2, 1.0):
        p = ModelParams(1.0, 1.0, 0.0, d)
        expected = 2 / (4 * d + 1) ** 2
        assert est.qfi_two_mode(p) == pytest.approx(expected, rel=1e-12)
        assert est.qfi_single_mode(p) == pytest.approx(expected, rel=1e-12)
        assert est.homodyne_fi(p) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("params", [(1.0, 1.0, 0.3, 0.0), (0.7, 1.6, 0.5, 0.2), (2.0, 0.5, 0.1, 0.01)])
def test_qfi_routes_agree(params):
    p = ModelParams(*params)
    h = est.qfi_two_mode(p)
    assert est.qfi_two_mode_closed_form(p) == pytest.approx(h, rel=1e-10)
    assert est.qfi_two_mode_pure_contraction(covariance_derivative(p)) == pytest.approx(h, rel=1e-12)
    assert est.qfi_fidelity_oracle(p) == pytest.approx(h, rel=1e-6)


def test_single_mode_qfi_forms_agree_and_match_bures_oracle():
    p = ModelParams(1.0, 1.2, 0.4, 0.05)
    sigma_a, dsigma_a = est.reduced_covariance_and_derivative(p)
    h_a = est.qfi_single_mode_from(sigma_a, dsigma_a)
    assert est.qfi_single_mode_unsimplified(sigma_a, dsigma_a) == pytest.approx(h_a, rel=1e-10)
    oracle = est.qfi_fidelity_oracle_mixed(lambda d: closed_form_covariance(p.with_d(d))[:2, :2], p.d, 1e-3)
    assert oracle == pytest.approx(h_a, rel=1e-5)


def test_reduced_state_parameters_reproduce_covariance():
    p = ModelParams(1.0, 0.8, 0.35, 0.0)
    stp = est.reduced_state_params(p)
    assert np.allclose(stp.covariance(), ground_state_covariance(p)[:2, :2], atol=1e-12)
    back = est.SqueezedThermalParams.from_covariance(stp.covariance())
    assert back.n_thermal == pytest.approx(stp.n_thermal) and back.r == pytest.approx(stp.r)
    # without a diamagnetic term the coupling stretches the x quadrature
    assert stp.r > 0


def test_homodyne_prefers_x_quadrature():
    p = ModelParams(1.0, 1.0, 0.3, 0.09)
    assert est.optimal_homodyne_angle(p) == 0.0
    assert est.homodyne_fi(p, 0.0) >= est.homodyne_fi(p, np.pi / 2)
    assert est.optimal_homodyne_angle(ModelParams(1.0, 1.0, 0.0, 0.0)) == 0.0


def test_photon_counting_saturates_for_squeezed_vacuum():
    # uncoupled mode a is squeezed vacuum; number statistics carry the full QFI
    for d in (0.0, 0.1, 0.5):
        p = ModelParams(1.0, 1.0, 0.0, d)
        assert est.photon_counting_fi(p) == pytest.approx(2 / (4 * d + 1) ** 2, rel=1e-6)


def test_photon_counting_family_on_squeezing_parameter():
    res = est.photon_counting_fi_family(lambda r: est.SqueezedThermalParams(0.0, r), 0.4, 1.0, 1.0)
    assert res.converged
    assert res.value == pytest.approx(2.0, rel=1e-7)


def test_photon_counting_against_two_mode_fock_route():
    p = ModelParams(1.0, 1.0, 0.05, 0.0)
    h = 1e-4

    def dist(d):
        amps = two_mode_ground_fock(p.with_d(d), cutoff=14).amplitudes
        return (amps**2).sum(axis=1)

    lo, mid, hi = dist(-h), dist(0.0), dist(h)
    keep = mid > 1e-13
    fd = np.sum(((hi - lo)[keep] / (2 * h)) ** 2 / mid[keep])
    assert est.photon_counting_fi(p) == pytest.approx(fd, rel=1e-4)


def test_photon_counting_small_coupling_limit_is_four_thirds():
    # thermal and squeezing populations are both O(lambda^4), so the limit is not the lambda=0 value
    assert est.photon_counting_fi(ModelParams(1.0, 1.0, 1e-3, 0.0)) == pytest.approx(4 / 3, rel=1e-4)


def test_photon_counting_given_cutoff_too_small():
    with pytest.raises(CutoffError):
        est.photon_counting_fi(ModelParams(1.0, 1.0, 0.45, 0.0), cutoff=4)


def test_unstable_point_raises():
    with pytest.raises(InstabilityError):
        est.estimation_report(ModelParams(1.0, 1.0, 0.6, 0.0))


def test_report_fields_and_chain():
    rep = est.estimation_report(ModelParams(1.0, 1.0, 0.3, 0.0))
    assert rep.f_homodyne <= rep.h_single_mode <= rep.h_two_mode
    assert rep.f_photon_counting <= rep.h_single_mode
    d = rep.as_dict()
    assert d["ratio_hd"] == pytest.approx(rep.f_homodyne / rep.h_two_mode)
    assert d["diagnostics"]["pc_converged"]
    assert est.estimation_report(ModelParams(1.0, 1.0, 0.3, 0.0), photon_counting=False).ratio_pc is None


def test_reference_limits_and_regime_warning():
    p = ModelParams(1.0, 1.0, 0.3, 0.09)
    assert est.reference_limits(p, "trk") == pytest.approx(est.qfi_two_mode(p), rel=1e-12)
    with pytest.warns(est.RegimeWarning):
        est.reference_limits(p, "divergence_d")
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        est.reference_limits(ModelParams(1.0, 1.0, 0.01, 0.0), "small_lambda")
    with pytest.raises(ValueError):
        est.reference_limits(p, "nope")


def test_trk_qfi_large_coupling_limit():
    # large lambda at D_TRK: H tends back to the uncoupled value 2/wa^2
    p = ModelParams(1.0, 1.0, 200.0, 200.0**2)
    assert est.qfi_two_mode(p) == pytest.approx(2.0, rel=1e-4)


def test_loss_removes_information_but_not_homodyne_efficiency():
    p = ModelParams(1.0, 1.0, 0.2, 0.04)
    h0, f0 = est.lossy_single_mode(p, 0.0)
    assert h0 == pytest.approx(est.qfi_single_mode(p))
    assert f0 == pytest.approx(est.homodyne_fi(p))
    assert est.lossy_single_mode(p, 1.0) == (0.0, 0.0)
