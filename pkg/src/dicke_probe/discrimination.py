"""Binary discrimination between D = 0 and D = D_TRK ground states."""

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import erf, erfc

from . import fock
from .errors import CutoffError, ValidationError
from .estimation import reduced_state_params
from .model import ModelParams, closed_form_covariance, d_trk, ground_state_covariance, require_stable


@dataclass
class DiscriminationReport:
    lam: float
    p_e: float
    p_e_a: float
    p_e_hd: float
    p_e_pc: float
    n_t: int
    cutoff: int

    def as_dict(self):
        return asdict(self)


def hypotheses(omega_a, omega_b, lam):
    """Parameter pair (D = 0, D = D_TRK) at a common coupling."""
    p0 = ModelParams(omega_a, omega_b, lam, 0.0)
    return p0, p0.with_d(d_trk(p0))


def _check_pair(p0, p1):
    require_stable(p0)
    require_stable(p1)
    if (p0.omega_a, p0.omega_b, p0.lam) != (p1.omega_a, p1.omega_b, p1.lam):
        raise ValidationError("hypotheses must share omega_a, omega_b and lambda")


def helstrom_two_mode(p0, p1):
    """Minimum error probability for the two pure two-mode ground states.

    ``P = (1 - sqrt(1 - F^2))/2`` with ``F^2 = det(sigma0 + sigma1)^(-1/2)``.
    """
    _check_pair(p0, p1)
    _, logdet = np.linalg.slogdet(ground_state_covariance(p0) + ground_state_covariance(p1))
    infidelity = -np.expm1(-0.5 * logdet)
    return float(0.5 * (1 - np.sqrt(max(infidelity, 0.0))))


def _reduced_pair(p0, p1, cutoff):
    s0, s1 = reduced_state_params(p0), reduced_state_params(p1)
    if cutoff is None:
        cutoff = fock.auto_cutoff([(s0.n_thermal, s0.r), (s1.n_thermal, s1.r)])
    rho0 = fock.squeezed_thermal_fock(s0.n_thermal, s0.r, cutoff)
    rho1 = fock.squeezed_thermal_fock(s1.n_thermal, s1.r, cutoff)
    return rho0, rho1


def helstrom_single_mode(p0, p1, cutoff=None, rtol=1e-6, full_output=False):
    """Helstrom error for the reduced photonic states, certified by cutoff doubling."""
    _check_pair(p0, p1)
    rho0, rho1 = _reduced_pair(p0, p1, cutoff)
    value = 0.5 * (1 - fock.trace_distance(rho0, rho1))
    cutoff = rho0.cutoff
    doubled = min(2 * cutoff, fock.max_cutoff())
    if doubled > cutoff:
        check = 0.5 * (1 - fock.trace_distance(*_reduced_pair(p0, p1, doubled)))
        if abs(check - value) > rtol * max(abs(check), 1e-300):
            raise CutoffError("single-mode Helstrom bound not converged in cutoff", suggested_cutoff=2 * doubled)
    return (value, cutoff) if full_output else value


THRESHOLD_RULES = ("std", "variance")


def default_threshold(var1, rule="std"):
    """Acceptance window half-width built from the TRK-hypothesis x-variance.

    ``"std"`` takes two standard deviations, ``2 sqrt(var1)``; ``"variance"``
    takes the number ``2 var1`` itself.
    """
    if rule == "std":
        return 2 * np.sqrt(var1)
    if rule == "variance":
        return 2 * var1
    raise ValueError(f"unknown threshold rule {rule!r}; expected one of {THRESHOLD_RULES}")


def homodyne_threshold_error_from(var0, var1, threshold=None, rule="std"):
    """Error of deciding hypothesis 1 when ``|x| < threshold``.

    Each term integrates a zero-mean normal density of the given variance over a
    half-line, which folds in the equal prior weights.
    """
    t = default_threshold(var1, rule) if threshold is None else threshold
    wrong_given_0 = 0.5 * erf(t / np.sqrt(2 * var0))
    wrong_given_1 = 0.5 * erfc(t / np.sqrt(2 * var1))
    return float(wrong_given_0 + wrong_given_1)


def homodyne_threshold_error(p0, p1, threshold=None, rule="std"):
    _check_pair(p0, p1)
    v0, v1 = closed_form_covariance(p0)[0, 0], closed_form_covariance(p1)[0, 0]
    return homodyne_threshold_error_from(v0, v1, threshold, rule)


def optimal_homodyne_threshold(p0, p1):
    """Threshold minimizing the homodyne error (not part of the headline scheme)."""
    _check_pair(p0, p1)
    v0, v1 = closed_form_covariance(p0)[0, 0], closed_form_covariance(p1)[0, 0]
    res = minimize_scalar(
        lambda t: homodyne_threshold_error_from(v0, v1, t), bounds=(0.0, 20 * np.sqrt(max(v0, v1))), method="bounded"
    )
    return float(res.x), float(res.fun)


def _pc_distributions(p0, p1, cutoff):
    s0, s1 = reduced_state_params(p0), reduced_state_params(p1)
    if cutoff is None:
        cutoff = fock.auto_cutoff([(s0.n_thermal, s0.r), (s1.n_thermal, s1.r)])
    dist0, _ = fock.squeezed_thermal_distribution(s0.n_thermal, s0.r, cutoff)
    dist1, _ = fock.squeezed_thermal_distribution(s1.n_thermal, s1.r, cutoff)
    return dist0, dist1


def _pc_error_curve(dist0, dist1):
    # index n_T: outcomes n <= n_T are assigned to hypothesis 1 (TRK)
    return 0.5 * (np.cumsum(dist0) + 1 - np.cumsum(dist1))


def photon_counting_threshold_error(p0, p1, n_t=0, cutoff=None):
    _check_pair(p0, p1)
    dist0, dist1 = _pc_distributions(p0, p1, cutoff)
    if not 0 <= n_t < len(dist0):
        raise ValueError(f"threshold {n_t} outside [0, {len(dist0) - 1}]")
    return float(_pc_error_curve(dist0, dist1)[n_t])


def optimal_pc_threshold(p0, p1, cutoff=None):
    """Threshold ``n_T`` minimizing the photon-counting error, scanned over the cutoff."""
    _check_pair(p0, p1)
    curve = _pc_error_curve(*_pc_distributions(p0, p1, cutoff))
    return int(np.argmin(curve))


def critical_exponent_fit(points, lam_crit):
    """Least-squares slope of ``log P`` against ``log(lam_crit - lam)``.

    Returns ``(exponent, rms_residual)``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or len(pts) < 5:
        raise ValueError("need at least 5 (lambda, P) points for an exponent fit")
    x = np.log(lam_crit - pts[:, 0])
    y = np.log(pts[:, 1])
    coef, res, *_ = np.polyfit(x, y, 1, full=True)
    rms = float(np.sqrt(res[0] / len(x))) if len(res) else 0.0
    return float(coef[0]), rms


def discrimination_report(omega_a, omega_b, lam, cutoff=None, rule="std"):
    p0, p1 = hypotheses(omega_a, omega_b, float(lam))
    p_e_a, used = helstrom_single_mode(p0, p1, cutoff, full_output=True)
    n_t = optimal_pc_threshold(p0, p1, used)
    return DiscriminationReport(
        lam=p0.lam,
        p_e=helstrom_two_mode(p0, p1),
        p_e_a=p_e_a,
        p_e_hd=homodyne_threshold_error(p0, p1, rule=rule),
        p_e_pc=photon_counting_threshold_error(p0, p1, n_t, used),
        n_t=n_t,
        cutoff=used,
    )
