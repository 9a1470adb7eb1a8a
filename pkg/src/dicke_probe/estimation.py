"""Quantum and classical Fisher information for the diamagnetic coupling D."""

import logging
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fock
from .errors import CutoffError
from .model import (
    _invariants,
    closed_form_covariance,
    covariance_derivative,
    ground_state_covariance,
    lambda_crit,
    require_stable,
)
from .symplectic import (
    gaussian_fidelity,
    partial_trace_to_mode_a,
    pure_loss_channel,
    stein_solve,
    symplectic_form,
)

log = logging.getLogger(__name__)

#: Below this value of ``16 det(sigma_a)^2 - 1`` the reduced state counts as pure.
PURE_REDUCED_TOL = 1e-10

#: Probabilities below this are dropped from the photon-counting Fisher sum.
PROB_FLOOR = 1e-14


class RegimeWarning(UserWarning):
    """An asymptotic formula was evaluated outside its regime of validity."""


@dataclass(frozen=True)
class SqueezedThermalParams:
    n_thermal: float
    r: float

    def covariance(self):
        nu = self.n_thermal + 0.5
        return np.diag([nu * np.exp(2 * self.r), nu * np.exp(-2 * self.r)])

    @classmethod
    def from_covariance(cls, sigma_a):
        """Invert :meth:`covariance` for a diagonal 2x2 block."""
        s11, s22 = sigma_a[0, 0], sigma_a[1, 1]
        return cls(max(np.sqrt(s11 * s22) - 0.5, 0.0), 0.25 * np.log(s11 / s22))


@dataclass
class EstimationReport:
    h_two_mode: float
    h_single_mode: float
    f_homodyne: float
    f_photon_counting: float = None
    homodyne_angle: float = 0.0
    diagnostics: dict = field(default_factory=dict)

    @property
    def ratio_hd(self):
        return self.f_homodyne / self.h_two_mode

    @property
    def ratio_hd_single(self):
        return self.f_homodyne / self.h_single_mode

    @property
    def ratio_pc(self):
        return None if self.f_photon_counting is None else self.f_photon_counting / self.h_two_mode

    @property
    def ratio_pc_single(self):
        return None if self.f_photon_counting is None else self.f_photon_counting / self.h_single_mode

    def as_dict(self):
        out = asdict(self)
        out.update(
            ratio_hd=self.ratio_hd,
            ratio_hd_single=self.ratio_hd_single,
            ratio_pc=self.ratio_pc,
            ratio_pc_single=self.ratio_pc_single,
        )
        return out


# ---------------------------------------------------------------------------
# two-mode QFI


def qfi_gaussian(sigma, dsigma):
    """``Tr[Om^T dsigma Om Phi]`` with ``Phi`` from the Stein-type equation.

    Pure states take ``Phi = -dsigma``, giving ``-Tr[Om^T dsigma Om dsigma]``.
    """
    om = symplectic_form(sigma.shape[0] // 2)
    phi = stein_solve(sigma, dsigma)
    return float(np.trace(om.T @ dsigma @ om @ phi))


def qfi_two_mode(p):
    require_stable(p)
    return qfi_gaussian(ground_state_covariance(p), covariance_derivative(p))


def qfi_two_mode_pure_contraction(dsigma):
    """Pure-state QFI expanded over the sparsity pattern of the ground state."""
    ds = dsigma
    return float(-2 * (ds[0, 0] * ds[1, 1] + 2 * ds[1, 3] * ds[2, 0] + ds[2, 2] * ds[3, 3]))


def qfi_two_mode_closed_form(p):
    """Explicit polariton-frequency expression for the two-mode QFI."""
    require_stable(p)
    wa, wb, lam, d = p.omega_a, p.omega_b, p.lam, p.d
    _, prod, total = _invariants(p)
    bracket = (
        wb**2
        * (
            16 * d**2 * wa**2
            + 8 * d * wa * (wa**2 + 3 * wb**2 + 2 * prod)
            + wa**4
            + 4 * prod * (wa**2 + wb**2)
            + 6 * wa**2 * wb**2
            + wb**4
        )
        - 8 * lam**2 * wa * wb * (4 * d * wa + wa**2 + 2 * wb**2)
        + 32 * lam**4 * wa**2
    )
    return float(2 * wa**2 * wb**2 / (prod**4 * total**4) * bracket)


def _default_fidelity_step(p):
    return min(1e-3 * max(p.omega_a, p.omega_b), 0.05 * p.margin)


def qfi_fidelity_oracle(p, eps=None):
    """QFI from the Bures expansion ``F(D-h, D+h) = 1 - H h^2/2 + O(h^4)``.

    ``eps`` is the full separation ``2h``; the estimate ``8(1 - F)/eps^2`` is
    Richardson-extrapolated over ``eps`` and ``eps/2``.
    """
    require_stable(p)
    eps = _default_fidelity_step(p) if eps is None else eps

    def estimate(e):
        lo = ground_state_covariance(p.with_d(p.d - e / 2))
        hi = ground_state_covariance(p.with_d(p.d + e / 2))
        _, logdet = np.linalg.slogdet(lo + hi)
        # pure-state fidelity det(lo + hi)^(-1/4); expm1 keeps 1 - F accurate
        one_minus_f = -np.expm1(-0.25 * logdet)
        return 8 * one_minus_f / e**2

    coarse, fine = estimate(eps), estimate(eps / 2)
    return float((4 * fine - coarse) / 3)


def qfi_fidelity_oracle_mixed(sigma_fn, d, eps):
    """Bures-expansion QFI for a family of possibly mixed states ``sigma_fn(D)``."""

    def estimate(e):
        f = gaussian_fidelity(sigma_fn(d - e / 2), sigma_fn(d + e / 2))
        return 8 * (1 - f) / e**2

    return float((4 * estimate(eps / 2) - estimate(eps)) / 3)


# ---------------------------------------------------------------------------
# reduced state of mode a


def reduced_state_params(p):
    """Thermal photon number and squeezing of the reduced photonic state.

    ``r`` follows the convention of :class:`SqueezedThermalParams`, so
    ``r = log(sigma11/sigma22)/4``; this is the negative of the logarithm
    ``log(wL wU (a11 + wL wU) / (wa^2 (wb^2 + wL wU)))/4``.
    """
    require_stable(p)
    wa, wb = p.omega_a, p.omega_b
    a11, prod, total = _invariants(p)
    n_th = 0.5 * (np.sqrt((wb**2 + prod) * (a11 + prod) / (prod * total**2)) - 1)
    r = -0.25 * np.log(prod * (a11 + prod) / (wa**2 * (wb**2 + prod)))
    return SqueezedThermalParams(max(float(n_th), 0.0), float(r))


def qfi_single_mode_from(sigma_a, dsigma_a):
    """QFI of a zero-mean single-mode state with diagonal covariance.

    With ``mu = 4 s11 s22``, ``u = ds11/s11`` and ``v = ds22/s22`` the
    diagonal-Phi solution reads ``mu (mu (u^2 + v^2)/2 + u v)/(mu^2 - 1)``;
    it is evaluated as ``dmu^2/(2(mu^2 - 1)) - mu u v/(mu + 1)`` to avoid
    cancellation near purity. Pure states (``mu^2 - 1`` below
    ``PURE_REDUCED_TOL``) use ``-2 ds11 ds22``.
    """
    s11, s22 = sigma_a[0, 0], sigma_a[1, 1]
    d11, d22 = dsigma_a[0, 0], dsigma_a[1, 1]
    mu = 4 * s11 * s22
    if 16 * s11**2 * s22**2 - 1 < PURE_REDUCED_TOL:
        log.debug("reduced state is pure to %.1e; using the pure-state branch", PURE_REDUCED_TOL)
        return float(-2 * d11 * d22)
    u, v = d11 / s11, d22 / s22
    dmu = 4 * (d11 * s22 + s11 * d22)
    return float(dmu**2 / (2 * (mu - 1) * (mu + 1)) - mu * u * v / (mu + 1))


def qfi_single_mode_unsimplified(sigma_a, dsigma_a):
    """Unsimplified diagonal-Phi QFI, kept as a cross-check."""
    s11, s22 = sigma_a[0, 0], sigma_a[1, 1]
    d11, d22 = dsigma_a[0, 0], dsigma_a[1, 1]
    num = 4 * (2 * s11**2 * d22**2 + 2 * s22**2 * d11**2 + d11 * d22)
    return float(num / (16 * s11**2 * s22**2 - 1))


def reduced_covariance_and_derivative(p):
    require_stable(p)
    return partial_trace_to_mode_a(closed_form_covariance(p)), partial_trace_to_mode_a(covariance_derivative(p))


def qfi_single_mode(p):
    return qfi_single_mode_from(*reduced_covariance_and_derivative(p))


# ---------------------------------------------------------------------------
# homodyne detection


def homodyne_fi_from(sigma_a, dsigma_a, phi=0.0):
    """Fisher information of the quadrature ``x(phi)`` for a zero-mean Gaussian."""
    c2, s2 = np.cos(phi) ** 2, np.sin(phi) ** 2
    var = sigma_a[0, 0] * c2 + sigma_a[1, 1] * s2
    dvar = dsigma_a[0, 0] * c2 + dsigma_a[1, 1] * s2
    return float(dvar**2 / (2 * var**2))


def homodyne_fi(p, phi=0.0):
    return homodyne_fi_from(*reduced_covariance_and_derivative(p), phi)


def optimal_homodyne_angle_from(sigma_a, dsigma_a):
    f0 = homodyne_fi_from(sigma_a, dsigma_a, 0.0)
    f90 = homodyne_fi_from(sigma_a, dsigma_a, np.pi / 2)
    if f0 >= f90 * (1 - 1e-12):
        return 0.0
    log.warning("F(pi/2)=%g exceeds F(0)=%g; using the y quadrature", f90, f0)
    return np.pi / 2


def optimal_homodyne_angle(p):
    """Best quadrature angle among the two extrema 0 and pi/2 (normally 0)."""
    return optimal_homodyne_angle_from(*reduced_covariance_and_derivative(p))


# ---------------------------------------------------------------------------
# photon counting


@dataclass(frozen=True)
class PhotonCountingResult:
    value: float
    cutoff: int
    dstep: float
    refinements: int
    converged: bool


def _pc_fisher(dist_minus, dist_0, dist_plus, h):
    keep = dist_0 > PROB_FLOOR
    dp = (dist_plus[keep] - dist_minus[keep]) / (2 * h)
    regular = np.sum(dp**2 / dist_0[keep])
    # p(n) ~ c (D - D0)^2 at an exact zero contributes its continuous limit 4c
    curvature = (dist_plus[~keep] + dist_minus[~keep] - 2 * dist_0[~keep]) / (2 * h**2)
    return float(regular + 4 * np.clip(curvature, 0.0, None).sum())


def photon_counting_fi_family(
    stp_fn, d, margin, scale, cutoff=None, dstep=None, rtol_step=1e-5, rtol_cutoff=1e-6, max_refine=6
):
    """Photon-counting Fisher information of a family of squeezed thermal states.

    ``stp_fn(D)`` returns :class:`SqueezedThermalParams`. Derivatives of the
    number distribution are central differences; the step starts at
    ``1e-5 * scale`` (clamped to a tenth of the stability ``margin``) and is
    halved until successive estimates agree to ``rtol_step``. The cutoff is
    then doubled once to certify convergence to ``rtol_cutoff``.
    """
    h = 1e-5 * scale if dstep is None else dstep
    h = min(h, 0.1 * margin)

    def dists(h, cut):
        states = [stp_fn(d - h), stp_fn(d), stp_fn(d + h)]
        return [fock.squeezed_thermal_distribution(s.n_thermal, s.r, cut)[0] for s in states]

    states = [stp_fn(d - h), stp_fn(d), stp_fn(d + h)]
    needed = fock.auto_cutoff([(s.n_thermal, s.r) for s in states])
    if cutoff is None:
        cutoff = needed
    elif cutoff < needed:
        raise CutoffError(f"cutoff {cutoff} leaves tail mass above {fock.TAIL_TOL:.0e}", suggested_cutoff=needed)

    value = _pc_fisher(*dists(h, cutoff), h)
    refinements, step_ok = 0, False
    while refinements < max_refine:
        h_new = h / 2
        new = _pc_fisher(*dists(h_new, cutoff), h_new)
        refinements += 1
        agree = abs(new - value) <= rtol_step * max(abs(new), 1e-300)
        h, value = h_new, new
        if agree:
            step_ok = True
            break

    doubled = min(2 * cutoff, fock.max_cutoff())
    cutoff_ok = True
    if doubled > cutoff:
        check = _pc_fisher(*dists(h, doubled), h)
        cutoff_ok = abs(check - value) <= rtol_cutoff * max(abs(check), 1e-300)
        if not cutoff_ok:
            raise CutoffError(
                f"photon-counting FI changed by {abs(check - value) / abs(check):.1e} on doubling the cutoff",
                suggested_cutoff=2 * doubled,
            )
    return PhotonCountingResult(value, cutoff, h, refinements, step_ok and cutoff_ok)


def photon_counting_fi(p, cutoff=None, dstep=None, full_output=False):
    """Fisher information of photon counting on mode a, evaluated in Fock space."""
    require_stable(p)
    res = photon_counting_fi_family(
        lambda d: reduced_state_params(p.with_d(d)),
        p.d,
        p.margin,
        max(p.omega_a, 4 * abs(p.d) + p.omega_a),
        cutoff=cutoff,
        dstep=dstep,
    )
    return res if full_output else res.value


# ---------------------------------------------------------------------------
# asymptotes

LIMITS = (
    "small_lambda",
    "ratio_expansion",
    "trk",
    "trk_minimum_lambda2",
    "divergence_lambda",
    "divergence_d",
    "homodyne_near_crit",
)


def reference_limits(p, which):
    """Closed-form asymptotes of H and F/H. Emits :class:`RegimeWarning` off-regime."""
    wa, wb, lam, d = p.omega_a, p.omega_b, p.lam, p.d
    lc = lambda_crit(p)
    gap = p.margin

    def regime(ok, msg):
        if not ok:
            warnings.warn(f"{which}: {msg}", RegimeWarning, stacklevel=3)

    if which == "small_lambda":
        regime(lam <= 0.1 * min(wa, wb), "lambda is not small")
        return 2 / (4 * d + wa) ** 2
    if which == "ratio_expansion":
        regime(lam <= 0.5 * min(wa, wb), "lambda is not small")
        return 1 - 8 * wa**2 * lam**2 / (wa + wb) ** 4
    if which == "trk":
        regime(abs(d - lam**2 / wb) <= 1e-12 * max(1.0, abs(d)), "D is not the TRK value")
        return 2 / wa**2 - 16 * lam**2 * wa * wb / (4 * lam**2 * wa + wb * (wa + wb) ** 2) ** 2
    if which == "trk_minimum_lambda2":
        return wb * (wa + wb) ** 2 / (4 * wa)
    if which == "divergence_lambda":
        regime(d == 0 and 0 < lc - lam <= 1e-2 * lc, "not near the critical coupling at D=0")
        return wb / (8 * wa * (lam - lc) ** 2)
    if which == "divergence_d":
        regime(0 < gap <= 1e-2 * wa, "D is not close to d_crit")
        return 1 / (8 * gap**2)
    if which == "homodyne_near_crit":
        regime(0 < gap <= 1e-2 * wa, "D is not close to d_crit")
        return 1 - 16 * lam**2 * wa**1.5 / (4 * lam**2 * wa * wb + wb**4) * np.sqrt(gap)
    raise ValueError(f"unknown limit {which!r}; expected one of {LIMITS}")


# ---------------------------------------------------------------------------
# reports


def single_mode_report(sigma_a, dsigma_a):
    """(H_a, F_hd at the optimal angle, angle) for one mode."""
    angle = optimal_homodyne_angle_from(sigma_a, dsigma_a)
    return qfi_single_mode_from(sigma_a, dsigma_a), homodyne_fi_from(sigma_a, dsigma_a, angle), angle


def report_from_covariance(sigma, dsigma, mode, d, margin, scale, photon_counting=True, stp_fn=None):
    """Assemble an :class:`EstimationReport` from a two-mode state and its derivative.

    ``mode`` selects the measured oscillator (0 or 1). ``stp_fn(D)`` supplies the
    reduced squeezed-thermal parameters of that mode for photon counting.
    """
    block = slice(2 * mode, 2 * mode + 2)
    sigma_m, dsigma_m = sigma[block, block], dsigma[block, block]
    h = qfi_gaussian(sigma, dsigma)
    h_a, f_hd, angle = single_mode_report(sigma_m, dsigma_m)
    report = EstimationReport(h, h_a, f_hd, homodyne_angle=angle)
    if photon_counting:
        res = photon_counting_fi_family(stp_fn, d, margin, scale)
        report.f_photon_counting = res.value
        report.diagnostics.update(
            pc_cutoff=res.cutoff, pc_dstep=res.dstep, pc_refinements=res.refinements, pc_converged=res.converged
        )
    return report


def estimation_report(p, photon_counting=True):
    """All Fisher informations of D at one parameter point (measurements on mode a)."""
    require_stable(p)
    report = report_from_covariance(
        ground_state_covariance(p),
        covariance_derivative(p),
        0,
        p.d,
        p.margin,
        max(p.omega_a, 4 * abs(p.d) + p.omega_a),
        photon_counting,
        lambda d: reduced_state_params(p.with_d(d)),
    )
    report.diagnostics["margin"] = p.margin
    return report


def lossy_single_mode(p, eta):
    """(H_a, F_hd) of mode a after a pure-loss channel with loss probability ``eta``."""
    sigma_a, dsigma_a = reduced_covariance_and_derivative(p)
    lossy = pure_loss_channel(sigma_a, eta)
    dlossy = (1 - eta) * dsigma_a
    return qfi_single_mode_from(lossy, dlossy), homodyne_fi_from(lossy, dlossy, 0.0)
