"""Two-oscillator Dicke model with a diamagnetic term.

    H = wa a^dag a + wb b^dag b + lam (a + a^dag)(b + b^dag) + D (a + a^dag)^2

In quadratures the Hamiltonian is ``(1/2) x^T K x + (1/2) y^T W y`` with
position kernel ``K = [[wa + 4D, 2 lam], [2 lam, wb]]`` acting on ``(x_a, x_b)``
and momentum kernel ``W = diag(wa, wb)``.
"""

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_sylvester, sqrtm

from .errors import DegenerateSpectrumError, InstabilityError

#: Minimum margin ``D - d_crit`` (relative to wa) for ground-state construction.
STABILITY_MARGIN = 1e-12


@dataclass(frozen=True)
class ModelParams:
    omega_a: float
    omega_b: float
    lam: float
    d: float

    def __post_init__(self):
        if not (self.omega_a > 0 and self.omega_b > 0):
            raise ValueError("bare frequencies must be positive")
        if self.lam < 0:
            raise ValueError("coupling lambda must be non-negative")

    def with_d(self, d):
        return replace(self, d=float(d))

    def scaled(self, alpha):
        return ModelParams(alpha * self.omega_a, alpha * self.omega_b, alpha * self.lam, alpha * self.d)

    @property
    def d_crit(self):
        return d_crit(self)

    @property
    def d_trk(self):
        return d_trk(self)

    @property
    def margin(self):
        """Distance ``D - d_crit`` from the instability boundary."""
        return self.d - d_crit(self)

    def is_stable(self, margin=STABILITY_MARGIN):
        return self.margin > margin * self.omega_a


@dataclass(frozen=True)
class PolaritonSpectrum:
    omega_u: float
    omega_l: float
    theta: float


def d_crit(p):
    """Smallest D for which the Hamiltonian is bounded from below."""
    return p.lam**2 / p.omega_b - p.omega_a / 4


def d_trk(p):
    """Diamagnetic strength fixed by the Thomas-Reiche-Kuhn sum rule."""
    return p.lam**2 / p.omega_b


def lambda_crit(p):
    """Critical coupling of the model without diamagnetic term."""
    return np.sqrt(p.omega_a * p.omega_b) / 2


def require_stable(p, margin=STABILITY_MARGIN):
    if not p.is_stable(margin):
        raise InstabilityError(
            f"unstable parameters: D={p.d!r} is not above d_crit={d_crit(p)!r}", d_crit=d_crit(p)
        )


def _invariants(p):
    """(a11, product wL*wU, sum wL+wU) of the frequency-weighted kernel."""
    a11 = p.omega_a**2 + 4 * p.d * p.omega_a
    a22 = p.omega_b**2
    det = a11 * a22 - 4 * p.lam**2 * p.omega_a * p.omega_b
    prod = np.sqrt(det)
    total = np.sqrt(a11 + a22 + 2 * prod)
    return a11, prod, total


def polariton_frequencies(p, allow_degenerate=True):
    """Upper/lower polariton frequencies and the mixing angle theta.

    At exact degeneracy (``lam = 0`` and ``wa^2 + 4 D wa = wb^2``) theta is
    set to 0 unless ``allow_degenerate`` is False.
    """
    half_sum = (p.omega_a**2 + 4 * p.d * p.omega_a + p.omega_b**2) / 2
    half_diff = (p.omega_a**2 + 4 * p.d * p.omega_a - p.omega_b**2) / 2
    root = np.hypot(half_diff, 2 * p.lam * np.sqrt(p.omega_a * p.omega_b))
    wl2 = half_sum - root
    if wl2 < 0:
        raise InstabilityError(
            f"lower polariton frequency squared is negative ({wl2:.3g})", d_crit=d_crit(p)
        )
    wu, wl = np.sqrt(half_sum + root), np.sqrt(wl2)
    if root == 0:
        if not allow_degenerate:
            raise DegenerateSpectrumError("wU == wL: mixing angle undefined")
        return PolaritonSpectrum(wu, wl, 0.0)
    # cos 2theta = half_diff/root, sin 2theta = -2 lam sqrt(wa wb)/root
    theta = 0.5 * np.arctan2(-2 * p.lam * np.sqrt(p.omega_a * p.omega_b), half_diff)
    return PolaritonSpectrum(wu, wl, theta)


def _f_pm(x):
    return 0.5 * (np.sqrt(x) + 1 / np.sqrt(x)), 0.5 * (np.sqrt(x) - 1 / np.sqrt(x))


def bogoliubov_matrix(p):
    """Matrix taking ``(a, b, a^dag, b^dag)`` to ``(pU, pL, pU^dag, pL^dag)``."""
    spec = polariton_frequencies(p)
    c, s = np.cos(spec.theta), np.sin(spec.theta)
    fp_ua, fm_ua = _f_pm(spec.omega_u / p.omega_a)
    fp_ub, fm_ub = _f_pm(spec.omega_u / p.omega_b)
    fp_la, fm_la = _f_pm(spec.omega_l / p.omega_a)
    fp_lb, fm_lb = _f_pm(spec.omega_l / p.omega_b)
    return np.array(
        [
            [c * fp_ua, -s * fp_ub, c * fm_ua, -s * fm_ub],
            [s * fp_la, c * fp_lb, s * fm_la, c * fm_lb],
            [c * fm_ua, -s * fm_ub, c * fp_ua, -s * fp_ub],
            [s * fm_la, c * fm_lb, s * fp_la, c * fp_lb],
        ]
    )


def _ladder_to_quadrature():
    """Matrix ``L`` with ``(x_a, y_a, x_b, y_b) = L (a, b, a^dag, b^dag)``."""
    r = 1 / np.sqrt(2)
    return np.array(
        [
            [r, 0, r, 0],
            [-1j * r, 0, 1j * r, 0],
            [0, r, 0, r],
            [0, -1j * r, 0, 1j * r],
        ]
    )


def quadrature_symplectic(p):
    """Real symplectic ``S`` with ``r_original = S r_polariton``."""
    lq = _ladder_to_quadrature()
    to_polariton = lq @ bogoliubov_matrix(p) @ np.linalg.inv(lq)
    return np.real_if_close(np.linalg.inv(to_polariton), tol=1e6).real


def ground_state_covariance(p):
    """Ground-state covariance ``S (I/2) S^T`` built from the Bogoliubov matrix."""
    require_stable(p)
    s = quadrature_symplectic(p)
    sigma = 0.5 * s @ s.T
    return 0.5 * (sigma + sigma.T)


def closed_form_covariance(p):
    """Ground-state covariance from the explicit polariton-frequency expression.

    The explicit expression in the literature is normalized to a unit vacuum;
    here it is halved to the vacuum = I/2 convention.
    """
    require_stable(p)
    wa, wb, lam = p.omega_a, p.omega_b, p.lam
    a11, prod, total = _invariants(p)
    sigma = np.zeros((4, 4))
    sigma[0, 0] = wa * (wb**2 + prod) / (2 * prod * total)
    sigma[1, 1] = (a11 + prod) / (2 * wa * total)
    sigma[2, 2] = wb * (a11 + prod) / (2 * prod * total)
    sigma[3, 3] = (wb**2 + prod) / (2 * wb * total)
    sigma[0, 2] = sigma[2, 0] = -lam * wa * wb / (prod * total)
    sigma[1, 3] = sigma[3, 1] = lam / total
    return sigma


def covariance_derivative(p):
    """Analytic ``d sigma / d D``, differentiating through wL*wU and wL+wU.

    With ``P = wL wU`` and ``T = wL + wU``: ``P^2 = a11 wb^2 - 4 lam^2 wa wb``
    and ``T^2 = a11 + wb^2 + 2P``, where ``a11 = wa^2 + 4 D wa``.
    """
    require_stable(p)
    wa, wb, lam = p.omega_a, p.omega_b, p.lam
    a11, prod, total = _invariants(p)
    da11 = 4 * wa
    dprod = da11 * wb**2 / (2 * prod)
    dtotal = (da11 + 2 * dprod) / (2 * total)
    pt = prod * total
    dpt = dprod * total + prod * dtotal

    ds = np.zeros((4, 4))
    # quotient rule on each entry of closed_form_covariance
    ds[0, 0] = wa / 2 * (dprod * pt - (wb**2 + prod) * dpt) / pt**2
    ds[1, 1] = ((da11 + dprod) * total - (a11 + prod) * dtotal) / (2 * wa * total**2)
    ds[2, 2] = wb / 2 * ((da11 + dprod) * pt - (a11 + prod) * dpt) / pt**2
    ds[3, 3] = (dprod * total - (wb**2 + prod) * dtotal) / (2 * wb * total**2)
    ds[0, 2] = ds[2, 0] = lam * wa * wb * dpt / pt**2
    ds[1, 3] = ds[3, 1] = -lam * dtotal / total**2
    return ds


def covariance_derivative_fd(p, step=None):
    """Central finite-difference ``d sigma/d D`` with one Richardson step."""
    require_stable(p)
    if step is None:
        step = 1e-3 * min(p.omega_a, p.margin)
    step = min(step, 0.1 * p.margin)

    def central(h):
        return (closed_form_covariance(p.with_d(p.d + h)) - closed_form_covariance(p.with_d(p.d - h))) / (2 * h)

    return (4 * central(step / 2) - central(step)) / 3


def dipole_gauge_map(p):
    """Parameters whose mode-a results describe the matter mode in the dipole gauge.

    The dipole-gauge Hamiltonian carries its quadratic self-term on mode b, so
    swapping the two bare frequencies maps it onto the Coulomb-gauge form.
    """
    return ModelParams(p.omega_b, p.omega_a, p.lam, p.d)


def quadratic_ground_state(position_kernel, momentum_freqs, dkernel=None):
    """Ground state of ``(1/2) x^T K x + (1/2) y^T W y`` for diagonal ``W``.

    Returns the covariance in ``(x_1, y_1, x_2, y_2, ...)`` order and, if the
    derivative ``dkernel`` of ``K`` is given, the derivative of the covariance.
    Built with ``A = W^(1/2) K W^(1/2)``: ``<xx> = W^(1/2) A^(-1/2) W^(1/2)/2``
    and ``<yy> = W^(-1/2) A^(1/2) W^(-1/2)/2``; the derivative of ``A^(1/2)``
    solves a Sylvester equation.
    """
    k = np.asarray(position_kernel, dtype=float)
    w = np.asarray(momentum_freqs, dtype=float)
    n = len(w)
    sw = np.sqrt(w)
    a = sw[:, None] * k * sw[None, :]
    if np.linalg.eigvalsh(a).min() <= 0:
        raise InstabilityError("position kernel is not positive definite")
    root = np.real(sqrtm(a))
    root = 0.5 * (root + root.T)
    inv_root = np.linalg.inv(root)
    xx = 0.5 * sw[:, None] * inv_root * sw[None, :]
    yy = 0.5 * root / sw[:, None] / sw[None, :]

    def interleave(xblock, yblock):
        out = np.zeros((2 * n, 2 * n))
        out[0::2, 0::2] = xblock
        out[1::2, 1::2] = yblock
        return out

    sigma = interleave(xx, yy)
    if dkernel is None:
        return sigma
    da = sw[:, None] * np.asarray(dkernel, dtype=float) * sw[None, :]
    droot = solve_sylvester(root, root, da)
    dinv = -inv_root @ droot @ inv_root
    dsigma = interleave(0.5 * sw[:, None] * dinv * sw[None, :], 0.5 * droot / sw[:, None] / sw[None, :])
    return sigma, dsigma


def dipole_gauge_ground_state(omega_a, omega_b, lam, d_bar):
    """Ground state and D-bar derivative of the dipole-gauge Hamiltonian.

    ``wa a^dag a + wb b^dag b + lam (a+a^dag)(b+b^dag) + d_bar (b+b^dag)^2``,
    diagonalized directly without any mode swap.
    """
    kernel = np.array([[omega_a, 2 * lam], [2 * lam, omega_b + 4 * d_bar]])
    dkernel = np.array([[0.0, 0.0], [0.0, 4.0]])
    return quadratic_ground_state(kernel, [omega_a, omega_b], dkernel)


def hamiltonian_kernel(p):
    """Position kernel and momentum frequencies of the Coulomb-gauge model."""
    kernel = np.array([[p.omega_a + 4 * p.d, 2 * p.lam], [2 * p.lam, p.omega_b]])
    return kernel, np.array([p.omega_a, p.omega_b])


def ground_energy(p):
    """Ground energy of the Hamiltonian as written (no normal ordering)."""
    spec = polariton_frequencies(p)
    return 0.5 * (spec.omega_u + spec.omega_l) - 0.5 * (p.omega_a + p.omega_b)
