"""Gaussian-state primitives in the variance-1/2 convention.

Covariance matrices are real symmetric arrays in the quadrature ordering
``(x_a, y_a, x_b, y_b)`` with ``x = (a + a^dag)/sqrt(2)`` and
``y = -i (a - a^dag)/sqrt(2)``, so the vacuum is ``I/2``. All states are
zero-mean.
"""

import numpy as np
from scipy.linalg import sqrtm

from .errors import PureStateDegenerate, ValidationError

VACUUM_VARIANCE = 0.5

#: Symplectic eigenvalues within this distance of 1/2 mark a pure state.
PURE_TOL = 1e-8

#: Condition number above which the Stein system is solved by least squares.
STEIN_COND_LIMIT = 1e12

_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


def symplectic_form(n_modes=2):
    """Block-diagonal symplectic form with blocks ``[[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n_modes), _J)


def _as_covariance(sigma, name="sigma"):
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1] or sigma.shape[0] % 2:
        raise ValidationError(f"{name} must be a 2n x 2n matrix, got shape {sigma.shape}")
    scale = max(np.max(np.abs(sigma)), 1.0)
    if np.max(np.abs(sigma - sigma.T)) > 1e-12 * scale:
        raise ValidationError(f"{name} is not symmetric")
    return 0.5 * (sigma + sigma.T)


def validate_covariance(sigma, name="sigma"):
    """Return ``sigma`` symmetrized, raising if it is not a physical covariance."""
    sigma = _as_covariance(sigma, name)
    if np.linalg.eigvalsh(sigma).min() <= 0:
        raise ValidationError(f"{name} is not positive definite")
    nus = symplectic_eigenvalues(sigma, validate=False)
    if nus.min() < VACUUM_VARIANCE - 1e-10:
        raise ValidationError(
            f"{name} violates the uncertainty principle (symplectic eigenvalue {nus.min():.3g} < 1/2)"
        )
    return sigma


def symplectic_eigenvalues(sigma, validate=True):
    """Symplectic eigenvalues of ``sigma``, one per mode, in descending order.

    These are the moduli of the eigenvalues of ``i Omega sigma``; they come in
    +/- pairs, so every other one is kept after sorting.
    """
    if validate:
        sigma = _as_covariance(sigma)
        if np.linalg.eigvalsh(sigma).min() <= 0:
            raise ValidationError("sigma is not positive definite")
    n = sigma.shape[0] // 2
    ev = np.abs(np.linalg.eigvals(1j * symplectic_form(n) @ sigma))
    return np.sort(ev)[::-1][::2]


def is_pure(sigma, tol=PURE_TOL):
    return bool(np.all(np.abs(symplectic_eigenvalues(sigma) - VACUUM_VARIANCE) < tol))


def stein_solve(sigma, dsigma, pure_branch=True):
    """Solve ``dsigma = 2 sigma Om Phi Om^T sigma - Phi/2`` for symmetric ``Phi``.

    For pure states the linear map is singular. With ``pure_branch`` the
    solution ``Phi = -dsigma`` is returned in that case, otherwise
    :class:`PureStateDegenerate` is raised.
    """
    sigma = validate_covariance(sigma)
    dsigma = _as_covariance(dsigma, "dsigma")
    if dsigma.shape != sigma.shape:
        raise ValidationError("sigma and dsigma shapes differ")
    if is_pure(sigma):
        if pure_branch:
            return -dsigma
        raise PureStateDegenerate("state is pure; use Phi = -dsigma")

    dim = sigma.shape[0]
    om = symplectic_form(dim // 2)
    left = 2.0 * sigma @ om
    right = om.T @ sigma
    # vec(L X R) = (R^T kron L) vec(X) with column-major vec
    system = np.kron(right.T, left) - 0.5 * np.eye(dim * dim)
    rhs = dsigma.reshape(-1, order="F")
    if np.linalg.cond(system) < STEIN_COND_LIMIT:
        phi = np.linalg.solve(system, rhs)
    else:
        phi = np.linalg.lstsq(system, rhs, rcond=1.0 / STEIN_COND_LIMIT)[0]
    phi = phi.reshape(dim, dim, order="F")
    return 0.5 * (phi + phi.T)


def stein_residual(sigma, dsigma, phi):
    om = symplectic_form(sigma.shape[0] // 2)
    return np.linalg.norm(2 * sigma @ om @ phi @ om.T @ sigma - 0.5 * phi - dsigma)


def partial_trace_to_mode_a(sigma):
    """Reduced 2x2 covariance of the first mode."""
    sigma = np.asarray(sigma, dtype=float)
    return sigma[:2, :2].copy()


def gaussian_fidelity(sigma1, sigma2):
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))`` of zero-mean Gaussian states.

    If either state is pure, ``F^2 = <psi|rho|psi> = det(sigma1 + sigma2)^(-1/2)``;
    mixed pairs use the general auxiliary-matrix formula of Banchi, Braunstein
    and Pirandola (PRL 115, 260501).
    """
    s1 = validate_covariance(sigma1, "sigma1")
    s2 = validate_covariance(sigma2, "sigma2")
    if s1.shape != s2.shape:
        raise ValidationError("states have different mode counts")
    sign, logdet = np.linalg.slogdet(s1 + s2)
    if is_pure(s1) or is_pure(s2):
        return float(np.exp(-0.25 * logdet))

    n = s1.shape[0] // 2
    om = symplectic_form(n)
    eye = np.eye(2 * n)
    v_aux = om.T @ np.linalg.inv(s1 + s2) @ (om / 4 + s2 @ om @ s1)
    vo = v_aux @ om
    inner = sqrtm(eye + np.linalg.matrix_power(np.linalg.inv(vo), 2) / 4)
    f_tot4 = np.linalg.det(2 * (inner + eye) @ v_aux)
    f_tot = np.real(f_tot4) ** 0.25
    fid = f_tot * np.exp(-0.25 * logdet)
    return float(min(max(fid, 0.0), 1.0))


def pure_loss_channel(sigma_a, eta):
    """Pure-loss channel with loss probability ``eta``: ``(1-eta) sigma + eta I/2``."""
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"loss parameter must lie in [0, 1], got {eta}")
    sigma_a = np.asarray(sigma_a, dtype=float)
    vac = VACUUM_VARIANCE * np.eye(sigma_a.shape[0])
    if eta == 1.0:
        return vac
    return (1.0 - eta) * sigma_a + eta * vac
