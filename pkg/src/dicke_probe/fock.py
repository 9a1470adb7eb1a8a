"""Truncated number-basis representations used as oracles and for discrimination."""

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sps
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from .errors import CutoffError
from .model import require_stable

TAIL_TOL = 1e-10
HARD_MAX_CUTOFF = 4096


def max_cutoff():
    """Cutoff ceiling, overridable through ``PROBE_MAX_CUTOFF``."""
    value = os.environ.get("PROBE_MAX_CUTOFF")
    return min(int(value), HARD_MAX_CUTOFF) if value else HARD_MAX_CUTOFF


@dataclass(frozen=True)
class FockDensityMatrix:
    """Density matrix on ``|0>, ..., |cutoff>``.

    ``factor`` is an optional ``B`` with ``rho_work = B B^T`` on an enlarged
    working space, which gives exact square roots for fidelity.
    """

    matrix: np.ndarray
    cutoff: int
    tail_mass: float
    factor: np.ndarray = None

    @property
    def dim(self):
        return self.cutoff + 1


@dataclass(frozen=True)
class TwoModeFockVector:
    amplitudes: np.ndarray  # shape (cutoff+1, cutoff+1), indexed [n_a, n_b]
    cutoff: int
    norm_deficit: float
    energy: float


def _work_dim(cutoff):
    return int(1.5 * (cutoff + 1)) + 40


@lru_cache(maxsize=32)
def _squeeze_spectrum(dim, parity):
    """Eigen-decomposition of the symmetric partner of one parity block of a^dag^2 - a^2."""
    n = np.arange(parity, dim, 2)
    off = 0.5 * np.sqrt((n[:-1] + 1.0) * (n[:-1] + 2.0))
    if len(n) == 1:
        return np.zeros(1), np.ones((1, 1))
    return eigh_tridiagonal(np.zeros(len(n)), off)


def squeeze_unitary(r, dim):
    """``expm(r/2 (a^dag^2 - a^2))`` on the truncated space of dimension ``dim``.

    Each parity block ``T`` of the generator is antisymmetric tridiagonal;
    ``diag(i^j)^-1 T diag(i^j) = -i S`` with ``S`` symmetric, so the exponential
    follows from one r-independent eigendecomposition of ``S``.
    """
    u = np.zeros((dim, dim))
    for parity in (0, 1):
        idx = np.arange(parity, dim, 2)
        if len(idx) == 0:
            continue
        vals, vecs = _squeeze_spectrum(dim, parity)
        inner = (vecs * np.exp(-1j * r * vals)) @ vecs.T
        j = np.arange(len(idx))
        phase = 1j ** ((j[:, None] - j[None, :]) % 4)
        u[np.ix_(idx, idx)] = np.real(phase * inner)
    return u


def thermal_weights(n_thermal, dim):
    m = np.arange(dim)
    if n_thermal == 0:
        return (m == 0).astype(float)
    return (n_thermal / (1 + n_thermal)) ** m / (1 + n_thermal)


def heuristic_cutoff(n_thermal, r):
    return max(int(np.ceil(4 * (n_thermal + 1) * np.exp(2 * abs(r)))), 8)


def squeezed_thermal_distribution(n_thermal, r, cutoff):
    """Photon-number distribution ``p(0..cutoff)`` and tail mass, without the full matrix."""
    work = _work_dim(cutoff)
    u = squeeze_unitary(r, work)[: cutoff + 1]
    p = (u**2) @ thermal_weights(n_thermal, work)
    return p, max(1.0 - float(p.sum()), 0.0)


def _build(n_thermal, r, cutoff):
    work = _work_dim(cutoff)
    factor = squeeze_unitary(r, work) * np.sqrt(thermal_weights(n_thermal, work))[None, :]
    top = factor[: cutoff + 1]
    matrix = top @ top.T
    tail = max(1.0 - float(np.trace(matrix)), 0.0)
    return FockDensityMatrix(matrix, cutoff, tail, factor)


def squeezed_thermal_fock(n_thermal, r, cutoff=None, tail_tol=TAIL_TOL):
    """Squeezed thermal state ``S(r) nu_th S(r)^dag`` in the number basis.

    The squeezing convention gives x-variance ``(N + 1/2) e^{2r}``. With no
    ``cutoff`` the truncation is doubled from a heuristic floor until the
    tail mass drops below ``tail_tol``.
    """
    if n_thermal < 0:
        raise ValueError("thermal photon number must be non-negative")
    if cutoff is not None:
        rho = _build(n_thermal, r, cutoff)
        if rho.tail_mass > tail_tol:
            raise CutoffError(
                f"tail mass {rho.tail_mass:.2e} exceeds {tail_tol:.0e} at cutoff {cutoff}",
                suggested_cutoff=2 * cutoff,
            )
        return rho
    return squeezed_thermal_fock(n_thermal, r, auto_cutoff([(n_thermal, r)], tail_tol), tail_tol)


def auto_cutoff(states, tail_tol=TAIL_TOL, start=None):
    """Smallest doubling-ladder cutoff whose tail mass is below ``tail_tol`` for every state."""
    cutoff = start or max(heuristic_cutoff(n, r) for n, r in states)
    ceiling = max_cutoff()
    while True:
        cutoff = min(cutoff, ceiling)
        tails = [squeezed_thermal_distribution(n, r, cutoff)[1] for n, r in states]
        if max(tails) <= tail_tol:
            return cutoff
        if cutoff >= ceiling:
            raise CutoffError(
                f"tail mass {max(tails):.2e} still above {tail_tol:.0e} at the cutoff ceiling {ceiling}",
                suggested_cutoff=2 * ceiling,
            )
        cutoff *= 2


def photon_number_distribution(rho):
    return np.clip(np.real(np.diag(rho.matrix)), 0.0, None)


def mean_photon_number(rho):
    p = photon_number_distribution(rho)
    return float(np.arange(len(p)) @ p)


def trace_distance(rho1, rho2):
    """Half the trace norm of ``rho1 - rho2`` on the common truncated space."""
    if rho1.cutoff != rho2.cutoff:
        raise ValueError("density matrices must share a cutoff")
    ev = np.linalg.eigvalsh(rho1.matrix - rho2.matrix)
    return float(min(0.5 * np.abs(ev).sum(), 1.0))


def _psd_sqrt(m):
    vals, vecs = np.linalg.eigh(m)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.conj().T


def fock_fidelity(rho1, rho2):
    """Uhlmann fidelity ``Tr sqrt(sqrt(rho1) rho2 sqrt(rho1))``."""
    if rho1.factor is not None and rho2.factor is not None and rho1.factor.shape == rho2.factor.shape:
        # ||sqrt(rho1) sqrt(rho2)||_1 = ||B1^T B2||_1 for rho_i = B_i B_i^T
        return float(np.linalg.svd(rho1.factor.T @ rho2.factor, compute_uv=False).sum())
    if rho1.cutoff != rho2.cutoff:
        raise ValueError("density matrices must share a cutoff")
    return float(np.linalg.svd(_psd_sqrt(rho1.matrix) @ _psd_sqrt(rho2.matrix), compute_uv=False).sum())


def covariance_from_fock(rho):
    """2x2 covariance of a zero-mean single-mode state from its number-basis matrix."""
    dim = rho.dim
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    x = (a + a.T) / np.sqrt(2)
    y = -1j * (a - a.T) / np.sqrt(2)
    m = rho.matrix
    xx = np.real(np.trace(m @ x @ x))
    yy = np.real(np.trace(m @ y @ y))
    xy = np.real(np.trace(m @ (x @ y + y @ x))) / 2
    return np.array([[xx, xy], [xy, yy]])


def _two_mode_hamiltonian(p, cutoff):
    dim = cutoff + 1
    a = sps.diags(np.sqrt(np.arange(1, dim)), 1, format="csr")
    num = sps.diags(np.arange(dim, dtype=float), format="csr")
    quad = a + a.T
    eye = sps.identity(dim, format="csr")
    return (
        p.omega_a * sps.kron(num, eye)
        + p.omega_b * sps.kron(eye, num)
        + p.lam * sps.kron(quad, quad)
        + p.d * sps.kron(quad @ quad, eye)
    ).tocsr()


def two_mode_ground_fock(p, cutoff=40):
    """Ground state of the truncated two-mode Hamiltonian by sparse eigensolve."""
    require_stable(p)
    ham = _two_mode_hamiltonian(p, cutoff)
    v0 = np.zeros(ham.shape[0])
    v0[0] = 1.0
    # start in the even-parity sector; the Hamiltonian conserves parity
    vals, vecs = eigsh(ham, k=1, which="SA", v0=v0, tol=1e-14)
    vec = vecs[:, 0]
    vec = vec / np.linalg.norm(vec)
    if vec[0] < 0:
        vec = -vec
    amps = vec.reshape(cutoff + 1, cutoff + 1)
    edge = float((amps[-1, :] ** 2).sum() + (amps[:, -1] ** 2).sum())
    return TwoModeFockVector(amps, cutoff, edge, float(vals[0]))


def fock_overlap(psi1, psi2):
    """``|<psi1|psi2>|`` for two-mode vectors with equal cutoffs."""
    return float(abs(np.vdot(psi1.amplitudes, psi2.amplitudes)))


def covariance_from_two_mode(psi):
    """4x4 covariance in ``(x_a, y_a, x_b, y_b)`` order from a two-mode vector."""
    dim = psi.cutoff + 1
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    x = (a + a.T) / np.sqrt(2)
    y = -1j * (a - a.T) / np.sqrt(2)
    eye = np.eye(dim)
    ops = [np.kron(x, eye), np.kron(y, eye), np.kron(eye, x), np.kron(eye, y)]
    vec = psi.amplitudes.reshape(-1)
    applied = [o @ vec for o in ops]
    sigma = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            sigma[i, j] = np.real(np.vdot(applied[i], applied[j]))
    return 0.5 * (sigma + sigma.T)

