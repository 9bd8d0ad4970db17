"""Stability and steady-state second moments of the chain.

Second moments obey ``dC/dt = i H* C - i C H^T + D`` with
``C_{mu nu} = <a_mu^dag a_nu>`` in the Nambu basis and ``D = diag(0, gamma 1)``.
The production solver diagonalises H; the frequency integral of
``G*(w) D G^T(w)`` is kept as an independent (slow) oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.integrate import quad_vec

from .errors import ConsistencyError, NumericalError, UnstableSystemError
from .model import ChainParams, DynamicalMatrix, _frozen, build_dynamical_matrix

STABILITY_TOLERANCE = 1e-10
CONDITION_THRESHOLD = 1e8


@dataclass(frozen=True)
class StabilityReport:
    eigenvalues: np.ndarray
    stable: bool
    margin: float
    eigenvector_condition: float
    tolerance: float = STABILITY_TOLERANCE

    @property
    def marginal(self) -> bool:
        return abs(self.margin) < self.tolerance


def stability(h: DynamicalMatrix, tolerance: float = STABILITY_TOLERANCE) -> StabilityReport:
    """Stable iff every eigenvalue of H has Im(lambda) < -tolerance."""
    lam, vecs = np.linalg.eig(h.entries)
    margin = float(np.max(lam.imag))
    cond = float(np.linalg.cond(vecs))
    return StabilityReport(_frozen(lam), margin < -tolerance, margin, cond, tolerance)


def _require_stable(h: DynamicalMatrix, tolerance: float) -> StabilityReport:
    rep = stability(h, tolerance)
    if not rep.stable:
        kind = "marginal" if rep.marginal else "unstable"
        raise UnstableSystemError(
            f"{kind} system has no steady state (max Im lambda = {rep.margin:.4g})",
            margin=rep.margin,
        )
    return rep


@dataclass(frozen=True)
class CorrelationMatrix:
    """Steady-state ``C_{mu nu} = <a_mu^dag a_nu>`` with N/M block views."""

    entries: np.ndarray
    n_sites: int
    method: str = ""

    @property
    def normal(self) -> np.ndarray:
        """N_ij = <a_i^dag a_j>."""
        n = self.n_sites
        return self.entries[:n, :n]

    @property
    def anomalous(self) -> np.ndarray:
        """M_ij = <a_i^dag a_j^dag>."""
        n = self.n_sites
        return self.entries[:n, n:]

    @property
    def hole(self) -> np.ndarray:
        """Lower-right block, <a_i a_j^dag>."""
        n = self.n_sites
        return self.entries[n:, n:]

    def pair_moment(self, site: int) -> complex:
        """<a_s a_s> for a 1-based site."""
        n = self.n_sites
        return complex(self.entries[n + site - 1, site - 1])


def dissipator(n_sites: int, gamma: float) -> np.ndarray:
    d = np.zeros((2 * n_sites, 2 * n_sites))
    d[n_sites:, n_sites:] = gamma * np.eye(n_sites)
    return d


def vacuum(n_sites: int) -> np.ndarray:
    return dissipator(n_sites, 1.0)


def lyapunov_residual(h: DynamicalMatrix, c: np.ndarray, gamma: float) -> float:
    hh = h.entries
    r = 1j * hh.conj() @ c - 1j * c @ hh.T + dissipator(h.n_sites, gamma)
    return float(np.max(np.abs(r)))


def lyapunov_steady_state(h: DynamicalMatrix, gamma: float | None = None,
                          tolerance: float = STABILITY_TOLERANCE,
                          condition_threshold: float = CONDITION_THRESHOLD) -> CorrelationMatrix:
    """Steady state of the second-moment equation.

    Uses the eigenbasis of H, where each entry decouples:
    ``C~_{mu nu} = -D~_{mu nu} / (i (conj(l_mu) - l_nu))``.  Close to an
    exceptional point the eigenvector matrix is ill-conditioned and a
    Bartels-Stewart solve is used instead.
    """
    gamma = h.gamma if gamma is None else gamma
    rep = _require_stable(h, tolerance)
    n = h.n_sites
    d = dissipator(n, gamma)
    if rep.eigenvector_condition <= condition_threshold:
        lam, v = np.linalg.eig(h.entries)
        vinv = np.linalg.inv(v)
        d_t = vinv.conj() @ d @ vinv.T
        c_t = -d_t / (1j * (lam.conj()[:, None] - lam[None, :]))
        c = v.conj() @ c_t @ v.T
        method = "eigen"
    else:
        hh = h.entries
        c = scipy.linalg.solve_sylvester(1j * hh.conj(), -1j * hh.T, -d)
        method = "sylvester"
    return CorrelationMatrix(_frozen(c), n, method)


def _tail_series(hh: np.ndarray, d: np.ndarray, cutoff: float, order: int):
    """Integral of G*(w) D G^T(w) / 2pi over |w| > cutoff from the Neumann series.

    Odd powers cancel between the two tails.  Returns the sum up to total
    power ``order`` and a bound on the first omitted term.
    """
    hc = hh.conj()
    ht = hh.T
    pow_c = [np.eye(hh.shape[0], dtype=complex)]
    pow_t = [np.eye(hh.shape[0], dtype=complex)]
    for _ in range(order):
        pow_c.append(pow_c[-1] @ hc)
        pow_t.append(pow_t[-1] @ ht)
    total = np.zeros_like(hh, dtype=complex)
    for p in range(0, order + 1, 2):
        weight = 2.0 * cutoff ** (-(p + 1)) / ((p + 1) * 2.0 * math.pi)
        for a in range(p + 1):
            total += weight * (pow_c[a] @ d @ pow_t[p - a])
    norm = np.linalg.norm(hh, 2)
    p = order + 2
    bound = (p + 1) * norm**p * np.max(np.abs(d)) * 2.0 * cutoff ** (-(p + 1)) / ((p + 1) * 2.0 * math.pi)
    return total, float(bound)


def correlation_integral_oracle(h: DynamicalMatrix, gamma: float | None = None,
                                omega_max: float = 0.0, quad_tolerance: float = 1e-8,
                                tolerance: float = STABILITY_TOLERANCE) -> CorrelationMatrix:
    """C = int dw/2pi G*(w) D G^T(w), by adaptive quadrature plus an analytic tail.

    Slow; meant for cross-checking :func:`lyapunov_steady_state`.
    """
    gamma = h.gamma if gamma is None else gamma
    rep = _require_stable(h, tolerance)
    n = h.n_sites
    hh = h.entries
    d = dissipator(n, gamma)
    lam = rep.eigenvalues
    cutoff = max(omega_max, 50.0 * float(np.max(np.abs(lam))), 4.0 * np.linalg.norm(hh, 2), 1.0)
    eye = np.eye(2 * n)

    def integrand(w):
        g = np.linalg.inv(w * eye - hh)
        return (g.conj() @ d @ g.T) / (2.0 * math.pi)

    poles = sorted({float(x) for x in np.round(lam.real, 12) if abs(x) < cutoff})
    val, err = quad_vec(integrand, -cutoff, cutoff, epsabs=quad_tolerance * 1e-3,
                        epsrel=quad_tolerance, points=poles or None, limit=20000)
    tail, tail_err = _tail_series(hh, d, cutoff, order=6)
    if tail_err > quad_tolerance:
        raise NumericalError(f"tail estimate uncertainty {tail_err:.2e} exceeds tolerance")
    return CorrelationMatrix(_frozen(val + tail), n, "frequency-integral")


def phonon_numbers(c: CorrelationMatrix, tolerance: float = 1e-10) -> np.ndarray:
    """Site-resolved phonon numbers <a_j^dag a_j>."""
    diag = np.diag(c.normal)
    scale = max(1.0, float(np.max(np.abs(diag))))
    if np.max(np.abs(diag.imag)) > tolerance * scale:
        raise ConsistencyError("phonon numbers have a non-negligible imaginary part")
    return diag.real.copy()


def stability_boundary(params: ChainParams, lo: float, hi: float,
                       xtol: float = 1e-6, tolerance: float = STABILITY_TOLERANCE) -> float:
    """Bisect in gamma for the onset of stability; ``lo`` unstable, ``hi`` stable."""
    def is_stable(gamma):
        return stability(build_dynamical_matrix(params.replace(gamma=gamma)), tolerance).stable

    if is_stable(lo) or not is_stable(hi):
        raise ConsistencyError(f"stability boundary not bracketed by [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if is_stable(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
