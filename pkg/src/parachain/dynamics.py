"""Time integration of first and second moments.

Coherences follow ``dv/dt = -i H v - (eps e^{-i d t}, conj(eps) e^{+i d t})``
with ``v = (<a>, <a^dag>)``.  Only the ``<a>`` half is integrated; the other
half is its complex conjugate, which the particle-hole structure of ``H``
guarantees, so the Nambu pair stays consistent to rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ConfigError, NumericalError
from .model import DynamicalMatrix, _frozen
from .response import steady_response
from .steadystate import CorrelationMatrix, dissipator, stability, vacuum


@dataclass(frozen=True)
class DriveSpec:
    """Coherent drive amplitudes (units of J_c) and detuning from the parametric drive."""

    amplitudes: np.ndarray
    detuning: float = 0.0

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex).ravel()
        if not np.all(np.isfinite(a)) or not math.isfinite(self.detuning):
            raise ConfigError("drive entries must be finite")
        object.__setattr__(self, "amplitudes", _frozen(a))
        object.__setattr__(self, "detuning", float(self.detuning))

    @classmethod
    def single_site(cls, n_sites: int, site: int = 1, amplitude: complex = 1.0,
                    detuning: float = 0.0) -> "DriveSpec":
        if not 1 <= site <= n_sites:
            raise ConfigError(f"site {site} outside 1..{n_sites}")
        a = np.zeros(n_sites, dtype=complex)
        a[site - 1] = amplitude
        return cls(a, detuning)

    def scaled(self, factor: complex) -> "DriveSpec":
        return DriveSpec(self.amplitudes * factor, self.detuning)


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    coherences: np.ndarray  # shape (T, 2N): <a>, then <a^dag>
    converged: bool

    @property
    def a(self) -> np.ndarray:
        n = self.coherences.shape[1] // 2
        return self.coherences[:, :n]


def _rhs(h: DynamicalMatrix, drive: DriveSpec):
    n = h.n_sites
    h11 = np.ascontiguousarray(h.entries[:n, :n])
    h12 = np.ascontiguousarray(h.entries[:n, n:])
    eps = drive.amplitudes
    d = drive.detuning

    def f(t, a):
        return -1j * (h11 @ a + h12 @ a.conj()) - eps * np.exp(-1j * d * t)

    return f


def _check_drive(h: DynamicalMatrix, drive: DriveSpec):
    if drive.amplitudes.shape != (h.n_sites,):
        raise ConfigError(f"drive needs {h.n_sites} amplitudes")


def integrate_coherences(h: DynamicalMatrix, drive: DriveSpec, t_end: float,
                         initial=None, t_eval=None, rtol: float = 1e-9,
                         atol: float = 1e-12) -> Trajectory:
    """Integrate the coherence equations from ``initial`` (default: zero)."""
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    _check_drive(h, drive)
    n = h.n_sites
    if initial is None:
        a0 = np.zeros(n, dtype=complex)
    else:
        v0 = np.asarray(initial, dtype=complex).ravel()
        if v0.shape != (2 * n,) or np.max(np.abs(v0[n:] - v0[:n].conj()), initial=0) > 1e-12:
            raise ConfigError("initial state must be (a, conj(a)) with 2N entries")
        a0 = v0[:n]
    sol = solve_ivp(_rhs(h, drive), (0.0, t_end), a0, method="DOP853", t_eval=t_eval,
                    rtol=rtol, atol=atol)
    if sol.status < 0:
        raise NumericalError(f"coherence integration failed: {sol.message}")
    a = sol.y.T
    return Trajectory(_frozen(sol.t), _frozen(np.hstack([a, a.conj()])), sol.status == 0)


def _site_history(h, drive, site, times, rtol, atol, chunk=20000):
    """Coherence at one site on a fine grid, integrated in segments to bound memory."""
    f = _rhs(h, drive)
    a = np.zeros(h.n_sites, dtype=complex)
    out = np.empty(len(times), dtype=complex)
    out[0] = 0.0
    start = 0
    while start < len(times) - 1:
        stop = min(start + chunk, len(times) - 1)
        seg = times[start:stop + 1]
        sol = solve_ivp(f, (seg[0], seg[-1]), a, method="DOP853", t_eval=seg,
                        rtol=rtol, atol=atol)
        if sol.status < 0:
            raise NumericalError(f"coherence integration failed: {sol.message}")
        out[start:stop + 1] = sol.y[site - 1]
        a = sol.y[:, -1]
        start = stop
    return out


@dataclass(frozen=True)
class RelaxationResult:
    """Time to settle within ``1 - fraction`` of the steady envelope.

    ``window`` is the averaging period (the drive beat period ``2 pi/|d|``,
    zero when the drive is resonant).
    """

    tau: float
    site: int
    envelope: str
    window: float
    steady_envelope: float
    fraction: float
    t_end: float


def _steady_envelope(resp, site: int, kind: str) -> float:
    al = resp.alpha[site - 1]
    ab = resp.alpha_bar[site - 1]
    if resp.detuning == 0.0:
        return abs(al + ab)
    if kind == "position":
        return math.sqrt(abs(al) ** 2 + abs(ab) ** 2)
    phase = np.linspace(0.0, 2.0 * math.pi, 4096, endpoint=False)
    return float(np.mean(np.abs(al * np.exp(-1j * phase) + ab * np.exp(1j * phase))))


def relaxation_time(h: DynamicalMatrix, drive: DriveSpec, site: int | None = None,
                    t_end: float | None = None, envelope: str = "position",
                    fraction: float = 0.75, samples_per_period: int = 64,
                    rtol: float = 1e-9, atol: float = 1e-12) -> RelaxationResult:
    """Smallest t after which the envelope of ``<a_site>`` stays within
    ``1 - fraction`` of its steady value, starting from rest.

    ``envelope="position"`` uses the period-RMS of ``|<a_site>|`` (the
    quantity measured as the displacement amplitude), ``"coherence"`` the
    period-mean modulus.
    """
    if envelope not in ("position", "coherence"):
        raise ConfigError(f"unknown envelope {envelope!r}")
    _check_drive(h, drive)
    n = h.n_sites
    site = n if site is None else site
    if not 1 <= site <= n:
        raise ConfigError(f"site {site} outside 1..{n}")
    rep = stability(h)
    resp = steady_response(h, drive.amplitudes, drive.detuning)
    ss = _steady_envelope(resp, site, envelope)
    if ss == 0.0:
        raise ConfigError("steady amplitude vanishes at this site")
    if t_end is None:
        t_end = 100.0 / (-rep.margin)
    rate = float(np.max(np.abs(rep.eigenvalues))) + abs(drive.detuning)
    d = abs(drive.detuning)
    period = 2.0 * math.pi / d if d > 0 else 0.0
    dt = min(t_end / 4000.0, 0.25 / max(rate, 1e-12))
    if d > 0:
        dt = min(dt, period / samples_per_period)
    n_steps = int(math.ceil(t_end / dt))
    times = np.linspace(0.0, n_steps * dt, n_steps + 1)
    a = _site_history(h, drive, site, times, rtol, atol)

    if d > 0:
        w = max(1, int(round(period / dt)))
        weights = np.abs(a) ** 2 if envelope == "position" else np.abs(a)
        c = np.concatenate([[0.0], np.cumsum(weights)])
        env = (c[w:] - c[:-w]) / w
        if envelope == "position":
            env = np.sqrt(env)
        env_t = times[: len(env)] + 0.5 * (w - 1) * dt
    else:
        env, env_t = np.abs(a), times

    dev = np.abs(env / ss - 1.0)
    band = 1.0 - fraction
    outside = np.flatnonzero(dev > band)
    if len(outside) and outside[-1] == len(env) - 1:
        raise NumericalError(
            f"envelope not settled by t_end={t_end:.4g}: ratio {env[-1] / ss:.4f}"
        )
    if len(outside) == 0:
        tau = float(env_t[0])
    else:
        i = outside[-1]
        # linear interpolation of the band crossing between samples i and i+1
        d0, d1 = dev[i] - band, dev[i + 1] - band
        frac = d0 / (d0 - d1) if d0 != d1 else 1.0
        tau = float(env_t[i] + frac * (env_t[i + 1] - env_t[i]))
    return RelaxationResult(tau, site, envelope, period, ss, fraction, float(t_end))


@dataclass(frozen=True)
class CorrelationTrajectory:
    times: np.ndarray
    matrices: np.ndarray  # shape (T, 2N, 2N)
    n_sites: int

    def final(self) -> CorrelationMatrix:
        return CorrelationMatrix(self.matrices[-1], self.n_sites, "ode")


def integrate_correlations(h: DynamicalMatrix, gamma: float | None, t_end: float,
                           t_eval=None, initial=None, rtol: float = 1e-10,
                           atol: float = 1e-12) -> CorrelationTrajectory:
    """Integrate ``dC/dt = i H* C - i C H^T + D`` from the vacuum (or ``initial``)."""
    if not t_end > 0:
        raise ConfigError("t_end must be positive")
    gamma = h.gamma if gamma is None else gamma
    n = h.n_sites
    m = 2 * n
    hc = h.entries.conj()
    ht = h.entries.T
    d = dissipator(n, gamma)
    c0 = vacuum(n) if initial is None else np.asarray(initial, dtype=complex)

    def f(t, y):
        c = y.reshape(m, m)
        return (1j * hc @ c - 1j * c @ ht + d).ravel()

    sol = solve_ivp(f, (0.0, t_end), c0.astype(complex).ravel(), method="DOP853",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status < 0:
        raise NumericalError(f"correlation integration failed: {sol.message}")
    mats = sol.y.T.reshape(-1, m, m)
    return CorrelationTrajectory(_frozen(sol.t), _frozen(mats), n)
