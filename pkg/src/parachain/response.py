"""Linear response: resolvent, singular-value diagnostics and coherent drive.

The Green's function is the resolvent ``G(w) = (w - H)^-1`` of the dynamical
matrix.  Its upper-left block is the signal response and its upper-right
block the idler response.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularProbeError, UnstableSystemError
from .model import DynamicalMatrix, _frozen

MAX_CONDITION = 1e14
EDGE_THRESHOLD = 0.1


@dataclass(frozen=True)
class GreensFunction:
    omega: float
    entries: np.ndarray
    n_sites: int

    @property
    def signal(self) -> np.ndarray:
        """G block (upper-left): response of a at w to a drive at w."""
        n = self.n_sites
        return self.entries[:n, :n]

    @property
    def idler(self) -> np.ndarray:
        """G-bar block (upper-right)."""
        n = self.n_sites
        return self.entries[:n, n:]

    @property
    def signal_prime(self) -> np.ndarray:
        n = self.n_sites
        return self.entries[n:, n:]

    @property
    def idler_prime(self) -> np.ndarray:
        n = self.n_sites
        return self.entries[n:, :n]

    def end_to_end(self) -> complex:
        """G_N1: response at the last site to a drive on the first."""
        return complex(self.signal[-1, 0])

    def idler_end_to_end(self) -> complex:
        return complex(self.idler[-1, 0])


def greens_function(h: DynamicalMatrix, omega: float,
                    max_condition: float = MAX_CONDITION) -> GreensFunction:
    """Resolvent ``(w - H)^-1`` at a real probe frequency."""
    a = omega * np.eye(h.size) - h.entries
    s = np.linalg.svd(a, compute_uv=False)
    if s[-1] == 0.0 or s[0] / s[-1] > max_condition:
        raise SingularProbeError(
            f"probe at quasi-zero singular value: s_min={s[-1]:.3e} at omega={omega}",
            smallest_singular_value=float(s[-1]),
        )
    return GreensFunction(float(omega), _frozen(np.linalg.inv(a)), h.n_sites)


@dataclass(frozen=True)
class SvdDiagnostics:
    """SVD ``w - H = U S V^dag`` with edge-mode bookkeeping.

    ``singular_values`` are sorted in descending order, so the candidate edge
    mode is the last column of ``left_vectors`` / ``right_vectors``.
    """

    omega: float
    singular_values: np.ndarray
    left_vectors: np.ndarray
    right_vectors: np.ndarray
    gap_ratio: float
    edge_index: int | None
    localization_length: float | None
    fit_r2: float | None
    n_sites: int

    @property
    def has_edge(self) -> bool:
        return self.edge_index is not None

    def site_profile(self, which: str = "right", index: int | None = None) -> np.ndarray:
        """Per-site weight sqrt(|v_i|^2 + |v_{i+N}|^2) of a singular vector."""
        if index is None:
            index = len(self.singular_values) - 1
        vecs = self.right_vectors if which == "right" else self.left_vectors
        v = vecs[:, index]
        n = self.n_sites
        return np.sqrt(np.abs(v[:n]) ** 2 + np.abs(v[n:]) ** 2)

    def reconstruct(self) -> np.ndarray:
        return (self.left_vectors * self.singular_values) @ self.right_vectors.conj().T

    def edge_approximation(self) -> np.ndarray:
        """Rank-one Green's function V_e s_e^-1 U_e^dag built from the edge triple."""
        e = len(self.singular_values) - 1 if self.edge_index is None else self.edge_index
        v = self.right_vectors[:, e]
        u = self.left_vectors[:, e]
        return np.outer(v, u.conj()) / self.singular_values[e]


def _exp_fit(profile: np.ndarray, n_sites: int):
    """Fit log(profile_i) = c - (N - i)/xi over the whole chain.

    Edge vectors carry a short-period modulation on top of the exponential,
    so a half-chain window gives an unreliable fit; only roll-off points
    below 1e-14 are discarded.
    """
    sites = np.arange(1, n_sites + 1)
    vals = profile
    ok = vals > 1e-14
    if ok.sum() < 3:
        return None, None
    x = (n_sites - sites[ok]).astype(float)
    y = np.log(vals[ok])
    slope, intercept = np.polyfit(x, y, 1)
    pred = slope * x + intercept
    ss_res = float(np.sum((y - pred) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    xi = -1.0 / slope if slope < 0 else None
    return xi, r2


def svd_of_inverse_propagator(h: DynamicalMatrix, omega: float,
                              edge_threshold: float = EDGE_THRESHOLD) -> SvdDiagnostics:
    a = omega * np.eye(h.size) - h.entries
    u, s, vh = np.linalg.svd(a)
    gap_ratio = float(s[-1] / s[-2]) if s[-2] > 0 else 0.0
    edge = len(s) - 1 if gap_ratio < edge_threshold else None
    xi = r2 = None
    if edge is not None:
        v = vh.conj().T[:, edge]
        n = h.n_sites
        profile = np.sqrt(np.abs(v[:n]) ** 2 + np.abs(v[n:]) ** 2)
        xi, r2 = _exp_fit(profile, n)
    return SvdDiagnostics(
        omega=float(omega),
        singular_values=_frozen(s),
        left_vectors=_frozen(u),
        right_vectors=_frozen(vh.conj().T),
        gap_ratio=gap_ratio,
        edge_index=edge,
        localization_length=xi,
        fit_r2=r2,
        n_sites=h.n_sites,
    )


def nonreciprocity(gf: GreensFunction) -> float:
    """chi = ||G_N1| - |G_1N|| / (|G_N1| + |G_1N|)."""
    if gf.n_sites < 2:
        raise ConfigError("nonreciprocity needs at least two sites")
    fwd = abs(gf.signal[-1, 0])
    bwd = abs(gf.signal[0, -1])
    if fwd + bwd == 0.0:
        raise ConfigError("nonreciprocity undefined: G_N1 = G_1N = 0")
    return abs(fwd - bwd) / (fwd + bwd)


def frobenius_gain(gf: GreensFunction) -> float:
    """Squared Frobenius norm of the full Nambu Green's function."""
    return float(np.sum(np.abs(gf.entries) ** 2))


@dataclass(frozen=True)
class SteadyResponse:
    """Steady coherence ``<a(t)> = alpha e^{-i d t} + alpha_bar e^{+i d t}``
    in the frame rotating at the parametric drive frequency."""

    alpha: np.ndarray
    alpha_bar: np.ndarray
    detuning: float

    def coherence(self, t) -> np.ndarray:
        """Rotating-frame coherences, shape ``(len(t), N)``."""
        t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
        return (self.alpha[None, :] * np.exp(-1j * self.detuning * t)
                + self.alpha_bar[None, :] * np.exp(1j * self.detuning * t))

    def lab_frame(self, t, drive_frequency: float) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        return self.coherence(t) * np.exp(-1j * drive_frequency * t)[:, None]


def steady_response(h: DynamicalMatrix, drive, detuning: float,
                    check_stability: bool = True) -> SteadyResponse:
    """Signal/idler amplitudes from ``(alpha, conj(alpha_bar)) = -i G(d) (eps, 0)``."""
    eps = np.asarray(drive, dtype=complex).ravel()
    n = h.n_sites
    if eps.shape != (n,):
        raise ConfigError(f"drive must have {n} entries, got {eps.shape}")
    if check_stability:
        from .steadystate import stability

        rep = stability(h)
        if not rep.stable:
            raise UnstableSystemError(
                f"no steady state: max Im(lambda) = {rep.margin:.4g}", margin=rep.margin
            )
    rhs = np.concatenate([eps, np.zeros(n, dtype=complex)])
    v = -1j * np.linalg.solve(detuning * np.eye(2 * n) - h.entries, rhs)
    return SteadyResponse(_frozen(v[:n]), _frozen(v[n:].conj()), float(detuning))


def greens_sweep(h: DynamicalMatrix, omegas, threads: int | None = 1) -> list[GreensFunction]:
    """Green's functions on a frequency grid, in grid order."""
    from .parallel import ordered_map

    return ordered_map(lambda w: greens_function(h, float(w)), list(omegas), threads)


def default_frequency_grid() -> np.ndarray:
    return np.linspace(-4.0, 4.0, 801)
