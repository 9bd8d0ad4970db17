"""Parameter types and dynamical matrices of the parametric ion chain.

All chain quantities are dimensionless, measured in units of the Coulomb
coupling ``J_c``.  Physical units only enter through :class:`PhysicalParams`.

Nambu ordering is ``(a_1..a_N, a_1^dag..a_N^dag)``.  Site labels are 1-based
in every public interface; arrays are 0-based internally.

Phase convention
----------------
The hopping between sites ``i`` and ``j`` carries the phase
``exp(+i dphi (j - i))``.  With this choice a positive phase gradient
amplifies signals travelling from site 1 towards site N, which is the
orientation used for the sensing protocol (sensor at site 1, detector at
site N).  The opposite sign is the mirror image of the chain.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants

from .errors import ConfigError

HBAR = constants.hbar
ATOMIC_MASS = constants.atomic_mass
# 25Mg+ : 24.985837 u (AME/CODATA isotope mass); electron mass neglected.
MG25_MASS = 24.985837 * ATOMIC_MASS

DEFAULT_TAIL_TOLERANCE = 1e-12


def reduce_phase(phi: float) -> float:
    """Map an angle onto the interval (-pi, pi]."""
    r = math.remainder(float(phi), 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    return r


@dataclass(frozen=True)
class ChainParams:
    """Dimensionless description of the chain (units of ``J_c``).

    ``hopping_range=None`` means full dipolar range: every pair of sites in
    a finite chain, and the whole (tolerance-truncated) tail for Bloch sums.
    An integer pins the cutoff for both.
    """

    n_sites: int
    delta: float
    g: float
    gamma: float
    delta_phi: float
    j_c: float = 1.0
    hopping_range: int | None = None

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 1:
            raise ConfigError(f"n_sites must be a positive integer, got {self.n_sites}")
        object.__setattr__(self, "n_sites", int(self.n_sites))
        for name in ("delta", "g", "gamma", "delta_phi", "j_c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ConfigError(f"{name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if self.j_c < 0:
            raise ConfigError(f"j_c must be non-negative, got {self.j_c}")
        if self.gamma < 0:
            raise ConfigError(f"gamma must be non-negative, got {self.gamma}")
        if self.hopping_range is not None:
            r = self.hopping_range
            if int(r) != r or r < 1:
                raise ConfigError(f"hopping_range must be a positive integer, got {r}")
            if self.n_sites >= 2 and r > self.n_sites - 1:
                raise ConfigError(
                    f"hopping_range={r} exceeds n_sites-1={self.n_sites - 1}"
                )
            object.__setattr__(self, "hopping_range", int(r))
        object.__setattr__(self, "delta_phi", reduce_phase(self.delta_phi))

    @property
    def effective_range(self) -> int:
        """Hopping cutoff used for the finite chain."""
        if self.hopping_range is None:
            return max(self.n_sites - 1, 0)
        return self.hopping_range

    def replace(self, **changes) -> "ChainParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class PhysicalParams:
    """Physical units: ion mass [kg], trap frequency and J_c [rad/s]."""

    ion_mass: float = MG25_MASS
    trap_frequency: float = 2.0 * math.pi * 2.0e6
    frequency_scale: float = 2.0 * math.pi * 1.0e3
    hbar: float = field(default=HBAR, repr=False)

    def __post_init__(self):
        if not self.trap_frequency > 0:
            raise ConfigError("trap_frequency must be positive")
        if not self.frequency_scale > 0:
            raise ConfigError("frequency_scale must be positive")
        if not self.ion_mass > 0:
            raise ConfigError("ion_mass must be positive")
        if self.frequency_scale / self.trap_frequency > 0.01:
            warnings.warn(
                "frequency_scale is not small compared with trap_frequency "
                f"(ratio {self.frequency_scale / self.trap_frequency:.3g}); "
                "the rotating-wave treatment may be inaccurate",
                stacklevel=2,
            )

    @property
    def zero_point_length(self) -> float:
        """x_0 = sqrt(hbar / (2 m w_t)) in meters."""
        return math.sqrt(self.hbar / (2.0 * self.ion_mass * self.trap_frequency))

    @classmethod
    def from_hz(cls, frequency_scale_hz: float, trap_frequency_hz: float = 2.0e6,
                ion_mass: float = MG25_MASS) -> "PhysicalParams":
        """Build from ordinary frequencies (J_c / 2pi and w_t / 2pi in Hz)."""
        return cls(
            ion_mass=ion_mass,
            trap_frequency=2.0 * math.pi * trap_frequency_hz,
            frequency_scale=2.0 * math.pi * frequency_scale_hz,
        )


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DynamicalMatrix:
    """The 2N x 2N non-Hermitian Nambu matrix generating first moments."""

    entries: np.ndarray
    n_sites: int
    params: ChainParams | None = None

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (2 * self.n_sites, 2 * self.n_sites):
            raise ConfigError(f"expected shape {(2 * self.n_sites,) * 2}, got {e.shape}")
        object.__setattr__(self, "entries", _frozen(e))

    @property
    def size(self) -> int:
        return 2 * self.n_sites

    def block(self, row: int, col: int) -> np.ndarray:
        n = self.n_sites
        return self.entries[row * n:(row + 1) * n, col * n:(col + 1) * n]

    @property
    def gamma(self) -> float:
        """Uniform loss rate, read from the diagonal if no params are attached."""
        if self.params is not None:
            return self.params.gamma
        return float(-2.0 * np.mean(np.diag(self.entries).imag))


@dataclass(frozen=True)
class BlochMatrix:
    """2x2 Bloch dynamical matrix H(k) of the translation-invariant chain."""

    k: float
    entries: np.ndarray
    tail_terms: int

    def __post_init__(self):
        object.__setattr__(self, "entries", _frozen(np.array(self.entries, dtype=complex)))


def nambu_swap(n_sites: int) -> np.ndarray:
    """sigma_x (x) 1_N: exchanges the particle and hole Nambu blocks."""
    n = n_sites
    s = np.zeros((2 * n, 2 * n))
    s[:n, n:] = np.eye(n)
    s[n:, :n] = np.eye(n)
    return s


def particle_hole_residual(h: np.ndarray) -> float:
    """max |sigma_x H* sigma_x + H|."""
    h = np.asarray(h)
    n = h.shape[0] // 2
    sx = nambu_swap(n)
    return float(np.max(np.abs(sx @ h.conj() @ sx + h)))


def build_coupling_matrix(params: ChainParams) -> np.ndarray:
    """Dipolar hopping matrix ``J_ij = J_c exp(i dphi (j-i)) / |i-j|^3``.

    Pairs further apart than ``params.effective_range`` are dropped.
    The result is Hermitian by construction.
    """
    n = params.n_sites
    idx = np.arange(n)
    sep = idx[None, :] - idx[:, None]  # j - i
    dist = np.abs(sep)
    mask = (dist > 0) & (dist <= params.effective_range)
    safe = np.where(dist == 0, 1, dist).astype(float)
    j = np.where(mask, params.j_c * np.exp(1j * params.delta_phi * sep) / safe**3, 0.0)
    return j.astype(complex)


def _assemble(params: ChainParams, j: np.ndarray) -> DynamicalMatrix:
    n = params.n_sites
    eye = np.eye(n)
    loss = 0.5j * params.gamma * eye
    h = np.block([
        [j + params.delta * eye - loss, params.g * eye],
        [-params.g * eye, -j.conj() - params.delta * eye - loss],
    ])
    return DynamicalMatrix(h, n, params)


def build_dynamical_matrix(params: ChainParams) -> DynamicalMatrix:
    """Open-boundary dynamical matrix of the finite chain."""
    return _assemble(params, build_coupling_matrix(params))


def build_ring_dynamical_matrix(params: ChainParams) -> DynamicalMatrix:
    """Periodic-boundary (circulant) dynamical matrix.

    Used to check the Bloch construction.  Requires a pinned
    ``hopping_range < n_sites / 2`` so that no bond is counted twice.
    """
    n = params.n_sites
    r = params.hopping_range
    if r is None or 2 * r >= n:
        raise ConfigError("ring construction needs hopping_range < n_sites/2")
    j = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for d in range(1, r + 1):
            t = params.j_c * np.exp(1j * params.delta_phi * d) / d**3
            j[i, (i + d) % n] += t
            j[(i + d) % n, i] += np.conj(t)
    return _assemble(params, j)


# -- Bloch sums -------------------------------------------------------------

def tail_cutoff(tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> int:
    """Largest n whose dipolar term 1/n^3 is still above ``tail_tolerance``."""
    if not tail_tolerance > 0:
        raise ConfigError("tail_tolerance must be positive")
    return max(1, int(math.floor(tail_tolerance ** (-1.0 / 3.0) * (1 + 1e-12))))


def bloch_cutoff(params: ChainParams, tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> int:
    n_max = tail_cutoff(tail_tolerance)
    if params.hopping_range is not None:
        n_max = min(n_max, params.hopping_range)
    return n_max


def dipolar_series(x, n_max: int, power: int = 3) -> np.ndarray:
    """Sum_{n=1}^{n_max} exp(i n x) / n^power for arbitrary points ``x``.

    The real part is the cosine series, the imaginary part the sine series.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.zeros(x.shape, dtype=complex)
    chunk = 4096
    flat = x.ravel()
    res = out.ravel()
    for start in range(1, n_max + 1, chunk):
        n = np.arange(start, min(start + chunk, n_max + 1), dtype=float)
        res += np.exp(1j * np.outer(flat, n)) @ (1.0 / n**power)
    return res.reshape(x.shape)


@functools.lru_cache(maxsize=256)
def _grid_series_cached(k_points: int, shift: float, n_max: int, power: int) -> np.ndarray:
    n = np.arange(1, n_max + 1)
    # k_m = -pi + 2 pi m / K  =>  exp(i k_m n) = (-1)^n exp(2 pi i m n / K)
    coeff = np.exp(1j * shift * n) * np.where(n % 2 == 0, 1.0, -1.0) / n.astype(float) ** power
    folded = np.zeros(k_points, dtype=complex)
    np.add.at(folded, n % k_points, coeff)
    out = np.fft.ifft(folded) * k_points
    out.flags.writeable = False
    return out


def dipolar_series_on_grid(k_points: int, shift: float, n_max: int, power: int = 3) -> np.ndarray:
    """Same as :func:`dipolar_series` at ``x = k_m + shift`` on the uniform grid
    ``k_m = -pi + 2 pi m / k_points``; O(n_max + K log K) via an aliased FFT."""
    return _grid_series_cached(int(k_points), float(shift), int(n_max), int(power))


def bloch_grid(k_points: int) -> np.ndarray:
    return -np.pi + 2.0 * np.pi * np.arange(k_points) / k_points


def bloch_diagonals(params: ChainParams, k, n_max: int, on_grid: bool = False):
    """Diagonal entries ``(h_11(k), h_22(k))`` of H(k); off-diagonals are ``+-g``.

    With ``on_grid=True``, ``k`` must be the integer grid size and the
    uniform grid of :func:`bloch_grid` is used.
    """
    if on_grid:
        plus = dipolar_series_on_grid(k, params.delta_phi, n_max).real
        minus = dipolar_series_on_grid(k, -params.delta_phi, n_max).real
    else:
        k = np.asarray(k, dtype=float)
        plus = dipolar_series(k + params.delta_phi, n_max).real
        minus = dipolar_series(k - params.delta_phi, n_max).real
    half_loss = 0.5j * params.gamma
    h11 = params.delta + 2.0 * params.j_c * plus - half_loss
    h22 = -params.delta - 2.0 * params.j_c * minus - half_loss
    return h11, h22


def bloch_diagonal_derivatives(params: ChainParams, k, n_max: int, on_grid: bool = False):
    """d/dk of :func:`bloch_diagonals` (the loss and detuning drop out)."""
    if on_grid:
        plus = dipolar_series_on_grid(k, params.delta_phi, n_max, power=2).imag
        minus = dipolar_series_on_grid(k, -params.delta_phi, n_max, power=2).imag
    else:
        k = np.asarray(k, dtype=float)
        plus = dipolar_series(k + params.delta_phi, n_max, power=2).imag
        minus = dipolar_series(k - params.delta_phi, n_max, power=2).imag
    return -2.0 * params.j_c * plus, 2.0 * params.j_c * minus


def build_bloch_matrix(params: ChainParams, k: float,
                       tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> BlochMatrix:
    """H(k) for the infinite chain with plane waves ``a_j ~ exp(i k j)``."""
    if not -np.pi - 1e-12 <= k <= np.pi + 1e-12:
        raise ConfigError(f"k must lie in [-pi, pi], got {k}")
    n_max = bloch_cutoff(params, tail_tolerance)
    h11, h22 = bloch_diagonals(params, np.array([k]), n_max)
    h = np.array([[h11[0], params.g], [-params.g, h22[0]]], dtype=complex)
    return BlochMatrix(float(k), h, n_max)


def cooling_rate(sideband_coupling: float, qubit_decay: float) -> float:
    """Continuous laser-cooling rate ``4 g_r^2 / gamma_d`` (same units as inputs).

    Valid only when the qubit decays much faster than the sideband coupling;
    a warning is issued above ``g_r / gamma_d = 0.3``.
    """
    if not qubit_decay > 0:
        raise ConfigError("qubit_decay must be positive")
    if sideband_coupling < 0:
        raise ConfigError("sideband_coupling must be non-negative")
    if sideband_coupling / qubit_decay > 0.3:
        warnings.warn("sideband coupling is not perturbative compared with the qubit decay",
                      stacklevel=2)
    return 4.0 * sideband_coupling**2 / qubit_decay
