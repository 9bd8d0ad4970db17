"""Force sensing figures of merit in physical units.

A force ``F`` on the sensor ion acts as a coherent drive
``eps = -F x0 e^{-i psi} / (2 hbar)`` (rad/s).  The detector ion's
time-averaged displacement ``s_N``, its force-free shot noise and a fixed
classical resolution noise give the SNR, the minimum detectable force
``F_min = (dx_q + dx_c) / (ds_N/dF)`` and the sensitivity
``S = F_min sqrt(tau)``.  Noises add linearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import DriveSpec, relaxation_time
from .errors import ConfigError, ConsistencyError, UnstableSystemError
from .model import ChainParams, DynamicalMatrix, PhysicalParams, build_dynamical_matrix
from .parallel import ordered_map
from .response import GreensFunction, greens_function
from .steadystate import CorrelationMatrix, lyapunov_steady_state, stability

DEFAULT_CLASSICAL_NOISE = 0.2e-6  # m, typical fluorescence imaging resolution


def force_to_drive(force: float, physical: PhysicalParams, phase: float = 0.0) -> complex:
    """Drive amplitude in units of J_c for a force in newtons."""
    x0 = physical.zero_point_length
    eps = -force * x0 / (2.0 * physical.hbar) * np.exp(-1j * phase)
    return complex(eps / physical.frequency_scale)


def drive_to_force(amplitude: float, physical: PhysicalParams) -> float:
    """Force magnitude (N) producing a drive of ``amplitude`` J_c."""
    return abs(amplitude) * physical.frequency_scale * 2.0 * physical.hbar / physical.zero_point_length


def _amplitudes(g_plus: GreensFunction, g_minus: GreensFunction, drive: DriveSpec, site: int):
    """Signal/idler coherences at ``site``: alpha = -i G(d) eps, alpha_bar = -i Gbar(-d) eps*."""
    eps = drive.amplitudes
    alpha = -1j * (g_plus.signal[site - 1] @ eps)
    alpha_bar = -1j * (g_minus.idler[site - 1] @ eps.conj())
    return alpha, alpha_bar


def displacement_amplitude(g_plus: GreensFunction, g_minus: GreensFunction, drive: DriveSpec,
                           physical: PhysicalParams, site: int | None = None) -> float:
    """Time-averaged (RMS) displacement of ``site`` in meters.

    ``g_plus`` and ``g_minus`` are the Green's functions at ``+d`` and ``-d``
    with ``d`` the drive detuning.  At ``d = 0`` signal and idler interfere
    coherently; otherwise their beat averages out.
    """
    n = g_plus.n_sites
    site = n if site is None else site
    if not math.isclose(g_plus.omega, drive.detuning, abs_tol=1e-15) or \
            not math.isclose(g_minus.omega, -drive.detuning, abs_tol=1e-15):
        raise ConfigError("Green's functions must be evaluated at +detuning and -detuning")
    alpha, alpha_bar = _amplitudes(g_plus, g_minus, drive, site)
    x0 = physical.zero_point_length
    if drive.detuning == 0.0:
        return math.sqrt(2.0) * x0 * float(abs(alpha + alpha_bar))
    return math.sqrt(2.0) * x0 * math.hypot(float(abs(alpha)), float(abs(alpha_bar)))


def shot_noise(c: CorrelationMatrix, site: int, physical: PhysicalParams,
               tolerance: float = 1e-10) -> float:
    """Quantum position noise x0 sqrt(2 Re<a^2> + 2<a^dag a> + 1) at a 1-based site."""
    n_occ = c.normal[site - 1, site - 1].real
    pair = c.pair_moment(site).real
    radicand = 2.0 * pair + 2.0 * n_occ + 1.0
    if radicand < -tolerance:
        raise ConsistencyError(f"negative position variance {radicand:.3e}")
    return physical.zero_point_length * math.sqrt(max(radicand, 0.0))


@dataclass(frozen=True)
class SensorConfig:
    physical: PhysicalParams
    chain: ChainParams
    force_detuning: float
    classical_noise: float = DEFAULT_CLASSICAL_NOISE
    sense_site: int = 1
    detect_site: int | None = None
    force_phase: float = 0.0

    def __post_init__(self):
        n = self.chain.n_sites
        if self.detect_site is None:
            object.__setattr__(self, "detect_site", n)
        for s in (self.sense_site, self.detect_site):
            if not 1 <= s <= n:
                raise ConfigError(f"site {s} outside 1..{n}")
        if not self.classical_noise >= 0:
            raise ConfigError("classical_noise must be non-negative")
        if not math.isfinite(self.force_detuning):
            raise ConfigError("force_detuning must be finite")

    def unit_drive(self) -> DriveSpec:
        """Drive produced by a unit-modulus amplitude (in J_c) with the force phase."""
        return DriveSpec.single_site(self.chain.n_sites, self.sense_site,
                                     -np.exp(-1j * self.force_phase), self.force_detuning)


@dataclass(frozen=True)
class SensingReport:
    applied_force: float
    displacement_amplitude: float
    shot_noise: float
    classical_noise: float
    snr: float
    snr_per_newton: float
    signal_gain: float
    idler_gain: float
    f_min_quantum: float
    f_min_total: float
    sensitivity_quantum: float
    sensitivity_total: float
    relaxation_time: float
    relaxation_window: float = field(default=0.0)


def _unit_displacement(config: SensorConfig, h: DynamicalMatrix):
    """ds_N/d|eps| in meters per J_c, plus |G_N1(d)| and |Gbar_N1(-d)|."""
    d = config.force_detuning
    gp = greens_function(h, d)
    gm = greens_function(h, -d)
    drive = config.unit_drive()
    s_unit = displacement_amplitude(gp, gm, drive, config.physical, config.detect_site)
    i, j = config.detect_site - 1, config.sense_site - 1
    return s_unit, abs(gp.signal[i, j]), abs(gm.idler[i, j])


def sensing_report(config: SensorConfig, applied_force: float,
                   tau: float | None = None, h: DynamicalMatrix | None = None) -> SensingReport:
    """All figures of merit for one configuration.

    ``tau`` (dimensionless, units of 1/J_c) may be passed to skip the
    relaxation-time integration; it is converted to seconds here.
    """
    if not applied_force >= 0:
        raise ConfigError("applied_force must be non-negative")
    h = build_dynamical_matrix(config.chain) if h is None else h
    rep = stability(h)
    if not rep.stable:
        raise UnstableSystemError(f"sensor chain unstable (margin {rep.margin:.4g})", margin=rep.margin)
    phys = config.physical
    s_unit, g_sig, g_idl = _unit_displacement(config, h)
    # |eps| per newton, in units of J_c
    eps_per_newton = abs(force_to_drive(1.0, phys))
    ds_df = s_unit * eps_per_newton
    s = ds_df * applied_force
    q = shot_noise(lyapunov_steady_state(h), config.detect_site, phys)
    c = config.classical_noise
    window = 0.0
    if tau is None:
        res = relaxation_time(h, config.unit_drive(), site=config.detect_site)
        tau, window = res.tau, res.window
    tau_s = tau / phys.frequency_scale
    f_q = q / ds_df
    f_t = (q + c) / ds_df
    return SensingReport(
        applied_force=float(applied_force),
        displacement_amplitude=s,
        shot_noise=q,
        classical_noise=c,
        snr=s / (q + c),
        snr_per_newton=ds_df / (q + c),
        signal_gain=g_sig,
        idler_gain=g_idl,
        f_min_quantum=f_q,
        f_min_total=f_t,
        sensitivity_quantum=f_q * math.sqrt(tau_s),
        sensitivity_total=f_t * math.sqrt(tau_s),
        relaxation_time=tau_s,
        relaxation_window=window / phys.frequency_scale,
    )


@dataclass(frozen=True)
class ScanPoint:
    force_detuning: float
    signal_gain: float
    idler_gain: float
    displacement_amplitude: float
    snr: float
    nu: int | None
    in_band: bool
    status: str = "ok"


def frequency_scan(config: SensorConfig, detunings, applied_force: float,
                   k_points: int = 1024, threads: int | None = 1) -> list[ScanPoint]:
    """Response, SNR and winding number over a grid of force detunings.

    Relaxation times are not computed here.  Per-point failures are recorded
    in ``status`` and do not abort the scan.
    """
    from .topology import winding_number

    h = build_dynamical_matrix(config.chain)
    rep = stability(h)
    if not rep.stable:
        raise UnstableSystemError(f"sensor chain unstable (margin {rep.margin:.4g})", margin=rep.margin)
    q = shot_noise(lyapunov_steady_state(h), config.detect_site, config.physical)
    eps_per_newton = abs(force_to_drive(1.0, config.physical))
    bulk = config.chain.replace(n_sites=max(config.chain.n_sites, 2))

    def one(d):
        d = float(d)
        try:
            cfg = SensorConfig(config.physical, config.chain, d, config.classical_noise,
                               config.sense_site, config.detect_site, config.force_phase)
            s_unit, g_sig, g_idl = _unit_displacement(cfg, h)
            s = s_unit * eps_per_newton * applied_force
            try:
                nu = winding_number(bulk, d, k_points=k_points).nu
            except Exception:  # gapless at this frequency
                nu = None
            return ScanPoint(d, g_sig, g_idl, s, s / (q + config.classical_noise),
                             nu, bool(nu), "ok" if nu is not None else "boundary")
        except Exception as exc:  # noqa: BLE001 - recorded per row
            return ScanPoint(d, math.nan, math.nan, math.nan, math.nan, None, False,
                             f"error: {exc}")

    return ordered_map(one, list(detunings), threads)


def band_intervals(points: list[ScanPoint]) -> list[tuple[float, float]]:
    """Contiguous detuning intervals (grid endpoints) with nonzero winding."""
    out = []
    start = prev = None
    for p in points:
        if p.in_band:
            if start is None:
                start = p.force_detuning
            prev = p.force_detuning
        elif start is not None:
            out.append((start, prev))
            start = None
    if start is not None:
        out.append((start, prev))
    return out


# Defaults for the sensing table: g = eps = J_c, gamma = 1.8 J_c, Delta = 0.5 J_c.
TABLE_CHAIN = dict(delta=0.5, g=1.0, gamma=1.8, delta_phi=math.pi / 4)
TABLE_DETUNING = 1.19
TABLE_SIZES = (2, 10, 30)
TABLE_SCALES_HZ = (100.0, 1000.0, 10000.0)


@dataclass(frozen=True)
class TableRow:
    n_sites: int
    scale_hz: float
    tau: float
    f_min_quantum: float
    sensitivity_quantum: float
    f_min_total: float
    sensitivity_total: float
    displacement_amplitude: float
    shot_noise: float


def sensing_table(sizes=TABLE_SIZES, scales_hz=TABLE_SCALES_HZ,
                  trap_frequency_hz: float = 2.0e6,
                  classical_noise: float = DEFAULT_CLASSICAL_NOISE,
                  chain: dict | None = None, force_detuning: float = TABLE_DETUNING,
                  drive_amplitude: float = 1.0, threads: int | None = 1) -> list[TableRow]:
    """Rows (N, J_c/2pi) of F_min and S with and without classical noise.

    The applied force is the one producing a drive of ``drive_amplitude`` J_c.
    The dimensionless relaxation time is computed once per N; it converts to
    seconds as ``tau / J_c``.
    """
    chain = TABLE_CHAIN if chain is None else chain

    def per_size(n):
        params = ChainParams(n_sites=n, **chain)
        h = build_dynamical_matrix(params)
        cfg0 = SensorConfig(PhysicalParams.from_hz(scales_hz[0], trap_frequency_hz), params,
                            force_detuning, classical_noise)
        tau = relaxation_time(h, cfg0.unit_drive(), site=n).tau
        rows = []
        for hz in scales_hz:
            phys = PhysicalParams.from_hz(hz, trap_frequency_hz)
            cfg = SensorConfig(phys, params, force_detuning, classical_noise)
            rep = sensing_report(cfg, drive_to_force(drive_amplitude, phys), tau=tau, h=h)
            rows.append(TableRow(n, hz, rep.relaxation_time, rep.f_min_quantum,
                                 rep.sensitivity_quantum, rep.f_min_total,
                                 rep.sensitivity_total, rep.displacement_amplitude,
                                 rep.shot_noise))
        return rows

    return [r for rows in ordered_map(per_size, list(sizes), threads) for r in rows]


def fit_trap_frequency(f_min_target: float, f_min_reference: float,
                       reference_trap_frequency: float) -> float:
    """Trap frequency reproducing ``f_min_target`` given a value at a reference one.

    ``F_min`` scales as ``1/x0``, i.e. as ``sqrt(w_t)``.
    """
    if f_min_target <= 0 or f_min_reference <= 0:
        raise ConfigError("forces must be positive")
    return reference_trap_frequency * (f_min_target / f_min_reference) ** 2
