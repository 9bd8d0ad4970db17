"""Point-gap topology of the chain: winding numbers, doubled Hamiltonian,
symmetry classes and phase diagrams."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, GaplessPointError
from .model import (
    DEFAULT_TAIL_TOLERANCE,
    ChainParams,
    DynamicalMatrix,
    _frozen,
    bloch_cutoff,
    bloch_diagonal_derivatives,
    bloch_diagonals,
    bloch_grid,
    build_dynamical_matrix,
)
from .parallel import ordered_map
from .steadystate import STABILITY_TOLERANCE, stability

DEFAULT_K_POINTS = 2048
GAP_TOLERANCE = 1e-12
QUANTIZATION_TOLERANCE = 0.01


@dataclass(frozen=True)
class WindingResult:
    omega: float
    nu: int
    raw_integral: float
    k_points_used: int
    max_phase_step: float

    @property
    def quantized(self) -> bool:
        return abs(self.raw_integral - self.nu) < QUANTIZATION_TOLERANCE


def _det(params: ChainParams, omega: float, h11, h22):
    return (omega - h11) * (omega - h22) + params.g**2


def _det_at(params: ChainParams, omega: float, k: float, n_max: int) -> complex:
    h11, h22 = bloch_diagonals(params, np.array([k]), n_max)
    return complex(_det(params, omega, h11, h22)[0])


def winding_number(params: ChainParams, omega: float = 0.0,
                   k_points: int = DEFAULT_K_POINTS,
                   tail_tolerance: float = DEFAULT_TAIL_TOLERANCE,
                   max_step: float = math.pi / 2, max_depth: int = 20,
                   gap_tolerance: float = GAP_TOLERANCE) -> WindingResult:
    """Winding of det(w - H(k)) around the origin as k runs over the zone.

    Phase increments are taken between neighbouring k samples; any interval
    whose increment exceeds ``max_step`` is bisected.
    """
    n_max = bloch_cutoff(params, tail_tolerance)
    ks = np.append(bloch_grid(k_points), np.pi)
    h11, h22 = bloch_diagonals(params, k_points, n_max, on_grid=True)
    dets = _det(params, omega, h11, h22)
    dets = np.append(dets, dets[0])  # k = pi is k = -pi

    extra = 0
    min_abs = float(np.min(np.abs(dets)))
    where = float(ks[int(np.argmin(np.abs(dets)))])

    def refine(ka, da, kb, db, depth):
        nonlocal extra, min_abs, where
        step = float(np.angle(db / da))
        if abs(step) <= max_step:
            return step, abs(step)
        if depth >= max_depth:
            raise GaplessPointError(
                f"phase of det(w - H(k)) jumps near k={0.5 * (ka + kb):.6f}",
                k=0.5 * (ka + kb), min_abs_det=min(abs(da), abs(db)),
            )
        km = 0.5 * (ka + kb)
        dm = _det_at(params, omega, km, n_max)
        extra += 1
        if abs(dm) < min_abs:
            min_abs, where = abs(dm), km
        s1, m1 = refine(ka, da, km, dm, depth + 1)
        s2, m2 = refine(km, dm, kb, db, depth + 1)
        return s1 + s2, max(m1, m2)

    if min_abs < gap_tolerance:
        raise GaplessPointError(f"|det| = {min_abs:.2e} at k={where:.6f}", k=where,
                                min_abs_det=min_abs)
    steps = np.angle(dets[1:] / dets[:-1])
    total = 0.0
    biggest = 0.0
    for i in np.flatnonzero(np.abs(steps) > max_step):
        s, m = refine(ks[i], dets[i], ks[i + 1], dets[i + 1], 0)
        steps[i] = s
        biggest = max(biggest, m)
    if min_abs < gap_tolerance:
        raise GaplessPointError(f"|det| = {min_abs:.2e} at k={where:.6f}", k=where,
                                min_abs_det=min_abs)
    unrefined = np.abs(steps) <= max_step
    if unrefined.any():
        biggest = max(biggest, float(np.max(np.abs(steps[unrefined]))))
    total = float(np.sum(steps))
    raw = total / (2.0 * math.pi)
    return WindingResult(float(omega), int(round(raw)), raw, k_points + extra, biggest)


def winding_number_doubled(params: ChainParams, omega: float = 0.0, k_points: int = 4096,
                           tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> WindingResult:
    """Winding from the chiral doubled matrix, int dk/(4 pi i) Tr[S H^-1 dH/dk].

    Here ``S = diag(1, -1)`` puts +1 on the row block holding ``w - H``.  With
    that orientation the result is the negative of :func:`winding_number`.
    """
    n_max = bloch_cutoff(params, tail_tolerance)
    h11, h22 = bloch_diagonals(params, k_points, n_max, on_grid=True)
    d11, d22 = bloch_diagonal_derivatives(params, k_points, n_max, on_grid=True)
    k = k_points
    a = np.zeros((k, 2, 2), dtype=complex)
    a[:, 0, 0] = omega - h11
    a[:, 1, 1] = omega - h22
    a[:, 0, 1] = -params.g
    a[:, 1, 0] = params.g
    da = np.zeros((k, 2, 2), dtype=complex)
    da[:, 0, 0] = -d11
    da[:, 1, 1] = -d22
    zero = np.zeros_like(a)
    big = np.block([[zero, a], [a.conj().transpose(0, 2, 1), zero]])
    dbig = np.block([[zero, da], [da.conj().transpose(0, 2, 1), zero]])
    s = np.diag([1.0, 1.0, -1.0, -1.0])
    integrand = np.trace(s @ np.linalg.inv(big) @ dbig, axis1=1, axis2=2)
    raw_c = np.mean(integrand) * 2.0 * math.pi / (4.0 * math.pi * 1j)
    raw = float(raw_c.real)
    return WindingResult(float(omega), int(round(raw)), raw, k_points, float("nan"))


def find_winding_transition(params: ChainParams, lo: float, hi: float, omega: float = 0.0,
                            xtol: float = 1e-6, **kwargs) -> float:
    """Bisect in gamma for the point where the winding number changes."""
    def nu(gamma):
        try:
            return winding_number(params.replace(gamma=gamma), omega, **kwargs).nu
        except GaplessPointError:
            return None

    n_lo, n_hi = nu(lo), nu(hi)
    if n_lo is None or n_hi is None or n_lo == n_hi:
        raise ConsistencyError(f"no winding change bracketed by gamma in [{lo}, {hi}]")
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        n_mid = nu(mid)
        if n_mid is None:
            return mid
        if n_mid == n_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- doubled matrix and symmetry classes -----------------------------------

@dataclass(frozen=True)
class DoubledMatrix:
    omega: float
    entries: np.ndarray

    @property
    def chiral_operator(self) -> np.ndarray:
        m = self.entries.shape[0] // 2
        return np.diag(np.r_[np.ones(m), -np.ones(m)])


def doubled_matrix(h: DynamicalMatrix, omega: float) -> DoubledMatrix:
    """Hermitian 4N x 4N matrix [[0, w - H], [w - H^dag, 0]]."""
    a = omega * np.eye(h.size) - h.entries
    z = np.zeros_like(a)
    return DoubledMatrix(float(omega), _frozen(np.block([[z, a], [a.conj().T, z]])))


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]])
_SZ = np.diag([1.0, -1.0]).astype(complex)
_ID = np.eye(2, dtype=complex)
_TP = np.array([[0, 1], [0, 0]], dtype=complex)
_TM = _TP.T.copy()


def bloch_doubled(params: ChainParams, k: float, omega: float,
                  tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> np.ndarray:
    """4x4 doubled Bloch matrix (w - H(k)) (x) tau+ + (w - H(k)^dag) (x) tau-."""
    n_max = bloch_cutoff(params, tail_tolerance)
    h11, h22 = bloch_diagonals(params, np.array([k]), n_max)
    hk = np.array([[h11[0], params.g], [-params.g, h22[0]]])
    a = omega * _ID - hk
    return np.kron(a, _TP) + np.kron(a.conj().T, _TM)


_RELATIONS = {
    "BDI": (np.kron(_SX, _SZ), np.kron(_SX, _ID)),
    "CI": (np.kron(_SZ, _SX), np.kron(_SZ, _SY)),
}


def symmetry_relations(params: ChainParams, omega: float, ks=None) -> dict:
    """Largest residuals of U_T H(k)* U_T^dag = H(-k), U_C H(k)* U_C^dag = -H(-k)
    for the BDI and CI operator pairs, plus the chiral relation."""
    if ks is None:
        ks = np.linspace(-np.pi, np.pi, 9)[1:-1] + 0.1234
    out = {f"{c}_{t}": 0.0 for c in _RELATIONS for t in ("T", "C")}
    out["chiral"] = 0.0
    chiral = np.kron(_ID, _SZ)
    for k in ks:
        hp = bloch_doubled(params, k, omega)
        hm = bloch_doubled(params, -k, omega)
        for cls, (ut, uc) in _RELATIONS.items():
            rt = np.max(np.abs(ut @ hp.conj() @ ut.conj().T - hm))
            rc = np.max(np.abs(uc @ hp.conj() @ uc.conj().T + hm))
            out[f"{cls}_T"] = max(out[f"{cls}_T"], float(rt))
            out[f"{cls}_C"] = max(out[f"{cls}_C"], float(rc))
        out["chiral"] = max(out["chiral"], float(np.max(np.abs(chiral @ hp @ chiral + hp))))
    return out


def symmetry_class(params: ChainParams, omega: float, tolerance: float = 1e-12) -> str:
    """AIII, BDI or CI, with the defining relations checked on a k sample."""
    dphi = params.delta_phi
    if abs(dphi) < tolerance or abs(abs(dphi) - math.pi) < tolerance:
        label = "CI"
    elif omega == 0:
        label = "BDI"
    else:
        label = "AIII"
    res = symmetry_relations(params, omega)
    if res["chiral"] > tolerance:
        raise ConsistencyError(f"chiral relation fails: {res['chiral']:.2e}")
    if label == "AIII":
        for cls in _RELATIONS:
            if max(res[f"{cls}_T"], res[f"{cls}_C"]) <= tolerance:
                raise ConsistencyError(f"AIII point unexpectedly satisfies the {cls} relations")
    elif max(res[f"{label}_T"], res[f"{label}_C"]) > tolerance:
        raise ConsistencyError(f"{label} relations fail: {res}")
    return label


# -- phase diagram -----------------------------------------------------------

LABELS = ("topological-stable", "topological-unstable", "trivial-stable", "trivial-unstable")


@dataclass(frozen=True)
class PhasePoint:
    gamma: float
    delta_phi: float
    nu: int | None
    stable: bool
    margin: float
    label: str
    status: str = "ok"


def classify_point(params: ChainParams, omega: float = 0.0,
                   k_points: int = DEFAULT_K_POINTS,
                   stability_tolerance: float = STABILITY_TOLERANCE,
                   tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> PhasePoint:
    rep = stability(build_dynamical_matrix(params), stability_tolerance)
    try:
        nu = winding_number(params, omega, k_points=k_points,
                            tail_tolerance=tail_tolerance).nu
    except GaplessPointError:
        return PhasePoint(params.gamma, params.delta_phi, None, rep.stable, rep.margin,
                          "boundary", "boundary")
    topo = "topological" if nu != 0 else "trivial"
    stab = "stable" if rep.stable else "unstable"
    return PhasePoint(params.gamma, params.delta_phi, nu, rep.stable, rep.margin,
                      f"{topo}-{stab}")


def phase_diagram(gammas, delta_phis, template: ChainParams, omega: float = 0.0,
                  k_points: int = DEFAULT_K_POINTS, threads: int | None = 1,
                  stability_tolerance: float = STABILITY_TOLERANCE,
                  tail_tolerance: float = DEFAULT_TAIL_TOLERANCE) -> list[PhasePoint]:
    """Winding + finite-chain stability on a gamma x delta_phi grid (gamma outer)."""
    grid = [(float(g), float(p)) for g in gammas for p in delta_phis]

    def one(gp):
        g, p = gp
        return classify_point(template.replace(gamma=g, delta_phi=p), omega, k_points,
                              stability_tolerance, tail_tolerance)

    return ordered_map(one, grid, threads)
