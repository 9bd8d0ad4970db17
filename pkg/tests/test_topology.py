import math

import numpy as np
import pytest

from parachain.errors import ConsistencyError, GaplessPointError
from parachain.model import ChainParams, build_dynamical_matrix
from parachain.topology import (
    DEFAULT_K_POINTS,
    classify_point,
    doubled_matrix,
    find_winding_transition,
    phase_diagram,
    symmetry_class,
    symmetry_relations,
    winding_number,
    winding_number_doubled,
)
from parachain.response import svd_of_inverse_propagator

TOPO = ChainParams(2, 1.0, 1.0, 1.0, math.pi / 4)


def test_topological_point_winds():
    r = winding_number(TOPO, 0.0)
    assert abs(r.nu) == 1
    assert r.quantized
    assert r.max_phase_step <= math.pi / 2


def test_time_reversal_partner_flips_sign():
    assert winding_number(TOPO.replace(delta_phi=-math.pi / 4)).nu == -winding_number(TOPO).nu


def test_trivial_without_phase_gradient():
    assert winding_number(TOPO.replace(delta_phi=0.0, gamma=2.5)).nu == 0


@pytest.mark.parametrize("dphi", [0.0, math.pi])
def test_real_determinant_closes_point_gap(dphi):
    # without a phase gradient det(-H(k)) = g^2 - gamma^2/4 - E(k)^2 is real,
    # so for gamma < 2g it crosses zero somewhere on the zone
    with pytest.raises(GaplessPointError):
        winding_number(TOPO.replace(delta_phi=dphi), 0.0)


def test_trivial_at_large_loss():
    assert winding_number(TOPO.replace(gamma=3.0)).nu == 0


def test_no_parametric_drive_no_gap_closing_needed():
    # g = 0 decouples particle and hole bands; each encircles w only if loss is small
    assert winding_number(ChainParams(2, 5.0, 0.0, 1.0, 0.5)).nu == 0


def test_grid_independence():
    a = winding_number(TOPO, 0.0, k_points=256)
    b = winding_number(TOPO, 0.0, k_points=8192)
    assert a.nu == b.nu
    assert a.raw_integral == pytest.approx(b.raw_integral, abs=1e-9)


def test_doubled_formula_agrees_up_to_orientation():
    for p in (TOPO, TOPO.replace(delta_phi=-0.6), TOPO.replace(gamma=2.5)):
        assert winding_number_doubled(p, 0.0).nu == -winding_number(p, 0.0).nu


def test_gapless_point_raises():
    # the transition is where det(w - H(k)) hits zero on the zone
    gc = find_winding_transition(TOPO.replace(hopping_range=1), 1.5, 2.2, xtol=1e-13)
    with pytest.raises(GaplessPointError):
        winding_number(TOPO.replace(hopping_range=1, gamma=gc), 0.0, gap_tolerance=1e-6)


def test_nearest_neighbour_transition_frozen():
    gc = find_winding_transition(TOPO.replace(hopping_range=1), 1.5, 2.2, xtol=1e-9)
    assert gc == pytest.approx(1.8203594420570886, abs=1e-8)


def test_full_tail_transition_frozen():
    gc = find_winding_transition(TOPO, 1.5, 2.2, xtol=1e-9)
    assert gc == pytest.approx(1.8470586258452384, abs=1e-8)


def test_transition_needs_bracket():
    with pytest.raises(ConsistencyError):
        find_winding_transition(TOPO, 2.5, 3.0)


def test_doubled_matrix_is_chiral_hermitian():
    h = build_dynamical_matrix(ChainParams(5, 0.4, 0.9, 1.1, 0.8))
    d = doubled_matrix(h, 0.3)
    np.testing.assert_allclose(d.entries, d.entries.conj().T, atol=0)
    s = d.chiral_operator
    np.testing.assert_allclose(s @ d.entries @ s, -d.entries, atol=0)
    ev = np.sort(np.abs(np.linalg.eigvalsh(d.entries)))
    sv = np.sort(np.linalg.svd(0.3 * np.eye(10) - h.entries, compute_uv=False))
    np.testing.assert_allclose(ev[::2], sv, atol=1e-12)
    np.testing.assert_allclose(ev[1::2], sv, atol=1e-12)


@pytest.mark.parametrize("dphi,omega,label", [
    (0.0, 0.3, "CI"), (math.pi, 0.3, "CI"), (0.0, 0.0, "CI"),
    (math.pi / 4, 0.0, "BDI"), (math.pi / 4, 0.5, "AIII"), (-1.0, 0.2, "AIII"),
])
def test_symmetry_classes(dphi, omega, label):
    assert symmetry_class(TOPO.replace(delta_phi=dphi), omega) == label


def test_relations_residuals():
    r = symmetry_relations(TOPO, 0.0)
    assert max(r["BDI_T"], r["BDI_C"], r["chiral"]) < 1e-12
    assert r["CI_T"] > 1e-3


def test_classify_and_phase_diagram_labels():
    pts = phase_diagram([1.0, 1.7, 3.0], [0.0, math.pi / 4], ChainParams(20, 1.0, 1.0, 1.0, 0.0),
                        k_points=512)
    assert [(p.gamma, p.delta_phi) for p in pts] == [
        (1.0, 0.0), (1.0, math.pi / 4), (1.7, 0.0), (1.7, math.pi / 4),
        (3.0, 0.0), (3.0, math.pi / 4)]
    labels = {(p.gamma, round(p.delta_phi, 3)): p.label for p in pts}
    assert labels[(1.0, 0.0)] == "boundary"
    assert labels[(1.0, 0.785)] == "topological-unstable"
    assert labels[(1.7, 0.785)] == "topological-stable"
    assert labels[(3.0, 0.0)] == "trivial-stable"
    assert labels[(3.0, 0.785)] == "trivial-stable"
    assert classify_point(ChainParams(20, 1.0, 1.0, 0.5, 0.3)).stable is False


def test_winding_agrees_with_svd_edge():
    for dphi, gamma in ((0.0, 2.5), (math.pi / 4, 1.0), (-math.pi / 3, 1.2), (2.5, 1.0)):
        p = ChainParams(20, 1.0, 1.0, gamma, dphi)
        nu = winding_number(p, 0.0, k_points=DEFAULT_K_POINTS).nu
        assert (nu != 0) == svd_of_inverse_propagator(build_dynamical_matrix(p), 0.0).has_edge
