import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from diracstep.core import (
    BandCase,
    DomainError,
    ModeKind,
    PhysParams,
    classify_band,
    classify_mode,
    current_of_u,
    make_spinor,
    spinor_current,
    u_of_k,
    w_of_kappa,
    wavevector,
)

masses = st.floats(0.05, 5.0)
energies = st.floats(-30.0, 30.0)
potentials = st.floats(-20.0, 20.0)


def test_u_of_k_values():
    assert u_of_k(0.0, 1.0) == 0.0
    assert u_of_k(1.0, 1.0) == pytest.approx(1 / (1 + math.sqrt(2)), abs=1e-15)
    assert u_of_k(1e12, 1.0) == pytest.approx(1.0, abs=1e-11)
    assert u_of_k(3.0, 0.0) == 1.0


def test_u_of_k_rejects_negative_and_degenerate():
    with pytest.raises(DomainError):
        u_of_k(-1.0, 1.0)
    with pytest.raises(DomainError):
        u_of_k(0.0, 0.0)


def test_w_of_kappa_edges():
    assert w_of_kappa(0.0, 2.0) == 0.0
    assert w_of_kappa(2.0, 2.0) == 1.0
    with pytest.raises(DomainError):
        w_of_kappa(2.1, 2.0)


def test_current_of_u_unit_at_one():
    assert current_of_u(1.0) == 1.0
    assert current_of_u(0.0) == 0.0


@given(st.floats(0.0, 1e4), masses)
def test_current_identity(k, m):
    assert current_of_u(u_of_k(k, m)) == pytest.approx(k / math.hypot(m, k), abs=1e-12)


@given(st.floats(0.0, 1.0))
def test_w_bounded_by_one(kappa_frac):
    assert 0.0 <= w_of_kappa(kappa_frac, 1.0) <= 1.0


def test_mass_must_be_non_negative():
    with pytest.raises(DomainError):
        PhysParams(-1.0)


def test_classify_mode_kinds():
    p = PhysParams(1.0, 2.0)
    assert classify_mode(5.0, p).kind is ModeKind.PROPAGATING_POSITIVE
    assert classify_mode(-5.0, p).kind is ModeKind.PROPAGATING_NEGATIVE
    assert classify_mode(2.5, p).kind is ModeKind.EVANESCENT_PLUS
    assert classify_mode(1.5, p).kind is ModeKind.EVANESCENT_MINUS


def test_classify_mode_tie_breaks():
    p = PhysParams(1.0, 0.0)
    edge = classify_mode(1.0, p)
    assert edge.kind is ModeKind.PROPAGATING_POSITIVE and edge.wavenumber == 0.0
    assert classify_mode(-1.0, p).kind is ModeKind.PROPAGATING_NEGATIVE
    centre = classify_mode(0.0, p)
    assert centre.kind is ModeKind.EVANESCENT_PLUS and centre.wavenumber == 1.0 and centre.spinor_ratio == 1.0


@given(energies, potentials, masses, st.sampled_from([1, -1]))
def test_spinors_solve_the_plane_wave_equation(E, V, m, direction):
    mode = classify_mode(E, PhysParams(m, V))
    s = make_spinor(mode, direction).as_array()
    q = wavevector(mode, direction)
    H = np.array([[m, q], [q, -m]])
    scale = max(1.0, abs(E - V), m)
    assert np.allclose(H @ s, mode.eps * s, atol=1e-12 * scale)


@given(energies, potentials, masses)
def test_forward_spinor_carries_positive_current(E, V, m):
    mode = classify_mode(E, PhysParams(m, V))
    fwd = spinor_current(make_spinor(mode, 1))
    bwd = spinor_current(make_spinor(mode, -1))
    if mode.kind.is_propagating:
        assert fwd >= 0 and bwd <= 0 and fwd == pytest.approx(-bwd)
        assert fwd / make_spinor(mode, 1).norm2 == pytest.approx(mode.wavenumber / abs(mode.eps), abs=1e-12)
    else:
        assert fwd == 0.0 and bwd == 0.0


@given(energies, potentials, masses)
def test_evanescent_modes_decay_forward(E, V, m):
    mode = classify_mode(E, PhysParams(m, V))
    if mode.kind.is_evanescent:
        assert wavevector(mode, 1).imag > 0
        assert wavevector(mode, -1).imag < 0


@given(st.lists(energies, min_size=20, max_size=60), st.floats(0.0, 20.0), masses)
def test_band_tags_tile_the_energy_line(es, V0, m):
    """Sorted energies visit the tags in one fixed order; the gap and the Klein band never coexist."""
    order = [
        BandCase.FULLY_NEGATIVE,
        BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS,
        BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS,
        BandCase.GAP_NO_STATES,
        BandCase.KLEIN_TRANSMITTING,
        BandCase.FULL_REFLECT_LOWER,
        BandCase.FULL_REFLECT_UPPER,
        BandCase.ABOVE_STEP,
    ]
    tags = [classify_band(E, V0, m) for E in sorted(es)]
    ranks = [order.index(t) for t in tags]
    assert ranks == sorted(ranks)
    assert not (BandCase.GAP_NO_STATES in tags and BandCase.KLEIN_TRANSMITTING in tags)


@pytest.mark.parametrize(
    "E, V0, band",
    [
        (10.0, 3.0, BandCase.ABOVE_STEP),
        (3.5, 3.0, BandCase.FULL_REFLECT_UPPER),
        (2.5, 3.0, BandCase.FULL_REFLECT_LOWER),
        (1.5, 3.0, BandCase.KLEIN_TRANSMITTING),
        (0.5, 3.0, BandCase.EVAN_LEFT_TRAVEL_RIGHT_PLUS),
        (-0.5, 3.0, BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS),
        (-3.0, 3.0, BandCase.FULLY_NEGATIVE),
        (1.2, 0.5, BandCase.FULL_REFLECT_UPPER),
        (0.0, 0.5, BandCase.GAP_NO_STATES),
        (-0.7, 0.5, BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS),
        (1.5, 2.0, BandCase.FULL_REFLECT_LOWER),
    ],
)
def test_band_table(E, V0, band):
    assert classify_band(E, V0, 1.0) is band


def test_band_properties():
    assert BandCase.ABOVE_STEP.carries_current and not BandCase.ABOVE_STEP.full_reflection
    assert BandCase.FULL_REFLECT_LOWER.full_reflection
    assert not BandCase.EVAN_LEFT_TRAVEL_RIGHT_MINUS.incident_from_left


def test_classify_band_domain():
    with pytest.raises(DomainError):
        classify_band(1.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        classify_band(1.0, 1.0, 0.0)
