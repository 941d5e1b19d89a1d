import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolefade.geometry import (
    E_X,
    E_Z,
    ChannelCoefficient,
    ComplexFieldVector,
    LinkGeometry,
    RegionKind,
    UnitVector3,
    alignment_factors,
    beta_ff,
    beta_nf,
    channel_coefficient,
    channel_matrix,
    field_vector,
    h_coax,
    h_copl,
    halfwave_pattern_exact,
    kr_threshold,
    mutual_inductance,
    optimal_pte,
    prefactor_dipole,
    prefactor_loop,
    scaled_far_field,
    scaled_near_field,
    simo_mrc_magnitude,
    weak_coupling_check,
)

unit = st.tuples(*[st.floats(-1, 1) for _ in range(3)]).filter(lambda v: np.linalg.norm(v) > 1e-3)
kr_st = st.floats(1e-2, 1e3)


def test_kr_threshold_reference_value():
    # reference value of the crossover, 2.3540
    assert round(kr_threshold(), 4) == 2.3540


def test_coax_copl_frozen_values():
    # oracle: kr = 1, alpha_bar = 1: alpha = e^{-j}, near coefficient 1 + j, far 1/2
    a = cmath.exp(-1j)
    assert h_coax(1.0, 1.0) == pytest.approx(a * (1 + 1j), rel=1e-15)
    assert h_copl(1.0, 1.0) == pytest.approx(a * (0.5 - 0.5 * (1 + 1j)), rel=1e-15)


def test_optimal_pte_switches_at_threshold():
    t = kr_threshold()
    assert optimal_pte(t * 0.9) == pytest.approx(abs(h_coax(t * 0.9)) ** 2)
    assert optimal_pte(t * 1.1) == pytest.approx(abs(h_copl(t * 1.1)) ** 2)


def test_unit_vector_normalizes_and_rejects_zero():
    u = UnitVector3(3.0, 0.0, 4.0)
    assert np.allclose(u.as_array(), [0.6, 0.0, 0.8])
    with pytest.raises(ValueError):
        UnitVector3(0.0, 0.0, 1e-12)


def test_region_parse():
    assert RegionKind.parse("near") is RegionKind.NEAR_FIELD
    assert RegionKind.parse(RegionKind.FAR_FIELD) is RegionKind.FAR_FIELD
    with pytest.raises(ValueError):
        RegionKind.parse("middle")


def test_link_geometry_rejects_bad_kr():
    with pytest.raises(ValueError):
        LinkGeometry(0.0, E_Z, E_Z)


def test_scaled_fields_trivial_cases():
    # coaxial: b_nf = d, b_ff = 0; side-by-side: b_nf = -o/2, b_ff = o
    assert np.allclose(scaled_near_field(E_Z, E_Z), [0, 0, 1])
    assert np.allclose(scaled_far_field(E_Z, E_Z), 0)
    assert np.allclose(scaled_near_field(E_Z, E_X), [-0.5, 0, 0])
    assert np.allclose(scaled_far_field(E_Z, E_X), [1, 0, 0])


@given(unit, unit)
def test_field_magnitudes_follow_projection(d, o):
    d, o = UnitVector3.of(d), UnitVector3.of(o)
    x = d.dot(o)
    assert np.linalg.norm(scaled_near_field(d, o)) == pytest.approx(float(beta_nf(x)), abs=1e-12)
    # squared: the square root amplifies rounding near |x| = 1
    assert np.sum(scaled_far_field(d, o) ** 2) == pytest.approx(float(beta_ff(x)) ** 2, abs=1e-12)


@given(kr_st, unit, unit, unit)
def test_bilinear_form_matches_channel(kr, d, o_tx, o_rx):
    g = LinkGeometry(kr, UnitVector3.of(o_tx), UnitVector3.of(o_rx), UnitVector3.of(d))
    a = channel_matrix(kr, 1e-2, g.d)
    h = channel_coefficient(g).value
    assert np.asarray(g.o_rx) @ a @ np.asarray(g.o_tx) == pytest.approx(h, rel=1e-10, abs=1e-14 * abs(a).max())
    j_nf, j_ff = alignment_factors(g)
    assert -1 - 1e-12 <= j_nf <= 1 + 1e-12
    assert -1 - 1e-12 <= j_ff <= 1 + 1e-12


@settings(max_examples=50)
@given(kr_st, unit, unit)
def test_field_vector_is_matrix_column_combination(kr, d, o):
    v = field_vector(kr, 1e-2, d, o)
    a = channel_matrix(kr, 1e-2, d)
    assert np.allclose(v.components, a @ UnitVector3.of(o).as_array(), rtol=1e-12, atol=1e-15 * abs(a).max())
    assert simo_mrc_magnitude(v) == pytest.approx(np.linalg.norm(v.components))


def test_degeneracy_flags():
    # coaxial, perpendicular and generic TX orientations
    assert not field_vector(2.0, 1e-2, E_Z, E_Z).linearly_independent
    assert not field_vector(2.0, 1e-2, E_Z, E_X).linearly_independent
    x = 0.3
    o = UnitVector3(math.sqrt(1 - x * x), 0.0, x)
    assert field_vector(2.0, 1e-2, E_Z, o).linearly_independent
    # a real vector is degenerate without any dot information
    assert not ComplexFieldVector(np.array([1.0, 2.0, 0.0])).linearly_independent


def test_channel_coefficient_pte():
    assert ChannelCoefficient(3 + 4j).pte == pytest.approx(25.0)


def test_weak_coupling_is_strict():
    assert weak_coupling_check(0.0999 + 0j)
    assert not weak_coupling_check(0.1 + 0j)
    assert weak_coupling_check(ChannelCoefficient(0.01 + 0.01j))


def test_prefactor_helpers():
    assert prefactor_dipole() == 1.5
    assert prefactor_dipole("halfwave") == 1.64
    with pytest.raises(ValueError):
        prefactor_dipole("loop")
    v = prefactor_loop(4e-7 * math.pi, 1e-4, 10, 1e-4, 10, 1e6, 0.02, 1.0, 1.0)
    assert v.real == 0 and v.imag > 0
    with pytest.raises(ValueError):
        prefactor_loop(1, 1, 1, 1, 1, 1, 1, 0.0, 1)
    assert mutual_inductance(1.0, 1, 1, 1, 1, 1.0, 2 * math.pi) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mutual_inductance(1.0, 1, 1, 1, 1, 0.0, 1.0)


def test_halfwave_pattern():
    assert halfwave_pattern_exact(math.pi / 2) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        halfwave_pattern_exact(0.0)
