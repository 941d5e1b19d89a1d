import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dipolefade.geometry import E_Z, UnitVector3, optimal_pte
from dipolefade.montecarlo import (
    CHUNK,
    Ecdf,
    chunk_rng,
    ecdf,
    misalignment_loss_cdf,
    normalized_pte,
    sample_alignment,
    sample_channel,
    sample_field_magnitude,
    sample_projection,
    sample_unit_sphere,
    sample_unit_sphere_array,
    sphere_from_uniforms,
    transmit_orientation,
)


def test_sphere_points_are_unit():
    p = sample_unit_sphere_array(1000, seed=3)
    assert np.allclose(np.linalg.norm(p, axis=1), 1.0)
    assert isinstance(sample_unit_sphere(np.random.default_rng(0)), UnitVector3)


def test_sphere_first_moments():
    # mean 0 and covariance I/3 for a uniform sphere point
    p = sample_unit_sphere_array(200_000, seed=1)
    assert np.allclose(p.mean(0), 0, atol=5e-3)
    assert np.allclose(np.cov(p.T), np.eye(3) / 3, atol=5e-3)


def test_sphere_from_uniforms_corners():
    assert np.allclose(sphere_from_uniforms(1.0, 0.0), [0, 0, 1])
    assert np.allclose(sphere_from_uniforms(0.5, 0.25), [0, 1, 0], atol=1e-15)


def test_seed_validation():
    with pytest.raises(ValueError):
        chunk_rng(-1, 0)
    with pytest.raises(ValueError):
        sample_projection(0)


@settings(max_examples=10, deadline=None)
@given(st.integers(1, 3 * CHUNK), st.integers(0, 2**64 - 1))
def test_draws_are_prefix_stable(n, seed):
    # draw i depends only on (seed, i)
    long = sample_projection(3 * CHUNK + 5, seed).values
    assert np.array_equal(sample_projection(n, seed).values, long[:n])


def test_threads_do_not_change_output():
    a = sample_channel(5 * CHUNK + 17, 2.0, seed=9, threads=1).values
    b = sample_channel(5 * CHUNK + 17, 2.0, seed=9, threads=4).values
    assert np.array_equal(a, b)


def test_different_seeds_differ():
    assert not np.array_equal(sample_projection(100, 0).values, sample_projection(100, 1).values)


def test_rx_random_mode_and_meta():
    s = sample_channel(1000, 2.0, mode="rx-random", dot=0.3)
    assert s.meta["scenario"] == "rx_random"
    assert s.meta["o_tx"].dot(E_Z) == pytest.approx(0.3)
    with pytest.raises(ValueError):
        sample_channel(10, 2.0, mode="rx_random")
    with pytest.raises(ValueError):
        sample_channel(10, 2.0, mode="tx_random")
    with pytest.raises(ValueError):
        sample_channel(10, -1.0)


@given(st.floats(-1, 1))
def test_transmit_orientation(dot):
    o = transmit_orientation(dot)
    assert o.dot(E_Z) == pytest.approx(dot, abs=1e-12)


def test_pte_never_exceeds_optimum():
    s = sample_channel(50_000, 1.3, seed=2)
    assert np.all(normalized_pte(s) <= 1 + 1e-12)
    assert np.allclose(s.pte, np.abs(s.values) ** 2)
    assert optimal_pte(1.3) > 0


def test_alignment_and_magnitude_ranges():
    j = sample_alignment(10_000, "near").values
    assert np.all(np.abs(j) <= 1)
    b = sample_field_magnitude(10_000, "near").values
    assert np.all((b >= 0.5 - 1e-12) & (b <= 1 + 1e-12))
    with pytest.raises(ValueError):
        sample_alignment(10, "transition")
    with pytest.raises(ValueError):
        sample_field_magnitude(10, "transition")


def test_ecdf_behaviour():
    e = Ecdf.from_values([3.0, 1.0, 2.0, 2.0])
    assert np.allclose(e([0.5, 1.0, 2.0, 5.0]), [0, 0.25, 0.75, 1.0])
    assert e.quantile(0.5) == pytest.approx(2.0)
    assert e.quantile(0.0) == 1.0 and e.quantile(1.0) == 3.0
    with pytest.raises(ValueError):
        e.quantile(1.5)
    with pytest.raises(ValueError):
        Ecdf.from_values([])


def test_ecdf_transforms():
    s = sample_channel(100, 2.0)
    assert np.allclose(ecdf(s, "magnitude").sorted_values ** 2, ecdf(s).sorted_values)
    with pytest.raises(ValueError):
        ecdf(s, "raw")
    with pytest.raises(ValueError):
        ecdf(s, "phase")
    assert len(ecdf(sample_projection(10), "raw")) == 10


def test_loss_cdf_curves():
    curves = misalignment_loss_cdf([0.1, 100.0], 20_000)
    for c in curves.values():
        assert c.kind == "cdf1d"
        assert np.all(np.diff(c.density) >= 0)
        assert c.density[-1] == pytest.approx(1.0)
