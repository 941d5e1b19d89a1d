import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dipolefade.quadrature import (
    GAUSS_WEIGHTS,
    KRONROD_WEIGHTS,
    NODES,
    QuadratureError,
    integrate,
    integrate_batch,
)


@pytest.mark.parametrize("deg", range(0, 23))
def test_kronrod_exact_to_degree_22(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert np.dot(KRONROD_WEIGHTS, NODES**deg) == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("deg", range(0, 14))
def test_gauss_exact_to_degree_13(deg):
    exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
    assert np.dot(GAUSS_WEIGHTS, NODES**deg) == pytest.approx(exact, abs=1e-14)


def test_endpoint_singularity():
    # integral of 1/sqrt(x) over (0, 1) is 2
    v, _ = integrate(lambda x: 1 / np.sqrt(x), [0.0, 1.0], epsrel=1e-7)
    assert v == pytest.approx(2.0, rel=1e-7)


def test_breakpoints_and_smooth():
    v, err = integrate(np.cos, [0.0, 1.0, math.pi / 2], epsrel=1e-12)
    assert v == pytest.approx(1.0, rel=1e-12)
    assert err < 1e-10


def test_bad_breakpoints():
    with pytest.raises(ValueError):
        integrate(np.cos, [1.0, 0.0])


def test_strict_failure_raises():
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.sin(1 / x) / x, [1e-9, 1.0], epsrel=1e-14, max_levels=3)


@given(st.lists(st.floats(0.1, 10.0), min_size=1, max_size=8))
def test_batch_results_independent_of_companions(scales):
    # each problem integrates exp(-c x) over (0, 1); result must not depend on the batch
    c = np.array(scales)

    def f(x, own):
        return np.exp(-c[own][:, None] * x)

    alone = [integrate_batch(lambda x, o, k=k: np.exp(-c[k] * x), [0.0], [1.0]).value[0] for k in range(len(c))]
    batch = integrate_batch(f, np.zeros(len(c)), np.ones(len(c))).value
    assert np.array_equal(batch, np.array(alone))
    assert np.allclose(batch, -np.expm1(-c) / c, rtol=1e-10)
