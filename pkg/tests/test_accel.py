"""The compiled kernels and their pure-numpy twins must agree exactly enough."""

import numpy as np
import pytest

from wavegs import _accel


@pytest.fixture(scope="module")
def rng():
    return np.random.default_rng(99)


def test_quasipoly_paths_agree(rng):
    v = rng.standard_normal(4096)
    amps = np.array([1.0, 0.4])
    exps = np.array([3.0, 4.5])
    f_fast = _accel.quasipoly_f(v, amps, exps)
    f_ref = _accel.quasipoly_f_numpy(v, amps, exps)
    np.testing.assert_allclose(f_fast, f_ref, rtol=1e-13, atol=1e-13)
    F_fast = _accel.quasipoly_prim(v, amps, exps)
    F_ref = _accel.quasipoly_prim_numpy(v, amps, exps)
    np.testing.assert_allclose(F_fast, F_ref, rtol=1e-13, atol=1e-13)


def test_torus_l_sums_paths_agree():
    nu = np.arange(0, 40, dtype=np.int64)
    a = _accel.torus_l_sums(nu, 2, 2.0)
    b = _accel.torus_l_sums_numpy(nu, 2, 2.0)
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_sphere_series_paths_agree():
    js = np.arange(-6, 7, dtype=np.int64)
    for kg in (False, True):
        a = _accel.sphere_series_inner(js, 3, 2, 3.0, 1.0, 500, kg)
        b = _accel.sphere_series_inner_numpy(js, 3, 2, 3.0, 1.0, 500, kg)
        np.testing.assert_allclose(a, b, rtol=1e-12)


def test_gap_ratio_paths_agree():
    a = _accel.gap_ratio_scan(2, 2, 400)
    b = _accel.gap_ratio_scan_numpy(2, 2, 400)
    assert a[0] == pytest.approx(b[0], rel=1e-12)
    assert a[1] == pytest.approx(b[1], rel=1e-12)


def test_slice_counts_paths_agree(rng):
    mask = (rng.uniform(size=(128, 128)) < 0.3).astype(np.uint8)
    a0, b0 = _accel.char_slice_counts(mask)
    a1, b1 = _accel.char_slice_counts_numpy(mask)
    np.testing.assert_array_equal(a0, a1)
    np.testing.assert_array_equal(b0, b1)


def test_flag_is_reported():
    assert isinstance(_accel.NUMBA_ENABLED, bool)
