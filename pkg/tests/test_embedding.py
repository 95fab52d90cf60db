import math
from fractions import Fraction

import numpy as np
import pytest

from wavegs import (
    gap_ratio_bracket,
    noncompact_witness,
    resonant_offset,
    sphere_embedding_series,
    sphere_mode_shift,
    torus_gap_series,
)


def test_torus_series_circle_beam_converges():
    rep = torus_gap_series(1, 2, 4.0, cutoff=200)
    assert rep.verdict == "converges"
    assert math.isinf(rep.p_star)
    assert rep.tail_exponent < -1.1
    # partial sums are monotone
    assert np.all(np.diff(np.cumsum(rep.term_sums)) >= 0)


def test_torus_series_wave_on_t2_diverges_by_witness():
    rep = torus_gap_series(2, 1, 3.0)
    assert rep.verdict == "diverges"
    assert rep.witness[0] == {"k": [1, 1], "l": 1, "lambda": 1}
    assert all(entry["lambda"] == 1 for entry in rep.witness)


def test_torus_series_biharmonic_t2_converges():
    rep = torus_gap_series(2, 2, 3.0, cutoff=48)
    assert rep.verdict == "converges"
    assert rep.tail_exponent < -1.1
    assert math.isinf(rep.p_star)  # 2N/(N-m)_+ with N = m = 2


def test_torus_series_thresholds_and_errors():
    assert torus_gap_series(3, 2, 3.0, cutoff=12).p_star == pytest.approx(6.0)
    with pytest.raises(ValueError):
        torus_gap_series(2, 2, 2.0)
    with pytest.raises(ValueError):
        torus_gap_series(2, 3, 3.0)  # odd m >= 3: open case


def test_torus_series_shell_exponent_matches_theory():
    # per-shell sums scale like r^(N - 1 - m p/(p-2))
    rep = torus_gap_series(1, 2, 4.0, cutoff=200)
    assert rep.tail_exponent == pytest.approx(-4.0, abs=0.1)
    rep2 = torus_gap_series(2, 2, 3.0, cutoff=48)
    assert rep2.tail_exponent == pytest.approx(-5.0, abs=0.2)


def test_mode_shift_examples():
    k_star, k_l = sphere_mode_shift(1, 2, 9)
    assert k_star == pytest.approx(3.0) and k_l == 3
    k_star, k_l = sphere_mode_shift(2, 2, 6)
    assert k_star == pytest.approx(2.0) and k_l == 2  # k(k+1) = 6 exactly
    k_star, k_l = sphere_mode_shift(3, 2, 5)
    assert k_star == pytest.approx(math.sqrt(6) - 1)
    assert k_l == 1


def test_mode_shift_rounding_slack():
    for l in range(1, 300):
        k_star, k_l = sphere_mode_shift(3, 2, l)
        assert abs(k_l - k_star) <= 0.5 + 1e-12


def test_mode_shift_near_optimality():
    # for every l: the gap at k_l is neighbor-optimal, or k_l is within the
    # half-integer rounding slack of the exact resonance degree
    N, m = 2, 2
    for l in range(1, 500):
        k_star, k_l = sphere_mode_shift(N, m, l)
        gap = abs((k_l * (k_l + N - 1)) ** m - l * l)
        neighbor_optimal = all(
            gap <= abs((o * (o + N - 1)) ** m - l * l)
            for o in (k_l - 1, k_l + 1)
            if o >= 0
        )
        assert neighbor_optimal or abs(k_l - k_star) <= 0.5 + 1e-12


def test_resonant_offsets():
    assert resonant_offset(3, 2, 5) == -1
    assert resonant_offset(1, 2, 3) == 0
    assert resonant_offset(3, 2, 10) == -1
    with pytest.raises(ValueError):
        resonant_offset(5, 2, 1)  # r too small
    # certification: l = r^m + s*(r) resonates with degree k = r - (N-1)/2
    for r in (5, 10, 17):
        s = resonant_offset(3, 2, r)
        l = r**2 + s
        k = r - 1
        assert (k * (k + 2)) ** 2 == l * l


def test_resonant_offset_rational_when_not_integral():
    val = resonant_offset(2, 2, 3)  # (9 - 1/4) - 9 = -1/4
    assert val == Fraction(-1, 4)


def test_sphere_series_biharmonic_s2_converges():
    rep = sphere_embedding_series(2, 2, 3.0, j_cut=48, l_cut=4000)
    assert rep.verdict == "converges"
    assert math.isinf(rep.p_star)


def test_sphere_series_klein_gordon_tail_slope():
    rep = sphere_embedding_series(3, 1, 3.0, operator="klein_gordon")
    assert rep.verdict == "converges"
    expected = -2.0 + (3 + 1) * (3.0 - 2.0) / (2.0 * 3.0)  # -4/3
    assert rep.tail_exponent == pytest.approx(expected, abs=0.15)
    assert rep.p_star == pytest.approx(4.0)


def test_sphere_series_klein_gordon_supercritical():
    rep = sphere_embedding_series(3, 1, 4.5, operator="klein_gordon")
    # at finite truncation the slope sits at -1 up to truncation bias
    assert rep.tail_exponent >= -1.05
    assert rep.verdict in ("diverges", "inconclusive")


def test_sphere_series_validation():
    with pytest.raises(ValueError):
        sphere_embedding_series(2, 2, 2.0)
    with pytest.raises(ValueError):
        sphere_embedding_series(2, 1, 3.0, operator="klein_gordon")  # even N
    with pytest.raises(ValueError):
        sphere_embedding_series(2, 3, 3.0)  # odd m on a higher sphere


def test_sphere_series_terms_positive_and_monotone_partials():
    rep = sphere_embedding_series(3, 2, 3.5, j_cut=32, l_cut=2000)
    assert np.all(rep.term_sums >= 0)
    part = np.cumsum(rep.term_sums)
    assert np.all(np.diff(part) >= 0)


def test_integer_gaps_off_kernel():
    # every nonresonant mode of integer eigenvalue data has gap >= 1
    rep = sphere_embedding_series(3, 2, 3.0, j_cut=8, l_cut=200)
    assert rep.total < math.inf
    N, m = 3, 2
    for l in range(0, 200):
        _, k_l = sphere_mode_shift(N, m, l)
        for j in range(-3, 4):
            k = k_l + j
            if k < 0:
                continue
            gap = abs((k * (k + N - 1)) ** m - l * l)
            assert gap == 0 or gap >= 1


def test_offset_band_inequalities():
    # the torus series bound rests on |(l_k + p)^2 - l_k^2| >= 2 p |k|^m and
    # |(l_k - p)^2 - l_k^2| >= p |k|^m for 1 <= p <= l_k; exact integers
    for kx in range(1, 20):
        for ky in range(0, 20):
            nu = kx * kx + ky * ky
            lk = nu  # |k|^m with m = 2
            for p in (1, 2, 5, lk):
                assert (lk + p) ** 2 - lk * lk >= 2 * p * lk
                if 1 <= p <= lk:
                    assert abs((lk - p) ** 2 - lk * lk) >= p * lk


def test_noncompact_witness_family():
    wit = noncompact_witness(2, 1, 3)
    assert wit == [((1, 1), 1, 1), ((2, 1), 2, 1), ((3, 1), 3, 1)]
    assert noncompact_witness(3, 1, 1) == [((1, 1, 0), 1, 1)]
    with pytest.raises(ValueError):
        noncompact_witness(2, 2, 3)  # even power: gaps escape every bounded band
    with pytest.raises(ValueError):
        noncompact_witness(1, 1, 3)


def test_gap_ratio_bracket_within_ten():
    for N, m in ((2, 2), (3, 2)):
        lo, hi = gap_ratio_bracket(N, m, l_max=2000)
        assert lo >= 0.1
        assert hi <= 10.0


def test_series_report_csv(tmp_path):
    rep = torus_gap_series(1, 2, 4.0, cutoff=32)
    path = tmp_path / "terms.csv"
    rep.terms_to_csv(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape[0] == len(rep.index)
    doc = rep.to_json()
    assert doc["verdict"] == rep.verdict
    assert doc["p_star"] is None  # infinity maps to null
