import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from clipshape.constellation import (
    Constellation,
    average_power,
    entropy,
    fit_mb_to_entropy,
    gray_code,
    make_60qam,
    make_square_qam,
    mb_pmf,
    peak_power,
)
from clipshape.errors import DomainError


def test_uniform_64qam_moments(qam64):
    assert average_power(qam64) == pytest.approx(42.0, abs=1e-12)
    assert peak_power(qam64) == pytest.approx(98.0, abs=1e-12)
    assert entropy(qam64) == pytest.approx(6.0, abs=1e-12)


def test_qpsk_and_16qam_power():
    assert average_power(make_square_qam(4)) == pytest.approx(2.0)
    assert average_power(make_square_qam(16)) == pytest.approx(10.0)


def test_unsupported_order():
    with pytest.raises(ValueError):
        make_square_qam(32)


def test_gray_neighbours_differ_in_one_bit(qam64):
    bits = qam64.label_bits()
    for i, p in enumerate(qam64.points):
        for j, q in enumerate(qam64.points):
            if abs(abs(p - q) - 2.0) < 1e-12:
                assert int(np.sum(bits[i] != bits[j])) == 1


def test_gray_code_words():
    assert list(gray_code(3)) == [0, 1, 3, 2, 6, 7, 5, 4]


def test_pmf_must_sum_to_one():
    with pytest.raises(ValueError):
        Constellation(np.array([1 + 0j, -1 + 0j]), np.array([0.5, 0.6]))


def test_duplicate_points_rejected():
    with pytest.raises(ValueError):
        Constellation(np.array([1 + 0j, 1 + 0j]), np.array([0.5, 0.5]))


def test_arrays_are_read_only(qam64):
    with pytest.raises(ValueError):
        qam64.pmf[0] = 1.0


def test_json_roundtrip(qam64):
    c = mb_pmf(qam64, 0.03)
    back = Constellation.from_json(c.to_json())
    np.testing.assert_array_equal(back.points, c.points)
    np.testing.assert_array_equal(back.pmf, c.pmf)
    assert back.labels == c.labels
    # points are stored as [re, im] pairs
    assert json.loads(c.to_json())["points"][0] == [-7.0, -7.0]


def test_60qam_drops_corners_and_matches_peak(qam64):
    c = make_60qam()
    assert len(c) == 60
    assert peak_power(c) == pytest.approx(peak_power(qam64), abs=1e-12)
    assert set(c.labels) <= set(qam64.labels)


def test_60qam_custom_peak():
    assert peak_power(make_60qam(5.0)) == pytest.approx(25.0, abs=1e-12)


def test_mb_nu_zero_is_uniform(qam64):
    np.testing.assert_allclose(mb_pmf(qam64, 0.0).pmf, 1 / 64, atol=1e-15)


def test_fit_mb_hits_target(qam64):
    for h in (4.3, 5.2, 5.9):
        nu = fit_mb_to_entropy(qam64, h)
        assert entropy(mb_pmf(qam64, nu)) == pytest.approx(h, abs=1e-9)


def test_fit_mb_full_entropy_is_uniform(qam64):
    assert fit_mb_to_entropy(qam64, 6.0) == 0.0


@pytest.mark.parametrize("h", [2.0, 0.5, 6.5])
def test_fit_mb_out_of_range(qam64, h):
    # the 4 innermost points already carry 2 bits as nu -> inf
    with pytest.raises(DomainError):
        fit_mb_to_entropy(qam64, h)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.5), st.floats(0.0, 0.5))
def test_mb_entropy_and_power_decrease_with_nu(qam64, a, b):
    lo, hi = sorted((a, b))
    c_lo, c_hi = mb_pmf(qam64, lo), mb_pmf(qam64, hi)
    assert entropy(c_hi) <= entropy(c_lo) + 1e-12
    assert average_power(c_hi) <= average_power(c_lo) + 1e-9


@settings(max_examples=30, deadline=None)
@given(st.floats(2.05, 5.99))
def test_mb_pmf_is_symmetric(qam64, h):
    c = mb_pmf(qam64, fit_mb_to_entropy(qam64, h))
    by_energy = {}
    for e, p in zip(np.round(c.energies, 9), c.pmf):
        by_energy.setdefault(e, []).append(p)
    for ps in by_energy.values():
        assert max(ps) - min(ps) < 1e-15


def test_peak_power_ignores_zero_mass_points(qam64):
    p = np.where(qam64.energies < 90, 1.0, 0.0)
    c = qam64.with_pmf(p / p.sum())
    assert peak_power(c) == pytest.approx(74.0)
    assert math.isclose(entropy(c), math.log2(60))
