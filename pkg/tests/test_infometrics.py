import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from clipshape.constellation import Constellation, entropy, fit_mb_to_entropy, make_square_qam, mb_pmf
from clipshape.errors import DomainError
from clipshape.infometrics import (
    MetricConfig,
    awgn_capacity,
    gmi,
    metric_sweep,
    monte_carlo_gmi,
    monte_carlo_mi,
    mutual_information,
    ngmi,
    noise_var_for_snr,
)


def bpsk_mi(rail_noise_var):
    """I(X;Y) of +-1 antipodal input in real Gaussian noise, by direct integration."""
    s = math.sqrt(rail_noise_var)

    def integrand(y):
        pdf = math.exp(-((y - 1) ** 2) / (2 * rail_noise_var)) / (s * math.sqrt(2 * math.pi))
        return pdf * math.log2(1 + math.exp(-2 * y / rail_noise_var))

    return 1.0 - integrate.quad(integrand, -1 - 12 * s, 1 + 12 * s, limit=200)[0]


def test_capacity_examples():
    assert awgn_capacity(0.0) == pytest.approx(1.0)
    assert awgn_capacity(10.0) == pytest.approx(math.log2(11))
    assert awgn_capacity(-np.inf) == 0.0


@pytest.mark.parametrize("snr_db", [-3.0, 0.0, 5.0, 10.0])
def test_qpsk_mi_and_gmi_match_two_bpsk_rails(qpsk, snr_db):
    s2 = noise_var_for_snr(qpsk, snr_db)
    expected = 2 * bpsk_mi(s2 / 2)
    # order 20 is good to ~1e-4 bits here; order 80 resolves the oracle
    assert mutual_information(qpsk, s2) == pytest.approx(expected, abs=2e-4)
    fine = MetricConfig(quadrature_order=80)
    assert mutual_information(qpsk, s2, fine) == pytest.approx(expected, abs=1e-6)
    assert gmi(qpsk, s2) == pytest.approx(mutual_information(qpsk, s2), abs=1e-6)


def test_qpsk_noiseless_limit(qpsk):
    assert mutual_information(qpsk, 1e-4) == pytest.approx(2.0, abs=1e-9)


def test_high_noise_limit(qam64):
    assert mutual_information(qam64, 1e5) < 2e-3


def test_64qam_at_18db(qam64):
    s2 = noise_var_for_snr(qam64, 18.0)
    mi = mutual_information(qam64, s2)
    mc, _ = monte_carlo_mi(qam64, s2, n=1_000_000, seed=3)
    assert 5.0 < mi < 6.0
    assert abs(mi - mc) < 0.01
    g = gmi(qam64, s2)
    assert g <= mi and mi - g < 0.1


def test_gmi_noiseless_tends_to_entropy(qam64):
    c = mb_pmf(qam64, fit_mb_to_entropy(qam64, 4.3))
    assert gmi(c, 1e-3) == pytest.approx(4.3, abs=1e-6)


def test_gmi_needs_labels():
    c = Constellation(np.array([1 + 0j, -1 + 0j]), np.array([0.5, 0.5]))
    with pytest.raises(ValueError):
        gmi(c, 1.0)


def test_gmi_monte_carlo_agrees(qam64):
    c = mb_pmf(qam64, fit_mb_to_entropy(qam64, 5.2))
    s2 = noise_var_for_snr(c, 12.0)
    est, se = monte_carlo_gmi(c, s2, n=200_000, seed=1)
    assert abs(gmi(c, s2) - est) < 4 * se + 1e-3


def test_quadrature_vs_monte_carlo_random_cases(qam64):
    rng = np.random.default_rng(2024)
    for _ in range(20):
        nu = rng.uniform(0.0, 0.1)
        c = mb_pmf(qam64, nu)
        s2 = noise_var_for_snr(c, rng.uniform(0.0, 20.0))
        est, se = monte_carlo_mi(c, s2, n=100_000, seed=int(rng.integers(1 << 31)))
        assert abs(mutual_information(c, s2) - est) <= 3 * se + 1e-4


def test_monte_carlo_config_path(qam64):
    cfg = MetricConfig(method="monte_carlo", mc_symbols=20_000, seed=5)
    s2 = noise_var_for_snr(qam64, 10.0)
    assert mutual_information(qam64, s2, cfg) == pytest.approx(mutual_information(qam64, s2), abs=0.05)


@pytest.mark.parametrize("kw", [dict(method="exact"), dict(quadrature_order=4),
                                dict(method="monte_carlo", mc_symbols=100)])
def test_metric_config_validation(kw):
    with pytest.raises(ValueError):
        MetricConfig(**kw)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 0.12), st.floats(-2.0, 25.0))
def test_gmi_mi_entropy_capacity_chain(qam64, nu, snr_db):
    c = mb_pmf(qam64, nu)
    s2 = noise_var_for_snr(c, snr_db)
    mi = mutual_information(c, s2)
    g = gmi(c, s2)
    assert g <= mi + 1e-3
    assert mi <= min(entropy(c), awgn_capacity(snr_db)) + 1e-3
    assert mi >= -1e-9


def test_mi_decreases_with_noise(qam64):
    c = mb_pmf(qam64, 0.05)
    grid = np.logspace(-1, 3, 25)
    mi = [mutual_information(c, s) for s in grid]
    assert all(b <= a + 1e-12 for a, b in zip(mi, mi[1:]))


def test_ngmi_examples():
    assert ngmi(4.3, 4.3, 6) == 1.0
    assert ngmi(4.5, 6.0, 6) == pytest.approx(4.5 / 6)
    assert ngmi(3.3, 4.3, 6) == pytest.approx(5 / 6, abs=1e-15)


@settings(max_examples=100)
@given(st.floats(0.0, 4.0), st.floats(0.0, 4.0))
def test_ngmi_is_affine_with_slope_one_over_m(a, b):
    h, m = 4.3, 6
    assert ngmi(b, h, m) - ngmi(a, h, m) == pytest.approx((b - a) / m, abs=1e-14)


@pytest.mark.parametrize("args", [(-0.5, 4.0, 6), (4.5, 4.0, 6), (5.0, 6.5, 6)])
def test_ngmi_domain(args):
    with pytest.raises(DomainError):
        ngmi(*args)


def test_metric_sweep_rows(qam64):
    rows = metric_sweep(qam64, [8.0, 12.0])
    assert [r[0] for r in rows] == [8.0, 12.0]
    for snr, mi, g, n in rows:
        assert n == pytest.approx(g / 6)
