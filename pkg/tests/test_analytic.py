import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from nbest_relay import analytic as an
from nbest_relay.analytic import AvgSnrSet, SelectionConfig
from nbest_relay.noise_channel import Topology, average_snrs

import oracles


def default_snrs(db, rho=100.0, **topo):
    return average_snrs(Topology(**topo), 10 ** (-db / 10), rho)


snr_sets = st.builds(
    AvgSnrSet,
    g_SR=st.floats(0.05, 2e3),
    g_RD=st.floats(0.05, 2e3),
    g_SD=st.floats(0.05, 2e3),
    rho=st.floats(1.0, 300.0),
)
mn_pairs = st.integers(1, 6).flatmap(lambda M: st.tuples(st.just(M), st.integers(1, M)))


# --------------------------------------------------------------------------
# special functions
# --------------------------------------------------------------------------

def test_omega_values():
    assert an.omega(1.0) == pytest.approx(0.5 * (1 - 1 / math.sqrt(2)), rel=1e-14)
    assert an.omega(0.0) == 0.25
    assert an.omega(1e-9) == pytest.approx(0.25, abs=1e-9)
    theta = 1e12
    assert an.omega(theta) * 2 * theta == pytest.approx(1.0, rel=1e-5)


def test_omega_accurate_on_both_sides_of_series_switch():
    for theta in (1e-12, 0.999e-6, 1.001e-6, 1e-3):
        with mpmath.workdps(50):
            t = mpmath.mpf(theta)
            ref = float((1 - 1 / mpmath.sqrt(1 + t)) / (2 * t))
        assert an.omega(theta) == pytest.approx(ref, rel=1e-13)


def test_omega_rejects_negative():
    with pytest.raises(ValueError):
        an.omega(-0.1)


def test_omega_prime_matches_finite_difference():
    for theta in (1e-7, 1e-3, 0.5, 7.0, 300.0):
        h = theta * 1e-5 if theta > 1e-4 else 1e-9
        fd = (an.omega(theta + h) - an.omega(theta - h)) / (2 * h) if theta > h else (an.omega(theta + h) - an.omega(theta)) / h
        assert an.omega_prime(theta) == pytest.approx(fd, rel=1e-4)


def test_chi_values():
    assert an.chi(3.0, 0.0) == 0.0
    assert an.chi(1.0, 1.0) == pytest.approx(1 - math.exp(-1), rel=1e-15)
    assert an.chi(2.5, 1e4) == pytest.approx(2.5)
    with pytest.raises(ValueError):
        an.chi(0.0, 1.0)


def test_rate_threshold():
    assert an.rate_threshold(1.0) == 3.0
    assert SelectionConfig(5, 1, R=1.0).phi == 3.0


def test_state_weights_values():
    w, bad = an.state_weights(5, 0.01)
    assert w[1] == pytest.approx(0.0099, rel=1e-12)
    assert bad == pytest.approx(1e-10, rel=1e-12)
    assert sum(w) + bad == pytest.approx(1.0, abs=1e-15)


def test_snr_set_invariants():
    s = default_snrs(0.0)
    assert s.g_a < min(s.g_SR, s.g_RD)
    assert AvgSnrSet(4.0, 4.0, 1.0).g_a == 2.0
    with pytest.raises(ValueError):
        AvgSnrSet(-1.0, 1.0, 1.0)


def test_selection_config_rejects_bad_rank():
    with pytest.raises(ValueError):
        SelectionConfig(3, 4)


# --------------------------------------------------------------------------
# densities
# --------------------------------------------------------------------------

def test_pdf_sr_n_single_relay_is_exponential():
    s = AvgSnrSet(3.7, 1.9, 1.0)
    x = np.linspace(0, 40, 81)
    expected = np.exp(-x / s.g_SR) / s.g_SR
    np.testing.assert_allclose(an.pdf_gamma_sr_n(x, 1, 1, s), expected, rtol=1e-12, atol=1e-15)


@pytest.mark.parametrize("M,N", [(3, 1), (3, 2), (5, 3), (5, 1), (5, 5)])
def test_pdfs_integrate_to_one(M, N):
    s = default_snrs(5.0)
    for pdf, scale in (
        (lambda x: an.pdf_gamma_sr_n(x, M, N, s), s.g_SR),
        (lambda x: an.pdf_gamma_rnd(x, M, N, s), s.g_RD),
        (lambda x: an.pdf_gamma_srnd(x, M, N, s), s.g_RD + s.g_SD),
        (lambda x: an.pdf_gamma_sr_bad(x, M, s), s.g_SR_B),
    ):
        assert oracles.quad_total(pdf, scale) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("M,N", [(4, 1), (4, 3)])
def test_pdfs_match_order_statistics_marginals(M, N):
    s = AvgSnrSet(5.0, 2.0, 1.0)
    for x in (0.05, 0.7, 2.5, 9.0):
        assert an.pdf_gamma_sr_n(x, M, N, s) == pytest.approx(oracles.marginal_sr(x, M, N, s.g_SR, s.g_RD), rel=1e-8)
        assert an.pdf_gamma_rnd(x, M, N, s) == pytest.approx(oracles.marginal_rd(x, M, N, s.g_SR, s.g_RD), rel=1e-8)


def test_pdf_srnd_is_convolution_with_direct_link():
    M, N = 5, 2
    s = default_snrs(3.0)
    for theta in (0.2, 1.5, 4.0, 12.0):
        conv, _ = integrate.quad(
            lambda z: an.pdf_gamma_rnd(z, M, N, s) * math.exp(-(theta - z) / s.g_SD) / s.g_SD,
            0, theta, epsabs=1e-14, epsrel=1e-12,
        )
        assert an.pdf_gamma_srnd(theta, M, N, s) == pytest.approx(conv, abs=1e-6, rel=1e-8)
    assert an.pdf_gamma_srnd(0.0, M, N, s) == pytest.approx(0.0, abs=1e-15)


def test_pdf_srnd_continuous_across_coincident_rates():
    # g_SD == g_RD exactly, and just off it: the divided differences switch form
    base = AvgSnrSet(5.0, 2.0, 2.0)
    near = AvgSnrSet(5.0, 2.0, 2.0 * (1 + 1e-7))
    x = np.array([0.3, 1.0, 6.0])
    np.testing.assert_allclose(an.pdf_gamma_srnd(x, 3, 1, base), an.pdf_gamma_srnd(x, 3, 1, near), rtol=1e-6)
    assert an.cdf_gamma_srnd(3.0, 3, 1, base) == pytest.approx(an.cdf_gamma_srnd(3.0, 3, 1, near), rel=1e-6)


def test_bad_state_pdf_single_relay():
    s = AvgSnrSet(40.0, 1.0, 1.0, rho=10.0)
    x = np.linspace(0, 30, 31)
    np.testing.assert_allclose(an.pdf_gamma_sr_bad(x, 1, s), np.exp(-x / 4.0) / 4.0, rtol=1e-12)


def test_bad_state_pdf_is_max_of_exponentials():
    # density of the max of M iid Exp(g): M/g e^{-x/g} (1 - e^{-x/g})^{M-1}
    s = AvgSnrSet(30.0, 1.0, 1.0, rho=10.0)
    g = 3.0
    x = np.linspace(0.01, 25, 40)
    ref = 4 / g * np.exp(-x / g) * (1 - np.exp(-x / g)) ** 3
    np.testing.assert_allclose(an.pdf_gamma_sr_bad(x, 4, s), ref, rtol=1e-10, atol=1e-14)


@given(mn=mn_pairs, s=snr_sets)
def test_pdfs_nonnegative(mn, s):
    M, N = mn
    scale = max(s.g_SR, s.g_RD, s.g_SD)
    x = np.linspace(0, 20 * scale, 200)
    tol = 1e-10 / min(s.g_SR, s.g_RD, s.g_SD, s.g_SR_B)
    assert np.all(an.pdf_gamma_sr_n(x, M, N, s) >= -tol)
    assert np.all(an.pdf_gamma_rnd(x, M, N, s) >= -tol)
    assert np.all(an.pdf_gamma_srnd(x, M, N, s) >= -tol)
    assert np.all(an.pdf_gamma_sr_bad(x, M, s) >= -tol)


# --------------------------------------------------------------------------
# CDFs
# --------------------------------------------------------------------------

@pytest.mark.parametrize("M,N", [(5, 2), (5, 1), (3, 3)])
def test_cdf_sr_n_matches_quadrature(M, N):
    s = default_snrs(8.0)
    phi = 3.0
    ref, _ = integrate.quad(lambda x: an.pdf_gamma_sr_n(x, M, N, s), 0, phi, epsabs=1e-14, epsrel=1e-13)
    assert an.cdf_gamma_sr_n(phi, M, N, s) == pytest.approx(ref, abs=1e-8, rel=1e-9)


def test_cdf_limits_and_monotone():
    s = default_snrs(4.0)
    grid = np.concatenate([[0.0], np.geomspace(1e-3, 1e4, 40)])
    for cdf in (
        lambda x: an.cdf_gamma_sr_n(x, 5, 2, s),
        lambda x: an.cdf_gamma_rnd(x, 5, 2, s),
        lambda x: an.cdf_gamma_srnd(x, 5, 2, s),
        lambda x: an.cdf_gamma_sr_bad(x, 5, s),
    ):
        values = cdf(grid)
        assert values[0] == pytest.approx(0.0, abs=1e-15)
        assert values[-1] == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(values) >= -1e-15)


def test_cdf_accepts_arrays_and_scalars():
    s = default_snrs(4.0)
    arr = an.cdf_gamma_sr_n(np.array([[1.0, 2.0], [3.0, 4.0]]), 5, 1, s)
    assert arr.shape == (2, 2)
    assert arr[1, 0] == an.cdf_gamma_sr_n(3.0, 5, 1, s)


# --------------------------------------------------------------------------
# BER
# --------------------------------------------------------------------------

def test_relay_ber_single_relay_classical():
    s = AvgSnrSet(10.0, 10.0, 1.0)
    p_relay, _ = an.ber_nth_good(1, 1, s)
    assert p_relay == pytest.approx(0.5 * (1 - math.sqrt(10 / 11)), rel=1e-12)
    assert p_relay == pytest.approx(0.023269, abs=5e-7)


@pytest.mark.parametrize("M,N", [(5, 1), (5, 3), (2, 2)])
def test_ber_closed_forms_match_quadrature(M, N):
    s = default_snrs(20.0)
    ref_relay = oracles.quad_ber(lambda x: an.pdf_gamma_sr_n(x, M, N, s), s.g_SR)
    ref_mrc = oracles.quad_ber(lambda x: an.pdf_gamma_srnd(x, M, N, s), s.g_SD + s.g_RD)
    assert an.ber_relay_nth(M, N, s) == pytest.approx(ref_relay, abs=1e-8, rel=1e-7)
    assert an.ber_mrc_nth(M, N, s) == pytest.approx(ref_mrc, abs=1e-8, rel=1e-7)


def test_bad_relay_ber_matches_quadrature():
    s = default_snrs(15.0)
    ref = oracles.quad_ber(lambda x: an.pdf_gamma_sr_bad(x, 5, s), s.g_SR_B)
    assert an.ber_relay_bad(5, s) == pytest.approx(ref, abs=1e-8, rel=1e-7)


def test_mean_rnd_matches_quadrature():
    s = default_snrs(2.0)
    ref = oracles.quad_total(lambda z: z * an.pdf_gamma_rnd(z, 5, 2, s), s.g_RD)
    assert an.mean_gamma_rnd(5, 2, s) == pytest.approx(ref, rel=1e-9)


def test_bad_state_single_relay_reduction():
    s = AvgSnrSet(300.0, 5.0, 2.0, rho=100.0)
    g = s.g_SR_B
    assert an.ber_relay_bad(1, s) == pytest.approx(0.5 * (1 - math.sqrt(g / (1 + g))), rel=1e-10)
    # k = 0 term of the bad-state sum: finite for every M
    assert np.isfinite(an.ber_bad_state(5, s))


def test_mrc_bad_equal_branches_matches_gamma2_quadrature():
    g = 7.0
    s = AvgSnrSet(10.0, g, g)
    ref = integrate.quad(lambda x: 0.5 * special.erfc(math.sqrt(x)) * x * math.exp(-x / g) / g**2, 0, np.inf, epsabs=1e-13)[0]
    assert an.ber_mrc_bad(s) == pytest.approx(ref, abs=1e-8, rel=1e-9)
    near = AvgSnrSet(10.0, g, g * (1 + 1e-8))
    assert an.ber_mrc_bad(near) == pytest.approx(ref, rel=1e-7)


def test_mrc_bad_unequal_branches_matches_quadrature():
    a, b = 3.0, 11.0
    s = AvgSnrSet(10.0, b, a)
    dens = lambda x: (math.exp(-x / a) - math.exp(-x / b)) / (a - b)
    ref = integrate.quad(lambda x: 0.5 * special.erfc(math.sqrt(x)) * dens(x), 0, np.inf, epsabs=1e-13)[0]
    assert an.ber_mrc_bad(s) == pytest.approx(ref, rel=1e-9)


def test_ber_overall_weights():
    s = default_snrs(10.0)
    assert an.ber_overall(5, s, 0.0) == pytest.approx(an.ber_nth_good(5, 1, s)[1], rel=1e-15)
    w, bad = an.state_weights(5, 0.01)
    manual = sum(wn * an.ber_nth_good(5, n, s)[1] for n, wn in enumerate(w, 1)) + bad * an.ber_bad_state(5, s)
    assert an.ber_overall(5, s, 0.01) == pytest.approx(manual, rel=1e-13)


def test_ber_decreases_with_snr():
    grid = np.arange(0, 41, 2.5)
    values = [an.ber_overall(5, default_snrs(db), 0.01) for db in grid]
    relay = [an.ber_relay_overall(5, default_snrs(db), 0.01) for db in grid]
    assert np.all(np.diff(values) < 0)
    assert np.all(np.diff(relay) < 0)
    assert values[-1] > 0


def test_ber_frozen_reference_values():
    # frozen from quadrature of the densities (see test_ber_closed_forms_match_quadrature)
    assert an.ber_overall(5, default_snrs(5.0), 0.01) == pytest.approx(1.39922793e-4, rel=1e-8)
    assert an.ber_overall(5, default_snrs(10.0), 0.01) == pytest.approx(1.1581383e-6, rel=1e-7)


@pytest.mark.parametrize("quantity", ["ber", "pout"])
def test_overall_monotone_in_p_B(quantity):
    s = default_snrs(12.0)
    f = (lambda p: an.ber_overall(5, s, p)) if quantity == "ber" else (lambda p: an.outage_overall(5, s, p, 3.0))
    values = [f(p) for p in (0.0, 0.005, 0.01, 0.05)]
    assert np.all(np.diff(values) >= 0)


@given(mn=mn_pairs, s=snr_sets, p_B=st.floats(0.0, 0.5))
def test_probabilities_in_unit_interval(mn, s, p_B):
    M, N = mn
    for v in (
        *an.ber_nth_good(M, N, s),
        an.ber_bad_state(M, s),
        an.ber_overall(M, s, p_B),
        an.outage_nth_good(M, N, s, 3.0),
        an.outage_nth_good(M, N, s, 3.0, joint="exact"),
        an.outage_overall(M, s, p_B, 3.0),
        an.cdf_gamma_srnd(3.0, M, N, s),
    ):
        assert -1e-15 <= v <= 1.0 + 1e-12


@given(mn=mn_pairs, s=snr_sets)
def test_high_precision_agrees_with_double_at_moderate_snr(mn, s):
    # the mpmath path and a plain float quadrature of the numpy density agree
    M, N = mn
    phi = 2.0
    ref, _ = integrate.quad(lambda x: an.pdf_gamma_sr_n(x, M, N, s), 0, phi, epsabs=1e-13, epsrel=1e-10, limit=200)
    assert an.cdf_gamma_sr_n(phi, M, N, s) == pytest.approx(ref, abs=1e-7, rel=1e-6)


# --------------------------------------------------------------------------
# outage
# --------------------------------------------------------------------------

def test_outage_limits():
    s = default_snrs(5.0)
    assert an.outage_nth_good(5, 1, s, 1e-9) < 1e-9
    assert an.outage_nth_good(5, 1, s, 1e9) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        an.outage_nth_good(5, 1, s, 0.0)


def test_mrc_bad_outage_product_value():
    s = AvgSnrSet(5.0, 10.0, 10.0)
    expected = 0.5 * (10 * (1 - math.exp(-0.3))) ** 2 / 100
    assert an.outage_mrc_bad(s, 3.0) == pytest.approx(expected, rel=1e-13)
    with mpmath.workdps(40):
        oracle = mpmath.mpf(1) / 2 * (10 * (1 - mpmath.exp(mpmath.mpf(-3) / 10))) ** 2 / 100
    assert an.outage_mrc_bad(s, 3.0) == pytest.approx(float(oracle), rel=1e-14)
    assert an.outage_mrc_bad(s, 3.0) == pytest.approx(0.03359, abs=5e-6)


def test_mrc_bad_outage_exact_is_sum_of_exponentials_cdf():
    for a, b in ((2.0, 9.0), (4.0, 4.0)):
        s = AvgSnrSet(5.0, b, a)
        if a == b:
            dens = lambda x: x * math.exp(-x / a) / a**2
        else:
            dens = lambda x: (math.exp(-x / a) - math.exp(-x / b)) / (a - b)
        ref = integrate.quad(dens, 0, 3.0, epsabs=1e-14)[0]
        assert an.outage_mrc_bad(s, 3.0, joint="exact") == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("M,N", [(5, 1), (5, 3), (2, 1)])
def test_joint_outage_matches_double_quadrature(M, N):
    s = default_snrs(5.0)
    phi = 3.0

    def integrand(z, x):
        return oracles.joint_pdf_selected(x, z, M, N, s.g_SR, s.g_RD) * (1 - math.exp(-(phi - z) / s.g_SD))

    ref, _ = integrate.dblquad(integrand, phi, np.inf, 0.0, phi, epsabs=1e-13, epsrel=1e-10)
    assert an.outage_joint_nth(M, N, s, phi) == pytest.approx(ref, rel=1e-7)


def test_product_and_exact_outage_share_leading_order():
    s = default_snrs(40.0)
    assert an.outage_nth_good(5, 1, s, 3.0) == pytest.approx(an.outage_nth_good(5, 1, s, 3.0, joint="exact"), rel=1e-3)


def test_outage_p_B_zero_reduces_to_first_rank():
    s = default_snrs(10.0)
    for joint in an.OUTAGE_JOINT_MODES:
        assert an.outage_overall(5, s, 0.0, 3.0, joint) == pytest.approx(an.outage_nth_good(5, 1, s, 3.0, joint), rel=1e-14)


def test_outage_rejects_unknown_joint_mode():
    with pytest.raises(ValueError):
        an.outage_nth_good(5, 1, default_snrs(0.0), 3.0, joint="nope")


def test_outage_decreases_with_snr_to_40_db():
    values = [an.outage_overall(5, default_snrs(db), 0.01, 3.0, "exact") for db in range(0, 41, 5)]
    assert np.all(np.diff(values) < 0)
    assert values[-1] > 0


# --------------------------------------------------------------------------
# high-SNR forms
# --------------------------------------------------------------------------

def test_asym_relay_ber_single_relay_is_quarter_over_snr():
    s = AvgSnrSet(50.0, 20.0, 1.0)
    assert an.asym_ber_relay(1, 1, s) == pytest.approx(1 / (4 * 50.0), rel=1e-14)


@pytest.mark.parametrize("M,N", [(5, 1), (5, 2), (5, 3), (3, 3)])
def test_asym_outage_is_exact_power_law(M, N):
    pts = [(db, an.asym_outage(M, N, default_snrs(db), 3.0)) for db in (20.0, 30.0, 40.0)]
    x = np.array([p[0] for p in pts]) / 10
    y = np.log10([p[1] for p in pts])
    slope = -np.polyfit(x, y, 1)[0]
    assert slope == pytest.approx(M - N + 2, abs=1e-6)


def test_asym_outage_ratio_at_first_point_below_1e8():
    for db in range(0, 45, 5):
        s = default_snrs(float(db))
        finite = an.outage_nth_good(5, 1, s, 3.0)
        if finite <= 1e-8:
            assert an.asym_outage(5, 1, s, 3.0) / finite == pytest.approx(1.0, abs=0.05)
            break
    else:
        pytest.fail("no grid point reached 1e-8")


def test_asym_densities_match_small_argument_limit():
    s = default_snrs(30.0)
    x = 1e-2
    assert an.asym_pdf_sr_n(x, 5, 2, s) == pytest.approx(an.pdf_gamma_sr_n(x, 5, 2, s), rel=1e-3)
    assert an.asym_pdf_rnd(x, 5, 2, s) == pytest.approx(an.pdf_gamma_rnd(x, 5, 2, s), rel=1e-3)
    assert an.asym_pdf_sr_bad(x, 5, s) == pytest.approx(an.pdf_gamma_sr_bad(x, 5, s), rel=1e-2)


def test_asym_relay_ber_converges_to_finite():
    s = default_snrs(50.0)
    assert an.asym_ber_relay(5, 1, s) / an.ber_relay_nth(5, 1, s) == pytest.approx(1.0, abs=0.01)
    assert an.asym_ber_relay_bad(5, s) / an.ber_relay_bad(5, s) == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("M,N,d", [(5, 1, 6), (5, 3, 4), (1, 1, 2)])
def test_diversity_order(M, N, d):
    assert an.diversity_order(M, N) == d


def test_diversity_order_rejects_bad_rank():
    with pytest.raises(ValueError):
        an.diversity_order(3, 0)


def test_curve_export():
    cfg = SelectionConfig(5, 1, 0.01, 1.0)
    unit = average_snrs(Topology(), 1.0, 100.0)
    pts = an.curve("ber_dest", range(0, 45, 5), cfg, unit)
    assert len(pts) == 9
    assert [p[0] for p in pts] == list(range(0, 45, 5))
    assert pts[2][1] == pytest.approx(an.ber_overall(5, default_snrs(10.0), 0.01), rel=1e-12)
    with pytest.raises(ValueError):
        an.curve("nope", [0], cfg, unit)
