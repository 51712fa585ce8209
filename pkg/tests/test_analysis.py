"""Analysis estimators against synthetic curves with known answers."""

import numpy as np
import pytest

from infoflow.analysis import (
    KinkEstimate,
    collapse_cost,
    derivative,
    estimate_kink,
    fit_power_law,
    fit_velocity,
    interp_at,
    optimize_collapse,
    optimize_collapse_joint,
    smooth,
)


def kinked_curve(tau, tau_k, left=0.0, right=-0.8):
    return np.where(tau < tau_k, left * (tau - tau_k), right * (tau - tau_k))


def test_smooth_identity_and_mean():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.array_equal(smooth(y, 1), y)
    s = smooth(np.array([0.0, 3.0, 0.0, 3.0, 0.0]), 3)
    assert s.shape == (5,)
    assert abs(s[2] - 2.0) < 1e-12
    with pytest.raises(ValueError):
        smooth(y, 2)


def test_derivative_of_line_is_constant():
    tau = np.linspace(0, 1, 40)
    x, d = derivative(tau, 2.5 * tau - 1.0)
    assert np.allclose(d, 2.5, atol=1e-9)
    assert np.array_equal(x, tau)


def test_derivative_tracks_curvature():
    tau = np.linspace(0, 1, 400)
    _, d = derivative(tau, tau**2)
    assert np.allclose(d[1:-1], 2 * tau[1:-1], atol=1e-3)


def test_interp_at():
    tau = np.array([0.0, 1.0, 2.0])
    y = np.array([0.0, 10.0, 20.0])
    assert interp_at(tau, y, 0.35) == pytest.approx(3.5)
    with pytest.raises(ValueError):
        interp_at(tau, y, 2.5)


def test_kink_found_exactly_on_clean_data():
    tau = np.linspace(0, 1, 101)
    y = kinked_curve(tau, 0.4)
    est = estimate_kink(tau, y)
    assert isinstance(est, KinkEstimate)
    assert est.significant
    assert est.tau == pytest.approx(0.4, abs=1e-6)
    assert est.slope_jump == pytest.approx(-0.8, abs=1e-6)


def test_kink_found_under_noise():
    rng = np.random.default_rng(19)
    tau = np.linspace(0, 1, 201)
    y = kinked_curve(tau, 0.55) + rng.normal(0, 1e-3, tau.size)
    est = estimate_kink(tau, y)
    assert est.significant
    assert est.tau == pytest.approx(0.55, abs=0.02)


def test_kink_respects_window():
    tau = np.linspace(0, 2, 201)
    y = kinked_curve(tau, 0.5) + kinked_curve(tau, 1.5, left=-0.8, right=-2.0)
    est = estimate_kink(tau, y, window=(1.0, 2.0))
    assert est.tau == pytest.approx(1.5, abs=0.02)


def test_straight_line_is_not_significant():
    rng = np.random.default_rng(23)
    tau = np.linspace(0, 1, 101)
    y = -0.3 * tau + rng.normal(0, 1e-4, tau.size)
    est = estimate_kink(tau, y)
    assert not est.significant


def test_smooth_parabola_is_not_significant():
    # curvature without a corner must fail the quadratic comparison
    tau = np.linspace(0, 1, 101)
    est = estimate_kink(tau, -(tau**2))
    assert not est.significant


def test_kink_needs_enough_points():
    with pytest.raises(ValueError):
        estimate_kink(np.linspace(0, 1, 5), np.zeros(5))


def scaling_family(nu, tau_c, sizes, width=8.0, n_pts=120):
    # master curve g(x) = tanh(x) in the rescaled coordinate
    out = []
    for n in sizes:
        tau = np.linspace(tau_c - width * n ** (-1 / nu), tau_c + width * n ** (-1 / nu), n_pts)
        x = (tau - tau_c) * n ** (1 / nu)
        out.append((n, tau, np.tanh(x)))
    return out


def test_collapse_cost_prefers_true_exponent():
    curves = scaling_family(1.25, 0.5, (128, 192, 256, 320))
    good = collapse_cost(curves, 0.5, 1.25)
    assert good < 1e-6
    for nu in (0.8, 2.0):
        assert collapse_cost(curves, 0.5, nu) > 3 * good + 1e-4


def test_collapse_cost_requires_overlap():
    # disjoint rescaled supports must raise, not silently return zero
    curves = [
        (100, np.linspace(0.0, 0.1, 20), np.linspace(0.0, 1.0, 20)),
        (200, np.linspace(10.0, 10.1, 20), np.linspace(1.0, 2.0, 20)),
    ]
    with pytest.raises(ValueError):
        collapse_cost(curves, 0.0, 1.0)


def test_optimize_collapse_recovers_parameters():
    curves = scaling_family(1.25, 0.5, (128, 192, 256, 320))
    fit = optimize_collapse(curves, window=(0.4, 0.6), nu_bounds=(0.6, 2.5))
    assert fit.nu == pytest.approx(1.25, abs=0.05)
    assert fit.tau_i == pytest.approx(0.5, abs=0.01)
    assert fit.cost < 1e-4
    assert fit.sizes == (128, 192, 256, 320)


def test_optimize_collapse_needs_three_sizes():
    curves = scaling_family(1.25, 0.5, (128, 256))
    with pytest.raises(ValueError):
        optimize_collapse(curves, window=(0.4, 0.6))


def test_joint_collapse_shares_nu():
    fam_a = scaling_family(1.25, 0.3, (128, 192, 256))
    fam_b = scaling_family(1.25, 0.7, (128, 192, 256))
    fits = optimize_collapse_joint([fam_a, fam_b], [(0.2, 0.4), (0.6, 0.8)])
    assert len(fits) == 2
    assert fits[0].nu == fits[1].nu
    assert fits[0].nu == pytest.approx(1.25, abs=0.1)
    assert fits[0].tau_i == pytest.approx(0.3, abs=0.02)
    assert fits[1].tau_i == pytest.approx(0.7, abs=0.02)


def test_fit_velocity_exact():
    v = 0.44
    pts = [(l, l / v) for l in (0.0625, 0.125, 0.1875)]
    fit = fit_velocity(pts, "tau_e")
    assert fit.v0 == pytest.approx(v, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_velocity_laws_transform_abscissa():
    v = 0.3
    small = [(m, (m / 2) / v) for m in (0.125, 0.25, 0.375)]
    fit = fit_velocity(small, "tau_s_small_m")
    assert fit.v0 == pytest.approx(v, rel=1e-12)
    large = [(0.625, ((1 - 0.625) / 2) / v), (0.75, ((1 - 0.75) / 2) / v)]
    fit = fit_velocity(large, "tau_s_large_m")
    assert fit.v0 == pytest.approx(v, rel=1e-12)


def test_fit_velocity_rejects_degenerate():
    with pytest.raises(ValueError):
        fit_velocity([(0.1, 0.2)], "tau_e")
    with pytest.raises(ValueError):
        fit_velocity([(0.0, 0.1), (0.0, 0.2)], "tau_e")
    with pytest.raises(ValueError):
        fit_velocity([(0.1, 0.1), (0.2, 0.2)], "no_such_law")


def test_fit_power_law_exact_exponent():
    pairs = [(n, 3.0 * n**-0.68) for n in (64, 128, 256, 512)]
    fit = fit_power_law(pairs)
    assert fit.exponent == pytest.approx(-0.68, abs=1e-9)
    assert fit.stderr < 1e-9
    with pytest.raises(ValueError):
        fit_power_law(pairs[:2])
    with pytest.raises(ValueError):
        fit_power_law([(64, 1.0), (128, 0.0), (256, 0.5)])


def test_fit_power_law_noisy_stderr_covers_truth():
    rng = np.random.default_rng(29)
    pairs = [
        (n, 2.0 * n**-0.68 * np.exp(rng.normal(0, 0.02)))
        for n in (64, 96, 128, 192, 256)
    ]
    fit = fit_power_law(pairs)
    assert abs(fit.exponent + 0.68) < 4 * fit.stderr + 0.02
