import math

import numpy as np
import pytest
from scipy import special

from unicurrent import InvalidArgument
from unicurrent.diffusion import (
    DensityField,
    DiffusionModel,
    brownian_survival,
    extrapolate_net_flux,
    flux_double_integral,
    flux_estimate,
    flux_lr_finite_dt,
    flux_rl_finite_dt,
    gaussian_moment_identities,
    net_flux_closed_form,
    normal_sampler,
    point_mass,
    simulate_absorbing,
)

SQ2 = math.sqrt(2.0)
OU = DiffusionModel.ornstein_uhlenbeck()
BM = DiffusionModel.brownian(SQ2)
IMAGE = DensityField.absorbed_brownian(-1.0, SQ2)


def _first_passage_density(t, d=1.0, diff=1.0):
    return d / math.sqrt(4 * math.pi * diff * t**3) * math.exp(-d * d / (4 * diff * t))


@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 0.3])
def test_moment_identities(sigma):
    got = gaussian_moment_identities(sigma)
    exact = (3 * sigma**4 / 4, sigma**2 / 2, sigma**2 / 4)
    assert np.allclose(got, exact, rtol=0, atol=1e-10)


def test_moment_identities_scaling():
    a, b = gaussian_moment_identities(1.0), gaussian_moment_identities(1.7)
    assert b[0] / a[0] == pytest.approx(1.7**4, rel=1e-12)
    assert b[1] / a[1] == pytest.approx(1.7**2, rel=1e-12)
    assert b[2] / a[2] == pytest.approx(1.7**2, rel=1e-12)
    with pytest.raises(InvalidArgument):
        gaussian_moment_identities(0.0)


def test_ou_stationary_state_has_zero_flux():
    p = DensityField.gaussian(0.0, 1.0)
    for x1 in np.linspace(-3, 3, 13):
        assert abs(net_flux_closed_form(OU, p, x1, 0.0)) < 1e-15


@pytest.mark.parametrize("x1", [-1.5, 0.0, 0.4, 2.0])
def test_heat_kernel_net_flux(x1):
    s2 = 1.7
    sigma = 0.8
    p = DensityField.gaussian(0.0, s2)
    model = DiffusionModel.brownian(sigma)
    expected = sigma**2 / 2 * x1 / s2 * float(p(x1, 0.0))
    assert net_flux_closed_form(model, p, x1, 0.0) == pytest.approx(expected, rel=1e-12, abs=1e-15)


def test_finite_difference_derivatives_match_analytic():
    p = DensityField.gaussian(0.3, 0.5)
    numeric = DensityField(p.p, None, p.scale)
    sig = DiffusionModel(lambda x, t: -x, lambda x, t: 1.0 + 0.2 * np.tanh(x))
    sig_exact = DiffusionModel(
        lambda x, t: -x, lambda x, t: 1.0 + 0.2 * np.tanh(x), sigma_dx=lambda x, t: 0.2 / np.cosh(x) ** 2
    )
    for x1 in (-0.5, 0.1, 0.9):
        assert net_flux_closed_form(sig, numeric, x1, 0.0) == pytest.approx(
            net_flux_closed_form(sig_exact, p, x1, 0.0), rel=1e-9
        )


def test_reduced_integral_matches_raw_double_integral():
    d = DensityField.ou_transient()
    for direction, fn in (("lr", flux_lr_finite_dt), ("rl", flux_rl_finite_dt)):
        raw = flux_double_integral(OU, d, 0.5, 0.0, 1e-2, direction)
        assert fn(OU, d, 0.5, 0.0, 1e-2) == pytest.approx(raw, rel=1e-8)


def test_divergence_law_interior():
    d = DensityField.ou_transient()
    x1 = 0.5
    limit = SQ2 * float(d(x1, 0.0)) / math.sqrt(2 * math.pi)
    scaled = [math.sqrt(dt) * flux_lr_finite_dt(OU, d, x1, 0.0, dt) for dt in (1e-4, 1e-6, 1e-8)]
    errs = [abs(s - limit) for s in scaled]
    assert errs[-1] < 1e-3 * limit
    assert errs[0] > errs[1] > errs[2]


def test_zero_density_gives_zero_flux():
    z = DensityField.zero()
    assert flux_lr_finite_dt(OU, z, 0.0, 0.0, 1e-3) == 0
    assert flux_rl_finite_dt(OU, z, 0.0, 0.0, 1e-3) == 0


def test_mirror_symmetry():
    p = DensityField.gaussian(0.0, 1.0)
    bm = DiffusionModel.brownian(1.3)
    lr = flux_lr_finite_dt(bm, p, 0.0, 0.0, 1e-3)
    rl = flux_rl_finite_dt(bm, p, 0.0, 0.0, 1e-3)
    assert lr == pytest.approx(rl, rel=1e-13)
    # swapping the rays = reflecting the problem: J_RL(x1) of (b, p) equals J_LR(-x1) of the mirror image
    d = DensityField.ou_transient(mean0=0.7)
    mirrored = DensityField(lambda x, t: d(-np.asarray(x), t))
    m_ou = DiffusionModel.polynomial_drift((0.0, -1.0), SQ2)  # -b(-x) = -x again
    assert flux_rl_finite_dt(OU, d, 0.3, 0.0, 1e-4) == pytest.approx(
        flux_lr_finite_dt(m_ou, mirrored, -0.3, 0.0, 1e-4), rel=1e-12
    )


@pytest.mark.parametrize("x1", [-1.0, -0.5, 0.0, 0.5, 1.0])
def test_net_flux_limit(x1):
    d = DensityField.ou_transient()
    est, err = extrapolate_net_flux(OU, d, x1, 0.0)
    assert est == pytest.approx(net_flux_closed_form(OU, d, x1, 0.0), rel=1e-6)
    fe = flux_estimate(OU, d, x1, 0.0, 1e-4)
    assert fe.j_net == pytest.approx(fe.j_lr - fe.j_rl) and fe.divergent


def test_absorbing_boundary_rl_vanishes():
    for dt in (1e-3, 1e-6):
        assert flux_rl_finite_dt(BM, IMAGE, 0.0, 0.5, dt) == 0.0


def test_absorbing_boundary_lr_limit_is_quarter_slope():
    # A single Gaussian step from the absorbing point's left neighbourhood gives
    # lim J_LR(0, dt) = -sigma^2 p'(0) / 4 (half of the net boundary current).
    t = 0.5
    dp0 = float(IMAGE.dx(0.0, t))
    values = [flux_lr_finite_dt(BM, IMAGE, 0.0, t, dt) for dt in (1e-6, 1e-7, 1e-8)]
    assert values[-1] == pytest.approx(-2.0 * dp0 / 4, rel=1e-3)


@pytest.mark.xfail(strict=True, reason="one-step J_LR at an absorbing point tends to half of -(sigma^2 p/2)'")
def test_absorbing_boundary_lr_equals_net_current():
    t = 0.5
    got = flux_lr_finite_dt(BM, IMAGE, 0.0, t, 1e-8)
    assert got == pytest.approx(net_flux_closed_form(BM, IMAGE, 0.0, t), rel=0.01)


def test_boundary_current_is_first_passage_density():
    for t in (0.2, 0.5, 1.0):
        assert net_flux_closed_form(BM, IMAGE, 0.0, t) == pytest.approx(_first_passage_density(t), rel=1e-12)
        assert net_flux_closed_form(BM, IMAGE, 0.0, t) > 0


def test_conservation_law_for_image_solution():
    x = np.linspace(-4, -0.05, 80)
    t, h, k = 0.6, 1e-3, 1e-4
    dpdt = (IMAGE(x, t + k) - IMAGE(x, t - k)) / (2 * k)
    J = lambda z: np.array([net_flux_closed_form(BM, IMAGE, zz, t) for zz in z])  # noqa: E731
    djdx = (J(x + h) - J(x - h)) / (2 * h)
    assert np.allclose(dpdt + djdx, 0.0, atol=1e-6)


# ---------------------------------------------------------------------------
# Monte Carlo


def test_reflecting_only_survives():
    c = simulate_absorbing(BM, point_mass(-1.0), math.inf, 0.1, 1e-3, 2000, 1)
    assert np.all(c.survival == 1.0)


def test_survival_small_run_against_images():
    c = simulate_absorbing(BM, point_mass(-1.0), 0.0, 0.5, 1e-3, 20000, 3)
    for t in (0.1, 0.3, 0.5):
        i = int(round(t / 1e-3))
        assert abs(c.survival[i] - brownian_survival(t)) < 3 * c.stderr[i] + 1e-12
    assert np.all(np.diff(c.survival) <= 0)


def test_naive_detection_is_biased_high_and_refines():
    # step-resolution detection misses excursions between steps
    exact = float(brownian_survival(0.5))
    coarse = simulate_absorbing(BM, point_mass(-1.0), 0.0, 0.5, 1e-2, 40000, 5, bridge=False).survival[-1]
    fine = simulate_absorbing(BM, point_mass(-1.0), 0.0, 0.5, 1e-3, 40000, 5, bridge=False).survival[-1]
    assert coarse - exact > fine - exact > 0


def test_seed_determinism_and_sensitivity():
    a = simulate_absorbing(BM, normal_sampler(-1.0, 0.2), 0.0, 0.2, 1e-3, 10000, 11)
    b = simulate_absorbing(BM, normal_sampler(-1.0, 0.2), 0.0, 0.2, 1e-3, 10000, 11)
    c = simulate_absorbing(BM, normal_sampler(-1.0, 0.2), 0.0, 0.2, 1e-3, 10000, 12)
    assert np.array_equal(a.survival, b.survival)
    assert not np.array_equal(a.survival, c.survival)


def test_ou_drift_survives_longer():
    # mean reversion towards 0 from the left of a boundary at 1 delays absorption
    bm = DiffusionModel.brownian(1.0)
    ou = DiffusionModel.ornstein_uhlenbeck(2.0, 1.0)
    s_bm = simulate_absorbing(bm, point_mass(0.0), 1.0, 1.0, 1e-3, 10000, 4).survival[-1]
    s_ou = simulate_absorbing(ou, point_mass(0.0), 1.0, 1.0, 1e-3, 10000, 4).survival[-1]
    assert s_ou > s_bm


def test_simulation_argument_checks():
    with pytest.raises(InvalidArgument):
        simulate_absorbing(DiffusionModel(lambda x, t: x, lambda x, t: 1.0), point_mass(0), 1.0, 1.0, 1e-3, 100, 0)
    with pytest.raises(InvalidArgument):
        simulate_absorbing(BM, point_mass(-1), 0.0, 1.0, 0.3, 100, 0)
    c = simulate_absorbing(BM, point_mass(-1), 0.0, 0.2, 1e-3, 1000, 0)
    with pytest.raises(InvalidArgument):
        c.decay_rate(0.15, 0.1)


def test_record_every_subsamples():
    full = simulate_absorbing(BM, point_mass(-1), 0.0, 0.1, 1e-3, 5000, 9)
    sub = simulate_absorbing(BM, point_mass(-1), 0.0, 0.1, 1e-3, 5000, 9, record_every=7)
    assert sub.t[-1] == pytest.approx(0.1)
    idx = np.rint(sub.t / 1e-3).astype(int)
    assert np.array_equal(sub.survival, full.survival[idx])


def test_survival_formula():
    assert brownian_survival(1.0) == pytest.approx(special.erf(0.5))
