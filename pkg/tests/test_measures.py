import math

import numpy as np
import pytest
import scipy.integrate

from spinglass import measures as ms


GAUSS = ms.GaussianLaw()
SEMI = ms.SemicircleLaw()


def random_discrete(rng, max_atoms=12, span=3.0):
    m = int(rng.integers(1, max_atoms))
    atoms = rng.uniform(-span, span, size=m)
    w = rng.dirichlet(np.ones(m))
    return ms.DiscreteMeasure(atoms, w)


# ---------------------------------------------------------------------- laws

def test_law_cdf_limits():
    for law in (GAUSS, SEMI):
        assert abs(float(law.cdf(np.array(-12.0)))) <= 1e-15
        assert abs(float(law.cdf(np.array(12.0))) - 1.0) <= 1e-15
        x = np.linspace(-5, 5, 201)
        assert np.all(np.diff(law.cdf(x)) >= -1e-15)


def test_gaussian_antiderivative_identity():
    # int Phi = x Phi + phi, cross-checked by quadrature
    for x in (-2.0, -0.5, 0.0, 1.0, 2.5):
        q, _ = scipy.integrate.quad(lambda u: GAUSS.cdf(u), -14, x)
        assert abs(q - float(GAUSS.cdf_antiderivative(np.array(x)))) <= 1e-9


def test_semicircle_antiderivative_identity():
    for x in (-1.9, -0.7, 0.0, 0.4, 1.99, 2.5):
        q, _ = scipy.integrate.quad(lambda u: SEMI.cdf(u), -2.0, x)
        assert abs(q - float(SEMI.cdf_antiderivative(np.array(x)))) <= 1e-9


# ----------------------------------------------------------------------- W1

def test_w1_delta_zero_gaussian():
    # E|Z| = sqrt(2/pi), with an independent quadrature oracle
    got = ms.w1_to_law(np.array([0.0]), GAUSS)
    assert abs(got - math.sqrt(2.0 / math.pi)) <= 1e-6
    oracle, _ = scipy.integrate.quad(
        lambda u: abs(GAUSS.cdf(u) - (1.0 if u >= 0 else 0.0)), -12, 12, limit=200
    )
    assert abs(got - oracle) <= 1e-8


def test_w1_delta_zero_semicircle():
    # E|X| = 8/(3 pi) for the radius-2 semicircle
    got = ms.w1_to_law(np.array([0.0]), SEMI)
    assert abs(got - 8.0 / (3.0 * math.pi)) <= 1e-10


def test_w1_quantile_coupling():
    n = 10**5
    from scipy.special import ndtri

    q = ndtri((np.arange(n) + 0.5) / n)
    got = ms.w1_to_law(q, GAUSS)
    # true value is ~2.4e-5, dominated by the two tail cells
    assert got <= 3e-5

    # independent oracle at smaller n: trapezoid integration of |F_n - F|
    n = 1000
    q = ndtri((np.arange(n) + 0.5) / n)
    got = ms.w1_to_law(q, GAUSS)
    xs = np.linspace(-9, 9, 2_000_001)
    f_n = np.searchsorted(q, xs, side="right") / n
    ref = np.trapezoid(np.abs(f_n - GAUSS.cdf(xs)), xs)
    assert abs(got - ref) <= 1e-6


def test_w1_bisect_tolerance_stability():
    rng = np.random.default_rng(3)
    atoms = rng.standard_normal(64)
    a = ms.w1_to_law(atoms, GAUSS, bisect_tol=1e-10)
    b = ms.w1_to_law(atoms, GAUSS, bisect_tol=1e-12)
    assert abs(a - b) <= 1e-8


def test_w1_discrete_identity_and_shift():
    rng = np.random.default_rng(4)
    mu = random_discrete(rng)
    assert ms.w1_discrete(mu, mu) == 0.0
    # shifting a point mass by t costs exactly t
    assert abs(ms.w1_discrete(np.array([0.0]), np.array([1.7])) - 1.7) <= 1e-15


# -------------------------------------------------------------- dbl distance

def test_dbl_identity_and_two_point():
    rng = np.random.default_rng(5)
    mu = random_discrete(rng)
    assert ms.dbl_discrete(mu, mu) == 0.0
    # closed form sup over M+L=1 of min(2M, tL) = 2t/(t+2)
    for t in (0.5, 1.0, 2.0, 5.0):
        got = ms.dbl_discrete(np.array([0.0]), np.array([t]))
        assert abs(got - 2.0 * t / (t + 2.0)) <= 1e-4


def test_dbl_sweep_matches_lp_oracle():
    rng = np.random.default_rng(6)
    for _ in range(25):
        mu, nu = random_discrete(rng), random_discrete(rng)
        sweep = ms.dbl_discrete(mu, nu, method="sweep")
        lp = ms.dbl_discrete(mu, nu, method="lp")
        assert abs(sweep - lp) <= 1e-5 * max(1.0, lp)


def test_dbl_fixed_split_matches_lp():
    # the inner solver at fixed (M, L) against a direct LP
    from scipy.optimize import linprog
    from scipy import sparse

    rng = np.random.default_rng(7)
    for _ in range(20):
        mu, nu = random_discrete(rng), random_discrete(rng)
        xs = np.unique(np.concatenate([mu.atoms, nu.atoms]))
        lip = float(rng.uniform(0.05, 0.95))
        m_bound = 1.0 - lip
        got = ms.dbl_fixed_split(mu, nu, m_bound, lip)

        d = np.zeros(xs.shape[0])
        d[np.searchsorted(xs, mu.atoms)] += mu.weights
        d[np.searchsorted(xs, nu.atoms)] -= nu.weights
        m = xs.shape[0]
        if m == 1:
            assert got == 0.0
            continue
        rows, cols, vals = [], [], []
        for i in range(m - 1):
            rows += [2 * i] * 2 + [2 * i + 1] * 2
            cols += [i + 1, i, i + 1, i]
            vals += [1.0, -1.0, -1.0, 1.0]
        a_ub = sparse.csr_matrix((vals, (rows, cols)), shape=(2 * (m - 1), m))
        b_ub = np.repeat(lip * np.diff(xs), 2)
        res = linprog(-d, A_ub=a_ub, b_ub=b_ub, bounds=[(-m_bound, m_bound)] * m, method="highs")
        assert res.status == 0
        assert abs(got - (-res.fun)) <= 1e-9


def test_dbl_metric_axioms():
    rng = np.random.default_rng(8)
    for _ in range(40):
        mu, nu = random_discrete(rng), random_discrete(rng)
        ab = ms.dbl_discrete(mu, nu)
        ba = ms.dbl_discrete(nu, mu)
        assert abs(ab - ba) <= 1e-9
        rho = random_discrete(rng)
        ac = ms.dbl_discrete(mu, rho)
        cb = ms.dbl_discrete(rho, nu)
        assert ab <= ac + cb + 1e-7


def test_dbl_below_w1():
    rng = np.random.default_rng(9)
    for _ in range(30):
        mu, nu = random_discrete(rng), random_discrete(rng)
        assert ms.dbl_discrete(mu, nu) <= ms.w1_discrete(mu, nu) + 1e-7


def test_dbl_to_law_self_distance_and_slack():
    grid = GAUSS.default_grid()
    nu, slack = grid.discretize(GAUSS)
    assert slack <= grid.step
    val, slack2 = ms.dbl_to_law(nu, GAUSS)
    assert val <= 2 * grid.step


def test_dbl_to_law_delta_zero():
    val, slack = ms.dbl_to_law(np.array([0.0]), GAUSS)
    # LP-oracle reference value for the budget convention M + L = 1
    assert abs(val - 0.42876) <= 2e-3
    assert val <= ms.w1_to_law(np.array([0.0]), GAUSS)


def test_dbl_grid_validation():
    with pytest.raises(ValueError):
        ms.GridSpec(-8, 8, 0.06)
    with pytest.raises(ValueError):
        ms.GridSpec(3, -3, 0.01)


# ---------------------------------------------------------------- truncation

def hat_function(height, half_width):
    return ms.PiecewiseLinearFn(
        np.array([-half_width, 0.0, half_width]), np.array([0.0, height, 0.0])
    )


def test_truncate_zero_function():
    z = ms.PiecewiseLinearFn(np.array([-1.0, 1.0]), np.array([0.0, 0.0]))
    zr = ms.truncate_bl(z, 2.0)
    assert zr.sup_norm() == 0.0


def test_truncate_branch_values():
    # f climbing to 1/2 at R=1: ramp hits 0.25 at 1.25 and 0 from 1.5 on
    f = ms.PiecewiseLinearFn(np.array([-1.0, -0.5, 0.5, 1.0]), np.array([-0.5, -0.25, 0.25, 0.5]))
    fr = ms.truncate_bl(f, 1.0)
    assert abs(float(fr(1.25)) - 0.25) <= 1e-15
    assert float(fr(1.5)) == 0.0
    assert float(fr(2.0)) == 0.0
    sup = fr.support_bounds()
    assert sup[0] >= -2.0 - 1e-12 and sup[1] <= 2.0 + 1e-12


def test_truncate_inactive_when_supported_inside():
    f = ms.PiecewiseLinearFn(
        np.array([-1.0, -0.5, 0.0, 0.5, 1.0]), np.array([0.0, 0.3, 0.0, -0.3, 0.0])
    )
    fr = ms.truncate_bl(f, 2.0)
    x = np.linspace(-3, 3, 301)
    assert np.max(np.abs(fr(x) - f(x))) <= 1e-15


def test_truncate_idempotent():
    rng = np.random.default_rng(11)
    for _ in range(20):
        bps = np.sort(rng.uniform(-4, 4, size=7))
        bps = np.concatenate([bps, [5.0]])
        vals = rng.uniform(-0.4, 0.4, size=8)
        f = ms.PiecewiseLinearFn(bps, vals)
        # normalize into the unit max-norm ball and pin f(0) = 0
        vals = vals - float(f(0.0))
        scale = max(f.lipschitz(), np.max(np.abs(vals)), 1.0)
        f = ms.PiecewiseLinearFn(bps, vals / scale)
        fr = ms.truncate_bl(f, 2.0)
        frr = ms.truncate_bl(fr, 2.0)
        assert np.array_equal(fr.breakpoints, frr.breakpoints)
        assert np.array_equal(fr.values, frr.values)
        # sup never grows; Lipschitz capped by the unit ramp slope
        # (up to roundoff in the ramp endpoint arithmetic)
        assert fr.sup_norm() <= f.sup_norm() + 1e-15
        assert fr.lipschitz() <= max(f.lipschitz(), 1.0) + 1e-12


def test_truncate_rejects_bad_input():
    f = hat_function(2.0, 1.0)  # sup 2 > 1
    with pytest.raises(ValueError):
        ms.truncate_bl(f, 1.0)


# --------------------------------------------------------------------- Fejer

def test_fejer_kernel_values():
    lam = 37.0
    assert abs(ms.fejer_kernel(lam, 0.0) - lam / (2 * math.pi)) <= 1e-14
    assert abs(ms.fejer_kernel(lam, 2 * math.pi / lam)) <= 1e-14
    x = np.linspace(-5, 5, 1001)
    assert np.all(ms.fejer_kernel(lam, x) >= 0.0)


def test_fejer_kernel_mass():
    lam = 50.0
    mass, _ = scipy.integrate.quad(
        lambda u: ms.fejer_kernel(lam, u), -200 / lam, 200 / lam, limit=3000
    )
    assert abs(mass - 1.0) <= 1e-2


def test_fejer_convolve_zero():
    z = ms.PiecewiseLinearFn(np.array([-1.0, 1.0]), np.array([0.0, 0.0]))
    out = ms.fejer_convolve(z, 100.0, np.linspace(-2, 2, 11))
    assert np.max(np.abs(out)) == 0.0


def test_fejer_convolve_against_quadrature():
    f = hat_function(0.5, 4.0)
    lam = 80.0
    pts = np.array([-3.7, 0.0, 1.1, 3.9, 4.4])
    got = ms.fejer_convolve(f, lam, pts)
    for x, g in zip(pts, got):
        ref, err = scipy.integrate.quad(
            lambda y: f(y) * ms.fejer_kernel(lam, x - y), -4, 4, limit=4000
        )
        assert err < 1e-7
        assert abs(g - ref) <= max(1e-6, 10 * err)


def test_fejer_convolve_sup_bound():
    # hat of height 1/2 on [-4, 4]: support half-width 2R = 4
    f = hat_function(0.5, 4.0)
    lam = 100.0
    radius = 2.0
    xs = np.linspace(-6, 6, 4001)
    flam = ms.fejer_convolve(f, lam, xs)
    bound = (8 * math.log(lam) + 8 * math.log(2 * radius) + 6) / (math.pi * lam)
    assert np.max(np.abs(f(xs) - flam)) <= bound
    # convolution against a unit-mass nonnegative kernel cannot raise the sup
    assert np.max(np.abs(flam)) <= f.sup_norm() + 1e-6


def test_fejer_convolve_exterior_decay():
    f = hat_function(0.5, 4.0)
    lam = 100.0
    xs = np.array([4.0 + 50 / lam + 0.1, 6.0, 8.0])
    flam = ms.fejer_convolve(f, lam, xs)
    assert np.all(np.abs(flam) <= 4.0 / lam)


# ----------------------------------------------------------------- tail mass

def test_tail_mass():
    assert ms.tail_mass(np.array([0.0]), 0.5) == 0.0
    assert ms.tail_mass(np.array([-1.0, 1.0]), 0.5) == 1.0
    assert ms.tail_mass(np.array([-1.0, 1.0]), 2.0) == 0.0


def test_g_class_membership():
    r = 2.0
    m = 8
    grid = np.linspace(-2 * r, 2 * r, m + 1)
    vals = np.array([0.0, 0.2, 0.1, -0.1, 0.0, 0.15, 0.2, 0.1, 0.0])
    f = ms.PiecewiseLinearFn(grid, vals)
    assert f.in_g_class(r, m)
    shifted = ms.PiecewiseLinearFn(grid, vals + 0.05)
    assert not shifted.in_g_class(r, m)  # f(0) != 0
