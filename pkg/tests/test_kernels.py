import numpy as np
import pytest
from scipy.integrate import dblquad, quad

from nlorlicz import (
    ValidationError,
    estimate_singularity_order,
    lambda_exterior,
    make_grid,
    make_kernel,
    poincare_constant,
    scaling_profile,
    tail_integral,
)
from nlorlicz.kernels import SPHERE_MEASURE, _shell_mass


class TestConstruction:
    def test_fractional_metadata(self):
        K = make_kernel("fractional", dim=2, alpha=1.0)
        assert K.q_star == 1.0
        assert K.alpha_order == 1.0
        z = np.array([[0.3, 0.4]])
        assert K.evaluate(z)[0] == pytest.approx(0.5 ** -3.0)

    def test_log_kernel_zero_order(self):
        K = make_kernel("log", dim=1, beta=1.0)
        assert K.q_star == 0.0
        assert K.alpha_order is None

    def test_dyadic_metadata(self):
        K = make_kernel("piecewise_dyadic", dim=1, mu=0.5)
        assert K.q_star == 0.5
        assert K.alpha_order is None
        assert not K.regular_v
        assert not K.monotone

    def test_radial_symmetry_exact(self):
        rng = np.random.default_rng(0)
        for K in (make_kernel("fractional", dim=2, alpha=0.7),
                  make_kernel("piecewise_dyadic", dim=2, mu=0.4)):
            z = rng.normal(size=(100, 2))
            assert np.array_equal(K.evaluate(z), K.evaluate(-z))

    def test_rejections_name_the_integral(self):
        with pytest.raises(ValidationError, match="origin integral"):
            make_kernel("fractional", dim=1, alpha=-0.2)
        with pytest.raises(ValidationError, match="tail integral"):
            make_kernel("fractional", dim=1, alpha=0.0)
        with pytest.raises(ValidationError, match="origin integral"):
            make_kernel("log", dim=1, beta=-1.5)
        with pytest.raises(ValidationError, match="tail integral"):
            make_kernel("two_exponent", dim=1, alpha_inner=0.5, alpha_outer=0.0)
        with pytest.raises(ValidationError):
            make_kernel("fractional", dim=3, alpha=0.5)

    def test_custom_radial_accepted_and_estimated(self):
        K = make_kernel(
            "custom_radial", dim=1,
            profile=lambda r: np.asarray(r, dtype=float) ** -1.5,
        )
        assert K.q_star == pytest.approx(0.5, abs=0.011)

    def test_custom_radial_integrable_rejected(self):
        with pytest.raises(ValidationError, match="origin integral"):
            make_kernel(
                "custom_radial", dim=1,
                profile=lambda r: np.exp(-np.asarray(r, dtype=float)),
            )

    def test_admissibility_integral_numeric(self):
        # the defining integral with weight min(1, |z|^(q*+0.1)) is finite:
        # weighted shell masses decay geometrically at depth, tail finite
        for K in (make_kernel("fractional", dim=1, alpha=0.5),
                  make_kernel("log", dim=1, beta=1.0),
                  make_kernel("piecewise_dyadic", dim=1, mu=0.5)):
            q0 = K.q_star + 0.1

            def weighted_shell(j):
                lo, hi = -(j + 1) * np.log(2.0), -j * np.log(2.0)
                val, _ = quad(
                    lambda t: float(K.profile(np.array(np.exp(t))))
                    * np.exp(t * (K.dim + q0)),
                    lo, hi, epsabs=0.0, epsrel=1e-9, limit=200)
                return val

            for j in (100, 120, 140):
                assert weighted_shell(j + 2) <= 0.999 * weighted_shell(j)
            assert np.isfinite(tail_integral(K, 1.0))


class TestTailIntegral:
    @pytest.mark.parametrize("dim,alpha", [(1, 0.5), (1, 1.2), (2, 0.5), (2, 1.0)])
    def test_fractional_closed_form(self, dim, alpha):
        K = make_kernel("fractional", dim=dim, alpha=alpha)
        for s in (0.5, 1.0, 3.0):
            exact = SPHERE_MEASURE[dim] * s ** -alpha / alpha
            assert tail_integral(K, s) == pytest.approx(exact, rel=1e-6)

    def test_two_exponent_closed_form(self):
        a1, a2 = 0.3, 0.9
        K = make_kernel("two_exponent", dim=1, alpha_inner=a1, alpha_outer=a2)
        s = 0.4
        exact = 2.0 * ((s ** -a1 - 1.0) / a1 + 1.0 / a2)
        assert tail_integral(K, s) == pytest.approx(exact, rel=1e-8)

    def test_monotone_and_vanishing(self):
        K = make_kernel("piecewise_dyadic", dim=1, mu=0.5)
        ss = np.logspace(-3, 2, 25)
        vals = [tail_integral(K, s) for s in ss]
        assert np.all(np.diff(vals) <= 1e-12)
        assert vals[-1] < 1e-1 * vals[0]

    def test_rejects_nonpositive_radius(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        with pytest.raises(ValidationError):
            tail_integral(K, 0.0)


def _box_exterior_reference(kern, bounds, x):
    """Independent route: integrate J over the four exterior slabs."""
    a1, b1, a2, b2 = bounds

    def J(y1, y2):
        return float(kern.profile(np.hypot(y1 - x[0], y2 - x[1])))

    total = 0.0
    for (lo1, hi1, lo2, hi2) in [
        (-np.inf, a1, -np.inf, np.inf),
        (b1, np.inf, -np.inf, np.inf),
        (a1, b1, -np.inf, a2),
        (a1, b1, b2, np.inf),
    ]:
        val, _ = dblquad(lambda y2, y1: J(y1, y2), lo1, hi1, lo2, hi2,
                         epsabs=1e-11, epsrel=1e-9)
        total += val
    return total


class TestLambdaExterior:
    def test_interval_center_closed_form(self):
        # unit interval around an interior point: exterior mass in closed form
        K = make_kernel("fractional", dim=1, alpha=0.5)
        g = make_grid("interval", 8, (-1.0, 1.0))
        assert lambda_exterior(K, g, [0.0]) == pytest.approx(2.0 / 0.5, rel=1e-8)
        x = 0.3
        exact = ((1.0 + x) ** -0.5 + (1.0 - x) ** -0.5) * 2.0 / 0.5 / 2.0 * 2.0
        # P(s)/2 per side with P(s) = 2 s^-a / a
        exact = (2.0 * (1.0 + x) ** -0.5 / 0.5 + 2.0 * (1.0 - x) ** -0.5 / 0.5) / 2.0
        assert lambda_exterior(K, g, [x]) == pytest.approx(exact, rel=1e-8)

    def test_ball_center_equals_tail(self):
        K = make_kernel("fractional", dim=2, alpha=1.0)
        g = make_grid("ball", 8, (0.0, 0.0, 1.0))
        assert lambda_exterior(K, g, [0.0, 0.0]) == pytest.approx(
            tail_integral(K, 1.0), rel=1e-10)

    def test_box_against_slab_decomposition(self):
        K = make_kernel("fractional", dim=2, alpha=1.0)
        g = make_grid("box", 8, (0.0, 1.0, 0.0, 1.0))
        for x in ([0.3, 0.45], [0.52, 0.81]):
            ref = _box_exterior_reference(K, g.bounds, x)
            assert lambda_exterior(K, g, x) == pytest.approx(ref, rel=1e-7)

    @pytest.mark.parametrize("shape,bounds", [
        ("interval", (-1.0, 1.0)),
        ("box", (0.0, 1.0, 0.0, 1.0)),
        ("ball", (0.0, 0.0, 1.0)),
    ])
    def test_volume_ball_lower_bound(self, shape, bounds):
        dim = 1 if shape == "interval" else 2
        K = make_kernel("fractional", dim=dim, alpha=0.5)
        g = make_grid(shape, 8, bounds)
        from nlorlicz.kernels import BALL_VOLUME
        r_om = (g.volume / BALL_VOLUME[dim]) ** (1.0 / dim)
        bound = tail_integral(K, r_om)
        for node in g.nodes:
            assert lambda_exterior(K, g, node) >= bound - 1e-8

    def test_monotone_toward_boundary(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        g = make_grid("interval", 8, (-1.0, 1.0))
        xs = np.linspace(0.0, 0.9, 10)
        vals = [lambda_exterior(K, g, [x]) for x in xs]
        assert np.all(np.diff(vals) > 0.0)

    @pytest.mark.parametrize("shape,bounds,direction", [
        ("box", (0.0, 1.0, 0.0, 1.0), np.array([1.0, 0.3])),
        ("ball", (0.0, 0.0, 1.0), np.array([0.6, 0.8])),
    ])
    def test_monotone_along_ray_2d(self, shape, bounds, direction):
        K = make_kernel("fractional", dim=2, alpha=1.0)
        g = make_grid(shape, 8, bounds)
        direction = direction / np.linalg.norm(direction)
        ts = np.linspace(0.0, 0.4, 6)
        vals = [lambda_exterior(K, g, g.center + t * direction) for t in ts]
        assert np.all(np.diff(vals) > 0.0)

    def test_rejects_exterior_point(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        g = make_grid("interval", 8, (-1.0, 1.0))
        with pytest.raises(ValidationError):
            lambda_exterior(K, g, [1.5])


class TestPoincareConstant:
    def test_interval_example(self):
        # inradius 1, R = 2, kernel minimum 2^-1.5, annulus measure 2
        K = make_kernel("fractional", dim=1, alpha=0.5)
        g = make_grid("interval", 8, (-1.0, 1.0))
        assert poincare_constant(K, g) == pytest.approx(2.0 ** -0.5, rel=1e-12)

    def test_shrinking_domain_grows_constant(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        sizes = [1.0, 0.5, 0.25]
        vals = [
            poincare_constant(K, make_grid("interval", 8, (-s, s))) for s in sizes
        ]
        assert vals[0] < vals[1] < vals[2]

    def test_nonmonotone_kernel_uses_scan(self):
        K = make_kernel("piecewise_dyadic", dim=1, mu=0.5)
        g = make_grid("interval", 8, (-0.1, 0.1))
        A = poincare_constant(K, g)
        # the scan minimum can be no larger than the profile at R
        assert A <= float(K.profile(np.array(0.2))) * 2.0 * 0.1 + 1e-12


class TestScalingProfile:
    def test_fractional_exact(self):
        K = make_kernel("fractional", dim=2, alpha=0.7)
        prof = scaling_profile(K)
        assert prof.finite
        assert prof.delta == pytest.approx(0.7, abs=1e-4)
        for lam in (1.1, 1.5, 2.0):
            assert prof.mu_eval(lam) == pytest.approx(lam ** 0.7, rel=1e-12)

    def test_mu_at_one_limit(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        prof = scaling_profile(K)
        assert abs(prof.mu_eval(1.0 + 1e-10) - 1.0) < 1e-9

    def test_two_exponent_max_rule(self):
        K = make_kernel("two_exponent", dim=1, alpha_inner=0.3, alpha_outer=0.9)
        prof = scaling_profile(K)
        assert prof.delta == pytest.approx(0.9, abs=1e-4)
        K2 = make_kernel("two_exponent", dim=1, alpha_inner=1.1, alpha_outer=0.4)
        assert scaling_profile(K2).delta == pytest.approx(1.1, abs=1e-4)

    def test_dyadic_reports_infinite(self):
        K = make_kernel("piecewise_dyadic", dim=1, mu=0.5)
        prof = scaling_profile(K)
        assert not prof.finite
        assert prof.delta is None

    def test_rescaled_sup_monotone(self):
        # lambda^N * mu(lambda) nondecreasing for the monotone-sup families
        for K in (make_kernel("fractional", dim=1, alpha=0.5),
                  make_kernel("two_exponent", dim=1, alpha_inner=0.3, alpha_outer=0.9)):
            prof = scaling_profile(K)
            lams = np.linspace(1.05, 2.0, 12)
            vals = [lam ** K.dim * prof.mu_eval(lam) for lam in lams]
            assert np.all(np.diff(vals) >= -1e-12)

    def test_rejects_bad_lambda_grid(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        with pytest.raises(ValidationError):
            scaling_profile(K, lambda_grid=(0.9, 1.1))


class TestSingularityEstimate:
    def test_fractional(self):
        K = make_kernel("fractional", dim=1, alpha=0.5)
        est, note = estimate_singularity_order(K)
        assert abs(est - 0.5) <= 0.01
        assert "heuristic" in note

    def test_log_kernel(self):
        K = make_kernel("log", dim=1, beta=1.0)
        est, _ = estimate_singularity_order(K)
        assert abs(est - 0.0) <= 0.011

    def test_dyadic(self):
        K = make_kernel("piecewise_dyadic", dim=2, mu=0.5)
        est, _ = estimate_singularity_order(K)
        assert abs(est - 0.5) <= 0.01

    def test_shell_masses_positive(self):
        K = make_kernel("log", dim=2, beta=-0.5)
        assert _shell_mass(K, 20) > 0.0

    def test_indeterminate_above_cap(self):
        # orders beyond N+2 are declared indeterminate rather than reported
        K = make_kernel("fractional", dim=1, alpha=3.5)
        est, note = estimate_singularity_order(K)
        assert est is None
        assert "indeterminate" in note
