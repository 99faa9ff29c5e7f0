import numpy as np
import pytest

from structops.discretization import Variant, make_grid
from structops.identity_lab import (
    EXACT_FLOOR,
    build_T_separable,
    component_residuals,
    constant_kernel,
    converged,
    convergence_study,
    dt_upsilon,
    separable_rhs_from,
    reconstruct_S,
    reconstruction_deviation,
    skew_equivalence,
    structured_residual,
    upsilon,
)
from structops.matfun import Family, MatrixFunctionSpec, make_family
from structops.operators import build_S

from conftest import all_builtin, rectangular_x_sin, scalar


class TestIdentityResidual:
    def test_constant_exact(self):
        assert structured_residual(scalar("constant", 0.4), make_grid(1, 8), "selfadjoint") <= 1e-12

    def test_zero_skew_exact(self):
        z = make_family(MatrixFunctionSpec(Family.ZERO))
        assert structured_residual(z, make_grid(1, 8), "skew") <= 1e-12

    def test_linear_ratio(self, linear):
        r64 = structured_residual(linear, make_grid(1, 64), "selfadjoint")
        r128 = structured_residual(linear, make_grid(1, 128), "selfadjoint")
        assert r64 <= EXACT_FLOOR or r64 / r128 >= 3

    @pytest.mark.parametrize("variant", list(Variant))
    def test_matrix_families(self, variant):
        fn = all_builtin(m1=2, m2=2)["polynomial"]
        r = [structured_residual(fn, make_grid(1, N), variant) for N in (16, 32, 64)]
        assert r[0] > r[1] > r[2]
        assert np.log2(r[1] / r[2]) >= 1.5

    def test_skew_equivalence(self):
        for fn in list(all_builtin().values()) + [rectangular_x_sin()]:
            r_skew, r_check = skew_equivalence(fn, make_grid(1, 32))
            assert abs(r_skew - r_check) <= 1e-12

    def test_l_rescaling(self):
        # linear family on [0, l] with N proportional to l: h fixed, residual scale-covariant
        fn1 = scalar("linear", 1.0, l=1.0)
        fn2 = scalar("linear", 1.0, l=2.0)
        r1 = structured_residual(fn1, make_grid(1.0, 32), "selfadjoint")
        r2 = structured_residual(fn2, make_grid(2.0, 64), "selfadjoint")
        assert r1 <= EXACT_FLOOR and r2 <= EXACT_FLOOR
        fn1 = scalar("trig", 0.8, omega=2.0, l=1.0)
        fn2 = scalar("trig", 0.8, omega=2.0, l=2.0)
        a = [structured_residual(fn1, make_grid(1.0, N), "selfadjoint") for N in (32, 64)]
        b = [structured_residual(fn2, make_grid(2.0, N), "selfadjoint") for N in (64, 128)]
        assert np.log2(a[0] / a[1]) == pytest.approx(np.log2(b[0] / b[1]), abs=0.2)


class TestComponentResiduals:
    def test_constant(self):
        r = component_residuals(scalar("constant", 0.7), make_grid(1, 16))
        assert r[0] <= 1e-12 and r[1:] == (0.0, 0.0, 0.0)

    def test_linear_only_last_nontrivial(self, linear):
        r = [component_residuals(linear, make_grid(1, N)) for N in (32, 64)]
        assert all(ri[k] <= 1e-12 for ri in r for k in range(3))
        assert r[1][3] <= EXACT_FLOOR or np.log2(r[0][3] / r[1][3]) >= 1.6

    def test_trig_offset_decreasing(self, trig_offset):
        r = np.array([component_residuals(trig_offset, make_grid(1, N)) for N in (32, 64, 128, 256)])
        for k in range(4):
            col = r[:, k]
            assert np.all(col <= EXACT_FLOOR) or np.all(np.diff(col) < 0)


class TestSeparableReconstruction:
    def test_upsilon_corner(self):
        k = constant_kernel(1.0, 1.0)
        assert upsilon(k, 0.0, 0.0, 1.0)[0, 0] == pytest.approx(-1.0)

    def test_upsilon_closed_form(self):
        k = constant_kernel(1.0, 1.0)
        for x, t in [(0.2, 0.7), (0.9, 0.1), (0.5, 0.5)]:
            want = -0.5 * (2 - abs(x - t) - x - t)
            assert upsilon(k, x, t, 1.0)[0, 0] == pytest.approx(want, abs=1e-13)

    @pytest.mark.parametrize("x,t", [(0.7, 0.2), (0.3, 0.8), (0.55, 0.1)])
    def test_dt_upsilon_against_finite_difference(self, x, t, trig_offset):
        k = separable_rhs_from(trig_offset, 1.0)
        d = 1e-5
        fd = (upsilon(k, x, t + d, 1.0) - upsilon(k, x, t - d, 1.0)) / (2 * d)
        got = dt_upsilon(k, np.array([x]), np.array([t]), 1.0, lower=t < x)[0]
        np.testing.assert_allclose(got, fd, atol=1e-8)

    def test_T_minus_identity(self):
        g = make_grid(1, 128)
        T = build_T_separable(constant_kernel(1.0, 1.0), g)
        assert np.linalg.norm(T.matrix + np.eye(g.n), 2) <= 5e-3

    def test_T_plus_identity(self):
        g = make_grid(1, 32)
        T = build_T_separable(constant_kernel(1.0, -1.0), g)
        assert np.abs(T.matrix - np.eye(g.n)).max() <= 1e-12

    def test_zero_family_reconstruction(self):
        g = make_grid(1, 16)
        z = make_family(MatrixFunctionSpec(Family.ZERO, 2, 2))
        np.testing.assert_allclose(reconstruct_S(z, g).matrix, np.eye(g.n * 2), atol=1e-12)
        assert reconstruction_deviation(z, g) <= 1e-10

    def test_skew_rejected(self, linear):
        with pytest.raises(ValueError):
            reconstruct_S(linear, make_grid(1, 8), "skew")

    @pytest.mark.parametrize("fn", [rectangular_x_sin(), scalar("trig", 0.8, omega=2.0),
                                    all_builtin(m1=2, m2=2)["fourier_random"]])
    def test_reconstruction_converges(self, fn):
        d = [reconstruction_deviation(fn, make_grid(1, N)) for N in (32, 64)]
        assert d[1] < d[0] and d[1] <= 0.05
        assert np.log2(d[0] / d[1]) >= 1.0

    def test_reconstruction_matches_S(self, linear):
        g = make_grid(1, 32)
        assert reconstruction_deviation(linear, g) <= 1e-10
        np.testing.assert_allclose(reconstruct_S(linear, g).matrix, build_S(linear, g).matrix,
                                   atol=1e-12)


class TestConvergenceHarness:
    def test_linear_orders(self, linear):
        rep = convergence_study(linear, "selfadjoint", [32, 64, 128])
        assert converged(rep)
        assert [r.N for r in rep] == [32, 64, 128]
        assert rep[0].order_estimate is None

    def test_trig_orders_in_band(self):
        rep = convergence_study(scalar("trig", 0.8, omega=2.0), "selfadjoint", [32, 64, 128])
        assert all(1.5 <= r.order_estimate <= 2.5 for r in rep[1:])

    def test_constant_exact(self):
        rep = convergence_study(scalar("constant", 0.4), "selfadjoint", [8, 16, 32])
        assert all(r.residual <= 1e-12 for r in rep)
        assert converged(rep)

    def test_skew_fourier_decreasing(self):
        fn = make_family(MatrixFunctionSpec(Family.FOURIER_RANDOM, 1, 1, seed=1))
        rep = convergence_study(fn, "skew", [16, 32, 64])
        assert rep[0].residual > rep[1].residual > rep[2].residual

    def test_components_reported(self, trig_offset):
        rep = convergence_study(trig_offset, "selfadjoint", [16, 32], components=True)
        assert len(rep[1].component_residuals) == 4

    @pytest.mark.parametrize("N_list", [[32], [64, 32], [16, 16]])
    def test_bad_ladder(self, linear, N_list):
        with pytest.raises(ValueError):
            convergence_study(linear, "selfadjoint", N_list)

    def test_pass_rule(self):
        from structops.identity_lab import ResidualReport
        slow = [ResidualReport("s", 32, 1e-3), ResidualReport("s", 64, 7e-4, order_estimate=0.5)]
        assert not converged(slow)
        exact = [ResidualReport("s", 32, 0.0), ResidualReport("s", 64, 1e-13)]
        assert converged(exact)
