import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structops.discretization import (
    DiscreteOperator,
    Variant,
    identity,
    inner,
    make_grid,
    op_norm,
    project_operator,
    weighted_adjoint,
)
from structops.errors import InvalidSpecError
from structops.operators import build_S, kernel_samples

from conftest import all_builtin, scalar


class TestGrid:
    def test_two_panels(self):
        g = make_grid(1, 2)
        np.testing.assert_array_equal(g.nodes, [0, 0.5, 1])
        np.testing.assert_array_equal(g.weights, [0.25, 0.5, 0.25])

    def test_weight_sum(self):
        g = make_grid(2, 4)
        assert g.h == 0.5
        assert g.weights.sum() == pytest.approx(2)

    def test_interior_weights(self):
        np.testing.assert_allclose(make_grid(1, 3).weights[1:-1], 1 / 3)

    @pytest.mark.parametrize("l,N", [(0, 4), (-1, 4), (1, 1), (1, 0), (float("nan"), 4)])
    def test_invalid(self, l, N):
        with pytest.raises(InvalidSpecError):
            make_grid(l, N)

    def test_subgrid_keeps_spacing(self):
        g = make_grid(1, 64)
        s = g.sub(16)
        assert s.h == g.h and s.N == 16
        np.testing.assert_array_equal(s.nodes, g.nodes[:17])


def _random_op(rng, n, m):
    M = rng.standard_normal((n * m, n * m)) + 1j * rng.standard_normal((n * m, n * m))
    return M


class TestAdjoint:
    def test_identity(self):
        I = identity(make_grid(1, 5), 2)
        np.testing.assert_array_equal(weighted_adjoint(I).matrix, I.matrix)

    def test_hermitian_kernel_is_selfadjoint(self):
        S = build_S(scalar("linear", 1.0), make_grid(1, 8))
        np.testing.assert_allclose(weighted_adjoint(S.base).matrix, S.matrix, atol=1e-15)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(2, 7), st.integers(1, 3), st.integers(0, 2**32 - 1))
    def test_involution_and_inner_product(self, N, m, seed):
        rng = np.random.default_rng(seed)
        g = make_grid(rng.uniform(0.5, 2), N)
        op = DiscreteOperator(g, m, _random_op(rng, g.n, m))
        np.testing.assert_allclose(weighted_adjoint(weighted_adjoint(op)).matrix, op.matrix, atol=1e-12)
        f = rng.standard_normal(g.n * m) + 1j * rng.standard_normal(g.n * m)
        u = rng.standard_normal(g.n * m) + 1j * rng.standard_normal(g.n * m)
        lhs = inner(g, m, op.matrix @ f, u)
        rhs = inner(g, m, f, weighted_adjoint(op).matrix @ u)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


class TestNorm:
    def test_zero(self):
        g = make_grid(1, 4)
        assert op_norm(np.zeros((5, 5)), g, 1) == 0

    def test_identity(self):
        assert op_norm(identity(make_grid(1, 4), 2)) == pytest.approx(1)

    def test_single_entry(self):
        g = make_grid(1, 2)
        M = np.zeros((3, 3))
        M[0, 0] = 0.37
        assert op_norm(M, g, 1) == pytest.approx(0.37)


class TestProjection:
    def test_full_projection_is_identity(self):
        S = build_S(scalar("trig", 0.8, omega=2.0), make_grid(1, 8))
        assert project_operator(S, 8) is S

    def test_nested_samples(self):
        fn = scalar("polynomial", 0.4, 1.0, -0.5)
        S = build_S(fn, make_grid(1, 16))
        P = project_operator(S, 8)
        direct = build_S(fn, S.grid.sub(8))
        np.testing.assert_array_equal(P.kernel_samples, direct.kernel_samples)
        np.testing.assert_array_equal(P.matrix, direct.matrix)

    @pytest.mark.parametrize("r", [0, 9, 2.5])
    def test_bad_index(self, r):
        S = build_S(scalar("linear", 1.0), make_grid(1, 8))
        with pytest.raises(InvalidSpecError):
            project_operator(S, r)


@pytest.mark.parametrize("name", ["constant", "linear", "trig", "polynomial", "fourier_random"])
def test_kernel_samples_bit_identical_across_grids(name):
    fn = all_builtin()[name]
    big, _ = kernel_samples(fn, make_grid(1.0, 8))
    for sub in (make_grid(1.0, 8).sub(4), make_grid(0.5, 4)):
        small, _ = kernel_samples(fn, sub)
        assert big[:5, :5].tobytes() == small.tobytes()


def test_variant_signs():
    assert Variant.SELFADJOINT.kernel_sign == -1
    assert Variant.SKEW.kernel_sign == 1
