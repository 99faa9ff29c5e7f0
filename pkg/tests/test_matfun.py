import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from structops.errors import DomainError, InvalidSpecError
from structops.matfun import (
    Family,
    MatrixFunctionSpec,
    builtin_families,
    eval_phi,
    eval_phi_deriv,
    make_family,
    spec_from_dict,
)

from conftest import all_builtin, scalar


class TestExamples:
    def test_linear(self):
        fn = scalar("linear", 1.0)
        assert eval_phi(fn, 0.5)[0, 0] == 0.5
        assert eval_phi_deriv(fn, 0.5)[0, 0] == 1.0
        assert eval_phi(fn, 1.0)[0, 0] == 1.0

    def test_zero(self):
        fn = make_family(MatrixFunctionSpec(Family.ZERO, 2, 3))
        assert eval_phi(fn, 0.3).shape == (3, 2)
        assert not eval_phi(fn, 0.3).any() and not eval_phi_deriv(fn, 0.9).any()

    def test_trig(self):
        fn = scalar("trig", 1.0, omega=2.0)
        assert eval_phi(fn, 0.0)[0, 0] == 0.0
        assert eval_phi_deriv(fn, 0.0)[0, 0] == 2.0

    def test_constant(self):
        fn = scalar("constant", 0.4)
        assert eval_phi(fn, 0.7)[0, 0] == 0.4
        assert eval_phi_deriv(fn, 0.2)[0, 0] == 0.0

    def test_polynomial_square(self):
        fn = scalar("polynomial", 0, 0, 1)
        assert eval_phi_deriv(fn, 0.5)[0, 0] == pytest.approx(1.0)
        assert eval_phi(fn, 0.5)[0, 0] == pytest.approx(0.25)

    def test_fourier_random_deterministic(self):
        spec = MatrixFunctionSpec(Family.FOURIER_RANDOM, 2, 2, seed=7)
        a = eval_phi(make_family(spec), 0.3)
        b = eval_phi(make_family(spec), 0.3)
        assert a.tobytes() == b.tobytes()

    def test_fourier_random_vanishes_at_zero(self):
        fn = make_family(MatrixFunctionSpec(Family.FOURIER_RANDOM, 1, 2, seed=3))
        assert np.abs(fn.eval(0.0)).max() == 0.0

    def test_vectorised_shape(self):
        fn = make_family(MatrixFunctionSpec(Family.LINEAR, 2, 3, (np.ones((3, 2)),)))
        assert fn.eval(np.linspace(0, 1, 5)).shape == (5, 3, 2)


class TestErrors:
    def test_wrong_coefficient_shape(self):
        with pytest.raises(InvalidSpecError):
            MatrixFunctionSpec(Family.LINEAR, 2, 2, (np.ones((2, 3)),))

    def test_missing_coefficients(self):
        with pytest.raises(InvalidSpecError):
            make_family(MatrixFunctionSpec(Family.LINEAR, 1, 1))

    def test_trig_without_omega(self):
        with pytest.raises(InvalidSpecError):
            make_family(MatrixFunctionSpec(Family.TRIG, 1, 1, (1.0,)))

    def test_outside_domain(self):
        fn = scalar("linear", 1.0)
        with pytest.raises(DomainError):
            fn.eval(1.1)
        with pytest.raises(DomainError):
            fn.eval_deriv(-0.01)

    def test_spec_from_dict(self):
        spec = spec_from_dict({"family": "linear", "m1": 2, "m2": 1,
                               "coefficients": [["0.3+0.2j", {"re": 1, "im": -1}]]})
        assert spec.coefficients[0][0, 0] == 0.3 + 0.2j
        assert spec.coefficients[0][0, 1] == 1 - 1j
        with pytest.raises(InvalidSpecError):
            spec_from_dict({"family": "linear", "bogus": 1})


@settings(max_examples=32, deadline=None)
@given(st.floats(0.01, 0.99))
def test_derivative_matches_finite_difference(x):
    d = 1e-6
    for fn in list(all_builtin().values()) + list(all_builtin(m1=2, m2=3).values()):
        fd = (fn.eval(x + d) - fn.eval(x - d)) / (2 * d)
        np.testing.assert_allclose(fn.eval_deriv(x), fd, atol=1e-6)


def test_builtin_catalog_has_six_families():
    assert set(builtin_families()) == {f.value for f in Family}
