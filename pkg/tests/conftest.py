import numpy as np
import pytest

from structops.matfun import Family, MatrixFunction, MatrixFunctionSpec, builtin_families, make_family


def scalar(family, *coefs, l=1.0, **kw):
    return make_family(MatrixFunctionSpec(Family(family), 1, 1, tuple(coefs), **kw), l)


def rectangular_x_sin(l=1.0):
    """``Phi1(x) = [x, 0.3 sin x]`` with m1 = 2, m2 = 1; not one of the built-in families."""
    spec = MatrixFunctionSpec(Family.LINEAR, 2, 1, (np.array([[1.0, 0.0]]),))

    def phi(x):
        x = np.asarray(x, float)
        return np.stack([x, 0.3 * np.sin(x)], axis=-1)[..., None, :].astype(complex)

    def dphi(x):
        x = np.asarray(x, float)
        return np.stack([np.ones_like(x), 0.3 * np.cos(x)], axis=-1)[..., None, :].astype(complex)

    return MatrixFunction(spec, l, phi, dphi)


def all_builtin(l=1.0, m1=1, m2=1):
    return {name: make_family(spec, l) for name, spec in builtin_families(m1, m2).items()}


@pytest.fixture
def linear():
    return scalar("linear", 1.0)


@pytest.fixture
def trig_offset():
    """``Phi1(x) = 0.4 + 0.3 sin 2x``."""
    def phi(x):
        return (0.4 + 0.3 * np.sin(2 * np.asarray(x, float)))[..., None, None].astype(complex)

    def dphi(x):
        return (0.6 * np.cos(2 * np.asarray(x, float)))[..., None, None].astype(complex)

    return MatrixFunction(MatrixFunctionSpec(Family.TRIG, 1, 1, (0.3,), omega=2.0), 1.0, phi, dphi)
