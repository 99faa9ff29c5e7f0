"""Catalog of matrix functions ``Phi1: [0, l] -> C^{m2 x m1}`` with analytic derivatives.

Every family evaluates vectorised: for an input array of shape ``S`` the
result has shape ``S + (m2, m1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, InvalidSpecError

# relative slack for x slightly past l due to node roundoff (i*h vs l)
_DOMAIN_SLACK = 1e-12


class Family(str, Enum):
    ZERO = "zero"
    CONSTANT = "constant"
    LINEAR = "linear"
    TRIG = "trig"
    POLYNOMIAL = "polynomial"
    FOURIER_RANDOM = "fourier_random"


@dataclass(frozen=True)
class MatrixFunctionSpec:
    """Parameters of one test family.

    ``coefficients`` holds ``m2 x m1`` complex matrices whose meaning
    depends on the family: ``[C]`` for constant/linear/trig, ``[C0, ..., Ck]``
    for polynomial, and an optional ``[offset]`` for fourier_random.
    """

    family: Family
    m1: int = 1
    m2: int = 1
    coefficients: tuple = ()
    omega: float | None = None
    num_terms: int = 8
    decay: float = 2.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(
            self, "coefficients", tuple(_as_matrix(c, self.m1, self.m2) for c in self.coefficients)
        )


def _as_matrix(c, m1, m2) -> np.ndarray:
    a = np.asarray(c, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim == 1 and m2 == 1:
        a = a.reshape(1, -1)
    if a.shape != (m2, m1):
        raise InvalidSpecError(f"coefficient has shape {a.shape}, expected ({m2}, {m1})")
    a = a.copy()
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MatrixFunction:
    """Evaluator pair ``(Phi1, Phi1')`` on ``[0, l]``."""

    spec: MatrixFunctionSpec
    l: float
    _phi: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    _dphi: Callable[[np.ndarray], np.ndarray] = field(repr=False)

    @property
    def m1(self) -> int:
        return self.spec.m1

    @property
    def m2(self) -> int:
        return self.spec.m2

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        slack = _DOMAIN_SLACK * max(self.l, 1.0)
        if np.any(~np.isfinite(x)) or np.any(x < -slack) or np.any(x > self.l + slack):
            raise DomainError(f"argument outside [0, {self.l}]")
        return x

    def eval(self, x) -> np.ndarray:
        return self._phi(self._check(x))

    def eval_deriv(self, x) -> np.ndarray:
        return self._dphi(self._check(x))

    __call__ = eval


def _outer(scalars: np.ndarray, mat: np.ndarray) -> np.ndarray:
    return np.asarray(scalars)[..., None, None] * mat


def make_family(spec: MatrixFunctionSpec, l: float = 1.0) -> MatrixFunction:
    """Build the evaluator pair for ``spec`` on ``[0, l]``.

    ``l`` also sets the period scale of the fourier_random sine basis.
    """
    if spec.m1 < 1 or spec.m2 < 1:
        raise InvalidSpecError("m1 and m2 must be positive")
    if not l > 0:
        raise InvalidSpecError("interval length must be positive")
    shape = (spec.m2, spec.m1)
    coeffs = spec.coefficients
    fam = spec.family

    def need(k: int) -> Sequence[np.ndarray]:
        if len(coeffs) < k:
            raise InvalidSpecError(f"family {fam.value} needs {k} coefficient matrix(es)")
        return coeffs

    if fam is Family.ZERO:
        zero = np.zeros(shape, complex)
        phi = dphi = lambda x: _outer(np.zeros_like(x), zero)
    elif fam is Family.CONSTANT:
        (c,) = need(1)[:1]
        phi = lambda x: _outer(np.ones_like(x), c)
        dphi = lambda x: _outer(np.zeros_like(x), c)
    elif fam is Family.LINEAR:
        (c,) = need(1)[:1]
        phi = lambda x: _outer(x, c)
        dphi = lambda x: _outer(np.ones_like(x), c)
    elif fam is Family.TRIG:
        (c,) = need(1)[:1]
        if spec.omega is None:
            raise InvalidSpecError("trig family needs omega")
        w = float(spec.omega)
        phi = lambda x: _outer(np.sin(w * x), c)
        dphi = lambda x: _outer(w * np.cos(w * x), c)
    elif fam is Family.POLYNOMIAL:
        cs = need(1)
        dcs = [j * cj for j, cj in enumerate(cs)][1:]

        def horner(x, seq):
            acc = np.zeros(np.shape(x) + shape, complex)
            for cj in reversed(seq):
                acc = acc * np.asarray(x)[..., None, None] + cj
            return acc

        phi = lambda x: horner(x, cs)
        dphi = lambda x: horner(x, dcs) if dcs else _outer(np.zeros_like(x), cs[0] * 0)
    elif fam is Family.FOURIER_RANDOM:
        if spec.num_terms < 1 or not spec.decay > 0:
            raise InvalidSpecError("fourier_random needs num_terms >= 1 and decay > 0")
        rng = np.random.default_rng(spec.seed)
        K = spec.num_terms
        radius = np.sqrt(rng.random((K,) + shape))
        angle = 2 * np.pi * rng.random((K,) + shape)
        amps = radius * np.exp(1j * angle)
        ks = np.arange(1, K + 1)
        amps = amps / (ks.astype(float) ** spec.decay)[:, None, None]
        freqs = ks * np.pi / l
        offset = coeffs[0] if coeffs else np.zeros(shape, complex)

        def phi(x):
            acc = np.zeros(np.shape(x) + shape, complex) + offset
            for a, f in zip(amps, freqs):
                acc = acc + _outer(np.sin(f * x), a)
            return acc

        def dphi(x):
            acc = np.zeros(np.shape(x) + shape, complex)
            for a, f in zip(amps, freqs):
                acc = acc + _outer(f * np.cos(f * x), a)
            return acc
    else:  # pragma: no cover - Enum is exhaustive
        raise InvalidSpecError(f"unknown family {fam}")

    return MatrixFunction(spec=spec, l=float(l), _phi=phi, _dphi=dphi)


def eval_phi(fn: MatrixFunction, x) -> np.ndarray:
    return fn.eval(x)


def eval_phi_deriv(fn: MatrixFunction, x) -> np.ndarray:
    return fn.eval_deriv(x)


def spec_from_dict(d: dict) -> MatrixFunctionSpec:
    """Build a spec from its JSON form; complex entries may be numbers,
    strings like ``"0.3+0.2j"`` or ``{"re": .., "im": ..}`` objects."""
    d = dict(d)
    if "coefficients" in d:
        d["coefficients"] = tuple(_parse_complex(c) for c in d["coefficients"])
    try:
        return MatrixFunctionSpec(**d)
    except (TypeError, ValueError) as exc:
        raise InvalidSpecError(str(exc)) from exc


def _parse_complex(obj):
    if isinstance(obj, str):
        return complex(obj.replace(" ", ""))
    if isinstance(obj, (int, float)):
        return complex(obj)
    if isinstance(obj, dict):
        return complex(obj.get("re", 0.0), obj.get("im", 0.0))
    return [_parse_complex(o) for o in obj]


# Default representatives of each family, used by the acceptance suite and the CLI.
def builtin_families(m1: int = 1, m2: int = 1) -> dict[str, MatrixFunctionSpec]:
    def c(v):
        return np.full((m2, m1), v, complex)

    return {
        "zero": MatrixFunctionSpec(Family.ZERO, m1, m2),
        "constant": MatrixFunctionSpec(Family.CONSTANT, m1, m2, (c(0.4),)),
        "linear": MatrixFunctionSpec(Family.LINEAR, m1, m2, (c(1.0),)),
        "trig": MatrixFunctionSpec(Family.TRIG, m1, m2, (c(0.8),), omega=2.0),
        "polynomial": MatrixFunctionSpec(Family.POLYNOMIAL, m1, m2, (c(0.4), c(1.0), c(-0.5))),
        "fourier_random": MatrixFunctionSpec(Family.FOURIER_RANDOM, m1, m2, seed=7),
    }
