"""Discrete operators: the Volterra operator A and its adjoint, the flip
conjugation, the structured operator S with its close-to-displacement kernel,
the map Pi and the finite-rank right-hand sides of the identities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _quad
from .discretization import (
    DiscreteMap,
    DiscreteOperator,
    Grid,
    StructuredOperator,
    Variant,
    assemble,
    from_blocks,
)
from .errors import PreconditionError
from .matfun import MatrixFunction

KERNEL_TOL = 1e-12


def signature_matrix(m1: int, m2: int) -> np.ndarray:
    """``j = diag(I_{m1}, -I_{m2})``."""
    return np.diag(np.concatenate([np.ones(m1), -np.ones(m2)]))


def _volterra_weights(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Trapezoid rows for integrals over ``[0, x_i]`` and ``[x_i, l]``."""
    n, h = grid.n, grid.h
    lower = np.tril(np.full((n, n), h))
    upper = np.triu(np.full((n, n), h))
    idx = np.arange(n)
    lower[:, 0] = h / 2
    lower[idx, idx] = h / 2
    lower[0, 0] = 0.0
    upper[:, -1] = h / 2
    upper[idx, idx] = h / 2
    upper[-1, -1] = 0.0
    return lower, upper


def build_A(grid: Grid, m2: int) -> DiscreteOperator:
    """``(Af)(x) = -i int_0^x f``."""
    lower, _ = _volterra_weights(grid)
    return DiscreteOperator(grid, m2, np.kron(-1j * lower, np.eye(m2)))


def build_A_star_direct(grid: Grid, m2: int) -> DiscreteOperator:
    """``(A^*f)(x) = i int_x^l f``, discretised directly rather than as a matrix adjoint."""
    _, upper = _volterra_weights(grid)
    return DiscreteOperator(grid, m2, np.kron(1j * upper, np.eye(m2)))


def build_flip_conjugation(op: DiscreteOperator) -> DiscreteOperator:
    """Matrix of ``U M U`` for the antilinear flip ``(Uf)(x) = conj(f(l - x))``."""
    b = op.blocks()
    return DiscreteOperator(op.grid, op.block, from_blocks(np.conj(b[::-1, ::-1])))


def _gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched ``a @ b^H`` as an explicit elementwise sum (layout-independent rounding)."""
    return (a[..., :, None, :] * np.conj(b)[..., None, :, :]).sum(-1)


def _prod(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched ``a @ b`` with the same rounding guarantee as :func:`_gram`."""
    return (a[..., :, :, None] * b[..., None, :, :]).sum(-2)


def _volterra_gram(dphi: Callable, dpsi: Callable, x: np.ndarray, t: np.ndarray, tol: float,
                   adjoint: bool = True) -> np.ndarray:
    """``int_0^{min(x,t)} dphi(x - z) dpsi(t - z)^{H or none} dz`` for each pair."""
    upper = np.minimum(x, t)
    combine = _gram if adjoint else _prod

    def f(z, idx):
        return combine(dphi(x[idx] - z), dpsi(t[idx] - z))

    return _quad.integrate(f, np.zeros_like(upper), upper, tol)


def _case_terms(fn: MatrixFunction):
    p0 = fn.eval(0.0)
    d0 = fn.eval_deriv(0.0)
    below = d0 @ p0.conj().T   # limit from x > t
    above = p0 @ d0.conj().T   # limit from t > x
    return p0, below, above


def kernel_s(fn: MatrixFunction, x: float, t: float, tol: float = KERNEL_TOL) -> np.ndarray:
    """Close-to-displacement kernel ``s(x, t)``.

    At ``x == t`` the one-sided case terms are averaged.
    """
    fn.eval(np.array([x, t]))
    if x < t:
        return kernel_s(fn, t, x, tol).conj().T
    xs, ts = np.array([float(x)]), np.array([float(t)])
    val = _volterra_gram(fn.eval_deriv, fn.eval_deriv, xs, ts, tol)[0]
    p0, below, above = _case_terms(fn)
    if x > t:
        return val + fn.eval_deriv(x - t) @ p0.conj().T
    return val + 0.5 * (below + above)


def _lower_pairs(n: int):
    i, j = np.tril_indices(n)
    return i, j


def kernel_samples(fn: MatrixFunction, grid: Grid, tol: float = KERNEL_TOL):
    """All samples ``s(x_i, x_j)`` plus the diagonal jump; lower half computed, upper mirrored."""
    n, m = grid.n, fn.m2
    x = grid.nodes
    fn.eval(x[-1])
    i, j = _lower_pairs(n)
    vals = _volterra_gram(fn.eval_deriv, fn.eval_deriv, x[i], x[j], tol)
    p0, below, above = _case_terms(fn)
    off = i > j
    vals[off] += _gram(fn.eval_deriv(x[i[off]] - x[j[off]]), np.broadcast_to(p0, (off.sum(),) + p0.shape))
    vals[~off] += 0.5 * (below + above)
    s = np.zeros((n, n, m, m), complex)
    s[i, j] = vals
    s[j[off], i[off]] = np.conj(np.swapaxes(vals[off], -1, -2))
    jump = 0.5 * (below - above)
    return s, jump


def build_S(fn: MatrixFunction, grid: Grid, variant: Variant | str = Variant.SELFADJOINT,
            tol: float = KERNEL_TOL) -> StructuredOperator:
    """Structured operator ``D f + sign * int_0^l s(x,t) f(t) dt``.

    selfadjoint: ``D = I - Phi1(0)Phi1(0)^H``, sign ``-1``;
    skew: ``D = I + Phi1(0)Phi1(0)^H``, sign ``+1``.
    """
    variant = Variant(variant)
    s, jump = kernel_samples(fn, grid, tol)
    p0 = fn.eval(0.0)
    sign = variant.kernel_sign
    D = np.eye(fn.m2) + sign * (p0 @ p0.conj().T)
    return assemble(grid, D, s, sign, jump, variant)


def build_Pi(fn: MatrixFunction, grid: Grid) -> DiscreteMap:
    """Row block ``i`` is ``[Phi1(x_i), I_{m2}]``."""
    m1, m2 = fn.m1, fn.m2
    phi = fn.eval(grid.nodes)
    eye = np.broadcast_to(np.eye(m2), (grid.n, m2, m2))
    rows = np.concatenate([phi, eye], axis=-1).reshape(grid.n * m2, m1 + m2)
    return DiscreteMap(grid, m2, m1 + m2, rows)


def rhs_identity(Pi: DiscreteMap, variant: Variant | str) -> StructuredOperator:
    """``i Pi j Pi^*`` (selfadjoint) or ``Pi Pi^*`` (skew) as a Nystrom operator."""
    variant = Variant(variant)
    n, m2, m = Pi.grid.n, Pi.block, Pi.columns
    P = Pi.matrix.reshape(n, m2, m)
    if variant is Variant.SELFADJOINT:
        J = signature_matrix(m - m2, m2)
        coef = 1j
    else:
        J = np.eye(m)
        coef = 1.0
    K = coef * np.einsum("iab,bc,jdc->ijad", P, J, P.conj())
    return assemble(Pi.grid, np.zeros((m2, m2)), K, +1)


def split_components(fn: MatrixFunction, grid: Grid, tol: float = KERNEL_TOL):
    """``S = S1 + S2 + S3 + S4``: multiplication part, lower and upper
    one-sided Volterra parts, and the ``int_0^{min}`` Gram part."""
    n, m = grid.n, fn.m2
    x = grid.nodes
    p0, below, above = _case_terms(fn)
    i, j = _lower_pairs(n)
    zeros = np.zeros((n, n, m, m), complex)

    S1 = assemble(grid, np.eye(m) - p0 @ p0.conj().T, zeros, -1)

    k2 = zeros.copy()
    off = i > j
    k2[i[off], j[off]] = _gram(fn.eval_deriv(x[i[off]] - x[j[off]]), np.broadcast_to(p0, (off.sum(),) + p0.shape))
    k2[np.arange(n), np.arange(n)] = 0.5 * below
    S2 = assemble(grid, np.zeros((m, m)), k2, -1, 0.5 * below)

    k3 = np.conj(np.swapaxes(k2, -1, -2)).transpose(1, 0, 2, 3).copy()
    k3[np.arange(n), np.arange(n)] = 0.5 * above
    S3 = assemble(grid, np.zeros((m, m)), k3, -1, -0.5 * above)

    k4 = zeros.copy()
    vals = _volterra_gram(fn.eval_deriv, fn.eval_deriv, x[i], x[j], tol)
    k4[i, j] = vals
    k4[j[off], i[off]] = np.conj(np.swapaxes(vals[off], -1, -2))
    S4 = assemble(grid, np.zeros((m, m)), k4, -1)
    return S1, S2, S3, S4


@dataclass(frozen=True)
class FunctionPair:
    """Minimal evaluator pair; any object with ``eval``/``eval_deriv`` works."""

    eval: Callable
    eval_deriv: Callable


def shifted(fn) -> FunctionPair:
    """``Phi(x) - Phi(0)``."""
    p0 = fn.eval(0.0)
    return FunctionPair(lambda x: fn.eval(x) - p0, fn.eval_deriv)


def adjoint_function(fn) -> FunctionPair:
    """``x -> Phi(x)^H``."""
    def h(g):
        return lambda x: np.conj(np.swapaxes(g(x), -1, -2))
    return FunctionPair(h(fn.eval), h(fn.eval_deriv))


def build_product_kernel_operator(Phi, Phi_hat, grid: Grid, tol: float = KERNEL_TOL) -> StructuredOperator:
    """Operator with kernel ``-1/2 int_{|x-t|}^{x+t} Phi'((xi+x-t)/2) Phi_hat'((xi+t-x)/2) dxi``.

    Evaluated after ``xi = x + t - 2 zeta`` as ``-int_0^{min(x,t)} Phi'(x-zeta) Phi_hat'(t-zeta) dzeta``.
    Requires ``Phi(0) = 0`` and ``Phi_hat(0) = 0``.
    """
    for name, g in (("Phi", Phi), ("Phi_hat", Phi_hat)):
        if np.abs(np.asarray(g.eval(0.0))).max() > 1e-12:
            raise PreconditionError(f"{name}(0) must vanish")
    n = grid.n
    x = grid.nodes
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    vals = -_volterra_gram(Phi.eval_deriv, Phi_hat.eval_deriv, x[i], x[j], tol, adjoint=False)
    m = vals.shape[-1]
    k = vals.reshape(n, n, m, m)
    return assemble(grid, np.zeros((m, m)), k, +1)
