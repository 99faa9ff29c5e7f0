"""Residuals of the operator identities and the independent reconstruction of S
from its separable right-hand side."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _quad
from ._parallel import ordered_map
from .discretization import (
    DiscreteOperator,
    Grid,
    StructuredOperator,
    Variant,
    assemble,
    from_blocks,
    make_grid,
    node_weights,
    op_norm,
    weighted_adjoint,
)
from .matfun import MatrixFunction
from .operators import (
    _volterra_weights,
    build_A,
    build_A_star_direct,
    build_flip_conjugation,
    build_Pi,
    build_S,
    rhs_identity,
    split_components,
)

# residuals at or below this are exact up to roundoff; no order is meaningful there
EXACT_FLOOR = 1e-11


@dataclass
class ResidualReport:
    variant: str
    N: int
    residual: float
    component_residuals: tuple | None = None
    order_estimate: float | None = None


def commutator(A: DiscreteOperator, A_star: DiscreteOperator, X) -> np.ndarray:
    """Matrix of ``A X - X A^*``.

    For a :class:`StructuredOperator` the multiplication part uses ``A`` and
    ``A_star`` as given, while the kernel part is the Nystrom matrix of the
    composed kernels ``-i int_0^x k(tau, t) dtau`` and ``i int_0^t k(x, tau) dtau``
    (the latter equals ``K @ weighted_adjoint(A)``). Where a quadrature endpoint
    lands on the kernel's diagonal jump, the one-sided limit replaces the
    stored mean. Plain operators fall back to matrix products.
    """
    if not isinstance(X, StructuredOperator):
        M = X.matrix
        return A.matrix @ M - M @ A_star.matrix
    n, m = X.grid.n, X.block
    Dm = np.kron(np.eye(n), X.mult_part)
    Kn = X.matrix - Dm
    out = A.matrix @ Dm - Dm @ A_star.matrix
    out = out + A.matrix @ Kn - Kn @ weighted_adjoint(A).matrix
    J = X.sign * X.jump
    if np.any(J):
        w = X.grid.weights
        a0 = A.blocks()[:, 0, 0, 0]  # scalar Volterra weights of column 0
        corr = np.zeros((n, n, m, m), complex)
        corr[1:, 0] += a0[1:, None, None] * J * w[0]
        corr[0, 1:] -= (a0[1:] * w[1:])[:, None, None] * J
        out = out + from_blocks(corr)
    return out


def identity_residual(A: DiscreteOperator, A_star: DiscreteOperator, S, RHS,
                      variant: Variant | str) -> float:
    """``||A S - S A^* - RHS||`` (selfadjoint) or ``||i(A S - S A^*) - RHS||`` (skew)."""
    variant = Variant(variant)
    if A.matrix.shape != S.matrix.shape or RHS.matrix.shape != S.matrix.shape:
        raise ValueError("operators live on different grids or block sizes")
    C = commutator(A, A_star, S)
    if variant is Variant.SKEW:
        C = 1j * C
    return op_norm(C - RHS.matrix, S.grid, S.block)


def structured_residual(fn: MatrixFunction, grid: Grid, variant: Variant | str) -> float:
    variant = Variant(variant)
    A, As = build_A(grid, fn.m2), build_A_star_direct(grid, fn.m2)
    S = build_S(fn, grid, variant)
    return identity_residual(A, As, S, rhs_identity(build_Pi(fn, grid), variant), variant)


def skew_equivalence(fn: MatrixFunction, grid: Grid) -> tuple[float, float]:
    """Residual of ``i(AS - SA^*) = Pi Pi^*`` for skew ``S`` and of
    ``A S' - S' A^* = i Pi j Pi^*`` for ``S' = 2I - S``; they coincide."""
    A, As = build_A(grid, fn.m2), build_A_star_direct(grid, fn.m2)
    S = build_S(fn, grid, Variant.SKEW)
    Pi = build_Pi(fn, grid)
    r_skew = identity_residual(A, As, S, rhs_identity(Pi, Variant.SKEW), Variant.SKEW)
    S_check = assemble(grid, 2 * np.eye(fn.m2) - S.mult_part, S.kernel_samples, -S.sign, S.kernel_jump)
    r_check = identity_residual(A, As, S_check, rhs_identity(Pi, Variant.SELFADJOINT), Variant.SELFADJOINT)
    return r_skew, r_check


def _rhs(grid: Grid, left: np.ndarray, right: np.ndarray) -> StructuredOperator:
    """Nystrom operator with kernel ``i left(x) right(t)^H``."""
    k = 1j * (left[:, None, :, :] @ np.conj(np.swapaxes(right, -1, -2))[None, :, :, :])
    return assemble(grid, np.zeros((left.shape[1],) * 2), k, +1)


def component_residuals(fn: MatrixFunction, grid: Grid) -> tuple[float, float, float, float]:
    """Residuals of ``A S_k - S_k A^* = RHS_k`` for the four components of S."""
    n, m2 = grid.n, fn.m2
    A, As = build_A(grid, m2), build_A_star_direct(grid, m2)
    comps = split_components(fn, grid)
    p0 = fn.eval(0.0)
    dev = fn.eval(grid.nodes) - p0
    P0 = np.broadcast_to(p0, dev.shape)
    ones = np.broadcast_to(np.eye(m2), (n, m2, m2))
    rhs = (
        _rhs(grid, P0, P0).base - _rhs(grid, ones, ones).base,  # i(p0 p0^H - I)
        _rhs(grid, dev, P0).base,
        _rhs(grid, P0, dev).base,
        _rhs(grid, dev, dev).base,
    )
    return tuple(
        op_norm(commutator(A, As, S_k) - R.matrix, grid, m2) for S_k, R in zip(comps, rhs)
    )


def product_kernel_residual(Phi, Phi_hat, grid: Grid) -> float:
    """``||A S - S A^* - i Phi(x) int Phi_hat(t) . dt||`` for the product-kernel operator."""
    from .operators import build_product_kernel_operator

    S = build_product_kernel_operator(Phi, Phi_hat, grid)
    m2 = S.block
    A, As = build_A(grid, m2), build_A_star_direct(grid, m2)
    left = np.asarray(Phi.eval(grid.nodes))
    right = np.asarray(Phi_hat.eval(grid.nodes))
    k = 1j * (left[:, None] @ right[None, :])
    R = assemble(grid, np.zeros((m2, m2)), k, +1)
    return op_norm(commutator(A, As, S) - R.matrix, grid, m2)


# --- Reconstruction from a separable right-hand side --------------------------------


@dataclass(frozen=True)
class SeparableKernel:
    """``Q(x, t) = Q1(x) Q2(t)`` with ``Q1: m2 x p`` and ``Q2: p x m2``, plus derivatives."""

    Q1: Callable
    Q2: Callable
    dQ1: Callable
    dQ2: Callable
    p: int
    m2: int


def constant_kernel(c1: np.ndarray, c2: np.ndarray) -> SeparableKernel:
    c1, c2 = np.atleast_2d(np.asarray(c1, complex)), np.atleast_2d(np.asarray(c2, complex))

    def const(c):
        return lambda x: np.broadcast_to(c, np.shape(x) + c.shape)

    z1, z2 = np.zeros_like(c1), np.zeros_like(c2)
    return SeparableKernel(const(c1), const(c2), const(z1), const(z2), c1.shape[1], c1.shape[0])


def upsilon(k: SeparableKernel, x: float, t: float, l: float, tol: float = 1e-12) -> np.ndarray:
    """``-1/2 int_{x+t}^{2l-|x-t|} Q1((xi+x-t)/2) Q2((xi-x+t)/2) dxi``."""
    a, b = np.array([x + t]), np.array([2 * l - abs(x - t)])

    def f(xi, idx):
        return k.Q1((xi + x - t) / 2) @ k.Q2((xi - x + t) / 2)

    return -0.5 * _quad.integrate(f, a, b, tol)[0]


def dt_upsilon(k: SeparableKernel, x: np.ndarray, t: np.ndarray, l: float, lower: bool,
               tol: float = 1e-13) -> np.ndarray:
    """``d/dt Upsilon`` on one side of the diagonal by the Leibniz rule.

    ``lower=True`` is the branch ``t <= x``; arrays ``x, t`` are paired.
    """
    x = np.asarray(x, float)
    t = np.asarray(t, float)
    a = x + t
    if lower:
        b, db = 2 * l - (x - t), 1.0
    else:
        b, db = 2 * l - (t - x), -1.0

    def Fat(xi):
        return k.Q1(_clip((xi + x - t) / 2, l)) @ k.Q2(_clip((xi - x + t) / 2, l))

    def g(xi, idx):
        u = _clip((xi + x[idx] - t[idx]) / 2, l)
        v = _clip((xi - x[idx] + t[idx]) / 2, l)
        return -0.5 * k.dQ1(u) @ k.Q2(v) + 0.5 * k.Q1(u) @ k.dQ2(v)

    integral = _quad.integrate(g, a, b, tol)
    return -0.5 * (Fat(b) * db - k.Q1(x) @ k.Q2(t) + integral)


def _clip(u, l):
    return np.clip(u, 0.0, l)


# stencil kinds: offsets in units of the half spacing and their weights / (2 * delta)
_CENTRAL = ((-1, 0, 1), (-1.0, 0.0, 1.0))
_FORWARD = ((0, 1, 2), (-3.0, 4.0, -1.0))
_BACKWARD = ((0, -1, -2), (3.0, -4.0, 1.0))


def _dx_branch(k: SeparableKernel, grid: Grid, rows: np.ndarray, cols: np.ndarray, lower: bool) -> np.ndarray:
    """Second-order x-derivative of one branch of ``d/dt Upsilon`` at node pairs.

    Step ``h/2``; the stencil is central where it stays inside the branch's
    region and one-sided otherwise. Callers handle the region's corner node.
    """
    N, h = grid.N, grid.h
    delta = h / 2
    if lower:
        central = (rows > cols) & (rows < N)
        forward = (rows == cols) & (rows < N)
    else:
        central = (rows < cols) & (rows > 0)
        forward = (rows == cols) & (rows > 0)
        # for the upper branch "forward" means towards smaller x
    out = None
    kinds = [(central, _CENTRAL)]
    if lower:
        kinds += [(forward, _FORWARD), (~central & ~forward, _BACKWARD)]
    else:
        kinds += [(forward, _BACKWARD), (~central & ~forward, _FORWARD)]
    x = grid.nodes
    for mask, (offs, coefs) in kinds:
        if not mask.any():
            continue
        r, c = rows[mask], cols[mask]
        acc = 0
        for o, cf in zip(offs, coefs):
            if cf == 0.0:
                continue
            xs = np.clip(x[r] + o * delta, 0.0, grid.l)
            acc = acc + cf * dt_upsilon(k, xs, x[c], grid.l, lower)
        val = acc / (2 * delta)
        if out is None:
            out = np.zeros((rows.size,) + val.shape[1:], complex)
        out[mask] = val
    return out


def build_T_separable(k: SeparableKernel, grid: Grid) -> DiscreteOperator:
    """Discrete ``T f = d/dx int_0^l d/dt Upsilon(x, t) f(t) dt``.

    With the t-integral split at ``t = x`` the derivative becomes the diagonal
    jump of ``d/dt Upsilon`` times ``f(x)`` plus integral operators whose
    kernels are the x-derivatives of the two smooth branches.
    """
    n, N, m = grid.n, grid.N, k.m2
    x = grid.nodes
    lo_w, up_w = _volterra_weights(grid)

    ri, ci = np.tril_indices(n)
    keep = ~((ri == N) & (ci == N))
    k_lo = np.zeros((n, n, m, m), complex)
    k_lo[ri[keep], ci[keep]] = _dx_branch(k, grid, ri[keep], ci[keep], lower=True)
    # corner (l, l): linear extrapolation along t
    k_lo[N, N] = 2 * k_lo[N, N - 1] - k_lo[N, N - 2]

    ri, ci = np.triu_indices(n)
    keep = ~((ri == 0) & (ci == 0))
    k_up = np.zeros((n, n, m, m), complex)
    k_up[ri[keep], ci[keep]] = _dx_branch(k, grid, ri[keep], ci[keep], lower=False)
    k_up[0, 0] = 2 * k_up[0, 1] - k_up[0, 2]

    jump = dt_upsilon(k, x, x, grid.l, True) - dt_upsilon(k, x, x, grid.l, False)
    blocks = k_lo * lo_w[:, :, None, None] + k_up * up_w[:, :, None, None]
    idx = np.arange(n)
    blocks[idx, idx] += jump
    return DiscreteOperator(grid, m, from_blocks(blocks))


def separable_rhs_from(fn: MatrixFunction, l: float) -> SeparableKernel:
    """Separable ``Q`` of the flipped identity ``TA - A^*T = i int Q``, ``T = U S U``:
    ``Q1(x) = [conj Phi1(l-x), I]``, ``Q2(t) = [Phi1(l-t)^T; -I]``."""
    m1, m2 = fn.m1, fn.m2

    def eye(x):
        return np.broadcast_to(np.eye(m2), np.shape(x) + (m2, m2))

    def zeros(x, shape):
        return np.zeros(np.shape(x) + shape, complex)

    def T(a):
        return np.swapaxes(a, -1, -2)

    def Q1(x):
        return np.concatenate([np.conj(fn.eval(l - x)), eye(x)], axis=-1)

    def Q2(t):
        return np.concatenate([T(fn.eval(l - t)), -eye(t)], axis=-2)

    def dQ1(x):
        return np.concatenate([-np.conj(fn.eval_deriv(l - x)), zeros(x, (m2, m2))], axis=-1)

    def dQ2(t):
        return np.concatenate([-T(fn.eval_deriv(l - t)), zeros(t, (m2, m2))], axis=-2)

    return SeparableKernel(Q1, Q2, dQ1, dQ2, m1 + m2, m2)


def reconstruct_S(fn: MatrixFunction, grid: Grid,
                           variant: Variant | str = Variant.SELFADJOINT) -> DiscreteOperator:
    """``S = U T U`` with ``T`` built from the flipped separable right-hand side."""
    if Variant(variant) is not Variant.SELFADJOINT:
        raise ValueError("reconstruction is implemented for the selfadjoint identity")
    T = build_T_separable(separable_rhs_from(fn, grid.l), grid)
    return build_flip_conjugation(T)


def reconstruction_deviation(fn: MatrixFunction, grid: Grid) -> float:
    S = build_S(fn, grid, Variant.SELFADJOINT)
    S_rec = reconstruct_S(fn, grid)
    return op_norm(S_rec.matrix - S.matrix, grid, fn.m2) / op_norm(S.base)


# --- Convergence harness ------------------------------------------------------------


def _order(r0: float, r1: float, n0: int, n1: int) -> float | None:
    if r0 <= 0 or r1 <= 0:
        return None
    return math.log(r0 / r1) / math.log(n1 / n0)


def convergence_study(fn: MatrixFunction, variant: Variant | str, N_list: Sequence[int],
                      l: float | None = None, components: bool = False) -> list[ResidualReport]:
    """Identity residuals over ``N_list`` with successive order estimates
    ``log(r_k / r_{k+1}) / log(N_{k+1} / N_k)``."""
    variant = Variant(variant)
    N_list = list(N_list)
    if len(N_list) < 2 or any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N_list must be increasing with at least two entries")
    l = fn.l if l is None else l

    def one(N):
        grid = make_grid(l, N)
        r = structured_residual(fn, grid, variant)
        comps = component_residuals(fn, grid) if components else None
        return ResidualReport(variant.value, N, r, comps)

    reports = ordered_map(one, N_list)
    for prev, cur in zip(reports, reports[1:]):
        cur.order_estimate = _order(prev.residual, cur.residual, prev.N, cur.N)
    return reports


def converged(reports: Sequence[ResidualReport], min_order: float = 1.5,
              floor: float = EXACT_FLOOR) -> bool:
    """Pass rule: final order at least ``min_order``, or every residual at the exactness floor."""
    if all(r.residual <= floor for r in reports):
        return True
    last = reports[-1].order_estimate
    return last is not None and last >= min_order
