"""Grid model of ``L^2_{m2}(0, l)``: trapezoid weights, weighted adjoint and norm.

A vector function sampled on the grid is stored node-major: entries
``i*m2 : (i+1)*m2`` hold ``f(x_i)``. Operators are dense matrices acting on
such vectors.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import InvalidSpecError


class Variant(str, Enum):
    SELFADJOINT = "selfadjoint"
    SKEW = "skew"

    @property
    def kernel_sign(self) -> int:
        return -1 if self is Variant.SELFADJOINT else 1


@dataclass(frozen=True)
class Grid:
    """Uniform partition ``x_i = i*h`` of ``[0, l]`` into ``N`` panels."""

    l: float
    N: int
    h: float = field(default=None)

    def __post_init__(self):
        if self.h is None:
            object.__setattr__(self, "h", self.l / self.N)

    @property
    def n(self) -> int:
        return self.N + 1

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * self.h

    @property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[0] = w[-1] = self.h / 2
        return w

    def sub(self, r_index: int) -> "Grid":
        """Leading subgrid ``[0, x_r]`` sharing this grid's spacing exactly."""
        return Grid(l=r_index * self.h, N=r_index, h=self.h)


def make_grid(l: float, N: int) -> Grid:
    if not (isinstance(N, (int, np.integer)) and N >= 2):
        raise InvalidSpecError("N must be an integer >= 2")
    if not (np.isfinite(l) and l > 0):
        raise InvalidSpecError("l must be positive")
    return Grid(float(l), int(N))


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    grid: Grid
    block: int
    matrix: np.ndarray

    def __post_init__(self):
        size = self.grid.n * self.block
        if self.matrix.shape != (size, size):
            raise InvalidSpecError(f"matrix shape {self.matrix.shape} inconsistent with grid/block ({size})")

    def blocks(self) -> np.ndarray:
        """View as ``(n, n, m2, m2)`` block array."""
        n, m = self.grid.n, self.block
        return self.matrix.reshape(n, m, n, m).transpose(0, 2, 1, 3)

    def __matmul__(self, other: "DiscreteOperator") -> "DiscreteOperator":
        return DiscreteOperator(self.grid, self.block, self.matrix @ other.matrix)

    def __add__(self, other):
        return DiscreteOperator(self.grid, self.block, self.matrix + other.matrix)

    def __sub__(self, other):
        return DiscreteOperator(self.grid, self.block, self.matrix - other.matrix)

    def scaled(self, c) -> "DiscreteOperator":
        return DiscreteOperator(self.grid, self.block, c * self.matrix)


@dataclass(frozen=True, eq=False)
class DiscreteMap:
    """Discretisation of ``Pi: C^m -> L^2_{m2}``; row block ``i`` is ``Pi(x_i)``."""

    grid: Grid
    block: int
    columns: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.matrix.shape != (self.grid.n * self.block, self.columns):
            raise InvalidSpecError("DiscreteMap matrix shape inconsistent")


def from_blocks(b: np.ndarray) -> np.ndarray:
    """``(n, n, m, m)`` block array -> ``(n*m, n*m)`` matrix."""
    n, _, m, _ = b.shape
    return b.transpose(0, 2, 1, 3).reshape(n * m, n * m)


def node_weights(grid: Grid, block: int) -> np.ndarray:
    return np.repeat(grid.weights, block)


def identity(grid: Grid, block: int) -> DiscreteOperator:
    return DiscreteOperator(grid, block, np.eye(grid.n * block, dtype=complex))


def weighted_adjoint(op: DiscreteOperator) -> DiscreteOperator:
    """Adjoint for ``<f, g> = sum_i w_i g(x_i)^H f(x_i)``: ``W^{-1} M^H W``."""
    w = node_weights(op.grid, op.block)
    return DiscreteOperator(op.grid, op.block, op.matrix.conj().T * w[None, :] / w[:, None])


def inner(grid: Grid, block: int, f: np.ndarray, g: np.ndarray) -> complex:
    w = node_weights(grid, block)
    return complex(np.sum(w * np.conj(g) * f))


def similarity(op: DiscreteOperator) -> np.ndarray:
    """``W^{1/2} M W^{-1/2}``; its 2-norm and spectrum are the discrete L^2 ones."""
    sw = np.sqrt(node_weights(op.grid, op.block))
    return sw[:, None] * op.matrix / sw[None, :]


def op_norm(op: DiscreteOperator | np.ndarray, grid: Grid | None = None, block: int | None = None) -> float:
    if isinstance(op, np.ndarray):
        op = DiscreteOperator(grid, block, op)
    return float(np.linalg.norm(similarity(op), 2))


def frobenius(op: DiscreteOperator) -> float:
    """Hilbert-Schmidt norm of the similarity; diagnostic only."""
    return float(np.linalg.norm(similarity(op)))


@dataclass(frozen=True, eq=False)
class StructuredOperator:
    """Multiplication part plus Nystrom kernel: blocks ``D delta_ij + sign * k(x_i, x_j) w_j``.

    ``kernel_jump`` is half the difference of the one-sided diagonal limits,
    ``(lim_{x>t} - lim_{x<t}) / 2``; the stored diagonal sample is their mean.
    """

    base: DiscreteOperator
    mult_part: np.ndarray
    kernel_samples: np.ndarray
    sign: int = -1
    kernel_jump: np.ndarray | None = None
    variant: Variant | None = None

    @property
    def grid(self) -> Grid:
        return self.base.grid

    @property
    def block(self) -> int:
        return self.base.block

    @property
    def matrix(self) -> np.ndarray:
        return self.base.matrix

    @property
    def jump(self) -> np.ndarray:
        if self.kernel_jump is None:
            return np.zeros((self.block, self.block), complex)
        return self.kernel_jump


def assemble(grid: Grid, mult_part, kernel_samples, sign: int = -1, kernel_jump=None,
             variant: Variant | None = None) -> StructuredOperator:
    kernel_samples = np.asarray(kernel_samples, complex)
    n = grid.n
    m = kernel_samples.shape[-1]
    D = np.asarray(mult_part, complex).reshape(m, m)
    blocks = sign * kernel_samples * grid.weights[None, :, None, None]
    idx = np.arange(n)
    blocks[idx, idx] += D
    base = DiscreteOperator(grid, m, from_blocks(blocks))
    return StructuredOperator(base, D, kernel_samples, sign, kernel_jump, variant)


def project_operator(op: StructuredOperator, r_index: int) -> StructuredOperator:
    """Restriction to ``[0, x_r]``: nested kernel samples reassembled with the
    subgrid's own trapezoid weights (``P_r S P_r^*``)."""
    N = op.grid.N
    if not (isinstance(r_index, (int, np.integer)) and 0 < r_index <= N):
        raise InvalidSpecError(f"r_index must be in 1..{N}")
    if r_index == N:
        return op
    sub = op.grid.sub(int(r_index))
    ks = op.kernel_samples[: r_index + 1, : r_index + 1]
    return assemble(sub, op.mult_part, ks, op.sign, op.kernel_jump, op.variant)
