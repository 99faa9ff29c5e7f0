"""Positivity of S, its inverse, and the factorization ``S^{-1} = E^* E`` with
``E = I + int_0^x E_Phi(x, t) . dt``."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import ordered_map
from .discretization import (
    DiscreteOperator,
    Grid,
    StructuredOperator,
    Variant,
    assemble,
    make_grid,
    node_weights,
    op_norm,
    project_operator,
    similarity,
    weighted_adjoint,
)
from .errors import InvalidSpecError, NotPositiveError, PreconditionError, SingularityError
from .matfun import MatrixFunction
from .operators import build_S

HERMITIAN_TOL = 1e-8
SINGULAR_TOL = 1e-10
PHI0_TOL = 1e-12


@dataclass
class TriangularFactor:
    E_matrix: np.ndarray
    kernel_samples: np.ndarray  # (n, n, m2, m2); E_Phi(x_i, x_j) = E_ij / w_j, zero above the diagonal
    grid: Grid
    block: int
    diag_defect: float = 0.0  # max ||E_ii - I||
    reconstruction_residual: float | None = None

    @property
    def operator(self) -> DiscreteOperator:
        return DiscreteOperator(self.grid, self.block, self.E_matrix)

    @property
    def diag_constant(self) -> float:
        """``C`` in ``||E_ii - I|| <= C h``."""
        return self.diag_defect / self.grid.h


@dataclass
class PositivityReport:
    r_values: list = field(default_factory=list)
    min_eigs: list = field(default_factory=list)
    origin_condition_holds: bool = True
    epsilon_results: list | None = None

    @property
    def strictly_positive(self) -> bool | None:
        if not self.origin_condition_holds:
            return None
        return all(e > 0 for e in self.min_eigs)


def hermiticity_defect(S) -> float:
    H = similarity(S.base if isinstance(S, StructuredOperator) else S)
    return float(np.linalg.norm(H - H.conj().T, 2) / np.linalg.norm(H, 2))


def _hermitian(S) -> np.ndarray:
    defect = hermiticity_defect(S)
    if defect > HERMITIAN_TOL:
        raise PreconditionError(f"operator is not self-adjoint (defect {defect:.2e})")
    H = similarity(S.base if isinstance(S, StructuredOperator) else S)
    return 0.5 * (H + H.conj().T)


def min_eigenvalue(S) -> float:
    """Smallest eigenvalue of ``W^{1/2} M W^{-1/2}``."""
    return float(np.linalg.eigvalsh(_hermitian(S))[0])


def origin_margin(fn: MatrixFunction) -> float:
    """Smallest eigenvalue of ``I - Phi1(0) Phi1(0)^H``; the hypothesis needs it positive."""
    p0 = fn.eval(0.0)
    return float(np.linalg.eigvalsh(np.eye(fn.m2) - p0 @ p0.conj().T)[0])


def positivity_family(fn: MatrixFunction, l: float, num_radii: int, N: int = 64,
                      variant: Variant | str = Variant.SELFADJOINT) -> PositivityReport:
    """Minimal eigenvalues of ``S_r`` for ``r = l k / num_radii``; spacing ``l / N`` kept for every ``r``."""
    if num_radii < 1:
        raise InvalidSpecError("num_radii must be positive")
    if origin_margin(fn) <= 0:
        return PositivityReport(origin_condition_holds=False)
    radii = [l * k / num_radii for k in range(1, num_radii + 1)]

    def one(r):
        N_r = max(2, int(round(N * r / l)))
        return min_eigenvalue(build_S(fn, make_grid(r, N_r), variant))

    return PositivityReport(r_values=radii, min_eigs=ordered_map(one, radii))


def shifted_family_member(S: StructuredOperator, eps: float) -> StructuredOperator:
    """``S - (1 - eps) I``."""
    m = S.block
    return assemble(S.grid, S.mult_part - (1 - eps) * np.eye(m), S.kernel_samples, S.sign,
                    S.kernel_jump, S.variant)


def epsilon_family_check(fn: MatrixFunction, grid: Grid, epsilons) -> list[tuple[float, float]]:
    """Minimal eigenvalue of ``S - (1 - eps) I`` for the skew ``S``; ``eps = 1`` is allowed as the trivial member."""
    eps_list = [float(e) for e in epsilons]
    if any(not (0 < e <= 1) for e in eps_list):
        raise InvalidSpecError("epsilon must lie in (0, 1]")
    S = build_S(fn, grid, Variant.SKEW)
    return [(e, min_eigenvalue(shifted_family_member(S, e))) for e in eps_list]


def invert(S) -> DiscreteOperator:
    base = S.base if isinstance(S, StructuredOperator) else S
    lam = np.abs(np.linalg.eigvals(similarity(base))).min()
    if lam < SINGULAR_TOL:
        raise SingularityError(f"operator is numerically singular (min |eig| = {lam:.2e})", min_eig=float(lam))
    return DiscreteOperator(base.grid, base.block, np.linalg.inv(base.matrix))


def inversion_residual(S, S_inv: DiscreteOperator) -> float:
    M = S.matrix
    return float(np.linalg.norm(M @ S_inv.matrix - np.eye(M.shape[0]), 2))


def reversed_cholesky(G: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L^H L = G`` (Cholesky started from the last row/column)."""
    try:
        C = np.linalg.cholesky(G[::-1, ::-1])
    except np.linalg.LinAlgError as exc:
        raise NotPositiveError("Cholesky breakdown: matrix is not positive definite") from exc
    return C.conj().T[::-1, ::-1]


def _check_factorization_hypotheses(S: StructuredOperator) -> None:
    if not isinstance(S, StructuredOperator):
        raise PreconditionError("factorization needs the structured form of S")
    if np.abs(S.mult_part - np.eye(S.block)).max() > PHI0_TOL or np.any(S.jump):
        raise PreconditionError("factorization requires Phi1(0) = 0")


def _finish(S: StructuredOperator, Et: np.ndarray) -> TriangularFactor:
    grid, m = S.grid, S.block
    n = grid.n
    w = node_weights(grid, m)
    sw = np.sqrt(w)
    E = Et * sw[None, :] / sw[:, None]
    Eb = E.reshape(n, m, n, m).transpose(0, 2, 1, 3)
    kern = Eb / grid.weights[None, :, None, None]
    kern = kern * np.tril(np.ones((n, n)), -1)[:, :, None, None]
    idx = np.arange(n)
    diag_defect = float(np.abs(Eb[idx, idx] - np.eye(m)).max())
    return TriangularFactor(E, kern, grid, m, diag_defect)


def factorize_inverse(S: StructuredOperator) -> TriangularFactor:
    """``S^{-1} = E^* E`` with ``E`` block lower triangular and ``E^* = W^{-1} E^H W``.

    With ``H = W^{1/2} S W^{-1/2}`` and ``G = H^{-1}``, a reversed Cholesky gives
    ``G = L^H L``; then ``E = W^{-1/2} L W^{1/2}``.
    """
    _check_factorization_hypotheses(S)
    S_inv = invert(S)
    G = _hermitian(S_inv)
    fac = _finish(S, reversed_cholesky(G))
    fac.reconstruction_residual = factorization_residual(fac, S_inv)
    return fac


def factorization_residual(fac: TriangularFactor, S_inv: DiscreteOperator) -> float:
    """``||E^* E - S^{-1}|| / ||S^{-1}||``."""
    E = fac.operator
    return op_norm(weighted_adjoint(E) @ E - S_inv) / op_norm(S_inv)


def factorize_inverse_blockwise(S: StructuredOperator) -> TriangularFactor:
    """Independent route to the same factor: block Cholesky ``H = C C^H`` computed
    row by row, then ``L = C^{-1}`` by block forward substitution."""
    _check_factorization_hypotheses(S)
    H = _hermitian(S)
    n, m = S.grid.n, S.block
    Hb = H.reshape(n, m, n, m).transpose(0, 2, 1, 3)
    C = np.zeros_like(Hb)
    for i in range(n):
        for j in range(i + 1):
            acc = Hb[i, j] - sum(C[i, k] @ C[j, k].conj().T for k in range(j))
            if i == j:
                ev = np.linalg.eigvalsh(0.5 * (acc + acc.conj().T))
                if ev[0] <= 0:
                    raise NotPositiveError(f"non-positive pivot at block {i}")
                C[i, i] = np.linalg.cholesky(acc)
            else:
                C[i, j] = np.linalg.solve(C[j, j].conj(), acc.T).T  # acc @ C_jj^{-H}
    L = np.zeros_like(C)
    for i in range(n):
        inv_ii = np.linalg.inv(C[i, i])
        L[i, i] = inv_ii
        for j in range(i):
            acc = sum(C[i, k] @ L[k, j] for k in range(j, i))
            L[i, j] = -inv_ii @ acc
    Lm = L.transpose(0, 2, 1, 3).reshape(n * m, n * m)
    return _finish(S, Lm)


def nesting_defect(fn: MatrixFunction, l: float, l_hat: float, h: float) -> float:
    """Largest difference of ``E_Phi(x_i, x_j)``, ``i > j``, between factorizations on
    ``[0, l]`` and ``[0, l_hat]`` computed with the same spacing ``h``."""
    if not 0 < l_hat < l:
        raise InvalidSpecError("need 0 < l_hat < l")
    N, N_hat = l / h, l_hat / h
    if abs(N - round(N)) > 1e-9 or abs(N_hat - round(N_hat)) > 1e-9:
        raise InvalidSpecError("l and l_hat must be multiples of h")
    N, N_hat = int(round(N)), int(round(N_hat))
    big = build_S(fn, Grid(N * h, N, h), Variant.SELFADJOINT)
    small = build_S(fn, Grid(N_hat * h, N_hat, h), Variant.SELFADJOINT)
    e_big, e_small = factorize_inverse(big), factorize_inverse(small)
    n = N_hat + 1
    diff = e_big.kernel_samples[:n, :n] - e_small.kernel_samples
    i, j = np.tril_indices(n, -1)
    return float(np.abs(diff[i, j]).max()) if i.size else 0.0


def projection_consistency(S: StructuredOperator, fn: MatrixFunction, r_index: int) -> tuple[float, float]:
    """(max kernel-sample difference, min-eigenvalue difference) between the projected
    operator and ``S_r`` built directly on the subgrid."""
    P = project_operator(S, r_index)
    direct = build_S(fn, S.grid.sub(r_index), S.variant or Variant.SELFADJOINT)
    kdiff = float(np.abs(P.kernel_samples - direct.kernel_samples).max())
    return kdiff, abs(min_eigenvalue(P) - min_eigenvalue(direct))
