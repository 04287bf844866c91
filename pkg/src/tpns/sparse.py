"""Sparse linear algebra on top of scipy: CSR construction, LU, and CG."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

SparseMatrix = sp.csr_matrix


class SolverError(RuntimeError):
    pass


class StructuralSingularityError(SolverError):
    """The sparsity pattern alone makes the matrix singular (empty row/column)."""


class NumericalSingularityError(SolverError):
    """The factorization hit an exactly or numerically zero pivot."""


class ConvergenceError(SolverError):
    pass


class IndefiniteMatrixError(SolverError):
    pass


class TripletBuilder:
    """Accumulates (row, col, value) triplets; duplicates are summed on conversion."""

    def __init__(self):
        self._rows: list[np.ndarray] = []
        self._cols: list[np.ndarray] = []
        self._vals: list[np.ndarray] = []

    def add(self, rows, cols, vals) -> None:
        rows, cols, vals = (np.asarray(a).ravel() for a in (rows, cols, vals))
        if not (rows.shape == cols.shape == vals.shape):
            raise ValueError("triplet arrays must have equal length")
        self._rows.append(rows.astype(np.int64))
        self._cols.append(cols.astype(np.int64))
        self._vals.append(vals.astype(float))

    def arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if not self._rows:
            return np.zeros(0, np.int64), np.zeros(0, np.int64), np.zeros(0)
        return np.concatenate(self._rows), np.concatenate(self._cols), np.concatenate(self._vals)


def from_triplets(builder: TripletBuilder, shape: tuple[int, int]) -> SparseMatrix:
    rows, cols, vals = builder.arrays()
    if len(rows) and (
        rows.min() < 0 or cols.min() < 0 or rows.max() >= shape[0] or cols.max() >= shape[1]
    ):
        raise IndexError(f"triplet index out of range for shape {shape}")
    # stable sort by (row, col) before summing keeps accumulation order fixed
    order = np.lexsort((cols, rows))
    m = sp.coo_matrix((vals[order], (rows[order], cols[order])), shape=shape).tocsr()
    m.sum_duplicates()
    m.sort_indices()
    return m


def spmv(m: SparseMatrix, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if m.shape[1] != v.shape[0]:
        raise ValueError(f"dimension mismatch: {m.shape} @ {v.shape}")
    return m @ v


def relative_residual(m: SparseMatrix, x: np.ndarray, rhs: np.ndarray) -> float:
    r = np.linalg.norm(m @ x - rhs)
    b = np.linalg.norm(rhs)
    if b == 0.0:
        return float(r)
    return float(r / b)


class LUFactor:
    """Reusable sparse LU factorization (SuperLU, partial pivoting)."""

    def __init__(self, m: SparseMatrix):
        m = sp.csc_matrix(m)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"matrix must be square, got {m.shape}")
        if m.shape[0] and (
            np.any(np.diff(m.indptr) == 0) or np.any(np.diff(sp.csr_matrix(m).indptr) == 0)
        ):
            raise StructuralSingularityError("matrix has an empty row or column")
        self.shape = m.shape
        try:
            self._lu = spla.splu(m)
        except RuntimeError as exc:
            raise NumericalSingularityError(str(exc)) from exc

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        x = self._lu.solve(np.asarray(rhs, dtype=float))
        if not np.all(np.isfinite(x)):
            raise NumericalSingularityError("non-finite solution")
        return x


def lu_solve(m: SparseMatrix, rhs: np.ndarray) -> np.ndarray:
    return LUFactor(m).solve(rhs)


def cg_solve(
    m: SparseMatrix, rhs: np.ndarray, tol: float = 1e-12, max_iter: int | None = None
) -> np.ndarray:
    """Jacobi-preconditioned conjugate gradients.

    Stops on relative residual ``<= tol``. Raises on negative curvature or
    when ``max_iter`` is exhausted.
    """
    rhs = np.asarray(rhs, dtype=float)
    n = rhs.shape[0]
    max_iter = 10 * n if max_iter is None else max_iter
    diag = m.diagonal()
    if np.any(diag <= 0):
        raise IndefiniteMatrixError("non-positive diagonal entry")
    inv_d = 1.0 / diag
    x = np.zeros(n)
    bnorm = np.linalg.norm(rhs)
    if bnorm == 0.0:
        return x
    r = rhs.copy()
    z = inv_d * r
    p = z.copy()
    rz = r @ z
    for _ in range(max_iter):
        mp = m @ p
        curv = p @ mp
        if curv <= 0:
            raise IndefiniteMatrixError(f"negative curvature {curv:.3e}")
        step = rz / curv
        x += step * p
        r -= step * mp
        if np.linalg.norm(r) <= tol * bnorm:
            return x
        z = inv_d * r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    raise ConvergenceError(f"CG did not converge in {max_iter} iterations")


class CGOperator:
    """Factorization-like handle around :func:`cg_solve` for a fixed SPD matrix."""

    def __init__(self, m: SparseMatrix, tol: float = 1e-13):
        self.m = sp.csr_matrix(m)
        self.tol = tol

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cg_solve(self.m, rhs, tol=self.tol)
