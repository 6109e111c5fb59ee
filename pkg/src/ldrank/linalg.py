"""Sparse kernels: compressed column storage, products, truncated SVD and
power iteration.

Everything here is deterministic: summations follow storage order and the
iterative solvers start from the normalized all-ones vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ConvergenceError


@dataclass(frozen=True)
class SparseMatrixCCS:
    """Compressed column storage matrix.

    Parameters
    ----------
    nrows, ncols : int
    col_ptr : int array, shape (ncols + 1,)
        ``col_ptr[j]:col_ptr[j+1]`` delimits column ``j`` in ``row_idx``
        and ``values``.
    row_idx : int array, shape (nnz,)
        Row indices, strictly increasing within each column.
    values : float array, shape (nnz,)
        Finite, nonzero entries.
    """

    nrows: int
    ncols: int
    col_ptr: np.ndarray
    row_idx: np.ndarray
    values: np.ndarray
    _cols: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        col_ptr = np.asarray(self.col_ptr, dtype=np.int64)
        row_idx = np.asarray(self.row_idx, dtype=np.int64)
        values = np.asarray(self.values, dtype=np.float64)
        if self.nrows < 0 or self.ncols < 0:
            raise ValueError("negative dimension")
        if col_ptr.shape != (self.ncols + 1,):
            raise ValueError("col_ptr must have ncols + 1 entries")
        nnz = row_idx.shape[0]
        if col_ptr[0] != 0 or col_ptr[-1] != nnz or values.shape != (nnz,):
            raise ValueError("col_ptr inconsistent with row_idx/values")
        if np.any(np.diff(col_ptr) < 0):
            raise ValueError("col_ptr must be non-decreasing")
        if nnz:
            if row_idx.min() < 0 or row_idx.max() >= self.nrows:
                raise ValueError("row index out of range")
            if not np.all(np.isfinite(values)) or np.any(values == 0):
                raise ValueError("values must be finite and nonzero")
        cols = np.repeat(np.arange(self.ncols, dtype=np.int64), np.diff(col_ptr))
        if nnz > 1:
            same_col = cols[1:] == cols[:-1]
            if np.any(same_col & (row_idx[1:] <= row_idx[:-1])):
                raise ValueError("row indices must increase strictly within a column")
        for name, arr in (("col_ptr", col_ptr), ("row_idx", row_idx), ("values", values), ("_cols", cols)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nrows, self.ncols)

    @property
    def nnz(self) -> int:
        return int(self.row_idx.shape[0])

    @property
    def col_idx(self) -> np.ndarray:
        """Column index of every stored entry, in storage order."""
        return self._cols

    @classmethod
    def from_triplets(cls, nrows, ncols, rows, cols, values) -> "SparseMatrixCCS":
        """Assemble from coordinate triplets; duplicates are summed and
        resulting zeros dropped."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if not (rows.shape == cols.shape == values.shape):
            raise ValueError("triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols):
            raise ValueError("triplet index out of range")
        order = np.lexsort((rows, cols))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size:
            start = np.ones(rows.size, dtype=bool)
            start[1:] = (rows[1:] != rows[:-1]) | (cols[1:] != cols[:-1])
            group = np.cumsum(start) - 1
            summed = np.zeros(int(group[-1]) + 1)
            np.add.at(summed, group, values)
            rows, cols, values = rows[start], cols[start], summed
            keep = values != 0
            rows, cols, values = rows[keep], cols[keep], values[keep]
        col_ptr = np.zeros(ncols + 1, dtype=np.int64)
        np.cumsum(np.bincount(cols, minlength=ncols), out=col_ptr[1:])
        return cls(nrows, ncols, col_ptr, rows, values)

    @classmethod
    def from_dense(cls, a) -> "SparseMatrixCCS":
        a = np.asarray(a, dtype=np.float64)
        if a.ndim != 2:
            raise ValueError("expected a 2-d array")
        rows, cols = np.nonzero(a)
        return cls.from_triplets(a.shape[0], a.shape[1], rows, cols, a[rows, cols])

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        out[self.row_idx, self._cols] = self.values
        return out

    def transpose(self) -> "SparseMatrixCCS":
        return SparseMatrixCCS.from_triplets(self.ncols, self.nrows, self._cols, self.row_idx, self.values)

    @property
    def T(self) -> "SparseMatrixCCS":
        return self.transpose()

    def row_sums(self) -> np.ndarray:
        return np.bincount(self.row_idx, weights=self.values, minlength=self.nrows)

    def col_norms(self) -> np.ndarray:
        return np.sqrt(np.bincount(self._cols, weights=self.values**2, minlength=self.ncols))

    def scale_rows(self, factors) -> "SparseMatrixCCS":
        """Return ``diag(factors) @ self``; rows scaled to zero are dropped."""
        factors = np.asarray(factors, dtype=np.float64)
        if factors.shape != (self.nrows,):
            raise ValueError("need one factor per row")
        return SparseMatrixCCS.from_triplets(
            self.nrows, self.ncols, self.row_idx, self._cols, self.values * factors[self.row_idx]
        )

    def permute_rows(self, perm) -> "SparseMatrixCCS":
        """Row ``i`` of the result is row ``perm[i]`` of ``self``."""
        perm = np.asarray(perm, dtype=np.int64)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(perm.size)
        return SparseMatrixCCS.from_triplets(self.nrows, self.ncols, inverse[self.row_idx], self._cols, self.values)


def spmv(m: SparseMatrixCCS, x) -> np.ndarray:
    """``m @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.ncols,):
        raise ValueError(f"dimension mismatch: matrix has {m.ncols} columns, vector has {x.shape}")
    return np.bincount(m.row_idx, weights=m.values * x[m.col_idx], minlength=m.nrows)


def spmv_t(m: SparseMatrixCCS, x) -> np.ndarray:
    """``m.T @ x``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (m.nrows,):
        raise ValueError(f"dimension mismatch: matrix has {m.nrows} rows, vector has {x.shape}")
    return np.bincount(m.col_idx, weights=m.values * x[m.row_idx], minlength=m.ncols)


class SvdResult(NamedTuple):
    U: np.ndarray  # (nrows, k)
    S: np.ndarray  # (k,), descending
    Vt: np.ndarray  # (k, ncols)
    iterations: int


def _fix_signs(U, Vt):
    for i in range(U.shape[1]):
        j = int(np.argmax(np.abs(U[:, i])))
        if U[j, i] < 0:
            U[:, i] = -U[:, i]
            Vt[i, :] = -Vt[i, :]
    return U, Vt


def _random_unit_orthogonal(rng, dim, basis):
    for _ in range(10):
        w = rng.standard_normal(dim)
        for _ in range(2):
            w -= basis @ (basis.T @ w)
        norm = np.linalg.norm(w)
        if norm > 1e-8:
            return w / norm
    raise ConvergenceError("could not extend orthonormal basis", state=basis)


def truncated_svd(r: SparseMatrixCCS, k: int, tol: float = 1e-10, max_iter: int = 10_000, seed: int = 0) -> SvdResult:
    """The ``k`` dominant singular triplets of a sparse matrix.

    ``k == 1`` runs power iteration on ``x -> R.T (R x)``; larger ``k`` uses
    Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization.
    Both start from the normalized all-ones vector. A triplet is accepted
    once its singular value changes by less than ``tol`` relatively between
    iterations and its residual ``||R.T u - s v||`` is below ``tol * s[0]``.

    Raises
    ------
    ValueError
        If ``k`` is out of range.
    ConvergenceError
        If ``max_iter`` is exhausted; ``state`` holds the best iterate.
    """
    nrows, ncols = r.shape
    if not 1 <= k <= min(nrows, ncols):
        raise ValueError(f"k={k} out of range [1, {min(nrows, ncols)}]")
    if k == 1:
        U, S, Vt, it = _power_svd(r, tol, max_iter, seed)
    elif nrows < ncols:
        # Lanczos is exact once the smaller basis is complete; run it on R.T
        # so that basis is the right-hand one.
        Ut, S, V, it = _lanczos_svd(r.transpose(), k, tol, max_iter, seed)
        U, Vt = V.T, Ut.T
    else:
        U, S, Vt, it = _lanczos_svd(r, k, tol, max_iter, seed)
    U, Vt = _fix_signs(np.array(U), np.array(Vt))
    return SvdResult(U, S, Vt, it)


def _power_svd(r, tol, max_iter, seed):
    nrows, ncols = r.shape
    v = np.full(ncols, 1.0 / np.sqrt(ncols))
    rng = None
    sigma = 0.0
    for it in range(1, max_iter + 1):
        u = spmv(r, v)
        sigma_new = float(np.linalg.norm(u))
        if sigma_new <= 1e-300:
            if rng is None:
                # start vector lies in the null space: one seeded restart
                rng = np.random.default_rng(seed)
                v = rng.standard_normal(ncols)
                v /= np.linalg.norm(v)
                continue
            U = np.zeros((nrows, 1))
            U[0, 0] = 1.0
            return U, np.zeros(1), v[None, :], it
        u /= sigma_new
        w = spmv_t(r, u)
        residual = float(np.linalg.norm(w - sigma_new * v))
        converged = abs(sigma_new - sigma) <= tol * sigma_new and residual <= tol * sigma_new
        sigma = sigma_new
        if converged:
            return u[:, None], np.array([sigma]), v[None, :], it
        v = w / np.linalg.norm(w)
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        state=SvdResult(u[:, None], np.array([sigma]), v[None, :], max_iter),
    )


def _lanczos_svd(r, k, tol, max_iter, seed):
    # Assumes nrows >= ncols, so the right basis V fills up first and the
    # factorization R V = U B is exact when it does.
    nrows, ncols = r.shape
    limit = min(ncols, max_iter)
    rng = np.random.default_rng(seed)
    V = np.zeros((ncols, ncols + 1))
    U = np.zeros((nrows, ncols))
    alpha = np.zeros(ncols)
    beta = np.zeros(ncols)
    V[:, 0] = 1.0 / np.sqrt(ncols)
    prev = None
    for j in range(limit):
        p = spmv(r, V[:, j])
        if j > 0:
            p -= beta[j - 1] * U[:, j - 1]
        for _ in range(2):
            p -= U[:, :j] @ (U[:, :j].T @ p)
        alpha[j] = np.linalg.norm(p)
        scale = max(alpha[:j].max(initial=0.0), beta[:j].max(initial=0.0))
        if alpha[j] <= 1e-12 * scale or alpha[j] <= 1e-300:
            alpha[j] = 0.0
            U[:, j] = _random_unit_orthogonal(rng, nrows, U[:, :j])
        else:
            U[:, j] = p / alpha[j]
        w = spmv_t(r, U[:, j]) - alpha[j] * V[:, j]
        for _ in range(2):
            w -= V[:, : j + 1] @ (V[:, : j + 1].T @ w)
        beta[j] = np.linalg.norm(w)
        m = j + 1
        B = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1)
        P, s, Qt = np.linalg.svd(B)
        if m >= k:
            top = s[:k]
            res = beta[j] * np.abs(P[m - 1, :k])
            exact = m == ncols
            stable = prev is not None and np.all(np.abs(top - prev) <= tol * np.maximum(top, 1e-300))
            if exact or (stable and np.all(res <= tol * max(s[0], 1e-300))):
                Uk = U[:, :m] @ P[:, :k]
                Vtk = Qt[:k, :] @ V[:, :m].T
                return Uk, top.copy(), Vtk, m
            prev = top.copy()
        if m == ncols:
            break
        if beta[j] <= 1e-12 * s[0] or beta[j] <= 1e-300:
            beta[j] = 0.0
            V[:, j + 1] = _random_unit_orthogonal(rng, ncols, V[:, : j + 1])
        else:
            V[:, j + 1] = w / beta[j]
    m = limit
    B = np.diag(alpha[:m]) + np.diag(beta[: m - 1], 1)
    P, s, Qt = np.linalg.svd(B)
    kk = min(k, m)
    best = SvdResult(U[:, :m] @ P[:, :kk], s[:kk], Qt[:kk, :] @ V[:, :m].T, m)
    raise ConvergenceError(f"Lanczos did not converge in {max_iter} steps", state=best)


class IterationResult(NamedTuple):
    x: np.ndarray
    iterations: int
    residual: float


def power_iteration(
    op: Callable[[np.ndarray], np.ndarray],
    start,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    renormalize: str | None = "L1",
) -> IterationResult:
    """Iterate ``x <- op(x)`` until ``||op(x) - x||_1 < tol``.

    The returned ``x`` satisfies the tolerance check against ``op(x)``; it is
    the last iterate that was tested, not the one after it.
    """
    if renormalize not in (None, "L1"):
        raise ValueError(f"unknown renormalization {renormalize!r}")
    x = np.array(start, dtype=np.float64)
    for it in range(1, max_iter + 1):
        y = np.asarray(op(x), dtype=np.float64)
        if renormalize == "L1":
            y = y / np.abs(y).sum()
        residual = float(np.abs(y - x).sum())
        if residual < tol:
            return IterationResult(x, it, residual)
        x = y
    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations (residual {residual:.3g})",
        state=x,
    )
