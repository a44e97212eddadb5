"""Direct and iterative solvers for the assembled SPD systems.

Cholesky is dense for small systems and banded (after reverse
Cuthill-McKee reordering) for larger ones; both fail loudly on a
nonpositive pivot, which signals an assembly bug or violated
ellipticity. The conjugate gradient path supports jacobi and zero
fill-in incomplete Cholesky preconditioning and always reports the true
(recomputed) residual.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import cho_factor, cho_solve, cholesky_banded, cho_solve_banded
from scipy.sparse.csgraph import reverse_cuthill_mckee

DENSE_LIMIT = 1500
DEFAULT_DIRECT_LIMIT = 20000


class SolverError(Exception):
    """Raised on solver failure (non-convergence or not-SPD input)."""


class NotSPDError(SolverError):
    """Cholesky hit a nonpositive pivot."""


@dataclass(frozen=True)
class SolverOptions:
    """Solve configuration.

    method 'auto' picks Cholesky up to DEFAULT_DIRECT_LIMIT free DOFs and
    preconditioned CG above.
    """

    method: str = "auto"
    preconditioner: str = "jacobi"
    rel_tolerance: float = 1e-12
    max_iterations: int = 0  # 0 -> 10 n

    def __post_init__(self):
        if not (0.0 < self.rel_tolerance < 1.0):
            raise ValueError("rel_tolerance must lie in (0, 1)")
        if self.method not in ("auto", "cg", "cholesky"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.preconditioner not in ("none", "jacobi", "incomplete_cholesky"):
            raise ValueError(f"unknown preconditioner {self.preconditioner!r}")


@dataclass
class SolveReport:
    """Solution plus convergence diagnostics.

    ``residual`` is recomputed from scratch, not taken from the CG
    recurrence.
    """

    x: np.ndarray
    method: str
    iterations: int
    residual: float
    seconds: float
    residual_history: list = field(default_factory=list)


def solve(A: sp.spmatrix, b: np.ndarray, options: SolverOptions = SolverOptions()) -> SolveReport:
    """Solve the SPD system A x = b."""
    A = sp.csr_matrix(A)
    b = np.asarray(b, float)
    n = A.shape[0]
    t0 = time.perf_counter()
    method = options.method
    if method == "auto":
        method = "cholesky" if n <= DEFAULT_DIRECT_LIMIT else "cg"

    if method == "cholesky":
        x = _cholesky_solve(A, b)
        iters = 0
        history: list = []
    else:
        x, iters, history = _pcg(A, b, options)

    bnorm = np.linalg.norm(b)
    res = np.linalg.norm(b - A @ x) / bnorm if bnorm > 0 else np.linalg.norm(A @ x)
    report = SolveReport(x, method, iters, res, time.perf_counter() - t0, history)
    if method == "cg" and res > options.rel_tolerance:
        raise SolverError(
            f"CG stalled after {iters} iterations, relative residual {res:.3e}"
            f" (history tail {history[-3:]})"
        )
    return report


def _cholesky_solve(A: sp.csr_matrix, b: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    try:
        if n <= DENSE_LIMIT:
            return cho_solve(cho_factor(A.toarray(), lower=True), b)
        perm = reverse_cuthill_mckee(A, symmetric_mode=True)
        inv = np.empty_like(perm)
        inv[perm] = np.arange(n)
        Ap = A[perm][:, perm].tocoo()
        bw = int(np.abs(Ap.row - Ap.col).max())
        ab = np.zeros((bw + 1, n))
        upper = Ap.col >= Ap.row
        ab[bw + Ap.row[upper] - Ap.col[upper], Ap.col[upper]] = Ap.data[upper]
        c = cholesky_banded(ab, lower=False)
        xp = cho_solve_banded((c, False), b[perm])
        return xp[inv]
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(f"Cholesky failed: {exc}") from exc


def incomplete_cholesky(A: sp.csr_matrix) -> sp.csr_matrix | None:
    """Zero fill-in incomplete Cholesky factor L (lower). None on breakdown."""
    n = A.shape[0]
    L = sp.tril(A, format="csr").astype(float)
    indptr, indices, data = L.indptr, L.indices, L.data
    # per-row entries of L computed so far
    row_entries: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    for i in range(n):
        start, end = indptr[i], indptr[i + 1]
        row_cols = indices[start:end]
        for p in range(start, end):
            j = row_cols[p - start]
            s = data[p]
            # s -= sum_k L[i,k] L[j,k] over shared sparsity, k < j
            acc = 0.0
            ei = row_entries[i]
            ej = row_entries[j]
            a_i = 0
            a_j = 0
            while a_i < len(ei) and a_j < len(ej):
                ki, vi = ei[a_i]
                kj, vj = ej[a_j]
                if ki == kj:
                    if ki >= j:
                        break
                    acc += vi * vj
                    a_i += 1
                    a_j += 1
                elif ki < kj:
                    a_i += 1
                else:
                    a_j += 1
            s -= acc
            if j < i:
                djj = row_entries[j][-1][1] if row_entries[j] and row_entries[j][-1][0] == j else None
                if djj is None or djj == 0.0:
                    return None
                data[p] = s / djj
                row_entries[i].append((j, data[p]))
            else:  # diagonal
                if s <= 0.0:
                    return None
                data[p] = np.sqrt(s)
                row_entries[i].append((i, data[p]))
    return sp.csr_matrix((data, indices, indptr), shape=(n, n))


def _pcg(A: sp.csr_matrix, b: np.ndarray, options: SolverOptions):
    n = A.shape[0]
    maxit = options.max_iterations or 10 * n
    precond = options.preconditioner

    if precond == "incomplete_cholesky":
        L = incomplete_cholesky(A)
        if L is None:
            warnings.warn("incomplete Cholesky broke down; falling back to jacobi")
            precond = "jacobi"
        else:
            Lt = sp.csr_matrix(L.T)
            from scipy.sparse.linalg import spsolve_triangular

            def apply_m(r):
                y = spsolve_triangular(L, r, lower=True)
                return spsolve_triangular(Lt, y, lower=False)

    if precond == "jacobi":
        d = A.diagonal()
        if np.any(d <= 0):
            raise NotSPDError("nonpositive diagonal entry")
        dinv = 1.0 / d

        def apply_m(r):
            return dinv * r

    elif precond == "none":
        def apply_m(r):
            return r

    x = np.zeros(n)
    r = b.copy()
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, 0, [0.0]
    z = apply_m(r)
    p = z.copy()
    rz = r @ z
    history = [1.0]
    for it in range(1, maxit + 1):
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise NotSPDError("CG encountered a direction of nonpositive curvature")
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        rel = np.linalg.norm(r) / bnorm
        history.append(rel)
        if rel <= options.rel_tolerance:
            # the recurrence residual drifts from the true one; accept
            # only if the recomputed residual agrees, else replace and
            # keep iterating from the corrected residual
            r_true = b - A @ x
            rel_true = np.linalg.norm(r_true) / bnorm
            if rel_true <= options.rel_tolerance:
                return x, it, history
            r = r_true
            z = apply_m(r)
            p = z.copy()
            rz = r @ z
            continue
        z = apply_m(r)
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    return x, maxit, history
