"""Sparse Hermitian-definite eigensolver for the Bloch pencils.

Computes the m smallest eigenpairs of S v = E M v with S Hermitian and M
symmetric positive definite.  The smallest eigenvalues sit at the bottom of
a positive spectrum, so shift-invert around sigma = 0 converges in a few
Lanczos restarts: S is factorized once per quasimomentum and reused for all
inner solves.  A fixed RNG seed makes the starting vector, and therefore
the whole iteration, deterministic.

Returned eigenvectors are M-orthonormal.  ARPACK already delivers this for
well separated eigenvalues; clustered pairs (the pseudo edge modes of the
conjugation-breaking wall are nearly degenerate) get a symmetric
re-orthonormalization within their cluster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class EigensolverError(RuntimeError):
    """Iteration failed to converge; carries the partial result if any."""

    def __init__(self, msg, result=None):
        super().__init__(msg)
        self.result = result


@dataclass
class EigenResult:
    values: np.ndarray  # (m,) ascending, real
    vectors: np.ndarray  # (n, m), M-orthonormal columns
    residuals: np.ndarray  # (m,) ||S v - E M v|| / ||M v||
    iterations: int  # number of shift-invert applications
    method: str = "shift-invert"
    ortho_defect: float = 0.0  # max |V^H M V - I| after post-processing


def _refine_block(S, M, lu, values, vectors, tol, rounds=3):
    """Polish ARPACK eigenpairs by block inverse iteration + Rayleigh-Ritz.

    ARPACK iterates the shift-inverted operator to machine precision, but
    the residuals mapped back to the original pencil can land just above a
    tight gate (observed 1.2e-9 against 1e-9 on a 2e3-dof stiffness).  Each
    round reuses the factorization for one block inverse-iteration step and
    re-extracts Ritz pairs from the refreshed subspace; the best iterate by
    worst-column residual is kept, so a round can never make things worse.
    """
    m = vectors.shape[1]
    best = (np.inf, values, vectors)
    n_extra = 0
    for _ in range(rounds + 1):
        MV = M @ vectors
        res = np.linalg.norm(S @ vectors - MV * values[None, :], axis=0)
        res = res / np.linalg.norm(MV, axis=0)
        worst = res.max()
        if worst < best[0]:
            best = (worst, values, vectors)
        if worst <= 0.5 * tol or n_extra >= rounds * m:
            break
        W = lu.solve(MV)
        n_extra += m
        # M-orthonormalize the refreshed block, then project and re-solve
        G = W.conj().T @ (M @ W)
        try:
            C = sla.cholesky(G, lower=False)
            W = sla.solve_triangular(C, W.conj().T, trans="C").conj().T
        except sla.LinAlgError:
            break
        theta, U = np.linalg.eigh(W.conj().T @ (S @ W))
        values = theta
        vectors = W @ U
    return best[1], best[2], n_extra


def _m_orthonormalize(values, vectors, M, rel_gap=1e-8):
    """Symmetric re-orthonormalization inside eigenvalue clusters."""
    scale = max(abs(values[0]), abs(values[-1]), 1e-300)
    start = 0
    for end in range(1, len(values) + 1):
        if end < len(values) and (values[end] - values[end - 1]) < rel_gap * scale:
            continue
        block = vectors[:, start:end]
        G = block.conj().T @ (M @ block)
        # Loewdin: block (G)^(-1/2); minimal change preserving the span
        w, U = np.linalg.eigh(G)
        if w.min() <= 0:
            raise EigensolverError("eigenvector block is numerically dependent")
        vectors[:, start:end] = block @ (U * (w**-0.5)) @ U.conj().T
        start = end
    return vectors


def solve_gevp(
    S: sp.spmatrix,
    M: sp.spmatrix,
    m: int,
    tol: float = 1e-9,
    max_iter: int = 500,
    seed: int = 7,
    sigma: float = 0.0,
) -> EigenResult:
    """m smallest eigenpairs of the Hermitian-definite pencil (S, M).

    Parameters
    ----------
    S, M : sparse matrices, S Hermitian, M symmetric positive definite.
    m : number of eigenpairs, 1 <= m < n.
    tol : acceptance threshold for the scaled residuals
        ||S v - E M v|| / ||M v||; exceeding it raises EigensolverError.
    max_iter : restart cap handed to ARPACK.
    seed : seeds the starting vector; fixed seed gives bit-reproducible runs.
    sigma : shift; the default 0 targets the bottom of a positive spectrum.
    """
    n = S.shape[0]
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")

    rng = np.random.default_rng(seed)
    n_solve = 0

    if n < max(3 * m, 30):
        dense_S = S.toarray()
        dense_M = M.toarray()
        values, vectors = sla.eigh(dense_S, dense_M)
        values, vectors = values[:m], vectors[:, :m]
        method = "dense"
    else:
        v0 = rng.standard_normal(n)
        lu = spla.splu((S - sigma * M).tocsc())

        def op(x):
            nonlocal n_solve
            n_solve += 1
            return lu.solve(x)

        OPinv = spla.LinearOperator((n, n), matvec=op, dtype=complex)
        ncv = min(n - 1, max(2 * m, m + 8, 20))
        try:
            values, vectors = spla.eigsh(
                S,
                k=m,
                M=M,
                sigma=sigma,
                which="LM",
                v0=v0,
                ncv=ncv,
                maxiter=max_iter,
                tol=0,
                OPinv=OPinv,
            )
        except spla.ArpackNoConvergence as exc:
            partial = None
            if len(exc.eigenvalues):
                partial = EigenResult(
                    values=exc.eigenvalues,
                    vectors=exc.eigenvectors,
                    residuals=np.full(len(exc.eigenvalues), np.nan),
                    iterations=n_solve,
                    method="shift-invert (partial)",
                )
            raise EigensolverError(
                f"ARPACK did not converge within {max_iter} restarts "
                f"({len(exc.eigenvalues)}/{m} pairs found)",
                result=partial,
            ) from exc
        method = "shift-invert"

    order = np.argsort(values)
    values = np.ascontiguousarray(values[order].real)
    vectors = np.ascontiguousarray(vectors[:, order].astype(complex))

    if method == "shift-invert":
        values, vectors, extra = _refine_block(S, M, lu, values, vectors, tol)
        n_solve += extra
        order = np.argsort(values)
        values = np.ascontiguousarray(values[order].real)
        vectors = np.ascontiguousarray(vectors[:, order])

    # normalize in the M inner product, then fix clustered blocks
    for i in range(m):
        nrm = np.sqrt(np.real(np.vdot(vectors[:, i], M @ vectors[:, i])))
        vectors[:, i] /= nrm
    vectors = _m_orthonormalize(values, vectors, M)

    MV = M @ vectors
    gram = vectors.conj().T @ MV
    defect = float(np.abs(gram - np.eye(m)).max())

    SV = S @ vectors
    res = np.linalg.norm(SV - MV * values[None, :], axis=0)
    res = res / np.linalg.norm(MV, axis=0)

    result = EigenResult(
        values=values,
        vectors=vectors,
        residuals=res,
        iterations=n_solve,
        method=method,
        ortho_defect=defect,
    )
    if res.max() > tol:
        raise EigensolverError(
            f"eigen residual {res.max():.3e} above tolerance {tol:.1e}", result=result
        )
    return result
