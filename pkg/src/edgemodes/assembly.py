"""P1 finite element assembly on the cylinder mesh.

The Bloch-reduced eigenproblem at quasimomentum k_par in [0, 2 pi] reads

    a(p, q) = int W (grad + i t k1) p . conj((grad + i t k1) q) dx,
    t = k_par / (2 pi),

over v1-periodic functions vanishing at tau2 = +-L.  Expanding the form
splits it into four k-independent sparse matrices

    A[i,j] = int (W grad phi_j) . grad phi_i
    B[i,j] = int (W grad phi_j) . k1 phi_i
    C[i,j] = int (W k1 phi_j) . k1 phi_i
    M[i,j] = int phi_j phi_i

assembled once per mesh; the Bloch stiffness for any k_par is then

    S(k_par) = A - i t B + i t B^H + t^2 C.

Using B^H (not B^T) keeps S exactly Hermitian also for complex-valued
weights, where B itself is complex.  A, C and M are symmetrized after
assembly so the Hermiticity of S holds to the last bit.

Quadrature rules on the reference triangle are available for polynomial
degrees 1, 2, 3, 4 and 6; the default degree 4 keeps the consistency error
of the trigonometric weight far below the discretization error.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .lattice import TWO_PI
from .material import DomainWallSpec, weight_function
from .mesh import CylinderMesh, DofMap

# barycentric points and weights (weights sum to 1; multiply by the
# physical triangle area).  Degrees 4 and 6 are the standard symmetric
# Gaussian rules with 6 and 12 points.
_RULES: dict[int, tuple[np.ndarray, np.ndarray]] = {}

_RULES[1] = (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0]))

_RULES[2] = (
    np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]]),
    np.full(3, 1 / 3),
)

_RULES[3] = (
    np.array(
        [
            [1 / 3, 1 / 3, 1 / 3],
            [0.6, 0.2, 0.2],
            [0.2, 0.6, 0.2],
            [0.2, 0.2, 0.6],
        ]
    ),
    np.array([-27 / 48, 25 / 48, 25 / 48, 25 / 48]),
)


def _sym3(a: float) -> np.ndarray:
    b = 1.0 - 2.0 * a
    return np.array([[b, a, a], [a, b, a], [a, a, b]])


def _sym6(a: float, b: float) -> np.ndarray:
    c = 1.0 - a - b
    return np.array(
        [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]]
    )


_RULES[4] = (
    np.vstack([_sym3(0.091576213509771), _sym3(0.445948490915965)]),
    np.concatenate(
        [np.full(3, 0.109951743655322), np.full(3, 0.223381589678011)]
    ),
)

_RULES[6] = (
    np.vstack(
        [
            _sym3(0.063089014491502),
            _sym3(0.249286745170910),
            _sym6(0.310352451033785, 0.053145049844816),
        ]
    ),
    np.concatenate(
        [
            np.full(3, 0.050844906370207),
            np.full(3, 0.116786275726379),
            np.full(6, 0.082851075618374),
        ]
    ),
)


def triangle_quadrature(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Barycentric points and normalized weights exact up to the given degree."""
    if order not in _RULES:
        raise ValueError(f"no quadrature rule of order {order}; have {sorted(_RULES)}")
    pts, wts = _RULES[order]
    return pts.copy(), wts.copy()


@dataclass
class MatrixSet:
    """The four k-independent matrices of one mesh/material pair."""

    A: sp.csr_matrix
    B: sp.csr_matrix
    C: sp.csr_matrix
    M: sp.csr_matrix
    n_dof: int
    quad_order: int


def _resolve_weight(weight) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(weight, DomainWallSpec):
        return weight_function(weight)
    if callable(weight):
        return weight
    raise TypeError("weight must be a DomainWallSpec or a callable x -> 2x2 batches")


def _element_geometry(mesh: CylinderMesh):
    """Vertex coordinates, constant P1 gradients and areas per triangle."""
    p = mesh.nodes_xy[mesh.triangles]  # (nt, 3, 2)
    area2 = 2.0 * mesh.areas
    grads = np.empty((len(p), 2, 3))
    # grad lambda_a = rotated opposite edge / (2 area)
    for a in range(3):
        e = p[:, (a + 2) % 3] - p[:, (a + 1) % 3]
        grads[:, 0, a] = -e[:, 1] / area2
        grads[:, 1, a] = e[:, 0] / area2
    return p, grads


def assemble(
    mesh: CylinderMesh,
    dof_map: DofMap,
    weight,
    quad_order: int = 4,
) -> MatrixSet:
    """Assemble A, B, C and M for one material on one mesh.

    weight is a DomainWallSpec or any callable mapping (n, 2) points to
    (n, 2, 2) Hermitian matrices.  Dirichlet rows and columns are
    eliminated; the periodic seam accumulates slave contributions onto the
    master column.  All four matrices are built in a single sweep over the
    quadrature points without materializing per-element dense blocks beyond
    one (nt, 3, 3) buffer per matrix.
    """
    wfun = _resolve_weight(weight)
    pts, wts = triangle_quadrature(quad_order)
    k1 = mesh.basis.k1
    p, grads = _element_geometry(mesh)
    nt = len(mesh.triangles)

    A_loc = np.zeros((nt, 3, 3), dtype=complex)
    B_loc = np.zeros((nt, 3, 3), dtype=complex)
    C_loc = np.zeros((nt, 3, 3), dtype=complex)
    M_loc = np.zeros((nt, 3, 3))

    for q in range(len(wts)):
        lam = pts[q]
        xq = np.einsum("a,tax->tx", lam, p)
        Wq = np.asarray(wfun(xq))
        if Wq.shape != (nt, 2, 2):
            raise ValueError(f"weight callable returned shape {Wq.shape}")
        wA = wts[q] * mesh.areas
        Wg = np.einsum("txy,tyb->txb", Wq, grads)  # W grad lambda_b
        A_loc += wA[:, None, None] * np.einsum("txa,txb->tab", grads, Wg)
        kW = np.einsum("x,txb->tb", k1, Wg)  # k1 . (W grad lambda_b)
        B_loc += wA[:, None, None] * np.einsum("a,tb->tab", lam, kW)
        kWk = np.einsum("x,txy,y->t", k1, Wq, k1)
        C_loc += (wA * kWk)[:, None, None] * np.outer(lam, lam)
        M_loc += wA[:, None, None] * np.outer(lam, lam)

    tri_dof = dof_map.id_to_dof[dof_map.geo_to_id[mesh.triangles]]  # (nt, 3)
    rows = np.repeat(tri_dof, 3, axis=1).ravel()  # a index slow
    cols = np.tile(tri_dof, (1, 3)).ravel()
    keep = (rows >= 0) & (cols >= 0)
    rows, cols = rows[keep], cols[keep]
    n = dof_map.n_dof
    shape = (n, n)

    def scatter(loc, dtype):
        data = loc.reshape(nt, 9).ravel()[keep]
        mat = sp.coo_matrix((data.astype(dtype), (rows, cols)), shape=shape)
        return mat.tocsr()

    A = scatter(A_loc, complex)
    B = scatter(B_loc, complex)
    C = scatter(C_loc, complex)
    M = scatter(M_loc, float)

    # kill roundoff asymmetry so the Bloch stiffness is Hermitian exactly
    A = (A + A.conj().T) * 0.5
    C = (C + C.conj().T) * 0.5
    M = (M + M.T) * 0.5

    if M.diagonal().min() <= 0:
        raise AssertionError("mass matrix has a non-positive diagonal entry")

    return MatrixSet(A=A, B=B, C=C, M=M, n_dof=n, quad_order=quad_order)


def bloch_stiffness(ms: MatrixSet, k_par: float) -> sp.csr_matrix:
    """Hermitian Bloch stiffness S(k_par); pure, the MatrixSet is not touched."""
    t = k_par / TWO_PI
    X = (-1j * t) * ms.B
    S = ms.A + (t * t) * ms.C + X + X.conj().T
    return S.tocsr()


def mass_matrix_id(mesh: CylinderMesh, dof_map: DofMap) -> sp.csr_matrix:
    """Mass matrix over all identified nodes (Dirichlet rows kept).

    Exact for P1 integrands; used for L2 norms of nodal fields such as
    recovered gradients, which do not vanish on the boundary.
    """
    tri_id = dof_map.geo_to_id[mesh.triangles]
    loc = (np.ones((3, 3)) + np.eye(3)) / 12.0
    data = (mesh.areas[:, None, None] * loc).ravel()
    rows = np.repeat(tri_id, 3, axis=1).ravel()
    cols = np.tile(tri_id, (1, 3)).ravel()
    n = dof_map.n_id
    return sp.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def nodal_l2_norm(M_id: sp.csr_matrix, values_id: np.ndarray) -> float:
    """L2 norm of a P1 nodal field (or stacked fields along axis 0)."""
    v = np.atleast_2d(values_id)
    total = sum(np.real(np.vdot(row, M_id @ row)) for row in v)
    return float(np.sqrt(total))


def dump_matrix_coo(mat: sp.spmatrix, path) -> None:
    """Write a sparse matrix as 'row col re im' text lines."""
    coo = mat.tocoo()
    with open(path, "w") as f:
        f.write("row,col,re,im\n")
        for r, c, v in zip(coo.row, coo.col, coo.data):
            f.write(f"{r},{c},{np.real(v):.16e},{np.imag(v):.16e}\n")
