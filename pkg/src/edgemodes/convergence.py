"""Mesh refinement studies: Cauchy error decay and observed orders.

Exact eigenvalues of the domain-wall operator are unknown, so convergence
is measured between successive meshes of a doubling sequence.  For band i
and the mesh pair (N, 2N):

    err_fem       |E_i,N - E_i,2N| / E_i,2N
    err_recovered same with the corrected eigenvalues
    de_gradient   L2 norm of (recovered gradient on N, interpolated to the
                  2N mesh) minus (recovered gradient on 2N)

Eigenvectors are defined up to a global phase; before comparing gradients
the coarse eigenvector is rotated so its value at the common node of
largest coarse magnitude matches the phase of the fine one.  Observed
orders are least-squares slopes of log(error) against log(h) using the
coarse h of each pair; the theory gives order 2 for the plain eigenvalues,
3 for the corrected ones (4 observed on uniform meshes) and 2 for the
recovered gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assembly import bloch_stiffness, mass_matrix_id, nodal_l2_norm
from .config import MeshConfig, RunConfig
from .eigensolver import solve_gevp
from .mesh import interpolate_nodal
from .spectrum import correction_norm, discretize


@dataclass
class MeshLevel:
    """Solved eigenpairs and recovered gradients on one mesh of the study."""

    N: int
    mesh: object
    dof_map: object
    e_fem: np.ndarray  # (nb,)
    e_recovered: np.ndarray  # (nb,)
    vecs_id: np.ndarray  # (n_id, nb)
    grad_x: np.ndarray  # (n_id, nb)
    grad_y: np.ndarray


@dataclass
class ConvergenceReport:
    n_list: tuple[int, ...]
    k_par: float
    bands: int
    pairs: list[tuple[int, int]]
    err_fem: np.ndarray  # (n_pairs, bands)
    err_recovered: np.ndarray
    de_gradient: np.ndarray
    slopes: dict[str, np.ndarray] | None  # quantity -> (bands,)

    def rows(self):
        """Row tuples for the pair-error table."""
        for p, (nc, nf) in enumerate(self.pairs):
            for b in range(self.bands):
                yield (
                    p,
                    nc,
                    nf,
                    b + 1,
                    self.err_fem[p, b],
                    self.err_recovered[p, b],
                    self.de_gradient[p, b],
                )

    def slope_rows(self):
        if self.slopes is None:
            return
        for quantity in ("fem", "recovered", "gradient"):
            for b in range(self.bands):
                yield (b + 1, quantity, self.slopes[quantity][b])


def _solve_level(cfg: RunConfig, N: int, k_par: float, nb: int) -> MeshLevel:
    level_cfg = replace(cfg, mesh=MeshConfig(N=N, L=cfg.mesh.L, diagonal=cfg.mesh.diagonal))
    disc = discretize(level_cfg)
    S = bloch_stiffness(disc.matrices, k_par)
    res = solve_gevp(
        S,
        disc.matrices.M,
        nb,
        tol=cfg.solver.tol,
        max_iter=cfg.solver.max_iter,
        seed=cfg.solver.seed,
    )
    vecs_id = disc.dof_map.zero_extend(res.vectors.T).T
    gx, gy = disc.recovery.apply(vecs_id)
    e_rec = np.empty(nb)
    for i in range(nb):
        corr = correction_norm(
            disc.mesh,
            disc.dof_map,
            disc.spec,
            vecs_id[:, i],
            (gx[:, i], gy[:, i]),
            cfg.solver.quad_order,
        )
        e_rec[i] = res.values[i] - corr
    return MeshLevel(
        N=N,
        mesh=disc.mesh,
        dof_map=disc.dof_map,
        e_fem=res.values,
        e_recovered=e_rec,
        vecs_id=vecs_id,
        grad_x=gx,
        grad_y=gy,
    )


def _common_node_fine_ids(coarse: MeshLevel, fine: MeshLevel) -> np.ndarray:
    """Fine identified-node ids sitting at the coarse node positions."""
    r = fine.N // coarse.N
    Nc, Nf = coarse.N, fine.N
    jc = np.arange(coarse.dof_map.n_id) // Nc
    ic = np.arange(coarse.dof_map.n_id) % Nc
    return (r * jc) * Nf + r * ic


def _pair_gradient_error(coarse: MeshLevel, fine: MeshLevel, band: int, M_fine) -> float:
    common = _common_node_fine_ids(coarse, fine)
    pc = coarse.vecs_id[:, band]
    pf = fine.vecs_id[common, band]
    idx = int(np.argmax(np.abs(pc)))
    if abs(pf[idx]) == 0 or abs(pc[idx]) == 0:
        phase = 1.0
    else:
        phase = (pf[idx] / abs(pf[idx])) / (pc[idx] / abs(pc[idx]))
    tau_f = fine.mesh.nodes_tau[fine.dof_map.id_rep_geo]
    dx = interpolate_nodal(
        coarse.mesh, coarse.dof_map, phase * coarse.grad_x[:, band], tau_f
    ) - fine.grad_x[:, band]
    dy = interpolate_nodal(
        coarse.mesh, coarse.dof_map, phase * coarse.grad_y[:, band], tau_f
    ) - fine.grad_y[:, band]
    return float(np.sqrt(nodal_l2_norm(M_fine, dx) ** 2 + nodal_l2_norm(M_fine, dy) ** 2))


def run_study(cfg: RunConfig, n_list=None) -> ConvergenceReport:
    """Run the refinement study configured in cfg.study.

    n_list overrides the configured mesh sequence; entries must double.
    Slopes are fitted when the sequence has at least three meshes (two
    error pairs); a two-mesh run reports the single pair without slopes.
    """
    if n_list is None:
        if cfg.study is None:
            raise ValueError("configuration has no study section and no n_list given")
        n_list = cfg.study.n_list
    n_list = tuple(int(n) for n in n_list)
    if len(n_list) < 2:
        raise ValueError("n_list needs at least two meshes")
    for a, b in zip(n_list, n_list[1:]):
        if b != 2 * a:
            raise ValueError(f"n_list entries must double: got {a} then {b}")
    k_par = cfg.study.k_par if cfg.study else 0.56 * np.pi
    nb = cfg.study.bands if cfg.study else 6

    levels = [_solve_level(cfg, N, k_par, nb) for N in n_list]

    n_pairs = len(levels) - 1
    err_fem = np.empty((n_pairs, nb))
    err_rec = np.empty((n_pairs, nb))
    de = np.empty((n_pairs, nb))
    pairs = []
    for p in range(n_pairs):
        co, fi = levels[p], levels[p + 1]
        pairs.append((co.N, fi.N))
        err_fem[p] = np.abs(co.e_fem - fi.e_fem) / fi.e_fem
        err_rec[p] = np.abs(co.e_recovered - fi.e_recovered) / fi.e_recovered
        M_fine = mass_matrix_id(fi.mesh, fi.dof_map)
        for b in range(nb):
            de[p, b] = _pair_gradient_error(co, fi, b, M_fine)

    slopes = None
    if n_pairs >= 2:
        h = np.log(1.0 / np.array([nc for nc, _ in pairs], dtype=float))
        slopes = {}
        for name, err in (("fem", err_fem), ("recovered", err_rec), ("gradient", de)):
            s = np.empty(nb)
            for b in range(nb):
                s[b] = np.polyfit(h, np.log(err[:, b]), 1)[0]
            slopes[name] = s

    return ConvergenceReport(
        n_list=n_list,
        k_par=k_par,
        bands=nb,
        pairs=pairs,
        err_fem=err_fem,
        err_recovered=err_rec,
        de_gradient=de,
        slopes=slopes,
    )
