"""Uniform triangulation of the truncated cylinder.

The computational domain is Omega = {tau1 v1 + tau2 v2 : 0 <= tau1 <= 1,
-L <= tau2 <= L}, periodic across the tau1 = 0/1 seam and with homogeneous
Dirichlet conditions on tau2 = +-L.  Nodes sit on the regular grid
tau = (i/N, -L + j/N), i = 0..N, j = 0..2LN; every sub-rhombus is split
into two triangles.  With the "regular" pattern all rhombi use the same
diagonal (grid corner (i, j) to (i+1, j+1)); "alternating" flips the
diagonal on odd columns (chevron), which requires even N for seam
consistency.

Mesh size h = |v1| / N = 1/N.  Counts: (N+1)(2LN+1) geometric nodes,
4 L N^2 triangles, and N(2LN-1) degrees of freedom after identifying the
seam and eliminating the Dirichlet rows.

Node patches for gradient recovery are built here because they are purely
combinatorial-geometric.  Patches live in the periodic cover: a member is a
grid position (i + di, j + dj) whose value is read from the identified node
((i + di) mod N, j + dj).  Near the seam a single node can therefore appear
at two positions, which is intended; the fit sees the periodic extension.
Rows j outside [0, 2LN] are clipped, and boundary patches grow inward ring
by ring until they have at least 6 members and a full-rank quadratic fit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticeBasis, make_basis

INTERIOR, SEAM_MASTER, SEAM_SLAVE, DIRICHLET = 0, 1, 2, 3
NODE_CLASS_NAMES = {
    INTERIOR: "interior",
    SEAM_MASTER: "seam-master",
    SEAM_SLAVE: "seam-slave",
    DIRICHLET: "dirichlet",
}

PATTERNS = ("regular", "alternating")


@dataclass
class CylinderMesh:
    N: int
    L: int
    pattern: str
    basis: LatticeBasis
    nodes_tau: np.ndarray  # (n_geo, 2) lattice coordinates
    nodes_xy: np.ndarray  # (n_geo, 2) physical coordinates
    triangles: np.ndarray  # (n_tri, 3) geometric node ids, positive orientation
    node_class: np.ndarray  # (n_geo,) INTERIOR / SEAM_* / DIRICHLET
    areas: np.ndarray  # (n_tri,) physical triangle areas

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def n_geo(self) -> int:
        return len(self.nodes_tau)

    @property
    def n_rows(self) -> int:
        """Number of grid rows (j values)."""
        return 2 * self.L * self.N + 1

    def geo_index(self, i, j):
        """Geometric node id of grid position (i, j), i in 0..N."""
        return j * (self.N + 1) + i


@dataclass
class DofMap:
    """Seam identification and Dirichlet elimination bookkeeping.

    Identified nodes keep one column per i in 0..N-1 and all rows
    (id = j*N + i); they include the Dirichlet rows so recovered-gradient
    fields can carry boundary values.  Degrees of freedom additionally drop
    the rows j = 0 and j = 2LN.
    """

    N: int
    L: int
    geo_to_id: np.ndarray  # (n_geo,)
    id_to_dof: np.ndarray  # (n_id,) dof index or -1
    dof_to_id: np.ndarray  # (n_dof,)
    id_rep_geo: np.ndarray  # (n_id,) representative geometric node
    seam_pairs: np.ndarray  # (n_pairs, 2) [slave geo id, master geo id]

    @property
    def n_id(self) -> int:
        return len(self.id_to_dof)

    @property
    def n_dof(self) -> int:
        return len(self.dof_to_id)

    def zero_extend(self, v_dof: np.ndarray) -> np.ndarray:
        """Embed a dof vector into the identified-node vector, zeros on the boundary."""
        out = np.zeros(v_dof.shape[:-1] + (self.n_id,), dtype=v_dof.dtype)
        out[..., self.dof_to_id] = v_dof
        return out

    def restrict(self, v_id: np.ndarray) -> np.ndarray:
        return v_id[..., self.dof_to_id]

    def geo_values(self, v_id: np.ndarray) -> np.ndarray:
        """Expand identified-node values to all geometric nodes (seam repeated)."""
        return v_id[..., self.geo_to_id]


def build_mesh(
    N: int, L: int, pattern: str = "regular", basis: LatticeBasis | None = None
) -> CylinderMesh:
    """Triangulate the truncated cylinder with mesh size 1/N.

    N >= 2 subdivisions per period, integer half-length L >= 1.  The
    alternating pattern needs even N so the chevron stripes match across
    the periodic seam.
    """
    if not (isinstance(N, (int, np.integer)) and N >= 2):
        raise ValueError(f"N must be an integer >= 2, got {N}")
    if not (isinstance(L, (int, np.integer)) and L >= 1):
        raise ValueError(f"L must be an integer >= 1, got {L}")
    if pattern not in PATTERNS:
        raise ValueError(f"pattern must be one of {PATTERNS}, got {pattern!r}")
    if pattern == "alternating" and N % 2:
        raise ValueError("alternating pattern requires even N")
    basis = basis or make_basis()

    nrow = 2 * L * N + 1
    ii, jj = np.meshgrid(np.arange(N + 1), np.arange(nrow), indexing="xy")
    # row-major in j: geo id = j*(N+1) + i
    ii = ii.ravel()
    jj = jj.ravel()
    tau = np.column_stack([ii / N, -L + jj / N])
    xy = tau[:, 0:1] * basis.v1 + tau[:, 1:2] * basis.v2

    cls = np.full(len(tau), INTERIOR, dtype=np.int8)
    cls[ii == 0] = SEAM_MASTER
    cls[ii == N] = SEAM_SLAVE
    cls[(jj == 0) | (jj == nrow - 1)] = DIRICHLET

    a, b = np.meshgrid(np.arange(N), np.arange(nrow - 1), indexing="xy")
    a = a.ravel()
    b = b.ravel()
    g = lambda di, dj: (b + dj) * (N + 1) + (a + di)
    g00, g10, g01, g11 = g(0, 0), g(1, 0), g(0, 1), g(1, 1)

    if pattern == "regular":
        main = np.ones(len(a), dtype=bool)
    else:
        main = (a % 2) == 0
    # main diagonal g00-g11, otherwise g10-g01; vertex order gives positive
    # physical orientation (the tau->xy map flips handedness)
    tri_main = np.stack(
        [
            np.column_stack([g00, g11, g10]),
            np.column_stack([g00, g01, g11]),
        ],
        axis=1,
    )
    tri_anti = np.stack(
        [
            np.column_stack([g00, g01, g10]),
            np.column_stack([g10, g01, g11]),
        ],
        axis=1,
    )
    tris = np.where(main[:, None, None], tri_main, tri_anti).reshape(-1, 3)

    p = xy[tris]
    areas = 0.5 * (
        (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
        - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
    )
    if not np.all(areas > 0):
        raise AssertionError("triangulation produced non-positive orientation")

    return CylinderMesh(
        N=int(N),
        L=int(L),
        pattern=pattern,
        basis=basis,
        nodes_tau=tau,
        nodes_xy=xy,
        triangles=tris,
        node_class=cls,
        areas=areas,
    )


def build_dof_map(mesh: CylinderMesh) -> DofMap:
    """Identify the periodic seam and eliminate the Dirichlet rows."""
    N, nrow = mesh.N, mesh.n_rows
    i = np.tile(np.arange(N + 1), nrow)
    j = np.repeat(np.arange(nrow), N + 1)
    geo_to_id = j * N + (i % N)

    n_id = N * nrow
    jid = np.arange(n_id) // N
    id_to_dof = np.where(
        (jid == 0) | (jid == nrow - 1), -1, (jid - 1) * N + np.arange(n_id) % N
    )
    id_to_dof = id_to_dof.astype(np.int64)
    dof_to_id = np.flatnonzero(id_to_dof >= 0)
    id_to_dof[dof_to_id] = np.arange(len(dof_to_id))

    # representative geometric node of each identified node: the i < N copy
    id_rep_geo = (np.arange(n_id) // N) * (N + 1) + (np.arange(n_id) % N)

    slave = np.flatnonzero(i == N)
    master = j[slave] * (N + 1)
    seam_pairs = np.column_stack([slave, master])

    return DofMap(
        N=N,
        L=mesh.L,
        geo_to_id=geo_to_id,
        id_to_dof=id_to_dof,
        dof_to_id=dof_to_id,
        id_rep_geo=id_rep_geo,
        seam_pairs=seam_pairs,
    )


def _neighbor_offsets(i: int, j: int, pattern: str) -> list[tuple[int, int]]:
    """Grid offsets of the nodes sharing an edge with cover node (i, j)."""
    out = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    if pattern == "regular":
        out += [(1, 1), (-1, -1)]
    else:
        if i % 2 == 0:
            out += [(1, 1), (-1, 1)]
        else:
            out += [(-1, -1), (1, -1)]
    return out


@dataclass
class NodePatch:
    """Least-squares patch of one identified node.

    member_ids may repeat near the seam (one node seen at two cover
    positions); coords are physical offsets from the center scaled by 1/h,
    so the quadratic fit is well conditioned independent of N.
    """

    center_id: int
    member_ids: np.ndarray
    coords: np.ndarray  # (n_members, 2)
    h: float
    cond: float
    rings: int


@dataclass
class PatchGroup:
    """All patches sharing one offset template (same local geometry)."""

    center_ids: np.ndarray  # (n_c,)
    member_ids: np.ndarray  # (n_c, n_m)
    coords: np.ndarray  # (n_m, 2) scaled offsets, shared
    cond: float
    rings: int


class PatchSet:
    """Indexable collection of NodePatch, stored per-template for speed.

    The uniform grid makes patch geometry translation invariant, so one
    offset template serves every node at the same boundary distance (and
    column parity for the alternating pattern).  Group storage lets the
    recovery operator be assembled with vectorized scatter instead of a
    per-node least-squares solve.
    """

    def __init__(self, mesh: CylinderMesh, groups: list[PatchGroup]):
        self.h = mesh.h
        self.n_nodes = sum(len(g.center_ids) for g in groups)
        self.groups = groups
        self._lookup = np.empty((self.n_nodes, 2), dtype=np.int64)
        for gi, g in enumerate(groups):
            self._lookup[g.center_ids, 0] = gi
            self._lookup[g.center_ids, 1] = np.arange(len(g.center_ids))

    def __len__(self) -> int:
        return self.n_nodes

    def __getitem__(self, nid: int) -> NodePatch:
        gi, row = self._lookup[int(nid)]
        g = self.groups[gi]
        return NodePatch(
            center_id=int(nid),
            member_ids=g.member_ids[row],
            coords=g.coords,
            h=self.h,
            cond=g.cond,
            rings=g.rings,
        )

    def __iter__(self):
        for nid in range(self.n_nodes):
            yield self[nid]


def _vandermonde(coords: np.ndarray) -> np.ndarray:
    x, y = coords[:, 0], coords[:, 1]
    return np.column_stack([np.ones_like(x), x, y, x * x, x * y, y * y])


def _patch_offsets(j0: int, parity: int, nrow: int, pattern: str):
    """Grow a patch template ring by ring at column parity / row j0.

    Returns (offsets, cond, rings); offsets are (di, dj) pairs including
    (0, 0).  Raises if four rings still leave the quadratic fit deficient.
    """
    basis = make_basis()
    visited = {(parity, j0)}
    frontier = [(parity, j0)]
    members = [(parity, j0)]
    for ring in range(1, 5):
        nxt = []
        for (ci, cj) in frontier:
            for di, dj in _neighbor_offsets(ci, cj, pattern):
                pos = (ci + di, cj + dj)
                if pos in visited or not (0 <= pos[1] < nrow):
                    continue
                visited.add(pos)
                nxt.append(pos)
        members.extend(sorted(nxt))
        frontier = nxt
        if len(members) < 6:
            continue
        rel = np.array(members, dtype=float) - (parity, j0)
        coords = rel[:, 0:1] * basis.v1 + rel[:, 1:2] * basis.v2
        sv = np.linalg.svd(_vandermonde(coords), compute_uv=False)
        if sv[-1] > 1e-8 * sv[0]:
            offsets = np.array(members, dtype=np.int64) - (parity, j0)
            return offsets, float(sv[0] / sv[-1]), ring
    raise RuntimeError(
        f"rank-deficient recovery patch template at row {j0} ({pattern} pattern)"
    )


def build_patches(mesh: CylinderMesh, dof_map: DofMap) -> PatchSet:
    """Build recovery patches for every identified node (boundary included).

    Interior nodes use the first ring (6 neighbors plus the center).
    Patches touching the Dirichlet rows are clipped in j and grown inward
    ring by ring until the scaled Vandermonde has full column rank and at
    least 6 members; the Dirichlet rows themselves end up with one-sided
    patches.  Seam columns wrap through the periodic cover, so a member
    node may appear at two positions there.
    """
    N, nrow = mesh.N, mesh.n_rows
    v1, v2 = mesh.basis.v1, mesh.basis.v2
    parities = (0, 1) if mesh.pattern == "alternating" else (0,)

    jdist = np.minimum(np.arange(nrow), nrow - 1 - np.arange(nrow))
    # rows at the template cap share geometry; 4 rings reach at most |dj| = 4
    cap = 4
    jkey = np.where(jdist >= cap, -1, np.arange(nrow))

    groups = []
    for parity in parities:
        cols = np.arange(parity, N, len(parities))
        for key in np.unique(jkey):
            rows = np.flatnonzero(jkey == key)
            j_rep = int(rows[0]) if key >= 0 else int(np.flatnonzero(jdist >= cap)[0])
            offsets, cond, rings = _patch_offsets(j_rep, parity, nrow, mesh.pattern)
            di, dj = offsets[:, 0], offsets[:, 1]
            coords = di[:, None] * v1 + dj[:, None] * v2
            jj = rows[:, None, None]  # (n_rows, 1, 1)
            ii = cols[None, :, None]  # (1, n_cols, 1)
            member = ((ii + di) % N) + (jj + dj) * N  # (n_rows, n_cols, n_m)
            center = (ii + jj * N)[..., 0]
            groups.append(
                PatchGroup(
                    center_ids=center.ravel(),
                    member_ids=member.reshape(-1, len(offsets)),
                    coords=coords,
                    cond=cond,
                    rings=rings,
                )
            )
    return PatchSet(mesh, groups)


def interpolate_nodal(
    mesh: CylinderMesh, dof_map: DofMap, values_id: np.ndarray, tau: np.ndarray
) -> np.ndarray:
    """Evaluate a P1 nodal field (on identified nodes) at lattice points.

    tau has shape (n, 2); tau1 is wrapped into [0, 1), tau2 must lie in
    [-L, L].  Used to compare fields across nested meshes.
    """
    N, L, nrow = mesh.N, mesh.L, mesh.n_rows
    t1 = np.mod(np.asarray(tau)[:, 0], 1.0)
    t2 = np.asarray(tau)[:, 1]
    if np.any(t2 < -L - 1e-12) or np.any(t2 > L + 1e-12):
        raise ValueError("tau2 outside [-L, L]")
    gi = t1 * N
    gj = (t2 + L) * N
    a = np.minimum(gi.astype(int), N - 1)
    b = np.minimum(gj.astype(int), nrow - 2)
    fi = gi - a
    fj = gj - b

    if mesh.pattern == "regular":
        main = np.ones(len(a), dtype=bool)
    else:
        main = (a % 2) == 0

    def nid(di, dj):
        return ((a + di) % N) + (b + dj) * N

    w = np.zeros((len(a), 4))
    # corner order: g00, g10, g01, g11
    lower = fi >= fj
    m = main & lower
    w[m, 0] = 1 - fi[m]
    w[m, 1] = fi[m] - fj[m]
    w[m, 3] = fj[m]
    m = main & ~lower
    w[m, 0] = 1 - fj[m]
    w[m, 2] = fj[m] - fi[m]
    w[m, 3] = fi[m]
    anti_lower = (fi + fj) <= 1
    m = ~main & anti_lower
    w[m, 0] = 1 - fi[m] - fj[m]
    w[m, 1] = fi[m]
    w[m, 2] = fj[m]
    m = ~main & ~anti_lower
    w[m, 1] = 1 - fj[m]
    w[m, 2] = 1 - fi[m]
    w[m, 3] = fi[m] + fj[m] - 1

    vals = values_id[nid(0, 0)] * w[:, 0]
    vals = vals + values_id[nid(1, 0)] * w[:, 1]
    vals = vals + values_id[nid(0, 1)] * w[:, 2]
    vals = vals + values_id[nid(1, 1)] * w[:, 3]
    return vals


def dump_mesh_csv(mesh: CylinderMesh, nodes_path, triangles_path) -> None:
    """Write the mesh as two CSV files (nodes and triangles)."""
    with open(nodes_path, "w") as f:
        f.write("node_id,tau1,tau2,x,y,class\n")
        for gid in range(mesh.n_geo):
            t1, t2 = mesh.nodes_tau[gid]
            x, y = mesh.nodes_xy[gid]
            f.write(
                f"{gid},{t1:.12e},{t2:.12e},{x:.12e},{y:.12e},"
                f"{NODE_CLASS_NAMES[int(mesh.node_class[gid])]}\n"
            )
    with open(triangles_path, "w") as f:
        f.write("tri_id,n0,n1,n2\n")
        for tid, (n0, n1, n2) in enumerate(mesh.triangles):
            f.write(f"{tid},{n0},{n1},{n2}\n")
