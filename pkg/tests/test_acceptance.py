"""Acceptance suite: one test per stated criterion, at stated tolerances.

Each test records a `[PASS]`/`[FAIL] criterion N` line that pytest prints
in its terminal summary; the expensive sweeps and the refinement study are
shared module-scoped fixtures.  Expect roughly twenty minutes on four
cores for the whole module.
"""

import json
import os

import numpy as np
import pytest
import scipy.linalg as sla

from edgemodes import config_path
from edgemodes.assembly import assemble, bloch_stiffness
from edgemodes.config import load_config, parse_config
from edgemodes.convergence import run_study
from edgemodes.eigensolver import solve_gevp
from edgemodes.mesh import build_dof_map, build_mesh, build_patches
from edgemodes.recovery import fit_local_quadratic
from edgemodes.spectrum import sweep

THREADS = min(4, os.cpu_count() or 1)


def _raw(name):
    return json.loads(config_path(name).read_text())


def identity_weight(x):
    n = len(np.atleast_2d(x))
    w = np.zeros((n, 2, 2))
    w[:, 0, 0] = 1.0
    w[:, 1, 1] = 1.0
    return w


# shared expensive fixtures ---------------------------------------------------


@pytest.fixture(scope="module")
def study_report():
    # delta=2 wall on the honeycomb bulk, L=4, k = 0.56 pi, bands 1-6,
    # meshes 16/32/64/128
    cfg = load_config(config_path("convergence_desk"))
    return run_study(cfg)


@pytest.fixture
def tc1_sweep():
    cfg = load_config(config_path("testcase1_desk"))
    bs = sweep(cfg, threads=THREADS)
    if bs.edge_bands != [20]:
        # stated escalation path: retry at N=64 before declaring failure
        raw = _raw("testcase1_desk")
        raw["mesh"]["N"] = 64
        bs = sweep(parse_config(raw), threads=THREADS)
    return bs


@pytest.fixture
def l15_sweep():
    raw = _raw("testcase1_desk")
    raw["mesh"]["L"] = 15
    raw["sweep"]["m"] = 35
    return sweep(parse_config(raw), threads=THREADS)


@pytest.fixture
def cbreaking_sweep():
    return sweep(load_config(config_path("cbreaking_desk")), threads=THREADS)


@pytest.fixture
def anisotropic_sweep():
    return sweep(load_config(config_path("anisotropic_desk")), threads=THREADS)


@pytest.fixture
def nowall_sweep():
    raw = _raw("testcase1_desk")
    raw["material"]["delta"] = 0.0
    return sweep(parse_config(raw), threads=THREADS)


def probe_at(bs, k):
    for p in bs.probes:
        if abs(p.k_par - k) < 1e-12:
            return p
    raise AssertionError(f"no probe at k={k}")


K_PROBE = 2.0 * np.pi / 3.0


# criteria 1-3: convergence orders -------------------------------------------


def test_criterion_01_fem_eigenvalue_order(study_report, acceptance_record):
    slopes = study_report.slopes["fem"]
    ok = bool(np.all((slopes >= 1.8) & (slopes <= 2.2)))
    acceptance_record(
        1,
        ok,
        "raw eigenvalue slopes in [1.8, 2.2]: "
        + ", ".join(f"{s:.3f}" for s in slopes),
    )
    assert ok


def test_criterion_02_recovered_eigenvalue_order(study_report, acceptance_record):
    slopes = study_report.slopes["recovered"]
    in_window = bool(np.all((slopes >= 3.5) & (slopes <= 4.5)))
    above_proven = bool(np.all(slopes >= 3.0))
    detail = (
        "recovered eigenvalue slopes in [3.5, 4.5]: "
        + ", ".join(f"{s:.3f}" for s in slopes)
        + f"; all above the proven cubic rate: {above_proven}"
    )
    acceptance_record(2, in_window, detail)
    assert in_window


def test_criterion_03_recovered_gradient_order(study_report, acceptance_record):
    slopes = study_report.slopes["gradient"]
    ok = bool(np.all((slopes >= 1.7) & (slopes <= 2.3)))
    acceptance_record(
        3,
        ok,
        "recovered gradient slopes in [1.7, 2.3]: "
        + ", ".join(f"{s:.3f}" for s in slopes),
    )
    assert ok


# criteria 4-7: classification ------------------------------------------------


def test_criterion_04_edge_band_20(tc1_sweep, acceptance_record):
    bs = tc1_sweep
    cf = probe_at(bs, K_PROBE).center_fraction
    target = cf[19] if bs.n_bands >= 20 else 0.0
    ok = bs.edge_bands == [20] and target > 0.9
    acceptance_record(
        4,
        ok,
        f"edge bands {bs.edge_bands} (want [20]), "
        f"center fraction {target:.4f} (want > 0.9)",
    )
    assert ok


def test_criterion_05_edge_band_30_on_wide_strip(l15_sweep, acceptance_record):
    bs = l15_sweep
    ok = bs.edge_bands == [30]
    acceptance_record(5, ok, f"L=15, m=35 edge bands {bs.edge_bands} (want [30])")
    assert ok


def test_criterion_06_pseudo_edge_pair(cbreaking_sweep, acceptance_record):
    bs = cbreaking_sweep
    probe = probe_at(bs, K_PROBE)
    c19, c20, c21 = bs.classes[18], bs.classes[19], bs.classes[20]
    bf = probe.boundary_fraction
    cf = probe.center_fraction
    ok = (
        c19 == "pseudo-edge"
        and c20 == "pseudo-edge"
        and c21 == "edge"
        and bf[18] > 0.8
        and bf[19] > 0.8
        and cf[20] > 0.8
    )
    acceptance_record(
        6,
        ok,
        f"bands 19/20/21 = {c19}/{c20}/{c21}, "
        f"bf19={bf[18]:.3f}, bf20={bf[19]:.3f}, cf21={cf[20]:.3f}",
    )
    assert ok


def test_criterion_07_anisotropic_classification(anisotropic_sweep, acceptance_record):
    bs = anisotropic_sweep
    c19, c20, c21 = bs.classes[18], bs.classes[19], bs.classes[20]
    ok = c19 == "pseudo-edge" and c20 == "pseudo-edge" and c21 == "edge"
    acceptance_record(
        7, ok, f"anisotropic bands 19/20/21 = {c19}/{c20}/{c21}"
    )
    assert ok


# criterion 8: recovery exactness ---------------------------------------------


def test_criterion_08_ppr_quadratic_exactness(acceptance_record):
    monomials = [
        (lambda x, y: np.ones_like(x), lambda x, y: (0.0, 0.0)),
        (lambda x, y: x, lambda x, y: (1.0, 0.0)),
        (lambda x, y: y, lambda x, y: (0.0, 1.0)),
        (lambda x, y: x * x, lambda x, y: (2.0 * x, 0.0)),
        (lambda x, y: x * y, lambda x, y: (y, x)),
        (lambda x, y: y * y, lambda x, y: (0.0, 2.0 * y)),
    ]

    worst = 0.0
    for N in (8, 16):
        mesh = build_mesh(N, 1)
        dof = build_dof_map(mesh)
        patches = build_patches(mesh, dof)
        centers = mesh.nodes_xy[dof.id_rep_geo]
        for idx in range(dof.n_id):
            patch = patches[idx]
            ctr = centers[idx]
            cover = ctr + patch.h * patch.coords
            for f, df in monomials:
                vals = f(cover[:, 0], cover[:, 1])
                got = fit_local_quadratic(patch, vals)
                ex, ey = df(ctr[0], ctr[1])
                worst = max(worst, abs(got[0] - ex), abs(got[1] - ey))
    ok = worst <= 1e-11
    acceptance_record(
        8,
        ok,
        f"six quadratic monomials, N in {{8, 16}}, all nodes: "
        f"max gradient error {worst:.2e} (want <= 1e-11)",
    )
    assert ok


# criterion 9: pencil integrity -----------------------------------------------


def test_criterion_09_pencil_integrity(acceptance_record):
    mesh = build_mesh(8, 1)
    dof = build_dof_map(mesh)

    # Hermiticity under the full complex-valued wall material
    from edgemodes.material import BulkSpec, DomainWallSpec, PerturbationSpec

    spec = DomainWallSpec(
        bulk=BulkSpec(a0=23.0, C=np.array([[-0.5, 0.0], [0.0, -0.5]])),
        perturbation=PerturbationSpec(kind="p_breaking"),
        delta=6.0,
    ).validate()
    ms = assemble(mesh, dof, spec)
    rng = np.random.default_rng(20260816)
    herm = 0.0
    for k in rng.uniform(0.0, 2.0 * np.pi, 20):
        S = bloch_stiffness(ms, float(k))
        herm = max(herm, float(abs(S - S.conj().T).max() / abs(S).max()))
    hermitian_ok = herm <= 1e-14

    # M symmetric positive definite
    dense_M = ms.M.toarray().real
    sym_ok = bool(np.abs(dense_M - dense_M.T).max() < 1e-15)
    try:
        sla.cho_factor(dense_M)
        spd_ok = sym_ok
    except sla.LinAlgError:
        spd_ok = False

    # dense oracle and M-orthonormality on the identity-weight pencil
    ms_id = assemble(mesh, dof, identity_weight)
    S0 = bloch_stiffness(ms_id, 0.0)
    res = solve_gevp(S0, ms_id.M, 5, seed=7)
    oracle = sla.eigh(S0.toarray(), ms_id.M.toarray(), eigvals_only=True)[:5]
    oracle_gap = float(np.abs(res.values - oracle).max() / np.abs(oracle).max())
    oracle_ok = oracle_gap <= 1e-10
    gram = res.vectors.conj().T @ (ms_id.M @ res.vectors)
    ortho_gap = float(np.abs(gram - np.eye(5)).max())
    ortho_ok = ortho_gap <= 1e-10

    ok = hermitian_ok and spd_ok and oracle_ok and ortho_ok
    acceptance_record(
        9,
        ok,
        f"S Hermitian at 20 random k (defect {herm:.1e}), M SPD: {spd_ok}, "
        f"dense-oracle gap {oracle_gap:.1e}, orthonormality defect {ortho_gap:.1e}",
    )
    assert ok


# criterion 10: negative control ----------------------------------------------


def test_criterion_10_no_edge_without_wall(nowall_sweep, acceptance_record):
    bs = nowall_sweep
    ok = bs.edge_bands == []
    acceptance_record(
        10, ok, f"delta=0 sweep edge bands {bs.edge_bands} (want none)"
    )
    assert ok
