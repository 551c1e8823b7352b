"""Refinement study harness: pair errors, slopes, input validation."""

import numpy as np
import pytest

from edgemodes.config import parse_config
from edgemodes.convergence import run_study


def study_cfg(n_list=(8, 16), bands=3, L=2):
    raw = {
        "material": {
            "a0": 23.0,
            "C": [-0.5, 0.0, 0.0, -0.5],
            "perturbation": {"kind": "p_breaking"},
            "delta": 2.0,
        },
        "mesh": {"N": n_list[0], "L": L},
        "study": {
            "n_list": list(n_list),
            "k_par": 0.56 * np.pi,
            "bands": bands,
        },
    }
    return parse_config(raw)


def test_two_mesh_run_reports_single_pair_without_slopes():
    cfg = study_cfg((8, 16))
    rep = run_study(cfg)
    assert rep.pairs == [(8, 16)]
    assert rep.err_fem.shape == (1, 3)
    assert rep.slopes is None
    assert np.all(rep.err_fem > 0)
    assert np.all(np.isfinite(rep.de_gradient))
    # corrected eigenvalues are closer between meshes than the raw ones
    assert np.all(rep.err_recovered < rep.err_fem)


def test_three_mesh_run_fits_slopes():
    # two bands only: band 3 of this deliberately coarse setup sits in a
    # pre-asymptotic crossing and its Cauchy differences nearly cancel
    cfg = study_cfg((8, 16, 32), bands=2)
    rep = run_study(cfg)
    assert rep.pairs == [(8, 16), (16, 32)]
    assert set(rep.slopes) == {"fem", "recovered", "gradient"}
    # coarse meshes, so accept generous windows around the theory rates
    assert np.all(rep.slopes["fem"] > 1.5)
    assert np.all(rep.slopes["recovered"] > 2.5)
    assert np.all(rep.slopes["gradient"] > 1.2)


def test_n_list_override_wins():
    cfg = study_cfg((8, 16, 32))
    rep = run_study(cfg, n_list=[8, 16])
    assert rep.pairs == [(8, 16)]


def test_non_doubling_sequence_rejected():
    cfg = study_cfg()
    with pytest.raises(ValueError):
        run_study(cfg, n_list=[8, 24])


def test_short_sequence_rejected():
    cfg = study_cfg()
    with pytest.raises(ValueError):
        run_study(cfg, n_list=[8])


def test_missing_study_section_rejected():
    raw = {
        "material": {
            "a0": 23.0,
            "C": [-0.5, 0.0, 0.0, -0.5],
            "perturbation": {"kind": "p_breaking"},
            "delta": 2.0,
        },
        "mesh": {"N": 8, "L": 2},
    }
    cfg = parse_config(raw)
    with pytest.raises(ValueError):
        run_study(cfg)


def test_row_generators():
    cfg = study_cfg((8, 16, 32), bands=2)
    rep = run_study(cfg)
    rows = list(rep.rows())
    assert len(rows) == 2 * 2  # pairs x bands
    assert rows[0][:4] == (0, 8, 16, 1)
    srows = list(rep.slope_rows())
    assert len(srows) == 3 * 2  # quantities x bands
    assert {r[1] for r in srows} == {"fem", "recovered", "gradient"}
