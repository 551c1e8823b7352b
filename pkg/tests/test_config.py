"""Configuration schema: defaults, validation errors, shipped files."""

import json

import numpy as np
import pytest

from edgemodes import config_path
from edgemodes.config import ConfigError, load_config, material_spec, parse_config

MINIMAL = {
    "material": {
        "a0": 23.0,
        "C": [-0.5, 0.0, 0.0, -0.5],
        "perturbation": {"kind": "p_breaking"},
        "delta": 6.0,
    },
    "mesh": {"N": 8, "L": 2},
}


def variant(**sections):
    raw = json.loads(json.dumps(MINIMAL))
    for name, content in sections.items():
        if content is None:
            raw.pop(name, None)
        elif isinstance(content, dict) and name in raw:
            raw[name].update(content)
        else:
            raw[name] = content
    return raw


def test_defaults_fill_in():
    cfg = parse_config(MINIMAL)
    assert cfg.sweep.K == 33
    assert cfg.sweep.m == 25
    assert len(cfg.sweep.probe_k) == 2
    assert abs(cfg.sweep.probe_k[0] - 2.0 * np.pi / 3.0) < 1e-15
    assert cfg.solver.tol == 1e-9
    assert cfg.solver.seed == 7
    assert cfg.solver.quad_order == 4
    assert cfg.classify.theta_c == 0.8
    assert cfg.classify.theta_b == 0.8
    assert cfg.classify.theta_gap == 0.5
    assert abs(cfg.classify.window - np.pi / 8.0) < 1e-15
    assert cfg.mesh.diagonal == "regular"
    assert cfg.material.eta_infinity == 1.0
    assert cfg.material.wall_profile == "tanh"
    assert cfg.output.directory == "out"
    assert cfg.output.figures is True
    assert cfg.study is None


def test_material_spec_round_trip():
    cfg = parse_config(MINIMAL)
    spec = material_spec(cfg.material)
    assert spec.delta == 6.0
    assert spec.perturbation.kind == "p_breaking"


@pytest.mark.parametrize(
    "raw,fragment",
    [
        (variant(material=None), "missing required section material"),
        (variant(mesh=None), "missing required section mesh"),
        (variant(material={"C": [1.0, 0.0, 0.0]}), "material.C"),
        (variant(material={"delta": -1.0}), "delta must be nonnegative"),
        (
            variant(material={"perturbation": {"kind": "nope"}}),
            "perturbation.kind",
        ),
        (
            variant(material={"perturbation": {"kind": "p_breaking", "k3": "x"}}),
            "perturbation.k3",
        ),
        (variant(material={"wall_profile": "step"}), "wall_profile"),
        (variant(mesh={"N": 1}), "mesh.N"),
        (variant(mesh={"L": 0}), "mesh.L"),
        (variant(mesh={"diagonal": "zigzag"}), "mesh.diagonal"),
        (variant(sweep={"K": 1}), "sweep.K"),
        (variant(sweep={"m": 0}), "sweep.m"),
        (variant(sweep={"probe_k": [7.0]}), "probe_k"),
        (variant(sweep={"probe_k": "mid"}), "probe_k"),
        (variant(solver={"quad_order": 5}), "quad_order"),
        (variant(solver={"tol": 0.0}), "tol"),
        (variant(classify={"theta_c": 1.5}), "theta_c"),
        (variant(classify={"window": 0.0}), "window"),
        (variant(study={"n_list": [8]}), "n_list"),
        (variant(study={"n_list": [8, 20]}), "n_list"),
        (variant(study={"n_list": [8, 16], "bands": 0}), "bands"),
        (variant(extra={}), "unknown key extra"),
        (variant(mesh={"NN": 3}), "unknown key mesh.NN"),
        ("not an object", "root"),
    ],
)
def test_rejected_configurations(raw, fragment):
    with pytest.raises(ConfigError) as exc:
        parse_config(raw)
    assert fragment in str(exc.value)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(tmp_path / "absent.json")
    assert "not found" in str(exc.value)


def test_load_config_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{")
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert "invalid JSON" in str(exc.value)


SHIPPED = [
    "testcase1_full",
    "testcase1_desk",
    "testcase2_full",
    "testcase2_desk",
    "cbreaking_full",
    "cbreaking_desk",
    "anisotropic_full",
    "anisotropic_desk",
    "convergence_full",
    "convergence_desk",
]


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_configs_parse_and_validate(name):
    cfg = load_config(config_path(name))
    material_spec(cfg.material)  # symmetry and definiteness gates
    if name.startswith("convergence"):
        assert cfg.study is not None


def test_config_path_unknown_name():
    with pytest.raises(FileNotFoundError) as exc:
        config_path("no_such_setup")
    assert "testcase1_desk" in str(exc.value)  # lists what exists
