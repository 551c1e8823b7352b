"""Run configuration: JSON schema, strict validation, defaults.

A configuration file is a JSON object with the sections below; unknown keys
anywhere are rejected with the offending path so typos cannot silently fall
back to defaults.

material (required)
    a0: float > 0
    C: four reals, row-major 2x2 Fourier coefficient matrix
    perturbation: {"kind": "p_breaking" | "c_breaking",
                   "k3": "minus-k1-k2" (default) | "k2-minus-k1"}
    delta: float >= 0 (0 disables the wall, useful as a negative control)
    eta_infinity: float > 0, default 1.0
    wall_profile: "tanh" (default)
mesh (required)
    N: int >= 2 subdivisions per period
    L: int >= 1 cylinder half-length
    diagonal: "regular" (default) | "alternating"
sweep
    K: number of quasimomentum samples on [0, 2 pi], default 33
    m: number of bands, default 25
    probe_k: quasimomenta where mode fields and classification are
        evaluated, default [2 pi / 3, 4 pi / 3]
solver
    tol: residual tolerance, default 1e-9
    max_iter: ARPACK restart cap, default 500
    seed: starting-vector seed, default 7
    quad_order: assembly quadrature degree in {1, 2, 3, 4, 6}, default 4
classify
    theta_c: center-localization threshold, default 0.8
    theta_b: boundary-localization threshold, default 0.8
    theta_gap: isolation threshold relative to the mean band spacing,
        default 0.5
    window: half-width of the quasimomentum window around each probe,
        default pi / 8
study (optional; used by the convergence command)
    n_list: mesh subdivisions, each entry double the previous
    k_par: quasimomentum of the study, default 0.56 pi
    bands: number of tracked eigenvalues, default 6
output
    directory: output directory, default "out"
    figures: render figures next to the CSV files, default true
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .material import (
    BulkSpec,
    DomainWallSpec,
    K3_CONVENTIONS,
    PerturbationSpec,
    WALL_PROFILES,
)

TWO_PI = 2.0 * math.pi


class ConfigError(ValueError):
    """Configuration rejected; message carries the JSON path."""


@dataclass
class MaterialConfig:
    a0: float
    C: np.ndarray
    kind: str
    k3: str = "minus-k1-k2"
    delta: float = 0.0
    eta_infinity: float = 1.0
    wall_profile: str = "tanh"


@dataclass
class MeshConfig:
    N: int
    L: int
    diagonal: str = "regular"


@dataclass
class SweepConfig:
    K: int = 33
    m: int = 25
    probe_k: tuple[float, ...] = (TWO_PI / 3.0, 2.0 * TWO_PI / 3.0)


@dataclass
class SolverConfig:
    tol: float = 1e-9
    max_iter: int = 500
    seed: int = 7
    quad_order: int = 4


@dataclass
class ClassifyConfig:
    theta_c: float = 0.8
    theta_b: float = 0.8
    theta_gap: float = 0.5
    window: float = math.pi / 8.0


@dataclass
class StudyConfig:
    n_list: tuple[int, ...]
    k_par: float = 0.56 * math.pi
    bands: int = 6


@dataclass
class OutputConfig:
    directory: str = "out"
    figures: bool = True


@dataclass
class RunConfig:
    material: MaterialConfig
    mesh: MeshConfig
    sweep: SweepConfig = field(default_factory=SweepConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    classify: ClassifyConfig = field(default_factory=ClassifyConfig)
    study: StudyConfig | None = None
    output: OutputConfig = field(default_factory=OutputConfig)


def _check_keys(obj: dict, allowed: set[str], path: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown key {path}.{key}" if path else f"unknown key {key}")


def _get(obj: dict, key: str, path: str, types, default=...):
    if key not in obj:
        if default is ...:
            raise ConfigError(f"missing required key {path}.{key}")
        return default
    val = obj[key]
    if types is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, types) or isinstance(val, bool) and types is not bool:
        raise ConfigError(
            f"{path}.{key} has wrong type {type(val).__name__}"
        )
    return val


def _parse_material(obj, path="material") -> MaterialConfig:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be an object")
    _check_keys(
        obj, {"a0", "C", "perturbation", "delta", "eta_infinity", "wall_profile"}, path
    )
    a0 = _get(obj, "a0", path, float)
    C_raw = _get(obj, "C", path, list)
    if len(C_raw) != 4 or not all(isinstance(c, (int, float)) for c in C_raw):
        raise ConfigError(f"{path}.C must be a list of four numbers (row-major 2x2)")
    pert = obj.get("perturbation", {})
    if not isinstance(pert, dict):
        raise ConfigError(f"{path}.perturbation must be an object")
    _check_keys(pert, {"kind", "k3"}, f"{path}.perturbation")
    kind = _get(pert, "kind", f"{path}.perturbation", str, "p_breaking")
    if kind not in ("p_breaking", "c_breaking"):
        raise ConfigError(
            f"{path}.perturbation.kind must be 'p_breaking' or 'c_breaking'"
        )
    k3 = _get(pert, "k3", f"{path}.perturbation", str, "minus-k1-k2")
    if k3 not in K3_CONVENTIONS:
        raise ConfigError(f"{path}.perturbation.k3 must be one of {K3_CONVENTIONS}")
    delta = _get(obj, "delta", path, float, 0.0)
    if delta < 0:
        raise ConfigError(f"{path}.delta must be nonnegative")
    eta = _get(obj, "eta_infinity", path, float, 1.0)
    prof = _get(obj, "wall_profile", path, str, "tanh")
    if prof not in WALL_PROFILES:
        raise ConfigError(f"{path}.wall_profile must be one of {sorted(WALL_PROFILES)}")
    return MaterialConfig(
        a0=a0,
        C=np.array(C_raw, dtype=float).reshape(2, 2),
        kind=kind,
        k3=k3,
        delta=delta,
        eta_infinity=eta,
        wall_profile=prof,
    )


def _parse_mesh(obj, path="mesh") -> MeshConfig:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path} must be an object")
    _check_keys(obj, {"N", "L", "diagonal"}, path)
    N = _get(obj, "N", path, int)
    L = _get(obj, "L", path, int)
    diagonal = _get(obj, "diagonal", path, str, "regular")
    if N < 2:
        raise ConfigError(f"{path}.N must be >= 2")
    if L < 1:
        raise ConfigError(f"{path}.L must be >= 1")
    if diagonal not in ("regular", "alternating"):
        raise ConfigError(f"{path}.diagonal must be 'regular' or 'alternating'")
    return MeshConfig(N=N, L=L, diagonal=diagonal)


def _parse_sweep(obj, path="sweep") -> SweepConfig:
    _check_keys(obj, {"K", "m", "probe_k"}, path)
    K = _get(obj, "K", path, int, 33)
    m = _get(obj, "m", path, int, 25)
    probe = obj.get("probe_k", [TWO_PI / 3.0, 2.0 * TWO_PI / 3.0])
    if not isinstance(probe, list) or not all(
        isinstance(p, (int, float)) for p in probe
    ):
        raise ConfigError(f"{path}.probe_k must be a list of numbers")
    if K < 2:
        raise ConfigError(f"{path}.K must be >= 2")
    if m < 1:
        raise ConfigError(f"{path}.m must be >= 1")
    for pk in probe:
        if not 0.0 <= pk <= TWO_PI + 1e-12:
            raise ConfigError(f"{path}.probe_k entries must lie in [0, 2 pi]")
    return SweepConfig(K=K, m=m, probe_k=tuple(float(p) for p in probe))


def _parse_solver(obj, path="solver") -> SolverConfig:
    _check_keys(obj, {"tol", "max_iter", "seed", "quad_order"}, path)
    cfg = SolverConfig(
        tol=_get(obj, "tol", path, float, 1e-9),
        max_iter=_get(obj, "max_iter", path, int, 500),
        seed=_get(obj, "seed", path, int, 7),
        quad_order=_get(obj, "quad_order", path, int, 4),
    )
    if cfg.quad_order not in (1, 2, 3, 4, 6):
        raise ConfigError(f"{path}.quad_order must be one of 1, 2, 3, 4, 6")
    if cfg.tol <= 0:
        raise ConfigError(f"{path}.tol must be positive")
    return cfg


def _parse_classify(obj, path="classify") -> ClassifyConfig:
    _check_keys(obj, {"theta_c", "theta_b", "theta_gap", "window"}, path)
    cfg = ClassifyConfig(
        theta_c=_get(obj, "theta_c", path, float, 0.8),
        theta_b=_get(obj, "theta_b", path, float, 0.8),
        theta_gap=_get(obj, "theta_gap", path, float, 0.5),
        window=_get(obj, "window", path, float, math.pi / 8.0),
    )
    for name in ("theta_c", "theta_b"):
        v = getattr(cfg, name)
        if not 0.0 < v < 1.0:
            raise ConfigError(f"{path}.{name} must lie in (0, 1)")
    if cfg.theta_gap <= 0 or cfg.window <= 0:
        raise ConfigError(f"{path}.theta_gap and {path}.window must be positive")
    return cfg


def _parse_study(obj, path="study") -> StudyConfig:
    _check_keys(obj, {"n_list", "k_par", "bands"}, path)
    raw = _get(obj, "n_list", path, list)
    if len(raw) < 2 or not all(isinstance(n, int) for n in raw):
        raise ConfigError(f"{path}.n_list must list at least two integers")
    n_list = tuple(raw)
    for a, b in zip(n_list, n_list[1:]):
        if b != 2 * a:
            raise ConfigError(
                f"{path}.n_list entries must double: {b} does not follow {a}"
            )
    bands = _get(obj, "bands", path, int, 6)
    k_par = _get(obj, "k_par", path, float, 0.56 * math.pi)
    if bands < 1:
        raise ConfigError(f"{path}.bands must be >= 1")
    return StudyConfig(n_list=n_list, k_par=k_par, bands=bands)


def _parse_output(obj, path="output") -> OutputConfig:
    _check_keys(obj, {"directory", "figures"}, path)
    return OutputConfig(
        directory=_get(obj, "directory", path, str, "out"),
        figures=_get(obj, "figures", path, bool, True),
    )


def parse_config(data: dict) -> RunConfig:
    """Validate a configuration dictionary and fill defaults."""
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be a JSON object")
    _check_keys(
        data, {"material", "mesh", "sweep", "solver", "classify", "study", "output"}, ""
    )
    for req in ("material", "mesh"):
        if req not in data:
            raise ConfigError(f"missing required section {req}")
    return RunConfig(
        material=_parse_material(data["material"]),
        mesh=_parse_mesh(data["mesh"]),
        sweep=_parse_sweep(data.get("sweep", {})),
        solver=_parse_solver(data.get("solver", {})),
        classify=_parse_classify(data.get("classify", {})),
        study=_parse_study(data["study"]) if "study" in data else None,
        output=_parse_output(data.get("output", {})),
    )


def load_config(path) -> RunConfig:
    """Read and validate a JSON configuration file."""
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"configuration file not found: {p}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {p}: {exc}")
    return parse_config(data)


def material_spec(cfg: MaterialConfig) -> DomainWallSpec:
    """Build and validate the domain-wall material from its configuration."""
    spec = DomainWallSpec(
        bulk=BulkSpec(a0=cfg.a0, C=cfg.C),
        perturbation=PerturbationSpec(kind=cfg.kind, k3_convention=cfg.k3),
        delta=cfg.delta,
        eta_infinity=cfg.eta_infinity,
        wall_profile=cfg.wall_profile,
    )
    return spec.validate()
