"""Edge modes of domain-wall modulated honeycomb photonic media.

Bloch-reduced P1 finite elements on a truncated cylinder with
polynomial-preserving gradient recovery: the recovered gradient corrects
the Rayleigh quotient and lifts eigenvalue convergence beyond the plain
finite element rate, which makes localized edge modes cheap to resolve.

Shipped example configurations live under edgemodes/configs and can be
located with config_path(); each exists in a "paper" scale matching the
published experiments and a cheaper "desk" scale.
"""

from importlib import resources
from pathlib import Path

from .assembly import (
    MatrixSet,
    assemble,
    bloch_stiffness,
    mass_matrix_id,
    nodal_l2_norm,
    triangle_quadrature,
)
from .config import ConfigError, RunConfig, load_config, material_spec, parse_config
from .convergence import ConvergenceReport, run_study
from .eigensolver import EigenResult, EigensolverError, solve_gevp
from .lattice import LatticeBasis, make_basis, rotation_matrix
from .material import (
    BulkSpec,
    DomainWallSpec,
    MaterialError,
    PerturbationSpec,
    SymmetryReport,
    eval_bulk,
    eval_perturbation,
    eval_weight,
    validate_symmetries,
)
from .mesh import (
    CylinderMesh,
    DofMap,
    NodePatch,
    build_dof_map,
    build_mesh,
    build_patches,
    dump_mesh_csv,
    interpolate_nodal,
)
from .recovery import (
    RecoveryOperator,
    build_recovery,
    fit_local_quadratic,
    recover_gradient,
)
from .spectrum import (
    BandStructure,
    ModeField,
    classify_bands,
    correction_norm,
    discretize,
    localization_profile,
    recovered_eigenvalue,
    solve_modes,
    sweep,
)

__version__ = "0.1.0"


def config_path(name: str) -> Path:
    """Path of a shipped configuration, e.g. config_path('testcase1_desk')."""
    path = resources.files("edgemodes") / "configs" / f"{name}.json"
    if not path.is_file():
        have = sorted(
            p.stem for p in (resources.files("edgemodes") / "configs").iterdir()
        )
        raise FileNotFoundError(f"no shipped config {name!r}; available: {have}")
    return Path(str(path))
