"""Material weights for domain-wall modulated honeycomb media.

The bulk weight keeps only the lowest Fourier shell of a honeycomb-symmetric
2x2 Hermitian matrix function,

    A(x) = a0 I + C e^{i k1.x} + R C R^T e^{i k2.x} + R^T C R e^{i k3.x}
               + C^T e^{-i k1.x} + R C^T R^T e^{-i k2.x} + R^T C^T R e^{-i k3.x}

with k3 = -(k1 + k2), C an arbitrary real 2x2 matrix and a0 > 0 large enough
for positive definiteness.  C symmetric gives a real-valued A; C = a I gives
the scalar (isotropic) family.

Two anti-symmetric perturbations open a spectral gap at the Dirac points:

    parity breaking:      B(x) = (sin k1.x + sin k2.x + sin k3.x) I
    conjugation breaking: B(x) = (cos k1.x + cos k2.x + cos k3.x) sigma2

where sigma2 = ((0, -i), (i, 0)).  Both satisfy conj(B(-x)) = -B(x).

The domain wall interpolates between the two gapped phases along the k2
direction:

    W(x) = A(x) + delta * eta(delta * k2.x) * B(x),

with eta(z) = eta_inf * tanh(z) by default.  Note that for strong
perturbations W can lose pointwise positive definiteness far from the wall
even though A keeps it; evaluation therefore never aborts on indefiniteness,
and validate_symmetries reports the observed minimum eigenvalue instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .lattice import LatticeBasis, make_basis, rotation_matrix

SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]])

# wall profiles usable by name from configuration files
WALL_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "tanh": np.tanh,
}

K3_CONVENTIONS = ("minus-k1-k2", "k2-minus-k1")


class MaterialError(ValueError):
    """Invalid material specification (non-Hermitian, indefinite bulk, ...)."""


@dataclass(frozen=True)
class BulkSpec:
    """Unperturbed bulk weight: offset a0 and Fourier coefficient matrix C."""

    a0: float
    C: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=float)
        if C.shape != (2, 2):
            raise MaterialError(f"bulk C must be 2x2, got shape {C.shape}")
        object.__setattr__(self, "C", C)
        if not self.a0 > 0:
            raise MaterialError(f"bulk a0 must be positive, got {self.a0}")


@dataclass(frozen=True)
class PerturbationSpec:
    """Gap-opening perturbation B(x).

    kind is one of "p_breaking", "c_breaking" or "custom".  For the custom
    kind, terms lists (index, coefficient) pairs where index in {1, 2, 3}
    selects the dual momentum and the term contributes
    coeff e^{i k.x} + coeff^H e^{-i k.x}.

    k3_convention selects the sign of the third momentum entering B; the
    default follows the bulk exponent, k3 = -(k1 + k2).
    """

    kind: str
    terms: Sequence[tuple[int, np.ndarray]] = ()
    k3_convention: str = "minus-k1-k2"

    def __post_init__(self):
        if self.kind not in ("p_breaking", "c_breaking", "custom"):
            raise MaterialError(f"unknown perturbation kind {self.kind!r}")
        if self.k3_convention not in K3_CONVENTIONS:
            raise MaterialError(
                f"unknown k3 convention {self.k3_convention!r}; "
                f"expected one of {K3_CONVENTIONS}"
            )
        if self.kind == "custom":
            terms = []
            for idx, coeff in self.terms:
                if idx not in (1, 2, 3):
                    raise MaterialError(f"custom term index must be 1..3, got {idx}")
                coeff = np.asarray(coeff, dtype=complex)
                if coeff.shape != (2, 2):
                    raise MaterialError("custom term coefficient must be 2x2")
                terms.append((int(idx), coeff))
            object.__setattr__(self, "terms", tuple(terms))


@dataclass(frozen=True)
class DomainWallSpec:
    """Full material: bulk + delta * eta(delta * k2.x) * perturbation."""

    bulk: BulkSpec
    perturbation: PerturbationSpec
    delta: float
    eta_infinity: float = 1.0
    wall_profile: str | Callable[[np.ndarray], np.ndarray] = "tanh"
    basis: LatticeBasis = field(default_factory=make_basis)

    def __post_init__(self):
        if self.delta < 0:
            raise MaterialError(f"delta must be nonnegative, got {self.delta}")
        if not self.eta_infinity > 0:
            raise MaterialError("eta_infinity must be positive")
        if isinstance(self.wall_profile, str) and self.wall_profile not in WALL_PROFILES:
            raise MaterialError(
                f"unknown wall profile {self.wall_profile!r}; "
                f"known: {sorted(WALL_PROFILES)}"
            )

    def eta(self, zeta: np.ndarray) -> np.ndarray:
        prof = (
            WALL_PROFILES[self.wall_profile]
            if isinstance(self.wall_profile, str)
            else self.wall_profile
        )
        return self.eta_infinity * prof(np.asarray(zeta, dtype=float))

    def validate(self) -> "DomainWallSpec":
        """Check bulk positive definiteness on a dense unit-cell grid.

        Samples A(x) on a 64x64 grid over the v1, v2 cell and aborts if the
        minimum eigenvalue is not positive.  This guards the bulk weight
        only; see the module docstring for why W itself is not gated.
        """
        lam = _min_eig_bulk_on_grid(self, 64)
        if not lam > 0:
            raise MaterialError(
                f"bulk weight is not positive definite on the unit cell "
                f"(min eigenvalue {lam:.6g}); increase a0 or shrink C"
            )
        return self


def _fourier_matrices(bulk: BulkSpec) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric and antisymmetric parts of C, R C R^T, R^T C R (stacked)."""
    R = rotation_matrix()
    mats = [bulk.C, R @ bulk.C @ R.T, R.T @ bulk.C @ R]
    sym = np.stack([m + m.T for m in mats])
    asym = np.stack([m - m.T for m in mats])
    return sym, asym


def eval_bulk(spec: BulkSpec, x: np.ndarray, basis: LatticeBasis | None = None) -> np.ndarray:
    """Evaluate A(x); x of shape (2,) or (n, 2), result (2, 2) or (n, 2, 2).

    Uses C e^{i phi} + C^T e^{-i phi} = (C + C^T) cos phi + i (C - C^T) sin phi
    per Fourier component, which keeps the result Hermitian by construction.
    """
    basis = basis or make_basis()
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    phases = pts @ np.stack([basis.k1, basis.k2, basis.k3]).T  # (n, 3)
    sym, asym = _fourier_matrices(spec)
    out = np.einsum("nj,jab->nab", np.cos(phases), sym).astype(complex)
    out += 1.0j * np.einsum("nj,jab->nab", np.sin(phases), asym)
    out += spec.a0 * np.eye(2)
    return out[0] if single else out


def _perturbation_k3(basis: LatticeBasis, convention: str) -> np.ndarray:
    if convention == "minus-k1-k2":
        return basis.k3
    return basis.k2 - basis.k1


def eval_perturbation(
    spec: PerturbationSpec, x: np.ndarray, basis: LatticeBasis | None = None
) -> np.ndarray:
    """Evaluate B(x); same shape conventions as eval_bulk."""
    basis = basis or make_basis()
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    k3 = _perturbation_k3(basis, spec.k3_convention)
    kmat = np.stack([basis.k1, basis.k2, k3])
    phases = pts @ kmat.T  # (n, 3)
    if spec.kind == "p_breaking":
        out = np.einsum("n,ab->nab", np.sin(phases).sum(axis=1), np.eye(2)).astype(
            complex
        )
    elif spec.kind == "c_breaking":
        out = np.einsum("n,ab->nab", np.cos(phases).sum(axis=1), SIGMA2)
    else:
        out = np.zeros((len(pts), 2, 2), dtype=complex)
        for idx, coeff in spec.terms:
            ph = phases[:, idx - 1]
            out += np.einsum("n,ab->nab", np.exp(1.0j * ph), coeff)
            out += np.einsum("n,ab->nab", np.exp(-1.0j * ph), coeff.conj().T)
    return out[0] if single else out


def eval_weight(
    spec: DomainWallSpec, x: np.ndarray, basis: LatticeBasis | None = None
) -> np.ndarray:
    """Evaluate the full domain-wall weight W(x)."""
    basis = basis or spec.basis
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    pts = np.atleast_2d(x)
    out = eval_bulk(spec.bulk, pts, basis)
    if spec.delta > 0:
        zeta = spec.delta * (pts @ basis.k2)
        out = out + spec.eta(zeta)[:, None, None] * (
            spec.delta * eval_perturbation(spec.perturbation, pts, basis)
        )
    return out[0] if single else out


def weight_function(spec: DomainWallSpec) -> Callable[[np.ndarray], np.ndarray]:
    """Closure evaluating W on point batches, for the assembly routines."""
    return lambda pts: eval_weight(spec, pts)


def _min_eig_bulk_on_grid(spec: DomainWallSpec, n: int) -> float:
    basis = spec.basis
    t = (np.arange(n) + 0.5) / n
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    pts = t1.ravel()[:, None] * basis.v1 + t2.ravel()[:, None] * basis.v2
    A = eval_bulk(spec.bulk, pts, basis)
    return float(np.linalg.eigvalsh(A)[:, 0].min())


@dataclass
class SymmetryCheck:
    name: str
    max_violation: float
    tol: float
    passed: bool
    required: bool
    note: str = ""


@dataclass
class SymmetryReport:
    """Per-condition violation summary from validate_symmetries."""

    checks: list[SymmetryCheck]
    notes: list[str]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.required)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            status = "PASS" if c.passed else ("FAIL" if c.required else "WARN")
            line = f"{status:4s}  {c.name:<28s} max violation {c.max_violation:.3e}"
            if c.note:
                line += f"  ({c.note})"
            out.append(line)
        out.extend(f"note: {n}" for n in self.notes)
        return out


def _maxdiff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.abs(a - b).max())


def validate_symmetries(
    spec: DomainWallSpec, n_samples: int = 200, seed: int = 0, tol: float = 1e-12
) -> SymmetryReport:
    """Verify the structural conditions of the material on random samples.

    Checks, each reported with its maximum violation over n_samples points:
    Hermiticity of A, B and W; lattice periodicity of A; PC-invariance
    conj(A(-x)) = A(x); rotation invariance A(R^T x) = R^T A(x) R; the
    anti-PC property conj(B(-x)) = -B(x); and positive definiteness of A on
    a dense unit-cell grid.  The minimum eigenvalue of W along the wall
    (with the profile saturated) is reported as a non-gating warning, since
    strong perturbations violate pointwise definiteness by construction.
    """
    basis = spec.basis
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-2.5, 2.5, size=(n_samples, 2))
    R = rotation_matrix()

    A = eval_bulk(spec.bulk, pts, basis)
    Aneg = eval_bulk(spec.bulk, -pts, basis)
    B = eval_perturbation(spec.perturbation, pts, basis)
    Bneg = eval_perturbation(spec.perturbation, -pts, basis)
    W = eval_weight(spec, pts, basis)

    checks = [
        SymmetryCheck(
            "A Hermitian", _maxdiff(A, np.conj(np.swapaxes(A, 1, 2))), tol, True, True
        ),
        SymmetryCheck(
            "B Hermitian", _maxdiff(B, np.conj(np.swapaxes(B, 1, 2))), tol, True, True
        ),
        SymmetryCheck(
            "W Hermitian", _maxdiff(W, np.conj(np.swapaxes(W, 1, 2))), tol, True, True
        ),
    ]

    shifts = [basis.v1, basis.v2, basis.v1 + basis.v2, 2 * basis.v1 - basis.v2]
    per = max(
        _maxdiff(eval_bulk(spec.bulk, pts + s, basis), A) for s in shifts
    )
    checks.append(SymmetryCheck("A lattice-periodic", per, 1e-11, True, True))

    checks.append(SymmetryCheck("A PC-invariant", _maxdiff(np.conj(Aneg), A), tol, True, True))

    Arot = eval_bulk(spec.bulk, pts @ R, basis)  # rows x R = (R^T x)^T
    RAR = np.einsum("ia,nab,bj->nij", R.T, A, R)
    checks.append(SymmetryCheck("A rotation-invariant", _maxdiff(Arot, RAR), 1e-11, True, True))

    checks.append(
        SymmetryCheck("B anti-PC", _maxdiff(np.conj(Bneg), -B), tol, True, True)
    )

    lam_a = _min_eig_bulk_on_grid(spec, 64)
    checks.append(
        SymmetryCheck(
            "A positive definite",
            max(0.0, -lam_a),
            0.0,
            lam_a > 0,
            True,
            note=f"min eigenvalue {lam_a:.4g}",
        )
    )

    # W with the wall saturated on both sides; informational only
    sat = spec.delta * spec.eta_infinity
    Wsat = np.concatenate([A + sat * B, A - sat * B])
    lam_w = float(np.linalg.eigvalsh(Wsat)[:, 0].min())
    checks.append(
        SymmetryCheck(
            "W positive definite (saturated)",
            max(0.0, -lam_w),
            0.0,
            lam_w > 0,
            False,
            note=f"min eigenvalue {lam_w:.4g}",
        )
    )

    notes = []
    if _maxdiff(spec.bulk.C, spec.bulk.C.T) > 0:
        notes.append("C is not symmetric: A is complex-valued / anisotropic")
    if spec.delta == 0:
        notes.append("delta = 0: unperturbed bulk, no domain wall")
    return SymmetryReport(checks=checks, notes=notes)
