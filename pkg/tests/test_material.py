"""Material weight: closed forms, symmetry validation, perturbations."""

import numpy as np
import pytest

from edgemodes.lattice import make_basis
from edgemodes.material import (
    SIGMA2,
    BulkSpec,
    DomainWallSpec,
    MaterialError,
    PerturbationSpec,
    eval_bulk,
    eval_perturbation,
    eval_weight,
    validate_symmetries,
    weight_function,
)

BASIS = make_basis()


def tc1_spec(delta=6.0):
    return DomainWallSpec(
        bulk=BulkSpec(a0=23.0, C=-0.5 * np.eye(2)),
        perturbation=PerturbationSpec(kind="p_breaking"),
        delta=delta,
    )


def cbreaking_spec():
    return DomainWallSpec(
        bulk=BulkSpec(a0=4.0, C=-0.5 * np.eye(2)),
        perturbation=PerturbationSpec(kind="c_breaking"),
        delta=1.0,
    )


def anisotropic_spec():
    return DomainWallSpec(
        bulk=BulkSpec(a0=10.0, C=np.array([[-1.0, 2.0], [0.0, -2.0]])),
        perturbation=PerturbationSpec(kind="c_breaking"),
        delta=1.0,
    )


def test_bulk_scalar_closed_form(rng):
    # isotropic C = -I/2 collapses the Fourier sum to a0 - sum of cosines
    spec = tc1_spec()
    pts = rng.uniform(-4, 4, size=(100, 2))
    A = eval_bulk(spec.bulk, pts)
    phases = pts @ np.stack([BASIS.k1, BASIS.k2, BASIS.k3]).T
    scalar = 23.0 - np.cos(phases).sum(axis=1)
    np.testing.assert_allclose(A[:, 0, 0].real, scalar, atol=1e-12)
    np.testing.assert_allclose(A[:, 1, 1].real, scalar, atol=1e-12)
    np.testing.assert_allclose(A[:, 0, 1], 0.0, atol=1e-12)
    np.testing.assert_allclose(A - A.conj().transpose(0, 2, 1), 0.0, atol=1e-13)


def test_bulk_at_origin_tc1():
    A = eval_bulk(tc1_spec().bulk, np.zeros(2))
    np.testing.assert_allclose(A, 20.0 * np.eye(2), atol=1e-12)


def test_bulk_half_period_tc1():
    # k1.(v1/2) = pi, k2.(v1/2) = 0, k3.(v1/2) = -pi: cosines sum to -1
    A = eval_bulk(tc1_spec().bulk, BASIS.v1 / 2.0)
    np.testing.assert_allclose(A, 24.0 * np.eye(2), atol=1e-12)


def _brute_force_bulk_at_zero(a0, C):
    # direct summation of C_j + C_j^T over the rotation orbit
    from edgemodes.lattice import rotation_matrix

    R = rotation_matrix()
    total = a0 * np.eye(2) + 0j
    for M in (C, R @ C @ R.T, R.T @ C @ R):
        total += M + M.T
    return total


def test_bulk_at_origin_anisotropic():
    spec = anisotropic_spec()
    A = eval_bulk(spec.bulk, np.zeros(2))
    oracle = _brute_force_bulk_at_zero(10.0, spec.bulk.C)
    np.testing.assert_allclose(A, oracle, atol=1e-12)
    # the rotation average of the symmetrized coefficient is -9/2 tr-form:
    # sum over the orbit of (C + C^T) equals (3/2) tr(C + C^T) I = -9 I
    np.testing.assert_allclose(A, 1.0 * np.eye(2), atol=1e-12)


def test_p_breaking_perturbation(rng):
    spec = PerturbationSpec(kind="p_breaking")
    assert np.allclose(eval_perturbation(spec, np.zeros(2)), 0.0)
    pts = rng.uniform(-3, 3, size=(100, 2))
    B = eval_perturbation(spec, pts)
    phases = pts @ np.stack([BASIS.k1, BASIS.k2, BASIS.k3]).T
    scalar = np.sin(phases).sum(axis=1)
    np.testing.assert_allclose(B[:, 0, 0].real, scalar, atol=1e-12)
    np.testing.assert_allclose(B[:, 0, 1], 0.0, atol=1e-13)
    # anti-PC: conj(B(-x)) = -B(x)
    Bneg = eval_perturbation(spec, -pts)
    np.testing.assert_allclose(Bneg.conj(), -B, atol=1e-12)


def test_c_breaking_perturbation(rng):
    spec = PerturbationSpec(kind="c_breaking")
    B0 = eval_perturbation(spec, np.zeros(2))
    np.testing.assert_allclose(B0, 3.0 * SIGMA2, atol=1e-13)
    pts = rng.uniform(-3, 3, size=(50, 2))
    B = eval_perturbation(spec, pts)
    np.testing.assert_allclose(B - B.conj().transpose(0, 2, 1), 0.0, atol=1e-13)
    np.testing.assert_allclose(eval_perturbation(spec, -pts).conj(), -B, atol=1e-12)


def test_k3_convention_changes_values():
    default = PerturbationSpec(kind="p_breaking")
    other = PerturbationSpec(kind="p_breaking", k3_convention="k2-minus-k1")
    x = np.array([0.37, -0.81])
    assert not np.allclose(
        eval_perturbation(default, x), eval_perturbation(other, x)
    )


def test_weight_is_bulk_on_the_wall(rng):
    spec = tc1_spec()
    # k2 . x = 0 along v1: eta vanishes there
    for t in rng.uniform(-2, 2, size=10):
        x = t * BASIS.v1
        np.testing.assert_allclose(
            eval_weight(spec, x), eval_bulk(spec.bulk, x), atol=1e-12
        )


def test_weight_saturates_far_from_wall():
    spec = tc1_spec()
    x = 5.0 * BASIS.v2  # k2.x = 10 pi, delta k2.x ~ 188
    W = eval_weight(spec, x)
    A = eval_bulk(spec.bulk, x)
    B = eval_perturbation(spec.perturbation, x)
    np.testing.assert_allclose(W, A + 6.0 * B, atol=1e-9)
    Wneg = eval_weight(spec, -x)
    Aneg = eval_bulk(spec.bulk, -x)
    Bneg = eval_perturbation(spec.perturbation, -x)
    np.testing.assert_allclose(Wneg, Aneg - 6.0 * Bneg, atol=1e-9)


def test_weight_half_period_scalar_cross_check():
    # at v1/2 the wall factor is zero and the sine sum is zero as well,
    # so both routes must give the pure bulk value 24 I
    spec = tc1_spec()
    W = eval_weight(spec, BASIS.v1 / 2.0)
    np.testing.assert_allclose(W, 24.0 * np.eye(2), atol=1e-12)


def test_weight_function_batches(rng):
    spec = cbreaking_spec()
    w = weight_function(spec)
    pts = rng.uniform(-5, 5, size=(40, 2))
    W = w(pts)
    assert W.shape == (40, 2, 2)
    single = np.stack([eval_weight(spec, p) for p in pts])
    np.testing.assert_allclose(W, single, atol=1e-13)


@pytest.mark.parametrize(
    "spec_factory", [tc1_spec, cbreaking_spec, anisotropic_spec]
)
def test_symmetry_reports_pass(spec_factory):
    report = validate_symmetries(spec_factory(), n_samples=200, seed=3)
    failed = [c.name for c in report.checks if c.required and not c.passed]
    assert not failed, f"required symmetry checks failed: {failed}"


def test_symmetry_report_lines_render():
    report = validate_symmetries(tc1_spec(), n_samples=50, seed=0)
    text = "\n".join(report.lines())
    assert "hermitian" in text.lower()


def test_corrupted_bulk_rejected():
    with pytest.raises(MaterialError):
        BulkSpec(a0=0.0, C=-0.5 * np.eye(2))


def test_negative_definite_bulk_rejected():
    # a0 too small for the Fourier contrast: A(0) loses definiteness
    spec = DomainWallSpec(
        bulk=BulkSpec(a0=1.0, C=-0.5 * np.eye(2)),
        perturbation=PerturbationSpec(kind="p_breaking"),
        delta=0.0,
    )
    with pytest.raises(MaterialError):
        spec.validate()


def test_delta_zero_allowed():
    spec = tc1_spec(delta=0.0).validate()
    x = 3.3 * BASIS.v2
    np.testing.assert_allclose(
        eval_weight(spec, x), eval_bulk(spec.bulk, x), atol=1e-13
    )
