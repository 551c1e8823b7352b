"""Honeycomb lattice geometry.

Direct basis (unit length, 60 degrees apart):

    v1 = (sqrt(3)/2,  1/2)
    v2 = (sqrt(3)/2, -1/2)

Dual basis with k_i . v_j = 2 pi delta_ij:

    k1 = (4 pi / sqrt 3) (1/2,  sqrt(3)/2)
    k2 = (4 pi / sqrt 3) (1/2, -sqrt(3)/2)

The third dual momentum is fixed to k3 = -(k1 + k2).  This matches the
exponent of the third Fourier component of the bulk weight; the sign matters
for the sin(k3 . x) term of the parity-breaking perturbation, so the
perturbation accepts an override (see material.PerturbationSpec).

R denotes the rotation by 2 pi / 3 that maps the lattice to itself; it
rotates vectors clockwise.  R^T (counterclockwise) cyclically permutes the
dual momenta: R^T k1 = k3, R^T k2 = k1, R^T k3 = k2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

_SQRT3 = np.sqrt(3.0)


def rotation_matrix() -> np.ndarray:
    """Clockwise rotation by 2 pi / 3 about the origin."""
    return np.array([[-0.5, _SQRT3 / 2.0], [-_SQRT3 / 2.0, -0.5]])


@dataclass(frozen=True)
class LatticeBasis:
    """Direct and dual honeycomb basis vectors plus derived momenta.

    K and Kp are the two inequivalent vertices of the Brillouin zone,
    K = (k1 - k2) / 3 and Kp = -K.
    """

    v1: np.ndarray
    v2: np.ndarray
    k1: np.ndarray
    k2: np.ndarray
    k3: np.ndarray
    K: np.ndarray
    Kp: np.ndarray

    @property
    def cell_area(self) -> float:
        """Area of the v1, v2 unit cell."""
        return abs(self.v1[0] * self.v2[1] - self.v1[1] * self.v2[0])


def make_basis() -> LatticeBasis:
    """Build the canonical honeycomb basis described in the module docstring."""
    v1 = np.array([_SQRT3 / 2.0, 0.5])
    v2 = np.array([_SQRT3 / 2.0, -0.5])
    k1 = (2.0 * TWO_PI / _SQRT3) * np.array([0.5, _SQRT3 / 2.0])
    k2 = (2.0 * TWO_PI / _SQRT3) * np.array([0.5, -_SQRT3 / 2.0])
    k3 = -(k1 + k2)
    K = (k1 - k2) / 3.0
    return LatticeBasis(v1=v1, v2=v2, k1=k1, k2=k2, k3=k3, K=K, Kp=-K)


def to_lattice_coords(basis: LatticeBasis, x: np.ndarray) -> np.ndarray:
    """Map physical points to lattice coordinates (tau1, tau2).

    tau_i = k_i . x / (2 pi), so x = tau1 v1 + tau2 v2.  Accepts a single
    point of shape (2,) or a batch of shape (..., 2).
    """
    x = np.asarray(x, dtype=float)
    t1 = x @ basis.k1 / TWO_PI
    t2 = x @ basis.k2 / TWO_PI
    return np.stack([t1, t2], axis=-1)


def from_lattice_coords(basis: LatticeBasis, tau: np.ndarray) -> np.ndarray:
    """Inverse of to_lattice_coords: x = tau1 v1 + tau2 v2."""
    tau = np.asarray(tau, dtype=float)
    return np.multiply.outer(tau[..., 0], basis.v1) + np.multiply.outer(
        tau[..., 1], basis.v2
    )
