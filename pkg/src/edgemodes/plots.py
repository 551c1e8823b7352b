"""Figure rendering for the report commands.

Every CLI command that writes CSV output also renders the matching figures
next to it (band diagram, mode modulus contours, convergence rates), so a
run leaves a self-contained report directory.  Mode contours follow the
lattice-coordinate convention with tau2 (the v2 direction, along the wall
normal) on the horizontal axis and tau1 (the periodic v1 direction) on the
vertical axis.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .convergence import ConvergenceReport
from .mesh import CylinderMesh, DofMap
from .spectrum import BandStructure, EDGE, ModeField, PSEUDO_EDGE


def band_figure(bs: BandStructure, path) -> None:
    """Band diagram over [0, 2 pi]; edge bands highlighted with x markers."""
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    kk = bs.k_grid / np.pi
    for b in range(bs.n_bands):
        cls = bs.classes[b]
        if cls == EDGE:
            ax.plot(kk, bs.e_recovered[:, b], "x-", color="tab:red", lw=1.2, ms=4,
                    label=f"edge (band {b + 1})")
        elif cls == PSEUDO_EDGE:
            ax.plot(kk, bs.e_recovered[:, b], "s-", color="tab:orange", lw=1.0,
                    ms=2.5, label=f"pseudo edge (band {b + 1})")
        else:
            ax.plot(kk, bs.e_recovered[:, b], "-", color="tab:blue", lw=0.7,
                    alpha=0.7)
    for p in bs.probes:
        ax.axvline(p.k_par / np.pi, color="gray", lw=0.5, ls=":")
    ax.set_xlabel(r"$k_\parallel / \pi$")
    ax.set_ylabel("eigenvalue")
    handles, labels = ax.get_legend_handles_labels()
    if handles:
        seen = {}
        for h, l in zip(handles, labels):
            seen.setdefault(l, h)
        ax.legend(seen.values(), seen.keys(), fontsize=8, loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def mode_figure(mesh: CylinderMesh, dof_map: DofMap, field: ModeField, path) -> None:
    """Filled contour of |p| on the (tau2, tau1) grid."""
    N, nrow = mesh.N, mesh.n_rows
    vals = np.abs(dof_map.geo_values(field.values_id)).reshape(nrow, N + 1)
    t2 = -mesh.L + np.arange(nrow) / N
    t1 = np.arange(N + 1) / N
    fig, ax = plt.subplots(figsize=(7.5, 2.6))
    cs = ax.contourf(t2, t1, vals.T, levels=24, cmap="viridis")
    fig.colorbar(cs, ax=ax, shrink=0.9)
    ax.set_xlabel(r"$\tau_2$ (along $v_2$)")
    ax.set_ylabel(r"$\tau_1$ (along $v_1$)")
    ax.set_title(
        f"band {field.band}, E = {field.e_recovered:.6g}, "
        f"center {field.center_fraction:.2f} / boundary {field.boundary_fraction:.2f}",
        fontsize=9,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def convergence_figures(report: ConvergenceReport, outdir) -> list:
    """Log-log error decay per quantity, one file each; returns the paths."""
    from pathlib import Path

    outdir = Path(outdir)
    h = 1.0 / np.array([nc for nc, _ in report.pairs], dtype=float)
    made = []
    panels = (
        ("fem", report.err_fem, "eigenvalue Cauchy error"),
        ("recovered", report.err_recovered, "corrected eigenvalue Cauchy error"),
        ("gradient", report.de_gradient, "recovered gradient Cauchy error"),
    )
    for name, err, title in panels:
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        for b in range(report.bands):
            label = f"band {b + 1}"
            if report.slopes is not None:
                label += f" (slope {report.slopes[name][b]:.2f})"
            ax.loglog(h, err[:, b], "o-", ms=4, label=label)
        ax.set_xlabel("h")
        ax.set_ylabel("relative error" if name != "gradient" else "L2 error")
        ax.set_title(title, fontsize=10)
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        path = outdir / f"convergence_{name}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        made.append(path)
    return made
