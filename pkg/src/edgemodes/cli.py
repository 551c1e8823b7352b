"""Command line interface.

Subcommands:

    bands     sweep the Bloch pencil over [0, 2 pi], write bands.csv and
              the band diagram figure
    modes     solve selected bands at one quasimomentum, write one CSV and
              one contour figure per mode
    converge  run the mesh refinement study, write convergence.csv,
              slopes.csv and the rate figures
    validate  check the material symmetries and report pass/fail lines

All numeric CSV columns use a fixed %.12e format so repeated runs with the
same configuration and seed produce byte-identical files.  Quasimomentum
arguments accept plain floats or 'pi' expressions like 2pi/3 or 0.56pi.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .convergence import run_study
from .material import validate_symmetries
from .spectrum import discretize, solve_modes, sweep

ENV_THREADS = "EDGEMODES_THREADS"


def parse_k(text: str) -> float:
    """Parse a quasimomentum: float, 'Apib' or 'Api/B' forms (e.g. 2pi/3)."""
    s = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([0-9.]*)\*?pi(?:/([0-9.]+))?", s)
    if m:
        num = float(m.group(1)) if m.group(1) else 1.0
        den = float(m.group(2)) if m.group(2) else 1.0
        return num * np.pi / den
    try:
        return float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse quasimomentum {text!r}")


def _fmt(x) -> str:
    return f"{x:.12e}"


def _thread_count(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{ENV_THREADS} must be an integer, got {env!r}")
    return 1


def _outdir(cfg, args) -> Path:
    out = Path(args.out) if args.out else Path(cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_config_arg(text: str):
    """Load --config: a JSON file path, or the name of a shipped config."""
    p = Path(text)
    if not p.exists() and re.fullmatch(r"[A-Za-z0-9_]+", text):
        from . import config_path

        try:
            p = config_path(text)
        except FileNotFoundError as exc:
            raise ConfigError(str(exc))
    return load_config(p)


def write_bands_csv(bs, path) -> None:
    """bands.csv: one row per quasimomentum per band.

    Localization fractions and the class label are filled only on the grid
    row nearest each probe (fields are solved exactly at the probe); other
    rows leave those columns empty.
    """
    probe_rows = {}
    for p in bs.probes:
        idx = int(np.argmin(np.abs(bs.k_grid - p.k_par)))
        probe_rows.setdefault(idx, p)
    with open(path, "w") as f:
        f.write("k_index,k_par,band,E_fem,E_recovered,"
                "center_fraction,boundary_fraction,class\n")
        for ki in range(len(bs.k_grid)):
            probe = probe_rows.get(ki)
            for b in range(bs.n_bands):
                row = [
                    str(ki),
                    _fmt(bs.k_grid[ki]),
                    str(b + 1),
                    _fmt(bs.e_fem[ki, b]),
                    _fmt(bs.e_recovered[ki, b]),
                ]
                if probe is not None:
                    row += [
                        _fmt(probe.center_fraction[b]),
                        _fmt(probe.boundary_fraction[b]),
                        probe.classes[b],
                    ]
                else:
                    row += ["", "", ""]
                f.write(",".join(row) + "\n")


def _mode_filename(k_par: float, band: int) -> str:
    return f"mode_k{k_par:.4f}_b{band}.csv"


def write_mode_csv(mesh, dof_map, field, path) -> None:
    """Nodal values at every geometric node, ordered by (j, i) grid index."""
    vals = dof_map.geo_values(field.values_id)
    with open(path, "w") as f:
        f.write("tau1,tau2,x,y,re,im,abs\n")
        for gid in range(mesh.n_geo):
            t1, t2 = mesh.nodes_tau[gid]
            x, y = mesh.nodes_xy[gid]
            v = vals[gid]
            f.write(
                f"{_fmt(t1)},{_fmt(t2)},{_fmt(x)},{_fmt(y)},"
                f"{_fmt(v.real)},{_fmt(v.imag)},{_fmt(abs(v))}\n"
            )


def cmd_bands(args) -> int:
    cfg = _load_config_arg(args.config)
    out = _outdir(cfg, args)
    bs = sweep(cfg, threads=_thread_count(args))
    write_bands_csv(bs, out / "bands.csv")
    if bs.failures:
        for ki, msg in bs.failures:
            print(f"warning: k index {ki} failed: {msg}", file=sys.stderr)
    if cfg.output.figures and not args.no_figures:
        from .plots import band_figure

        band_figure(bs, out / "bands.png")
    if bs.edge_bands:
        print(f"edge bands: {', '.join(str(b) for b in bs.edge_bands)}")
    else:
        print("edge bands: none")
    print(f"wrote {out / 'bands.csv'}")
    return 0


def cmd_modes(args) -> int:
    cfg = _load_config_arg(args.config)
    out = _outdir(cfg, args)
    bands = [int(b) for b in args.bands.split(",") if b]
    disc = discretize(cfg)
    fields = solve_modes(cfg, args.k, bands, disc=disc)
    for field in fields:
        path = out / _mode_filename(field.k_par, field.band)
        write_mode_csv(disc.mesh, disc.dof_map, field, path)
        print(f"wrote {path}")
        if cfg.output.figures and not args.no_figures:
            from .plots import mode_figure

            mode_figure(
                disc.mesh,
                disc.dof_map,
                field,
                out / f"mode_k{field.k_par:.4f}_b{field.band}.png",
            )
    return 0


def cmd_converge(args) -> int:
    cfg = _load_config_arg(args.config)
    out = _outdir(cfg, args)
    n_list = [int(n) for n in args.n_list.split(",")] if args.n_list else None
    report = run_study(cfg, n_list)
    with open(out / "convergence.csv", "w") as f:
        f.write("pair,N_coarse,N_fine,band,err_fem,err_recovered,de_gradient\n")
        for p, nc, nf, b, ef, er, de in report.rows():
            f.write(f"{p},{nc},{nf},{b},{_fmt(ef)},{_fmt(er)},{_fmt(de)}\n")
    print(f"wrote {out / 'convergence.csv'}")
    if report.slopes is not None:
        with open(out / "slopes.csv", "w") as f:
            f.write("band,quantity,slope\n")
            for b, quantity, s in report.slope_rows():
                f.write(f"{b},{quantity},{_fmt(s)}\n")
        print(f"wrote {out / 'slopes.csv'}")
    else:
        print("single mesh pair: slope fit needs at least three meshes, skipped")
    if cfg.output.figures and not args.no_figures:
        from .plots import convergence_figures

        for path in convergence_figures(report, out):
            print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    cfg = _load_config_arg(args.config)
    from .config import material_spec
    from .material import MaterialError

    try:
        spec = material_spec(cfg.material)
    except MaterialError as exc:
        print(f"FAIL  material rejected at load: {exc}")
        return 1
    report = validate_symmetries(spec, n_samples=args.samples)
    for line in report.lines():
        print(line)
    print("overall:", "PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="edgemodes",
        description="Edge modes of domain-wall modulated honeycomb media "
        "(P1 FEM with gradient recovery).",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, figures=True):
        p.add_argument("--config", required=True, help="JSON configuration file")
        p.add_argument("--out", help="output directory (default from config)")
        p.add_argument(
            "--threads",
            type=int,
            help=f"concurrent quasimomentum solves (default 1 or ${ENV_THREADS})",
        )
        if figures:
            p.add_argument(
                "--no-figures", action="store_true", help="skip figure rendering"
            )

    p = sub.add_parser("bands", help="band sweep over [0, 2 pi]")
    common(p)
    p.set_defaults(func=cmd_bands)

    p = sub.add_parser("modes", help="eigenfunctions at one quasimomentum")
    common(p)
    p.add_argument("--k", type=parse_k, required=True, help="quasimomentum (e.g. 2pi/3)")
    p.add_argument("--bands", required=True, help="comma-separated 1-based band indices")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("converge", help="mesh refinement study")
    common(p)
    p.add_argument("--n-list", help="comma-separated doubling mesh sizes")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("validate", help="material symmetry checks")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int, default=200, help="random sample count")
    p.set_defaults(func=cmd_validate)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
