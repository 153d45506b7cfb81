"""Command-line entry point: ``case-spectra {spectrum,converge,msweep,dispersion,matrix}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import io
import json
import logging
import sys
from pathlib import Path

from .commands import COMMANDS, ConfigError, RunConfig, build_phase
from .errors import DomainError, InconsistencyError, NumericalFailure
from .markel import build_markel

log = logging.getLogger("case_spectra")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def int_list(text: str) -> list[int]:
    """``"0,2,5"`` or inclusive ranges such as ``"0..9"`` (mixable)."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        try:
            if ".." in part:
                a, b = part.split("..", 1)
                a, b = int(a), int(b)
                out.extend(range(a, b + 1) if a <= b else range(a, b - 1, -1))
            else:
                out.append(int(part))
        except ValueError:
            raise argparse.ArgumentTypeError(f"not an integer list: {text!r}") from None
    if not out:
        raise argparse.ArgumentTypeError("empty list")
    return out


def format_value(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, int)) or (hasattr(x, "dtype") and x.dtype.kind in "iu"):
        return str(int(x))
    return format(float(x), ".17g")


def render_csv(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(format_value(v) for v in row) + "\n")
    return buf.getvalue()


def _json_value(x):
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (bool, int)) or (hasattr(x, "dtype") and x.dtype.kind in "iu"):
        return int(x)
    return float(x)


def render_json(cfg: RunConfig, command: str, header, rows) -> str:
    doc = {
        "config": dict(cfg.echo(), command=command),
        "rows": [{k: _json_value(v) for k, v in zip(header, row)} for row in rows],
    }
    return json.dumps(doc, indent=2) + "\n"


GNUPLOT = {
    "spectrum": ("l_max", "eigenvalue", "2:4", "Eigenvalues of B^m versus l_max"),
    "converge": ("l_max", "largest eigenvalue", "1:2", "Largest eigenvalue versus l_max"),
    "msweep": ("m", "eigenvalue", "1:3", "Discrete eigenvalues versus m"),
    "dispersion": ("z", "value", "1:2", "Dispersion function"),
}


def gnuplot_script(command: str, data_path: str) -> str:
    xlabel, ylabel, cols, title = GNUPLOT[command]
    style = "lines" if command == "dispersion" else "points pt 7 ps 0.5"
    return (
        "set datafile separator ','\n"
        f"set title '{title}'\n"
        f"set xlabel '{xlabel}'\n"
        f"set ylabel '{ylabel}'\n"
        "set key off\n"
        f"plot '{data_path}' every ::1 using {cols} with {style}\n"
        "pause -1\n"
    )


def _common(parser):
    g = parser.add_argument_group("phase function")
    g.add_argument("--phase", choices=["isotropic", "hg", "custom"], default="isotropic")
    g.add_argument("--c", type=float, help="scattering constant, strictly inside (0, 1)")
    g.add_argument("--g", type=float, default=0.0, help="Henyey-Greenstein anisotropy")
    g.add_argument("--N", type=int, help="Henyey-Greenstein truncation order")
    g.add_argument("--coeff-file", help="custom coefficients, one per line starting with f_0 = 1")
    parser.add_argument("--m", type=int_list, default=[0], help="azimuthal orders, e.g. 0,1,2 or 0..9")
    parser.add_argument("--lmax", type=int_list, default=[501], help="highest degree(s) of B^m")
    parser.add_argument("--format", choices=["csv", "json"], default="csv")
    parser.add_argument("--out", help="output file (default: stdout)")
    parser.add_argument("--no-oracle", dest="oracle", action="store_false", help="skip dispersion-function checks")
    parser.add_argument("--eps-disc", type=float, default=1e-6, help="margin for |nu| > 1 + eps (default 1e-6)")
    parser.add_argument("--tol", type=float, help="bisection tolerance (default 1e-13 ||B||)")
    parser.add_argument("--zmin", type=float)
    parser.add_argument("--zmax", type=float)
    parser.add_argument("--zcount", type=int, default=100)
    parser.add_argument("--gnuplot", action="store_true", help="also write a plotting script (OUT.gp, or stderr)")
    parser.add_argument("-v", "--verbose", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="case-spectra", description="Discrete eigenvalues of the one-speed transport equation from the tridiagonal matrix B^m.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "all eigenvalues of B^m with classification and residuals",
        "converge": "largest and discrete eigenvalues across several l_max",
        "msweep": "discrete eigenvalues across several m",
        "dispersion": "tabulate Lambda^m(z) (|z| > 1) or lambda^m(nu) (|nu| < 1)",
        "matrix": "dump B^m as text (dim / diag / offdiag)",
    }
    for name, text in helps.items():
        _common(sub.add_parser(name, help=text, description=text))
    return parser


def _config(ns) -> RunConfig:
    return RunConfig(
        phase=ns.phase, c=ns.c, g=ns.g, N=ns.N, coeff_file=ns.coeff_file, m=ns.m, lmax=ns.lmax,
        format=ns.format, out=ns.out, oracle=ns.oracle, eps_disc=ns.eps_disc, tol=ns.tol,
        zmin=ns.zmin, zmax=ns.zmax, zcount=ns.zcount, gnuplot=ns.gnuplot,
    )


def _emit(cfg, text):
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)


def run(cfg: RunConfig, command: str) -> None:
    if command == "matrix":
        p = build_phase(cfg)
        if len(cfg.m) != 1 or len(cfg.lmax) != 1:
            raise ConfigError("matrix takes a single --m and a single --lmax")
        if cfg.lmax[0] < abs(cfg.m[0]):
            raise ConfigError(f"--lmax {cfg.lmax[0]} is below |m| = {abs(cfg.m[0])}")
        _emit(cfg, build_markel(p, cfg.m[0], cfg.lmax[0]).dumps())
        return
    header, rows, _ = COMMANDS[command](cfg)
    if cfg.format == "json":
        text = render_json(cfg, command, header, rows)
    else:
        text = render_csv(header, rows)
    _emit(cfg, text)
    if cfg.gnuplot:
        if cfg.format != "csv":
            log.warning("the gnuplot script reads CSV; rerun with --format csv to plot")
        if cfg.out:
            Path(cfg.out + ".gp").write_text(gnuplot_script(command, cfg.out))
        else:
            sys.stderr.write(gnuplot_script(command, "-"))


def main(argv=None) -> int:
    parser = make_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        run(_config(ns), ns.command)
    except (ConfigError, DomainError) as exc:
        print(f"case-spectra: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, InconsistencyError) as exc:
        print(f"case-spectra: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
