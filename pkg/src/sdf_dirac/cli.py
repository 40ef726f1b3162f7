"""``sdf-dirac`` command line: solve, table, wavefunction, verify, approx.

Exit codes: 0 success, 1 usage or validation error, 2 computational failure.
CSV output is comma separated with '#'-prefixed metadata lines; energies are
printed with 12 significant digits (JSON keeps full precision).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import DiracError, DomainError, NoRootFound, ValidationError
from .model import B_CONVENTIONS, STANDARD, Symmetry, make_problem, quantum_labels
from .presets import (PRESETS, TABLE1, TABLE2, Preset, diff_against_reference, evaluate_row,
                      get_preset, load_reference, max_abs_delta, table_jobs)
from .spectrum import SpectrumRow, physical_root, solve_energy
from .wavefunction import (count_nodes, default_grid, normalize, partner_component, primary_derivative,
                           primary_component)

DIFF_TOL = 1e-6
SHOOT_TOL = 1e-8
NU_TOL = 1e-6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def workers() -> int:
    try:
        return max(1, int(os.environ.get("SDF_DIRAC_THREADS", "1")))
    except ValueError:
        return 1


# --- output -------------------------------------------------------------------

@dataclass
class Output:
    meta: dict
    columns: list[str]
    records: list[dict]
    json_key: str = "records"


def render(out: Output, kind: str, stamp: bool) -> str:
    meta = dict(out.meta)
    if stamp:
        meta["generated"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    if kind == "json":
        return json.dumps({**meta, out.json_key: out.records}, indent=2) + "\n"
    if kind == "csv":
        buf = io.StringIO()
        for k, v in meta.items():
            buf.write(f"# {k}: {fmt(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.columns)
        for rec in out.records:
            w.writerow([fmt(rec.get(c)) for c in out.columns])
        return buf.getvalue()
    cells = [out.columns] + [[fmt(rec.get(c)) for c in out.columns] for rec in out.records]
    widths = [max(len(row[i]) for row in cells) for i in range(len(out.columns))]
    lines = [f"{k}: {fmt(v)}" for k, v in meta.items()]
    for j, row in enumerate(cells):
        lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        if j == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def emit(text: str, path: str | None):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- serialization of table rows --------------------------------------------------

ROW_COLUMNS = ["symmetry", "C", "r_e", "A", "ell",
               "n_negative_kappa", "kappa_negative", "label_negative_kappa", "E_negative_kappa",
               "n_positive_kappa", "kappa_positive", "label_positive_kappa", "E_positive_kappa",
               "splitting"]


def row_to_record(row: SpectrumRow) -> dict:
    rec = {c: getattr(row, c) for c in ROW_COLUMNS}
    rec["symmetry"] = row.symmetry.value
    rec["label_negative_kappa"] = str(row.label_negative_kappa)
    rec["label_positive_kappa"] = str(row.label_positive_kappa)
    return rec


def row_from_record(rec: dict) -> SpectrumRow:
    return SpectrumRow(
        symmetry=Symmetry(rec["symmetry"]), C=rec["C"], r_e=rec["r_e"], A=rec["A"], ell=rec["ell"],
        n_negative_kappa=rec["n_negative_kappa"], kappa_negative=rec["kappa_negative"],
        label_negative_kappa=quantum_labels(rec["kappa_negative"], rec["n_negative_kappa"]),
        E_negative_kappa=rec["E_negative_kappa"],
        n_positive_kappa=rec["n_positive_kappa"], kappa_positive=rec["kappa_positive"],
        label_positive_kappa=quantum_labels(rec["kappa_positive"], rec["n_positive_kappa"]),
        E_positive_kappa=rec["E_positive_kappa"],
    )


def rows_from_json(text: str) -> list[SpectrumRow]:
    return [row_from_record(r) for r in json.loads(text)["rows"]]


# --- argument plumbing ----------------------------------------------------------

def _common(p: argparse.ArgumentParser, state: bool = True):
    p.add_argument("--format", choices=("csv", "json", "pretty"), default="csv")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--stamp", action="store_true", help="add a generation timestamp to the metadata")
    if not state:
        return
    p.add_argument("--symmetry", choices=[s.value for s in Symmetry], default="spin")
    p.add_argument("--M", type=float, default=1.0)
    p.add_argument("--D", type=float, default=15.0)
    p.add_argument("--a", type=float, default=0.1)
    p.add_argument("--re", type=float, default=0.8)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--A", type=float, default=0.0)
    p.add_argument("--n", type=int, default=0)
    p.add_argument("--kappa", type=int, default=-1)
    p.add_argument("--b-convention", choices=B_CONVENTIONS, default=STANDARD,
                   help="shape constant: standard b = e^(a r_e) - 1, tabulated b = e^(2 a r_e) + 1")


def _spec(args, **over):
    kw = dict(M=args.M, D=args.D, a=args.a, r_e=args.re, C=args.C, A=args.A, n=args.n,
              kappa=args.kappa, convention=args.b_convention)
    kw.update(over)
    return make_problem(args.symmetry, **kw)


def _state_meta(spec) -> dict:
    p = spec.potential
    return {"symmetry": spec.symmetry.value, "M": spec.M, "D": p.D, "a": p.a, "r_e": p.r_e,
            "b_convention": p.convention, "b": p.b, "C": spec.C, "A": spec.A,
            "n": spec.n, "kappa": spec.kappa}


# --- solve --------------------------------------------------------------------------

def cmd_solve(args) -> int:
    spec = _spec(args)
    roots = [r for r in solve_energy(spec) if r.admissible]
    if not roots:
        raise NoRootFound("no admissible root")
    label = str(quantum_labels(spec.kappa, spec.n))
    records = [{"label": label, "E": r.E, "residual": r.residual_at_root,
                "bracket_lo": r.bracket[0], "bracket_hi": r.bracket[1], "iterations": r.iterations}
               for r in roots]
    out = Output(_state_meta(spec), ["label", "E", "residual", "bracket_lo", "bracket_hi", "iterations"],
                 records, "roots")
    emit(render(out, args.format, args.stamp), args.out)
    return 0


# --- table ----------------------------------------------------------------------------

def _custom_preset(args) -> Preset:
    template = TABLE1 if args.symmetry == Symmetry.SPIN.value else TABLE2
    make_problem(args.symmetry, M=args.M, D=args.D, a=args.a, r_e=args.re, C=args.C, A=args.A,
                 convention=args.b_convention)
    return Preset(name="custom", symmetry=template.symmetry, M=args.M, D=args.D, a=args.a,
                  convention=args.b_convention, blocks=((args.C, args.re),), A_values=(args.A,),
                  rows=template.rows)


def _evaluate(job):
    try:
        return evaluate_row(job), None
    except DiracError as exc:
        return None, f"{type(exc).__name__}: {exc}"


def cmd_table(args) -> int:
    preset = get_preset(args.preset) if args.preset else _custom_preset(args)
    jobs = table_jobs(preset)
    nw = workers()
    if nw > 1:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(_evaluate, jobs))
    else:
        results = [_evaluate(j) for j in jobs]
    rows = [r for r, _ in results if r is not None]
    failures = [msg for _, msg in results if msg is not None]
    meta = {"preset": preset.name, "symmetry": preset.symmetry.value, "M": preset.M, "D": preset.D,
            "a": preset.a, "b_convention": preset.convention}
    status = 0
    if failures:
        meta["failed_rows"] = len(failures)
        for msg in failures:
            print(f"row failed: {msg}", file=sys.stderr)
        status = 2
    if args.diff:
        diffs = diff_against_reference(rows, load_reference(args.diff))
        worst = max_abs_delta(diffs)
        meta["max_abs_delta_E"] = worst
        print(f"max |dE| vs {args.diff}: {worst:.3e} over {len(diffs)} energies", file=sys.stderr)
        if not worst <= args.diff_tol:
            status = 2
    out = Output(meta, ROW_COLUMNS, [row_to_record(r) for r in rows], "rows")
    emit(render(out, args.format, args.stamp), args.out)
    return status


# --- wavefunction -----------------------------------------------------------------

def cmd_wavefunction(args) -> int:
    if args.points < 3:
        raise UsageError("--points must be at least 3")
    spec = _spec(args)
    root = physical_root(spec)
    a = spec.potential.a
    r = default_grid(a, args.points, r_min=args.rmin, r_max=args.rmax)
    primary = primary_component(r, root, spec)
    slope = primary_derivative(r, root, spec)
    meta = {**_state_meta(spec), "E": root.E}
    if args.normalize:
        norm = normalize(lambda x: primary_component(x, root, spec), a)
        primary = norm.constant * primary
        slope = norm.constant * slope
        check = normalize(lambda x: norm.constant * primary_component(x, root, spec), a)
        meta["normalization_constant"] = norm.constant
        meta["integral_of_square_after_normalize"] = check.raw_integral
    partner = partner_component(r, primary, root, spec, derivative=slope)
    if spec.symmetry is Symmetry.SPIN:
        F, G = primary, partner
    else:
        F, G = partner, primary
    meta["primary_nodes"] = count_nodes(primary)
    records = [{"r": float(x), "z": float(math.exp(-a * x)), "F": float(f), "G": float(g)}
               for x, f, g in zip(r, F, G)]
    emit(render(Output(meta, ["r", "z", "F", "G"], records, "samples"), args.format, args.stamp), args.out)
    return 0


# --- verify -------------------------------------------------------------------------

@dataclass(frozen=True)
class VerifyJob:
    spec: object
    n_display: int
    oracle: str
    E_reference: float | None = None


def _verify_one(job: VerifyJob) -> dict:
    from .oracle import bracket_around, nu_quantization_residual, shoot_eigenvalue
    spec = job.spec
    rec = {"symmetry": spec.symmetry.value, "C": spec.C, "r_e": spec.potential.r_e, "A": spec.A,
           "n": job.n_display, "nu": spec.n, "kappa": spec.kappa,
           "E_analytic": None, "E_shoot": None, "delta_E": None, "nu_residual": None,
           "nodes": None, "E_reference": job.E_reference, "error": None, "ok": False}
    try:
        E = physical_root(spec).E
        rec["E_analytic"] = E
        ok = True
        if job.oracle in ("nu", "both"):
            rec["nu_residual"] = nu_quantization_residual(E, spec)
            ok &= abs(rec["nu_residual"]) <= NU_TOL
        if job.oracle in ("shooting", "both"):
            shot = shoot_eigenvalue(spec, bracket_around(E, spec))
            rec["E_shoot"], rec["nodes"] = shot.E, shot.nodes
            rec["delta_E"] = shot.E - E
            ok &= abs(rec["delta_E"]) <= SHOOT_TOL and shot.nodes == spec.n
        if job.E_reference is not None:
            ok &= abs(E - job.E_reference) <= DIFF_TOL
        rec["ok"] = bool(ok)
    except DiracError as exc:
        rec["error"] = f"{type(exc).__name__}: {exc}"
    return rec


VERIFY_COLUMNS = ["symmetry", "C", "r_e", "A", "n", "nu", "kappa", "E_analytic", "E_shoot",
                  "delta_E", "nu_residual", "nodes", "E_reference", "ok", "error"]


def _verify_jobs(args) -> list[VerifyJob]:
    ref = {}
    if args.reference:
        ref = {e.key: e.E for e in load_reference(args.reference)}
    if args.preset:
        jobs = []
        for rj in table_jobs(get_preset(args.preset)):
            for spec, n_disp in zip(rj.specs(), (rj.n_neg, rj.n_pos)):
                key = (rj.C, rj.r_e, rj.A, n_disp, spec.kappa)
                jobs.append(VerifyJob(spec, n_disp, args.oracle, ref.get(key)))
        return jobs
    spec = _spec(args)
    key = (spec.C, spec.potential.r_e, spec.A, spec.n, spec.kappa)
    return [VerifyJob(spec, spec.n, args.oracle, ref.get(key))]


def cmd_verify(args) -> int:
    jobs = _verify_jobs(args)
    nw = workers()
    if nw > 1:
        with ProcessPoolExecutor(max_workers=nw) as pool:
            records = list(pool.map(_verify_one, jobs))
    else:
        records = [_verify_one(j) for j in jobs]
    bad = [r for r in records if not r["ok"]]
    meta = {"oracle": args.oracle, "state_count": len(records), "failed": len(bad),
            "shooting_tolerance": SHOOT_TOL, "nu_tolerance": NU_TOL}
    if args.preset:
        meta["preset"] = args.preset
    for r in bad:
        print(f"state n={r['n']} kappa={r['kappa']} C={fmt(r['C'])} r_e={fmt(r['r_e'])} "
              f"A={fmt(r['A'])} failed {r['error'] or 'tolerance'}", file=sys.stderr)
    kind = "json" if args.format is None else args.format
    emit(render(Output(meta, VERIFY_COLUMNS, records, "states"), kind, args.stamp), args.out)
    return 2 if bad else 0


# --- approx -----------------------------------------------------------------------

def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("need at least one value")
    return vals


def cmd_approx(args) -> int:
    from .oracle import approx_curves, approximation_error_report
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    if not args.rmin > 0:
        raise DomainError("--rmin must be positive")
    if not args.rmax > args.rmin:
        raise UsageError("--rmax must exceed --rmin")
    r = np.linspace(args.rmin, args.rmax, args.points)
    curves = {a: approx_curves(a, r) for a in args.a_values}
    cols = ["r", "f1"] + [f"f2(a={a:g})" for a in args.a_values]
    records = []
    for i, x in enumerate(r):
        rec = {"r": float(x), "f1": curves[args.a_values[0]][i].f1}
        for a in args.a_values:
            rec[f"f2(a={a:g})"] = curves[a][i].f2
        records.append(rec)
    meta = {"a_values": ",".join(f"{a:g}" for a in args.a_values)}
    if args.error_report:
        spec = _spec(args)
        rep = approximation_error_report(spec, tuple(args.a_values))
        meta.update(_state_meta(spec))
        for e in rep.entries:
            meta[f"delta_E(a={e.a:g})"] = e.delta
    emit(render(Output(meta, cols, records, "points"), args.format, args.stamp), args.out)
    return 0


# --- entry point --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sdf-dirac", description="Dirac bound states with a shifted Deng-Fan "
                     "potential and a Yukawa-like tensor term.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="admissible energy roots of one state")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("table", help="doublet table for a preset or a custom block")
    _common(p)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--diff", help="reference CSV (or table1/table2) to compare against")
    p.add_argument("--diff-tol", type=float, default=DIFF_TOL)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("wavefunction", help="sample both spinor components")
    _common(p)
    p.add_argument("--rmin", type=float, default=None)
    p.add_argument("--rmax", type=float, default=None)
    p.add_argument("--points", type=int, default=2000)
    p.add_argument("--normalize", action="store_true")
    p.set_defaults(func=cmd_wavefunction)

    p = sub.add_parser("verify", help="check analytic roots against the oracles")
    _common(p)
    p.set_defaults(format=None)
    p.add_argument("--preset", choices=sorted(PRESETS))
    p.add_argument("--oracle", choices=("shooting", "nu", "both"), default="both")
    p.add_argument("--reference", help="reference CSV of energies to compare against")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("approx", help="1/r^2 against its exponential replacement")
    _common(p)
    p.add_argument("--a-values", type=_float_list, default=[0.1, 0.5, 1.0])
    p.add_argument("--rmin", type=float, default=0.05)
    p.add_argument("--rmax", type=float, default=10.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--error-report", action="store_true",
                   help="also shoot the state with exact and replaced terms for each a")
    p.set_defaults(func=cmd_approx)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:   # usage errors, --help, --version
        return exc.code
    try:
        return args.func(args)
    except (UsageError, ValidationError, DomainError) as exc:
        print(f"sdf-dirac {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except DiracError as exc:
        print(f"sdf-dirac {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"sdf-dirac {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
