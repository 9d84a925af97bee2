"""Command-line experiment runner.

Subcommands: soliton, interact, wavemaker, pscan, compare.  Each run
writes report.csv (one diagnostics row per record time), profile_t*.dat
files (two columns: x, U at the knots) and manifest.txt echoing every
parameter.  compare checks a report against the bundled reference tables
at documented tolerances.

Exit codes: 0 success, 1 usage/config error, 2 numerical failure,
3 comparison failure.
"""

import argparse
import csv
import math
import sys
from dataclasses import dataclass, fields
from importlib import resources
from pathlib import Path

from . import __version__
from .assembly import SingularSystemError
from .basis import DegenerateTensionError, make_basis
from .diagnostics import grid, p_scan
from .problems import (
    ExactSoliton,
    SolitonSpec,
    WaveMakerForcing,
    WaveMakerSpec,
    soliton_ic,
    two_soliton_ic,
    zero_profile,
)
from .solver import RLWProblem, RLWSolver

__all__ = ["main", "ExperimentConfig", "run_experiment", "compare_tables"]


@dataclass
class ExperimentConfig:
    experiment: str
    p: float
    h: float
    dt: float
    t_final: float
    domain: tuple
    epsilon: float = 1.0
    mu: float = 1.0
    inner_iters: int = 3
    record: tuple = ()
    out: str = "."
    jobs: int = 1
    # soliton / pscan
    c: float = 0.1
    x0: float = 0.0
    # interact
    k1: float = 0.4
    k2: float = 0.3
    x1: float = 15.0
    x2: float = 35.0
    # wavemaker
    u0: float = 2.0
    tau: float = 0.3
    t0: float = 20.0
    # pscan
    candidates: tuple = ()
    fine_halfwidth: float = 0.05
    fine_step: float = 1e-3
    paper_scan: bool = False

    @property
    def n_elements(self):
        a, b = self.domain
        n = (b - a) / self.h
        if abs(n - round(n)) > 1e-9:
            raise ValueError(f"spacing {self.h} does not divide [{a}, {b}]")
        return int(round(n))

    def validate(self):
        a, b = self.domain
        if not b > a:
            raise ValueError(f"empty domain [{a}, {b}]")
        self.n_elements
        if self.t_final < 0:
            raise ValueError("t-final must be nonnegative")
        for t in self.record:
            if t < 0 or t > self.t_final + 1e-9:
                raise ValueError(f"record time {t} outside [0, {self.t_final}]")
        return self


DEFAULTS = {
    "soliton": dict(p=0.01262, h=0.125, dt=0.1, t_final=20.0,
                    domain=(-40.0, 60.0), record=(0.0, 4.0, 8.0, 12.0, 16.0, 20.0)),
    "interact": dict(p=1.0, h=0.3, dt=0.1, t_final=30.0, domain=(0.0, 120.0),
                     record=(0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)),
    "wavemaker": dict(p=1.0, h=0.4, dt=0.1, t_final=100.0, domain=(0.0, 260.0),
                      record=(2.5, 5.0, 7.5, 10.0, 15.0, 20.0, 40.0, 60.0, 80.0, 100.0)),
}
DEFAULTS["pscan"] = dict(DEFAULTS["soliton"], record=(20.0,))


def build_problem(cfg):
    a, b = cfg.domain
    common = dict(epsilon=cfg.epsilon, mu=cfg.mu, a=a, b=b, N=cfg.n_elements,
                  dt=cfg.dt, T=cfg.t_final, inner_iters=cfg.inner_iters)
    if cfg.experiment in ("soliton", "pscan"):
        spec = SolitonSpec(c=cfg.c, x0=cfg.x0, epsilon=cfg.epsilon, mu=cfg.mu)
        problem = RLWProblem(ic=soliton_ic(spec), **common)
        exact = ExactSoliton(spec)
        crest_min = 0.3 * spec.amplitude
    elif cfg.experiment == "interact":
        problem = RLWProblem(ic=two_soliton_ic(cfg.k1, cfg.k2, cfg.x1, cfg.x2),
                             **common)
        exact = None
        crest_min = 1.0
    elif cfg.experiment == "wavemaker":
        spec = WaveMakerSpec(U0=cfg.u0, tau=cfg.tau, t0=cfg.t0)
        problem = RLWProblem(ic=zero_profile,
                             beta1=WaveMakerForcing(spec), **common)
        exact = None
        crest_min = 0.5
    else:
        raise ValueError(f"unknown experiment {cfg.experiment!r}")
    return problem, exact, crest_min


def fmt_num(v):
    """9 significant digits, scientific below 1e-3."""
    if v is None:
        return ""
    v = float(v)
    if v == 0.0:
        return "0"
    if abs(v) < 1e-3:
        return f"{v:.8e}"
    return f"{v:.9g}"


def write_report_csv(report, path):
    n_amp = report.n_amp_columns
    header = ["t", "Linf", "C1", "C2", "C3"] + [f"amp{i+1}" for i in range(n_amp)]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in report.rows:
            amps = list(r.amps) + [None] * (n_amp - len(r.amps))
            w.writerow([fmt_num(r.t), fmt_num(r.linf), fmt_num(r.c1),
                        fmt_num(r.c2), fmt_num(r.c3)] + [fmt_num(a) for a in amps])
        if report.truncated:
            w.writerow(["TRUNCATED", report.truncated])


def write_profile(path, knots, values, t):
    with open(path, "w") as fh:
        fh.write(f"# t = {fmt_num(t)}\n")
        for x, u in zip(knots, values):
            fh.write(f"{x!r} {u!r}\n")


def write_manifest(path, cfg, extra=None):
    items = {"version": __version__}
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(repr(x) for x in v)
        items[f.name] = v
    items["n"] = cfg.n_elements
    items.update(extra or {})
    with open(path, "w") as fh:
        for k, v in items.items():
            fh.write(f"{k}={v}\n")


def run_experiment(cfg):
    """Execute one experiment, write report/profiles/manifest into cfg.out."""
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    problem, exact, crest_min = build_problem(cfg)
    basis = make_basis(cfg.p, cfg.h)
    solver = RLWSolver(problem, basis)

    profiles = []

    def on_record(state):
        profiles.append((state.t, solver.knot_values(state)))

    report = None
    try:
        report = solver.run(cfg.record, exact=exact, crest_min_height=crest_min,
                            on_record=on_record)
    except SingularSystemError as e:
        report = getattr(e, "report", None)
        if report is not None:
            report.truncated = str(e)
            write_report_csv(report, out / "report.csv")
        write_manifest(out / "manifest.txt", cfg, {"status": f"failed: {e}"})
        raise

    write_report_csv(report, out / "report.csv")
    for t, values in profiles:
        write_profile(out / f"profile_t{t:g}.dat", solver.mesh.knots, values, t)
    write_manifest(out / "manifest.txt", cfg, {
        "status": "ok",
        "max_boundary_residual": repr(report.max_boundary_residual),
        "max_end_slope": repr(report.max_end_slope),
    })
    return report


def run_pscan(cfg):
    cfg.validate()
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    problem, exact, _ = build_problem(cfg)
    if cfg.candidates:
        coarse, fine = list(cfg.candidates), None
    elif cfg.paper_scan:
        coarse, fine = grid(0.1, 80.0, 0.1), (0.5, 1e-5)
    else:
        coarse, fine = grid(0.005, 5.0, 0.5), (cfg.fine_halfwidth, cfg.fine_step)
    t_eval = cfg.record[-1] if cfg.record else cfg.t_final
    result = p_scan(problem, exact, coarse, fine=fine, t_eval=t_eval,
                    jobs=cfg.jobs)
    with open(out / "scan.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "Linf"])
        for p, obj in sorted(result.samples):
            w.writerow([fmt_num(p), fmt_num(obj) if math.isfinite(obj) else "inf"])
    write_manifest(out / "manifest.txt", cfg, {
        "status": "ok",
        "best_p": repr(result.best_p),
        "best_objective": repr(result.objective),
    })
    print(f"best p = {result.best_p:g}  (Linf at t={t_eval:g}: {result.objective:.6e})")
    return result


TABLE_TOLERANCES = {
    # column -> (rtol, atol)
    "table2": {"Linf": (0.20, 1e-8), "C1": (0.0, 1e-4), "C2": (0.0, 1e-6),
               "C3": (0.0, 1e-5)},
    "table3": {"Linf": (0.20, 1e-8), "C1": (0.0, 1e-4), "C2": (0.0, 1e-6),
               "C3": (0.0, 1e-5)},
    "table6": {"C1": (1e-3, 0.0), "C2": (1e-3, 0.0), "C3": (1e-3, 0.0)},
    "table7": {"C1": (5e-3, 0.0), "C2": (5e-3, 0.0), "C3": (5e-3, 0.0),
               "amp1": (0.0, 0.05), "amp2": (0.0, 0.05), "amp3": (0.0, 0.05),
               "amp4": (0.0, 0.05), "amp5": (0.0, 0.05)},
}


def reference_path(name):
    return resources.files("rlwgal") / "tables" / f"{name}.csv"


def _read_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and r[0] != "TRUNCATED"]
    header, data = rows[0], rows[1:]
    cols = {name: [] for name in header}
    for row in data:
        for name, cell in zip(header, row):
            cols[name].append(float(cell) if cell.strip() else None)
    return cols


class SchemaMismatch(ValueError):
    pass


def compare_tables(report_path, reference_path, tolerances, rtol=None, atol=None):
    """Cell-wise comparison of a report against a reference table.

    Returns (ok, lines): lines contain one worst-offender summary per
    compared column.  Blank reference cells are skipped.  rtol/atol, when
    given, override every column tolerance.
    """
    rep = _read_csv(report_path)
    ref = _read_csv(reference_path)
    if "t" not in rep or "t" not in ref:
        raise SchemaMismatch("both files need a t column")
    missing = [c for c in ref if c != "t" and c not in rep]
    if missing:
        raise SchemaMismatch(f"report lacks columns {missing}")

    index = {}
    for i, t in enumerate(rep["t"]):
        index[round(t, 9)] = i
    ok = True
    lines = []
    for col in (c for c in ref if c != "t"):
        col_rtol, col_atol = tolerances.get(col, (0.0, 0.0))
        if rtol is not None:
            col_rtol = rtol
        if atol is not None:
            col_atol = atol
        worst = None  # (excess, t, got, want, allowed)
        for j, t in enumerate(ref["t"]):
            want = ref[col][j]
            if want is None:
                continue
            i = index.get(round(t, 9))
            if i is None:
                raise SchemaMismatch(f"report has no row at t={t:g}")
            got = rep[col][i]
            if got is None:
                raise SchemaMismatch(f"report cell {col}@t={t:g} is blank")
            allowed = col_atol + col_rtol * abs(want)
            excess = abs(got - want) - allowed
            if worst is None or excess > worst[0]:
                worst = (excess, t, got, want, allowed)
        if worst is None:
            continue
        excess, t, got, want, allowed = worst
        status = "ok" if excess <= 0 else "FAIL"
        if excess > 0:
            ok = False
        lines.append(f"{col:>5s}: worst at t={t:g}: got {got:.8g}, want {want:.8g} "
                     f"(|diff| {abs(got - want):.3e}, allowed {allowed:.3e}) {status}")
    return ok, lines


def _add_common(sp):
    sp.add_argument("--p", type=float, help="tension parameter")
    sp.add_argument("--h", dest="h", type=float, help="knot spacing")
    sp.add_argument("--n", dest="n", type=int, help="element count (alternative to --h)")
    sp.add_argument("--dt", type=float, help="time step")
    sp.add_argument("--t-final", type=float, help="final time")
    sp.add_argument("--domain", type=float, nargs=2, metavar=("A", "B"))
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--inner-iters", type=int)
    sp.add_argument("--out", help="output directory")
    sp.add_argument("--record", help="comma-separated record times")
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--config", help="key=value config file")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser():
    parser = _Parser(prog="rlwgal",
                     description="Exponential B-spline Galerkin RLW solver")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("soliton", help="single solitary wave with exact solution")
    _add_common(sp)
    sp.add_argument("--c", type=float, help="amplitude parameter (amplitude 3c)")
    sp.add_argument("--x0", type=float, help="initial crest position")

    sp = sub.add_parser("interact", help="two-soliton interaction")
    _add_common(sp)
    sp.add_argument("--k1", type=float)
    sp.add_argument("--k2", type=float)
    sp.add_argument("--x1", type=float, help="first wave center")
    sp.add_argument("--x2", type=float, help="second wave center")

    sp = sub.add_parser("wavemaker", help="wave generation by boundary forcing")
    _add_common(sp)
    sp.add_argument("--u0", type=float, help="forcing amplitude")
    sp.add_argument("--tau", type=float, help="ramp duration")
    sp.add_argument("--t0", type=float, help="forcing duration")

    sp = sub.add_parser("pscan", help="scan the tension parameter")
    _add_common(sp)
    sp.add_argument("--c", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--candidates", help="comma-separated explicit p grid")
    sp.add_argument("--fine-halfwidth", type=float)
    sp.add_argument("--fine-step", type=float)
    sp.add_argument("--paper-scan", action="store_true", default=None,
                    help="full-fidelity scan: [0,80] step 0.1, then 1e-5 refinement (slow)")

    sp = sub.add_parser("compare", help="compare a report against a bundled table")
    sp.add_argument("report", help="path to a report.csv")
    sp.add_argument("--table", choices=sorted(TABLE_TOLERANCES),
                    help="bundled reference table")
    sp.add_argument("--reference", help="explicit reference CSV path")
    sp.add_argument("--rtol", type=float, help="override relative tolerance")
    sp.add_argument("--atol", type=float, help="override absolute tolerance")
    return parser


def _parse_floats(text):
    return tuple(float(tok) for tok in text.replace(",", " ").split())


def read_config_file(path):
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = val
    return out


_TUPLE_KEYS = {"domain", "record", "candidates"}
_INT_KEYS = {"inner_iters", "jobs"}
_STR_KEYS = {"out", "experiment"}
_BOOL_KEYS = {"paper_scan"}


def coerce(key, value):
    if key in _TUPLE_KEYS:
        return _parse_floats(value) if isinstance(value, str) else tuple(value)
    if key in _INT_KEYS:
        return int(value)
    if key in _STR_KEYS:
        return str(value)
    if key in _BOOL_KEYS:
        return value if isinstance(value, bool) else value.lower() in ("1", "true", "yes")
    return float(value)


def make_config(command, args):
    """Defaults, overridden by the config file, overridden by flags."""
    values = dict(DEFAULTS[command], experiment=command, out=".")
    if args.config:
        for key, val in read_config_file(args.config).items():
            if key == "n":
                values["_n"] = int(val)
            else:
                values[key] = coerce(key, val)
    cfg_fields = {f.name for f in fields(ExperimentConfig)}
    n_override = values.pop("_n", None)
    for key, val in vars(args).items():
        if key in ("command", "config") or val is None:
            continue
        if key == "n":
            n_override = val
        elif key in cfg_fields:
            values[key] = coerce(key, val) if isinstance(val, str) else val
    unknown = set(values) - cfg_fields
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cfg = ExperimentConfig(**values)
    if n_override is not None:
        a, b = cfg.domain
        cfg.h = (b - a) / n_override
    return cfg.validate()


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            if bool(args.table) == bool(args.reference):
                print("error: give exactly one of --table or --reference",
                      file=sys.stderr)
                return 1
            if args.table:
                ref = reference_path(args.table)
                tol = TABLE_TOLERANCES[args.table]
            else:
                ref = args.reference
                tol = {}
            try:
                ok, lines = compare_tables(args.report, ref, tol,
                                           rtol=args.rtol, atol=args.atol)
            except SchemaMismatch as e:
                print(f"schema mismatch: {e}", file=sys.stderr)
                return 1
            for line in lines:
                print(line)
            print("PASS" if ok else "FAIL")
            return 0 if ok else 3
        cfg = make_config(args.command, args)
        if args.command == "pscan":
            run_pscan(cfg)
        else:
            report = run_experiment(cfg)
            last = report.rows[-1]
            print(f"done: {len(report.rows)} rows, final t={last.t:g}"
                  + (f", Linf={last.linf:.6e}" if last.linf is not None else ""))
        return 0
    except (ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (SingularSystemError, DegenerateTensionError, RuntimeError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
