"""Error norms, conservation integrals, crest tracking and the tension scan.

The three conserved quantities (mass, momentum, energy analogues)

    C1 = int u,  C2 = int u^2 + mu u_x^2,  C3 = int u^3 + 3 u^2

are approximated by the trapezoidal rule over the knot values of the
spline solution; u and u_x at the knots come from the three-term knot
identities of the basis.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .solver import knot_values, knot_derivatives

__all__ = [
    "RunReport",
    "linf_error",
    "invariants",
    "invariants_from_samples",
    "track_crests",
    "refine_crests",
    "p_scan",
]


@dataclass
class ReportRow:
    t: float
    linf: float | None
    c1: float
    c2: float
    c3: float
    amps: tuple


@dataclass
class RunReport:
    """Per-time diagnostics of one run plus scalar run-level trackers."""

    meta: dict = field(default_factory=dict)
    rows: list = field(default_factory=list)
    max_boundary_residual: float = 0.0
    max_end_slope: float = 0.0
    truncated: str | None = None

    def append(self, t, linf, c1, c2, c3, amps=()):
        for v in (c1, c2, c3):
            if not math.isfinite(v):
                raise ValueError(f"non-finite invariant at t={t}")
        if self.rows and t <= self.rows[-1].t:
            raise ValueError("report rows must be strictly increasing in t")
        self.rows.append(ReportRow(t, linf, c1, c2, c3, tuple(amps)))

    def track_boundary(self, residual):
        self.max_boundary_residual = max(self.max_boundary_residual, residual)

    def track_end_slope(self, slope):
        self.max_end_slope = max(self.max_end_slope, slope)

    def row_at(self, t, tol=1e-9):
        for row in self.rows:
            if abs(row.t - t) <= tol:
                return row
        raise KeyError(f"no report row at t={t}")

    @property
    def n_amp_columns(self):
        return max((len(r.amps) for r in self.rows), default=0)


def linf_error(state, basis, mesh, exact):
    """Largest knot-wise difference between the exact profile and the spline."""
    u = knot_values(basis, state.delta)
    return float(np.max(np.abs(np.asarray(exact(mesh.knots)) - u)))


def invariants_from_samples(u, ux, h, mu):
    """Trapezoidal C1, C2, C3 from knot samples of u and u_x."""
    u = np.asarray(u, dtype=float)
    ux = np.asarray(ux, dtype=float)
    c1 = np.trapezoid(u, dx=h)
    c2 = np.trapezoid(u * u + mu * ux * ux, dx=h)
    c3 = np.trapezoid(u ** 3 + 3.0 * u * u, dx=h)
    return float(c1), float(c2), float(c3)


def invariants(state, basis, mesh, mu):
    """C1, C2, C3 of a solver state."""
    u = knot_values(basis, state.delta)
    ux = knot_derivatives(basis, state.delta)
    return invariants_from_samples(u, ux, mesh.h, mu)


def refine_crests(x, u, min_height):
    """Local maxima of the sampled profile above min_height.

    Each interior maximum is sharpened by the vertex of the parabola
    through its three neighbouring samples.  Returns (position, amplitude)
    pairs ordered by position descending, i.e. leading wave first.
    """
    if min_height <= 0.0:
        raise ValueError("min_height must be positive")
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    out = []
    for j in range(1, len(u) - 1):
        if u[j] < min_height:
            continue
        if not (u[j] >= u[j - 1] and u[j] > u[j + 1]):
            continue
        curv = u[j - 1] - 2.0 * u[j] + u[j + 1]
        if curv >= 0.0:
            pos, amp = x[j], u[j]
        else:
            d = 0.5 * (u[j - 1] - u[j + 1]) / curv
            pos = x[j] + d * (x[j + 1] - x[j])
            amp = u[j] - 0.25 * (u[j - 1] - u[j + 1]) * d
        out.append((float(pos), float(amp)))
    out.sort(key=lambda pa: -pa[0])
    return out


def track_crests(state, basis, mesh, min_height):
    """Crest positions and amplitudes of a solver state."""
    u = knot_values(basis, state.delta)
    return refine_crests(mesh.knots, u, min_height)


@dataclass
class PScanResult:
    best_p: float
    objective: float
    samples: list  # (p, objective) in evaluation order


def _scan_objective(args):
    problem, p, t_eval, exact, quad_order = args
    from .basis import make_basis
    from .solver import RLWSolver

    try:
        basis = make_basis(p, problem.h)
        solver = RLWSolver(problem, basis, quad_order)
        report = solver.run([t_eval], exact=exact)
        return report.row_at(t_eval).linf
    except ArithmeticError:
        return math.inf


def grid(lo, hi, step):
    """Inclusive scan grid lo, lo+step, ..., hi."""
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(n)]


def p_scan(problem, exact, coarse, fine=None, t_eval=None, jobs=1,
           quad_order=8):
    """Pick the tension minimizing the error norm at t_eval.

    coarse is an iterable of candidate tensions; fine, when given, is a
    (halfwidth, step) pair rerunning a refined grid around the coarse
    argmin.  Runs are independent; a failing run scores +inf.  Ties break
    toward smaller p.
    """
    t_eval = problem.T if t_eval is None else t_eval
    candidates = [float(p) for p in coarse]
    if not candidates:
        raise ValueError("empty scan grid")

    def evaluate(ps):
        args = [(problem, p, t_eval, exact, quad_order) for p in ps]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                return list(ex.map(_scan_objective, args))
        return [_scan_objective(a) for a in args]

    samples = list(zip(candidates, evaluate(candidates)))
    best_p, best_obj = min(samples, key=lambda s: (s[1], s[0]))
    if not math.isfinite(best_obj):
        raise RuntimeError("no feasible p: every scanned run failed")

    if fine is not None:
        halfwidth, step = fine
        lo = max(best_p - halfwidth, step)
        ps = [p for p in grid(lo, best_p + halfwidth, step)
              if not any(abs(p - q) < 1e-12 for q, _ in samples)]
        samples += list(zip(ps, evaluate(ps)))
        best_p, best_obj = min(samples, key=lambda s: (s[1], s[0]))
    return PScanResult(best_p=best_p, objective=best_obj, samples=samples)
