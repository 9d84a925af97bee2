"""Crank-Nicolson time integration of the RLW equation u_t + u_x +
eps*u*u_x - mu*u_xxt = 0 in the Galerkin exponential B-spline basis.

The semi-discrete system (A - mu*D) ddelta/dt + (B + eps*C(delta)) delta = 0
is advanced by averaging between time levels; the implicit nonlinear
operator is resolved by a fixed small number of extrapolate-and-resolve
passes per step.  Dirichlet values at both ends are imposed by deleting
the first and last Galerkin equations and eliminating delta_{-1},
delta_{N+1} through the end-value identities.
"""

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .basis import Mesh, eval_piece, make_mesh
from .assembly import (
    BandMatrix,
    BandedSystem,
    SingularSystemError,
    apply_nonlinear,
    assemble_global,
    band_matvec,
    band_solve,
    element_matrices,
)

__all__ = [
    "RLWProblem",
    "CoefficientVector",
    "RLWSolver",
    "fit_initial",
    "step",
    "run",
    "knot_values",
    "knot_derivatives",
    "evaluate_solution",
]

BoundaryValue = Union[float, Callable[[float], float]]


def _as_fn(beta) -> Callable[[float], float]:
    if callable(beta):
        return beta
    val = float(beta)
    return lambda t: val


@dataclass(frozen=True)
class RLWProblem:
    """One initial/boundary-value problem for the RLW equation."""

    epsilon: float
    mu: float
    a: float
    b: float
    N: int
    dt: float
    T: float
    ic: Callable[[np.ndarray], np.ndarray]
    beta1: BoundaryValue = 0.0
    beta2: BoundaryValue = 0.0
    inner_iters: int = 3

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.mu > 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if not self.dt > 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.T < 0.0:
            raise ValueError(f"final time must be nonnegative, got {self.T}")
        if self.inner_iters < 1:
            raise ValueError("need at least one inner pass per step")

    @property
    def h(self):
        return (self.b - self.a) / self.N

    def mesh(self) -> Mesh:
        return make_mesh(self.a, self.b, self.N)


@dataclass(frozen=True)
class CoefficientVector:
    """Spline coefficients delta_{-1..N+1} at time t (delta[i+1] = delta_i)."""

    delta: np.ndarray
    t: float


def knot_values(basis, delta):
    """U at the knots: alpha1*d_{m-1} + d_m + alpha1*d_{m+1}, m = 0..N."""
    a1 = basis.alpha1
    return a1 * delta[:-2] + delta[1:-1] + a1 * delta[2:]


def knot_derivatives(basis, delta):
    """U_x at the knots: alpha2*(d_{m-1} - d_{m+1})."""
    return basis.alpha2 * (delta[:-2] - delta[2:])


def evaluate_solution(basis, mesh, delta, x, deriv=0):
    """U (or a derivative) anywhere in [a, b] by summing the four local splines."""
    x = float(x)
    m = int(np.floor((x - mesh.a) / mesh.h))
    m = min(max(m, 0), mesh.N - 1)
    total = 0.0
    for i in range(m - 1, m + 3):
        total += delta[i + 1] * eval_piece(basis, i, x, deriv, origin=mesh.a)
    return total


def fit_initial(problem, basis):
    """Initial coefficients: interpolate the initial profile at every knot
    with zero end slopes.

    The two slope conditions give delta_{-1} = delta_1 and
    delta_{N+1} = delta_{N-1}, leaving a tridiagonal system of size N+1.
    """
    mesh = problem.mesh()
    f = np.asarray(problem.ic(mesh.knots), dtype=float)
    n = mesh.N + 1
    a1 = basis.alpha1
    data = np.zeros((3, n))
    data[0, 1:] = a1   # super-diagonal
    data[1, :] = 1.0   # diagonal
    data[2, :-1] = a1  # sub-diagonal
    data[0, 1] = 2.0 * a1
    data[2, -2] = 2.0 * a1
    sys = BandedSystem(BandMatrix(data, 1, 1), f)
    core = band_solve(sys, t=0.0)
    delta = np.empty(mesh.N + 3)
    delta[1:-1] = core
    delta[0] = core[1]
    delta[-1] = core[-2]
    return CoefficientVector(delta=delta, t=0.0)


@dataclass
class Operators:
    """Assembled global operators reused by every step."""

    AmD: BandMatrix      # A - mu*D
    B: BandMatrix
    elem_C: np.ndarray   # 4x4x4 nonlinear element tensor
    N: int


def build_operators(problem, basis, quad_order=8) -> Operators:
    elem = element_matrices(basis, quad_order)
    A, B, D = assemble_global(elem, problem.N)
    AmD = BandMatrix(A.data - problem.mu * D.data, A.kl, A.ku)
    return Operators(AmD=AmD, B=B, elem_C=elem.C, N=problem.N)


def reduce_boundary(full, rhs_full, alpha1, beta_left, beta_right):
    """Delete the first/last equations and eliminate the phantom unknowns.

    full is the (N+3) septa-diagonal operator over delta_{-1..N+1};
    the end-value identities alpha1*d_{-1} + d_0 + alpha1*d_1 = beta_left
    (mirrored on the right) remove columns 0 and N+2.  Returns the
    (N+1)-unknown banded system.
    """
    n = full.n
    ku = full.ku
    ab = full.data[:, 1:n - 1].copy()
    rhs = np.array(rhs_full[1:n - 1], dtype=float, copy=True)
    m = n - 2  # reduced size

    # rows 0 and n-1 of the full system are deleted: drop their entries
    for j in range(1, min(ku, n - 1) + 1):
        ab[ku - j, j - 1] = 0.0
    for j in range(n - 1 - full.kl, n - 1):
        ab[ku + (n - 1) - j, j - 1] = 0.0

    # fold the deleted left column into columns of d_0, d_1
    for r in range(1, full.kl + 1):
        v = full.data[ku + r, 0]
        if v != 0.0:
            ab[ku + (r - 1), 0] -= v / alpha1
            ab[ku + (r - 1) - 1, 1] -= v
            rhs[r - 1] -= v * beta_left / alpha1
    # and the deleted right column into d_N, d_{N-1}
    for r in range(n - 1 - ku, n - 1):
        v = full.data[ku + r - (n - 1), n - 1]
        if v != 0.0:
            rr = r - 1
            ab[ku + rr - (m - 1), m - 1] -= v / alpha1
            ab[ku + rr - (m - 2), m - 2] -= v
            rhs[rr] -= v * beta_right / alpha1
    return BandedSystem(BandMatrix(ab, full.kl, ku), rhs)


def _recover_ends(core, alpha1, beta_left, beta_right):
    delta = np.empty(core.shape[0] + 2)
    delta[1:-1] = core
    delta[0] = (beta_left - core[0] - alpha1 * core[1]) / alpha1
    delta[-1] = (beta_right - core[-1] - alpha1 * core[-2]) / alpha1
    return delta


def step(state, ops, problem, basis, dt=None):
    """Advance one time step.

    The left-hand operator is (A - mu*D) + dt/2*(B + eps*C(.)); the
    nonlinear block uses the previous solution on the first pass and the
    midpoint extrapolation d* = d + (d - d_n)/2 on the following ones.
    inner_iters band solves are performed in total.
    """
    dt = problem.dt if dt is None else float(dt)
    t_new = state.t + dt
    d_n = state.delta
    eps = problem.epsilon
    half = 0.5 * dt
    N = ops.N

    C_n = apply_nonlinear(ops.elem_C, d_n, N)
    rhs_data = ops.AmD.data - half * (ops.B.data + eps * C_n.data)
    rhs_full = band_matvec(rhs_data, 3, 3, d_n)
    b_left = _as_fn(problem.beta1)(t_new)
    b_right = _as_fn(problem.beta2)(t_new)

    # The nonlinear block on the left is evaluated at an estimate of the
    # new solution: the previous level on the first pass, then the
    # overrelaxed update d* = d + (d - d_prev)/2 built from successive
    # iterates, whose fixed point is the fully implicit operator.
    d_prev = d_n
    d_star = d_n
    d_new = d_n
    for it in range(problem.inner_iters):
        C_lhs = C_n if it == 0 else apply_nonlinear(ops.elem_C, d_star, N)
        lhs = BandMatrix(ops.AmD.data + half * (ops.B.data + eps * C_lhs.data), 3, 3)
        sys = reduce_boundary(lhs, rhs_full, basis.alpha1, b_left, b_right)
        core = band_solve(sys, t=t_new)
        if not np.all(np.isfinite(core)):
            raise SingularSystemError("non-finite solution", t=t_new)
        d_new = _recover_ends(core, basis.alpha1, b_left, b_right)
        d_star = d_new + 0.5 * (d_new - d_prev)
        d_prev = d_new
    return CoefficientVector(delta=d_new, t=t_new)


class RLWSolver:
    """Owns the mesh, basis, assembled operators and the time loop."""

    def __init__(self, problem, basis, quad_order=8):
        if abs(basis.h - problem.h) > 1e-12 * problem.h:
            raise ValueError(
                f"basis spacing {basis.h} does not match mesh spacing {problem.h}")
        self.problem = problem
        self.basis = basis
        self.mesh = problem.mesh()
        self.ops = build_operators(problem, basis, quad_order)

    def initial_state(self):
        return fit_initial(self.problem, self.basis)

    def step(self, state, dt=None):
        return step(state, self.ops, self.problem, self.basis, dt)

    def knot_values(self, state):
        return knot_values(self.basis, state.delta)

    def knot_derivatives(self, state):
        return knot_derivatives(self.basis, state.delta)

    def boundary_residual(self, state):
        """Largest end-value mismatch |U(a) - beta1|, |U(b) - beta2| at state.t."""
        u = self.knot_values(state)
        b1 = _as_fn(self.problem.beta1)(state.t)
        b2 = _as_fn(self.problem.beta2)(state.t)
        return max(abs(u[0] - b1), abs(u[-1] - b2))

    def run(self, record_times, exact=None, crest_min_height=None,
            on_record=None):
        """Advance from the fitted initial state to T, recording diagnostics.

        record_times must be multiples of dt inside [0, T].  exact, when
        given, is u(x, t) evaluated at the knots for the error norm.
        Returns a RunReport.
        """
        from .diagnostics import RunReport, invariants_from_samples, refine_crests

        problem = self.problem
        dt = problem.dt
        steps_total = int(round(problem.T / dt)) if problem.T > 0 else 0
        if abs(steps_total * dt - problem.T) > 1e-9 * max(1.0, problem.T):
            raise ValueError(f"final time {problem.T} is not a multiple of dt={dt}")
        record_steps = set()
        for t in record_times:
            n = t / dt
            if abs(n - round(n)) > 1e-6 or t < 0 or round(n) > steps_total:
                raise ValueError(
                    f"record time {t} is not a step multiple inside [0, {problem.T}]")
            record_steps.add(int(round(n)))

        report = RunReport(
            meta={
                "p": self.basis.p, "h": self.mesh.h, "dt": dt,
                "domain": (problem.a, problem.b), "N": problem.N,
                "epsilon": problem.epsilon, "mu": problem.mu,
                "inner_iters": problem.inner_iters,
            })
        state = self.initial_state()

        def record(st):
            u = self.knot_values(st)
            ux = self.knot_derivatives(st)
            c1, c2, c3 = invariants_from_samples(u, ux, self.mesh.h, problem.mu)
            linf = None
            if exact is not None:
                linf = float(np.max(np.abs(exact(self.mesh.knots, st.t) - u)))
            amps = ()
            if crest_min_height is not None:
                amps = tuple(a for _, a in
                             refine_crests(self.mesh.knots, u, crest_min_height))
            report.append(st.t, linf, c1, c2, c3, amps)
            if on_record is not None:
                on_record(st)

        if 0 in record_steps:
            record(state)
        try:
            for n in range(1, steps_total + 1):
                state = self.step(state)
                # keep t on the exact step grid (avoids accumulation drift)
                state = CoefficientVector(delta=state.delta, t=n * dt)
                report.track_boundary(self.boundary_residual(state))
                ux = self.knot_derivatives(state)
                report.track_end_slope(max(abs(ux[0]), abs(ux[-1])))
                if n in record_steps:
                    record(state)
        except SingularSystemError as e:
            e.report = report  # partial diagnostics up to the failure
            raise
        return report


def run(problem, basis, record_times, exact=None, crest_min_height=None,
        quad_order=8):
    """Convenience wrapper: assemble, fit, advance and report."""
    return RLWSolver(problem, basis, quad_order).run(
        record_times, exact=exact, crest_min_height=crest_min_height)
