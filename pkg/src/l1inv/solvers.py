"""Iterative solvers for l1-penalized and l1-constrained least squares.

Five schemes share one tracing infrastructure:

- ``run_thresholded_landweber``: fixed-threshold shrinkage after a unit
  gradient step (classic iterative soft-thresholding).
- ``run_projected_landweber``: unit gradient step followed by exact
  projection onto the l1 ball.
- ``run_projected_gradient``: adaptive step length from the classical
  steepest-descent ratio, with optional backtracking that enforces the
  step admissibility inequality ``beta*||K dx||^2 <= r*||dx||^2`` (the
  condition under which monotone discrepancy, monotone distance to the
  solution set, and norm convergence are guaranteed).
- ``run_relaxed_radius``: projected gradient onto balls of linearly
  growing radius; a heuristic without a convergence proof, traced and
  flagged as such.
- ``run_pocs``: alternating exact projections onto the affine data-fit
  set and the l1 ball (requires an inverse of the data-space Gram map).

Every run records per-iteration step length, l1 norm, discrepancy,
step norm, admissibility status and wall time, plus the relative error
against a reference minimizer when one is supplied.
"""

import time
from dataclasses import dataclass

import numpy as np

from .prox import project_l1, soft_threshold

__all__ = [
    "StepPolicy",
    "StoppingRule",
    "TraceRecord",
    "SolverTrace",
    "MinimizerDiagnostics",
    "SolverDivergenceError",
    "steepest_descent_beta",
    "condition_b2_holds",
    "run_thresholded_landweber",
    "run_projected_landweber",
    "run_projected_gradient",
    "run_relaxed_radius",
    "run_pocs",
    "verify_fixed_point",
    "minimizer_diagnostics",
]

_MODES = ("fixed-one", "steepest-descent", "steepest-descent-with-B")


class SolverDivergenceError(RuntimeError):
    """Iteration produced a non-finite value; carries the partial trace."""

    def __init__(self, message, trace):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class StepPolicy:
    """Step-length selection rule.

    ``mode`` picks the candidate step: ``fixed-one`` always uses 1,
    the steepest-descent modes use ``||r||^2 / ||K r||^2`` clamped to
    ``[1, beta_max]``.  With ``enforce_b2`` the candidate is shrunk by
    ``backtrack_factor`` until the admissibility inequality holds; a
    unit step always satisfies it when the problem's norm bound is
    sound, so backtracking terminates.
    """

    mode: str = "steepest-descent-with-B"
    beta_max: float = 1e6
    backtrack_factor: float = 0.9
    enforce_b2: bool = True
    max_backtracks: int = 200

    def __post_init__(self):
        if self.mode not in _MODES:
            raise ValueError(f"unknown step mode {self.mode!r}")
        if self.mode == "steepest-descent-with-B" and not self.enforce_b2:
            raise ValueError("steepest-descent-with-B requires enforce_b2")
        if self.beta_max < 1.0:
            raise ValueError("beta_max must be at least 1")
        if not 0.0 < self.backtrack_factor < 1.0:
            raise ValueError("backtrack_factor must lie in (0, 1)")

    @staticmethod
    def fixed_one():
        return StepPolicy(mode="fixed-one", enforce_b2=False)

    @staticmethod
    def steepest_descent(enforce_b2=True):
        mode = "steepest-descent-with-B" if enforce_b2 else "steepest-descent"
        return StepPolicy(mode=mode, enforce_b2=enforce_b2)


@dataclass(frozen=True)
class StoppingRule:
    """Stop when ``||x_next - x|| <= tol * max(1, ||x||)`` or at max_iter."""

    tol: float = 1e-8
    max_iter: int = 100000

    def __post_init__(self):
        if self.tol < 0:
            raise ValueError("tolerance must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")


@dataclass(frozen=True)
class TraceRecord:
    n: int
    beta: float
    l1_norm: float
    discrepancy: float
    step_norm: float
    b2_satisfied: bool
    backtracks: int
    wall_time: float
    rel_error: float = None


class SolverTrace:
    """Per-iteration records of one solver run."""

    def __init__(self, solver, initial_discrepancy, heuristic=False):
        self.solver = solver
        self.initial_discrepancy = float(initial_discrepancy)
        self.heuristic = heuristic
        self.converged = False
        self.records = []
        self.iterates = None

    def append(self, record):
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    def column(self, name):
        return [getattr(rec, name) for rec in self.records]

    @property
    def betas(self):
        return np.array(self.column("beta"))

    @property
    def l1_norms(self):
        return np.array(self.column("l1_norm"))

    @property
    def discrepancies(self):
        return np.array(self.column("discrepancy"))

    @property
    def step_norms(self):
        return np.array(self.column("step_norm"))

    @property
    def rel_errors(self):
        return [rec.rel_error for rec in self.records]

    def total_time(self):
        return sum(rec.wall_time for rec in self.records)

    def discrepancy_violations(self, slack=1e-12):
        """Count increases of the discrepancy beyond ``slack * D(x0)``."""
        allowed = slack * self.initial_discrepancy
        values = [self.initial_discrepancy] + self.column("discrepancy")
        return sum(
            1 for a, b in zip(values, values[1:]) if b > a + allowed
        )

    def step_energy(self):
        """Sum of squared step norms (bounded for admissible runs)."""
        return float(sum(rec.step_norm**2 for rec in self.records))

    def iterations_to_error(self, level):
        """First iteration index reaching the given relative error, or None."""
        for rec in self.records:
            if rec.rel_error is not None and rec.rel_error <= level:
                return rec.n
        return None


@dataclass(frozen=True)
class MinimizerDiagnostics:
    """First-order certificate data at an (approximate) constrained minimizer.

    ``tau`` is the sup-norm of the residual correlation; ``gamma_set``
    collects the indices attaining it (within a relative tolerance) and
    the support of any true minimizer must lie inside it, with
    ``<x, sign_vector> == radius``.
    """

    tau: float
    support: np.ndarray
    gamma_set: np.ndarray
    sign_vector: np.ndarray
    fixed_point_residual: float
    inner_product_check: float
    support_in_gamma: bool
    degenerate: bool


def steepest_descent_beta(r_vec, Kr, beta_max=1e6):
    """Classical steepest-descent ratio ``||r||^2 / ||K r||^2``.

    Clamped to ``[1, beta_max]``; a vanishing ``Kr`` with nonzero ``r``
    yields ``beta_max``.  A zero residual direction signals convergence
    and is rejected (the caller should have stopped).
    """
    r_vec = np.asarray(r_vec, dtype=float)
    Kr = np.asarray(Kr, dtype=float)
    r2 = float(r_vec @ r_vec)
    if r2 == 0.0:
        raise ValueError("zero residual direction: iteration has converged")
    k2 = float(Kr @ Kr)
    if k2 == 0.0:
        return float(beta_max)
    return float(min(max(r2 / k2, 1.0), beta_max))


def condition_b2_holds(beta, dx, Kdx, r_bound, rel_tol=1e-14):
    """Check the step admissibility inequality ``beta*||K dx||^2 <= r*||dx||^2``.

    A zero step is trivially admissible.  The comparison allows a tiny
    relative tolerance so unit steps are never rejected through rounding.
    """
    if not 0.0 < r_bound <= 1.0:
        raise ValueError(f"r_bound must lie in (0, 1], got {r_bound}")
    dx = np.asarray(dx, dtype=float)
    dx2 = float(dx @ dx)
    if dx2 == 0.0:
        return True
    Kdx = np.asarray(Kdx, dtype=float)
    lhs = beta * float(Kdx @ Kdx)
    rhs = r_bound * dx2
    return lhs <= rhs * (1.0 + rel_tol)


def _prepare_start(problem, x0):
    if x0 is None:
        return np.zeros(problem.op.cols)
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (problem.op.cols,):
        raise ValueError(
            f"starting point has shape {x0.shape}, expected ({problem.op.cols},)"
        )
    if not np.all(np.isfinite(x0)):
        raise ValueError("starting point contains non-finite entries")
    return x0.copy()


def _relative_error(x, reference, ref_norm):
    if reference is None:
        return None
    return float(np.linalg.norm(x - reference) / ref_norm)


def _finish_record(trace, x, keep_iterates):
    if keep_iterates:
        trace.iterates.append(x.copy())


def _check_finite(trace, *arrays):
    for arr in arrays:
        if not np.all(np.isfinite(arr)):
            raise SolverDivergenceError(
                f"{trace.solver}: non-finite iterate at n={len(trace)}", trace
            )


def _run_descent(
    problem,
    update,
    solver,
    x0,
    stop,
    reference,
    keep_iterates,
    heuristic=False,
    fixed_steps=None,
):
    """Shared iteration loop.

    `update(n, x, Kx, resid)` returns ``(candidate, Kdx, beta, b2_ok,
    backtracks)``; the loop owns tracing, stopping, and divergence
    checks.  The forward image is updated incrementally from ``K dx`` so
    all solvers built on this loop follow bitwise-identical arithmetic
    apart from their step choice.
    """
    stop = stop or StoppingRule()
    x = _prepare_start(problem, x0)
    Kx = problem.op.apply(x)
    resid = problem.y - Kx
    trace = SolverTrace(solver, float(resid @ resid), heuristic=heuristic)
    if keep_iterates:
        trace.iterates = [x.copy()]
    ref_norm = None
    if reference is not None:
        reference = np.asarray(reference, dtype=float)
        ref_norm = float(np.linalg.norm(reference))
        if ref_norm == 0.0:
            raise ValueError("reference minimizer must be nonzero")

    limit = fixed_steps if fixed_steps is not None else stop.max_iter
    for n in range(limit):
        t0 = time.perf_counter()
        result = update(n, x, Kx, resid)
        if result is None:  # zero gradient: already a fixed point
            trace.converged = True
            break
        cand, Kdx, beta, b2_ok, backtracks = result
        _check_finite(trace, cand, Kdx)
        dx = cand - x
        step = float(np.linalg.norm(dx))
        Kx = Kx + Kdx
        resid = problem.y - Kx
        disc = float(resid @ resid)
        _check_finite(trace, (disc,))
        trace.append(
            TraceRecord(
                n=n,
                beta=beta,
                l1_norm=float(np.sum(np.abs(cand))),
                discrepancy=disc,
                step_norm=step,
                b2_satisfied=b2_ok,
                backtracks=backtracks,
                wall_time=time.perf_counter() - t0,
                rel_error=_relative_error(cand, reference, ref_norm),
            )
        )
        x = cand
        _finish_record(trace, x, keep_iterates)
        if fixed_steps is None and step <= stop.tol * max(
            1.0, float(np.linalg.norm(x))
        ):
            trace.converged = True
            break
    return x, trace


def run_thresholded_landweber(
    problem, tau, x0=None, stop=None, reference=None, keep_iterates=False
):
    """Iterative soft-thresholding with fixed threshold `tau`.

    Repeats ``x <- soft_threshold(x + K*(y - Kx), tau)`` until the step
    norm drops below tolerance.  Converges to the minimizer of
    ``||Kx - y||^2 + 2*tau*||x||_1`` when the operator norm is below 1.

    Returns the final iterate and the trace.
    """
    if tau <= 0:
        raise ValueError(f"threshold must be positive, got {tau}")

    def update(n, x, Kx, resid):
        r = problem.op.apply_adjoint(resid)
        cand = soft_threshold(x + r, tau)
        dx = cand - x
        Kdx = problem.op.apply(dx)
        ok = condition_b2_holds(1.0, dx, Kdx, problem.norm_bound)
        return cand, Kdx, 1.0, ok, 0

    return _run_descent(
        problem, update, "thresholded-landweber", x0, stop, reference, keep_iterates
    )


def _projected_update(problem, policy, radius_of):
    def update(n, x, Kx, resid):
        radius = radius_of(n)
        r = problem.op.apply_adjoint(resid)
        if float(r @ r) == 0.0:
            if float(np.sum(np.abs(x))) <= radius:
                return None
            beta = 1.0  # no descent direction, only the projection acts
        elif policy.mode == "fixed-one":
            beta = 1.0
        else:
            Kr = problem.op.apply(r)
            beta = steepest_descent_beta(r, Kr, policy.beta_max)
        backtracks = 0
        while True:
            cand = project_l1(x + beta * r, radius).x
            dx = cand - x
            Kdx = problem.op.apply(dx)
            ok = condition_b2_holds(beta, dx, Kdx, problem.norm_bound)
            if ok or not policy.enforce_b2 or beta <= 1.0:
                break
            backtracks += 1
            if backtracks >= policy.max_backtracks:
                beta = 1.0  # provably admissible fallback
            else:
                beta = max(1.0, beta * policy.backtrack_factor)
        return cand, Kdx, beta, ok, backtracks

    return update


def run_projected_landweber(
    problem, radius, x0=None, stop=None, reference=None, keep_iterates=False
):
    """Unit-step gradient iteration projected onto the l1 ball.

    Every iterate after the first lies in the ball of the given radius.
    Returns the final iterate and the trace.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    update = _projected_update(problem, StepPolicy.fixed_one(), lambda n: radius)
    return _run_descent(
        problem, update, "projected-landweber", x0, stop, reference, keep_iterates
    )


def run_projected_gradient(
    problem,
    radius,
    x0=None,
    policy=None,
    stop=None,
    reference=None,
    keep_iterates=False,
):
    """Projected gradient iteration with adaptive step length.

    The candidate step comes from the steepest-descent ratio; when the
    policy enforces admissibility, failing candidates are shrunk by the
    backtrack factor (a unit step always passes, so the loop terminates).
    Returns the final iterate, the trace, and first-order diagnostics at
    the final point.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    policy = policy or StepPolicy()
    update = _projected_update(problem, policy, lambda n: radius)
    x, trace = _run_descent(
        problem, update, "projected-gradient", x0, stop, reference, keep_iterates
    )
    return x, trace, minimizer_diagnostics(x, problem, radius)


def run_relaxed_radius(
    problem,
    radius,
    n_steps,
    policy=None,
    stop=None,
    reference=None,
    keep_iterates=False,
):
    """Projected gradient with linearly growing radius ``(n+1)*R/N``.

    Starts from the origin (mandatory for the schedule to make sense)
    and runs exactly `n_steps` iterations, finishing at the full radius.
    No convergence guarantee exists for this scheme; the trace is
    flagged as heuristic.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    if n_steps < 1:
        raise ValueError("need at least one step")
    policy = policy or StepPolicy()
    schedule = lambda n: (n + 1) * radius / n_steps
    update = _projected_update(problem, policy, schedule)
    return _run_descent(
        problem,
        update,
        "relaxed-radius",
        None,
        stop,
        reference,
        keep_iterates,
        heuristic=True,
        fixed_steps=n_steps,
    )


def run_pocs(
    problem,
    radius,
    gram_inverse,
    x0=None,
    stop=None,
    reference=None,
    keep_iterates=False,
):
    """Alternating projections onto the affine data-fit set and the l1 ball.

    The affine step ``x + K*(K K*)^{-1}(y - Kx)`` lands exactly on
    ``{x : Kx = y}``; `gram_inverse` must apply ``(K K*)^{-1}`` (a dense
    factorization is fine at desk scale, see
    ``harness.make_gram_inverse``).  When the two sets intersect, the
    limit is a ball point with exact data fit; for orthonormal-row
    operators the scheme coincides with the projected unit-step
    iteration.
    """
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")

    def update(n, x, Kx, resid):
        affine = x + problem.op.apply_adjoint(gram_inverse(resid))
        cand = project_l1(affine, radius).x
        dx = cand - x
        Kdx = problem.op.apply(dx)
        ok = condition_b2_holds(1.0, dx, Kdx, problem.norm_bound)
        return cand, Kdx, 1.0, ok, 0

    return _run_descent(
        problem, update, "pocs", x0, stop, reference, keep_iterates
    )


def verify_fixed_point(x, problem, radius, betas=(1.0, 2.0, 5.0)):
    """Largest fixed-point defect ``||P(x + beta*K*(y - Kx)) - x||``.

    A point of the ball minimizes the discrepancy on it exactly when the
    defect vanishes for one (equivalently, every) positive step length.
    """
    x = np.asarray(x, dtype=float)
    r = problem.residual_correlation(x)
    worst = 0.0
    for beta in betas:
        if beta <= 0:
            raise ValueError("step lengths must be positive")
        moved = project_l1(x + beta * r, radius).x
        worst = max(worst, float(np.linalg.norm(moved - x)))
    return worst


def minimizer_diagnostics(x, problem, radius, gamma_tol=1e-6):
    """First-order diagnostics at an approximate constrained minimizer.

    Report-only: computes the residual-correlation sup norm, the index
    set attaining it (within `gamma_tol` relative), the sign vector on
    that set, the unit-step fixed-point defect, and the inner product
    that should equal the radius at a true minimizer.  A vanishing
    residual correlation (unconstrained optimum inside the ball) is
    flagged as degenerate, with the attainment set covering everything.
    """
    x = np.asarray(x, dtype=float)
    c = problem.residual_correlation(x)
    tau = float(np.max(np.abs(c))) if c.size else 0.0
    degenerate = tau == 0.0
    if degenerate:
        gamma = np.arange(x.size)
    else:
        gamma = np.nonzero(np.abs(c) >= tau * (1.0 - gamma_tol))[0]
    sign_vector = np.zeros(x.size)
    sign_vector[gamma] = np.sign(c[gamma])
    support = np.nonzero(x)[0]
    return MinimizerDiagnostics(
        tau=tau,
        support=support,
        gamma_set=gamma,
        sign_vector=sign_vector,
        fixed_point_residual=verify_fixed_point(x, problem, radius, (1.0,)),
        inner_product_check=float(x @ sign_vector),
        support_in_gamma=bool(np.isin(support, gamma).all()),
        degenerate=degenerate,
    )
