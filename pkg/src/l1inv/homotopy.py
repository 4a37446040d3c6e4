"""Exact solution paths for l1-penalized least squares (Lasso homotopy).

The minimizer of ``||Kx - y||^2 + 2*tau*||x||_1`` is piecewise linear in
``tau``.  Starting from the empty model at ``tau = ||K* y||_inf``, the
path is traced breakpoint by breakpoint: on each segment the active
coefficients move along the direction solving ``(K_A* K_A) u = s`` (with
``s`` the active sign pattern) so the active correlations keep pace with
the decreasing penalty; a breakpoint occurs when an inactive correlation
catches up (join) or an active coefficient crosses zero (drop, the Lasso
variant).  Columns are used exactly as given, without any normalization.

The Gram submatrix is refactorized at every breakpoint: the oracle
favors correctness over speed and is intended for desk-scale certified
ground truth, not large problems (cost is cubic in the support size).
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

__all__ = [
    "Breakpoint",
    "HomotopyPath",
    "DegeneratePathError",
    "solve_homotopy",
    "tradeoff_curve",
]

# Events closer together than this (relative to the starting penalty)
# are treated as simultaneous degenerate ties.
_TIE_WINDOW = 1e-12


class DegeneratePathError(RuntimeError):
    """Path tracing hit a rank-deficient active Gram matrix.

    The partial path computed so far is attached as ``.path``.
    """

    def __init__(self, message, path):
        super().__init__(message)
        self.path = path


@dataclass(frozen=True)
class Breakpoint:
    """One knot of the piecewise-linear path.

    ``active`` is the support used on the segment following this knot
    (toward smaller penalties).  Residual and correlation vectors are
    stored so curve values between knots can be evaluated exactly.
    """

    tau: float
    x: np.ndarray
    active: tuple
    residual: np.ndarray
    correlation: np.ndarray

    @property
    def l1_norm(self):
        return float(np.sum(np.abs(self.x)))

    @property
    def discrepancy(self):
        return float(self.residual @ self.residual)

    @property
    def support_size(self):
        return int(np.count_nonzero(self.x))


@dataclass
class HomotopyPath:
    """Ordered breakpoints of the exact path, penalty strictly decreasing."""

    breakpoints: list = field(default_factory=list)
    degenerate_ties: bool = False

    @property
    def taus(self):
        return np.array([bp.tau for bp in self.breakpoints])

    @property
    def radii(self):
        return np.array([bp.l1_norm for bp in self.breakpoints])

    @property
    def discrepancies(self):
        return np.array([bp.discrepancy for bp in self.breakpoints])

    def kkt_max_violation(self):
        """Largest optimality defect over all breakpoints.

        Checks that no correlation exceeds the penalty, that active
        correlations attain it, and that signs agree on the support.
        """
        worst = 0.0
        for bp in self.breakpoints:
            c = bp.correlation
            worst = max(worst, float(np.max(np.abs(c), initial=0.0) - bp.tau))
            for i in bp.active:
                worst = max(worst, abs(abs(c[i]) - bp.tau))
            for i in np.nonzero(bp.x)[0]:
                if np.sign(bp.x[i]) != np.sign(c[i]):
                    worst = max(worst, abs(bp.x[i]))
        return worst

    def _segment_for_radius(self, radius):
        radii = self.radii
        if radius > radii[-1] + 1e-9 * max(1.0, radii[-1]):
            raise ValueError(
                f"radius {radius} beyond the computed path (max {radii[-1]})"
            )
        idx = int(np.searchsorted(radii, radius, side="left"))
        if idx == 0:
            return 0, 0, 0.0
        lo, hi = self.breakpoints[idx - 1], self.breakpoints[idx]
        span = hi.l1_norm - lo.l1_norm
        theta = 0.0 if span == 0.0 else (radius - lo.l1_norm) / span
        return idx - 1, idx, min(max(theta, 0.0), 1.0)

    def solution_at_radius(self, radius):
        """Exact point of the path with the given l1 norm."""
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        i, j, theta = self._segment_for_radius(radius)
        return (1.0 - theta) * self.breakpoints[i].x + theta * self.breakpoints[j].x

    def discrepancy_at_radius(self, radius):
        """Exact minimal discrepancy attainable within the given l1 norm.

        Residuals are affine between knots, so the discrepancy there is
        the exact quadratic interpolation, not a linear one.
        """
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        radii = self.radii
        if radius >= radii[-1]:
            return self.breakpoints[-1].discrepancy
        i, j, theta = self._segment_for_radius(radius)
        ri = self.breakpoints[i].residual
        rj = self.breakpoints[j].residual
        mix = (1.0 - theta) * ri + theta * rj
        return float(mix @ mix)


def _as_breakpoint(tau, x, active, matrix, y):
    residual = y - matrix @ x
    return Breakpoint(
        tau=float(tau),
        x=x.copy(),
        active=tuple(active),
        residual=residual,
        correlation=matrix.T @ residual,
    )


def solve_homotopy(problem, tau=None, radius=None, max_breakpoints=None):
    """Exact minimizer of the penalized problem, plus the path of breakpoints.

    Exactly one target must be given: a penalty ``tau > 0`` (returns the
    minimizer of ``||Kx - y||^2 + 2*tau*||x||_1``) or a radius
    ``radius >= 0`` (returns the path point with that l1 norm, which
    minimizes the discrepancy on the corresponding ball).  When the path
    reaches a zero penalty before the requested radius, the final
    least-squares point is returned (the constraint is then inactive).

    Dense materialization of the operator must be feasible; this oracle
    targets desk-scale certification runs.

    Returns
    -------
    (x, HomotopyPath)

    Raises
    ------
    DegeneratePathError
        If the active Gram submatrix becomes rank deficient; the partial
        path is attached to the exception.
    """
    if (tau is None) == (radius is None):
        raise ValueError("specify exactly one of tau= or radius=")
    if tau is not None and tau <= 0:
        raise ValueError(f"penalty target must be positive, got {tau}")
    if radius is not None and radius < 0:
        raise ValueError(f"radius target must be nonnegative, got {radius}")

    matrix = problem.op.to_dense()
    y = np.asarray(problem.y, dtype=float)
    m = matrix.shape[1]
    if max_breakpoints is None:
        max_breakpoints = 8 * m + 16

    x = np.zeros(m)
    c = matrix.T @ y
    tau_now = float(np.max(np.abs(c))) if c.size else 0.0
    path = HomotopyPath()

    if tau_now == 0.0 or (tau is not None and tau >= tau_now):
        # Zero is optimal at and above the starting penalty.
        path.breakpoints.append(_as_breakpoint(tau_now, x, (), matrix, y))
        return x.copy(), path
    if radius is not None and radius == 0.0:
        path.breakpoints.append(_as_breakpoint(tau_now, x, (), matrix, y))
        return x.copy(), path

    active = [int(np.argmax(np.abs(c)))]
    signs = {active[0]: float(np.sign(c[active[0]]))}
    path.breakpoints.append(_as_breakpoint(tau_now, x, tuple(active), matrix, y))

    tie_window = _TIE_WINDOW * max(tau_now, 1.0)
    dropped_at_knot = set()  # blocks immediate re-entry at the same penalty
    for _ in range(4 * max_breakpoints + 16):
        if len(path.breakpoints) > max_breakpoints:
            break
        cols = matrix[:, active]
        sign_vec = np.array([signs[i] for i in active])
        gram = cols.T @ cols
        try:
            factor = cho_factor(gram)
        except LinAlgError as exc:
            raise DegeneratePathError(
                f"rank-deficient active Gram matrix at penalty {tau_now} "
                f"(support size {len(active)})",
                path,
            ) from exc
        u = cho_solve(factor, sign_vec)
        data_dir = cols @ u
        corr_rate = matrix.T @ data_dir  # d c_j / d(step) with step = tau drop

        # Candidate events as the penalty decreases by delta from tau_now.
        # Joins tied with the current knot (delta ~ 0) are admitted so that
        # exactly tied correlations all enter the model.
        events = []  # (delta, order_index, kind, payload)
        active_set = set(active)
        for j in range(m):
            if j in active_set or j in dropped_at_knot:
                continue
            for target_sign in (1.0, -1.0):
                denom = 1.0 - target_sign * corr_rate[j]
                if denom <= 0.0:
                    continue  # correlation never catches the shrinking penalty
                delta = (tau_now - target_sign * c[j]) / denom
                if delta > -tie_window:
                    events.append((max(delta, 0.0), j, "join", target_sign))
        for pos, i in enumerate(active):
            if u[pos] != 0.0:
                delta = -x[i] / u[pos]
                if delta > tie_window:
                    events.append((delta, i, "drop", pos))

        delta_stop = tau_now  # the penalty cannot drop below zero
        if tau is not None:
            delta_stop = tau_now - tau
        else:
            growth = float(sign_vec @ u)
            l1_now = float(np.sum(np.abs(x)))
            if growth > 0.0:
                delta_radius = (radius - l1_now) / growth
                if delta_radius <= tau_now:
                    delta_stop = delta_radius

        events.sort(key=lambda ev: (ev[0], ev[1]))
        if events and abs(events[0][0] - delta_stop) <= tie_window:
            path.degenerate_ties = True
        if not events or events[0][0] >= delta_stop - tie_window:
            # Target (or the zero-penalty floor) reached on this segment.
            delta = max(delta_stop, 0.0)
            x_final = x.copy()
            x_final[active] += delta * u
            tau_final = tau_now - delta
            bp = _as_breakpoint(max(tau_final, 0.0), x_final, tuple(active), matrix, y)
            if abs(bp.tau - path.breakpoints[-1].tau) > 0.0:
                path.breakpoints.append(bp)
            return x_final, path

        delta, index, kind, payload = events[0]
        if len(events) > 1 and events[1][0] - delta <= tie_window:
            path.degenerate_ties = True

        if delta <= tie_window and kind == "join":
            # Simultaneous tie at the current knot: grow the active set in
            # place without spending a path segment.
            path.degenerate_ties = True
            active.append(index)
            signs[index] = payload
            last = path.breakpoints[-1]
            path.breakpoints[-1] = replace(last, active=tuple(active))
            continue

        x[active] += delta * u
        tau_now -= delta
        if kind == "join":
            active.append(index)
            signs[index] = payload
            dropped_at_knot = set()
        else:
            x[index] = 0.0
            active.pop(payload)
            del signs[index]
            dropped_at_knot = {index}
        # Refresh correlations from scratch to avoid drift along the path.
        c = matrix.T @ (y - matrix @ x)
        path.breakpoints.append(_as_breakpoint(tau_now, x, tuple(active), matrix, y))

    raise DegeneratePathError(
        f"breakpoint budget {max_breakpoints} exhausted at penalty {tau_now}",
        path,
    )


def tradeoff_curve(path, samples=200):
    """Sample the exact attainability frontier traced by the path.

    Returns a list of ``(l1_norm, discrepancy)`` pairs, starting from the
    empty model, with l1 norms nondecreasing and discrepancies
    nonincreasing.  All breakpoints are included; remaining sample budget
    is spread over segments proportionally to their l1 extent, using the
    exact quadratic discrepancy interpolation between knots.
    """
    if not path.breakpoints:
        raise ValueError("cannot sample an empty path")
    points = []

    def add(l1, disc):
        if points and abs(points[-1][0] - l1) == 0.0:
            return
        points.append((float(l1), float(disc)))

    bps = path.breakpoints
    add(bps[0].l1_norm, bps[0].discrepancy)
    total_span = max(bps[-1].l1_norm - bps[0].l1_norm, 0.0)
    extra_budget = max(samples - len(bps), 0)
    for lo, hi in zip(bps, bps[1:]):
        span = hi.l1_norm - lo.l1_norm
        n_extra = 0
        if total_span > 0.0 and extra_budget:
            n_extra = int(round(extra_budget * span / total_span))
        for step in range(1, n_extra + 1):
            theta = step / (n_extra + 1)
            mix = (1.0 - theta) * lo.residual + theta * hi.residual
            add((1.0 - theta) * lo.l1_norm + theta * hi.l1_norm, mix @ mix)
        add(hi.l1_norm, hi.discrepancy)
    return points
