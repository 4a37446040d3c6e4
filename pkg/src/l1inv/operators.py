"""Linear operator abstraction, concrete builders, and problem setup.

Operators are immutable matrix-free maps with an explicit adjoint; all
concrete builders here keep a dense matrix internally (desk scale), but
the solver and diagnostic code only ever goes through ``apply`` and
``apply_adjoint``.  A ``Problem`` couples an operator with a data vector
and a certified bound on ``||K* K||``, which the step-size admissibility
check relies on.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .rng import SplitMix64

__all__ = [
    "LinearOperator",
    "Problem",
    "PowerIterationWarning",
    "dense_operator",
    "identity_operator",
    "partial_dft_operator",
    "rank_structured_operator",
    "scale_operator",
    "compose_operators",
    "load_dense_matrix",
    "build_operator",
    "estimate_spectral_norm",
    "rescale_problem",
    "max_adjoint_mismatch",
]


class PowerIterationWarning(UserWarning):
    """Spectral norm estimate did not reach the requested tolerance."""


@dataclass(frozen=True)
class LinearOperator:
    """Matrix-free linear map between coefficient and data space.

    Attributes
    ----------
    rows, cols : int
        Data-space and coefficient-space dimensions.
    kind : str
        One of ``dense``, ``partial-dft``, ``rank-structured``,
        ``composed``, ``scaled``.
    """

    rows: int
    cols: int
    kind: str
    _forward: callable = field(repr=False)
    _adjoint: callable = field(repr=False)

    def __post_init__(self):
        if self.rows <= 0 or self.cols <= 0:
            raise ValueError("operator dimensions must be positive")

    def apply(self, x):
        """Forward map: coefficient vector of length `cols` -> data vector."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.cols,):
            raise ValueError(
                f"forward input has shape {x.shape}, expected ({self.cols},)"
            )
        return self._forward(x)

    def apply_adjoint(self, v):
        """Adjoint map: data vector of length `rows` -> coefficient vector."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.rows,):
            raise ValueError(
                f"adjoint input has shape {v.shape}, expected ({self.rows},)"
            )
        return self._adjoint(v)

    def to_dense(self):
        """Materialize the matrix by applying the forward map columnwise."""
        out = np.empty((self.rows, self.cols))
        basis = np.zeros(self.cols)
        for j in range(self.cols):
            basis[j] = 1.0
            out[:, j] = self._forward(basis)
            basis[j] = 0.0
        return out


def dense_operator(matrix):
    """Operator backed by an explicit matrix."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("dense operator needs a 2-d matrix")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("matrix contains non-finite entries")
    rows, cols = matrix.shape
    m = matrix.copy()
    m.setflags(write=False)
    return LinearOperator(rows, cols, "dense", lambda x: m @ x, lambda v: m.T @ v)


def identity_operator(n):
    return dense_operator(np.eye(n))


def _real_dft_row(n, index):
    """Row `index` of the orthonormal real Fourier basis on R^n.

    Ordering: constant row first, then interleaved cosine/sine rows of
    increasing frequency, and (for even n) the alternating-sign row last.
    """
    j = np.arange(n)
    if index == 0:
        return np.full(n, 1.0 / np.sqrt(n))
    if n % 2 == 0 and index == n - 1:
        return np.where(j % 2 == 0, 1.0, -1.0) / np.sqrt(n)
    freq = (index + 1) // 2
    angle = 2.0 * np.pi * freq * j / n
    wave = np.cos(angle) if index % 2 == 1 else np.sin(angle)
    return np.sqrt(2.0 / n) * wave


def partial_dft_operator(n, kept_rows):
    """Real orthonormal Fourier matrix restricted to a set of rows.

    The kept rows are orthonormal, so ``K K* = I`` on data space and the
    spectral norm is exactly 1.

    Parameters
    ----------
    n : int
        Signal length (number of columns).
    kept_rows : iterable of int
        Distinct row indices in ``range(n)``; must be nonempty.
    """
    kept = sorted(set(int(i) for i in kept_rows))
    if not kept:
        raise ValueError("kept row set must be nonempty")
    if kept[0] < 0 or kept[-1] >= n:
        raise ValueError(f"row indices must lie in [0, {n})")
    matrix = np.stack([_real_dft_row(n, i) for i in kept])
    m = matrix.copy()
    m.setflags(write=False)
    return LinearOperator(
        len(kept), n, "partial-dft", lambda x: m @ x, lambda v: m.T @ v
    )


def rank_structured_operator(rows, cols, singular_values, seed):
    """Matrix with prescribed singular values and random orthogonal factors.

    The factors come from QR decompositions of seeded Gaussian matrices,
    so construction is deterministic for a fixed seed.
    """
    values = np.asarray(singular_values, dtype=float)
    if values.ndim != 1 or values.size == 0:
        raise ValueError("singular values must form a nonempty vector")
    if np.any(values < 0) or not np.all(np.isfinite(values)):
        raise ValueError("singular values must be finite and nonnegative")
    rank = values.size
    if rank > min(rows, cols):
        raise ValueError("more singular values than min(rows, cols)")

    gen = SplitMix64(seed)
    left = np.array(gen.normals(rows * rank)).reshape(rows, rank)
    right = np.array(gen.normals(cols * rank)).reshape(cols, rank)
    u, _ = np.linalg.qr(left)
    v, _ = np.linalg.qr(right)
    matrix = (u * values) @ v.T
    m = matrix.copy()
    m.setflags(write=False)
    return LinearOperator(
        rows, cols, "rank-structured", lambda x: m @ x, lambda v_: m.T @ v_
    )


def scale_operator(op, factor):
    factor = float(factor)
    return LinearOperator(
        op.rows,
        op.cols,
        "scaled",
        lambda x: factor * op.apply(x),
        lambda v: factor * op.apply_adjoint(v),
    )


def compose_operators(outer, inner):
    """Operator computing ``outer(inner(x))``."""
    if inner.rows != outer.cols:
        raise ValueError(
            f"cannot compose: inner maps to dim {inner.rows}, "
            f"outer expects {outer.cols}"
        )
    return LinearOperator(
        outer.rows,
        inner.cols,
        "composed",
        lambda x: outer.apply(inner.apply(x)),
        lambda v: inner.apply_adjoint(outer.apply_adjoint(v)),
    )


def load_dense_matrix(path):
    """Read a plain-text matrix: first line "rows cols", then row-major values."""
    with open(path) as fh:
        tokens = fh.read().split()
    if len(tokens) < 2:
        raise ValueError(f"{path}: expected a 'rows cols' header")
    rows, cols = int(tokens[0]), int(tokens[1])
    values = [float(t) for t in tokens[2:]]
    if len(values) != rows * cols:
        raise ValueError(
            f"{path}: expected {rows * cols} entries, found {len(values)}"
        )
    return np.array(values).reshape(rows, cols)


def build_operator(spec):
    """Construct an operator from a declarative spec dictionary.

    Recognized kinds:

    - ``{"kind": "dense", "matrix": array}`` or ``{"kind": "dense", "path": file}``
    - ``{"kind": "partial-dft", "n": int, "kept_rows": list}`` or with
      ``"kept": count, "seed": s`` to pick a seeded random row subset
    - ``{"kind": "rank-structured", "rows", "cols", "singular_values", "seed"}``
    - ``{"kind": "scaled", "factor", "inner": spec}``
    - ``{"kind": "composed", "outer": spec, "inner": spec}``
    """
    kind = spec.get("kind")
    if kind == "dense":
        if "path" in spec:
            return dense_operator(load_dense_matrix(spec["path"]))
        return dense_operator(spec["matrix"])
    if kind == "partial-dft":
        n = int(spec["n"])
        if "kept_rows" in spec:
            kept = spec["kept_rows"]
        else:
            count = int(spec["kept"])
            if not 0 < count <= n:
                raise ValueError(f"kept row count {count} out of range")
            kept = SplitMix64(spec.get("seed", 0)).sample_indices(count, n)
        return partial_dft_operator(n, kept)
    if kind == "rank-structured":
        return rank_structured_operator(
            int(spec["rows"]),
            int(spec["cols"]),
            spec["singular_values"],
            spec.get("seed", 0),
        )
    if kind == "scaled":
        return scale_operator(build_operator(spec["inner"]), spec["factor"])
    if kind == "composed":
        return compose_operators(
            build_operator(spec["outer"]), build_operator(spec["inner"])
        )
    raise ValueError(f"unknown operator kind: {kind!r}")


def estimate_spectral_norm(op, tol=1e-6, max_iter=10000, seed=0):
    """Estimate ``||K||`` by power iteration on ``K* K``.

    Deterministic for a fixed seed.  Emits a ``PowerIterationWarning``
    when the relative change between successive estimates has not
    dropped below `tol` within `max_iter` sweeps.
    """
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    gen = SplitMix64(seed)
    v = np.array(gen.normals(op.cols))
    norm_v = np.linalg.norm(v)
    if norm_v == 0.0:  # astronomically unlikely; regenerate deterministically
        v = np.ones(op.cols)
        norm_v = np.sqrt(op.cols)
    v /= norm_v

    sigma = 0.0
    for _ in range(max_iter):
        w = op.apply_adjoint(op.apply(v))
        norm_w = np.linalg.norm(w)
        if norm_w == 0.0:
            return 0.0
        sigma_new = np.sqrt(norm_w)
        v = w / norm_w
        if abs(sigma_new - sigma) <= 0.5 * tol * sigma_new:
            return float(sigma_new)
        sigma = sigma_new
    warnings.warn(
        f"power iteration did not converge to rel tol {tol} in {max_iter} "
        f"iterations; returning current estimate {sigma}",
        PowerIterationWarning,
    )
    return float(sigma)


@dataclass(frozen=True)
class Problem:
    """Operator plus data vector with a certified bound on ``||K* K||``.

    ``norm_bound`` must not exceed 1; the strict inequality needed by the
    convergence theory is obtained via ``rescale_problem``, while exactly
    1.0 is permitted for operators with orthonormal rows that are used
    unscaled (their true norm is exactly 1 and unit steps remain
    admissible).
    """

    op: LinearOperator
    y: np.ndarray
    norm_bound: float
    scale_applied: float = 1.0

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.shape != (self.op.rows,):
            raise ValueError(
                f"data vector has shape {y.shape}, expected ({self.op.rows},)"
            )
        if not np.all(np.isfinite(y)):
            raise ValueError("data vector contains non-finite entries")
        if not 0.0 < self.norm_bound <= 1.0:
            raise ValueError(
                f"norm_bound must lie in (0, 1], got {self.norm_bound}"
            )
        y = y.copy()
        y.setflags(write=False)
        object.__setattr__(self, "y", y)

    def discrepancy(self, x):
        """Data misfit ``||Kx - y||^2``."""
        diff = self.op.apply(x) - self.y
        return float(diff @ diff)

    def residual_correlation(self, x):
        """Negative gradient direction ``K*(y - Kx)``."""
        return self.op.apply_adjoint(self.y - self.op.apply(x))


def rescale_problem(op, y, target=0.999, tol=1e-6, max_iter=10000, seed=0):
    """Jointly scale operator and data so the spectral norm is below 1.

    Returns a ``Problem`` wrapping ``s*K`` and ``s*y`` with
    ``s = target/sigma`` when the estimated norm exceeds `target`, and
    ``s = 1`` otherwise.  Minimizers of the radius-constrained problem
    are invariant under this joint scaling.  The certified bound is
    inflated by the power-iteration tolerance so that it genuinely
    dominates ``||K* K||`` (which keeps unit gradient steps provably
    admissible).
    """
    if not 0.0 < target < 1.0:
        raise ValueError(f"target must lie in (0, 1), got {target}")
    sigma = estimate_spectral_norm(op, tol=tol, max_iter=max_iter, seed=seed)
    if sigma == 0.0:
        raise ValueError("zero operator: no meaningful problem to rescale")
    y = np.asarray(y, dtype=float)
    if sigma <= target:
        scale = 1.0
        scaled_op = op
        scaled_y = y
    else:
        scale = target / sigma
        scaled_op = scale_operator(op, scale)
        scaled_y = scale * y
    bound = min((target / (1.0 - tol)) ** 2, 1.0)
    return Problem(scaled_op, scaled_y, norm_bound=bound, scale_applied=scale)


def max_adjoint_mismatch(op, trials=100, seed=0, norm_hint=None):
    """Largest normalized defect of ``<Kx, v> == <x, K*v>`` over random probes.

    The mismatch is divided by ``norm(x)*norm(v)*norm_hint + 1`` so a
    uniform tolerance applies across scales; `norm_hint` defaults to a
    crude operator-norm sample taken from the probes themselves.
    """
    gen = SplitMix64(seed)
    probes = []
    for _ in range(trials):
        x = np.array(gen.normals(op.cols))
        v = np.array(gen.normals(op.rows))
        probes.append((x, v, op.apply(x), op.apply_adjoint(v)))
    if norm_hint is None:
        norm_hint = max(
            np.linalg.norm(kx) / np.linalg.norm(x) for x, _, kx, _ in probes
        )
    worst = 0.0
    for x, v, kx, ktv in probes:
        gap = abs(float(kx @ v) - float(x @ ktv))
        scale = np.linalg.norm(x) * np.linalg.norm(v) * norm_hint + 1.0
        worst = max(worst, gap / scale)
    return worst
