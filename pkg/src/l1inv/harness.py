"""Problem generation, benchmark orchestration, and trace export.

Configuration is a flat ``key = value`` text file (``#`` starts a
comment); the recognized keys are documented in the README.  Three
builtin configurations reproduce the paper-style experiments at desk
scale: an orthonormal-row partial Fourier problem, a rank-structured
problem with one dominant singular value, and an ill-conditioned
analog with a rapidly decaying spectrum and noise-matched penalty.

All randomness derives from the config seed through a SplitMix64
stream, so a config fixes the generated problem and every solver input
bit for bit.
"""

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .homotopy import solve_homotopy, tradeoff_curve
from .operators import (
    Problem,
    build_operator,
    estimate_spectral_norm,
    max_adjoint_mismatch,
    rescale_problem,
)
from .prox import project_l1, soft_threshold, threshold_norm
from .rng import SplitMix64
from .solvers import (
    StepPolicy,
    StoppingRule,
    condition_b2_holds,
    run_pocs,
    run_projected_gradient,
    run_projected_landweber,
    run_relaxed_radius,
    run_thresholded_landweber,
)

__all__ = [
    "ConfigError",
    "InfeasiblePenaltyError",
    "SingularGramError",
    "BenchmarkConfig",
    "ProblemInstance",
    "RunReport",
    "SolverOutcome",
    "BUILTIN_CONFIGS",
    "ERROR_LEVELS",
    "SOLVER_NAMES",
    "TRACE_HEADER",
    "parse_config_text",
    "load_config",
    "generate_problem",
    "select_matched_penalty",
    "make_gram_inverse",
    "run_benchmark",
    "export_trace",
    "export_tradeoff",
    "run_invariant_suite",
]

ERROR_LEVELS = (0.9, 0.8, 0.7, 0.5, 0.2, 0.1, 0.05, 0.03)

SOLVER_NAMES = (
    "thresholded-landweber",
    "projected-landweber",
    "projected-gradient",
    "relaxed-radius",
    "pocs",
)

TRACE_HEADER = "n,beta,l1_norm,discrepancy,step_norm,b2,backtracks,time_s,rel_error"


class ConfigError(ValueError):
    """Malformed configuration file or inconsistent keys."""


class InfeasiblePenaltyError(RuntimeError):
    """Noise-matched penalty selection has no solution on the path."""


class SingularGramError(RuntimeError):
    """The data-space Gram matrix K K* is not invertible."""


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def parse_config_text(text):
    """Parse flat ``key = value`` lines into a string-to-string mapping."""
    mapping = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        mapping[key] = value.strip()
    return mapping


def load_config(path):
    return BenchmarkConfig.from_mapping(parse_config_text(Path(path).read_text()))


# Builtin configs are stored in the same string form the file parser
# produces, so both sources go through one validation path.
BUILTIN_CONFIGS = {
    "partial-dft": {
        "problem": "partial-dft",
        "n": "256",
        "kept": "128",
        "support_size": "10",
        "amplitude": "1.0",
        "noise_sigma": "0.01",
        "tau_fraction": "0.1",
        "seed": "20240601",
        "solvers": "thresholded-landweber,projected-landweber,projected-gradient",
        "reference": "oracle",
        "tol": "1e-9",
        "max_iter": "20000",
    },
    "rank-structured": {
        "problem": "rank-structured",
        "rows": "192",
        "cols": "256",
        "top_singular": "0.99",
        "tail_min": "0.01",
        "tail_max": "0.11",
        "support_size": "25",
        "amplitude": "1.0",
        "noise_sigma": "0.05",
        "tau_fraction": "0.02",
        "seed": "20240602",
        "solvers": (
            "thresholded-landweber,projected-landweber,projected-gradient,"
            "relaxed-radius,pocs"
        ),
        "reference": "oracle",
        "tol": "1e-9",
        "max_iter": "200000",
        "relaxed_steps": "3000",
    },
    "tomography-analog": {
        "problem": "rank-structured",
        "rows": "96",
        "cols": "256",
        "top_singular": "1.0",
        "tail_min": "0.001",
        "tail_max": "0.5",
        "spectrum": "geometric",
        "support_size": "20",
        "amplitude": "1.0",
        "noise_sigma": "0.01",
        "tau": "auto",
        "seed": "20240603",
        "solvers": "thresholded-landweber,projected-landweber,projected-gradient",
        "reference": "oracle",
        "tol": "1e-9",
        "max_iter": "200000",
    },
}


def _parse_float(mapping, key, default=None):
    if key not in mapping:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return float(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not a number: {mapping[key]!r}") from exc


def _parse_int(mapping, key, default=None):
    if key not in mapping:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    try:
        return int(mapping[key])
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not an integer: {mapping[key]!r}") from exc


def _parse_bool(mapping, key, default):
    if key not in mapping:
        return default
    value = mapping[key].lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"key {key!r}: expected a boolean, got {mapping[key]!r}")


@dataclass(frozen=True)
class BenchmarkConfig:
    """Validated benchmark description; see README for the key reference."""

    problem_kind: str
    operator_spec: dict
    support_size: int
    amplitude: float
    noise_sigma: float
    tau_mode: str  # "value" | "fraction" | "auto"
    tau_value: float
    radius_mode: str  # "auto" | "value"
    radius_value: float
    rescale: str  # "auto" | "none"
    rescale_target: float
    solvers: tuple
    reference: str  # "oracle" | "none"
    tol: float
    max_iter: int
    relaxed_steps: int
    beta_max: float
    backtrack_factor: float
    enforce_b2: bool
    seed: int
    out: str

    @staticmethod
    def builtin(name):
        if name not in BUILTIN_CONFIGS:
            known = ", ".join(sorted(BUILTIN_CONFIGS))
            raise ConfigError(f"unknown builtin {name!r} (known: {known})")
        return BenchmarkConfig.from_mapping(dict(BUILTIN_CONFIGS[name]))

    @staticmethod
    def from_mapping(mapping, overrides=None):
        mapping = dict(mapping)
        if overrides:
            mapping.update(
                {k: str(v) for k, v in overrides.items() if v is not None}
            )

        kind = mapping.get("problem")
        if kind not in ("partial-dft", "rank-structured", "dense-file"):
            raise ConfigError(
                f"key 'problem' must be partial-dft, rank-structured or "
                f"dense-file, got {kind!r}"
            )
        seed = _parse_int(mapping, "seed", 0)

        if kind == "partial-dft":
            n = _parse_int(mapping, "n")
            spec = {"kind": "partial-dft", "n": n, "seed": seed}
            if "kept_rows" in mapping:
                try:
                    spec["kept_rows"] = [
                        int(tok) for tok in mapping["kept_rows"].split(",")
                    ]
                except ValueError as exc:
                    raise ConfigError("key 'kept_rows': bad index list") from exc
            else:
                spec["kept"] = _parse_int(mapping, "kept")
        elif kind == "rank-structured":
            rows = _parse_int(mapping, "rows")
            cols = _parse_int(mapping, "cols")
            if "singular_values" in mapping:
                try:
                    values = [
                        float(tok) for tok in mapping["singular_values"].split(",")
                    ]
                except ValueError as exc:
                    raise ConfigError("key 'singular_values': bad list") from exc
            else:
                top = _parse_float(mapping, "top_singular")
                tail_lo = _parse_float(mapping, "tail_min")
                tail_hi = _parse_float(mapping, "tail_max")
                rank = _parse_int(mapping, "rank", min(rows, cols))
                shape = mapping.get("spectrum", "linear")
                if shape == "linear":
                    tail = np.linspace(tail_hi, tail_lo, rank - 1)
                elif shape == "geometric":
                    tail = np.geomspace(tail_hi, tail_lo, rank - 1)
                else:
                    raise ConfigError(
                        f"key 'spectrum' must be linear or geometric, got {shape!r}"
                    )
                values = [top] + list(tail)
            spec = {
                "kind": "rank-structured",
                "rows": rows,
                "cols": cols,
                "singular_values": values,
                "seed": seed,
            }
        else:
            if "matrix_file" not in mapping:
                raise ConfigError("dense-file problems need key 'matrix_file'")
            spec = {"kind": "dense", "path": mapping["matrix_file"]}

        tau_raw = mapping.get("tau", "")
        if tau_raw == "auto":
            tau_mode, tau_value = "auto", 0.0
        elif tau_raw:
            tau_mode, tau_value = "value", _parse_float(mapping, "tau")
            if tau_value <= 0:
                raise ConfigError("key 'tau' must be positive")
        elif "tau_fraction" in mapping:
            tau_mode, tau_value = "fraction", _parse_float(mapping, "tau_fraction")
            if not 0.0 < tau_value < 1.0:
                raise ConfigError("key 'tau_fraction' must lie in (0, 1)")
        else:
            raise ConfigError("one of 'tau' or 'tau_fraction' is required")

        radius_raw = mapping.get("radius", "auto")
        if radius_raw == "auto":
            radius_mode, radius_value = "auto", 0.0
        else:
            radius_mode, radius_value = "value", _parse_float(mapping, "radius")
            if radius_value <= 0:
                raise ConfigError("key 'radius' must be positive")

        rescale = mapping.get("rescale", "auto")
        if rescale not in ("auto", "none"):
            raise ConfigError("key 'rescale' must be auto or none")

        solvers = tuple(
            tok.strip()
            for tok in mapping.get("solvers", "projected-gradient").split(",")
            if tok.strip()
        )
        for name in solvers:
            if name not in SOLVER_NAMES:
                raise ConfigError(
                    f"unknown solver {name!r} (known: {', '.join(SOLVER_NAMES)})"
                )
        if not solvers:
            raise ConfigError("key 'solvers' selects no solver")

        reference = mapping.get("reference", "oracle")
        if reference not in ("oracle", "none"):
            raise ConfigError("key 'reference' must be oracle or none")
        if reference == "none" and radius_mode == "auto":
            raise ConfigError("radius=auto needs reference=oracle")
        if reference == "none" and tau_mode == "auto":
            raise ConfigError("tau=auto needs reference=oracle")

        support_size = _parse_int(mapping, "support_size")
        if support_size < 0:
            raise ConfigError("key 'support_size' must be nonnegative")
        noise_sigma = _parse_float(mapping, "noise_sigma", 0.0)
        if noise_sigma < 0:
            raise ConfigError("key 'noise_sigma' must be nonnegative")
        if tau_mode == "auto" and noise_sigma == 0.0:
            raise ConfigError("tau=auto requires a positive noise_sigma")

        return BenchmarkConfig(
            problem_kind=kind,
            operator_spec=spec,
            support_size=support_size,
            amplitude=_parse_float(mapping, "amplitude", 1.0),
            noise_sigma=noise_sigma,
            tau_mode=tau_mode,
            tau_value=tau_value,
            radius_mode=radius_mode,
            radius_value=radius_value,
            rescale=rescale,
            rescale_target=_parse_float(mapping, "rescale_target", 0.999),
            solvers=solvers,
            reference=reference,
            tol=_parse_float(mapping, "tol", 1e-8),
            max_iter=_parse_int(mapping, "max_iter", 100000),
            relaxed_steps=_parse_int(mapping, "relaxed_steps", 200),
            beta_max=_parse_float(mapping, "beta_max", 1e6),
            backtrack_factor=_parse_float(mapping, "backtrack_factor", 0.9),
            enforce_b2=_parse_bool(mapping, "enforce_b2", True),
            seed=seed,
            out=mapping.get("out", "bench_out"),
        )

    def step_policy(self):
        mode = "steepest-descent-with-B" if self.enforce_b2 else "steepest-descent"
        return StepPolicy(
            mode=mode,
            beta_max=self.beta_max,
            backtrack_factor=self.backtrack_factor,
            enforce_b2=self.enforce_b2,
        )

    def stopping_rule(self):
        return StoppingRule(tol=self.tol, max_iter=self.max_iter)


@dataclass(frozen=True)
class ProblemInstance:
    """Generated problem with its planted signal and resolved penalty."""

    problem: Problem
    x_true: np.ndarray
    sigma: float
    tau: float


def _certified_bound(kind, spec):
    """Norm bound known from the construction, or None."""
    if kind == "partial-dft":
        return 1.0  # orthonormal rows
    if kind == "rank-structured":
        top = max(spec["singular_values"])
        if top <= 1.0:
            # Pad for the orthogonality error of the random factors.
            return min(top**2 * (1.0 + 1e-12), 1.0)
    return None


def generate_problem(config):
    """Build the operator, plant a sparse signal, and add seeded noise.

    With ``tau = auto`` the penalty is chosen on the exact path so the
    minimizer's discrepancy matches ``rows * sigma^2`` (the expected
    noise energy), the standard choice that avoids overfitting.
    """
    master = SplitMix64(config.seed)
    op_seed = master.next_uint64()
    spec = dict(config.operator_spec)
    spec["seed"] = op_seed
    op = build_operator(spec)

    support = master.sample_indices(config.support_size, op.cols)
    x_true = np.zeros(op.cols)
    for idx in support:
        x_true[idx] = config.amplitude * master.normal()
    clean = op.apply(x_true)
    noise = np.array(master.normals(op.rows)) if config.noise_sigma > 0 else 0.0
    y = clean + config.noise_sigma * noise

    bound = _certified_bound(config.problem_kind, spec)
    if bound is not None:
        problem = Problem(op, y, norm_bound=bound, scale_applied=1.0)
    elif config.rescale == "none":
        sigma_hat = estimate_spectral_norm(op, seed=op_seed)
        if sigma_hat > 1.0:
            raise ConfigError(
                "rescale=none but the operator norm exceeds 1; "
                "rescaling is required for the solvers"
            )
        problem = Problem(
            op, y, norm_bound=min(sigma_hat**2 * (1.0 + 1e-5), 1.0)
        )
    else:
        problem = rescale_problem(op, y, target=config.rescale_target, seed=op_seed)

    sigma_eff = config.noise_sigma * problem.scale_applied
    if config.tau_mode == "value":
        tau = config.tau_value
    elif config.tau_mode == "fraction":
        tau_max = float(np.max(np.abs(problem.op.apply_adjoint(problem.y))))
        tau = config.tau_value * tau_max
    else:
        tau = select_matched_penalty(problem, op.rows * sigma_eff**2)
    return ProblemInstance(problem=problem, x_true=x_true, sigma=sigma_eff, tau=tau)


def select_matched_penalty(problem, target_discrepancy):
    """Penalty whose exact minimizer has the requested discrepancy.

    Walks the homotopy path (discrepancy decreases monotonically along
    it) and solves the quadratic segment containing the crossing.
    """
    if target_discrepancy <= 0:
        raise InfeasiblePenaltyError("target discrepancy must be positive")
    y_energy = float(problem.y @ problem.y)
    if target_discrepancy >= y_energy:
        raise InfeasiblePenaltyError(
            f"target discrepancy {target_discrepancy} is not below the "
            f"zero-solution discrepancy {y_energy}"
        )
    tau_max = float(np.max(np.abs(problem.op.apply_adjoint(problem.y))))
    _, path = solve_homotopy(problem, tau=tau_max * 1e-12)
    bps = path.breakpoints
    for lo, hi in zip(bps, bps[1:]):
        if hi.discrepancy > target_discrepancy:
            continue
        # D(theta) = |(1-theta) r_lo + theta r_hi|^2 crosses the target here.
        diff = hi.residual - lo.residual
        a_coef = float(diff @ diff)
        b_coef = 2.0 * float(lo.residual @ diff)
        c_coef = lo.discrepancy - target_discrepancy
        if a_coef == 0.0:
            theta = 0.0 if b_coef == 0.0 else -c_coef / b_coef
        else:
            disc = b_coef**2 - 4.0 * a_coef * c_coef
            theta = (-b_coef - math.sqrt(max(disc, 0.0))) / (2.0 * a_coef)
        theta = min(max(theta, 0.0), 1.0)
        return float(lo.tau + theta * (hi.tau - lo.tau))
    raise InfeasiblePenaltyError(
        f"path exhausted at discrepancy {bps[-1].discrepancy}, "
        f"target {target_discrepancy} not reached"
    )


def make_gram_inverse(problem):
    """Dense factorization of K K*, returned as an opaque data-space map."""
    matrix = problem.op.to_dense()
    gram = matrix @ matrix.T
    try:
        factor = cho_factor(gram)
    except LinAlgError as exc:
        raise SingularGramError(
            "K K* is singular; the affine data-fit set has no "
            "well-defined projection"
        ) from exc
    return lambda v: cho_solve(factor, v)


@dataclass
class SolverOutcome:
    """Per-solver benchmark results."""

    solver: str
    iterations: dict = field(default_factory=dict)  # level -> n or None
    times: dict = field(default_factory=dict)  # level -> seconds or None
    final_rel_error: float = None
    converged: bool = False
    total_iterations: int = 0
    aborted: str = None
    trace_file: str = None
    diagnostics: object = None


@dataclass
class RunReport:
    """Aggregated benchmark results in the error-level x solver layout."""

    error_levels: tuple
    outcomes: dict  # solver name -> SolverOutcome
    tau: float
    radius: float
    sigma: float
    seed: int
    reference_l1: float = None

    def to_text(self):
        names = list(self.outcomes)
        lines = [
            f"seed {self.seed}  tau {_fmt(self.tau)}  radius {_fmt(self.radius)}",
            "",
        ]
        header = ["rel_error"]
        for name in names:
            header += [f"{name} n", f"{name} time"]
        widths = [max(len(h), 12) for h in header]
        lines.append("  ".join(h.rjust(w) for h, w in zip(header, widths)))
        for level in self.error_levels:
            row = [f"{level:g}"]
            for name in names:
                out = self.outcomes[name]
                if out.aborted:
                    row += ["aborted", "-"]
                    continue
                n = out.iterations.get(level)
                t = out.times.get(level)
                row.append("-" if n is None else str(n))
                row.append("-" if t is None else f"{t:.3f}s")
            lines.append("  ".join(c.rjust(w) for c, w in zip(row, widths)))
        for name in names:
            out = self.outcomes[name]
            if out.aborted:
                lines.append(f"{name}: aborted ({out.aborted})")
        return "\n".join(lines) + "\n"

    def iterations_table_consistent(self):
        """Iterations to threshold never decrease as the level tightens."""
        for out in self.outcomes.values():
            reached = [
                out.iterations[lv]
                for lv in self.error_levels
                if out.iterations.get(lv) is not None
            ]
            if any(b < a for a, b in zip(reached, reached[1:])):
                return False
        return True


def _threshold_table(trace):
    iterations, times = {}, {}
    elapsed = 0.0
    reached = {}
    for rec in trace.records:
        elapsed += rec.wall_time
        if rec.rel_error is None:
            continue
        for level in ERROR_LEVELS:
            if level not in reached and rec.rel_error <= level:
                reached[level] = (rec.n, elapsed)
    for level in ERROR_LEVELS:
        pair = reached.get(level)
        iterations[level] = None if pair is None else pair[0]
        times[level] = None if pair is None else pair[1]
    return iterations, times


def export_trace(trace, out_prefix, path_curve=None, fmt="csv"):
    """Write the per-iteration trace and its l1-vs-log-discrepancy shadow.

    Returns the list of files written: ``<prefix>.csv`` with the full
    record columns, ``<prefix>_path.csv`` with ``(l1_norm, log10
    discrepancy)`` pairs, and, when a trade-off curve is supplied,
    ``<prefix>_curve.csv`` with the same two columns for overlay.
    """
    if fmt != "csv":
        raise ValueError(f"unsupported format {fmt!r}")
    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)

    main = out_prefix.with_suffix(".csv")
    rows = [TRACE_HEADER]
    for rec in trace.records:
        rows.append(
            ",".join(
                [
                    str(rec.n),
                    _fmt(rec.beta),
                    _fmt(rec.l1_norm),
                    _fmt(rec.discrepancy),
                    _fmt(rec.step_norm),
                    _fmt(rec.b2_satisfied),
                    str(rec.backtracks),
                    _fmt(rec.wall_time),
                    _fmt(rec.rel_error),
                ]
            )
        )
    main.write_text("\n".join(rows) + "\n")
    written = [str(main)]

    def log10_floor(value):
        return math.log10(max(value, 1e-300))

    shadow = out_prefix.parent / (out_prefix.name + "_path.csv")
    rows = ["l1_norm,log10_discrepancy"]
    for rec in trace.records:
        rows.append(f"{_fmt(rec.l1_norm)},{_fmt(log10_floor(rec.discrepancy))}")
    shadow.write_text("\n".join(rows) + "\n")
    written.append(str(shadow))

    if path_curve is not None:
        overlay = out_prefix.parent / (out_prefix.name + "_curve.csv")
        rows = ["l1_norm,log10_discrepancy"]
        for l1, disc in path_curve:
            rows.append(f"{_fmt(l1)},{_fmt(log10_floor(disc))}")
        overlay.write_text("\n".join(rows) + "\n")
        written.append(str(overlay))
    return written


def export_tradeoff(path, out_file):
    """Write the path breakpoints as ``tau,l1_norm,discrepancy,support_size``."""
    out_file = Path(out_file)
    out_file.parent.mkdir(parents=True, exist_ok=True)
    rows = ["tau,l1_norm,discrepancy,support_size"]
    for bp in path.breakpoints:
        rows.append(
            f"{_fmt(bp.tau)},{_fmt(bp.l1_norm)},"
            f"{_fmt(bp.discrepancy)},{bp.support_size}"
        )
    out_file.write_text("\n".join(rows) + "\n")
    return str(out_file)


def _run_one_solver(name, instance, radius, config, reference):
    problem = instance.problem
    stop = config.stopping_rule()
    policy = config.step_policy()
    common = dict(stop=stop, reference=reference)
    if name == "thresholded-landweber":
        _, trace = run_thresholded_landweber(problem, instance.tau, **common)
        return trace, None
    if name == "projected-landweber":
        _, trace = run_projected_landweber(problem, radius, **common)
        return trace, None
    if name == "projected-gradient":
        _, trace, diag = run_projected_gradient(
            problem, radius, policy=policy, **common
        )
        return trace, diag
    if name == "relaxed-radius":
        _, trace = run_relaxed_radius(
            problem, radius, config.relaxed_steps, policy=policy, **common
        )
        return trace, None
    if name == "pocs":
        gram_inverse = make_gram_inverse(problem)
        _, trace = run_pocs(problem, radius, gram_inverse, **common)
        return trace, None
    raise ConfigError(f"unknown solver {name!r}")


def run_benchmark(config, out_dir=None):
    """Run every configured solver against one generated problem.

    When an oracle reference is requested, the exact minimizer for the
    resolved penalty is computed first; the constraint radius defaults
    to its l1 norm, and relative errors are measured against it (never
    against the planted signal).  Solver failures are recorded in the
    report and do not stop the remaining solvers.

    Writes per-solver trace CSVs, the trade-off curve CSV, and a text
    report in Table-1 layout (rows: error levels; per solver: iteration
    count and wall time, `-` when a level was not reached in budget).
    """
    out_dir = Path(out_dir if out_dir is not None else config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    instance = generate_problem(config)
    problem = instance.problem

    reference = None
    path = None
    radius = config.radius_value
    reference_l1 = None
    if config.reference == "oracle":
        if config.radius_mode == "auto":
            reference, path = solve_homotopy(problem, tau=instance.tau)
            radius = float(np.sum(np.abs(reference)))
        else:
            reference, path = solve_homotopy(problem, radius=radius)
        reference_l1 = float(np.sum(np.abs(reference)))
        export_tradeoff(path, out_dir / "tradeoff.csv")

    curve = tradeoff_curve(path) if path is not None else None
    outcomes = {}
    for name in config.solvers:
        outcome = SolverOutcome(solver=name)
        try:
            trace, diag = _run_one_solver(name, instance, radius, config, reference)
        except Exception as exc:  # noqa: BLE001 - failures belong in the report
            outcome.aborted = f"{type(exc).__name__}: {exc}"
            outcomes[name] = outcome
            continue
        outcome.iterations, outcome.times = _threshold_table(trace)
        outcome.converged = trace.converged
        outcome.total_iterations = len(trace)
        outcome.diagnostics = diag
        if trace.records and trace.records[-1].rel_error is not None:
            outcome.final_rel_error = trace.records[-1].rel_error
        files = export_trace(trace, out_dir / name, path_curve=curve)
        outcome.trace_file = files[0]
        outcomes[name] = outcome

    report = RunReport(
        error_levels=ERROR_LEVELS,
        outcomes=outcomes,
        tau=instance.tau,
        radius=radius,
        sigma=instance.sigma,
        seed=config.seed,
        reference_l1=reference_l1,
    )
    (out_dir / "report.txt").write_text(report.to_text())
    return report


def run_invariant_suite(config, probes=100):
    """Machine-checkable invariants for a generated problem.

    Returns ``(name, passed, detail)`` triples covering operator
    adjointness, the certified norm bound, projection identities, unit
    step admissibility, and (at oracle scale) the exact-path optimality
    certificate plus solver monotonicity.
    """
    checks = []
    instance = generate_problem(config)
    problem = instance.problem
    op = problem.op
    gen = SplitMix64(instance.problem.op.rows * 7919 + config.seed)

    mismatch = max_adjoint_mismatch(op, trials=probes, seed=config.seed)
    checks.append(("adjoint-consistency", mismatch <= 1e-10, f"max {mismatch:.3e}"))

    sigma = estimate_spectral_norm(op, seed=config.seed)
    bound_ok = sigma**2 <= problem.norm_bound * (1.0 + 1e-6)
    checks.append(
        (
            "norm-bound",
            bound_ok,
            f"estimate {sigma:.12f}, certified bound {problem.norm_bound:.12f}",
        )
    )

    if op.kind == "partial-dft":
        worst = 0.0
        for _ in range(20):
            v = np.array(gen.normals(op.rows))
            worst = max(
                worst,
                float(np.linalg.norm(op.apply(op.apply_adjoint(v)) - v)),
            )
        checks.append(("dft-row-orthonormality", worst <= 1e-10, f"max {worst:.3e}"))

    proj_worst = 0.0
    moreau_worst = 0.0
    nonexp_worst = 0.0
    for _ in range(20):
        a = np.array(gen.normals(op.cols))
        b = np.array(gen.normals(op.cols))
        radius = 0.5 * float(np.sum(np.abs(a)))
        res = project_l1(a, radius)
        proj_worst = max(
            proj_worst, abs(float(np.sum(np.abs(res.x))) - radius)
        )
        moreau_worst = max(
            moreau_worst, abs(float(np.max(np.abs(a - res.x))) - res.mu)
        )
        other = project_l1(b, radius)
        gap = np.linalg.norm(res.x - other.x) - np.linalg.norm(a - b)
        nonexp_worst = max(nonexp_worst, float(gap))
    checks.append(("projection-radius", proj_worst <= 1e-10, f"max {proj_worst:.3e}"))
    checks.append(
        ("projection-residual-supnorm", moreau_worst <= 1e-12, f"max {moreau_worst:.3e}")
    )
    checks.append(
        ("projection-nonexpansive", nonexp_worst <= 1e-12, f"max {nonexp_worst:.3e}")
    )

    unit_ok = True
    for _ in range(20):
        dx = np.array(gen.normals(op.cols))
        unit_ok = unit_ok and condition_b2_holds(
            1.0, dx, op.apply(dx), problem.norm_bound
        )
    checks.append(("unit-step-admissible", unit_ok, "beta=1 on 20 random steps"))

    if op.cols <= 1024:
        xbar, path = solve_homotopy(problem, tau=instance.tau)
        kkt = path.kkt_max_violation()
        checks.append(("oracle-kkt-certificate", kkt <= 1e-9, f"max {kkt:.3e}"))
        fp = np.linalg.norm(
            soft_threshold(xbar + problem.residual_correlation(xbar), instance.tau)
            - xbar
        )
        checks.append(("oracle-fixed-point", fp <= 1e-8, f"defect {fp:.3e}"))
        radius = float(np.sum(np.abs(xbar)))
        if radius > 0:
            _, trace, diag = run_projected_gradient(
                problem,
                radius,
                stop=StoppingRule(tol=1e-9, max_iter=5000),
                reference=xbar,
            )
            checks.append(
                (
                    "solver-monotone-discrepancy",
                    trace.discrepancy_violations() == 0,
                    f"{len(trace)} iterations",
                )
            )
            tau_gap = abs(diag.tau - instance.tau) / instance.tau
            checks.append(
                ("threshold-identity", tau_gap <= 1e-5, f"rel gap {tau_gap:.3e}")
            )
    return checks
