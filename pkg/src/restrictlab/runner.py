"""Experiment configurations, reproducible runs and consolidated reports."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from restrictlab.constants import DEFAULT_ATOM_BUDGET, __version__
from restrictlab.curves import from_name
from restrictlab.errors import AtomBudgetError, ConvergenceError, LabError, PreconditionError
from restrictlab.geometry import (
    bounding_rect,
    crossing_shift,
    random_cover_points,
    tube_intersection_area,
    w_bound_scan,
    whitney_cover_check,
    whitney_pairs,
)
from restrictlab.io import read_measure_csv, spec_from_json
from restrictlab.measures import (
    AtomicMeasure,
    CantorSpec,
    SharpExampleSpec,
    build_cantor_measure,
    build_sharp_example,
    cantor_spec_for_alpha,
    grid_measure,
    point_mass,
)
from restrictlab.oscillatory import check_van_der_corput
from restrictlab.restriction import (
    Tolerances,
    WitnessConfig,
    cantor_depth_for,
    fit_decay,
    fit_loglog,
    m_dependence_scan,
    predicted_outcome,
    regime,
    restriction_integral,
    threshold_experiment,
)
from restrictlab.svg import loglog_svg

EXPERIMENTS = ("decay", "m_scan", "threshold", "alpha0", "vdc", "whitney", "tubes", "rect")

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

OUTPUT_FILES = ("results.csv", "summary.json", "plot.svg", "manifest.json")


class ConfigError(PreconditionError):
    """A configuration failed validation before any compute started."""


@dataclass
class ExperimentConfig:
    experiment: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    output_dir: str = "run"
    atom_budget: int = DEFAULT_ATOM_BUDGET

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if not isinstance(self.parameters, dict):
            raise ConfigError("parameters must be a JSON object")
        if not (isinstance(self.seed, int) and 0 <= self.seed < 2**64):
            raise ConfigError("seed must be an integer in [0, 2**64)")
        if not (isinstance(self.atom_budget, int) and self.atom_budget >= 1):
            raise ConfigError("atom_budget must be a positive integer")

    @classmethod
    def from_json(cls, obj: dict, base_dir: Path | None = None) -> "ExperimentConfig":
        if not isinstance(obj, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(obj) - {"experiment", "parameters", "seed", "output_dir", "atom_budget"}
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "experiment" not in obj:
            raise ConfigError("config needs an 'experiment' key")
        cfg = cls(**obj)
        if base_dir is not None and not Path(cfg.output_dir).is_absolute():
            cfg.output_dir = str(base_dir / cfg.output_dir)
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        return cls.from_json(obj, base_dir=path.parent)

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class Outcome:
    columns: list
    rows: list
    summary: dict
    passed: bool
    converged: list = field(default_factory=list)
    plot: dict | None = None


@dataclass
class RunManifest:
    config: dict
    version: str
    wall_time: float
    converged: list
    verdicts: dict
    passed: bool | None
    error: dict | None = None

    def to_json(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------
# Parameter parsing


class Params:
    """Typed access to a parameter map; every key must be consumed."""

    def __init__(self, raw: dict):
        self.raw = dict(raw)
        self.used: set = set()

    def get(self, key, default=None, kind: Callable = float):
        self.used.add(key)
        if key not in self.raw:
            if default is None:
                raise ConfigError(f"missing parameter {key!r}")
            return default
        try:
            return kind(self.raw[key])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"parameter {key!r}: {exc}") from None

    def optional(self, key, kind: Callable = float):
        self.used.add(key)
        v = self.raw.get(key)
        return None if v is None else kind(v)

    def finish(self):
        extra = set(self.raw) - self.used
        if extra:
            raise ConfigError(f"unknown parameters {sorted(extra)}")


def _float_list(v):
    return [float(x) for x in v]


def _interval(v):
    a, b = _float_list(v)
    return (a, b)


def r_values(params: Params, key: str, default_exponents) -> list[float]:
    """R list from ``<key>`` (explicit) or ``<key>_exponents`` ([lo, hi] powers of two)."""
    explicit = params.optional(key, _float_list)
    lo, hi = params.get(f"{key}_exponents", list(default_exponents), lambda v: [int(x) for x in v])
    values = explicit if explicit is not None else [2.0**k for k in range(lo, hi + 1)]
    if len(values) < 3:
        raise ConfigError(f"{key} needs at least 3 values")
    return sorted(values)


def build_measure(obj: dict, atom_budget: int, max_frequency: float | None = None) -> AtomicMeasure:
    """Measure from a JSON description.

    Kinds: ``cantor`` and ``sharp_example`` mirror their dataclass fields;
    ``cantor_alpha`` takes alpha, branches and an optional depth (chosen from
    ``max_frequency`` when omitted); ``grid`` takes n; ``point`` takes position
    and weight; ``csv`` takes a path.
    """
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ConfigError("measure must be an object with a 'kind'")
    kind = obj["kind"]
    body = {k: v for k, v in obj.items() if k != "kind"}
    if kind in ("cantor", "sharp_example"):
        spec = spec_from_json(obj)
        if isinstance(spec, CantorSpec):
            return build_cantor_measure(spec, atom_budget)
        return build_sharp_example(spec, atom_budget)[0]
    if kind == "cantor_alpha":
        alpha = float(body.pop("alpha"))
        branches = int(body.pop("branches", 2))
        depth = body.pop("depth", None)
        if body:
            raise ConfigError(f"unknown cantor_alpha fields {sorted(body)}")
        if depth is None:
            if max_frequency is None:
                raise ConfigError("cantor_alpha needs a depth here")
            depth = cantor_depth_for(alpha, max_frequency, branches)
        return build_cantor_measure(cantor_spec_for_alpha(alpha, int(depth), branches), atom_budget)
    if kind == "grid":
        return grid_measure(int(body["n"]))
    if kind == "point":
        return point_mass(tuple(body.get("position", (0.0, 0.0))), complex(body.get("weight", 1.0)))
    if kind == "csv":
        return read_measure_csv(body["path"], atom_budget)
    raise ConfigError(f"unknown measure kind {kind!r}")


def _curve(params: Params, key: str = "curve"):
    obj = params.get(key, {"name": "parabola"}, dict)
    obj = dict(obj)
    return from_name(obj.pop("name", "parabola"), **obj)


def _block_rows(blocks, **extra):
    return [{**extra, **b.to_row()} for b in blocks]


BLOCK_COLUMNS = ["R", "value", "gamma", "kind", "quad_nodes", "converged"]


# --------------------------------------------------------------------------
# Experiments: each prepare() validates everything and returns the compute step


def prepare_decay(p: Params, cfg: ExperimentConfig):
    curve = _curve(p)
    Rs = r_values(p, "R", (6, 13))
    eps = p.get("epsilon", Tolerances.decay_epsilon)
    qn = p.optional("quad_nodes", int)
    reach = max(Rs) * float(np.hypot(*curve.point(2.0)))
    mu = build_measure(p.get("measure", None, dict), cfg.atom_budget, max_frequency=reach)
    alpha = p.get("alpha", mu.declared_alpha)
    if not 0 < alpha <= 2:
        raise ConfigError("alpha must lie in (0, 2]")
    p.finish()

    def compute():
        blocks = [restriction_integral(mu, curve, R, qn) for R in Rs]
        fit = fit_decay(blocks)
        predicted = -alpha / 2
        conv = [b.converged for b in blocks]
        ok = fit.slope <= predicted + eps
        return Outcome(
            BLOCK_COLUMNS, _block_rows(blocks),
            {"slope": fit.slope, "intercept": fit.intercept, "max_residual": fit.max_residual,
             "predicted": predicted, "tolerance": eps, "measure": repr(mu), "curve": curve.describe(),
             "all_converged": all(conv), "verdict": "pass" if ok and all(conv) else "fail"},
            ok and all(conv), conv,
            {"series": {"block value": (Rs, [b.value for b in blocks])}, "predicted_slope": predicted, "xlabel": "R"},
        )

    return compute


def prepare_m_scan(p: Params, cfg: ExperimentConfig):
    R = p.get("R", 2.0**9)
    ms = p.get("m_values", [2, 4, 8, 16], _float_list)
    if len(ms) < 3 or any(not m >= 1 for m in ms):
        raise ConfigError("m_values needs at least 3 values, each >= 1")
    tol = p.get("tolerance", 0.3)
    qn = p.optional("quad_nodes", int)
    mu = build_measure(p.get("measure", {"kind": "grid", "n": 2**16}, dict), cfg.atom_budget)
    alpha = p.get("alpha", mu.declared_alpha)
    p.finish()

    def compute():
        scan = m_dependence_scan(mu, alpha, R, ms, qn)
        conv = [b.converged for b in scan.blocks]
        ok = scan.fit.slope <= scan.predicted + tol
        rows = [{"m": m, **b.to_row()} for m, b in zip(scan.m_values, scan.blocks)]
        return Outcome(
            ["m"] + BLOCK_COLUMNS, rows,
            {"slope": scan.fit.slope, "intercept": scan.fit.intercept, "max_residual": scan.fit.max_residual,
             "predicted": scan.predicted, "tolerance": tol, "R": R, "all_converged": all(conv),
             "verdict": "pass" if ok and all(conv) else "fail"},
            ok and all(conv), conv,
            {"series": {"block value": (ms, [b.value for b in scan.blocks])}, "predicted_slope": scan.predicted, "xlabel": "m"},
        )

    return compute


def _witness(p: Params, cfg: ExperimentConfig) -> WitnessConfig:
    obj = p.get("witness", {}, dict) or {}
    try:
        return WitnessConfig(**{"atom_budget": cfg.atom_budget, **obj})
    except TypeError as exc:
        raise ConfigError(f"witness: {exc}") from None


def _tolerances(p: Params) -> Tolerances:
    obj = p.get("tolerances", {}, dict) or {}
    try:
        return Tolerances(**obj)
    except TypeError as exc:
        raise ConfigError(f"tolerances: {exc}") from None


def _validate_threshold(alpha, pp, gamma, Rs, witness):
    regime(alpha)
    if not pp > 1:
        raise ConfigError("p must exceed 1")
    if any(not R >= 2 for R in Rs):
        raise ConfigError("every R must be >= 2")
    side = predicted_outcome(alpha, pp, gamma)
    if side != "convergent":
        # the dataclasses check their own preconditions; building is deferred
        for R in Rs:
            case = "case_iii" if alpha <= 0.5 else "case_i"
            a = alpha if alpha > 1 or case == "case_iii" else 1 + witness.regime_ii_delta
            SharpExampleSpec(pp, a, R, case, witness.bump_order, witness.samples_per_bump)
    return side


def _threshold_outcome(verdicts):
    rows, conv, series = [], [], {}
    for v in verdicts:
        rows += _block_rows(v.blocks, alpha=v.alpha, p=v.p)
        conv += [b.converged for b in v.blocks]
        series[f"alpha={v.alpha:g}, gamma={v.gamma:g}"] = ([b.R for b in v.blocks], [b.value for b in v.blocks])
    return rows, conv, series


def prepare_threshold(p: Params, cfg: ExperimentConfig):
    alpha = p.get("alpha")
    pp = p.get("p", 2.0)
    gamma = p.get("gamma")
    Rs = r_values(p, "R", (7, 11))
    witness = _witness(p, cfg)
    tol = _tolerances(p)
    p.finish()
    _validate_threshold(alpha, pp, gamma, Rs, witness)

    def compute():
        v = threshold_experiment(alpha, pp, gamma, Rs, witness, tol)
        rows, conv, series = _threshold_outcome([v])
        ok = v.passed and all(conv)
        summary = {**{k: val for k, val in v.to_json().items() if k not in ("blocks", "fit")},
                   "slope": v.empirical_block_slope, "intercept": v.fit.intercept,
                   "max_residual": v.fit.max_residual, "all_converged": all(conv),
                   "verdict": "pass" if ok else "fail"}
        predicted_slope = gamma - v.boundary if v.predicted != "convergent" else None
        summary["predicted_slope"] = predicted_slope
        return Outcome(["alpha", "p"] + BLOCK_COLUMNS, rows, summary, ok, conv,
                       {"series": series, "predicted_slope": predicted_slope, "xlabel": "R"})

    return compute


def prepare_alpha0(p: Params, cfg: ExperimentConfig):
    pp = p.get("p", 2.0)
    gamma = p.get("gamma", 0.0)
    a_conv = p.get("alpha_convergent", 1.4)
    a_div = p.get("alpha_divergent", 1.3)
    R_conv = r_values(p, "R_convergent", (4, 8))
    R_div = r_values(p, "R_divergent", (7, 11))
    witness = _witness(p, cfg)
    tol = _tolerances(p)
    p.finish()
    if _validate_threshold(a_conv, pp, gamma, R_conv, witness) != "convergent":
        raise ConfigError(f"alpha={a_conv} is not on the convergent side at gamma={gamma}")
    if _validate_threshold(a_div, pp, gamma, R_div, witness) == "convergent":
        raise ConfigError(f"alpha={a_div} is not on the sharpness side at gamma={gamma}")

    def compute():
        vs = [threshold_experiment(a_conv, pp, gamma, R_conv, witness, tol),
              threshold_experiment(a_div, pp, gamma, R_div, witness, tol)]
        rows, conv, series = _threshold_outcome(vs)
        ok = all(v.passed for v in vs) and all(conv)
        summary = {
            "critical_alpha": 2 * (pp + gamma) / (2 * pp - 1),
            "sides": [{k: val for k, val in v.to_json().items() if k not in ("blocks", "fit")} for v in vs],
            "slope": vs[1].empirical_block_slope,
            "predicted": 0.0,
            "all_converged": all(conv),
            "verdict": "pass" if ok else "fail",
        }
        return Outcome(["alpha", "p"] + BLOCK_COLUMNS, rows, summary, ok, conv,
                       {"series": series, "predicted_slope": None, "xlabel": "R"})

    return compute


def prepare_vdc(p: Params, cfg: ExperimentConfig):
    curve = _curve(p)
    lo, hi = p.get("xi2_exponents", [4, 12], lambda v: [int(x) for x in v])
    xs = [2.0**k for k in range(lo, hi + 1)]
    intervals = p.get("intervals", [[0.0, 1.0], [1.0, 2.0]], lambda v: [_interval(i) for i in v])
    max_ratio = p.get("max_ratio", 4.0)
    tol = p.get("tol", 1e-10)
    p.finish()
    if not intervals or any(b <= a for a, b in intervals):
        raise ConfigError("intervals must be nonempty [a, b] pairs with a < b")
    if min(xs) < 1:
        raise ConfigError("xi2 values must be >= 1")

    def compute():
        rows, series, spreads = [], {}, []
        for a, b in intervals:
            res = check_van_der_corput(curve, xs, interval=(a, b), tol=tol)
            vals = [v for _, v in res]
            spreads.append(max(vals) / min(vals))
            rows += [{"a": a, "b": b, "xi2": x, "normalized": v, "abs_ft": v / math.sqrt(x)} for x, v in res]
            series[f"[{a:g},{b:g}]"] = (xs, [v / math.sqrt(x) for x, v in res])
        ok = spreads[0] <= max_ratio
        summary = {
            "verdict_interval": list(intervals[0]),
            "spread": spreads[0],
            "spreads": {f"[{a:g},{b:g}]": s for (a, b), s in zip(intervals, spreads)},
            "max_ratio": max_ratio,
            "slope": fit_loglog(xs, [r["abs_ft"] for r in rows[: len(xs)]]).slope,
            "predicted": -0.5,
            "verdict": "pass" if ok else "fail",
        }
        return Outcome(["a", "b", "xi2", "normalized", "abs_ft"], rows, summary, ok, [],
                       {"series": series, "predicted_slope": -0.5, "xlabel": "xi2"})

    return compute


def prepare_whitney(p: Params, cfg: ExperimentConfig):
    n_max = p.get("n_max", 12, int)
    count = p.get("points", 10_000, int)
    brute_max = p.get("brute_force_max_n", 8, int)
    p.finish()
    if n_max < 2 or count < 1:
        raise ConfigError("need n_max >= 2 and points >= 1")

    def compute():
        pts = random_cover_points(count, n_max, cfg.seed)
        rep = whitney_cover_check(pts, n_max)
        summary = {**rep.to_json(), "pairs_n2": len(whitney_pairs(2))}
        ok = rep.histogram == {1: count} and summary["pairs_n2"] == 6
        if n_max <= brute_max:
            brute = whitney_cover_check(pts, n_max, method="enumerate")
            summary["brute_force_agrees"] = bool(np.array_equal(brute.multiplicities, rep.multiplicities))
            ok = ok and summary["brute_force_agrees"]
        summary["verdict"] = "pass" if ok else "fail"
        rows = [{"multiplicity": k, "count": v} for k, v in sorted(rep.histogram.items())]
        return Outcome(["multiplicity", "count"], rows, summary, ok)

    return compute


def prepare_tubes(p: Params, cfg: ExperimentConfig):
    curve = _curve(p)
    Rs = r_values(p, "R", (6, 10))
    delta = p.get("delta", 0.1)
    C = p.get("C", 2.0)
    c = p.get("c", 0.5)
    ns = p.get("n_values", [2, 3, 4], lambda v: [int(x) for x in v])
    I = p.get("I_tilde", [1.0, 1.25], _interval)
    J = p.get("J_tilde", [1.75, 2.0], _interval)
    t0, s0 = p.get("crossing", [1.0, 1.875], _interval)
    samples = p.get("mc_samples", 100_000, int)
    slope_tol = p.get("slope_tolerance", 0.05)
    p.finish()
    if not 0 < delta < 1 or not C > 0 or not c > 0:
        raise ConfigError("need 0 < delta < 1, C > 0, c > 0")
    if samples < 10_000:
        raise ConfigError("mc_samples must be >= 10**4")
    dist = max(J[0] - I[1], I[0] - J[1], 0.0)
    for n in ns:
        if dist < c * 2.0**-n:
            raise ConfigError(f"dist(I, J) = {dist:g} is below c 2**-n = {c * 2.0**-n:g} for n={n}")

    def compute():
        rows, fits, series, within = [], {}, {}, []
        for n in ns:
            ratios = []
            for k, R in enumerate(Rs):
                x = crossing_shift(curve, R, t0, s0)
                seed = int(np.random.SeedSequence([cfg.seed, n, k]).generate_state(1, np.uint64)[0])
                ti = tube_intersection_area(curve, R, delta, C, I, J, x, samples, n=n, c=c, seed=seed)
                wb = w_bound_scan(curve, R, delta, C, c, I, J, x, n=n)
                ratios.append(ti.bound_ratio)
                within.append(wb.within_bound)
                rows.append({"n": n, "R": R, "area": ti.area, "std_error": ti.std_error, "bound": ti.bound,
                             "bound_ratio": ti.bound_ratio, "w_max": wb.w_max, "w_bound": wb.bound,
                             "within_bound": wb.within_bound})
            fits[str(n)] = fit_loglog(Rs, ratios).slope
            series[f"n={n}"] = (Rs, ratios)
        ok = all(s <= slope_tol for s in fits.values()) and all(within)
        summary = {"slopes": fits, "slope": max(fits.values()), "predicted": 0.0, "slope_tolerance": slope_tol,
                   "w_within_bound": all(within), "verdict": "pass" if ok else "fail"}
        return Outcome(list(rows[0]), rows, summary, ok, [],
                       {"series": series, "predicted_slope": 0.0, "xlabel": "R"})

    return compute


def prepare_rect(p: Params, cfg: ExperimentConfig):
    curve = _curve(p)
    Rs = r_values(p, "R", (0, 10))
    intervals = p.get("intervals", [[1.0, 2.0], [1.0, 1.5], [1.0, 1.125]], lambda v: [_interval(i) for i in v])
    c1 = p.get("c1", 8.0)
    p.finish()
    for a, b in intervals:
        if not 1.0 <= a < b <= 2.0:
            raise ConfigError(f"interval [{a}, {b}] is not a subinterval of [1, 2]")
    if min(Rs) < 1:
        raise ConfigError("R must be >= 1")

    def compute():
        rows, series = [], {}
        for a, b in intervals:
            longs = []
            for R in Rs:
                rect = bounding_rect(curve, R, (a, b), c1=c1)
                meta = rect.meta
                rows.append({"a": a, "b": b, "R": R, "long_side": rect.long_side, "short_side": rect.short_side,
                             "long_ratio": meta["long_ratio"], "short_ratio": meta["short_ratio"],
                             "within_budget": meta["within_budget"]})
                longs.append(rect.long_side)
            series[f"[{a:g},{b:g}]"] = (Rs, longs)
        ok = all(r["within_budget"] for r in rows)
        first = [r["long_side"] for r in rows[: len(Rs)]]
        summary = {"slope": fit_loglog(Rs, first).slope, "predicted": 1.0,
                   "all_within_budget": ok, "verdict": "pass" if ok else "fail"}
        return Outcome(list(rows[0]), rows, summary, ok, [],
                       {"series": series, "predicted_slope": 1.0, "xlabel": "R"})

    return compute


PREPARE = {
    "decay": prepare_decay,
    "m_scan": prepare_m_scan,
    "threshold": prepare_threshold,
    "alpha0": prepare_alpha0,
    "vdc": prepare_vdc,
    "whitney": prepare_whitney,
    "tubes": prepare_tubes,
    "rect": prepare_rect,
}


def validate(cfg: ExperimentConfig):
    """Check every precondition and return the compute step; raises ConfigError."""
    params = Params(cfg.parameters)
    try:
        return PREPARE[cfg.experiment](params, cfg)
    except (ConfigError, AtomBudgetError):
        raise
    except (PreconditionError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{cfg.experiment}: {exc}") from None


# --------------------------------------------------------------------------
# Running and reporting


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.16e}"
    return str(v)


def write_results_csv(outcome: Outcome, path: Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(outcome.columns)
        for row in outcome.rows:
            w.writerow([_fmt(row[c]) for c in outcome.columns])


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _dump(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")


def run(config: ExperimentConfig) -> RunManifest:
    """Validate, execute and persist one experiment.

    Validation failures raise :class:`ConfigError` before anything is written.
    A failure during compute removes partial outputs, records the failing
    experiment and parameters in ``manifest.json`` and re-raises.
    """
    compute = validate(config)
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output_dir {out} is not writable: {exc}") from None
    for name in OUTPUT_FILES:
        (out / name).unlink(missing_ok=True)
    start = time.perf_counter()
    try:
        outcome = compute()
        write_results_csv(outcome, out / "results.csv")
        _dump(outcome.summary, out / "summary.json")
        if outcome.plot is not None:
            (out / "plot.svg").write_text(
                loglog_svg(
                    outcome.plot["series"],
                    title=config.experiment,
                    xlabel=outcome.plot.get("xlabel", "R"),
                    predicted_slope=outcome.plot.get("predicted_slope"),
                )
            )
    except BaseException as exc:
        for name in OUTPUT_FILES:
            (out / name).unlink(missing_ok=True)
        manifest = RunManifest(
            config.to_json(), __version__, time.perf_counter() - start, [], {}, None,
            error={"experiment": config.experiment, "parameters": config.parameters,
                   "type": type(exc).__name__, "message": str(exc)},
        )
        _dump(manifest.to_json(), out / "manifest.json")
        raise
    manifest = RunManifest(
        config.to_json(), __version__, time.perf_counter() - start, outcome.converged,
        {"verdict": outcome.summary.get("verdict"), "slope": outcome.summary.get("slope"),
         "predicted": outcome.summary.get("predicted")},
        outcome.passed,
    )
    _dump(manifest.to_json(), out / "manifest.json")
    return manifest


def exit_status(exc: BaseException | None, manifest: RunManifest | None = None) -> int:
    if exc is None:
        return EXIT_PASS if manifest is not None and manifest.passed else EXIT_FAIL
    if isinstance(exc, (AtomBudgetError, ConvergenceError, MemoryError)):
        return EXIT_RESOURCE
    if isinstance(exc, PreconditionError):
        return EXIT_CONFIG
    return EXIT_FAIL


REPORT_COLUMNS = ["run", "experiment", "parameters", "measured", "predicted", "passed", "warning"]


def report(run_dirs) -> list[dict]:
    """One row per run directory; raises LabError naming a missing or corrupt manifest."""
    rows = []
    for d in run_dirs:
        path = Path(d) / "manifest.json"
        try:
            m = json.loads(path.read_text())
            cfg = m["config"]
            verdicts = m.get("verdicts", {})
            version = m["version"]
        except FileNotFoundError:
            raise LabError(f"missing manifest: {path}") from None
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise LabError(f"corrupt manifest {path}: {exc}") from None
        warning = "" if version == __version__ else f"version {version} != {__version__}"
        if m.get("error"):
            warning = (warning + "; " if warning else "") + f"run failed: {m['error'].get('message', '')}"
        rows.append({
            "run": str(d),
            "experiment": cfg.get("experiment"),
            "parameters": json.dumps(cfg.get("parameters", {}), sort_keys=True),
            "measured": verdicts.get("slope"),
            "predicted": verdicts.get("predicted"),
            "passed": m.get("passed"),
            "warning": warning,
        })
    return rows


def format_report(rows: list[dict]) -> str:
    lines = ["\t".join(REPORT_COLUMNS)]
    for r in rows:
        lines.append("\t".join("" if r[c] is None else str(r[c]) for c in REPORT_COLUMNS))
    return "\n".join(lines) + "\n"
