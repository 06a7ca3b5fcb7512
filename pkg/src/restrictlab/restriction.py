"""Restriction integrals over curves and frequency blocks, decay fits, threshold experiments."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from restrictlab.constants import DEFAULT_ATOM_BUDGET
from restrictlab.curves import CurveSpec, quadratic_m
from restrictlab.errors import NodeFloorError, PreconditionError
from restrictlab.measures import (
    AtomicMeasure,
    SharpExampleSpec,
    build_cantor_measure,
    build_sharp_example,
    cantor_spec_for_alpha,
)
from restrictlab.oscillatory import ft_batch

BLOCK_KINDS = ("unit_interval", "dyadic", "sqrt_window")

# smallest block value treated as a genuine result rather than total cancellation
UNDERFLOW = 1e-280


@dataclass
class BlockIntegral:
    R: float
    value: float
    gamma: float
    block_kind: str
    quad_nodes: int
    value_refined: float = math.nan
    converged: bool = False

    @property
    def relative_change(self) -> float:
        if self.value == 0:
            return math.inf
        return abs(self.value_refined - self.value) / abs(self.value)

    def to_row(self) -> dict:
        return {
            "R": self.R,
            "value": self.value,
            "gamma": self.gamma,
            "kind": self.block_kind,
            "quad_nodes": self.quad_nodes,
            "converged": self.converged,
        }


@dataclass(frozen=True)
class Tolerances:
    """Acceptance thresholds of the threshold experiments."""

    stability: float = 0.01
    decay_slope: float = -0.03
    boundary_slope: float = -0.05
    growth_slope: float = 0.03
    boundary_band: float = 0.03
    boundary_spread: float = 10.0
    decay_epsilon: float = 0.15


def node_floor(length: float, slope: float, support_radius: float) -> int:
    """8 nodes per unit of phase variation length * (1 + slope) * support_radius."""
    return 8 * max(1, math.ceil(length * (1.0 + slope) * support_radius))


def _midpoint_nodes(a: float, b: float, n: int) -> tuple[np.ndarray, float]:
    h = (b - a) / n
    return a + (np.arange(n) + 0.5) * h, h


def _sq_modulus_sum(measure, freqs, weights=None) -> float:
    vals = np.abs(ft_batch(measure, freqs)) ** 2
    if weights is not None:
        vals = vals * weights
    return float(np.sum(vals))


def _restriction_value(measure, curve, R, n):
    t, h = _midpoint_nodes(1.0, 2.0, n)
    return h * _sq_modulus_sum(measure, R * curve.point(t))


def _with_refinement(compute, n, tol):
    """Value at n nodes (retried once at 4n if it underflows), plus the 2n value for the stability flag."""
    value = compute(n)
    if value < UNDERFLOW:
        n *= 4
        value = compute(n)
        if value < UNDERFLOW:
            raise PreconditionError(
                f"block value {value:g} underflows even at {n} nodes (total cancellation)"
            )
    refined = compute(2 * n)
    converged = abs(refined - value) <= tol * abs(value)
    return n, value, refined, converged


def restriction_integral(
    measure: AtomicMeasure,
    curve: CurveSpec,
    R: float,
    quad_nodes: int | None = None,
    tol: float = Tolerances.stability,
) -> BlockIntegral:
    """Midpoint value of integral_1^2 |mu_hat(R gamma(t))|**2 dt.

    The node floor is 8 ceil(R (1 + m_eff) support_radius), m_eff being the
    larger of the curve's m and its sampled max |phi'|. A second evaluation at
    twice the nodes sets ``converged``.
    """
    slope = max(curve.m, curve.max_slope())
    floor = node_floor(R, slope, measure.support_radius)
    if quad_nodes is None:
        quad_nodes = floor
    if quad_nodes < floor:
        raise NodeFloorError(quad_nodes, floor)
    n, value, refined, ok = _with_refinement(lambda k: _restriction_value(measure, curve, R, k), quad_nodes, tol)
    return BlockIntegral(float(R), value, 0.0, "unit_interval", n, refined, ok)


def block_interval(R: float, kind: str) -> tuple[float, float]:
    if kind == "unit_interval":
        return 1.0, 2.0
    if kind == "dyadic":
        return float(R), 2.0 * R
    if kind == "sqrt_window":
        return float(R), R + math.sqrt(R)
    raise PreconditionError(f"block kind must be one of {BLOCK_KINDS}")


def block_node_floor(measure: AtomicMeasure, p: float, R: float, kind: str) -> int:
    a, b = block_interval(R, kind)
    return node_floor(b - a, p * b ** (p - 1), measure.support_radius)


def _block_value(measure, p, gamma, a, b, n):
    t, h = _midpoint_nodes(a, b, n)
    freqs = np.stack([t, t**p], axis=1)
    return h * _sq_modulus_sum(measure, freqs, t**gamma)


def weighted_block(
    measure: AtomicMeasure,
    p: float,
    gamma: float,
    R: float,
    kind: str = "dyadic",
    quad_nodes: int | None = None,
    tol: float = Tolerances.stability,
) -> BlockIntegral:
    """Midpoint value of integral over the block of |mu_hat(t, t**p)|**2 t**gamma dt.

    Blocks: [1, 2], [R, 2R] or [R, R + sqrt(R)]. The node floor uses the
    block length and the largest slope p t**(p-1) on it.
    """
    if not p > 1:
        raise PreconditionError("p must exceed 1")
    if not R >= 2 and kind != "unit_interval":
        raise PreconditionError("R must be >= 2")
    a, b = block_interval(R, kind)
    floor = block_node_floor(measure, p, R, kind)
    if quad_nodes is None:
        quad_nodes = floor
    if quad_nodes < floor:
        raise NodeFloorError(quad_nodes, floor)
    n, value, refined, ok = _with_refinement(
        lambda k: _block_value(measure, p, gamma, a, b, k), quad_nodes, tol
    )
    return BlockIntegral(float(R), value, float(gamma), kind, n, refined, ok)


# --------------------------------------------------------------------------
# Power-law fits


@dataclass
class DecayFit:
    slope: float
    intercept: float
    max_residual: float
    points: list

    def refit(self) -> "DecayFit":
        x, y = np.array(self.points, dtype=float).T
        return fit_points(x, y)

    def to_json(self) -> dict:
        return asdict(self)


def fit_loglog(xs, values) -> DecayFit:
    """Ordinary least squares of log(value) on log(x)."""
    return fit_points(np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(values, dtype=float)))


def fit_points(x, y) -> DecayFit:
    """Ordinary least squares line through the points (x, y)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    slope = float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))
    intercept = float(ym - slope * xm)
    resid = y - (intercept + slope * x)
    return DecayFit(slope, intercept, float(np.max(np.abs(resid))), [[float(a), float(b)] for a, b in zip(x, y)])


def fit_decay(blocks: Sequence[BlockIntegral]) -> DecayFit:
    """Log-log fit of block value against R (blocks sorted by R first)."""
    if len(blocks) < 3:
        raise PreconditionError("need at least 3 blocks to fit")
    blocks = sorted(blocks, key=lambda b: b.R)
    Rs = [b.R for b in blocks]
    if len(set(Rs)) != len(Rs):
        raise PreconditionError("block R values must be distinct")
    if any(b.value <= 0 for b in blocks):
        raise PreconditionError("nonpositive block value; rerun with more nodes")
    return fit_loglog(Rs, [b.value for b in blocks])


@dataclass
class MScan:
    fit: DecayFit
    blocks: list
    m_values: list
    predicted: float


def m_dependence_scan(
    measure: AtomicMeasure,
    alpha: float,
    R_fixed: float,
    m_values: Sequence[float],
    quad_nodes: int | None = None,
) -> MScan:
    """Fit of log restriction_integral(phi_m) against log m at fixed R.

    phi_m(t) = m t**2/2 + m t/2. The fitted slope is to be compared with 1 - alpha.
    """
    if len(m_values) < 3:
        raise PreconditionError("need at least 3 values of m")
    if any(not m >= 1 for m in m_values):
        raise PreconditionError("every m must be >= 1")
    blocks = [restriction_integral(measure, quadratic_m(m), R_fixed, quad_nodes) for m in m_values]
    fit = fit_loglog(m_values, [b.value for b in blocks])
    return MScan(fit, blocks, [float(m) for m in m_values], 1.0 - alpha)


# --------------------------------------------------------------------------
# Threshold experiments


def regime(alpha: float) -> str:
    if 1 < alpha < 2:
        return "i"
    if 0.5 < alpha <= 1:
        return "ii"
    if 0 < alpha <= 0.5:
        return "iii"
    raise PreconditionError(f"alpha must lie in (0, 2), got {alpha}")


def boundary_gamma(alpha: float, p: float) -> float:
    """Largest admissible weight exponent for the given regime."""
    reg = regime(alpha)
    if reg == "i":
        return alpha * p - alpha / 2 - p
    if reg == "ii":
        return -0.5
    return alpha - 1


def predicted_outcome(alpha: float, p: float, gamma: float, eps: float = 1e-12) -> str:
    if not gamma > -1:
        raise PreconditionError("gamma must exceed -1")
    b = boundary_gamma(alpha, p)
    if gamma < b - eps:
        return "convergent"
    if gamma <= b + eps:
        return "boundary"
    return "divergent_examples_exist"


@dataclass
class ThresholdVerdict:
    alpha: float
    p: float
    gamma: float
    regime: str
    predicted: str
    boundary: float
    empirical_block_slope: float
    observed: str
    passed: bool
    witness: str
    spread: float = math.nan
    fit: DecayFit | None = None
    blocks: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = {k: v for k, v in self.__dict__.items() if k not in ("fit", "blocks")}
        out["fit"] = self.fit.to_json() if self.fit else None
        out["blocks"] = [b.to_row() for b in self.blocks]
        return out


@dataclass(frozen=True)
class WitnessConfig:
    cantor_branches: int = 2
    cantor_depth: int | None = None
    atom_budget: int = DEFAULT_ATOM_BUDGET
    bump_order: int = 2
    samples_per_bump: int = 16
    regime_ii_delta: float = 0.05


def cantor_depth_for(alpha: float, max_frequency: float, branches: int = 2, oversample: float = 4.0) -> int:
    """Smallest depth whose cell size resolves oversample * max_frequency."""
    r = branches ** (-2.0 / alpha)
    return max(1, math.ceil(math.log(oversample * max_frequency) / math.log(1.0 / r)))


def sharp_witness(alpha, p, R, cfg: WitnessConfig = WitnessConfig()):
    """Per-R sharp example used on the divergence side, with its block kind."""
    reg = regime(alpha)
    if reg == "i":
        spec = SharpExampleSpec(p, alpha, R, "case_i", cfg.bump_order, cfg.samples_per_bump)
        kind = "sqrt_window"
    elif reg == "ii":
        spec = SharpExampleSpec(p, 1 + cfg.regime_ii_delta, R, "case_i", cfg.bump_order, cfg.samples_per_bump)
        kind = "sqrt_window"
    else:
        spec = SharpExampleSpec(p, alpha, R, "case_iii", cfg.bump_order, cfg.samples_per_bump)
        kind = "dyadic"
    measure, _ = build_sharp_example(spec, atom_budget=cfg.atom_budget)
    return measure, kind


def threshold_experiment(
    alpha: float,
    p: float,
    gamma: float,
    R_list: Sequence[float],
    witness: WitnessConfig = WitnessConfig(),
    tolerances: Tolerances = Tolerances(),
) -> ThresholdVerdict:
    """Empirical side of the weighted restriction threshold.

    Below the boundary exponent the dyadic blocks of a Cantor measure of
    dimension alpha must decay (slope <= tolerances.decay_slope). At the
    boundary the sharp-example blocks must not decay (slope >=
    tolerances.boundary_slope) and beyond it they must grow (slope >=
    tolerances.growth_slope). At the boundary the max/min spread of the
    block values must also stay within tolerances.boundary_spread.
    """
    reg = regime(alpha)
    predicted = predicted_outcome(alpha, p, gamma)
    bnd = boundary_gamma(alpha, p)
    R_list = sorted(float(R) for R in R_list)
    blocks = []
    if predicted == "convergent":
        top = 2 * max(R_list)
        depth = witness.cantor_depth or cantor_depth_for(alpha, math.hypot(top, top**p), witness.cantor_branches)
        spec = cantor_spec_for_alpha(alpha, depth, witness.cantor_branches)
        mu = build_cantor_measure(spec, atom_budget=witness.atom_budget)
        for R in R_list:
            blocks.append(weighted_block(mu, p, gamma, R, "dyadic"))
        name = f"cantor(alpha={spec.alpha:.4g}, depth={depth})"
    else:
        for R in R_list:
            mu, kind = sharp_witness(alpha, p, R, witness)
            blocks.append(weighted_block(mu, p, gamma, R, kind))
        name = f"sharp_example({blocks[0].block_kind})"
    fit = fit_decay(blocks)
    slope = fit.slope
    values = [b.value for b in blocks]
    spread = max(values) / min(values)
    if abs(slope) < tolerances.boundary_band:
        observed = "boundary"
    elif slope < 0:
        observed = "decaying"
    else:
        observed = "growing"
    if predicted == "convergent":
        passed = slope <= tolerances.decay_slope
    elif predicted == "boundary":
        passed = slope >= tolerances.boundary_slope and spread <= tolerances.boundary_spread
    else:
        passed = slope >= tolerances.growth_slope
    return ThresholdVerdict(
        alpha=alpha, p=p, gamma=gamma, regime=reg, predicted=predicted, boundary=bnd,
        empirical_block_slope=slope, observed=observed, passed=bool(passed),
        witness=name, spread=spread, fit=fit, blocks=blocks,
    )
