from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restrictlab.curves import parabola, power_rescaled, quadratic_m
from restrictlab.errors import NodeFloorError, PreconditionError
from restrictlab.measures import (
    AtomicMeasure,
    SharpExampleSpec,
    build_cantor_measure,
    build_sharp_example,
    cantor_spec_for_alpha,
    grid_measure,
    point_mass,
)
from restrictlab.restriction import (
    BlockIntegral,
    Tolerances,
    WitnessConfig,
    boundary_gamma,
    cantor_depth_for,
    fit_decay,
    m_dependence_scan,
    predicted_outcome,
    regime,
    restriction_integral,
    threshold_experiment,
    weighted_block,
)

# 4e6-node midpoint value of integral_1^2 cos^2(pi 256 t^2) dt
TWO_ATOM_256 = 0.5000000422744226
# sqrt-window block of the (p=2, alpha=1.5, R=2^7) sharp example at gamma=0.25,
# direct atom sums at 4x the node floor
SHARP_ANCHOR_128 = 0.06584743571317354


def _blocks(values, Rs):
    return [BlockIntegral(R, v, 0.0, "dyadic", 8, v, True) for R, v in zip(Rs, values)]


# restriction_integral


@pytest.mark.parametrize("R", [1.0, 64.0, 4096.0])
@pytest.mark.parametrize("m", [1, 2, 16])
def test_unit_atom_value_one(R, m):
    b = restriction_integral(point_mass(), quadratic_m(m), R)
    assert b.value == pytest.approx(1.0, abs=1e-12)
    assert b.converged


def test_offset_atom_value_one():
    mu = AtomicMeasure([[0.0, 3.7]], [1.0], declared_alpha=0.0)
    assert restriction_integral(mu, parabola(), 2.0**9).value == pytest.approx(1.0, abs=1e-12)


def test_two_atoms_against_oracle():
    mu = AtomicMeasure([[0.0, 0.0], [0.0, 1.0]], [0.5, 0.5], declared_alpha=0.0)
    b = restriction_integral(mu, parabola(), 256.0)
    assert b.value == pytest.approx(TWO_ATOM_256, abs=1e-5)
    assert abs(b.value - 0.5) < 0.01


def test_node_floor_enforced():
    mu = build_cantor_measure(cantor_spec_for_alpha(1.5, 4))
    with pytest.raises(NodeFloorError) as info:
        restriction_integral(mu, parabola(), 128.0, quad_nodes=100)
    assert info.value.required >= 8 * math.ceil(128.0 * 3 * mu.support_radius)
    assert info.value.given == 100


def test_total_cancellation_rejected():
    mu = AtomicMeasure([[0.1, 0.2], [0.1, 0.2]], [1.0, -1.0], declared_alpha=0.0)
    with pytest.raises(PreconditionError):
        restriction_integral(mu, parabola(), 8.0)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.01, 100.0))
def test_mass_scaling_quadratic(c):
    mu = build_cantor_measure(cantor_spec_for_alpha(1.3, 4))
    a = restriction_integral(mu, parabola(), 64.0).value
    b = restriction_integral(mu.scaled(c), parabola(), 64.0).value
    assert b == pytest.approx(c * c * a, rel=1e-12)


# weighted blocks


def test_weighted_unit_atom_dyadic_is_R():
    for R in (2.0, 64.0, 1000.0):
        assert weighted_block(point_mass(), 2.0, 0.0, R, "dyadic").value == pytest.approx(R, rel=1e-12)


def test_weighted_log_two():
    b = weighted_block(point_mass(), 2.0, -1.0, 64.0, "dyadic", quad_nodes=2**10)
    assert b.value == pytest.approx(math.log(2), abs=1e-6)


def test_weighted_rejects():
    with pytest.raises(PreconditionError):
        weighted_block(point_mass(), 1.0, 0.0, 64.0)
    with pytest.raises(PreconditionError):
        weighted_block(point_mass(), 2.0, 0.0, 1.0)
    with pytest.raises(PreconditionError):
        weighted_block(point_mass(), 2.0, 0.0, 64.0, kind="octave")
    mu = build_cantor_measure(cantor_spec_for_alpha(1.5, 4))
    with pytest.raises(NodeFloorError):
        weighted_block(mu, 2.0, 0.0, 64.0, quad_nodes=16)


def test_sharp_example_regression_anchor():
    mu, _ = build_sharp_example(SharpExampleSpec(2.0, 1.5, 2.0**7, "case_i"))
    b = weighted_block(mu, 2.0, 0.25, 2.0**7, "sqrt_window")
    assert b.value == pytest.approx(SHARP_ANCHOR_128, rel=1e-6)
    assert b.converged


@pytest.mark.parametrize("R", [4.0, 32.0, 128.0])
def test_change_of_variables_identity(R):
    mu = build_cantor_measure(cantor_spec_for_alpha(1.5, 8))
    p = 2.0
    curve = power_rescaled(p, R)
    block = weighted_block(mu, p, 0.0, R, "dyadic")
    nodes = max(block.quad_nodes, 8 * math.ceil(R * (1 + curve.max_slope()) * mu.support_radius))
    block = weighted_block(mu, p, 0.0, R, "dyadic", quad_nodes=nodes)
    ri = restriction_integral(mu, curve, R, quad_nodes=nodes)
    assert block.value == pytest.approx(R * ri.value, rel=0.005)


# fits


def test_fit_exact_power_law():
    Rs = [2.0**k for k in range(6, 11)]
    fit = fit_decay(_blocks([3.0 * R**-0.8 for R in Rs], Rs))
    assert fit.slope == pytest.approx(-0.8, abs=1e-12)
    assert fit.max_residual < 1e-12


def test_fit_independent_of_order_and_refit():
    Rs = [2.0**k for k in range(6, 11)]
    vals = [R**-0.5 * (1 + 0.1 * math.sin(R)) for R in Rs]
    a = fit_decay(_blocks(vals, Rs))
    b = fit_decay(_blocks(vals[::-1], Rs[::-1]))
    assert a.slope == b.slope
    assert abs(a.refit().slope - a.slope) <= 1e-10


def test_fit_rejects():
    with pytest.raises(PreconditionError):
        fit_decay(_blocks([1.0, 2.0], [2.0, 4.0]))
    with pytest.raises(PreconditionError):
        fit_decay(_blocks([1.0, 0.0, 2.0], [2.0, 4.0, 8.0]))
    with pytest.raises(PreconditionError):
        fit_decay(_blocks([1.0, 1.0, 2.0], [2.0, 2.0, 8.0]))


def test_cantor_decay_small_range():
    mu = build_cantor_measure(cantor_spec_for_alpha(1.26, cantor_depth_for(1.26, 4 * 2**10)), atom_budget=10**12)
    blocks = [restriction_integral(mu, parabola(), 2.0**k) for k in range(6, 11)]
    assert all(b.converged for b in blocks)
    assert fit_decay(blocks).slope <= -1.26 / 2 + 0.15


# m dependence


def test_m_scan_unit_atom_flat():
    scan = m_dependence_scan(point_mass(), 0.0, 64.0, [1, 2, 4, 8])
    assert scan.fit.slope == pytest.approx(0.0, abs=1e-12)


def test_m_scan_rejects():
    with pytest.raises(PreconditionError):
        m_dependence_scan(point_mass(), 0.0, 64.0, [0.5, 2, 4])
    with pytest.raises(PreconditionError):
        m_dependence_scan(point_mass(), 0.0, 64.0, [2, 4])


def test_m_scan_grid_measure():
    # the grid must be much finer than the largest frequency, 3 m R, or its periodic transform aliases
    scan = m_dependence_scan(grid_measure(2**16), 2.0, 2.0**7, [2, 4, 8, 16])
    assert scan.predicted == -1.0
    assert scan.fit.slope <= -0.7


# thresholds


@pytest.mark.parametrize(
    "alpha,expected",
    [(1.0001, "i"), (1.5, "i"), (1.999, "i"), (1.0, "ii"), (0.51, "ii"), (0.5, "iii"), (0.01, "iii")],
)
def test_regime_assignment(alpha, expected):
    assert regime(alpha) == expected


@pytest.mark.parametrize("alpha", [0.0, 2.0, -1.0, 2.5])
def test_regime_rejects(alpha):
    with pytest.raises(PreconditionError):
        regime(alpha)


def test_boundary_gamma_formulas():
    assert boundary_gamma(1.5, 2.0) == pytest.approx(0.25)
    assert boundary_gamma(0.4, 2.0) == pytest.approx(-0.6)
    assert boundary_gamma(0.8, 2.0) == -0.5
    assert boundary_gamma(1.4, 2.0) == pytest.approx(0.1)
    assert boundary_gamma(1.3, 2.0) == pytest.approx(-0.05)


def test_predicted_sides_around_four_thirds():
    assert predicted_outcome(1.4, 2.0, 0.0) == "convergent"
    assert predicted_outcome(1.3, 2.0, 0.0) == "divergent_examples_exist"
    assert predicted_outcome(1.5, 2.0, 0.25) == "boundary"
    with pytest.raises(PreconditionError):
        predicted_outcome(1.5, 2.0, -1.0)


def test_threshold_convergent_side_small():
    v = threshold_experiment(1.4, 2.0, 0.0, [2.0**k for k in range(3, 7)], WitnessConfig(atom_budget=10**12))
    assert v.predicted == "convergent" and v.regime == "i"
    assert v.empirical_block_slope <= -0.03 and v.passed
    assert "cantor" in v.witness


def test_threshold_witness_respects_default_budget():
    from restrictlab.errors import AtomBudgetError

    with pytest.raises(AtomBudgetError):
        threshold_experiment(1.4, 2.0, 0.0, [2.0**k for k in range(3, 7)])


def test_threshold_regime_iii_sharpness_runs():
    v = threshold_experiment(0.4, 2.0, -0.5, [2.0**k for k in range(5, 8)])
    assert v.predicted == "divergent_examples_exist"
    assert v.blocks[0].block_kind == "dyadic"
    assert all(b.converged for b in v.blocks)


def test_tolerances_recorded_in_config():
    tol = Tolerances()
    assert (tol.decay_slope, tol.boundary_slope, tol.growth_slope, tol.boundary_band) == (-0.03, -0.05, 0.03, 0.03)


def test_threshold_verdict_json():
    v = threshold_experiment(1.4, 2.0, 0.0, [8.0, 16.0, 32.0], WitnessConfig(atom_budget=10**12))
    out = v.to_json()
    assert out["regime"] == "i" and len(out["blocks"]) == 3
    assert np.isfinite(out["spread"])
