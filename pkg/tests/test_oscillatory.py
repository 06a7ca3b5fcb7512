from __future__ import annotations

import cmath
import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restrictlab.constants import FT_SIGN
from restrictlab.curves import linear, parabola
from restrictlab.errors import ConvergenceError, PreconditionError
from restrictlab.measures import (
    AtomicMeasure,
    CantorSpec,
    SharpExampleSpec,
    build_cantor_measure,
    build_sharp_example,
    cantor_spec_for_alpha,
    point_mass,
)
from restrictlab.oscillatory import check_van_der_corput, curve_arc_ft, ft_atomic, ft_batch

# 50-digit direct sum over the 8 depth-3 middle-thirds cells at xi = (3, 0)
CANTOR3_AT_3 = -0.38302222155948901760
# 10**6-node midpoint rule for the parabola arc on [1, 2] at xi = (0, 64)
ARC_ORACLE_64 = complex(1.3527481777882712e-06, -0.0006216933764495534)


def test_sign_convention():
    assert FT_SIGN == -1
    mu = AtomicMeasure([[0.25, 0.0]], [1.0], declared_alpha=0.0)
    assert ft_atomic(mu, (1.0, 0.0)) == pytest.approx(cmath.exp(-2j * math.pi * 0.25))


def test_single_atom_at_origin():
    for xi in [(0, 0), (3.7, -1e6), (1e9, 2.5)]:
        assert ft_atomic(point_mass(), xi) == 1.0


def test_two_point_symmetry():
    mu = AtomicMeasure([[-0.5, 0.0], [0.5, 0.0]], [0.5, 0.5], declared_alpha=0.0)
    assert ft_atomic(mu, (1.0, 0.0)) == pytest.approx(-1.0, abs=1e-15)


def test_cantor_depth3_against_extended_precision():
    mu = build_cantor_measure(CantorSpec(2, 1 / 3, 1, 1.0, 3))
    for method in ("direct", "factored"):
        val = ft_atomic(mu, (3.0, 0.0), method=method)
        assert val.real == pytest.approx(CANTOR3_AT_3, abs=1e-14)
        assert abs(val.imag) < 1e-14


def test_cantor_oracle_recomputed():
    mpmath.mp.dps = 50
    total = mpmath.mpc(0)
    for bits in itertools.product([0, 1], repeat=3):
        left = sum(mpmath.mpf(2 * b) / 3 ** (j + 1) for j, b in enumerate(bits))
        x = left + mpmath.mpf(1) / 54 - mpmath.mpf(1) / 2
        total += mpmath.exp(-6j * mpmath.pi * x) / 8
    assert float(total.real) == pytest.approx(CANTOR3_AT_3, abs=1e-18)


def test_ft_batch_empty_and_single():
    mu = build_cantor_measure(cantor_spec_for_alpha(1.3, 3))
    assert ft_batch(mu, np.zeros((0, 2))).shape == (0,)
    assert ft_batch(mu, [[2.0, 3.0]])[0] == ft_atomic(mu, (2.0, 3.0))


def test_ft_batch_matches_pointwise_exactly():
    mu = build_cantor_measure(cantor_spec_for_alpha(1.5, 4))
    pts = np.random.default_rng(0).normal(scale=100.0, size=(1000, 2))
    batch = ft_batch(mu, pts, chunk_size=1, method="direct")
    single = np.array([ft_atomic(mu, p, method="direct") for p in pts])
    assert np.array_equal(batch, single)


def test_ft_batch_bitwise_reproducible_across_threads():
    mu, _ = build_sharp_example(SharpExampleSpec(2.0, 1.5, 2.0**7))
    pts = np.random.default_rng(1).normal(scale=300.0, size=(3000, 2))
    for method in ("direct", "factored"):
        a = ft_batch(mu, pts, chunk_size=64, method=method, threads=1)
        b = ft_batch(mu, pts, chunk_size=64, method=method, threads=3)
        c = ft_batch(mu, pts, chunk_size=64, method=method, threads=1)
        assert np.array_equal(a, b) and np.array_equal(a, c)


def test_factored_equals_direct_cantor():
    mu = build_cantor_measure(CantorSpec(3, 0.25, 2, 0.3, 4))
    pts = np.random.default_rng(4).normal(scale=50.0, size=(500, 2))
    np.testing.assert_allclose(ft_batch(mu, pts, method="factored"), ft_batch(mu, pts, method="direct"), atol=1e-13)


def test_ft_batch_rejects_unknown_method():
    with pytest.raises(PreconditionError):
        ft_batch(point_mass(), [[0, 0]], method="fft")
    with pytest.raises(PreconditionError):
        ft_batch(point_mass(), [[0, 0]], method="factored")


_CANTOR = build_cantor_measure(CantorSpec(2, 0.3, 3, 0.2, 4))

def _random_complex_measure(n=50, seed=9):
    """Unit total variation, atoms in the unit square centered at 0."""
    rng = np.random.default_rng(seed)
    w = rng.normal(size=n) + 1j * rng.normal(size=n)
    return AtomicMeasure(rng.uniform(-0.5, 0.5, size=(n, 2)), w / np.abs(w).sum(), declared_alpha=0.0)


_COMPLEX = _random_complex_measure()
freq = st.floats(min_value=-1e4, max_value=1e4, allow_nan=False)


@settings(max_examples=200, deadline=None)
@given(freq, freq)
def test_conjugate_symmetry(x, y):
    a = ft_atomic(_CANTOR, (x, y))
    b = ft_atomic(_CANTOR, (-x, -y))
    assert abs(a - b.conjugate()) <= 1e-12


def test_bounded_by_total_variation():
    pts = np.random.default_rng(3).uniform(-1e5, 1e5, size=(10_000, 2))
    for mu in (_CANTOR, _COMPLEX):
        assert np.all(np.abs(ft_batch(mu, pts)) <= mu.total_variation + 1e-12)


@settings(max_examples=100, deadline=None)
@given(freq, freq, st.floats(-50, 50), st.floats(-50, 50))
def test_modulation_law(x, y, h1, h2):
    h = np.array([h1, h2])
    for mu in (_CANTOR, _COMPLEX):
        a = ft_atomic(mu.modulated(h), (x, y))
        b = ft_atomic(mu, (x - h1, y - h2))
        assert abs(a - b) <= 1e-10


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 100.0))
def test_mass_scaling(c):
    pts = np.array([[3.0, 7.0], [-20.0, 1.5]])
    np.testing.assert_allclose(ft_batch(_COMPLEX.scaled(c), pts), c * ft_batch(_COMPLEX, pts), rtol=1e-12)


# arc transforms


def test_arc_zero_frequency_exact():
    assert curve_arc_ft(parabola(), (1.0, 2.0), (0.0, 0.0)) == 1.0
    assert curve_arc_ft(parabola(), (1.25, 1.5), (0.0, 0.0)) == 0.25


@pytest.mark.parametrize("omega", [0.5, 3.0, 17.25, 400.0])
def test_arc_horizontal_closed_form(omega):
    exact = (cmath.exp(-2j * math.pi * omega * 2) - cmath.exp(-2j * math.pi * omega)) / (-2j * math.pi * omega)
    assert abs(curve_arc_ft(parabola(), (1.0, 2.0), (omega, 0.0)) - exact) < 1e-10


def test_arc_against_dense_midpoint_oracle():
    val = curve_arc_ft(parabola(), (1.0, 2.0), (0.0, 64.0))
    assert abs(val - ARC_ORACLE_64) < 1e-8


def test_arc_bounded_by_length():
    for xi in [(5.0, 3.0), (-40.0, 100.0), (0.0, 1000.0)]:
        assert abs(curve_arc_ft(parabola(), (1.0, 2.0), xi)) <= 1.0


def test_arc_error_consistency():
    xi = (13.0, 77.0)
    coarse = curve_arc_ft(parabola(), (1.0, 2.0), xi, tol=1e-8, full_output=True)
    fine = curve_arc_ft(parabola(), (1.0, 2.0), xi, tol=5e-9)
    assert abs(coarse.value - fine) <= 1e-8


def test_arc_budget_exhaustion():
    with pytest.raises(ConvergenceError):
        curve_arc_ft(parabola(), (1.0, 2.0), (0.0, 1e5), tol=1e-15, max_panels=1 << 20)


def test_arc_rejects_bad_input():
    with pytest.raises(PreconditionError):
        curve_arc_ft(parabola(), (1.0, 1.0), (1.0, 1.0))
    with pytest.raises(PreconditionError):
        curve_arc_ft(parabola(), (1.0, 2.0), (1.0, 1.0), tol=0)


def test_van_der_corput_through_vertex_bounded():
    xs = [2.0**k for k in range(4, 13)]
    vals = [v for _, v in check_van_der_corput(parabola(), xs, interval=(0.0, 1.0))]
    assert max(vals) / min(vals) <= 4


def test_van_der_corput_without_stationary_point_decays_faster():
    xs = [2.0**k for k in range(4, 13)]
    vals = [v for _, v in check_van_der_corput(parabola(), xs, interval=(1.0, 2.0))]
    # no stationary phase on [1, 2]: |lambda_hat| ~ 1/xi2, so the normalized product falls
    assert vals[-1] < vals[0] / 8


def test_van_der_corput_rejects_small_xi():
    with pytest.raises(PreconditionError):
        check_van_der_corput(parabola(), [0.0])


def test_zero_curvature_curve_fails_first():
    with pytest.raises(PreconditionError):
        check_van_der_corput(linear(), [16.0])
