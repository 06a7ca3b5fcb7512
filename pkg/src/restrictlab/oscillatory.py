"""Fourier transforms of atomic measures and of arc-length pieces of graph curves."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from restrictlab.constants import ATOM_BLOCK, FT_SIGN
from restrictlab.curves import CurveSpec
from restrictlab.errors import ConvergenceError, PreconditionError
from restrictlab.measures import AtomicMeasure

__all__ = [
    "CurveSpec",
    "ArcFT",
    "ft_atomic",
    "ft_batch",
    "curve_arc_ft",
    "check_van_der_corput",
    "lab_threads",
]


def lab_threads() -> int:
    """Worker count from LAB_THREADS (default 1)."""
    try:
        return max(1, int(os.environ.get("LAB_THREADS", "1")))
    except ValueError:
        return 1


def _phase(x):
    x = np.asarray(x, dtype=float)
    return np.exp(2j * np.pi * (x - np.round(x)))


def _direct_chunk(xi, pos, w):
    """Sum over atoms for each row of xi: pairwise within ATOM_BLOCK, Neumaier across blocks."""
    total = np.zeros(len(xi), dtype=complex)
    comp = np.zeros(len(xi), dtype=complex)
    for j in range(0, len(pos), ATOM_BLOCK):
        p = pos[j : j + ATOM_BLOCK]
        ph = xi[:, 0:1] * p[None, :, 0] + xi[:, 1:2] * p[None, :, 1]
        part = np.sum(_phase(FT_SIGN * ph) * w[None, j : j + ATOM_BLOCK], axis=1)
        # Neumaier update, real and imaginary parts separately
        for attr in ("real", "imag"):
            s = getattr(total, attr)
            x = getattr(part, attr)
            c = getattr(comp, attr)
            t = s + x
            big = np.abs(s) >= np.abs(x)
            c += np.where(big, (s - t) + x, (x - t) + s)
            s[...] = t
    return total + comp


def ft_batch(
    measure: AtomicMeasure,
    points,
    chunk_size: int = 256,
    method: str = "auto",
    threads: int | None = None,
) -> np.ndarray:
    """mu_hat at each frequency in ``points`` (shape (P, 2)), in input order.

    ``method="direct"`` sums over the materialized atoms; ``"factored"`` uses
    the measure's separable structure; ``"auto"`` picks factored when a
    structure exists. For a fixed chunk size the result is bitwise
    reproducible regardless of thread count.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.empty(len(pts), dtype=complex)
    if len(pts) == 0:
        return out
    if chunk_size < 1:
        raise PreconditionError("chunk_size must be positive")
    if method == "auto":
        method = "factored" if measure.structure is not None else "direct"
    if method == "factored":
        if measure.structure is None:
            raise PreconditionError("measure has no separable structure")
        fn = measure.structure.ft
        chunk_size = max(chunk_size, 1 << 15)
    elif method == "direct":
        pos, w = measure.positions, measure.weights

        def fn(xi):
            return _direct_chunk(xi, pos, w)

        if chunk_size * min(len(pos), ATOM_BLOCK) > (1 << 22):
            chunk_size = max(1, (1 << 22) // min(len(pos), ATOM_BLOCK))
    else:
        raise PreconditionError(f"unknown method {method!r}")

    starts = range(0, len(pts), chunk_size)

    def job(i):
        out[i : i + chunk_size] = fn(pts[i : i + chunk_size])

    n_threads = threads or lab_threads()
    if n_threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(n_threads) as pool:
            list(pool.map(job, starts))
    else:
        for i in starts:
            job(i)
    return out


def ft_atomic(measure: AtomicMeasure, xi, method: str = "auto") -> complex:
    """mu_hat(xi) = sum_j w_j exp(-2 pi i xi . x_j)."""
    return complex(ft_batch(measure, [xi], chunk_size=1, method=method)[0])


# --------------------------------------------------------------------------
# Arc transforms


@dataclass
class ArcFT:
    value: complex
    error: float
    panels: int


def _arc_midpoint(curve, a, b, xi1, xi2, panels):
    h = (b - a) / panels
    total = 0.0 + 0.0j
    step = 1 << 20
    for i in range(0, panels, step):
        t = a + (np.arange(i, min(i + step, panels)) + 0.5) * h
        total += np.sum(_phase(FT_SIGN * (t * xi1 + curve.phi(t) * xi2)))
    return total * h


def curve_arc_ft(
    curve: CurveSpec,
    interval,
    xi,
    tol: float = 1e-10,
    max_panels: int = 1 << 26,
    full_output: bool = False,
):
    """integral_a^b exp(-2 pi i (t xi1 + phi(t) xi2)) dt by Romberg-accelerated midpoint panels.

    The starting panel count resolves each oscillation period with 8 panels;
    panels are then doubled until successive extrapolants differ by at most
    ``tol`` (absolute).
    """
    a, b = map(float, interval)
    if not b > a:
        raise PreconditionError(f"empty interval {interval}")
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    xi1, xi2 = map(float, xi)
    rate = 1.0 + abs(xi1) + curve.max_slope(a, b) * abs(xi2)
    panels = max(8, math.ceil(8.0 * (b - a) * rate))
    if xi1 == 0.0 and xi2 == 0.0:
        res = ArcFT(complex(b - a), 0.0, 1)
        return res if full_output else res.value
    table = [[_arc_midpoint(curve, a, b, xi1, xi2, panels)]]
    while True:
        panels *= 2
        if panels > max_panels:
            raise ConvergenceError(
                f"arc transform at xi={xi} not within tol={tol:g} after {max_panels} panels"
            )
        row = [_arc_midpoint(curve, a, b, xi1, xi2, panels)]
        for j, prev in enumerate(table[-1], start=1):
            row.append(row[-1] + (row[-1] - prev) / (4**j - 1))
        err = abs(row[-1] - table[-1][-1])
        table.append(row)
        if err <= tol:
            res = ArcFT(complex(row[-1]), float(err), panels)
            return res if full_output else res.value


def check_van_der_corput(
    curve: CurveSpec,
    xi2_values,
    interval=(1.0, 2.0),
    tol: float = 1e-10,
) -> list[tuple[float, float]]:
    """(xi2, |lambda_hat(0, xi2)| * xi2**0.5) for the arc measure dt on ``interval``.

    The product stays bounded when the arc contains a point with phi' = 0;
    away from such a point it decays like xi2**-1/2.
    """
    out = []
    for x2 in xi2_values:
        x2 = float(x2)
        if not x2 >= 1:
            raise PreconditionError(f"xi2 must be >= 1, got {x2}")
        val = curve_arc_ft(curve, interval, (0.0, x2), tol=tol)
        out.append((x2, abs(val) * math.sqrt(x2)))
    return out
