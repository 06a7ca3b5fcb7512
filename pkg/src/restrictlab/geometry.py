"""Dyadic/Whitney combinatorics, arc bounding rectangles and tube intersections."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.spatial import cKDTree

from restrictlab.curves import CurveSpec
from restrictlab.errors import LabError, PreconditionError


# --------------------------------------------------------------------------
# Dyadic intervals and Whitney pairs


@dataclass(frozen=True, order=True)
class DyadicInterval:
    """[1 + k 2**-n, 1 + (k+1) 2**-n] inside [1, 2]."""

    n: int
    k: int

    def __post_init__(self):
        if self.n < 0 or not 0 <= self.k < 2**self.n:
            raise PreconditionError(f"invalid dyadic interval n={self.n}, k={self.k}")

    @property
    def length(self) -> float:
        return 2.0**-self.n

    @property
    def bounds(self) -> tuple[float, float]:
        return 1.0 + self.k * self.length, 1.0 + (self.k + 1) * self.length

    def parent(self) -> "DyadicInterval":
        if self.n == 0:
            raise PreconditionError("[1,2] has no parent")
        return DyadicInterval(self.n - 1, self.k // 2)

    def adjacent(self, other: "DyadicInterval") -> bool:
        """Distinct intervals of one generation whose closures meet."""
        return self.n == other.n and abs(self.k - other.k) == 1

    def contains(self, x) -> np.ndarray:
        lo, hi = self.bounds
        x = np.asarray(x, dtype=float)
        return (x >= lo) & (x <= hi)


@dataclass(frozen=True, order=True)
class WhitneyPair:
    I: DyadicInterval
    J: DyadicInterval

    def __post_init__(self):
        if not related(self.I.n, self.I.k, self.J.k) or self.I.n != self.J.n:
            raise PreconditionError(f"{self.I} and {self.J} are not Whitney-related")

    def distance(self) -> float:
        (a0, a1), (b0, b1) = self.I.bounds, self.J.bounds
        return max(b0 - a1, a0 - b1)


def related(n, k_i, k_j):
    """I ~ J at generation n: closures disjoint, parents distinct with touching closures.

    Works elementwise on integer arrays.
    """
    k_i = np.asarray(k_i)
    k_j = np.asarray(k_j)
    not_adjacent = np.abs(k_i - k_j) >= 2
    parents_adjacent = np.abs(k_i // 2 - k_j // 2) == 1
    out = not_adjacent & parents_adjacent & (n >= 1)
    return bool(out) if out.ndim == 0 else out


def whitney_pair_indices(n: int) -> np.ndarray:
    """(k_I, k_J) rows of all ordered Whitney pairs at generation n, lexicographic."""
    if n < 2:
        raise PreconditionError(f"Whitney pairs start at generation 2, got n={n}")
    ki = np.arange(2**n, dtype=np.int64)
    # I ~ J forces |k_I - k_J| <= 3
    cand = np.stack(np.broadcast_arrays(ki[:, None], ki[:, None] + np.arange(-3, 4)), axis=-1).reshape(-1, 2)
    cand = cand[(cand[:, 1] >= 0) & (cand[:, 1] < 2**n)]
    return cand[related(n, cand[:, 0], cand[:, 1])]


def whitney_pairs(n: int) -> list[WhitneyPair]:
    """All ordered pairs (I, J) with |I| = |J| = 2**-n and I ~ J, lexicographic in (k_I, k_J)."""
    return [WhitneyPair(DyadicInterval(n, int(a)), DyadicInterval(n, int(b))) for a, b in whitney_pair_indices(n)]


@dataclass
class CoverReport:
    n_max: int
    multiplicities: np.ndarray
    histogram: dict[int, int]
    generations: np.ndarray  # generation of the (first) covering pair, -1 if none

    def to_json(self) -> dict:
        return {
            "n_max": self.n_max,
            "points": int(self.multiplicities.size),
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
        }


def _check_cover_points(s, t, n_max):
    if s.shape != t.shape:
        raise PreconditionError("s and t must have the same shape")
    if np.any((s <= 1) | (s >= 2) | (t <= 1) | (t >= 2)):
        raise PreconditionError("sample points must lie in the open square (1,2)^2")
    # boundary points of generation-n_max intervals belong to two intervals
    scale = 2.0**n_max
    for u in (s, t):
        frac = (u - 1.0) * scale
        if np.any(frac == np.floor(frac)):
            raise PreconditionError("sample points must avoid dyadic rationals of generation <= n_max")
    # generation n_max is reached only when the points are separated by more than 2 * 2**-n_max
    if np.any(np.abs(s - t) <= 2.0 ** (1 - n_max)):
        raise PreconditionError(f"sample points must satisfy |s - t| > 2**(1 - n_max) = {2.0 ** (1 - n_max):g}")


def whitney_cover_check(points, n_max: int, method: str = "index") -> CoverReport:
    """Count, for each (s, t), the pairs I x J (I ~ J, generation 2..n_max) that contain it.

    ``method="index"`` locates the generation-n intervals containing s and t and
    tests the relation; ``method="enumerate"`` scans every pair returned by
    :func:`whitney_pairs`, which is the brute-force route for small n_max.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    s, t = pts[:, 0], pts[:, 1]
    _check_cover_points(s, t, n_max)
    mult = np.zeros(len(s), dtype=int)
    gen = np.full(len(s), -1, dtype=int)
    for n in range(2, n_max + 1):
        if method == "index":
            ks = np.floor((s - 1.0) * 2**n).astype(np.int64)
            kt = np.floor((t - 1.0) * 2**n).astype(np.int64)
            hit = related(n, ks, kt)
            mult += hit
        elif method == "enumerate":
            hit = np.zeros(len(s), dtype=bool)
            pairs = whitney_pair_indices(n)
            L = 2.0**-n
            lo_i, lo_j = 1.0 + pairs[:, 0] * L, 1.0 + pairs[:, 1] * L
            step = max(1, (1 << 24) // len(pairs))
            for j in range(0, len(s), step):
                ss, tt = s[j : j + step, None], t[j : j + step, None]
                # closed intervals, as in DyadicInterval.contains
                inside = (ss >= lo_i) & (ss <= lo_i + L) & (tt >= lo_j) & (tt <= lo_j + L)
                count = inside.sum(axis=1)
                mult[j : j + step] += count
                hit[j : j + step] |= count > 0
        else:
            raise PreconditionError(f"unknown method {method!r}")
        gen = np.where((gen < 0) & hit, n, gen)
    return CoverReport(n_max, mult, dict(Counter(mult.tolist())), gen)


def random_cover_points(count: int, n_max: int, seed: int = 0) -> np.ndarray:
    """Uniform points of (1,2)^2 satisfying the cover-check preconditions."""
    rng = np.random.default_rng(seed)
    out = []
    need = count
    while need > 0:
        cand = 1.0 + rng.random((2 * need + 16, 2))
        ok = np.abs(cand[:, 0] - cand[:, 1]) > 2.0 ** (1 - n_max)
        frac = (cand - 1.0) * 2.0**n_max
        ok &= np.all(frac != np.floor(frac), axis=1) & np.all(cand > 1.0, axis=1)
        out.append(cand[ok][:need])
        need -= len(out[-1])
    return np.concatenate(out)


# --------------------------------------------------------------------------
# Rotated rectangles


@dataclass(frozen=True)
class RotRect:
    """Rectangle with long axis ``axis`` (unit vector) and half side lengths."""

    center: np.ndarray
    axis: np.ndarray
    half_long: float
    half_short: float
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.half_long >= self.half_short > 0:
            raise PreconditionError(
                f"need half_long >= half_short > 0, got {self.half_long}, {self.half_short}"
            )
        axis = np.asarray(self.axis, dtype=float)
        if abs(np.hypot(*axis) - 1.0) > 1e-9:
            raise PreconditionError("axis must be a unit vector")

    @property
    def normal(self) -> np.ndarray:
        return np.array([-self.axis[1], self.axis[0]])

    @property
    def long_side(self) -> float:
        return 2.0 * self.half_long

    @property
    def short_side(self) -> float:
        return 2.0 * self.half_short

    def local(self, points) -> np.ndarray:
        """Coordinates (along axis, along normal) relative to the center."""
        d = np.asarray(points, dtype=float) - self.center
        return np.stack([d @ self.axis, d @ self.normal], axis=-1)

    def contains(self, points, tol: float = 0.0) -> np.ndarray:
        uv = self.local(points)
        return (np.abs(uv[..., 0]) <= self.half_long + tol) & (np.abs(uv[..., 1]) <= self.half_short + tol)

    def corners(self) -> np.ndarray:
        a, n = self.axis * self.half_long, self.normal * self.half_short
        return np.array([self.center + sa * a + sn * n for sa in (-1, 1) for sn in (-1, 1)])

    def dual(self) -> "RotRect":
        """Same axes, reciprocal side lengths, centered at the origin (long axis becomes the normal)."""
        return RotRect(
            np.zeros(2),
            self.normal,
            half_long=0.5 / self.short_side,
            half_short=0.5 / self.long_side,
        )

    def to_json(self) -> dict:
        return {
            "center": [float(c) for c in self.center],
            "axis": [float(c) for c in self.axis],
            "half_long": float(self.half_long),
            "half_short": float(self.half_short),
            **{k: v for k, v in self.meta.items() if isinstance(v, (int, float, str, bool))},
        }


def chord_frame_rect(points, pad: float = 0.0, min_long: float = 0.0, min_short: float = 0.0) -> RotRect:
    """Smallest rectangle aligned with the first-to-last chord that contains ``points``.

    Each half side is padded by ``pad`` and then raised to at least half of
    ``min_long`` / ``min_short``.
    """
    pts = np.asarray(points, dtype=float)
    chord = pts[-1] - pts[0]
    axis = chord / np.hypot(*chord)
    normal = np.array([-axis[1], axis[0]])
    # project relative to the first point so large coordinates keep their precision
    rel = pts - pts[0]
    a, b = rel @ axis, rel @ normal
    half_a = max((a.max() - a.min()) / 2 + pad, min_long / 2)
    half_b = max((b.max() - b.min()) / 2 + pad, min_short / 2)
    if half_b > half_a:
        raise LabError("chord direction is not the long direction of the point set")
    center = pts[0] + axis * (a.max() + a.min()) / 2 + normal * (b.max() + b.min()) / 2
    return RotRect(center, axis, half_a, half_b)


def bounding_rect(curve: CurveSpec, R: float, interval, samples: int = 1024, c1: float = 8.0) -> RotRect:
    """Chord-aligned rectangle containing {R gamma(t) : t in interval}.

    The sampled extent is padded by the linear-interpolation error bound
    h**2/8 * max|R gamma''| so the whole arc, not only the samples, is inside.
    ``meta`` records the comparison with R*l*m and R*l**2.
    """
    a, b = map(float, interval)
    if not 1.0 <= a < b <= 2.0:
        raise PreconditionError(f"interval must be a nondegenerate subinterval of [1,2], got {interval}")
    ell = b - a
    t = np.linspace(a, b, samples)
    pts = R * curve.point(t)
    h = ell / (samples - 1)
    pad = h**2 / 8.0 * R * float(np.max(np.abs(curve.phi_d2(t))))
    rect = chord_frame_rect(pts, pad=pad)
    if not np.all(rect.contains(pts, tol=1e-9 * R * (1 + curve.max_slope(a, b)))):
        raise LabError("arc samples escaped their bounding rectangle; curve violates its derivative bounds")
    long_budget = R * ell * curve.m
    short_budget = R * ell**2
    rect.meta.update(
        ell=ell,
        long_budget=long_budget,
        short_budget=short_budget,
        long_ratio=rect.half_long / long_budget,
        short_ratio=rect.half_short / short_budget,
        within_budget=bool(rect.half_long <= c1 * long_budget and rect.half_short <= c1 * short_budget),
        c1=c1,
        pad=pad,
    )
    return rect


# --------------------------------------------------------------------------
# Tubes around scaled arcs


class ArcPolyline:
    """Polyline through x_shift + R gamma(t), t in [a, b], for distance queries."""

    def __init__(self, curve: CurveSpec, R: float, interval, shift=(0.0, 0.0), segments: int = 4096):
        a, b = map(float, interval)
        self.t = np.linspace(a, b, segments + 1)
        self.vertices = R * curve.point(self.t) + np.asarray(shift, dtype=float)
        h = (b - a) / segments
        # chord-to-arc deviation of each segment
        self.tolerance = h**2 / 8.0 * R * float(np.max(np.abs(curve.phi_d2(self.t))))
        self._tree = cKDTree(self.vertices)
        self._seg = np.diff(self.vertices, axis=0)
        self._seg_len2 = np.einsum("ij,ij->i", self._seg, self._seg)

    def _to_segment(self, points, idx):
        p0 = self.vertices[idx]
        d = self._seg[idx]
        s = np.einsum("ij,ij->i", points - p0, d) / self._seg_len2[idx]
        s = np.clip(s, 0.0, 1.0)
        q = p0 + s[:, None] * d
        return np.hypot(*(points - q).T)

    def distance(self, points) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        _, near = self._tree.query(points, k=2)
        nseg = len(self._seg)
        best = np.full(len(points), np.inf)
        for col in range(near.shape[1]):
            v = near[:, col]
            for idx in (v - 1, v):
                ok = (idx >= 0) & (idx < nseg)
                d = np.full(len(points), np.inf)
                if np.any(ok):
                    d[ok] = self._to_segment(points[ok], idx[ok])
                best = np.minimum(best, d)
        return best

    def bbox(self, pad: float) -> tuple[float, float, float, float]:
        lo = self.vertices.min(axis=0) - pad
        hi = self.vertices.max(axis=0) + pad
        return lo[0], hi[0], lo[1], hi[1]


@dataclass
class TubeIntersection:
    x_shift: tuple[float, float]
    I_tilde: tuple[float, float]
    J_tilde: tuple[float, float]
    R: float
    delta: float
    C: float
    n: int
    area: float
    bound_ratio: float
    std_error: float
    hits: int
    samples: int
    region_area: float
    m: float
    note: str = ""

    @property
    def bound(self) -> float:
        return self.R ** (2 * self.delta) * 2**self.n * self.m

    def to_json(self) -> dict:
        out = dict(self.__dict__)
        out["x_shift"] = [float(v) for v in self.x_shift]
        out["bound"] = self.bound
        return out


def _interval_distance(I, J) -> float:
    return max(J[0] - I[1], I[0] - J[1], 0.0)


def crossing_shift(curve: CurveSpec, R: float, t0: float, s0: float) -> np.ndarray:
    """x with x + R gamma(t0) = R gamma(s0), so the two arcs meet there."""
    return R * (curve.point(s0) - curve.point(t0))


def tube_intersection_area(
    curve: CurveSpec,
    R: float,
    delta: float,
    C: float,
    I_tilde,
    J_tilde,
    x_shift,
    mc_samples: int = 100_000,
    *,
    n: int,
    c: float = 0.5,
    seed: int = 0,
    region=None,
    segments: int = 4096,
) -> TubeIntersection:
    """Monte-Carlo area of (x + Gamma_{R,I} + B(0, C R**delta)) cap (Gamma_{R,J} + B(0, C R**delta)).

    By default samples are drawn uniformly from the union of lattice cells
    (side C R**delta) inside the bounding box of the second tube whose centers
    lie close enough to both arcs that they may contain intersection points;
    every other cell is provably empty, so the estimator stays unbiased.
    Passing ``region=(x0, x1, y0, y1)`` samples that box instead, which gives
    common random numbers across calls with the same seed.
    """
    I = tuple(map(float, I_tilde))
    J = tuple(map(float, J_tilde))
    for lo, hi in (I, J):
        if not 1.0 <= lo < hi <= 2.0:
            raise PreconditionError(f"intervals must lie in [1,2], got {(lo, hi)}")
    if _interval_distance(I, J) < c * 2.0**-n:
        raise PreconditionError(
            f"dist(I~, J~) = {_interval_distance(I, J):g} is below c 2**-n = {c * 2.0**-n:g}"
        )
    if mc_samples < 10_000:
        raise PreconditionError("mc_samples must be at least 1e4")
    rho = C * R**delta
    first = ArcPolyline(curve, R, I, shift=x_shift, segments=segments)
    second = ArcPolyline(curve, R, J, segments=segments)

    rng_seq = np.random.SeedSequence(seed)
    chunk = 1 << 14
    n_chunks = -(-mc_samples // chunk)
    streams = [np.random.default_rng(s) for s in rng_seq.spawn(n_chunks)]

    if region is None:
        x0, x1, y0, y1 = second.bbox(rho)
        side = rho
        nx = max(1, math.ceil((x1 - x0) / side))
        ny = max(1, math.ceil((y1 - y0) / side))
        gx, gy = np.meshgrid(x0 + (np.arange(nx) + 0.5) * side, y0 + (np.arange(ny) + 0.5) * side, indexing="ij")
        centers = np.stack([gx.ravel(), gy.ravel()], axis=1)
        reach = rho + side / math.sqrt(2.0) + max(first.tolerance, second.tolerance)
        keep = second.distance(centers) <= reach
        if np.any(keep):
            sub = centers[keep]
            keep[keep] = first.distance(sub) <= reach
        cells = centers[keep]
        region_area = len(cells) * side**2
    else:
        x0, x1, y0, y1 = map(float, region)
        cells = None
        region_area = (x1 - x0) * (y1 - y0)

    hits = 0
    drawn = 0
    if region is not None or len(cells) > 0:
        for i, rng in enumerate(streams):
            k = min(chunk, mc_samples - i * chunk)
            u = rng.random((k, 2))
            if cells is None:
                pts = np.column_stack([x0 + u[:, 0] * (x1 - x0), y0 + u[:, 1] * (y1 - y0)])
            else:
                pick = rng.integers(0, len(cells), size=k)
                pts = cells[pick] + (u - 0.5) * side
            inside = second.distance(pts) <= rho
            if np.any(inside):
                inside[inside] = first.distance(pts[inside]) <= rho
            hits += int(inside.sum())
            drawn += k
    else:
        drawn = mc_samples

    frac = hits / drawn
    area = region_area * frac
    se = region_area * math.sqrt(frac * (1 - frac) / drawn)
    bound = R ** (2 * delta) * 2**n * curve.m
    note = "" if hits else "no sample hit both tubes: intersection empty or below resolution"
    return TubeIntersection(
        x_shift=tuple(float(v) for v in np.asarray(x_shift, dtype=float)),
        I_tilde=I,
        J_tilde=J,
        R=float(R),
        delta=float(delta),
        C=float(C),
        n=int(n),
        area=area,
        bound_ratio=area / bound,
        std_error=se,
        hits=hits,
        samples=drawn,
        region_area=region_area,
        m=curve.m,
        note=note,
    )


# --------------------------------------------------------------------------
# Admissible parameter shift w for the tube-intersection estimate


@dataclass
class WBound:
    w_max: float
    bound: float
    t_min: float
    m1: float
    m2: float
    within_bound: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


class _ArcGap:
    """g(t) = min over u in J of |x + R gamma(t) - R gamma(u)|."""

    def __init__(self, curve, R, J, x_shift, grid=2049):
        self.curve = curve
        self.R = R
        self.J = J
        self.x = np.asarray(x_shift, dtype=float)
        self.u = np.linspace(J[0], J[1], grid)
        self.arc = R * curve.point(self.u)

    def __call__(self, t: float) -> float:
        p = self.x + self.R * self.curve.point(t)
        d2 = np.sum((self.arc - p) ** 2, axis=1)
        i = int(np.argmin(d2))
        lo = self.u[max(i - 1, 0)]
        hi = self.u[min(i + 1, len(self.u) - 1)]
        if hi <= lo:
            return float(np.sqrt(d2[i]))

        def dist(u):
            q = self.R * self.curve.point(u)
            return float(np.hypot(*(q - p)))

        res = minimize_scalar(dist, bounds=(lo, hi), method="bounded", options={"xatol": 1e-13})
        return min(float(res.fun), float(np.sqrt(d2[i])))


def _last_true_edge(pred, lo, hi, iters=60):
    """Bisection for the edge between pred(lo) True and pred(hi) False."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def w_bound_scan(
    curve: CurveSpec,
    R: float,
    delta: float,
    C: float,
    c: float,
    I_tilde,
    J_tilde,
    x_shift,
    *,
    n: int,
    grid: int = 2049,
) -> WBound:
    """Largest w >= 0 such that x + R gamma(t + w) and some R gamma(s + v) have meeting C R**delta balls.

    t is the least point of I~ whose ball meets a ball centered on the J~ arc.
    The result is compared with 8 C 2**n R**(delta-1) m1 / (c m2), m1 = max phi',
    m2 = min phi'' on [1, 2].
    """
    I = tuple(map(float, I_tilde))
    J = tuple(map(float, J_tilde))
    if _interval_distance(I, J) < c * 2.0**-n:
        raise PreconditionError(
            f"dist(I~, J~) = {_interval_distance(I, J):g} is below c 2**-n = {c * 2.0**-n:g}"
        )
    reach = 2.0 * C * R**delta
    gap = _ArcGap(curve, R, J, x_shift)
    ts = np.linspace(I[0], I[1], grid)
    g = np.array([gap(t) for t in ts])
    ok = g <= reach
    if not ok.any():
        raise PreconditionError(
            f"no t in I~ meets the J~ tube (closest approach {g.min():.4g} > {reach:.4g}); shift does not produce an intersection"
        )
    first = int(np.argmax(ok))
    if first == 0:
        t_min = ts[0]
    else:
        # edge from not-admissible (ts[first-1]) to admissible (ts[first])
        t_min = _last_true_edge(lambda t: gap(t) > reach, ts[first - 1], ts[first])
        t_min = ts[first] if gap(t_min) > reach else t_min
    ws = np.linspace(0.0, I[1] - t_min, grid)
    adm = np.array([gap(t_min + w) <= reach for w in ws])
    last = int(np.nonzero(adm)[0][-1])
    if last == len(ws) - 1:
        w_max = ws[-1]
    else:
        w_max = _last_true_edge(lambda w: gap(t_min + w) <= reach, ws[last], ws[last + 1])
    m1, m2 = curve.derivative_bounds()
    bound = 8.0 * C * 2**n * R ** (delta - 1) * m1 / (c * m2)
    return WBound(float(w_max), float(bound), float(t_min), m1, m2, bool(w_max <= bound))
