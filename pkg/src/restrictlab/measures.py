"""Atomic measures on the plane: Cantor products, the sharp-example family, dimension audits."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from restrictlab.constants import DEFAULT_ATOM_BUDGET, FT_SIGN
from restrictlab.errors import AtomBudgetError, BumpCheckError, PreconditionError
from restrictlab.geometry import RotRect, chord_frame_rect

PROVENANCES = ("cantor", "sharp_example", "custom")


def _unit_phase(x):
    """exp(2 pi i x) with x reduced mod 1 first."""
    x = np.asarray(x, dtype=float)
    return np.exp(2j * np.pi * (x - np.round(x)))


# --------------------------------------------------------------------------
# One-dimensional factors


class Atoms1D:
    """Finite complex measure on the line: sum_j w_j delta_{x_j}."""

    def __init__(self, positions, weights):
        self.positions = np.ascontiguousarray(positions, dtype=float)
        self.weights = np.ascontiguousarray(weights, dtype=complex)
        if self.positions.shape != self.weights.shape or self.positions.ndim != 1:
            raise PreconditionError("positions and weights must be 1-D arrays of equal length")
        if self.positions.size == 0:
            raise PreconditionError("empty factor")
        self.positions.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def size(self) -> int:
        return self.positions.size

    @property
    def span(self) -> tuple[float, float]:
        return float(self.positions.min()), float(self.positions.max())

    @property
    def min_gap(self) -> float:
        if self.size == 1:
            return math.inf
        return float(np.min(np.diff(np.sort(self.positions))))

    @property
    def total_variation(self) -> float:
        return float(np.sum(np.abs(self.weights)))

    def materialize(self):
        return self.positions, self.weights

    def ft(self, zeta) -> np.ndarray:
        zeta = np.asarray(zeta, dtype=float)
        out = np.empty(zeta.shape, dtype=complex)
        flat = zeta.ravel()
        res = out.ravel()
        step = max(1, (1 << 20) // self.size)
        for i in range(0, flat.size, step):
            ph = np.multiply.outer(flat[i : i + step], self.positions)
            res[i : i + step] = _unit_phase(FT_SIGN * ph) @ self.weights
        return res.reshape(zeta.shape)


class Comb1D:
    """Arithmetic progression start + k*step (k < count), weights amplitude*exp(2 pi i modulation x)."""

    def __init__(self, start: float, step: float, count: int, amplitude: complex = 1.0, modulation: float = 0.0):
        if count < 1 or not step > 0:
            raise PreconditionError("comb needs count >= 1 and step > 0")
        self.start = float(start)
        self.step = float(step)
        self.count = int(count)
        self.amplitude = complex(amplitude)
        self.modulation = float(modulation)

    @property
    def size(self) -> int:
        return self.count

    @property
    def span(self) -> tuple[float, float]:
        return self.start, self.start + (self.count - 1) * self.step

    @property
    def min_gap(self) -> float:
        return math.inf if self.count == 1 else self.step

    @property
    def total_variation(self) -> float:
        return abs(self.amplitude) * self.count

    def materialize(self):
        x = self.start + self.step * np.arange(self.count)
        return x, self.amplitude * _unit_phase(self.modulation * x)

    def ft(self, zeta) -> np.ndarray:
        # sum_k exp(-2 pi i theta (start + k step)), theta = zeta - modulation, as a Dirichlet kernel
        theta = np.asarray(zeta, dtype=float) - self.modulation
        u = theta * self.step
        f = u - np.round(u)
        n = self.count
        with np.errstate(invalid="ignore", divide="ignore"):
            ratio = np.sin(np.pi * f * n) / np.sin(np.pi * f)
        ratio = np.where(f == 0.0, float(n), ratio)
        # u and f differ by an integer, so exp(-2 pi i u k) = exp(-2 pi i f k)
        lead = _unit_phase(FT_SIGN * theta * self.start) * _unit_phase(FT_SIGN * f * (n - 1) / 2.0)
        return self.amplitude * lead * ratio


def _hierarchically_distinct(factors) -> bool:
    """Each factor's spacing exceeds the total span of the factors after it (sufficient for distinct sums)."""
    for i, f in enumerate(factors):
        rest = sum(g.span[1] - g.span[0] for g in factors[i + 1 :])
        if f.min_gap <= rest:
            return False
    return True


def _sum_set(factors):
    pos, w = factors[0].materialize()
    for f in factors[1:]:
        p2, w2 = f.materialize()
        pos = np.add.outer(pos, p2).ravel()
        w = np.multiply.outer(w, w2).ravel()
    return pos, w


@dataclass(frozen=True)
class Separable:
    """Atoms origin + a*e1 + b*e2 where a (resp. b) runs over the sum set of ``axis1`` (resp. ``axis2``).

    Each axis is a convolution of 1-D factors and the weight of an atom is the
    product of the factor weights, so the Fourier transform factorizes exactly:
    mu_hat(xi) = exp(-2 pi i xi.origin) prod_f f_hat(xi.e1) prod_g g_hat(xi.e2).
    """

    origin: np.ndarray
    e1: np.ndarray
    axis1: tuple
    axis2: tuple

    def __post_init__(self):
        e1 = np.asarray(self.e1, dtype=float)
        if abs(np.hypot(*e1) - 1.0) > 1e-12:
            raise PreconditionError("e1 must be a unit vector")
        if not self.axis1 or not self.axis2:
            raise PreconditionError("each axis needs at least one factor")

    @property
    def e2(self) -> np.ndarray:
        return np.array([-self.e1[1], self.e1[0]])

    @property
    def n_atoms(self) -> int:
        return math.prod(f.size for f in self.axis1) * math.prod(f.size for f in self.axis2)

    def _axis_extent(self, factors):
        return sum(f.span[0] for f in factors), sum(f.span[1] for f in factors)

    def support_radius(self) -> float:
        a = self._axis_extent(self.axis1)
        b = self._axis_extent(self.axis2)
        corners = [self.origin + x * self.e1 + y * self.e2 for x in a for y in b]
        return float(max(np.hypot(*c) for c in corners))

    def total_variation(self) -> float | None:
        """Product of factor variations, or None when distinct atom positions are not guaranteed."""
        if not (_hierarchically_distinct(self.axis1) and _hierarchically_distinct(self.axis2)):
            return None
        return math.prod(f.total_variation for f in self.axis1 + self.axis2)

    def materialize(self):
        a, wa = _sum_set(self.axis1)
        b, wb = _sum_set(self.axis2)
        pos = (
            self.origin[None, None, :]
            + a[:, None, None] * self.e1[None, None, :]
            + b[None, :, None] * self.e2[None, None, :]
        ).reshape(-1, 2)
        return pos, np.multiply.outer(wa, wb).ravel()

    def ft(self, xi) -> np.ndarray:
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        z1 = xi @ self.e1
        z2 = xi @ self.e2
        out = _unit_phase(FT_SIGN * (xi @ self.origin))
        for f in self.axis1:
            out = out * f.ft(z1)
        for f in self.axis2:
            out = out * f.ft(z2)
        return out


# --------------------------------------------------------------------------
# Atomic measures


@dataclass(frozen=True)
class Atom:
    position: tuple[float, float]
    weight: complex


class AtomicMeasure:
    """Finite weighted sum of point masses in the plane.

    Atoms are given either explicitly (``positions``, ``weights``) or through a
    :class:`Separable` structure, in which case they are materialized on first
    access and only if their count fits ``atom_budget``.
    """

    def __init__(
        self,
        positions=None,
        weights=None,
        *,
        declared_alpha: float,
        provenance: str = "custom",
        atom_spacing: float | None = None,
        structure: Separable | None = None,
        atom_budget: int = DEFAULT_ATOM_BUDGET,
        metadata: dict | None = None,
    ):
        if provenance not in PROVENANCES:
            raise PreconditionError(f"provenance must be one of {PROVENANCES}")
        if not 0 <= declared_alpha <= 2:
            raise PreconditionError(f"declared_alpha must lie in [0, 2], got {declared_alpha}")
        self.declared_alpha = float(declared_alpha)
        self.provenance = provenance
        self.structure = structure
        self.atom_budget = int(atom_budget)
        self.metadata = dict(metadata or {})
        self._spacing = atom_spacing
        if structure is None:
            if positions is None or weights is None:
                raise PreconditionError("give positions and weights, or a structure")
            pos = np.array(positions, dtype=float).reshape(-1, 2)
            w = np.array(weights, dtype=complex).reshape(-1)
            if len(pos) != len(w):
                raise PreconditionError("positions and weights differ in length")
            self._set_atoms(pos, w)
        else:
            self._pos = None
            self._w = None
        if self.n_atoms == 0:
            raise PreconditionError("a measure needs at least one atom")

    def _set_atoms(self, pos, w):
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(w))):
            raise PreconditionError("atom positions and weights must be finite")
        pos.flags.writeable = False
        w.flags.writeable = False
        self._pos, self._w = pos, w

    def _materialize(self):
        if self._pos is None:
            n = self.structure.n_atoms
            if n > self.atom_budget:
                raise AtomBudgetError(n, self.atom_budget)
            self._set_atoms(*self.structure.materialize())

    @property
    def n_atoms(self) -> int:
        return self.structure.n_atoms if self._pos is None else len(self._pos)

    @property
    def positions(self) -> np.ndarray:
        self._materialize()
        return self._pos

    @property
    def weights(self) -> np.ndarray:
        self._materialize()
        return self._w

    @property
    def atoms(self) -> list[Atom]:
        return [Atom((float(x), float(y)), complex(w)) for (x, y), w in zip(self.positions, self.weights)]

    @cached_property
    def total_variation(self) -> float:
        if self._pos is None:
            tv = self.structure.total_variation()
            if tv is not None:
                return tv
        return float(math.fsum(np.abs(self.weights)))

    @cached_property
    def support_radius(self) -> float:
        if self._pos is None:
            return self.structure.support_radius()
        return float(np.max(np.hypot(self._pos[:, 0], self._pos[:, 1])))

    @cached_property
    def atom_spacing(self) -> float:
        """Smallest radius at which ball masses of this discretization are meaningful."""
        if self._spacing is not None:
            return float(self._spacing)
        if self.n_atoms == 1:
            return 0.0
        from scipy.spatial import cKDTree

        d, _ = cKDTree(self.positions).query(self.positions, k=2)
        return float(d[:, 1].max())

    def scaled(self, c: complex) -> "AtomicMeasure":
        return AtomicMeasure(
            self.positions, self.weights * c, declared_alpha=self.declared_alpha,
            provenance="custom", atom_spacing=self._spacing, metadata=self.metadata,
        )

    def modulated(self, h) -> "AtomicMeasure":
        """Weights multiplied by exp(2 pi i x.h); the transform shifts by h."""
        h = np.asarray(h, dtype=float)
        return AtomicMeasure(
            self.positions, self.weights * _unit_phase(self.positions @ h),
            declared_alpha=self.declared_alpha, provenance="custom",
            atom_spacing=self._spacing, metadata=self.metadata,
        )

    def __repr__(self):
        return (
            f"AtomicMeasure(n_atoms={self.n_atoms}, alpha={self.declared_alpha:.4g}, "
            f"provenance={self.provenance!r})"
        )


def total_variation(measure: AtomicMeasure) -> float:
    if measure.n_atoms == 0:
        raise PreconditionError("empty measure")
    return measure.total_variation


def support_radius(measure: AtomicMeasure) -> float:
    if measure.n_atoms == 0:
        raise PreconditionError("empty measure")
    return measure.support_radius


def point_mass(position=(0.0, 0.0), weight: complex = 1.0, alpha: float = 0.0) -> AtomicMeasure:
    return AtomicMeasure([position], [weight], declared_alpha=alpha, atom_spacing=0.0)


def grid_measure(n: int) -> AtomicMeasure:
    """Uniform weights 1/n**2 at the n x n cell midpoints of the unit square centered at 0."""
    comb = Comb1D(-0.5 + 0.5 / n, 1.0 / n, n, amplitude=1.0 / n)
    structure = Separable(np.zeros(2), np.array([1.0, 0.0]), (comb,), (comb,))
    return AtomicMeasure(
        declared_alpha=2.0, provenance="custom", atom_spacing=1.0 / n, structure=structure,
        metadata={"kind": "grid", "n": n},
    )


# --------------------------------------------------------------------------
# Cantor products


@dataclass(frozen=True)
class CantorSpec:
    branches_x: int
    ratio_x: float
    branches_y: int
    ratio_y: float
    depth: int

    def __post_init__(self):
        if self.depth < 1:
            raise PreconditionError("depth must be >= 1")
        for b, r in ((self.branches_x, self.ratio_x), (self.branches_y, self.ratio_y)):
            if b < 1 or not 0 < r <= 1.0 / b:
                raise PreconditionError(f"need branches >= 1 and 0 < ratio <= 1/branches, got {b}, {r}")
        if not 0 <= self.alpha <= 2:
            raise PreconditionError(f"implied dimension {self.alpha} outside [0, 2]")

    @staticmethod
    def axis_dimension(b: int, r: float) -> float:
        return 0.0 if b == 1 else math.log(b) / math.log(1.0 / r)

    @property
    def alpha(self) -> float:
        return self.axis_dimension(self.branches_x, self.ratio_x) + self.axis_dimension(
            self.branches_y, self.ratio_y
        )

    @property
    def n_atoms(self) -> int:
        return (self.branches_x * self.branches_y) ** self.depth

    def to_json(self) -> dict:
        return asdict(self)


def cantor_spec_for_alpha(alpha: float, depth: int, branches: int = 2) -> CantorSpec:
    """Symmetric product of two identical Cantor sets, each of dimension alpha/2."""
    if not 0 < alpha <= 2:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha}")
    r = branches ** (-2.0 / alpha)
    return CantorSpec(branches, r, branches, r, depth)


def _cantor_levels(b: int, r: float, depth: int) -> tuple:
    levels = []
    for j in range(depth):
        size = r**j
        if b == 1:
            offsets = np.array([(1.0 - r) * size / 2.0])
        else:
            offsets = np.arange(b) * (1.0 - r) * size / (b - 1)
        levels.append(Atoms1D(offsets, np.full(b, 1.0 / b)))
    return tuple(levels)


def _cantor_spacing(b: int, r: float, depth: int) -> float:
    if b == 1:
        return 0.0
    return (1.0 - r) * r ** (depth - 1) / (b - 1)


def build_cantor_measure(spec: CantorSpec, atom_budget: int = DEFAULT_ATOM_BUDGET) -> AtomicMeasure:
    """Unit-mass product Cantor measure at the centers of its depth-level cells.

    The unit square is centered at the origin. Atoms are stored as the
    convolution of one b-point factor per level on each axis, which is exactly
    the depth-level construction.
    """
    if spec.n_atoms > atom_budget:
        raise AtomBudgetError(spec.n_atoms, atom_budget)
    d = spec.depth
    origin = np.array([spec.ratio_x**d / 2 - 0.5, spec.ratio_y**d / 2 - 0.5])
    structure = Separable(
        origin,
        np.array([1.0, 0.0]),
        _cantor_levels(spec.branches_x, spec.ratio_x, d),
        _cantor_levels(spec.branches_y, spec.ratio_y, d),
    )
    spacing = max(
        _cantor_spacing(spec.branches_x, spec.ratio_x, d),
        _cantor_spacing(spec.branches_y, spec.ratio_y, d),
    )
    return AtomicMeasure(
        declared_alpha=spec.alpha,
        provenance="cantor",
        atom_spacing=spacing,
        structure=structure,
        atom_budget=atom_budget,
        metadata={"spec": spec.to_json()},
    )


# --------------------------------------------------------------------------
# Sharp-example measures


CASES = ("case_i", "case_iii")


def nearest_count(x: float) -> int:
    """Nearest integer, at least 1 (halves round up)."""
    return max(1, int(math.floor(x + 0.5)))


@dataclass(frozen=True)
class SharpExampleSpec:
    p: float
    alpha: float
    R: float
    case_id: str = "case_i"
    bump_order: int = 2
    samples_per_bump: int = 16

    def __post_init__(self):
        if not self.p > 1:
            raise PreconditionError("p must exceed 1")
        if not 0 < self.alpha < 2:
            raise PreconditionError("alpha must lie in (0, 2)")
        if not self.R >= 2:
            raise PreconditionError("R must be >= 2")
        if self.case_id not in CASES:
            raise PreconditionError(f"case_id must be one of {CASES}")
        if self.case_id == "case_i" and not self.alpha > 1:
            raise PreconditionError("case_i requires alpha > 1")
        if self.case_id == "case_iii" and not self.alpha <= 0.5:
            raise PreconditionError("case_iii requires alpha <= 1/2")
        if self.bump_order < 2:
            raise PreconditionError("bump_order must be >= 2")
        if self.samples_per_bump < 8:
            raise PreconditionError("samples_per_bump must be >= 8")

    @property
    def T(self) -> int:
        if self.case_id == "case_i":
            return nearest_count(self.R ** ((self.p - 0.5) * (self.alpha - 1)))
        return nearest_count(self.R**self.alpha)

    @property
    def window(self) -> tuple[float, float]:
        R = float(self.R)
        return (R, R + math.sqrt(R)) if self.case_id == "case_i" else (R, 2 * R)

    @property
    def nominal_sides(self) -> tuple[float, float]:
        """(short, long) side lengths of D up to constants."""
        R, p = float(self.R), self.p
        return (1.0, R ** (p - 0.5)) if self.case_id == "case_i" else (R, R**p)

    @property
    def N(self) -> int:
        return nearest_count(self.nominal_sides[1] / self.T)

    @property
    def amplitude(self) -> float:
        """sup of the bump."""
        R, p, a = float(self.R), self.p, self.alpha
        return R ** ((p - 0.5) * (2 - a)) if self.case_id == "case_i" else R ** (p + 1 - a)

    @property
    def psi_hat_floor(self) -> float:
        """Lower bound demanded of |psi_hat| on D (up to constants)."""
        R, p, a = float(self.R), self.p, self.alpha
        return R ** ((p - 0.5) * (1 - a)) if self.case_id == "case_i" else R ** (-a)

    @property
    def n_atoms(self) -> int:
        return self.T * self.samples_per_bump**2

    def to_json(self) -> dict:
        return asdict(self)


@dataclass
class DerivedGeometry:
    rect_D: RotRect
    v: np.ndarray
    c_D: np.ndarray
    T: int
    N: int
    bump: tuple  # unmodulated (along v, along normal) factors of psi
    psi_hat_ratios: dict = field(default_factory=dict)

    def psi_hat(self, zeta) -> np.ndarray:
        """Transform of the discretized bump (centered at 0, no modulation)."""
        zeta = np.atleast_2d(np.asarray(zeta, dtype=float))
        n = np.array([-self.v[1], self.v[0]])
        return self.bump[0].ft(zeta @ self.v) * self.bump[1].ft(zeta @ n)

    def to_json(self) -> dict:
        return {
            "rect_D": self.rect_D.to_json(),
            "v": [float(c) for c in self.v],
            "c_D": [float(c) for c in self.c_D],
            "T": self.T,
            "N": self.N,
            "psi_hat_ratios": self.psi_hat_ratios,
        }


def _bump_factor(half_width: float, order: int, samples: int, amplitude: float, modulation: float):
    u = half_width * (-1.0 + (2.0 * np.arange(samples) + 1.0) / samples)
    cell = 2.0 * half_width / samples
    vals = amplitude * (1.0 - (u / half_width) ** 2) ** order * cell
    plain = Atoms1D(u, vals)
    return plain, Atoms1D(u, vals * _unit_phase(u * modulation))


def sharp_rectangle(spec: SharpExampleSpec, samples: int = 4097) -> RotRect:
    """Chord-aligned rectangle D containing {(t, t**p) : t in the window}.

    Each side is at least half its nominal length (1 x R**(p-1/2) or R x R**p).
    """
    a, b = spec.window
    t = np.linspace(a, b, samples)
    pts = np.stack([t, t**spec.p], axis=1)
    h = (b - a) / (samples - 1)
    pad = h**2 / 8.0 * spec.p * (spec.p - 1) * max(a ** (spec.p - 2), b ** (spec.p - 2))
    short, long_ = spec.nominal_sides
    return chord_frame_rect(pts, pad=pad, min_long=long_ / 2, min_short=short / 2)


def build_sharp_example(
    spec: SharpExampleSpec, atom_budget: int = DEFAULT_ATOM_BUDGET, check_factor: float = 10.0
):
    """Discretize mu(y) = exp(2 pi i y.c_D) sum_{k=1..T} psi(y - k v / T).

    psi is the tensor bump A (1 - (y.v/h_v)**2)**q (1 - (y.n/h_n)**2)**q on the
    dual rectangle of D (half widths h_v = 1/(2 |D|_long), h_n = 1/(2 |D|_short)),
    with A the prescribed sup. Each translate is sampled on a
    samples_per_bump x samples_per_bump midpoint grid in the (v, n) frame.
    Returns the measure and the derived geometry.
    """
    if spec.n_atoms > atom_budget:
        raise AtomBudgetError(spec.n_atoms, atom_budget)
    D = sharp_rectangle(spec)
    v = D.axis
    n = D.normal
    c_D = D.center
    T = spec.T
    h_v = 0.5 / D.long_side
    h_n = 0.5 / D.short_side
    q, s = spec.bump_order, spec.samples_per_bump
    cv, cn = float(c_D @ v), float(c_D @ n)
    plain_v, bump_v = _bump_factor(h_v, q, s, 1.0, cv)
    plain_n, bump_n = _bump_factor(h_n, q, s, spec.amplitude, cn)
    comb = Comb1D(1.0 / T, 1.0 / T, T, modulation=cv)
    structure = Separable(np.zeros(2), v, (comb, bump_v), (bump_n,))

    geom = DerivedGeometry(D, v, c_D, T, spec.N, (plain_v, plain_n))
    probes = {"center": D.center}
    for i, corner in enumerate(D.corners()):
        probes[f"corner{i}"] = corner
    floor = spec.psi_hat_floor
    for name, pt in probes.items():
        geom.psi_hat_ratios[name] = float(abs(geom.psi_hat(pt - c_D)[0]) / floor)
    worst = min(geom.psi_hat_ratios.values())
    if worst < 1.0 / check_factor:
        raise BumpCheckError(
            f"|psi_hat| / floor drops to {worst:.3g} on D (allowed down to {1 / check_factor:g})"
        )
    measure = AtomicMeasure(
        declared_alpha=spec.alpha,
        provenance="sharp_example",
        atom_spacing=2.0 * max(h_v, h_n) / s,
        structure=structure,
        atom_budget=atom_budget,
        metadata={"spec": spec.to_json(), "T": T, "N": spec.N},
    )
    return measure, geom


# --------------------------------------------------------------------------
# Dimension audit


@dataclass(frozen=True)
class SamplingPlan:
    grid: int = 64
    max_atom_centers: int | None = None


@dataclass
class DimensionReport:
    alpha: float
    radii: list
    worst_ratio: float
    worst_center: tuple
    worst_radius: float
    global_ratio: float
    n_centers: int
    ratio_by_radius: list

    def to_json(self) -> dict:
        return asdict(self)


def dyadic_radii(measure: AtomicMeasure) -> list[float]:
    """spacing, 2 spacing, 4 spacing, ... up to the first value >= 2 support_radius."""
    r = measure.atom_spacing
    top = 2.0 * measure.support_radius
    if r <= 0:
        r = top / 2**10 if top > 0 else 1.0
    out = [r]
    while out[-1] < top:
        out.append(out[-1] * 2)
    return out


def audit_dimension(
    measure: AtomicMeasure,
    alpha: float,
    radii: Sequence[float] | None = None,
    plan: SamplingPlan = SamplingPlan(),
) -> DimensionReport:
    """Largest |mu|(B(c, r)) / r**alpha over the sampled centers and radii.

    Centers are the atoms (optionally an evenly strided subset), a plan.grid
    square grid over the atoms' bounding box, the origin and the |w|-weighted
    center of mass. The support radius is always added to the radii, so the
    ball about the origin holding all the mass is always tested.
    """
    if not 0 < alpha <= 2:
        raise PreconditionError(f"alpha must lie in (0, 2], got {alpha}")
    radii = list(dyadic_radii(measure) if radii is None else radii)
    if not radii or min(radii) <= 0:
        raise PreconditionError("radii must be positive")
    spacing = measure.atom_spacing
    if min(radii) < spacing * (1 - 1e-12):
        raise PreconditionError(
            f"radius {min(radii):g} is below the atom spacing {spacing:g}; the discrete ratio is meaningless there"
        )
    supp = measure.support_radius
    radii_all = np.unique(np.array(radii + ([supp] if supp > 0 else []), dtype=float))

    pos = measure.positions
    mass = np.abs(measure.weights)
    atom_centers = pos
    if plan.max_atom_centers is not None and len(pos) > plan.max_atom_centers:
        stride = -(-len(pos) // plan.max_atom_centers)
        atom_centers = pos[::stride]
    lo, hi = pos.min(axis=0), pos.max(axis=0)
    gx, gy = np.meshgrid(np.linspace(lo[0], hi[0], plan.grid), np.linspace(lo[1], hi[1], plan.grid))
    com = (mass @ pos) / mass.sum()
    centers = np.concatenate([atom_centers, np.stack([gx.ravel(), gy.ravel()], axis=1), [np.zeros(2), com]])

    K = len(radii_all)
    scale = radii_all**alpha
    best = (-1.0, None, None)
    by_radius = np.zeros(K)
    chunk = max(1, (1 << 22) // len(pos))
    for i in range(0, len(centers), chunk):
        c = centers[i : i + chunk]
        d = np.hypot(pos[None, :, 0] - c[:, None, 0], pos[None, :, 1] - c[:, None, 1])
        # bin b: smallest radius index with d <= radius; K means outside every ball
        bins = np.searchsorted(radii_all, d, side="left")
        flat = (np.arange(len(c))[:, None] * (K + 1) + bins).ravel()
        hist = np.bincount(flat, weights=np.broadcast_to(mass, d.shape).ravel(), minlength=len(c) * (K + 1))
        ball = np.cumsum(hist.reshape(len(c), K + 1)[:, :K], axis=1)
        ratio = ball / scale
        by_radius = np.maximum(by_radius, ratio.max(axis=0))
        j = int(np.argmax(ratio))
        if ratio.flat[j] > best[0]:
            ci, ri = divmod(j, K)
            best = (float(ratio.flat[j]), tuple(map(float, c[ci])), float(radii_all[ri]))
    global_ratio = measure.total_variation / supp**alpha if supp > 0 else math.inf
    return DimensionReport(
        alpha=float(alpha),
        radii=[float(r) for r in radii_all],
        worst_ratio=best[0],
        worst_center=best[1],
        worst_radius=best[2],
        global_ratio=global_ratio,
        n_centers=len(centers),
        ratio_by_radius=[float(x) for x in by_radius],
    )
