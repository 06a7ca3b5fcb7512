"""Graph curves gamma(t) = (t, phi(t)) with comparable first and second derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from restrictlab.errors import PreconditionError

Scalar = Callable[[np.ndarray], np.ndarray]

_CHECK_GRID = np.linspace(1.0, 2.0, 1024)


@dataclass(frozen=True)
class CurveSpec:
    """Graph of phi over [1, 2] with phi' and phi'' both comparable to m.

    The comparability constant ``c0`` bounds phi'/m and phi''/m from above
    and below on a 1024-point grid; construction fails otherwise.
    """

    phi: Scalar
    phi_d1: Scalar
    phi_d2: Scalar
    m: float
    c0: float = 8.0
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.m >= 1:
            raise PreconditionError(f"m must be >= 1, got {self.m}")
        lo, hi = 1.0 / self.c0, self.c0
        d1 = np.asarray(self.phi_d1(_CHECK_GRID), dtype=float) / self.m
        d2 = np.asarray(self.phi_d2(_CHECK_GRID), dtype=float) / self.m
        for label, ratio in (("phi'", d1), ("phi''", d2)):
            if not np.all(np.isfinite(ratio)) or ratio.min() < lo or ratio.max() > hi:
                raise PreconditionError(
                    f"{label}/m leaves [{lo:g}, {hi:g}] on [1,2] "
                    f"(range {ratio.min():.4g}..{ratio.max():.4g})"
                )

    def point(self, t):
        t = np.asarray(t, dtype=float)
        return np.stack([t, np.asarray(self.phi(t), dtype=float)], axis=-1)

    def max_slope(self, a: float = 1.0, b: float = 2.0) -> float:
        """Largest |phi'| on [a, b], sampled."""
        return float(np.max(np.abs(self.phi_d1(np.linspace(a, b, 1025)))))

    def derivative_bounds(self, a: float = 1.0, b: float = 2.0) -> tuple[float, float]:
        """(m1, m2) = (max phi', min phi'') on [a, b], sampled on a fine grid."""
        t = np.linspace(a, b, 4097)
        return float(np.max(self.phi_d1(t))), float(np.min(self.phi_d2(t)))

    def scaled(self, factor: float) -> "CurveSpec":
        """The curve of factor * phi, with m scaled accordingly."""
        phi, d1, d2 = self.phi, self.phi_d1, self.phi_d2
        return CurveSpec(
            lambda t: factor * phi(t),
            lambda t: factor * d1(t),
            lambda t: factor * d2(t),
            m=self.m * factor,
            c0=self.c0,
            name=f"{factor:g}*{self.name}",
            params={**self.params, "scale": factor},
        )

    def describe(self) -> dict:
        return {"name": self.name, "m": self.m, "c0": self.c0, **self.params}


def parabola(c0: float = 8.0) -> CurveSpec:
    """phi(t) = t**2 with m = 2."""
    return CurveSpec(
        lambda t: np.asarray(t, dtype=float) ** 2,
        lambda t: 2.0 * np.asarray(t, dtype=float),
        lambda t: np.full_like(np.asarray(t, dtype=float), 2.0),
        m=2.0,
        c0=c0,
        name="parabola",
    )


def power_rescaled(p: float, R: float, c0: float = 8.0) -> CurveSpec:
    """phi(t) = R**(p-1) t**p with m = R**(p-1): the curve (Rt, (Rt)**p) seen at scale R."""
    if not p > 1:
        raise PreconditionError(f"p must exceed 1, got {p}")
    if not R >= 1:
        raise PreconditionError(f"R must be >= 1, got {R}")
    s = float(R) ** (p - 1)
    return CurveSpec(
        lambda t: s * np.asarray(t, dtype=float) ** p,
        lambda t: s * p * np.asarray(t, dtype=float) ** (p - 1),
        lambda t: s * p * (p - 1) * np.asarray(t, dtype=float) ** (p - 2),
        m=s,
        c0=c0,
        name="power_rescaled",
        params={"p": p, "R": R},
    )


def quadratic_m(m: float, c0: float = 8.0) -> CurveSpec:
    """phi_m(t) = m t**2/2 + m t/2, so phi' = m (t + 1/2) and phi'' = m on [1, 2]."""
    return CurveSpec(
        lambda t: m * (np.asarray(t, dtype=float) ** 2 + np.asarray(t, dtype=float)) / 2.0,
        lambda t: m * (np.asarray(t, dtype=float) + 0.5),
        lambda t: np.full_like(np.asarray(t, dtype=float), float(m)),
        m=m,
        c0=c0,
        name="quadratic_m",
        params={"m": m},
    )


def linear() -> CurveSpec:
    """phi(t) = t: zero curvature, always rejected. Kept for negative tests and docs."""
    return CurveSpec(
        lambda t: np.asarray(t, dtype=float),
        lambda t: np.ones_like(np.asarray(t, dtype=float)),
        lambda t: np.zeros_like(np.asarray(t, dtype=float)),
        m=1.0,
        name="linear",
    )


def from_name(name: str, **params) -> CurveSpec:
    """Build a named curve family; used by config files."""
    builders = {
        "parabola": parabola,
        "power_rescaled": power_rescaled,
        "quadratic_m": quadratic_m,
    }
    if name not in builders:
        raise PreconditionError(f"unknown curve family {name!r}; known: {sorted(builders)}")
    return builders[name](**params)
