"""
Sphere Geometry

Points of the Riemann sphere in the two stereographic charts
(``z`` and ``w = 1/z``) and the chordal distance, which is chart independent:

    d(x, y)^2 = |x - y|^2 / ((1 + |x|^2)(1 + |y|^2)),   d(x, inf)^2 = 1 / (1 + |x|^2)
"""
import math
from dataclasses import dataclass

import numpy as np

from src.errors import ParseError


@dataclass(frozen=True)
class SpherePoint:
    """A point of the sphere; ``z is None`` encodes the point at infinity."""

    z: complex = None

    @classmethod
    def infinity(cls) -> "SpherePoint":
        return cls(None)

    @classmethod
    def from_w(cls, w: complex) -> "SpherePoint":
        return cls(None) if w == 0 else cls(complex(1 / w))

    @classmethod
    def parse(cls, raw) -> "SpherePoint":
        """Reads ``"inf"``, a number, or a ``[re, im]`` pair."""
        if isinstance(raw, SpherePoint):
            return raw
        if raw is None or (isinstance(raw, str) and raw.strip().lower() in ("inf", "infinity", "oo")):
            return cls(None)
        try:
            if isinstance(raw, (list, tuple)):
                if len(raw) != 2:
                    raise ValueError(raw)
                return cls(complex(float(raw[0]), float(raw[1])))
            if isinstance(raw, str):
                return cls(complex(raw.replace(" ", "")))
            return cls(complex(raw))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"cannot read a sphere point from {raw!r}") from exc

    @property
    def is_infinite(self) -> bool:
        return self.z is None

    @property
    def chart(self) -> str:
        """``"z"`` on the closed unit disk, ``"w"`` outside it."""
        return "z" if not self.is_infinite and abs(self.z) <= 1 else "w"

    @property
    def w(self) -> complex:
        if self.is_infinite:
            return 0j
        return complex(1 / self.z) if self.z != 0 else complex(math.inf)

    def chart_coordinate(self) -> complex:
        return self.z if self.chart == "z" else self.w

    def to_json(self):
        return "inf" if self.is_infinite else [self.z.real, self.z.imag]

    def __str__(self):
        return "inf" if self.is_infinite else f"{self.z.real:g}{self.z.imag:+g}j"


def chordal_sq(x, y):
    """Squared chordal distance; ``x`` an array of finite points, ``y`` an array or a ``SpherePoint``."""
    x = np.asarray(x, dtype=complex)
    nx = 1.0 + np.abs(x) ** 2
    if isinstance(y, SpherePoint):
        if y.is_infinite:
            return 1.0 / nx
        y = y.z
    y = np.asarray(y, dtype=complex)
    return np.abs(x - y) ** 2 / (nx * (1.0 + np.abs(y) ** 2))


def chordal_distance(p: SpherePoint, q: SpherePoint) -> float:
    if p.is_infinite and q.is_infinite:
        return 0.0
    if p.is_infinite:
        p, q = q, p
    return float(math.sqrt(chordal_sq(p.z, q)))
