"""
Prefractal screens in the plane x3 = 0.

Panels are stored with exact rational coordinates. Squares live in the
Cartesian lattice; triangles of the Sierpinski families live in the
triangular lattice spanned by e1 = (1, 0) and e2 = (1/2, sqrt(3)/2), so that
every level of the construction is exact and points can be compared by key.
Conversion to floating point happens only in `Lattice.to_plane`.
"""
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from she_logging import logger

from screen_bie.helpers.errors import DomainError

ExactPoint = Tuple[Fraction, Fraction]
RealLike = Union[int, float, Fraction, str]

SQRT3_2 = math.sqrt(3.0) / 2.0


class Family(str, Enum):
    CANTOR_DUST = "cantor_dust"
    SIERPINSKI_GASKET = "sierpinski_gasket"
    SIERPINSKI_COMPLEMENT = "sierpinski_complement"
    CUSTOM = "custom"


class Openness(str, Enum):
    OPEN_SCREEN = "open"
    CLOSED_SET = "closed"


class Lattice(str, Enum):
    CARTESIAN = "cartesian"
    TRIANGULAR = "triangular"

    def to_plane(self, points: np.ndarray) -> np.ndarray:
        """Map an (n, 2) array of lattice coordinates to Cartesian coordinates."""
        points = np.asarray(points, dtype=float)
        if self is Lattice.CARTESIAN:
            return points
        x = points[..., 0] + 0.5 * points[..., 1]
        y = SQRT3_2 * points[..., 1]
        return np.stack([x, y], axis=-1)

    def from_plane(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if self is Lattice.CARTESIAN:
            return points
        b = points[..., 1] / SQRT3_2
        a = points[..., 0] - 0.5 * b
        return np.stack([a, b], axis=-1)


def exact_ratio(value: RealLike) -> Fraction:
    """
    Convert a user-supplied ratio to an exact Fraction. Decimal inputs such as
    0.2 are snapped to the nearby simple fraction (1/5) when they agree to
    1e-15, so that alpha-adic corners stay exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        return Fraction(value)
    exact = Fraction(value)
    snapped = exact.limit_denominator(10**6)
    if abs(float(snapped) - float(value)) <= 1e-15:
        return snapped
    return exact


@dataclass(frozen=True)
class Square:
    x: Fraction
    y: Fraction
    side: Fraction

    def corners(self) -> Tuple[ExactPoint, ExactPoint, ExactPoint, ExactPoint]:
        x, y, s = self.x, self.y, self.side
        return (x, y), (x + s, y), (x + s, y + s), (x, y + s)

    def base_triangles(self) -> List[Tuple[Tuple[ExactPoint, ...], Tuple[bool, ...]]]:
        """
        The diagonal split used by the mesher, with flags marking which of the
        edges AB, BC, CA lie on the square's boundary.
        """
        p0, p1, p2, p3 = self.corners()
        return [
            ((p0, p1, p2), (True, True, False)),
            ((p0, p2, p3), (False, True, True)),
        ]

    @property
    def exact_area(self) -> Fraction:
        return self.side * self.side

    def to_dict(self) -> Dict[str, Any]:
        return {
            "type": "square",
            "x": float(self.x),
            "y": float(self.y),
            "side": float(self.side),
            "exact": [str(self.x), str(self.y), str(self.side)],
        }


@dataclass(frozen=True)
class Triangle:
    """A triangle given by three counterclockwise vertices in lattice coordinates."""

    vertices: Tuple[ExactPoint, ExactPoint, ExactPoint]

    def base_triangles(self) -> List[Tuple[Tuple[ExactPoint, ...], Tuple[bool, ...]]]:
        return [(self.vertices, (True, True, True))]

    @property
    def exact_area(self) -> Fraction:
        # Area in lattice units; the caller scales by the lattice cell area.
        (ax, ay), (bx, by), (cx, cy) = self.vertices
        return ((bx - ax) * (cy - ay) - (cx - ax) * (by - ay)) / 2

    def to_dict(self, lattice: Lattice) -> Dict[str, Any]:
        exact = np.array([[float(a), float(b)] for a, b in self.vertices])
        return {
            "type": "triangle",
            "v": lattice.to_plane(exact).tolist(),
            "exact": [[str(a), str(b)] for a, b in self.vertices],
        }


Panel = Union[Square, Triangle]


@dataclass(frozen=True)
class PrefractalSpec:
    family: Family
    level: int
    alpha: Optional[Fraction] = None

    def __post_init__(self) -> None:
        if isinstance(self.level, bool) or int(self.level) != self.level:
            raise DomainError(f"Level must be an integer, got {self.level!r}")
        if self.level < 0:
            raise DomainError(f"Level must be nonnegative, got {self.level}")
        if self.family is Family.CANTOR_DUST:
            if self.alpha is None:
                raise DomainError("Cantor dust requires alpha")
            alpha = exact_ratio(self.alpha)
            if not 0 < alpha < Fraction(1, 2):
                raise DomainError(f"Cantor dust requires 0 < alpha < 1/2, got {alpha}")
            object.__setattr__(self, "alpha", alpha)
        if self.family is Family.SIERPINSKI_COMPLEMENT and self.level < 1:
            raise DomainError("The Sierpinski complement screen starts at level 1")


@dataclass(frozen=True)
class PanelSet:
    family: Family
    level: int
    panels: Tuple[Panel, ...]
    openness: Openness
    lattice: Lattice = Lattice.CARTESIAN
    alpha: Optional[Fraction] = None

    def __len__(self) -> int:
        return len(self.panels)

    @property
    def is_open(self) -> bool:
        return self.openness is Openness.OPEN_SCREEN

    @property
    def area(self) -> float:
        exact = sum((p.exact_area for p in self.panels), Fraction(0))
        if self.lattice is Lattice.TRIANGULAR:
            return float(exact) * SQRT3_2
        return float(exact)

    def exact_vertices(self) -> List[ExactPoint]:
        points: List[ExactPoint] = []
        for panel in self.panels:
            if isinstance(panel, Square):
                points.extend(panel.corners())
            else:
                points.extend(panel.vertices)
        return points

    @property
    def radius(self) -> float:
        """Smallest float R with every panel inside the open disc |x| < R."""
        if not self.panels:
            return 0.0
        exact = np.array([[float(a), float(b)] for a, b in self.exact_vertices()])
        largest = float(np.max(np.linalg.norm(self.lattice.to_plane(exact), axis=1)))
        return float(np.nextafter(largest, np.inf))

    @property
    def dust_index(self) -> int:
        """
        Index of the open screen whose closure is this Cantor level; the open
        screens are numbered one ahead of the construction level.
        """
        if self.family is Family.CANTOR_DUST:
            return self.level + 1
        return self.level

    def to_dict(self) -> Dict[str, Any]:
        panels = [
            p.to_dict() if isinstance(p, Square) else p.to_dict(self.lattice)
            for p in self.panels
        ]
        return {
            "family": self.family.value,
            "level": self.level,
            "alpha": None if self.alpha is None else str(self.alpha),
            "lattice": self.lattice.value,
            "radius": self.radius,
            "open": self.is_open,
            "panels": panels,
        }

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "PanelSet":
        lattice = Lattice(document.get("lattice", Lattice.CARTESIAN.value))
        panels: List[Panel] = []
        for item in document["panels"]:
            if item["type"] == "square":
                if "exact" in item:
                    x, y, side = (Fraction(v) for v in item["exact"])
                else:
                    x, y, side = (
                        exact_ratio(item[key]) for key in ("x", "y", "side")
                    )
                panels.append(Square(x, y, side))
            elif item["type"] == "triangle":
                if "exact" in item:
                    exact = [(Fraction(a), Fraction(b)) for a, b in item["exact"]]
                else:
                    coords = lattice.from_plane(np.array(item["v"], dtype=float))
                    exact = [(exact_ratio(a), exact_ratio(b)) for a, b in coords]
                panels.append(Triangle((exact[0], exact[1], exact[2])))
            else:
                raise DomainError(f"Unknown panel type {item['type']!r}")
        alpha = document.get("alpha")
        return cls(
            family=Family(document.get("family", Family.CUSTOM.value)),
            level=int(document.get("level", 0)),
            panels=tuple(panels),
            openness=Openness.OPEN_SCREEN
            if document.get("open", True)
            else Openness.CLOSED_SET,
            lattice=lattice,
            alpha=None if alpha is None else Fraction(alpha),
        )


def squares_screen(
    squares: Sequence[Tuple[RealLike, RealLike, RealLike]], open_screen: bool = True
) -> PanelSet:
    """A custom screen made of axis-aligned squares given as (x, y, side)."""
    panels = tuple(
        Square(exact_ratio(x), exact_ratio(y), exact_ratio(side))
        for x, y, side in squares
    )
    return PanelSet(
        family=Family.CUSTOM,
        level=0,
        panels=panels,
        openness=Openness.OPEN_SCREEN if open_screen else Openness.CLOSED_SET,
    )


def triangles_screen(
    triangles: Sequence[Sequence[Tuple[RealLike, RealLike]]], open_screen: bool = True
) -> PanelSet:
    """A custom screen of Cartesian triangles; vertices are reordered counterclockwise."""
    panels = []
    for vertices in triangles:
        exact = [(exact_ratio(x), exact_ratio(y)) for x, y in vertices]
        (ax, ay), (bx, by), (cx, cy) = exact
        if (bx - ax) * (cy - ay) - (cx - ax) * (by - ay) < 0:
            exact = [exact[0], exact[2], exact[1]]
        panels.append(Triangle((exact[0], exact[1], exact[2])))
    return PanelSet(
        family=Family.CUSTOM,
        level=0,
        panels=tuple(panels),
        openness=Openness.OPEN_SCREEN if open_screen else Openness.CLOSED_SET,
    )


def unit_square() -> PanelSet:
    return squares_screen([(0, 0, 1)])


def cantor_dust_prefractal(alpha: RealLike, j: int) -> PanelSet:
    spec = PrefractalSpec(Family.CANTOR_DUST, j, exact_ratio(alpha))
    ratio: Fraction = spec.alpha  # type: ignore[assignment]

    squares = [Square(Fraction(0), Fraction(0), Fraction(1))]
    for _ in range(j):
        children = []
        for square in squares:
            side = ratio * square.side
            shift = square.side - side
            for dx, dy in ((0, 0), (shift, 0), (0, shift), (shift, shift)):
                children.append(Square(square.x + dx, square.y + dy, side))
        squares = children

    logger.debug(
        "Generated Cantor dust prefractal",
        extra={"alpha": str(ratio), "level": j, "panels": len(squares)},
    )
    return PanelSet(
        family=Family.CANTOR_DUST,
        level=j,
        panels=tuple(squares),
        openness=Openness.CLOSED_SET,
        alpha=ratio,
    )


def _corner_triangle(a: Fraction, b: Fraction, size: Fraction) -> Triangle:
    return Triangle(((a, b), (a + size, b), (a, b + size)))


def _gasket_corners(level: int) -> List[Tuple[Fraction, Fraction, Fraction]]:
    corners = [(Fraction(0), Fraction(0), Fraction(1))]
    for _ in range(level):
        children = []
        for a, b, size in corners:
            half = size / 2
            children.extend([(a, b, half), (a + half, b, half), (a, b + half, half)])
        corners = children
    return corners


def sierpinski_prefractal(j: int) -> PanelSet:
    PrefractalSpec(Family.SIERPINSKI_GASKET, j)
    panels = tuple(_corner_triangle(a, b, size) for a, b, size in _gasket_corners(j))
    logger.debug(
        "Generated Sierpinski gasket prefractal",
        extra={"level": j, "panels": len(panels)},
    )
    return PanelSet(
        family=Family.SIERPINSKI_GASKET,
        level=j,
        panels=panels,
        openness=Openness.CLOSED_SET,
        lattice=Lattice.TRIANGULAR,
    )


def sierpinski_complement_screen(j: int) -> PanelSet:
    """
    The open screen F_0 minus F_j: the inverted middle triangles removed at
    levels 1..j, listed level by level so that level j is a prefix of level j+1.
    """
    PrefractalSpec(Family.SIERPINSKI_COMPLEMENT, j)
    holes = []
    for level in range(j):
        for a, b, size in _gasket_corners(level):
            half = size / 2
            holes.append(
                Triangle(((a + half, b), (a + half, b + half), (a, b + half)))
            )
    logger.debug(
        "Generated Sierpinski complement screen",
        extra={"level": j, "panels": len(holes)},
    )
    return PanelSet(
        family=Family.SIERPINSKI_COMPLEMENT,
        level=j,
        panels=tuple(holes),
        openness=Openness.OPEN_SCREEN,
        lattice=Lattice.TRIANGULAR,
    )


def sierpinski_base_screen() -> PanelSet:
    """The open triangle int(F_0), the screen every complement level grows towards."""
    return PanelSet(
        family=Family.SIERPINSKI_COMPLEMENT,
        level=0,
        panels=(_corner_triangle(Fraction(0), Fraction(0), Fraction(1)),),
        openness=Openness.OPEN_SCREEN,
        lattice=Lattice.TRIANGULAR,
    )


def generate_prefractal(spec: PrefractalSpec) -> PanelSet:
    if spec.family is Family.CANTOR_DUST:
        return cantor_dust_prefractal(spec.alpha, spec.level)  # type: ignore[arg-type]
    if spec.family is Family.SIERPINSKI_GASKET:
        return sierpinski_prefractal(spec.level)
    if spec.family is Family.SIERPINSKI_COMPLEMENT:
        return sierpinski_complement_screen(spec.level)
    raise DomainError(f"Cannot generate family {spec.family.value}")


def square_contains(outer: Square, inner: Square) -> bool:
    return (
        outer.x <= inner.x
        and outer.y <= inner.y
        and inner.x + inner.side <= outer.x + outer.side
        and inner.y + inner.side <= outer.y + outer.side
    )
