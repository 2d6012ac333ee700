from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from screen_bie.helpers.errors import DomainError


class DataKind(str, Enum):
    CONST = "const"
    PLANEWAVE = "planewave"
    POLY = "poly"


@dataclass(frozen=True)
class BoundaryData:
    """
    Closed-form data on the whole plane x3 = 0, restricted to each screen:
    a constant, a plane-wave trace value * exp(ik d.x) with |d| <= 1, or a
    polynomial sum c[i][j] x^i y^j.
    """

    kind: DataKind = DataKind.CONST
    value: complex = 1.0
    direction: Tuple[float, float] = (1.0, 0.0)
    coefficients: Tuple[Tuple[float, ...], ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DataKind(self.kind))
        if self.kind is DataKind.PLANEWAVE and np.hypot(*self.direction) > 1 + 1e-12:
            raise DomainError("Plane-wave direction must satisfy |d| <= 1")
        if self.kind is DataKind.POLY and not self.coefficients:
            raise DomainError("Polynomial data needs coefficients")

    @classmethod
    def constant(cls, value: complex = 1.0) -> "BoundaryData":
        return cls(kind=DataKind.CONST, value=value)

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "BoundaryData":
        value = document.get("value", 1.0)
        if isinstance(value, (list, tuple)):
            value = complex(*value)
        return cls(
            kind=DataKind(document.get("kind", "const")),
            value=value,
            direction=tuple(document.get("direction", (1.0, 0.0))),  # type: ignore[arg-type]
            coefficients=tuple(tuple(row) for row in document.get("coefficients", ())),
        )

    @property
    def is_unit_constant(self) -> bool:
        return self.kind is DataKind.CONST and self.value == 1

    def __call__(self, points: np.ndarray, k: complex) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        x = points[..., 0]
        y = points[..., 1]
        if self.kind is DataKind.CONST:
            return np.full(x.shape, complex(self.value))
        if self.kind is DataKind.PLANEWAVE:
            phase = self.direction[0] * x + self.direction[1] * y
            return complex(self.value) * np.exp(1j * k * phase)
        result = np.zeros(x.shape, dtype=complex)
        for i, row in enumerate(self.coefficients):
            for j, c in enumerate(row):
                if c:
                    result += c * x**i * y**j
        return result


def monomials(coefficients: Sequence[Sequence[float]]) -> BoundaryData:
    return BoundaryData(
        kind=DataKind.POLY, coefficients=tuple(tuple(row) for row in coefficients)
    )
