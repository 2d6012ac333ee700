"""
The Helmholtz fundamental solution exp(ik|x-y|) / (4 pi |x-y|) in three
dimensions, for wavenumbers with Im k > 0.
"""
import cmath
from dataclasses import dataclass
from typing import Union

import numpy as np

from screen_bie.helpers.errors import DomainError, SingularEvaluation

SINGULAR_DISTANCE = 1e-14
FOUR_PI = 4.0 * np.pi


@dataclass(frozen=True)
class Wavenumber:
    k: complex

    def __post_init__(self) -> None:
        k = complex(self.k)
        if k == 0:
            raise DomainError("Wavenumber must be nonzero")
        if not k.imag > 0 or k.real < 0:
            raise DomainError(
                f"Wavenumber needs Im k > 0 and Re k >= 0 (0 < arg k <= pi/2), got {k}"
            )
        object.__setattr__(self, "k", k)

    @classmethod
    def from_parts(cls, re: float, im: float) -> "Wavenumber":
        return cls(complex(re, im))

    @property
    def is_imaginary(self) -> bool:
        return self.k.real == 0.0

    @property
    def arg(self) -> float:
        return cmath.phase(self.k)

    def __complex__(self) -> complex:
        return self.k


WavenumberLike = Union[Wavenumber, complex, float]

# Norm surrogate wavenumber: for k = i both boundary forms are real and SPD.
REFERENCE_WAVENUMBER = Wavenumber(1j)


def as_wavenumber(k: WavenumberLike) -> Wavenumber:
    return k if isinstance(k, Wavenumber) else Wavenumber(complex(k))


def phi_of_distance(r: np.ndarray, k: complex) -> np.ndarray:
    """Kernel as a function of distance; no singularity checks."""
    return np.exp(1j * k * r) / (FOUR_PI * r)


def _distance(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    r = np.linalg.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float), axis=-1)
    if np.any(r < SINGULAR_DISTANCE):
        raise SingularEvaluation(
            "Kernel evaluated at coincident points; use singular quadrature"
        )
    return r


def phi(x: np.ndarray, y: np.ndarray, k: WavenumberLike) -> np.ndarray:
    """Fundamental solution at points of R^3 (broadcast over leading axes)."""
    kk = as_wavenumber(k).k
    result = phi_of_distance(_distance(x, y), kk)
    return result if np.ndim(result) else complex(result)


def dphi_dn_y(
    x: np.ndarray, y: np.ndarray, k: WavenumberLike, normal: np.ndarray
) -> np.ndarray:
    """Normal derivative of the fundamental solution with respect to y."""
    kk = as_wavenumber(k).k
    normal = np.asarray(normal, dtype=float)
    if not np.allclose(np.linalg.norm(normal, axis=-1), 1.0):
        raise DomainError("Normal must be a unit vector")
    r = _distance(x, y)
    offset = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    projection = np.sum(offset * normal, axis=-1)
    result = (1 - 1j * kk * r) * np.exp(1j * kk * r) / (FOUR_PI * r**3) * projection
    return result if np.ndim(result) else complex(result)
