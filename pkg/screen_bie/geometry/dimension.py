import math
from dataclasses import dataclass
from enum import Enum

from screen_bie.geometry.prefractals import Family, PrefractalSpec
from screen_bie.helpers.errors import DomainError

# Ambient dimension of the screen plane.
AMBIENT_DIM = 2
THRESHOLD_TOLERANCE = 1e-12


class Nullity(str, Enum):
    NULL = "Null"
    NOT_NULL = "NotNull"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class DimensionReport:
    hausdorff_dim: float
    threshold_s: float
    prediction: Nullity

    def to_dict(self) -> dict:
        return {
            "hausdorff_dim": self.hausdorff_dim,
            "threshold_s": self.threshold_s,
            "prediction": self.prediction.value,
        }


def nullity_prediction(dim: float, s: float) -> Nullity:
    """
    Whether a compact set of the given Hausdorff dimension supports a nonzero
    H^s distribution. Sets with dim < 2 + 2s are s-null, sets with
    dim > 2 + 2s are not; at equality both outcomes occur.
    """
    if not -1.0 <= s <= 0.0:
        raise DomainError(f"Nullity prediction needs -1 <= s <= 0, got {s}")
    if not 0.0 <= dim <= AMBIENT_DIM:
        raise DomainError(f"Hausdorff dimension must lie in [0, 2], got {dim}")

    threshold = AMBIENT_DIM + 2 * s
    if abs(dim - threshold) <= THRESHOLD_TOLERANCE:
        return Nullity.INDETERMINATE
    return Nullity.NULL if dim < threshold else Nullity.NOT_NULL


def similarity_dimension(spec: PrefractalSpec) -> DimensionReport:
    if spec.family is Family.CANTOR_DUST:
        # 4 copies at ratio alpha: 2 log 2 / log(1/alpha).
        dim = 2.0 / math.log2(float(1 / spec.alpha))  # type: ignore[operator]
    elif spec.family in (Family.SIERPINSKI_GASKET, Family.SIERPINSKI_COMPLEMENT):
        dim = math.log2(3.0)
    else:
        raise DomainError(f"No similarity dimension for family {spec.family.value}")

    return DimensionReport(
        hausdorff_dim=dim,
        threshold_s=(dim - AMBIENT_DIM) / 2,
        prediction=nullity_prediction(dim, -0.5),
    )
