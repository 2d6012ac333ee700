"""
Trend rule deciding whether a sequence of nonnegative level values q_j is
heading to zero or to a positive limit. The rule is deliberately simple and
every threshold is configurable; the asymptotic dichotomy itself has no rate.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence

import numpy as np


class Verdict(str, Enum):
    CONVERGES_TO_ZERO = "ConvergesToZero"
    CONVERGES_TO_NONZERO = "ConvergesToNonzero"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class VerdictRule:
    zero_ratio_max: float = 0.9
    zero_last_ratio_max: float = 0.95
    nonzero_spread_max: float = 0.1
    nonzero_tail_factor: float = 10.0


@dataclass(frozen=True)
class TrendDiagnostics:
    values: List[float]
    ratios: List[Optional[float]]
    fitted_ratio: Optional[float]
    projected_tail: Optional[float]
    extrapolated_limit: Optional[float]
    relative_spread: Optional[float]
    verdict: Verdict
    fit: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "values": self.values,
            "ratios": self.ratios,
            "fitted_ratio": self.fitted_ratio,
            "projected_tail": self.projected_tail,
            "extrapolated_limit": self.extrapolated_limit,
            "relative_spread": self.relative_spread,
            "verdict": self.verdict.value,
            "fit": self.fit,
        }


def consecutive_ratios(values: Sequence[float]) -> List[Optional[float]]:
    return [
        (float(values[i] / values[i - 1]) if values[i - 1] != 0 else None)
        for i in range(1, len(values))
    ]


def projected_tail(values: Sequence[float]) -> float:
    """
    The total change the increments still project beyond the last level,
    assuming they keep shrinking at their geometric-mean rate r:
    |d_last| * r / (1 - r), infinite when r >= 1.
    """
    increments = np.diff(np.asarray(values, dtype=float))
    if increments.size == 0:
        return float("inf")
    if increments[-1] == 0:
        return 0.0
    magnitudes = np.abs(increments)
    if increments.size < 2 or np.any(magnitudes[:-1] == 0):
        return float("inf")
    rate = float(np.exp(np.mean(np.log(magnitudes[1:] / magnitudes[:-1]))))
    if rate >= 1:
        return float("inf")
    return float(magnitudes[-1] * rate / (1 - rate))


def decide_verdict(values: Sequence[float], rule: VerdictRule = VerdictRule()) -> TrendDiagnostics:
    q = [float(v) for v in values]
    ratios = consecutive_ratios(q)
    if not q or all(v == 0 for v in q):
        return TrendDiagnostics(
            values=q,
            ratios=ratios,
            fitted_ratio=0.0 if q else None,
            projected_tail=0.0 if q else None,
            extrapolated_limit=0.0 if q else None,
            relative_spread=None,
            verdict=Verdict.CONVERGES_TO_ZERO if q else Verdict.INCONCLUSIVE,
        )

    fitted_ratio: Optional[float] = None
    fit: Dict[str, float] = {}
    levels = np.arange(1, len(q) + 1, dtype=float)
    if len(q) >= 2 and all(v > 0 for v in q):
        slope, intercept = np.polyfit(levels, np.log(q), 1)
        fitted_ratio = float(np.exp(slope))
        fit = {"log_slope": float(slope), "log_intercept": float(intercept)}

    tail = projected_tail(q)
    increments = np.diff(q)
    direction = float(np.sign(increments[-1])) if increments.size else 0.0
    extrapolated = q[-1] + direction * tail if np.isfinite(tail) else None

    last_three = np.asarray(q[-3:])
    spread: Optional[float] = None
    if last_three.size == 3 and last_three.mean() > 0:
        spread = float(last_three.std() / last_three.mean())

    last_ratio = ratios[-1] if ratios else None
    verdict = Verdict.INCONCLUSIVE
    if (
        fitted_ratio is not None
        and last_ratio is not None
        and fitted_ratio <= rule.zero_ratio_max
        and last_ratio <= rule.zero_last_ratio_max
    ):
        verdict = Verdict.CONVERGES_TO_ZERO
    elif (
        spread is not None
        and spread <= rule.nonzero_spread_max
        and q[-1] >= rule.nonzero_tail_factor * tail
    ):
        verdict = Verdict.CONVERGES_TO_NONZERO

    return TrendDiagnostics(
        values=q,
        ratios=ratios,
        fitted_ratio=fitted_ratio,
        projected_tail=tail if np.isfinite(tail) else None,
        extrapolated_limit=extrapolated,
        relative_spread=spread,
        verdict=verdict,
        fit=fit,
    )
