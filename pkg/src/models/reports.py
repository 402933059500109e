"""
Result types for Monte Carlo moments, spectral densities and closed-form moments.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np
import pandas as pd

from src.models.ensemble import EnsembleParams


@dataclass(frozen=True)
class MomentEstimate:
    """Normalised moment of one order with its delta-method standard error."""

    order: int
    estimate: float
    std_error: float
    samples: int
    numerator_mean: float
    denominator_mean: float

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "samples": self.samples,
            "numerator_mean": self.numerator_mean,
            "denominator_mean": self.denominator_mean,
        }


@dataclass(frozen=True)
class MomentReport:
    params: EnsembleParams
    seed: int
    samples: int
    estimates: tuple[MomentEstimate, ...]
    odd_moments: tuple[MomentEstimate, ...] = ()

    def for_order(self, order: int) -> MomentEstimate:
        for estimate in self.estimates + self.odd_moments:
            if estimate.order == order:
                return estimate
        raise KeyError(f"order {order} was not estimated")

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "seed": self.seed,
            "samples": self.samples,
            "moments": [e.to_dict() for e in self.estimates],
            "odd_moments": [e.to_dict() for e in self.odd_moments],
        }


@dataclass(frozen=True, eq=False)
class DensityHistogram:
    """
    Unit-normalised histogram of pooled eigenvalues.

    overlay_heights is the semicircle of the given radius averaged over each bin, or None
    when no overlay was requested.
    """

    edges: np.ndarray
    counts: np.ndarray
    heights: np.ndarray
    radius: Optional[float] = None
    overlay_heights: Optional[np.ndarray] = None

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def total_mass(self) -> float:
        return float(np.sum(self.heights * self.widths))

    def to_frame(self) -> pd.DataFrame:
        overlay = (
            self.overlay_heights
            if self.overlay_heights is not None
            else np.full(len(self.heights), np.nan)
        )
        return pd.DataFrame(
            {
                "bin_lo": self.edges[:-1],
                "bin_hi": self.edges[1:],
                "height": self.heights,
                "overlay_height": overlay,
            }
        )


@dataclass(frozen=True)
class MomentFormulaResult:
    """Closed-form limit moment with the regime it was evaluated in."""

    order: int
    value: Fraction
    regime: str

    def to_dict(self) -> dict:
        return {"order": self.order, "value": self.value, "regime": self.regime}


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one identity in the verification suite."""

    name: str
    passed: bool
    checked: int
    detail: dict

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "checked": self.checked, "detail": self.detail}
