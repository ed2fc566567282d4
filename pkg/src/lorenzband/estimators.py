"""Weighted distribution-function estimation and exact Lorenz curve arithmetic.

The estimated distribution function is a right-continuous step function with
a jump at each distinct observed value, of mass proportional to the summed
design weights of the tied units.  Integrating its quantile function gives a
generalized Lorenz curve that is exactly piecewise linear, so every derived
quantity here (Lorenz ordinates, Gini index, sup distances between curves) is
computed from the knot representation with no quadrature error.

Weights enter only through their ratios; internally they are normalized by
their maximum so that equal-weight inputs reduce bit-exactly to the unweighted
empirical distribution function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegeneracyError, ValidationError


@dataclass(frozen=True, eq=False)
class StepDF:
    """Right-continuous step distribution function on distinct knots.

    ``cum_p`` is strictly increasing and ends at exactly 1.  ``masses`` holds
    the merged per-knot weights (normalized by the maximum input weight);
    they are retained so curve construction works from the original weights
    rather than re-deriving them from differences of ``cum_p``.
    """

    knots_y: np.ndarray
    cum_p: np.ndarray
    masses: np.ndarray

    def evaluate(self, y) -> np.ndarray:
        """F(y): cumulative mass at the largest knot <= y, 0 below all knots."""
        idx = np.searchsorted(self.knots_y, np.asarray(y, dtype=float), side="right")
        padded = np.concatenate(([0.0], self.cum_p))
        return padded[idx]


@dataclass(frozen=True, eq=False)
class LorenzCurve:
    """Piecewise-linear Lorenz curve with its estimated mean.

    Knots run from (0, 0) to (1, 1); segment slopes equal the sorted distinct
    values divided by the mean, so the curve is nondecreasing and convex by
    construction.  The generalized Lorenz curve is ``mean * L(p)``.
    """

    knots_p: np.ndarray
    values_L: np.ndarray
    mean: float

    def evaluate(self, p) -> np.ndarray:
        return np.interp(np.asarray(p, dtype=float), self.knots_p, self.values_L)

    def generalized(self, p) -> np.ndarray:
        """Unnormalized (generalized) curve: the integral of the quantile function."""
        return self.mean * self.evaluate(p)


@dataclass(frozen=True, eq=False)
class PiecewiseCurve:
    """A generic piecewise-linear function on [0, 1] (band envelopes, curve differences)."""

    p: np.ndarray
    values: np.ndarray

    def evaluate(self, p) -> np.ndarray:
        return np.interp(np.asarray(p, dtype=float), self.p, self.values)

    def sup_abs(self) -> float:
        # piecewise linear: the extremum over [0, 1] is attained at a knot
        return float(np.max(np.abs(self.values)))


@dataclass(frozen=True)
class GiniEstimate:
    """Gini index 1 - 2 * integral of the Lorenz curve."""

    value: float


def weighted_step_df(y, weights) -> StepDF:
    """Step d.f. with jumps proportional to the summed weights of tied values."""
    y = np.asarray(y, dtype=float)
    w = np.asarray(weights, dtype=float)
    if y.size == 0:
        raise ValidationError("cannot estimate a distribution function from an empty sample")
    if y.shape != w.shape:
        raise ValidationError("values and weights must have the same length")
    if not np.all(np.isfinite(y)):
        raise ValidationError("values must be finite")
    if not np.all(np.isfinite(w)) or np.any(w <= 0):
        raise ValidationError("weights must be finite and positive")

    # only weight ratios matter; normalizing by the max keeps equal weights at
    # exactly 1.0 so the equal-weight case reduces bit-exactly to the e.d.f.
    w = w / np.max(w)
    knots, inverse = np.unique(y, return_inverse=True)
    masses = np.bincount(inverse, weights=w)
    cum = np.cumsum(masses)
    cum_p = cum / cum[-1]
    return StepDF(knots_y=knots, cum_p=cum_p, masses=masses)


def hajek_df(sample) -> StepDF:
    """Design-weighted estimate of the distribution function from a drawn sample.

    Each unit contributes mass proportional to its design weight (reciprocal
    inclusion probability); the result is normalized by the weight total.
    """
    return weighted_step_df(sample.y, sample.weights)


def quantile(df: StepDF, p: float) -> float:
    """Smallest knot y with F(y) >= p, for p in (0, 1]."""
    if not 0.0 < p <= 1.0:
        raise ValidationError(f"quantile order must lie in (0, 1], got {p}")
    idx = int(np.searchsorted(df.cum_p, p, side="left"))
    if idx >= df.knots_y.size:
        idx = df.knots_y.size - 1
    return float(df.knots_y[idx])


def lorenz(df: StepDF) -> LorenzCurve:
    """Exact Lorenz curve of a step d.f.

    The quantile function is constant between cumulative-weight knots, so its
    integral is piecewise linear with ordinates equal to cumulative weighted
    value shares.
    """
    contrib = df.masses * df.knots_y
    if np.any(df.knots_y < 0):
        raise ValidationError("Lorenz curve requires nonnegative values")
    cum_contrib = np.cumsum(contrib)
    total = cum_contrib[-1]
    if not total > 0:
        raise DegeneracyError("degenerate mean: total weighted value is zero")
    knots_p = np.concatenate(([0.0], df.cum_p))
    values_L = np.concatenate(([0.0], cum_contrib / total))
    mean = math.fsum(contrib) / math.fsum(df.masses)
    return LorenzCurve(knots_p=knots_p, values_L=values_L, mean=mean)


def gini(curve: LorenzCurve) -> GiniEstimate:
    """Gini index from the exact trapezoid integral of the piecewise-linear curve."""
    dp = np.diff(curve.knots_p)
    mid = curve.values_L[1:] + curve.values_L[:-1]
    integral = 0.5 * float(np.dot(dp, mid))
    return GiniEstimate(value=1.0 - 2.0 * integral)


def sup_distance(a: LorenzCurve, b: LorenzCurve) -> float:
    """Exact sup-norm distance between two piecewise-linear curves.

    The difference is piecewise linear on the union of the knot sets, so its
    extremum over each segment sits at an endpoint.
    """
    p = np.union1d(a.knots_p, b.knots_p)
    return float(np.max(np.abs(a.evaluate(p) - b.evaluate(p))))


def curve_difference(a: LorenzCurve, b: LorenzCurve) -> PiecewiseCurve:
    """a - b as a piecewise-linear function on the union of knots."""
    p = np.union1d(a.knots_p, b.knots_p)
    return PiecewiseCurve(p=p, values=a.evaluate(p) - b.evaluate(p))


def write_curve_csv(curve: LorenzCurve, path, grid: int | None = None) -> None:
    """Write `p,L` rows: at the knots, or on a uniform grid of ``grid`` intervals."""
    if grid is not None:
        if grid < 1:
            raise ValidationError("grid must be a positive interval count")
        p = np.linspace(0.0, 1.0, grid + 1)
        values = curve.evaluate(p)
    else:
        p, values = curve.knots_p, curve.values_L
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("p,L\n")
        for pi, li in zip(p, values):
            fh.write(f"{float(pi)!r},{float(li)!r}\n")
