"""Pseudo-population bootstrap for Lorenz bands, Gini intervals, dominance tests.

Each replicate rebuilds a pseudo-population from the sample (N trials of a
multinomial over sample units with probabilities proportional to the design
weights), draws a fresh fixed-size unequal-probability resample of the
original size n from it, and records two statistics: the scaled sup distance
Z* = sqrt(n) * sup |L* - L| between the replicate and original Lorenz curves,
and the Gini pivot sqrt(n) * (R* - R).  Empirical quantiles of these drive the
band halfwidth, both Gini interval styles, and the two-sample dominance band.

Replicate m derives its RNG substream from (seed, m) alone, so results are
bit-identical no matter how replicates are scheduled or batched.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from types import SimpleNamespace

import numpy as np
from scipy.special import ndtri

from . import rng
from .designs import (
    DesignKind,
    DrawnSample,
    FIXED_SIZE_KINDS,
    design_for_population,
    draw,
)
from .errors import DegeneracyError, ValidationError
from .estimators import (
    LorenzCurve,
    PiecewiseCurve,
    curve_difference,
    gini,
    hajek_df,
    lorenz,
    sup_distance,
)

# a replicate whose resample has zero total income is redrawn with a fresh
# substream at most this many times before the whole call gives up
_MAX_REGENERATIONS = 100


class CiMethod(enum.Enum):
    PIVOT_PERCENTILE = "pivot"
    NORMAL_APPROX = "normal"

    @classmethod
    def from_string(cls, name) -> "CiMethod":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValidationError(
                f"unknown interval method {name!r}; expected one of "
                f"{sorted(m.value for m in cls)}"
            ) from None


@dataclass(frozen=True, eq=False)
class PseudoPopulation:
    """Multinomial unit multiplicities over the source sample, summing to N."""

    multiplicities: np.ndarray
    source: DrawnSample

    def __post_init__(self):
        mult = np.asarray(self.multiplicities, dtype=np.int64)
        object.__setattr__(self, "multiplicities", mult)
        if mult.shape != self.source.indices.shape or np.any(mult < 0):
            raise ValidationError("multiplicities must be nonnegative, one per sample unit")

    @property
    def N(self) -> int:
        return int(self.multiplicities.sum())

    def expanded(self):
        """Run-length expansion to per-pseudo-unit (y, x) arrays of length N."""
        if self.source.y is None or self.source.x is None:
            raise ValidationError("source sample lacks population values")
        y = np.repeat(self.source.y, self.multiplicities)
        x = np.repeat(self.source.x, self.multiplicities)
        return y, x


@dataclass(frozen=True, eq=False)
class ReplicateStats:
    """The M sup-norm statistics and Gini pivots from one bootstrap run."""

    z_values: np.ndarray
    gini_pivots: np.ndarray
    M: int
    n: int
    regenerated: int = 0

    def __post_init__(self):
        z = np.asarray(self.z_values, dtype=float)
        piv = np.asarray(self.gini_pivots, dtype=float)
        object.__setattr__(self, "z_values", z)
        object.__setattr__(self, "gini_pivots", piv)
        if z.size != self.M or piv.size != self.M:
            raise ValidationError("replicate arrays must have length M")
        if np.any(z < 0):
            raise ValidationError("sup-norm statistics cannot be negative")


@dataclass(frozen=True, eq=False)
class BandResult:
    """Clipped sup-norm confidence band around the estimated Lorenz curve."""

    lower: PiecewiseCurve
    upper: PiecewiseCurve
    estimate: LorenzCurve
    level: float
    d_hat: float
    n: int

    def halfwidth(self) -> float:
        return self.d_hat / math.sqrt(self.n)

    def covers(self, curve: LorenzCurve, p=None) -> bool:
        """Envelope check lower <= curve <= upper, exact over knot unions.

        Passing explicit evaluation points ``p`` trades exactness for speed
        when the target curve carries very many knots.
        """
        if p is None:
            p = np.union1d(np.union1d(self.lower.p, self.upper.p), curve.knots_p)
        v = curve.evaluate(p)
        return bool(
            np.all(self.lower.evaluate(p) <= v) and np.all(v <= self.upper.evaluate(p))
        )

    def clipped_area(self) -> float:
        """Exact integral of (upper - lower) over [0, 1]."""
        p = np.union1d(self.lower.p, self.upper.p)
        gap = self.upper.evaluate(p) - self.lower.evaluate(p)
        return float(np.dot(np.diff(p), 0.5 * (gap[1:] + gap[:-1])))


@dataclass(frozen=True)
class GiniCI:
    """Gini confidence interval from bootstrap pivots."""

    point: float
    lower: float
    upper: float
    method: CiMethod
    level: float
    variance_hat: float

    def width(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True, eq=False)
class DominanceResult:
    """Two-sample Lorenz dominance test via a band around the difference curve."""

    phi_hat: PiecewiseCurve
    band_halfwidth: float
    reject: bool
    alpha: float
    z_values: np.ndarray
    n1: int
    n2: int


def _exact_fraction(value) -> Fraction:
    # str() of a float is its shortest round-tripping decimal, so levels given
    # as decimals (0.05, 0.95) become exact fractions rather than binary floats
    return value if isinstance(value, Fraction) else Fraction(str(float(value)))


def empirical_quantile(values, u) -> float:
    """ceil(M*u)-th order statistic; the inf-style empirical quantile."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        raise ValidationError("cannot take a quantile of zero replicates")
    k = math.ceil(v.size * _exact_fraction(u))
    return float(v[min(max(k, 1), v.size) - 1])


def _check_level(alpha, M: int) -> Fraction:
    a = _exact_fraction(alpha)
    if not 0 < a < 1:
        raise ValidationError(f"alpha must lie in (0, 1), got {alpha}")
    if M < math.ceil(1 / a):
        raise ValidationError(
            f"M={M} replicates cannot resolve level alpha={alpha}; need at least {math.ceil(1 / a)}"
        )
    return a


def _resample_kind(design_kind, sample: DrawnSample) -> DesignKind:
    if design_kind is None:
        if sample.kind is None:
            raise ValidationError("sample has no design kind; pass design_kind explicitly")
        design_kind = sample.kind
    kind = (
        design_kind
        if isinstance(design_kind, DesignKind)
        else DesignKind.from_string(design_kind)
    )
    if kind not in FIXED_SIZE_KINDS:
        raise ValidationError(
            f"resampling requires a fixed-size design, not {kind.value}"
        )
    return kind


def build_pseudo_population(sample: DrawnSample, N: int, seed: int) -> PseudoPopulation:
    """One multinomial draw: N trials over sample units, probabilities ~ weights."""
    return _build_pseudo(sample, N, rng.spawn(seed))


def _build_pseudo(sample: DrawnSample, N: int, g) -> PseudoPopulation:
    if int(N) != N or N < 1:
        raise ValidationError(f"pseudo-population size N must be a positive integer, got {N}")
    probs = sample.weights / math.fsum(sample.weights)
    mult = g.multinomial(int(N), probs)
    return PseudoPopulation(multiplicities=mult, source=sample)


def resample_once(pseudo: PseudoPopulation, design_kind, seed: int) -> DrawnSample:
    """Fixed-size pips draw of the original sample size from the pseudo-population."""
    kind = _resample_kind(design_kind, pseudo.source)
    y, x = pseudo.expanded()
    n = pseudo.source.size
    spec = design_for_population(SimpleNamespace(y=y, x=x, N=y.size), kind, n)
    return draw(spec, seed)


def _replicate_curve(sample, N, kind, seed, path) -> tuple[LorenzCurve, int]:
    """Fresh pseudo-population + resample + Lorenz curve for one replicate.

    Degenerate resamples (zero total income) are redrawn under substream
    (path, retry); the retry count is returned for diagnostics.
    """
    for retry in range(_MAX_REGENERATIONS):
        pseudo = _build_pseudo(sample, N, rng.spawn(seed, *path, retry, 0))
        resample = resample_once(pseudo, kind, rng.derive_seed(seed, *path, retry, 1))
        try:
            return lorenz(hajek_df(resample)), retry
        except DegeneracyError:
            continue
    raise DegeneracyError(
        f"bootstrap replicate stayed degenerate after {_MAX_REGENERATIONS} redraws"
    )


def bootstrap_replicates(
    sample: DrawnSample,
    N: int,
    M: int,
    design_kind=None,
    seed: int = 0,
    reuse_pseudo: bool = False,
) -> ReplicateStats:
    """Run M independent replicates and collect sup-norm stats and Gini pivots.

    ``reuse_pseudo`` freezes a single pseudo-population across replicates, a
    diagnostic mode; the default rebuilds it inside every replicate.
    """
    if int(M) != M or M < 1:
        raise ValidationError(f"replicate count M must be a positive integer, got {M}")
    kind = _resample_kind(design_kind, sample)
    base_curve = lorenz(hajek_df(sample))
    base_gini = gini(base_curve).value
    root_n = math.sqrt(sample.size)

    shared = _build_pseudo(sample, N, rng.spawn(seed)) if reuse_pseudo else None
    z_values = np.empty(int(M))
    pivots = np.empty(int(M))
    regenerated = 0
    for m in range(int(M)):
        if shared is not None:
            resample = resample_once(shared, kind, rng.derive_seed(seed, m, 1))
            curve = lorenz(hajek_df(resample))
        else:
            curve, retries = _replicate_curve(sample, N, kind, seed, (m,))
            regenerated += retries
        z_values[m] = root_n * sup_distance(curve, base_curve)
        pivots[m] = root_n * (gini(curve).value - base_gini)
    return ReplicateStats(
        z_values=z_values,
        gini_pivots=pivots,
        M=int(M),
        n=sample.size,
        regenerated=regenerated,
    )


def _clipped_offset_curve(curve: LorenzCurve, offset: float) -> PiecewiseCurve:
    """clip(L + offset, 0, 1) with knots added where the clipping bites."""
    p = curve.knots_p
    v = curve.values_L + offset
    cross = []
    for level in (0.0, 1.0):
        lo, hi = v[:-1], v[1:]
        hit = np.nonzero(((lo < level) & (hi > level)) | ((lo > level) & (hi < level)))[0]
        if hit.size:
            frac = (level - lo[hit]) / (hi[hit] - lo[hit])
            cross.append(p[hit] + frac * (p[hit + 1] - p[hit]))
    knots = np.union1d(p, np.concatenate(cross)) if cross else p
    values = np.clip(np.interp(knots, p, v), 0.0, 1.0)
    return PiecewiseCurve(p=knots, values=values)


def band_from_replicates(
    estimate: LorenzCurve, stats: ReplicateStats, alpha
) -> BandResult:
    """Sup-norm band: halfwidth is the (1-alpha) replicate quantile over sqrt(n)."""
    a = _check_level(alpha, stats.M)
    d_hat = empirical_quantile(stats.z_values, 1 - a)
    h = d_hat / math.sqrt(stats.n)
    return BandResult(
        lower=_clipped_offset_curve(estimate, -h),
        upper=_clipped_offset_curve(estimate, +h),
        estimate=estimate,
        level=float(1 - a),
        d_hat=d_hat,
        n=stats.n,
    )


def confidence_band(
    sample: DrawnSample,
    N: int,
    M: int,
    alpha,
    design_kind=None,
    seed: int = 0,
) -> BandResult:
    stats = bootstrap_replicates(sample, N, M, design_kind, seed)
    return band_from_replicates(lorenz(hajek_df(sample)), stats, alpha)


def gini_ci_from_replicates(
    point: float, stats: ReplicateStats, alpha, method
) -> GiniCI:
    a = _check_level(alpha, stats.M)
    method = CiMethod.from_string(method)
    root_n = math.sqrt(stats.n)
    variance = float(np.var(stats.gini_pivots, ddof=1)) if stats.M > 1 else 0.0
    if method is CiMethod.PIVOT_PERCENTILE:
        lo = point - empirical_quantile(stats.gini_pivots, 1 - a / 2) / root_n
        hi = point - empirical_quantile(stats.gini_pivots, a / 2) / root_n
    else:
        half = float(ndtri(float(1 - a / 2))) * math.sqrt(variance) / root_n
        lo, hi = point - half, point + half
    return GiniCI(
        point=point,
        lower=lo,
        upper=hi,
        method=method,
        level=float(1 - a),
        variance_hat=variance,
    )


def gini_ci(
    sample: DrawnSample,
    N: int,
    M: int,
    alpha,
    method=CiMethod.PIVOT_PERCENTILE,
    design_kind=None,
    seed: int = 0,
) -> GiniCI:
    stats = bootstrap_replicates(sample, N, M, design_kind, seed)
    point = gini(lorenz(hajek_df(sample))).value
    return gini_ci_from_replicates(point, stats, alpha, method)


def _sup_between(a: PiecewiseCurve, b: PiecewiseCurve) -> float:
    p = np.union1d(a.p, b.p)
    return float(np.max(np.abs(a.evaluate(p) - b.evaluate(p))))


def dominance_test(
    sample1: DrawnSample,
    N1: int,
    sample2: DrawnSample,
    N2: int,
    M: int,
    alpha,
    design_kinds=None,
    seed: int = 0,
) -> DominanceResult:
    """Test of "population 1 Lorenz-dominates population 2".

    The difference curve phi = L1 - L2 is bracketed by a sup-norm bootstrap
    band; dominance is rejected when the band's upper envelope dips below zero
    at an interior point.  Replicates resample both populations independently.
    """
    if isinstance(design_kinds, (tuple, list)):
        if len(design_kinds) != 2:
            raise ValidationError("design_kinds must name one design per sample")
        kind1, kind2 = design_kinds
    else:
        kind1 = kind2 = design_kinds
    kind1 = _resample_kind(kind1, sample1)
    kind2 = _resample_kind(kind2, sample2)
    if int(M) != M or M < 1:
        raise ValidationError(f"replicate count M must be a positive integer, got {M}")
    a = _check_level(alpha, int(M))

    curve1 = lorenz(hajek_df(sample1))
    curve2 = lorenz(hajek_df(sample2))
    phi_hat = curve_difference(curve1, curve2)
    n1, n2 = sample1.size, sample2.size
    rate = math.sqrt(n1 * n2 / (n1 + n2))

    z_values = np.empty(int(M))
    for m in range(int(M)):
        rep1, _ = _replicate_curve(sample1, N1, kind1, seed, (m, 0))
        rep2, _ = _replicate_curve(sample2, N2, kind2, seed, (m, 1))
        z_values[m] = rate * _sup_between(curve_difference(rep1, rep2), phi_hat)

    halfwidth = empirical_quantile(z_values, 1 - a) / rate
    interior = (phi_hat.p > 0.0) & (phi_hat.p < 1.0)
    reject = bool(np.any(phi_hat.values[interior] + halfwidth < 0.0))
    return DominanceResult(
        phi_hat=phi_hat,
        band_halfwidth=halfwidth,
        reject=reject,
        alpha=float(a),
        z_values=z_values,
        n1=n1,
        n2=n2,
    )


def band_to_csv(band: BandResult, path, grid: int | None = None) -> None:
    """Rows `p,lower,estimate,upper` over the band's knots or a uniform grid."""
    if grid is not None:
        if grid < 1:
            raise ValidationError("grid must be a positive interval count")
        p = np.linspace(0.0, 1.0, grid + 1)
    else:
        p = np.union1d(
            np.union1d(band.lower.p, band.upper.p), band.estimate.knots_p
        )
    lo = band.lower.evaluate(p)
    est = band.estimate.evaluate(p)
    hi = band.upper.evaluate(p)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("p,lower,estimate,upper\n")
        for row in zip(p, lo, est, hi):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def ci_to_csv(ci: GiniCI, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("method,level,point,lower,upper,variance_hat\n")
        fh.write(
            f"{ci.method.value},{float(ci.level)!r},{float(ci.point)!r},"
            f"{float(ci.lower)!r},{float(ci.upper)!r},{float(ci.variance_hat)!r}\n"
        )


def replicates_to_csv(stats: ReplicateStats, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("m,z,gini_pivot\n")
        for m in range(stats.M):
            fh.write(
                f"{m + 1},{float(stats.z_values[m])!r},{float(stats.gini_pivots[m])!r}\n"
            )


def dominance_to_csv(result: DominanceResult, path) -> None:
    """Summary row, then the difference curve with its band envelopes."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("reject,alpha,halfwidth,n1,n2,M\n")
        fh.write(
            f"{int(result.reject)},{float(result.alpha)!r},"
            f"{float(result.band_halfwidth)!r},{result.n1},{result.n2},"
            f"{result.z_values.size}\n"
        )
        fh.write("p,phi,lower,upper\n")
        h = result.band_halfwidth
        for p, v in zip(result.phi_hat.p, result.phi_hat.values):
            fh.write(f"{float(p)!r},{float(v)!r},{float(v - h)!r},{float(v + h)!r}\n")
