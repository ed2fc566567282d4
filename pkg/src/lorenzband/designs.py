"""Unequal-probability sampling designs: Poisson, rejective, Pareto, Sampford, SRSWOR.

Inclusion probabilities proportional to a positive size measure are computed
with iterative capping at 1.  Units whose probability reaches 1 are included
deterministically by every fixed-size design and excluded from the stochastic
draw; the remaining target size is drawn from the uncapped pool.

The rejective (conditional Poisson) design repeats Poisson draws with working
parameters p_i = pi_i until the realized size matches n, so its exact inclusion
probabilities deviate slightly from the targets.  Sampford's design is exactly
pips.  Its textbook rejection scheme (one draw proportional to pi, n-1 with
replacement proportional to pi/(1-pi), restart on any duplicate) collapses for
moderate n because duplicates become near-certain, so large draws use an
equivalent two-stage form: draw a conditional Poisson set of size n-1, add one
unit from outside it with probability proportional to pi, and accept with
probability (sum of pi outside the set)/n.  A unit i joins a final set s either
as the added unit or within the Poisson set, and summing both routes gives
P(s) proportional to (prod_{i in s} pi_i/(1-pi_i)) * sum_{i in s}(1-pi_i),
which is Sampford's law exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import SamplingTimeoutError, ValidationError

DEFAULT_ATTEMPT_CAP = 10**6

# rejection attempts are vectorized in blocks of this many candidate draws
_ATTEMPT_BATCH = 32

# largest draw size for which the literal Sampford rejection loop stays viable
_SAMPFORD_LITERAL_MAX = 16


class DesignKind(enum.Enum):
    POISSON = "poisson"
    REJECTIVE = "rejective"
    PARETO = "pareto"
    SAMPFORD = "sampford"
    SRSWOR = "srswor"

    @classmethod
    def from_string(cls, name: str) -> "DesignKind":
        try:
            return cls(str(name).lower())
        except ValueError:
            raise ValidationError(
                f"unknown design kind {name!r}; expected one of "
                f"{sorted(k.value for k in cls)}"
            ) from None


FIXED_SIZE_KINDS = frozenset(
    {DesignKind.REJECTIVE, DesignKind.PARETO, DesignKind.SAMPFORD, DesignKind.SRSWOR}
)


@dataclass(frozen=True, eq=False)
class DesignSpec:
    """A design kind with per-unit inclusion probabilities summing to n.

    ``y`` and ``x`` optionally carry the population values so that draws can
    return value-bearing samples; they take no part in the sampling law.
    """

    kind: DesignKind
    pi: np.ndarray
    n: int
    y: np.ndarray | None = None
    x: np.ndarray | None = None

    def __post_init__(self):
        if not isinstance(self.kind, DesignKind):
            object.__setattr__(self, "kind", DesignKind.from_string(self.kind))
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "pi", pi)
        if pi.ndim != 1 or pi.size == 0:
            raise ValidationError("pi must be a nonempty vector")
        if not np.all(np.isfinite(pi)) or np.any(pi <= 0) or np.any(pi > 1):
            raise ValidationError("inclusion probabilities must lie in (0, 1]")
        if int(self.n) != self.n or not 1 <= self.n <= pi.size:
            raise ValidationError(f"target size n must be an integer in 1..{pi.size}")
        object.__setattr__(self, "n", int(self.n))
        if abs(math.fsum(pi) - self.n) > 1e-9 * self.n:
            raise ValidationError("inclusion probabilities must sum to the target size n")
        for name in ("y", "x"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                object.__setattr__(self, name, v)
                if v.shape != pi.shape:
                    raise ValidationError(f"{name} must match pi in length")

    @property
    def N(self) -> int:
        return self.pi.size


@dataclass(frozen=True, eq=False)
class DrawnSample:
    """A without-replacement sample: unit indices, their pi, and weights 1/pi."""

    indices: np.ndarray
    pi: np.ndarray
    weights: np.ndarray
    y: np.ndarray | None = None
    x: np.ndarray | None = None
    kind: DesignKind | None = None

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        object.__setattr__(self, "indices", idx)
        if np.unique(idx).size != idx.size:
            raise ValidationError("sample indices must be distinct")
        pi = np.asarray(self.pi, dtype=float)
        object.__setattr__(self, "pi", pi)
        if pi.shape != idx.shape or np.any(pi <= 0) or np.any(pi > 1):
            raise ValidationError("sample pi must lie in (0, 1], one per index")
        w = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", w)
        if w.shape != idx.shape or not np.array_equal(w, 1.0 / pi):
            raise ValidationError("weights must equal 1/pi exactly")
        for name in ("y", "x"):
            v = getattr(self, name)
            if v is not None:
                v = np.asarray(v, dtype=float)
                object.__setattr__(self, name, v)
                if v.shape != idx.shape:
                    raise ValidationError(f"{name} must match indices in length")

    @property
    def size(self) -> int:
        return self.indices.size


def compute_pips(x, n: int) -> np.ndarray:
    """pi_i = n x_i / sum(x), with iterative capping at 1 and re-proportioning.

    Each pass caps strictly fewer units than the remaining target size
    (capped units have scaled probability > 1 while the scaled values sum to
    the remainder), so uncapped units always remain and the loop terminates.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise ValidationError("size measures must form a nonempty vector")
    if not np.all(np.isfinite(x)) or np.any(x <= 0):
        raise ValidationError("size measures must be finite and positive")
    if int(n) != n or not 1 <= n <= x.size:
        raise ValidationError(f"sample size must be an integer in 1..{x.size}")
    pi = np.zeros(x.size)
    free = np.ones(x.size, dtype=bool)
    remaining = int(n)
    while True:
        scaled = remaining * x[free] / math.fsum(x[free])
        over = scaled > 1.0
        if not np.any(over):
            pi[free] = scaled
            return pi
        free_idx = np.nonzero(free)[0][over]
        pi[free_idx] = 1.0
        free[free_idx] = False
        remaining -= free_idx.size


def design_for_population(population, kind, n: int) -> DesignSpec:
    """Spec with pi proportional to the population's size measure (equal for SRSWOR)."""
    kind = kind if isinstance(kind, DesignKind) else DesignKind.from_string(kind)
    if kind is DesignKind.SRSWOR:
        if int(n) != n or not 1 <= n <= population.N:
            raise ValidationError(f"sample size must be an integer in 1..{population.N}")
        pi = np.full(population.N, n / population.N)
    else:
        pi = compute_pips(population.x, n)
    return DesignSpec(kind=kind, pi=pi, n=int(n), y=population.y, x=population.x)


def _finish(spec: DesignSpec, indices) -> DrawnSample:
    indices = np.sort(np.asarray(indices, dtype=np.int64))
    pi = spec.pi[indices]
    return DrawnSample(
        indices=indices,
        pi=pi,
        weights=1.0 / pi,
        y=None if spec.y is None else spec.y[indices],
        x=None if spec.x is None else spec.x[indices],
        kind=spec.kind,
    )


def _require_kind(spec: DesignSpec, kind: DesignKind) -> None:
    if spec.kind is not kind:
        raise ValidationError(f"spec kind is {spec.kind.value}, expected {kind.value}")


def _split_forced(spec: DesignSpec):
    """Indices with pi = 1 (always included) and the stochastic remainder."""
    forced = np.nonzero(spec.pi >= 1.0)[0]
    rest = np.nonzero(spec.pi < 1.0)[0]
    return forced, rest, spec.n - forced.size


def _conditional_poisson_mask(pi, size, g, cap, design_name):
    """Poisson draws with parameters pi repeated until the realized size matches.

    Returns (inclusion mask, attempts consumed).  Attempts are generated in
    blocks; the whole block's randomness is consumed even when an early row
    hits, keeping the stream position independent of where the hit lands.
    """
    used = 0
    while used < cap:
        b = min(_ATTEMPT_BATCH, cap - used)
        u = g.random((b, pi.size))
        used += b
        hits = np.nonzero((u < pi).sum(axis=1) == size)[0]
        if hits.size:
            return u[hits[0]] < pi, used
    raise SamplingTimeoutError(
        f"{design_name} sampling did not terminate within {cap} attempts"
    )


def _poisson_indices(spec: DesignSpec, g) -> np.ndarray:
    return np.nonzero(g.random(spec.N) < spec.pi)[0]


def _rejective_indices(spec: DesignSpec, g, cap) -> np.ndarray:
    forced, rest, k = _split_forced(spec)
    if k == 0:
        return forced
    mask, _ = _conditional_poisson_mask(spec.pi[rest], k, g, cap, "rejective")
    return np.concatenate([forced, rest[mask]])


def _pareto_indices(spec: DesignSpec, g) -> np.ndarray:
    forced, rest, k = _split_forced(spec)
    if k == 0:
        return forced
    p = spec.pi[rest]
    u = rng.uniform_open(g, p.size)
    ranks = (u / (1.0 - u)) * ((1.0 - p) / p)
    # stable sort breaks rank ties by unit index, a probability-zero event
    # under continuous uniforms but required for determinism
    order = np.argsort(ranks, kind="stable")
    return np.concatenate([forced, rest[order[:k]]])


def _sampford_literal(p, k: int, g, cap):
    """Textbook rejection: one draw ~ pi, k-1 with replacement ~ pi/(1-pi), all distinct."""
    cum_first = np.cumsum(p / math.fsum(p))
    q = p / (1.0 - p)
    cum_q = np.cumsum(q / math.fsum(q))
    cum_first[-1] = cum_q[-1] = 1.0
    used = 0
    while used < cap:
        b = min(_ATTEMPT_BATCH, cap - used)
        u = g.random((b, k))
        used += b
        rows = np.empty((b, k), dtype=np.int64)
        rows[:, 0] = np.searchsorted(cum_first, u[:, 0], side="right")
        if k > 1:
            rows[:, 1:] = np.searchsorted(cum_q, u[:, 1:], side="right")
        rows.sort(axis=1)
        ok = np.nonzero(np.all(rows[:, 1:] != rows[:, :-1], axis=1))[0]
        if ok.size:
            return rows[ok[0]]
    raise SamplingTimeoutError(
        f"sampford sampling did not terminate within {cap} attempts"
    )


def _sampford_pair(p, k: int, g, cap):
    """Equivalent two-stage Sampford draw; see the module docstring for the law."""
    budget = cap
    while budget > 0:
        mask, used = _conditional_poisson_mask(p, k - 1, g, budget, "sampford")
        budget -= used
        outside = np.nonzero(~mask)[0]
        w = p[outside]
        total_w = math.fsum(w)
        cum = np.cumsum(w / total_w)
        cum[-1] = 1.0
        extra = outside[np.searchsorted(cum, g.random(), side="right")]
        if g.random() * k < total_w:
            return np.sort(np.append(np.nonzero(mask)[0], extra))
    raise SamplingTimeoutError(
        f"sampford sampling did not terminate within {cap} attempts"
    )


def _sampford_indices(spec: DesignSpec, g, cap) -> np.ndarray:
    forced, rest, k = _split_forced(spec)
    if k == 0:
        return forced
    if k >= rest.size:
        raise ValidationError("sampford design needs more uncapped units than draws")
    p = spec.pi[rest]
    if k <= _SAMPFORD_LITERAL_MAX:
        local = _sampford_literal(p, k, g, cap)
    else:
        local = _sampford_pair(p, k, g, cap)
    return np.concatenate([forced, rest[local]])


def _srswor_indices(N: int, n: int, g) -> np.ndarray:
    return g.choice(N, size=n, replace=False, shuffle=False)


def _draw_indices(spec: DesignSpec, g, cap) -> np.ndarray:
    if spec.kind is DesignKind.POISSON:
        return _poisson_indices(spec, g)
    if spec.kind is DesignKind.REJECTIVE:
        return _rejective_indices(spec, g, cap)
    if spec.kind is DesignKind.PARETO:
        return _pareto_indices(spec, g)
    if spec.kind is DesignKind.SAMPFORD:
        return _sampford_indices(spec, g, cap)
    return _srswor_indices(spec.N, spec.n, g)


def draw_poisson(spec: DesignSpec, seed: int) -> DrawnSample:
    """Independent inclusion with probability pi_i; the sample size is random."""
    _require_kind(spec, DesignKind.POISSON)
    return _finish(spec, _poisson_indices(spec, rng.spawn(seed)))


def draw_rejective(spec: DesignSpec, seed: int, attempt_cap: int = DEFAULT_ATTEMPT_CAP) -> DrawnSample:
    """Poisson draws conditioned on realized size n (conditional Poisson design)."""
    _require_kind(spec, DesignKind.REJECTIVE)
    return _finish(spec, _rejective_indices(spec, rng.spawn(seed), attempt_cap))


def draw_pareto(spec: DesignSpec, seed: int) -> DrawnSample:
    """Order sampling: keep the n smallest [u/(1-u)] / [pi/(1-pi)] ranks."""
    _require_kind(spec, DesignKind.PARETO)
    return _finish(spec, _pareto_indices(spec, rng.spawn(seed)))


def draw_sampford(spec: DesignSpec, seed: int, attempt_cap: int = DEFAULT_ATTEMPT_CAP) -> DrawnSample:
    """Sampford's design: exactly pips first-order inclusion probabilities."""
    _require_kind(spec, DesignKind.SAMPFORD)
    return _finish(spec, _sampford_indices(spec, rng.spawn(seed), attempt_cap))


def draw_srswor(N: int, n: int, seed: int) -> DrawnSample:
    """Uniform without-replacement sample; pi = n/N, weights N/n."""
    if int(n) != n or int(N) != N or not 1 <= n <= N:
        raise ValidationError(f"need integers 1 <= n <= N, got n={n}, N={N}")
    indices = np.sort(_srswor_indices(int(N), int(n), rng.spawn(seed)))
    pi = np.full(int(n), n / N)
    return DrawnSample(
        indices=indices, pi=pi, weights=1.0 / pi, kind=DesignKind.SRSWOR
    )


def draw(spec: DesignSpec, seed: int, attempt_cap: int = DEFAULT_ATTEMPT_CAP) -> DrawnSample:
    """Draw one sample of the spec's own kind."""
    return _finish(spec, _draw_indices(spec, rng.spawn(seed), attempt_cap))


def empirical_inclusion(
    spec: DesignSpec, reps: int, seed: int, attempt_cap: int = DEFAULT_ATTEMPT_CAP
) -> np.ndarray:
    """Per-unit selection frequency over ``reps`` independent draws."""
    if int(reps) != reps or reps < 1:
        raise ValidationError("reps must be a positive integer")
    g = rng.spawn(seed)
    counts = np.zeros(spec.N)
    for _ in range(int(reps)):
        counts[_draw_indices(spec, g, attempt_cap)] += 1.0
    return counts / reps


def spec_to_json(spec: DesignSpec, path) -> None:
    doc = {
        "kind": spec.kind.value,
        "n": int(spec.n),
        "pi": [float(v) for v in spec.pi],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def spec_from_json(path, population=None) -> DesignSpec:
    """Load kind/n/pi; without an explicit pi a population must supply sizes."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ValidationError(f"cannot read design JSON: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed design JSON: {exc}") from exc
    if not isinstance(doc, dict) or "kind" not in doc or "n" not in doc:
        raise ValidationError("design JSON must be an object with 'kind' and 'n'")
    kind = DesignKind.from_string(doc["kind"])
    n = doc["n"]
    if int(n) != n or n < 1:
        raise ValidationError("design JSON field n must be a positive integer")
    pi = doc.get("pi")
    if pi is not None:
        pi = np.asarray(pi, dtype=float)
        if population is not None and pi.size != population.N:
            raise ValidationError("design pi length does not match the population")
        return DesignSpec(
            kind=kind,
            pi=pi,
            n=int(n),
            y=None if population is None else population.y,
            x=None if population is None else population.x,
        )
    if population is None:
        raise ValidationError("design JSON has no pi and no population was supplied")
    return design_for_population(population, kind, int(n))


_SAMPLE_HEADER = "id,y,x,pi,weight"


def sample_to_csv(sample: DrawnSample, path) -> None:
    if sample.y is None or sample.x is None:
        raise ValidationError("sample lacks population values; nothing to write")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(_SAMPLE_HEADER + "\n")
        for i in range(sample.size):
            fh.write(
                f"{int(sample.indices[i])},{float(sample.y[i])!r},"
                f"{float(sample.x[i])!r},{float(sample.pi[i])!r},"
                f"{float(sample.weights[i])!r}\n"
            )


def sample_from_csv(path, kind: DesignKind | None = None) -> DrawnSample:
    try:
        fh = open(path, encoding="utf-8")
    except FileNotFoundError as exc:
        raise ValidationError(f"cannot read sample CSV: {exc}") from exc
    with fh:
        header = fh.readline().strip()
        if header != _SAMPLE_HEADER:
            raise ValidationError(
                f"sample CSV must start with header '{_SAMPLE_HEADER}', got {header!r}"
            )
        try:
            body = np.loadtxt(fh, delimiter=",", ndmin=2)
        except ValueError as exc:
            raise ValidationError(f"malformed sample CSV: {exc}") from exc
    if body.size == 0 or body.shape[1] != 5:
        raise ValidationError("sample CSV needs rows of id,y,x,pi,weight")
    idx = body[:, 0]
    if np.any(idx != np.floor(idx)) or np.any(idx < 0):
        raise ValidationError("sample ids must be nonnegative integers")
    pi = body[:, 3]
    if np.any(pi <= 0) or np.any(pi > 1):
        raise ValidationError("sample pi values must lie in (0, 1]")
    # the weight column is redundant; verify it loosely, then store 1/pi exactly
    if not np.allclose(body[:, 4], 1.0 / pi, rtol=1e-6, atol=0.0):
        raise ValidationError("sample weight column is inconsistent with 1/pi")
    return DrawnSample(
        indices=idx.astype(np.int64),
        pi=pi,
        weights=1.0 / pi,
        y=body[:, 1],
        x=body[:, 2],
        kind=kind,
    )
