"""Synthetic finite populations with a size measure driving unequal selection.

Incomes follow a squared-regression model with heavy right skew,

    y_i = (beta0 + beta1 * |j_i|^1.2 + sigma * eps_i)^2 + c,

with j_i ~ N(0, xi_sd^2) and eps_i ~ N(0, 1).  The size measure is
x_i = y_i^z_exponent * w_i with w_i lognormal, so inclusion probabilities
proportional to x are informatively (but not perfectly) tied to income.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass

import numpy as np

from . import rng
from .errors import ValidationError
from .estimators import LorenzCurve, lorenz, weighted_step_df

_CSV_HEADER = "id,y,x"


@dataclass(frozen=True)
class ModelConfig:
    """Parameters of the generating model; defaults give a skewed income law."""

    N: int
    beta0: float = 12.5
    beta1: float = 3.0
    c: float = 4000.0
    sigma: float = 15.0
    xi_sd: float = 7.0
    z_exponent: float = 0.2
    w_log_mu: float = 0.0
    w_log_sigma2: float = 0.025

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"population size N must be a positive integer, got {self.N}")
        if self.c < 0:
            raise ValidationError("income offset c must be nonnegative")
        if self.sigma < 0:
            raise ValidationError("sigma must be nonnegative")
        if self.xi_sd < 0:
            raise ValidationError("xi_sd must be nonnegative")
        if self.w_log_sigma2 < 0:
            raise ValidationError("w_log_sigma2 must be nonnegative")

    def to_json(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(dataclasses.asdict(self), fh, indent=2)
            fh.write("\n")

    @classmethod
    def from_json(cls, path) -> "ModelConfig":
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError as exc:
            raise ValidationError(f"cannot read model config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"malformed model config JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValidationError("model config JSON must be an object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValidationError(f"unknown model config fields: {sorted(unknown)}")
        if "N" not in raw:
            raise ValidationError("model config must set N")
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ValidationError(f"bad model config: {exc}") from exc


@dataclass(frozen=True, eq=False)
class FinitePopulation:
    """Immutable population: incomes y >= 0 and positive size measures x."""

    y: np.ndarray
    x: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        x = np.asarray(self.x, dtype=float)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        if y.ndim != 1 or y.size < 1:
            raise ValidationError("population must hold at least one unit")
        if y.shape != x.shape:
            raise ValidationError("y and x must have the same length")
        if not np.all(np.isfinite(y)) or np.any(y < 0):
            raise ValidationError("incomes y must be finite and nonnegative")
        if not np.all(np.isfinite(x)) or np.any(x <= 0):
            raise ValidationError("size measures x must be finite and positive")

    @property
    def N(self) -> int:
        return self.y.size

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(_CSV_HEADER + "\n")
            for i in range(self.N):
                fh.write(f"{i},{float(self.y[i])!r},{float(self.x[i])!r}\n")

    @classmethod
    def from_csv(cls, path) -> "FinitePopulation":
        try:
            fh = open(path, encoding="utf-8")
        except FileNotFoundError as exc:
            raise ValidationError(f"cannot read population CSV: {exc}") from exc
        with fh:
            header = fh.readline().strip()
            if header != _CSV_HEADER:
                raise ValidationError(
                    f"population CSV must start with header '{_CSV_HEADER}', got {header!r}"
                )
            try:
                body = np.loadtxt(fh, delimiter=",", ndmin=2)
            except ValueError as exc:
                raise ValidationError(f"malformed population CSV: {exc}") from exc
        if body.size == 0 or body.shape[1] != 3:
            raise ValidationError("population CSV needs rows of id,y,x")
        return cls(y=body[:, 1], x=body[:, 2])


def generate_population(config: ModelConfig, seed: int) -> FinitePopulation:
    """Draw a population from the model; a pure function of (config, seed)."""
    n = int(config.N)
    j = config.xi_sd * rng.standard_normal(rng.spawn(seed, 0), n)
    eps = rng.standard_normal(rng.spawn(seed, 1), n)
    w = rng.lognormal(rng.spawn(seed, 2), config.w_log_mu, config.w_log_sigma2, n)
    base = config.beta0 + config.beta1 * np.abs(j) ** 1.2 + config.sigma * eps
    y = base * base + config.c
    x = y**config.z_exponent * w
    return FinitePopulation(y=y, x=x)


def population_lorenz(pop: FinitePopulation) -> LorenzCurve:
    """Exact census Lorenz curve: the equal-weight case of the sample estimator."""
    return lorenz(weighted_step_df(pop.y, np.ones(pop.N)))


def reference_lorenz(config: ModelConfig, sample_count: int, seed: int) -> LorenzCurve:
    """Model-level Lorenz curve approximated by one very large generated population.

    Monte Carlo truth with sup error O(sample_count^-1/2); sample_count of
    at least 1e5 is recommended when this serves as a coverage target.
    """
    big = dataclasses.replace(config, N=int(sample_count))
    return population_lorenz(generate_population(big, seed))
