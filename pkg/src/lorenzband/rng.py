"""Reproducible random streams.

All randomness in the package flows through counter-based Philox generators
keyed by an integer seed plus an explicit substream path.  A substream is a
pure function of ``(seed, path)``, so any piece of work (a replicate, a
repetition, a retry) can be re-derived independently of scheduling or worker
count.  Normal and lognormal variates are produced by inverse-CDF transform
of uniforms so that fixtures are bit-stable across platforms.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

from .errors import ValidationError

_TWO53 = float(1 << 53)


def spawn(seed: int, *path: int) -> np.random.Generator:
    """Generator for the substream identified by ``path`` under ``seed``."""
    if seed < 0:
        raise ValidationError("seed must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Collapse ``(seed, path)`` into a fresh integer seed for a sub-task."""
    if seed < 0:
        raise ValidationError("seed must be nonnegative")
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(2, np.uint64)[0])


def uniform_open(g: np.random.Generator, size) -> np.ndarray:
    """Uniforms on the open interval (0, 1); safe to feed to inverse CDFs."""
    return (g.integers(0, 1 << 53, size=size).astype(np.float64) + 0.5) / _TWO53


def standard_normal(g: np.random.Generator, size) -> np.ndarray:
    """N(0,1) variates via the inverse-CDF transform."""
    return ndtri(uniform_open(g, size))


def lognormal(g: np.random.Generator, mu: float, sigma2: float, size) -> np.ndarray:
    """Lognormal variates: exp of N(mu, sigma2), inverse-CDF based."""
    if sigma2 < 0:
        raise ValidationError("lognormal variance must be nonnegative")
    return np.exp(mu + np.sqrt(sigma2) * standard_normal(g, size))
