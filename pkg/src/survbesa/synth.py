"""Synthetic censored data with a sinusoidal conditional mean.

Features are uniform on a hyperrectangle; event times are Weibull with
shape k scaled so the conditional mean is sin(c * sum(x)) + c; censoring
flags are independent Bernoulli draws.  Flipping a flag does not change
the recorded time by default (label-only censoring); an alternative mode
redraws censored times uniformly below the event time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import SurvivalDataset
from .errors import InvalidValue, NonPositiveScale

_TWO_PI = 2.0 * math.pi
# sin attains its minimum -1 at this angle (mod 2 pi)
_SIN_ARGMIN = 1.5 * math.pi


def _min_sin_on(lo: float, hi: float) -> float:
    """Exact minimum of sin over [lo, hi]."""
    if hi - lo >= _TWO_PI:
        return -1.0
    first = lo + (_SIN_ARGMIN - lo) % _TWO_PI
    if first <= hi:
        return -1.0
    return min(math.sin(lo), math.sin(hi))


@dataclass(frozen=True)
class SynthConfig:
    n: int
    d: int = 5
    lower: tuple[float, ...] | float = -2.0
    upper: tuple[float, ...] | float = 5.0
    p: float = 0.2  # probability a record is uncensored
    c: float = 3.0
    k: float = 6.0
    seed: int = 0
    censored_time_mode: str = "keep"  # or "uniform": redraw below the event time

    lower_arr: np.ndarray = field(init=False, repr=False, compare=False)
    upper_arr: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidValue(f"n must be >= 1, got {self.n}")
        if self.d < 1:
            raise InvalidValue(f"d must be >= 1, got {self.d}")
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.d,))
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.d,))
        if np.any(lower >= upper):
            raise InvalidValue("feature bounds need lower < upper")
        if not (0.0 <= self.p <= 1.0):
            raise InvalidValue(f"p must lie in [0, 1], got {self.p}")
        if not np.isfinite(self.c) or self.c <= 0:
            raise InvalidValue(f"c must be positive, got {self.c}")
        if not np.isfinite(self.k) or self.k < 1:
            raise InvalidValue(f"k must be >= 1, got {self.k}")
        if self.censored_time_mode not in ("keep", "uniform"):
            raise InvalidValue(
                f"censored_time_mode must be 'keep' or 'uniform', got {self.censored_time_mode!r}"
            )
        # reject configurations whose Weibull scale sin(c * sum(x)) + c can
        # reach zero anywhere on the hyperrectangle
        lo, hi = self.c * float(lower.sum()), self.c * float(upper.sum())
        if _min_sin_on(lo, hi) + self.c <= 0:
            raise NonPositiveScale(
                f"sin(c * sum(x)) + c can reach {_min_sin_on(lo, hi) + self.c:.3g}"
                f" on the feature hyperrectangle (c = {self.c})"
            )
        object.__setattr__(self, "lower_arr", lower)
        object.__setattr__(self, "upper_arr", upper)


def gen_event_time(x, c: float, k: float, u: float) -> float:
    """One Weibull draw with conditional mean sin(c * sum(x)) + c.

    T = (sin(c * sum(x)) + c) / Gamma(1 + 1/k) * (-ln u)^(1/k); u must be
    strictly inside (0, 1) so T is positive and finite.
    """
    if not (0.0 < u < 1.0):
        raise InvalidValue(f"u must lie strictly in (0, 1), got {u!r}")
    scale = math.sin(c * float(np.sum(x))) + c
    if scale <= 0:
        raise NonPositiveScale(f"sin(c * sum(x)) + c = {scale:.3g} at this x")
    return scale / math.gamma(1.0 + 1.0 / k) * (-math.log(u)) ** (1.0 / k)


def _open_unit_uniform(rng, size):
    u = rng.uniform(size=size)
    bad = u <= 0.0
    while np.any(bad):
        u[bad] = rng.uniform(size=int(bad.sum()))
        bad = u <= 0.0
    return u


def gen_dataset(config: SynthConfig) -> SurvivalDataset:
    """Draw a full dataset; deterministic given config.seed.

    Draw order is fixed (features, flags, event-time uniforms, then the
    optional censoring uniforms) so the same seed always yields the same
    records.
    """
    rng = np.random.default_rng(config.seed)
    X = rng.uniform(config.lower_arr, config.upper_arr, size=(config.n, config.d))
    events = (rng.uniform(size=config.n) < config.p).astype(int)
    u = _open_unit_uniform(rng, config.n)
    scale = np.sin(config.c * X.sum(axis=1)) + config.c
    times = scale / math.gamma(1.0 + 1.0 / config.k) * (-np.log(u)) ** (1.0 / config.k)
    if config.censored_time_mode == "uniform":
        v = _open_unit_uniform(rng, config.n)
        times = np.where(events == 0, times * v, times)
    return SurvivalDataset(X, times, events)
