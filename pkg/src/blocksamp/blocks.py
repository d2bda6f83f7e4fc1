"""Overlapping block sums, their empirical distributions and variance estimators.

Two window conventions are supported:

``backward_with_past``
    B_i = Y_i + Y_{i-1} + ... + Y_{i-l+1} for i = 1..n, reaching into the
    past block; n windows, divisor n.
``forward_interior``
    sum_{j=i}^{i+l-1} Y_j for i = 1..n-l+1 over the observed data only;
    n-l+1 windows, divisor n-l+1.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import DegenerateScaleError, InsufficientPastError, SeriesTooShortError
from .process import SeriesWindow

BACKWARD = "backward_with_past"
FORWARD = "forward_interior"
CONVENTIONS = (BACKWARD, FORWARD)

# relative size below which a block-sum scale counts as rounding noise
DEGENERATE_RTOL = 1e-13

# windows up to this length are summed directly; longer ones use prefix sums
DIRECT_SUM_MAX = 256


class EmpiricalDist:
    """Immutable sorted multiset with a right-continuous CDF and its generalized inverse."""

    __slots__ = ("_values",)

    def __init__(self, values):
        vals = np.sort(np.asarray(values, dtype=float).ravel())
        if vals.size == 0:
            raise ValueError("an empirical distribution needs at least one value")
        if not np.all(np.isfinite(vals)):
            raise ValueError("empirical distribution values must be finite")
        vals.setflags(write=False)
        self._values = vals

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def m(self) -> int:
        return self._values.size

    def __len__(self):
        return self.m

    def __repr__(self):
        return f"EmpiricalDist(m={self.m}, min={self._values[0]:.4g}, max={self._values[-1]:.4g})"

    def count_leq(self, x):
        """#{v <= x}, as integers."""
        return np.searchsorted(self._values, x, side="right")

    def count_lt(self, x):
        return np.searchsorted(self._values, x, side="left")

    def cdf(self, x):
        c = self.count_leq(x)
        if np.ndim(c) == 0:
            return int(c) / self.m
        return c / self.m

    def cdf_left(self, x):
        """Left limit F(x-)."""
        c = self.count_lt(x)
        if np.ndim(c) == 0:
            return int(c) / self.m
        return c / self.m

    def quantile(self, alpha: float) -> float:
        return quantile(self, alpha)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["value"])
            for v in self._values:
                w.writerow([repr(float(v))])


def quantile(d: EmpiricalDist, alpha: float) -> float:
    """Generalized inverse inf{x : cdf(x) >= alpha}, alpha in (0, 1]."""
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    m = d.m
    # smallest k with k/m >= alpha, using the same float division as cdf()
    k = min(max(math.ceil(alpha * m), 1), m)
    while k > 1 and (k - 1) / m >= alpha:
        k -= 1
    while k < m and k / m < alpha:
        k += 1
    return float(d.values[k - 1])


def split_series(y, past):
    if isinstance(y, SeriesWindow):
        return y.observed, y.past
    obs = np.asarray(y, dtype=float)
    return obs, (np.empty(0) if past is None else np.asarray(past, dtype=float))


def window_sums(z: np.ndarray, l: int) -> np.ndarray:
    """Sums of every length-``l`` run of ``z``.

    Short windows are summed term by term so a large value elsewhere in the
    series cannot wipe out the precision of a small window sum, which
    differencing prefix sums would.
    """
    if l == 1:
        return z.copy()
    if l <= DIRECT_SUM_MAX:
        return np.lib.stride_tricks.sliding_window_view(z, l).sum(axis=1)
    cs = np.concatenate([[0.0], np.cumsum(z)])
    return cs[l:] - cs[:-l]


def block_sums(y, l: int, conv: str = BACKWARD, past=None) -> np.ndarray:
    """Overlapping block sums of length ``l`` in index order.

    ``y`` is a :class:`SeriesWindow` or a raw sequence of observed values;
    for raw input in backward mode the past block goes in ``past``.
    """
    if l < 1:
        raise ValueError("block length must be at least 1")
    obs, pst = split_series(y, past)
    n = obs.size
    if conv == BACKWARD:
        need = l - 1
        if pst.size < need:
            raise InsufficientPastError(need, pst.size)
        z = np.concatenate([pst[pst.size - need:], obs]) if need else obs
        return window_sums(z, l)
    if conv == FORWARD:
        if l > n:
            raise SeriesTooShortError(f"block length {l} exceeds series length {n}")
        return window_sums(obs, l)
    raise ValueError(f"unknown block convention {conv!r}; expected one of {CONVENTIONS}")


def observed_mean(y, past=None) -> float:
    """Ybar_n over the observed values; exact for a constant series."""
    obs, _ = split_series(y, past)
    if obs.size and obs.min() == obs.max():
        return float(obs[0])
    return float(np.mean(obs))


def centered_block_sums(y, l: int, conv: str = BACKWARD, past=None) -> np.ndarray:
    """B_{i,l} - l * Ybar_n, summed after centering so the shift cancels term by term."""
    obs, pst = split_series(y, past)
    ybar = observed_mean(obs)
    return block_sums(obs - ybar, l, conv, pst - ybar)


def is_degenerate(scale: float, l: int, y, past=None) -> bool:
    """True when ``scale`` is zero up to rounding of length-``l`` sums of ``y``."""
    obs, _ = split_series(y, past)
    if not scale > 0:
        return True
    return scale <= DEGENERATE_RTOL * l * float(np.max(np.abs(obs)))


def f_n(y, l: int, s_l: float, conv: str = BACKWARD, past=None) -> EmpiricalDist:
    """Empirical distribution of B_{i,l} / s_l with a known scale ``s_l``."""
    if not s_l > 0:
        raise DegenerateScaleError(f"block scale must be positive, got {s_l}")
    return EmpiricalDist(block_sums(y, l, conv, past) / s_l)


def variance_hat(y, l: int, conv: str = BACKWARD, past=None) -> float:
    """Known-mean (mu = 0) estimate: mean of squared block sums."""
    b = block_sums(y, l, conv, past)
    return float(np.dot(b, b) / b.size)


def variance_tilde(y, l: int, conv: str = BACKWARD, past=None) -> float:
    """Centered estimate: mean of (B_{i,l} - l * Ybar_n)^2, Ybar_n over observed values."""
    b = centered_block_sums(y, l, conv, past)
    return float(np.dot(b, b) / b.size)


def f_n_tilde(y, l: int, conv: str = BACKWARD, past=None) -> tuple[EmpiricalDist, float]:
    """Studentized block-sum distribution and the scale ``s_l_tilde`` used for it."""
    obs, _ = split_series(y, past)
    if obs.size < 2:
        raise SeriesTooShortError("need at least two observations")
    centered = centered_block_sums(y, l, conv, past)
    s = math.sqrt(float(np.dot(centered, centered)) / centered.size)
    if is_degenerate(s, l, y, past):
        raise DegenerateScaleError(f"centered block sums of length {l} are all zero")
    return EmpiricalDist(centered / s), s
