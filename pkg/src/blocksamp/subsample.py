"""Subsampling intervals that studentize each block by its own local scale.

The law of S_n / s_{n1} is approximated by that of S_l / s_{l1} with
l1 / n1 ~ l / n, so the self-similarity index never has to be estimated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blocks import (
    FORWARD,
    DEGENERATE_RTOL,
    EmpiricalDist,
    block_sums,
    is_degenerate,
    observed_mean,
    split_series,
    variance_tilde,
    window_sums,
)
from .errors import ConfigError, DegenerateScaleError
from .scales import ConfidenceInterval, interval_from_quantiles


def _floor_pow_09(n: int) -> int:
    """floor(n ** 0.9) in exact integer arithmetic."""
    k = int(math.floor(n**0.9))
    while (k + 1) ** 10 <= n**9:
        k += 1
    while k**10 > n**9:
        k -= 1
    return k


@dataclass(frozen=True)
class SubsampleScales:
    n: int
    l: int
    n1: int
    l1: int

    @property
    def ratio_error(self) -> float:
        return abs(self.l1 / self.n1 - self.l / self.n)


def choose_scales(n: int, l: int) -> SubsampleScales:
    """n1 = floor(n^0.9) and l1 = max(2, floor(l * n1 / n))."""
    if not 1 <= l < n:
        raise ConfigError(f"need 1 <= l < n, got l={l}, n={n}")
    n1 = _floor_pow_09(n)
    l1 = max(2, (l * n1) // n)
    if l1 >= n1 or l > n1:
        raise ConfigError(
            f"subsampling scales collapse for n={n}, l={l}: n1={n1}, l1={l1} "
            "(need 2 <= l1 <= l <= n1)"
        )
    if l1 > l:
        raise ConfigError(f"block length l={l} is below the minimum local block length 2")
    scales = SubsampleScales(n, l, n1, l1)
    # only reachable when the floor at 2 kicks in, i.e. l < n / n1
    if scales.ratio_error * n1 > 1.0:
        raise ConfigError(
            f"l={l} is too small for n={n}: l1/n1 = {l1}/{n1} misses l/n by more than 1/n1"
        )
    return scales


def local_variances(y, l: int, l1: int, ybar: float | None = None) -> np.ndarray:
    """s~^2_{l1,i} for every i = 1..n-l+1.

    Each is the mean of the l-l1+1 squared centered length-l1 sums inside
    the window [i, i+l-1].
    """
    obs, _ = split_series(y, None)
    if not 1 <= l1 <= l <= obs.size:
        raise ValueError(f"need 1 <= l1 <= l <= n, got l1={l1}, l={l}, n={obs.size}")
    if ybar is None:
        ybar = observed_mean(obs)
    c = block_sums(obs - ybar, l1, FORWARD)
    k = l - l1 + 1
    return window_sums(c * c, k) / k


def local_variance(y, i: int, l: int, l1: int, ybar: float) -> float:
    """s~^2_{l1,i} for the single window starting at (1-based) index ``i``."""
    obs, _ = split_series(y, None)
    if i < 1 or i + l - 1 > obs.size:
        raise ValueError(f"window [{i}, {i + l - 1}] lies outside 1..{obs.size}")
    seg = obs[i - 1 : i - 1 + l] - ybar
    c = block_sums(seg, l1, FORWARD)
    return float(np.dot(c, c) / c.size)


def f_l_star(y, scales: SubsampleScales) -> EmpiricalDist:
    """Distribution of (sum_{j=i}^{i+l-1} Y_j - l Ybar_n) / s~_{l1,i}, i = 1..n-l+1.

    Normalized by the n-l+1 windows so it is a proper distribution.
    """
    obs, _ = split_series(y, None)
    l, l1 = scales.l, scales.l1
    ybar = observed_mean(obs)
    centered = block_sums(obs - ybar, l, FORWARD)
    if l1 == l:
        # single-term local variance: reuse the numerators so |value| is exactly 1
        local_sd = np.abs(centered)
    else:
        local_sd = np.sqrt(local_variances(obs, l, l1, ybar))
    floor = DEGENERATE_RTOL * l1 * float(np.max(np.abs(obs)))
    bad = np.flatnonzero(local_sd <= floor)
    if bad.size:
        i = int(bad[0]) + 1
        raise DegenerateScaleError(
            f"local scale s~_(l1={l1}, i={i}) is zero; the window starting at i={i} is constant",
            index=i,
        )
    return EmpiricalDist(centered / local_sd)


def subsample_scale(y, scales: SubsampleScales) -> float:
    """s~_{n1}, the centered block-sum scale at length n1 over forward windows."""
    obs, _ = split_series(y, None)
    s_n1 = math.sqrt(variance_tilde(obs, scales.n1, FORWARD))
    if is_degenerate(s_n1, scales.n1, obs):
        raise DegenerateScaleError(f"block-sum scale at n1={scales.n1} is zero")
    return s_n1


def ci_mean_subsample(
    y, scales: SubsampleScales, alpha: float, kind: str = "two_sided"
) -> ConfidenceInterval:
    """Interval for the mean from quantiles of :func:`f_l_star`, scaled by s~_{n1}."""
    obs, _ = split_series(y, None)
    dist = f_l_star(obs, scales)
    return interval_from_quantiles(
        observed_mean(obs), dist, subsample_scale(obs, scales), obs.size, alpha, kind
    )
