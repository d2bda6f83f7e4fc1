"""Two-time-scale estimate of the self-similarity index and block-sampling intervals for the mean."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

from .blocks import (
    BACKWARD,
    FORWARD,
    EmpiricalDist,
    split_series,
    f_n_tilde,
    is_degenerate,
    observed_mean,
    quantile,
    variance_tilde,
)
from .errors import DegenerateScaleError, SeriesTooShortError, UnsupportedBoundaryError

KINDS = ("two_sided", "upper_one_sided", "lower_one_sided")


def theoretical_H(p: int, beta: float) -> float:
    """Self-similarity index of the limit: 1 - p(beta - 1/2) under long memory, else 1/2."""
    if p < 1:
        raise ValueError("power rank must be at least 1")
    if not beta > 0.5:
        raise ValueError("beta must exceed 1/2")
    d = p * (2 * beta - 1)
    if d == 1:
        raise UnsupportedBoundaryError(
            f"p(2 beta - 1) = 1 (p={p}, beta={beta}) sits on the boundary between "
            "the long- and short-memory regimes and is not supported"
        )
    if d < 1:
        return 1.0 - p * (beta - 0.5)
    return 0.5


@dataclass(frozen=True)
class ScaleEstimates:
    s_l_tilde: float
    s_2l_tilde: float
    H_hat: float
    c0_hat: float
    sigma_n_hat: float
    l: int
    n: int

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True)
class ConfidenceInterval:
    kind: str
    level: float
    lo: float
    hi: float
    degenerate: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interval kind {self.kind!r}")
        if not self.lo <= self.hi:
            raise ValueError(f"interval endpoints out of order: [{self.lo}, {self.hi}]")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def to_dict(self) -> dict:
        d = asdict(self)
        # JSON has no infinities; null marks an unbounded side
        for key in ("lo", "hi"):
            if math.isinf(d[key]):
                d[key] = None
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _default_conv(y) -> str:
    _, past = split_series(y, None)
    return BACKWARD if past.size else FORWARD


def estimate_scales(y, l: int, conv: str | None = None) -> ScaleEstimates:
    """s~_l, s~_2l and the plug-in scale n^H_hat * c0_hat with c0_hat = s~_l / l^H_hat.

    Backward windows (the default whenever ``y`` carries a past block) need
    at least 2l - 1 past values.
    """
    conv = conv or _default_conv(y)
    obs, _ = split_series(y, None)
    n = obs.size
    if 2 * l > n:
        raise SeriesTooShortError(f"need 2l <= n, got l={l}, n={n}")
    s_l = math.sqrt(variance_tilde(y, l, conv))
    s_2l = math.sqrt(variance_tilde(y, 2 * l, conv))
    if is_degenerate(s_l, l, y) or is_degenerate(s_2l, 2 * l, y):
        raise DegenerateScaleError(
            f"block-sum scale is zero (s_l={s_l:g}, s_2l={s_2l:g}); "
            "the series is constant or too short to vary"
        )
    h = (math.log(s_2l) - math.log(s_l)) / math.log(2.0)
    c0 = _power(l, -h) * s_l
    sigma = _power(n, h) * c0
    if not 0.0 < sigma < math.inf:
        # extreme H_hat: n^H_hat or l^-H_hat left the float range, use the balanced form
        sigma = _power(n / l, h) * s_l
    return ScaleEstimates(s_l, s_2l, h, c0, sigma, l, n)


def _power(base: float, e: float) -> float:
    """base ** e with IEEE overflow to inf and underflow to 0 instead of exceptions."""
    try:
        return float(base) ** e
    except OverflowError:
        return math.inf


def _endpoint(ybar: float, q: float, step: float) -> float:
    """ybar - q * step, keeping an infinite step from producing 0 * inf."""
    if math.isinf(step):
        return ybar if q == 0.0 else math.copysign(math.inf, -q)
    return ybar - q * step


def interval_from_quantiles(
    ybar: float, dist: EmpiricalDist, scale: float, n: int, alpha: float, kind: str
) -> ConfidenceInterval:
    """Invert S_n / scale ~ dist into an interval for the mean.

    ``scale == 0`` gives a zero-width interval at ``ybar`` flagged degenerate.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    level = 1.0 - alpha
    if scale == 0.0:
        lo = -math.inf if kind == "lower_one_sided" else ybar
        hi = math.inf if kind == "upper_one_sided" else ybar
        return ConfidenceInterval(kind, level, lo, hi, degenerate=True)
    step = scale / n
    if kind == "two_sided":
        lo = _endpoint(ybar, quantile(dist, 1.0 - alpha / 2.0), step)
        hi = _endpoint(ybar, quantile(dist, alpha / 2.0), step)
    elif kind == "upper_one_sided":
        lo, hi = _endpoint(ybar, quantile(dist, 1.0 - alpha), step), math.inf
    elif kind == "lower_one_sided":
        lo, hi = -math.inf, _endpoint(ybar, quantile(dist, alpha), step)
    else:
        raise ValueError(f"unknown interval kind {kind!r}")
    return ConfidenceInterval(kind, level, lo, hi)


def ci_mean(
    y,
    l: int,
    alpha: float,
    kind: str = "two_sided",
    conv: str | None = None,
    estimates: ScaleEstimates | None = None,
) -> ConfidenceInterval:
    """Block-sampling interval for the mean with the H_hat-based scale for S_n."""
    conv = conv or _default_conv(y)
    if estimates is None:
        estimates = estimate_scales(y, l, conv)
    dist, _ = f_n_tilde(y, l, conv)
    return interval_from_quantiles(
        observed_mean(y), dist, estimates.sigma_n_hat, estimates.n, alpha, kind
    )
