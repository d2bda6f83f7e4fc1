"""Sample paths of Y_i = K(X_i) where X_i is a truncated causal linear process.

The moving-average coefficients are a_k = c0 * (1 + k) ** -beta for
0 <= k <= M and zero elsewhere.  Innovation streams are derived from a
master seed plus an integer substream key through numpy's counter-based
Philox generator, so a replicate's draws never depend on execution order.
"""

from __future__ import annotations

import csv
import functools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, signal, special

from .errors import ConfigError, ResourceLimitError, TruncationError

LAWS = ("gaussian", "student_t", "rademacher")
TRANSFORMS = ("identity", "indicator_leq", "square")

DEFAULT_TRUNCATION = 10_000
DEFAULT_TAIL_TOL = 1e-3
DEFAULT_MAX_INNOVATIONS = 1 << 26


def substream_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the substream ``key`` of ``seed``.

    Distinct keys give statistically independent Philox streams.
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


@dataclass(frozen=True)
class InnovationSpec:
    law: str = "gaussian"
    df: Optional[int] = None

    def __post_init__(self):
        if self.law not in LAWS:
            raise ConfigError(f"unknown innovation law {self.law!r}; expected one of {LAWS}")
        if self.law == "student_t":
            if self.df is None or int(self.df) != self.df:
                raise ConfigError("student_t innovations need an integer df")
            if self.df <= 2:
                raise ConfigError(
                    f"student_t with df={self.df} has infinite variance; df >= 3 is required"
                )

    @property
    def variance(self) -> float:
        if self.law == "student_t":
            return self.df / (self.df - 2)
        return 1.0

    @property
    def symmetric(self) -> bool:
        return True

    def label(self) -> str:
        return f"t{self.df}" if self.law == "student_t" else self.law


@dataclass(frozen=True)
class CoefficientSeq:
    """Coefficients a_k = c0 (1+k)^-beta on 0..truncation.

    Construction fails with :class:`TruncationError` when the discarded tail
    variance A_M = sum_{k>M} a_k^2 exceeds ``tail_tol`` times the full
    variance A_0.  Pass ``tail_tol=None`` to accept any truncation; the
    ratio is still available as :attr:`tail_ratio`.
    """

    beta: float
    c0: float = 1.0
    truncation: int = DEFAULT_TRUNCATION
    tail_tol: Optional[float] = field(default=DEFAULT_TAIL_TOL, compare=False)

    def __post_init__(self):
        if not self.beta > 0.5:
            raise ConfigError(f"beta must exceed 1/2 for square summability, got {self.beta}")
        if self.truncation < 0 or int(self.truncation) != self.truncation:
            raise ConfigError(f"truncation must be a non-negative integer, got {self.truncation}")
        if self.c0 == 0:
            raise ConfigError("c0 must be nonzero")
        if self.tail_tol is not None and self.tail_ratio > self.tail_tol:
            raise TruncationError(
                f"truncation M={self.truncation} leaves tail variance ratio "
                f"A_M/A_0={self.tail_ratio:.3g} above tail_tol={self.tail_tol:g} "
                f"(beta={self.beta}); raise the truncation or pass an explicit tail_tol",
                ratio=self.tail_ratio,
                bound=self.tail_bound,
            )

    @property
    def total_variance(self) -> float:
        """A_0 = sum over all k >= 0 of a_k^2 (untruncated)."""
        return self.c0**2 * float(special.zeta(2 * self.beta, 1))

    @property
    def tail_variance(self) -> float:
        """A_M = sum_{k > M} a_k^2, evaluated through the Hurwitz zeta function."""
        return self.c0**2 * float(special.zeta(2 * self.beta, self.truncation + 2))

    @property
    def tail_bound(self) -> float:
        """Closed-form upper bound c0^2 M^(1-2 beta)/(2 beta - 1) on A_M."""
        m = max(self.truncation, 1)
        return self.c0**2 * m ** (1 - 2 * self.beta) / (2 * self.beta - 1)

    @property
    def tail_ratio(self) -> float:
        return self.tail_variance / self.total_variance

    def array(self) -> np.ndarray:
        """a_0, ..., a_M as a float array."""
        k = np.arange(self.truncation + 1, dtype=float)
        return self.c0 * (1.0 + k) ** (-self.beta)

    def sum_squares(self) -> float:
        a = self.array()
        return float(np.dot(a, a))


def coefficient(coeffs: CoefficientSeq, k: int) -> float:
    if k < 0 or k > coeffs.truncation:
        return 0.0
    return coeffs.c0 * (1.0 + k) ** (-coeffs.beta)


@dataclass(frozen=True)
class TransformSpec:
    kind: str = "identity"
    threshold: Optional[float] = None
    power_rank: int = 1

    def __post_init__(self):
        if self.kind not in TRANSFORMS:
            raise ConfigError(f"unknown transform {self.kind!r}; expected one of {TRANSFORMS}")
        if self.kind == "indicator_leq" and self.threshold is None:
            raise ConfigError("indicator_leq needs a threshold")
        if self.power_rank < 1:
            raise ConfigError("power rank must be a positive integer")
        if self.kind == "identity" and self.power_rank != 1:
            raise ConfigError("the identity transform has power rank 1")

    def apply(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "identity":
            return x
        if self.kind == "square":
            return x * x
        return (x <= self.threshold).astype(float)


@dataclass(frozen=True)
class ModelSpec:
    innovations: InnovationSpec
    coeffs: CoefficientSeq
    transform: TransformSpec
    mu_known: Optional[float] = None
    name: Optional[str] = None

    @property
    def beta(self) -> float:
        return self.coeffs.beta

    @property
    def power_rank(self) -> int:
        return self.transform.power_rank


_PRESETS = {
    "model-i": (InnovationSpec("gaussian"), TransformSpec("identity", power_rank=1)),
    "model-ii": (InnovationSpec("student_t", 7), TransformSpec("indicator_leq", 1.0, power_rank=1)),
    "model-iii": (InnovationSpec("student_t", 7), TransformSpec("indicator_leq", 0.0, power_rank=2)),
    "model-iv": (InnovationSpec("rademacher"), TransformSpec("square", power_rank=2)),
}

MODEL_NAMES = tuple(_PRESETS)


def preset_model(
    name: str,
    beta: float,
    truncation: int = DEFAULT_TRUNCATION,
    tail_tol: Optional[float] = DEFAULT_TAIL_TOL,
    c0: float = 1.0,
) -> ModelSpec:
    """One of the four benchmark processes, ``"model-i"`` ... ``"model-iv"``.

    ==========  ==================  ==================  ==========
    name        K(x)                innovations         power rank
    ==========  ==================  ==================  ==========
    model-i     x                   N(0, 1)             1
    model-ii    1{x <= 1}           t_7                 1
    model-iii   1{x <= 0}           t_7                 2
    model-iv    x^2                 Rademacher          2
    ==========  ==================  ==================  ==========
    """
    key = name.lower().replace("_", "-")
    if key not in _PRESETS:
        raise ConfigError(f"unknown model {name!r}; expected one of {MODEL_NAMES}")
    innov, transform = _PRESETS[key]
    coeffs = CoefficientSeq(beta=beta, c0=c0, truncation=truncation, tail_tol=tail_tol)
    return ModelSpec(innovations=innov, coeffs=coeffs, transform=transform, name=key)


def draw_innovations(
    spec: InnovationSpec, count: int, seed: int, substream: Sequence[int] = ()
) -> np.ndarray:
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = substream_rng(seed, *substream)
    if spec.law == "gaussian":
        return rng.standard_normal(count)
    if spec.law == "student_t":
        return rng.standard_t(spec.df, size=count)
    return 2.0 * rng.integers(0, 2, size=count).astype(float) - 1.0


def convolve_valid(eps: np.ndarray, a: np.ndarray, strategy: str = "auto") -> np.ndarray:
    """Causal filter output sum_j a_j eps[t - j] for every t with a full lookback."""
    if strategy == "auto":
        strategy = "fft" if len(a) > 64 else "direct"
    if strategy == "direct":
        return np.convolve(eps, a, mode="valid")
    if strategy == "fft":
        return signal.fftconvolve(eps, a, mode="valid")
    raise ConfigError(f"unknown convolution strategy {strategy!r}")


@dataclass(frozen=True, eq=False)
class SeriesWindow:
    """A realized path Y_{-l+1}, ..., Y_n.

    ``values[:l]`` is the past block and ``values[l:]`` the observed window.
    """

    values: np.ndarray
    n: int
    l: int
    seed: Optional[int] = None
    substream: tuple = ()
    model: Optional[ModelSpec] = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.n + self.l:
            raise ValueError(f"expected {self.n + self.l} values, got {len(vals)}")

    @classmethod
    def from_observed(cls, observed, past=()) -> "SeriesWindow":
        past = np.asarray(past, dtype=float)
        observed = np.asarray(observed, dtype=float)
        return cls(np.concatenate([past, observed]), n=len(observed), l=len(past))

    @property
    def observed(self) -> np.ndarray:
        return self.values[self.l:]

    @property
    def past(self) -> np.ndarray:
        return self.values[: self.l]

    @property
    def index(self) -> np.ndarray:
        return np.arange(-self.l + 1, self.n + 1)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "y"])
            for i, y in zip(self.index, self.values):
                w.writerow([int(i), repr(float(y))])


def simulate_window(
    model: ModelSpec,
    n: int,
    l: int,
    seed: int,
    substream: Sequence[int] = (),
    strategy: str = "auto",
    max_innovations: int = DEFAULT_MAX_INNOVATIONS,
) -> SeriesWindow:
    """Simulate Y_i = K(X_i^(M)) for i = -l+1, ..., n.

    Innovations eps_{1-M}, ..., eps_n come from substream ``(*substream, 0)``
    and the extra past innovations eps_{-l+1-M}, ..., eps_{-M} from
    ``(*substream, 1)``.  The observed part Y_1..Y_n therefore does not
    depend on ``l``, which lets two methods share a series exactly.
    ``l = 0`` (no past block) is allowed.
    """
    if n < 1:
        raise ConfigError("n must be at least 1")
    if l < 0:
        raise ConfigError("past block length must be non-negative")
    m = model.coeffs.truncation
    total = n + l + m
    if total > max_innovations:
        raise ResourceLimitError(
            f"n + l + M = {total} innovations exceed the configured cap of {max_innovations}"
        )
    substream = tuple(substream)
    core = draw_innovations(model.innovations, n + m, seed, (*substream, 0))
    extra = draw_innovations(model.innovations, l, seed, (*substream, 1))
    eps = np.concatenate([extra, core])
    x = convolve_valid(eps, model.coeffs.array(), strategy)
    y = model.transform.apply(x)
    return SeriesWindow(y, n=n, l=l, seed=seed, substream=substream, model=model)


@dataclass(frozen=True)
class TrueMean:
    """E K(X_0) with the accuracy of the route used to get it."""

    value: float
    stderr: float = 0.0
    reps: int = 0
    method: str = "exact"


def _t_log_cf(s: np.ndarray, df: int) -> np.ndarray:
    # log characteristic function of t_df; K_{df/2} is evaluated scaled by e^x
    x = np.sqrt(df) * np.abs(s)
    out = np.zeros_like(x)
    pos = x > 0
    xp = x[pos]
    nu = df / 2.0
    out[pos] = (
        np.log(special.kve(nu, xp)) - xp + nu * np.log(xp)
        - special.gammaln(nu) - (nu - 1.0) * np.log(2.0)
    )
    return out


def _linear_cdf_by_inversion(a: np.ndarray, df: int, t: float) -> tuple[float, float]:
    """P(sum_j a_j eps_j <= t) for iid symmetric t_df eps, by Gil-Pelaez inversion."""

    def log_cf(s):
        return float(np.sum(_t_log_cf(a * s, df)))

    sd = math.sqrt(df / (df - 2) * float(np.dot(a, a)))
    if t == 0.0:
        return 0.5, 0.0
    upper = 1.0 / sd
    while log_cf(upper) > -60.0:
        upper *= 2.0
    val, err = integrate.quad(
        lambda s: math.sin(s * t) * math.exp(log_cf(s)) / s, 0.0, upper, limit=400, epsabs=1e-12
    )
    return 0.5 + val / math.pi, err / math.pi


def _indicator_mean_mc(model: ModelSpec, t: float, reps: int, seed: int) -> TrueMean:
    a = model.coeffs.array()
    hits = 0
    chunk = max(1, 2_000_000 // len(a))
    done = 0
    k = 0
    while done < reps:
        m = min(chunk, reps - done)
        eps = draw_innovations(model.innovations, m * len(a), seed, (k,)).reshape(m, len(a))
        hits += int(np.count_nonzero(eps @ a <= t))
        done += m
        k += 1
    p = hits / reps
    return TrueMean(p, math.sqrt(p * (1 - p) / reps), reps, "monte_carlo")


@functools.lru_cache(maxsize=64)
def true_mean(model: ModelSpec, reps: int = 20_000, seed: int = 20_240_601) -> TrueMean:
    """mu = E K(X_0) for the truncated process.

    Indicator transforms use the exact normal CDF for Gaussian innovations,
    characteristic-function inversion for Student-t innovations, and plain
    Monte Carlo (``reps`` draws of X_0) otherwise.
    """
    if model.mu_known is not None:
        return TrueMean(float(model.mu_known))
    kind = model.transform.kind
    if kind == "identity":
        return TrueMean(0.0)
    if kind == "square":
        return TrueMean(model.innovations.variance * model.coeffs.sum_squares())
    t = float(model.transform.threshold)
    law = model.innovations.law
    a = model.coeffs.array()
    if law == "gaussian":
        sd = math.sqrt(float(np.dot(a, a)))
        return TrueMean(float(special.ndtr(t / sd)))
    if law == "student_t":
        p, err = _linear_cdf_by_inversion(a, model.innovations.df, t)
        return TrueMean(p, err, 0, "cf_inversion")
    return _indicator_mean_mc(model, t, reps, seed)
