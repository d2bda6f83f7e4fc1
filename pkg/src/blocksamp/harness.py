"""Monte Carlo coverage studies and single-series estimation workflows.

Every replicate k draws its innovations from the substream (method, k) of
the master seed (or (k,) when methods are paired), so results do not
depend on the number of workers or the order replicates finish in.
"""

from __future__ import annotations

import configparser
import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional, Sequence

import numpy as np

from .blocks import BACKWARD, FORWARD, EmpiricalDist, f_n_tilde, observed_mean, split_series
from .errors import BlockSamplingError, ConfigError, DegenerateScaleError, SeriesTooShortError
from .process import (
    DEFAULT_TAIL_TOL,
    DEFAULT_TRUNCATION,
    MODEL_NAMES,
    ModelSpec,
    SeriesWindow,
    preset_model,
    simulate_window,
    true_mean,
)
from .scales import ScaleEstimates, ci_mean, estimate_scales, interval_from_quantiles
from .subsample import SubsampleScales, choose_scales, ci_mean_subsample, f_l_star, subsample_scale

log = logging.getLogger(__name__)

METHODS = ("h_hat", "subsampling")
_METHOD_KEY = {"h_hat": 0, "subsampling": 1}

SWEEP_COLUMNS = (
    "model", "beta", "n", "c", "method", "alpha", "reps",
    "lower_cov", "upper_cov", "mc_se_lower", "mc_se_upper",
    "degenerate", "seed", "wall_time_s",
)


def block_length(n: int, c: float) -> int:
    """floor(c * sqrt(n))."""
    return int(math.floor(c * math.sqrt(n) + 1e-9))


@dataclass(frozen=True)
class ExperimentConfig:
    model: str
    beta: float
    n: int
    c: float = 1.0
    method: str = "h_hat"
    alpha: float = 0.1
    reps: int = 1000
    master_seed: int = 20240601
    truncation: int = DEFAULT_TRUNCATION
    tail_tol: Optional[float] = DEFAULT_TAIL_TOL
    output: Optional[str] = None
    workers: int = 1
    paired: bool = False
    replicate_offset: int = 0

    @property
    def l(self) -> int:
        return block_length(self.n, self.c)

    @property
    def past_length(self) -> int:
        return 2 * self.l if self.method == "h_hat" else 0

    def build_model(self) -> ModelSpec:
        return preset_model(self.model, self.beta, self.truncation, self.tail_tol)

    def validate(self) -> None:
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}; expected one of {MODEL_NAMES}")
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {METHODS}")
        if self.reps < 1:
            raise ConfigError("reps must be at least 1")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.l < 2:
            raise ConfigError(f"block size floor(c sqrt(n)) = {self.l} is below 2")
        if 2 * self.l > self.n:
            raise ConfigError(f"block size l={self.l} is too large for n={self.n}")
        if self.method == "subsampling":
            choose_scales(self.n, self.l)
        self.build_model()

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


@dataclass
class CoverageReport:
    config: ExperimentConfig
    lower_coverage: float
    upper_coverage: float
    two_sided_coverage: float
    mc_se_lower: float
    mc_se_upper: float
    wall_time: float
    degenerate_count: int
    mu: float
    # per replicate: 1 covered, 0 missed, -1 degenerate
    lower_hits: np.ndarray = field(repr=False)
    upper_hits: np.ndarray = field(repr=False)
    two_sided_hits: np.ndarray = field(repr=False)

    @property
    def successes(self) -> int:
        return self.config.reps - self.degenerate_count

    def row(self) -> dict:
        cfg = self.config
        return {
            "model": cfg.model, "beta": cfg.beta, "n": cfg.n, "c": cfg.c,
            "method": cfg.method, "alpha": cfg.alpha, "reps": cfg.reps,
            "lower_cov": self.lower_coverage, "upper_cov": self.upper_coverage,
            "mc_se_lower": self.mc_se_lower, "mc_se_upper": self.mc_se_upper,
            "degenerate": self.degenerate_count, "seed": cfg.master_seed,
            "wall_time_s": round(self.wall_time, 3),
        }

    @property
    def by_bound(self) -> tuple[float, float]:
        """Coverages ordered as ([L, inf), (-inf, U]), i.e. (upper_coverage, lower_coverage)."""
        return self.upper_coverage, self.lower_coverage

    def to_dict(self) -> dict:
        out = self.row()
        out.update(two_sided_cov=self.two_sided_coverage, by_bound=list(self.by_bound), mu=self.mu, l=self.config.l,
                   replicate_offset=self.config.replicate_offset)
        return out


def _intervals(y: SeriesWindow, cfg: ExperimentConfig, scales: Optional[SubsampleScales]):
    """(lower, upper, two-sided) intervals for one replicate."""
    if cfg.method == "h_hat":
        dist, _ = f_n_tilde(y, cfg.l, BACKWARD)
        scale = estimate_scales(y, cfg.l, BACKWARD).sigma_n_hat
    else:
        dist = f_l_star(y, scales)
        scale = subsample_scale(y, scales)
    ybar = observed_mean(y)
    return tuple(
        interval_from_quantiles(ybar, dist, scale, y.n, cfg.alpha, kind)
        for kind in ("lower_one_sided", "upper_one_sided", "two_sided")
    )


def _run_chunk(args):
    cfg, mu, indices = args
    model = cfg.build_model()
    scales = choose_scales(cfg.n, cfg.l) if cfg.method == "subsampling" else None
    out = np.empty((len(indices), 3), dtype=np.int8)
    for row, k in enumerate(indices):
        key = (k,) if cfg.paired else (_METHOD_KEY[cfg.method], k)
        y = simulate_window(model, cfg.n, cfg.past_length, cfg.master_seed, key)
        try:
            cis = _intervals(y, cfg, scales)
        except DegenerateScaleError:
            out[row] = -1
            continue
        out[row] = [int(ci.contains(mu)) for ci in cis]
    return out


def _coverage(hits: np.ndarray) -> tuple[float, float]:
    ok = hits[hits >= 0]
    if ok.size == 0:
        return math.nan, math.nan
    p = float(ok.mean())
    return p, math.sqrt(p * (1.0 - p) / ok.size)


def run_coverage(cfg: ExperimentConfig) -> CoverageReport:
    """Empirical coverage of the one-sided (and two-sided) intervals over ``cfg.reps`` replicates."""
    cfg.validate()
    start = time.perf_counter()
    model = cfg.build_model()
    mu = true_mean(model).value
    idx = np.arange(cfg.replicate_offset, cfg.replicate_offset + cfg.reps)
    if cfg.workers == 1:
        hits = _run_chunk((cfg, mu, idx))
    else:
        chunks = [c for c in np.array_split(idx, cfg.workers * 4) if c.size]
        with ProcessPoolExecutor(cfg.workers) as pool:
            hits = np.concatenate(list(pool.map(_run_chunk, [(cfg, mu, c) for c in chunks])))
    lower, se_lower = _coverage(hits[:, 0])
    upper, se_upper = _coverage(hits[:, 1])
    two, _ = _coverage(hits[:, 2])
    degenerate = int(np.count_nonzero(hits[:, 0] < 0))
    if degenerate:
        log.warning("%d of %d replicates had a zero scale estimate", degenerate, cfg.reps)
    return CoverageReport(
        cfg, lower, upper, two, se_lower, se_upper, time.perf_counter() - start,
        degenerate, mu, hits[:, 0].copy(), hits[:, 1].copy(), hits[:, 2].copy(),
    )


def sweep(configs: Sequence[ExperimentConfig], path=None) -> list[dict]:
    """One coverage row per config, in input order; failures are recorded in ``error``."""
    if not configs:
        raise ConfigError("sweep needs at least one configuration")
    rows = []
    for cfg in configs:
        try:
            row = run_coverage(cfg).row()
            row["error"] = ""
        except BlockSamplingError as exc:
            row = {k: "" for k in SWEEP_COLUMNS}
            row.update(model=cfg.model, beta=cfg.beta, n=cfg.n, c=cfg.c, method=cfg.method,
                       alpha=cfg.alpha, reps=cfg.reps, seed=cfg.master_seed)
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    if path is not None:
        write_rows(rows, path)
    return rows


def write_rows(rows: Sequence[dict], dest) -> None:
    """Write sweep rows as CSV to a path or an open text stream."""
    if hasattr(dest, "write"):
        _write_rows(rows, dest)
        return
    with open(dest, "w", newline="", encoding="utf-8") as fh:
        _write_rows(rows, fh)


def _write_rows(rows, fh) -> None:
    w = csv.DictWriter(fh, fieldnames=[*SWEEP_COLUMNS, "error"], extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})


# ---------------------------------------------------------------------------
# single-series workflow


@dataclass
class SingleResult:
    method: str
    n: int
    l: int
    alpha: float
    ybar: float
    intervals: dict
    dist: EmpiricalDist
    scales: Optional[ScaleEstimates] = None
    subsample: Optional[SubsampleScales] = None

    def to_dict(self) -> dict:
        out = {
            "method": self.method, "n": self.n, "l": self.l, "alpha": self.alpha,
            "ybar": self.ybar,
            "intervals": {k: ci.to_dict() for k, ci in self.intervals.items()},
        }
        if self.scales is not None:
            out["scales"] = asdict(self.scales)
        if self.subsample is not None:
            out["subsample"] = asdict(self.subsample)
        return out


def run_single(y, method: str, l: int, alpha: float = 0.1) -> SingleResult:
    """Intervals and diagnostics for one series.

    A :class:`SeriesWindow` with at least 2l - 1 past values uses backward
    windows; plain data uses forward windows over the observed values.
    """
    if method not in METHODS:
        raise ConfigError(f"unknown method {method!r}; expected one of {METHODS}")
    obs, past = split_series(y, None)
    n = obs.size
    if n < 4 * l:
        raise SeriesTooShortError(f"series of length {n} is too short for block size {l} (need n >= 4l)")
    kinds = ("two_sided", "lower_one_sided", "upper_one_sided")
    try:
        if method == "h_hat":
            conv = BACKWARD if past.size >= 2 * l - 1 else FORWARD
            est = estimate_scales(y, l, conv)
            dist, _ = f_n_tilde(y, l, conv)
            cis = {k: ci_mean(y, l, alpha, k, conv, est) for k in kinds}
            return SingleResult(method, n, l, alpha, observed_mean(y), cis, dist, scales=est)
        scales = choose_scales(n, l)
        dist = f_l_star(obs, scales)
        cis = {k: ci_mean_subsample(obs, scales, alpha, k) for k in kinds}
        return SingleResult(method, n, l, alpha, observed_mean(obs), cis, dist, subsample=scales)
    except DegenerateScaleError as exc:
        raise DegenerateScaleError(
            f"{exc}. A constant (or locally constant) series carries no information about "
            "the sampling variability of its mean; check the input data."
        ) from exc


def load_series(path) -> np.ndarray:
    """Read a numeric series: one value per line, or a CSV with a ``y`` column.

    When an ``index`` column is present (as written by ``simulate``), rows
    with index <= 0 belong to the past block and are dropped.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise ConfigError(f"{path}: no data")
    header = [c.strip().lower() for c in rows[0]]
    col, idx = 0, None
    try:
        float(rows[0][0])
    except ValueError:
        if "y" in header:
            col = header.index("y")
            idx = header.index("index") if "index" in header else None
        elif len(header) != 1:
            raise ConfigError(f"{path}: expected one column or a 'y' column")
        rows = rows[1:]
    try:
        if idx is not None:
            rows = [r for r in rows if int(r[idx]) >= 1]
        return np.array([float(r[col]) for r in rows])
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from exc


# ---------------------------------------------------------------------------
# config files

_FIELD_TYPES = {
    "model": str, "beta": float, "n": int, "c": float, "method": str, "alpha": float,
    "reps": int, "master_seed": int, "truncation": int, "tail_tol": float,
    "output": str, "workers": int, "paired": bool, "replicate_offset": int,
}
_ALIASES = {"seed": "master_seed", "out": "output"}


def _convert(key, raw: str):
    typ = _FIELD_TYPES[key]
    raw = raw.strip()
    if key == "tail_tol" and raw.lower() in ("none", "off"):
        return None
    if typ is bool:
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    try:
        return typ(float(raw)) if typ is int and "e" in raw.lower() else typ(raw)
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from exc


def config_from_mapping(mapping) -> ExperimentConfig:
    kwargs = {}
    for raw_key, raw in mapping.items():
        key = _ALIASES.get(raw_key.strip().lower().replace("-", "_"), raw_key.strip().lower().replace("-", "_"))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {raw_key!r}")
        kwargs[key] = _convert(key, raw) if isinstance(raw, str) else raw
    missing = {"model", "beta", "n"} - kwargs.keys()
    if missing:
        raise ConfigError(f"missing required keys: {sorted(missing)}")
    return ExperimentConfig(**kwargs)


def parse_config(text: str) -> list[ExperimentConfig]:
    """Parse INI-style text: one ``[section]`` per experiment, shared keys in ``[DEFAULT]``."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    return [config_from_mapping(dict(cp[name])) for name in cp.sections()]


def load_config(path) -> list[ExperimentConfig]:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
