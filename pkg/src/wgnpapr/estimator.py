"""Empirical PAPR estimation, Monte Carlo experiments and KDE of PAPR in dB."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .papr_math import mean_papr, papr_pdf_db, to_db
from .signal_gen import (
    FirLowPass,
    ImpairmentSpec,
    IqBuffer,
    LowpassParams,
    design_lowpass,
    format_impairment,
    impaired_trial,
    trial_seed,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "WGNPAPR_THREADS"
KDE_GRID_POINTS = 512
# trials per work unit handed to the thread pool
_CHUNK = 256


class UndefinedRatioError(ValueError):
    """Mean power is zero, so the peak-to-average ratio does not exist."""


class BandwidthError(ValueError):
    """Samples have no spread, so Scott's rule gives a zero bandwidth."""


@dataclass(frozen=True)
class PaprEstimate:
    papr_linear: float

    @property
    def papr_db(self) -> float:
        return to_db(self.papr_linear)

    @property
    def cf(self) -> float:
        return math.sqrt(self.papr_linear)


def estimate_papr(b: IqBuffer, reference_power: float | None = None) -> PaprEstimate:
    """Peak power over mean power of a buffer.

    The block's own sample mean is the denominator unless
    ``reference_power`` (the known E[P], e.g. 2 sigma^2) is supplied.
    """
    if len(b) < 1:
        raise UndefinedRatioError("empty buffer")
    p = b.power
    peak = float(p.max())
    mean = float(p.mean()) if reference_power is None else float(reference_power)
    if not mean > 0:
        raise UndefinedRatioError("mean power is zero")
    ratio = peak / mean
    if reference_power is None:
        # the sample maximum never falls below the sample mean
        ratio = max(ratio, 1.0)
    return PaprEstimate(ratio)


def default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def confidence_halfwidth(values: np.ndarray, level: float = 0.95) -> float:
    """Normal-approximation half width s * z / sqrt(m); Student t below 30 values."""
    m = values.size
    if m < 2:
        raise ValueError("need at least two values for a confidence interval")
    s = float(np.std(values, ddof=1))
    tail = 0.5 + level / 2.0
    crit = stats.t.ppf(tail, m - 1) if m < 30 else stats.norm.ppf(tail)
    return float(crit * s / math.sqrt(m))


@dataclass(frozen=True)
class MonteCarloConfig:
    sample_sizes: tuple[int, ...]
    trials: int
    impairment: ImpairmentSpec | None = None
    master_seed: int = 0
    confidence_level: float = 0.95

    def __post_init__(self):
        sizes = tuple(int(n) for n in self.sample_sizes)
        if not sizes or min(sizes) < 2:
            raise ValueError("sample_sizes must be nonempty with every n >= 2")
        if self.trials < 2:
            raise ValueError("trials must be >= 2")
        if not 0 < self.confidence_level < 1:
            raise ValueError("confidence_level must lie in (0, 1)")
        object.__setattr__(self, "sample_sizes", sizes)

    def to_dict(self) -> dict:
        return {
            "sample_sizes": list(self.sample_sizes),
            "trials": self.trials,
            "impairment": format_impairment(self.impairment),
            "master_seed": self.master_seed,
            "confidence_level": self.confidence_level,
        }


@dataclass
class SizeResult:
    """Monte Carlo summary for one sample size.

    ``mean_papr_db`` and its interval come from the linear-scale trial mean
    (the scale on which E[PAPR] = H_n holds), converted to dB.  The
    average of per-trial dB values is reported separately as
    ``mean_of_db`` with its own interval.
    """

    n: int
    trials: int
    mean_papr_db: float
    ci_low_db: float
    ci_high_db: float
    mean_of_db: float
    mean_of_db_ci: tuple[float, float]
    theory_papr_db: float
    trial_paprs_db: np.ndarray = field(repr=False)


@dataclass
class MonteCarloResult:
    config: MonteCarloConfig
    sizes: list[SizeResult]

    def __getitem__(self, n: int) -> SizeResult:
        for r in self.sizes:
            if r.n == n:
                return r
        raise KeyError(n)


def summarize(n: int, trial_paprs_linear: np.ndarray, level: float = 0.95) -> SizeResult:
    lin = np.asarray(trial_paprs_linear, dtype=float)
    db = 10.0 * np.log10(lin)
    mean_lin = float(lin.mean())
    half_lin = confidence_halfwidth(lin, level)
    mean_db = float(db.mean())
    half_db = confidence_halfwidth(db, level)
    low = mean_lin - half_lin
    return SizeResult(
        n=n,
        trials=lin.size,
        mean_papr_db=to_db(mean_lin),
        ci_low_db=to_db(low) if low > 0 else -math.inf,
        ci_high_db=to_db(mean_lin + half_lin),
        mean_of_db=mean_db,
        mean_of_db_ci=(mean_db - half_db, mean_db + half_db),
        theory_papr_db=to_db(mean_papr(n)),
        trial_paprs_db=db,
    )


def _trial_block(n: int, trials: range, master_seed: int, impairment, fir) -> np.ndarray:
    out = np.empty(len(trials))
    for j, t in enumerate(trials):
        b = impaired_trial(n, trial_seed(master_seed, n, t), impairment, fir)
        out[j] = estimate_papr(b).papr_linear
    return out


def simulate_paprs(n: int, trials: int, impairment: ImpairmentSpec | None = None,
                   master_seed: int = 0, threads: int | None = None) -> np.ndarray:
    """Linear PAPR of each trial, in trial order.

    Trial t uses seed ``trial_seed(master_seed, n, t)``, so the output is
    identical for any thread count.
    """
    fir: FirLowPass | None = None
    if isinstance(impairment, LowpassParams):
        fir = design_lowpass(impairment.cutoff, impairment.order)
    threads = threads or default_threads()
    blocks = [range(s, min(s + _CHUNK, trials)) for s in range(0, trials, _CHUNK)]
    if threads == 1 or len(blocks) == 1:
        parts = [_trial_block(n, blk, master_seed, impairment, fir) for blk in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda blk: _trial_block(n, blk, master_seed, impairment, fir), blocks))
    return np.concatenate(parts)


def run_monte_carlo(cfg: MonteCarloConfig, threads: int | None = None) -> MonteCarloResult:
    sizes = []
    for n in cfg.sample_sizes:
        logger.info("simulating n=%d, %d trials, impairment=%s",
                    n, cfg.trials, format_impairment(cfg.impairment))
        lin = simulate_paprs(n, cfg.trials, cfg.impairment, cfg.master_seed, threads)
        sizes.append(summarize(n, lin, cfg.confidence_level))
    return MonteCarloResult(cfg, sizes)


@dataclass
class KdeCurve:
    grid: np.ndarray
    density: np.ndarray
    bandwidth: float

    def integral(self) -> float:
        return float(np.trapezoid(self.density, self.grid))


def scott_bandwidth(samples: np.ndarray) -> float:
    samples = np.asarray(samples, dtype=float)
    m = samples.size
    if m < 2:
        raise BandwidthError("need at least two samples")
    spread = float(np.std(samples, ddof=1))
    if not spread > 0:
        raise BandwidthError("samples have zero spread")
    return spread * m ** (-0.2)


def kde_grid(samples: np.ndarray, bandwidth: float, points: int = KDE_GRID_POINTS) -> np.ndarray:
    return np.linspace(samples.min() - 3 * bandwidth, samples.max() + 3 * bandwidth, points)


def kde_pdf_db(samples_db, grid=None) -> KdeCurve:
    """Gaussian KDE with Scott's-rule bandwidth, evaluated on ``grid``."""
    samples = np.asarray(samples_db, dtype=float).ravel()
    bw = scott_bandwidth(samples)
    grid = kde_grid(samples, bw) if grid is None else np.asarray(grid, dtype=float)
    density = np.zeros(grid.size)
    norm = 1.0 / (samples.size * bw * math.sqrt(2 * math.pi))
    # chunk the samples to bound the (grid x samples) temporary
    for start in range(0, samples.size, 4096):
        z = (grid[:, None] - samples[None, start:start + 4096]) / bw
        density += np.exp(-0.5 * z * z).sum(axis=1)
    return KdeCurve(grid=grid, density=density * norm, bandwidth=bw)


def kde_with_theory(result: SizeResult) -> dict:
    """KDE of a size's trial PAPRs next to the exact dB density."""
    curve = kde_pdf_db(result.trial_paprs_db)
    return {
        "n": result.n,
        "bandwidth_db": curve.bandwidth,
        "grid_db": curve.grid,
        "density": curve.density,
        "theory_density": np.asarray(papr_pdf_db(curve.grid, result.n)),
    }
