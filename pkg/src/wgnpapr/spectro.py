"""Spectrogram per-bin PAPR and the thermal-noise band check.

For stationary complex WGN every spectrogram bin is exponentially
distributed over time, so the mean per-bin PAPR across T time bins is H_T
whatever the window.  A band whose mean PAPR departs from H_T holds
something other than noise.

Frames start at multiples of the hop with no edge padding, giving
``1 + (n - window_length) // hop`` time bins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal

from .estimator import UndefinedRatioError, confidence_halfwidth
from .iq_io import IqCapture
from .papr_math import mean_papr, to_db

CONSISTENT = "consistent_with_wgn"
INCONSISTENT = "inconsistent"


class CaptureTooShortError(ValueError):
    pass


class EmptyBandError(ValueError):
    pass


@dataclass(frozen=True)
class SpectrogramConfig:
    window: str = "hann"
    window_length: int = 512
    overlap_fraction: float = 0.5
    detrend: Literal["none", "constant"] = "constant"
    fft_length: int | None = None

    def __post_init__(self):
        if self.window_length < 8:
            raise ValueError("window_length must be >= 8")
        if not 0 <= self.overlap_fraction <= 0.95:
            raise ValueError("overlap_fraction must lie in [0, 0.95]")
        if self.detrend not in ("none", "constant"):
            raise ValueError("detrend must be 'none' or 'constant'")
        if self.fft_length is not None and self.fft_length < self.window_length:
            raise ValueError("fft_length must be >= window_length")
        if self.hop < 1:
            raise ValueError("overlap leaves a hop of zero samples")
        self.taper()  # reject unknown window names early

    @property
    def hop(self) -> int:
        return int(round(self.window_length * (1.0 - self.overlap_fraction)))

    @property
    def nfft(self) -> int:
        return self.fft_length or self.window_length

    def taper(self) -> np.ndarray:
        return signal.get_window(self.window, self.window_length, fftbins=True)

    def time_bins(self, n: int) -> int:
        if n < self.window_length:
            return 0
        return 1 + (n - self.window_length) // self.hop

    def to_dict(self) -> dict:
        return {
            "window": self.window,
            "window_length": self.window_length,
            "overlap_fraction": self.overlap_fraction,
            "detrend": self.detrend,
            "fft_length": self.nfft,
            "hop": self.hop,
        }


@dataclass
class Spectrogram:
    power: np.ndarray = field(repr=False)  # [freq_bins, time_bins]
    freq_axis: np.ndarray = field(repr=False)
    time_axis: np.ndarray = field(repr=False)
    config: SpectrogramConfig

    @property
    def freq_bins(self) -> int:
        return self.power.shape[0]

    @property
    def time_bins(self) -> int:
        return self.power.shape[1]


def compute_spectrogram(capture: IqCapture, cfg: SpectrogramConfig | None = None) -> Spectrogram:
    """Squared-magnitude STFT, FFT-shifted so the center frequency sits mid-axis."""
    cfg = cfg or SpectrogramConfig()
    x = np.asarray(capture.samples, dtype=np.complex128)
    if x.size < cfg.window_length:
        raise CaptureTooShortError(
            f"capture has {x.size} samples, fewer than one window ({cfg.window_length})")
    frames = sliding_window_view(x, cfg.window_length)[::cfg.hop]
    if cfg.detrend == "constant":
        frames = frames - frames.mean(axis=1, keepdims=True)
    spectra = np.fft.fft(frames * cfg.taper(), n=cfg.nfft, axis=1)
    power = np.fft.fftshift(spectra.real**2 + spectra.imag**2, axes=1).T
    fs = capture.sample_rate_hz
    freqs = capture.center_frequency_hz + np.fft.fftshift(np.fft.fftfreq(cfg.nfft, 1.0 / fs))
    times = (np.arange(power.shape[1]) * cfg.hop + cfg.window_length / 2.0) / fs
    return Spectrogram(power=np.ascontiguousarray(power), freq_axis=freqs,
                       time_axis=times, config=cfg)


def per_bin_papr_linear(s: Spectrogram) -> np.ndarray:
    if s.time_bins < 2:
        raise ValueError("per-bin PAPR needs at least two time bins")
    mean = s.power.mean(axis=1)
    if np.any(mean <= 0):
        raise UndefinedRatioError("a frequency bin has zero mean power")
    return s.power.max(axis=1) / mean


def per_bin_papr(s: Spectrogram) -> np.ndarray:
    """PAPR of each frequency bin over time, in dB."""
    return 10.0 * np.log10(per_bin_papr_linear(s))


@dataclass
class BandReport:
    """WGN check for one band.

    The band mean is the average of linear per-bin PAPRs converted to dB,
    so it estimates 10 log10(H_T) without the downward bias of averaging
    dB values; ``mean_of_db`` is that dB average, for reference.  The CI
    treats bins as independent.
    """

    f_low: float
    f_high: float
    bins: int
    time_bins: int
    papr_db: np.ndarray = field(repr=False)
    band_freqs: np.ndarray = field(repr=False)
    band_mean_papr_db: float
    band_ci_db: tuple[float, float]
    mean_of_db: float
    theory_db: float
    z_score: float
    verdict: str

    @property
    def excess_db(self) -> float:
        return self.band_mean_papr_db - self.theory_db

    @property
    def consistent(self) -> bool:
        return self.verdict == CONSISTENT


def verify_band(s: Spectrogram, f_low: float, f_high: float,
                confidence_level: float = 0.95) -> BandReport:
    if f_high < f_low:
        f_low, f_high = f_high, f_low
    mask = (s.freq_axis >= f_low) & (s.freq_axis <= f_high)
    k = int(mask.sum())
    if k < 2:
        raise EmptyBandError(
            f"band [{f_low:g}, {f_high:g}] Hz covers {k} frequency bins; need >= 2")
    lin = per_bin_papr_linear(s)[mask]
    mean_lin = float(lin.mean())
    half = confidence_halfwidth(lin, confidence_level)
    theory_lin = mean_papr(s.time_bins)
    se = float(np.std(lin, ddof=1)) / math.sqrt(k)
    low = mean_lin - half
    ci = (to_db(low) if low > 0 else -math.inf, to_db(mean_lin + half))
    theory_db = to_db(theory_lin)
    verdict = CONSISTENT if ci[0] <= theory_db <= ci[1] else INCONSISTENT
    db = 10.0 * np.log10(lin)
    return BandReport(
        f_low=f_low,
        f_high=f_high,
        bins=k,
        time_bins=s.time_bins,
        papr_db=db,
        band_freqs=s.freq_axis[mask],
        band_mean_papr_db=to_db(mean_lin),
        band_ci_db=ci,
        mean_of_db=float(db.mean()),
        theory_db=theory_db,
        z_score=(mean_lin - theory_lin) / se if se > 0 else math.inf,
        verdict=verdict,
    )
