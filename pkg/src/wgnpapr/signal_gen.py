"""Seeded WGN I/Q generation and the three impairment models.

Random streams: every buffer comes from a Philox generator keyed by a
``numpy.random.SeedSequence``.  ``WgnParams.seed`` is the entropy; the body
of a buffer uses the root stream and :func:`filter_trimmed` draws its edge
padding from child stream ``PADDING_STREAM``.  Monte Carlo trials derive
their seeds with :func:`trial_seed` so results do not depend on scheduling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

PADDING_STREAM = 1


@dataclass(frozen=True)
class WgnParams:
    """Per-component standard deviation ``sigma`` and 64-bit ``seed``.

    Derived quantities of the generated samples: power P = I^2 + Q^2 is
    exponential with mean 2 sigma^2 (rate 1/(2 sigma^2)); amplitude
    A = sqrt(P) is Rayleigh(sigma).
    """

    sigma: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")

    @property
    def mean_power(self) -> float:
        return 2.0 * self.sigma**2


@dataclass(frozen=True)
class IqBuffer:
    i: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        i = np.asarray(self.i, dtype=float)
        q = np.asarray(self.q, dtype=float)
        if i.shape != q.shape or i.ndim != 1:
            raise ValueError("I and Q must be 1-D arrays of equal length")
        if not (np.all(np.isfinite(i)) and np.all(np.isfinite(q))):
            raise ValueError("I/Q samples must be finite")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "q", q)

    def __len__(self) -> int:
        return self.i.size

    @property
    def power(self) -> np.ndarray:
        return self.i * self.i + self.q * self.q

    def to_complex(self) -> np.ndarray:
        return self.i + 1j * self.q

    @classmethod
    def from_complex(cls, z) -> "IqBuffer":
        z = np.asarray(z)
        return cls(z.real.astype(float), z.imag.astype(float))


@dataclass(frozen=True)
class ImbalanceParams:
    """Relative gain mismatch ``delta_g`` and phase mismatch ``delta_phi`` (degrees)."""

    delta_g: float
    delta_phi: float

    def __post_init__(self):
        if not 0 <= self.delta_g < 2:
            raise ValueError("delta_g must lie in [0, 2)")
        if not -90 < self.delta_phi < 90:
            raise ValueError("delta_phi must lie in (-90, 90) degrees")

    def matrix(self) -> np.ndarray:
        a = 1.0 - self.delta_g / 2.0
        b = 1.0 + self.delta_g / 2.0
        half = math.radians(self.delta_phi) / 2.0
        c, s = math.cos(half), math.sin(half)
        return np.array([[a * c, a * s], [b * s, b * c]])


@dataclass(frozen=True)
class QuantizerParams:
    bits: int
    reference_level: float

    def __post_init__(self):
        if int(self.bits) != self.bits or not 1 <= self.bits <= 24:
            raise ValueError("bits must be an integer in [1, 24]")
        if not self.reference_level > 0:
            raise ValueError("reference_level must be positive")

    @property
    def step(self) -> float:
        return 2.0 * self.reference_level / 2**self.bits


@dataclass(frozen=True)
class LowpassParams:
    """Request for a window-method low-pass FIR (see :func:`design_lowpass`)."""

    cutoff: float
    order: int = 40


ImpairmentSpec = Union[ImbalanceParams, QuantizerParams, LowpassParams]


@dataclass(frozen=True)
class FirLowPass:
    cutoff: float
    order: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        h = np.asarray(self.coefficients, dtype=float)
        if h.size != self.order + 1:
            raise ValueError("FIR needs order + 1 coefficients")
        object.__setattr__(self, "coefficients", h)

    def frequency_response(self, freqs) -> np.ndarray:
        """Complex response at normalized frequencies (cycles/sample)."""
        freqs = np.asarray(freqs, dtype=float)
        k = np.arange(self.order + 1)
        return np.exp(-2j * np.pi * np.outer(freqs, k)) @ self.coefficients


def identity_filter() -> FirLowPass:
    return FirLowPass(cutoff=0.5, order=0, coefficients=np.ones(1))


def _generator(seed: int, *stream: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=stream)
    return np.random.Generator(np.random.Philox(ss))


def trial_seed(master_seed: int, n: int, trial: int) -> int:
    """64-bit seed for one Monte Carlo trial, a pure function of its indices."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(n), int(trial)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _draw(n: int, sigma: float, rng: np.random.Generator) -> IqBuffer:
    iq = rng.standard_normal((2, n))
    if sigma != 1.0:
        iq *= sigma
    return IqBuffer(iq[0], iq[1])


def generate_wgn(n: int, p: WgnParams) -> IqBuffer:
    """``n`` complex samples with I and Q i.i.d. N(0, sigma^2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return _draw(n, p.sigma, _generator(p.seed))


def apply_imbalance(b: IqBuffer, imb: ImbalanceParams) -> IqBuffer:
    if imb.delta_g == 0 and imb.delta_phi == 0:
        return IqBuffer(b.i.copy(), b.q.copy())
    m = imb.matrix()
    return IqBuffer(m[0, 0] * b.i + m[0, 1] * b.q, m[1, 0] * b.i + m[1, 1] * b.q)


def quantize(x: np.ndarray, qp: QuantizerParams) -> np.ndarray:
    """Mid-tread uniform quantizer with two's-complement saturation.

    Levels are k * step for k in [-2^(bits-1), 2^(bits-1) - 1],
    step = 2 * reference_level / 2^bits.
    """
    half = 2 ** (qp.bits - 1)
    k = np.clip(np.rint(np.asarray(x, dtype=float) / qp.step), -half, half - 1)
    return k * qp.step


def apply_quantizer(b: IqBuffer, qp: QuantizerParams) -> IqBuffer:
    return IqBuffer(quantize(b.i, qp), quantize(b.q, qp))


def hamming(order: int) -> np.ndarray:
    """w[k] = 0.54 - 0.46 cos(2 pi k / order), k = 0..order.

    Evaluated about the centre tap so the window is exactly symmetric.
    """
    m = np.arange(order + 1) - order / 2.0
    return 0.54 + 0.46 * np.cos(2.0 * np.pi * m / order)


def design_lowpass(cutoff: float, order: int = 40) -> FirLowPass:
    """Hamming-windowed sinc low-pass with unit DC gain.

    ``cutoff`` is in cycles/sample (Nyquist = 0.5) and marks the half-gain
    (-6 dB) point.
    """
    if not 0 < cutoff < 0.5:
        raise ValueError("cutoff must lie in (0, 0.5) cycles/sample")
    if int(order) != order or order < 2 or order % 2:
        raise ValueError("order must be an even integer >= 2")
    order = int(order)
    m = np.arange(order + 1) - order / 2.0
    h = 2.0 * cutoff * np.sinc(2.0 * cutoff * m) * hamming(order)
    return FirLowPass(cutoff=cutoff, order=order, coefficients=h / h.sum())


def filter_trimmed(b: IqBuffer, f: FirLowPass, p: WgnParams) -> IqBuffer:
    """Filter I and Q with ``f`` free of start-up and tail transients.

    ``f.order`` extra WGN samples (drawn from the padding stream of ``p``)
    are attached to each end; only full-overlap outputs aligned with the
    original samples (group delay order/2) are returned.
    """
    n = len(b)
    order = f.order
    if order == 0:
        h0 = f.coefficients[0]
        return IqBuffer(h0 * b.i, h0 * b.q)
    pad = _draw(2 * order, p.sigma, _generator(p.seed, PADDING_STREAM))
    start = order // 2
    out = []
    for core, extra in ((b.i, pad.i), (b.q, pad.q)):
        x = np.concatenate([extra[:order], core, extra[order:]])
        y = np.convolve(x, f.coefficients, mode="valid")
        out.append(y[start:start + n])
    return IqBuffer(out[0], out[1])


def parse_impairment(text: str) -> ImpairmentSpec | None:
    """Parse ``none``, ``imbalance:dg,dphi``, ``quantize:bits,ref`` or ``lowpass:fc,order``."""
    text = text.strip().lower()
    if text in ("", "none"):
        return None
    kind, _, args = text.partition(":")
    try:
        values = [float(v) for v in args.split(",")] if args else []
        if kind == "imbalance" and len(values) == 2:
            return ImbalanceParams(values[0], values[1])
        if kind == "quantize" and len(values) == 2 and values[0].is_integer():
            return QuantizerParams(int(values[0]), values[1])
        if kind == "lowpass" and len(values) in (1, 2):
            order = values[1] if len(values) == 2 else 40.0
            if not order.is_integer():
                raise ValueError("order must be an integer")
            design_lowpass(values[0], int(order))
            return LowpassParams(values[0], int(order))
    except ValueError as exc:
        raise ValueError(f"bad impairment {text!r}: {exc}") from None
    raise ValueError(
        f"bad impairment {text!r}; expected none, imbalance:dg,dphi, "
        "quantize:bits,ref or lowpass:fc,order"
    )


def format_impairment(spec: ImpairmentSpec | None) -> str:
    if spec is None:
        return "none"
    if isinstance(spec, ImbalanceParams):
        return f"imbalance:{spec.delta_g:g},{spec.delta_phi:g}"
    if isinstance(spec, QuantizerParams):
        return f"quantize:{spec.bits},{spec.reference_level:g}"
    return f"lowpass:{spec.cutoff:g},{spec.order}"


def impaired_trial(n: int, seed: int, impairment: ImpairmentSpec | None,
                   fir: FirLowPass | None = None, sigma: float = 1.0) -> IqBuffer:
    """One Monte Carlo realization: WGN of length ``n`` passed through ``impairment``."""
    p = WgnParams(sigma=sigma, seed=seed)
    b = generate_wgn(n, p)
    if impairment is None:
        return b
    if isinstance(impairment, ImbalanceParams):
        return apply_imbalance(b, impairment)
    if isinstance(impairment, QuantizerParams):
        return apply_quantizer(b, impairment)
    if fir is None:
        fir = design_lowpass(impairment.cutoff, impairment.order)
    return filter_trimmed(b, fir, p)
