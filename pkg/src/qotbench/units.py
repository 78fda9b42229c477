"""Unit conversions and the fiber/channel data model shared by every module."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

PLANCK = 6.62607015e-34  # J s
DB_PER_NEPER = 10.0 * math.log10(math.e)  # 4.342944...

SLICE_WIDTH = 12.5e9
SLOT_SLICES = 6
SLOT_WIDTH = SLOT_SLICES * SLICE_WIDTH  # 75 GHz
SYMBOL_RATE = 64e9
CBAND_START = 191.61e12
CBAND_CHANNELS = 60


def db_to_linear(x: float) -> float:
    return 10.0 ** (x / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


def dbm_to_watt(p_dbm: float) -> float:
    return 1e-3 * 10.0 ** (p_dbm / 10.0)


def watt_to_dbm(p_w: float) -> float:
    return 10.0 * math.log10(p_w / 1e-3)


def attenuation_to_alpha_p(att_db_km: float) -> float:
    """Power attenuation coefficient in Np/m from a dB/km loss figure."""
    if not att_db_km > 0:
        raise ValueError(f"attenuation must be positive, got {att_db_km}")
    return att_db_km / DB_PER_NEPER / 1000.0


def alpha_p_to_attenuation(alpha_p: float) -> float:
    return alpha_p * 1000.0 * DB_PER_NEPER


@dataclass(frozen=True)
class FiberSpan:
    """One amplified fiber span; SI units except the dB-valued fields."""

    length: float  # m
    attenuation: float = 0.21  # dB/km
    beta2: float = -21.45e-27  # s^2/m
    gamma: float = 1.31e-3  # 1/(W m)
    noise_figure: float = 6.0  # dB
    span_index_in_link: int = 0

    def __post_init__(self):
        if not self.length > 0:
            raise ValueError(f"span length must be positive, got {self.length}")
        if not self.attenuation > 0:
            raise ValueError(f"attenuation must be positive, got {self.attenuation}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.noise_figure < 0:
            raise ValueError(f"noise figure must be >= 0, got {self.noise_figure}")

    @property
    def alpha_p(self) -> float:
        return attenuation_to_alpha_p(self.attenuation)

    @property
    def gain_db(self) -> float:
        # transparency: the amplifier restores exactly the span loss
        return self.attenuation * self.length / 1000.0

    @property
    def gain(self) -> float:
        return math.exp(self.alpha_p * self.length)


def effective_lengths(span: FiberSpan) -> tuple[float, float]:
    """Return ``(l_eff, l_eff_a)`` in meters."""
    a = span.alpha_p
    return -math.expm1(-a * span.length) / a, 1.0 / a


def excess_kurtosis(constellation) -> float:
    """E|a|^4 / E[|a|^2]^2 - 2 over an equiprobable point set."""
    pts = np.asarray(constellation, dtype=complex).ravel()
    if pts.size == 0:
        raise ValueError("empty constellation")
    p2 = np.mean(np.abs(pts) ** 2)
    if p2 == 0:
        raise ValueError("constellation has zero mean power")
    return float(np.mean(np.abs(pts) ** 4) / p2**2 - 2.0)


def _square_qam(m: int) -> np.ndarray:
    a = np.arange(-(m - 1), m, 2, dtype=float)
    return (a[:, None] + 1j * a[None, :]).ravel()


def _cross_32qam() -> np.ndarray:
    pts = _square_qam(6)
    return pts[~((np.abs(pts.real) == 5) & (np.abs(pts.imag) == 5))]


def _star_8qam() -> np.ndarray:
    r = 1.0 + math.sqrt(3.0)
    return np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j, r, -r, 1j * r, -1j * r])


def _normalize(pts: np.ndarray) -> tuple[complex, ...]:
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    return tuple(complex(p) for p in pts)


@dataclass(frozen=True)
class ModulationFormat:
    level: int
    name: str
    bits_per_symbol: int
    gsnr_threshold: float  # dB, operative value at BER 3.8e-3
    rate_per_carrier: float  # Gb/s
    constellation: tuple[complex, ...] = field(repr=False)
    excess_kurtosis: float = float("nan")

    def __post_init__(self):
        if math.isnan(self.excess_kurtosis):
            object.__setattr__(self, "excess_kurtosis", excess_kurtosis(self.constellation))


_FORMAT_TABLE = [
    # level, name, bits, threshold dB, Gb/s per carrier, points
    (1, "PM-BPSK", 1, 5.52, 92.0, np.array([1.0 + 0j, -1.0 + 0j])),
    (2, "PM-QPSK", 2, 8.53, 184.0, _square_qam(2)),
    (3, "PM-8QAM", 3, 12.51, 276.0, _star_8qam()),
    (4, "PM-16QAM", 4, 15.19, 368.0, _square_qam(4)),
    (5, "PM-32QAM", 5, 18.19, 460.0, _cross_32qam()),
    (6, "PM-64QAM", 6, 21.12, 552.0, _square_qam(8)),
]

FORMATS: tuple[ModulationFormat, ...] = tuple(
    ModulationFormat(lvl, name, bits, thr, rate, _normalize(pts))
    for lvl, name, bits, thr, rate, pts in _FORMAT_TABLE
)


def get_format(level: int) -> ModulationFormat:
    if not 1 <= level <= len(FORMATS):
        raise ValueError(f"modulation level must be in 1..6, got {level}")
    return FORMATS[level - 1]


def gaussian_format(base: ModulationFormat | None = None) -> ModulationFormat:
    """A copy of ``base`` carrying a circular-Gaussian (zero excess kurtosis) signal."""
    base = base or FORMATS[3]
    return ModulationFormat(
        base.level, base.name + "/gauss", base.bits_per_symbol, base.gsnr_threshold,
        base.rate_per_carrier, base.constellation, excess_kurtosis=0.0,
    )


@dataclass(frozen=True)
class Channel:
    center_frequency: float  # Hz
    launch_power: float  # W
    format: ModulationFormat
    busy: bool = True
    symbol_rate: float = SYMBOL_RATE  # baud
    slot_width: float = SLOT_WIDTH  # Hz


@dataclass(frozen=True)
class ChannelPlan:
    channels: tuple[Channel, ...]
    cut_index: int

    def __post_init__(self):
        chs = self.channels
        if not chs:
            raise ValueError("empty channel plan")
        for a, b in zip(chs, chs[1:]):
            if b.center_frequency <= a.center_frequency:
                raise ValueError("channels must be sorted by center frequency")
            if b.center_frequency - a.center_frequency < 0.5 * (a.slot_width + b.slot_width) - 1.0:
                raise ValueError("channel slots overlap")
        if not 0 <= self.cut_index < len(chs):
            raise ValueError(f"cut_index {self.cut_index} out of range")
        if not chs[self.cut_index].busy:
            raise ValueError("the channel under test must be busy")

    @property
    def cut(self) -> Channel:
        return self.channels[self.cut_index]

    @property
    def n_busy(self) -> int:
        return sum(c.busy for c in self.channels)

    @cached_property
    def arrays(self) -> dict[str, np.ndarray]:
        chs = self.channels
        return {
            "freq": np.array([c.center_frequency for c in chs]),
            "rate": np.array([c.symbol_rate for c in chs]),
            "power": np.array([c.launch_power for c in chs]),
            "phi": np.array([c.format.excess_kurtosis for c in chs]),
            "busy": np.array([c.busy for c in chs], dtype=bool),
        }

    def with_power(self, power_w: float) -> ChannelPlan:
        """Same plan with a uniform per-channel launch power."""
        chs = tuple(_replace(c, launch_power=power_w) for c in self.channels)
        return ChannelPlan(chs, self.cut_index)

    def scaled(self, c: float) -> ChannelPlan:
        chs = tuple(_replace(ch, launch_power=ch.launch_power * c) for ch in self.channels)
        return ChannelPlan(chs, self.cut_index)

    def with_format(self, fmt: ModulationFormat) -> ChannelPlan:
        chs = tuple(_replace(c, format=fmt) for c in self.channels)
        return ChannelPlan(chs, self.cut_index)


def _replace(obj, **kw):
    from dataclasses import replace

    return replace(obj, **kw)


def cband_grid(n_channels: int = CBAND_CHANNELS, start: float = CBAND_START) -> np.ndarray:
    return start + SLOT_WIDTH * np.arange(n_channels)


def uniform_plan(
    n_channels: int = CBAND_CHANNELS,
    power_w: float = 1e-3,
    fmt: ModulationFormat | None = None,
    busy: Sequence[bool] | None = None,
    cut_index: int | None = None,
) -> ChannelPlan:
    """Grid plan with equal power and format; the CUT defaults to the center channel."""
    fmt = fmt or FORMATS[3]
    busy = [True] * n_channels if busy is None else list(busy)
    freqs = cband_grid(n_channels)
    chs = tuple(Channel(float(f), power_w, fmt, bool(b)) for f, b in zip(freqs, busy))
    if cut_index is None:
        cut_index = (n_channels - 1) // 2
    return ChannelPlan(chs, cut_index)


def build_cband_plan(
    n_busy: int,
    rng: np.random.Generator,
    power_w: float = 1e-3,
    fmt: ModulationFormat | None = None,
    n_channels: int = CBAND_CHANNELS,
) -> ChannelPlan:
    """Random partial load: ``n_busy`` slots lit uniformly at random, CUT drawn among them."""
    if not 1 <= n_busy <= n_channels:
        raise ValueError(f"n_busy must be in 1..{n_channels}, got {n_busy}")
    lit = rng.choice(n_channels, size=n_busy, replace=False)
    busy = np.zeros(n_channels, dtype=bool)
    busy[lit] = True
    cut = int(rng.choice(np.sort(lit)))
    return uniform_plan(n_channels, power_w, fmt, busy, cut)


@dataclass(frozen=True)
class LinkPath:
    """Ordered spans of a lightpath; ``links`` groups span ordinals by link."""

    spans: tuple[FiberSpan, ...]
    links: tuple[int, ...] = ()

    def __post_init__(self):
        if not self.spans:
            raise ValueError("a path needs at least one span")
        if not self.links:
            object.__setattr__(self, "links", (0,) * len(self.spans))

    @property
    def total_length(self) -> float:
        return sum(s.length for s in self.spans)

    @property
    def n_spans(self) -> int:
        return len(self.spans)

    @classmethod
    def homogeneous(cls, span: FiberSpan, n: int) -> LinkPath:
        return cls(tuple(span for _ in range(n)))
