"""ASE noise, GSNR aggregation, LOGON launch power and reach tables."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import bisect
from scipy.special import erfc

from . import cfm
from .cfm import CfmParams, Variant
from .units import (
    FORMATS,
    PLANCK,
    ChannelPlan,
    FiberSpan,
    LinkPath,
    ModulationFormat,
    db_to_linear,
    dbm_to_watt,
    linear_to_db,
    uniform_plan,
    watt_to_dbm,
)

BER_THRESHOLD = 3.8e-3
LOGON_GRID_DBM = np.round(np.arange(-500, 501) * 0.01, 2)


def ase_power(span: FiberSpan, f: float, ref_bandwidth: float) -> float:
    """h f NF (G - 1) B in W, with the transparency gain of ``span``."""
    g = span.gain
    if g <= 1:
        raise ValueError("amplifier gain must exceed 1")
    return PLANCK * f * db_to_linear(span.noise_figure) * (g - 1.0) * ref_bandwidth


@dataclass(frozen=True)
class GsnrReport:
    p_ch: float
    ase_total: float
    nli_total: float
    gsnr: float  # dB
    per_span_breakdown: tuple = field(default=(), repr=False)

    @property
    def gsnr_linear(self) -> float:
        return db_to_linear(self.gsnr)

    def as_dict(self) -> dict:
        return {
            "p_ch_W": self.p_ch,
            "p_ch_dBm": watt_to_dbm(self.p_ch),
            "ase_total_W": self.ase_total,
            "nli_total_W": self.nli_total,
            "gsnr_dB": self.gsnr,
            "per_span": [
                {"span": i, "ase_W": a, "nli_W": n} for i, (a, n) in enumerate(self.per_span_breakdown)
            ],
        }


def path_gsnr(
    variant: Variant | str,
    params: CfmParams,
    path: LinkPath,
    plan: ChannelPlan,
    nli: bool = True,
) -> GsnrReport:
    """GSNR of the CUT at the end of ``path`` (incoherent ASE + NLI accumulation)."""
    if path is None or not path.spans:
        raise ValueError("empty path")
    cut = plan.cut
    if cut.launch_power <= 0:
        raise ValueError("CUT launch power must be positive")
    ase = [ase_power(s, cut.center_frequency, cut.symbol_rate) for s in path.spans]
    if nli:
        _, parts = cfm.path_nli(variant, params, path, plan, breakdown=True)
        nlis = [p.total for p in parts]
    else:
        nlis = [0.0] * len(ase)
    a_tot, n_tot = math.fsum(ase), math.fsum(nlis)
    g = cut.launch_power / (a_tot + n_tot)
    return GsnrReport(cut.launch_power, a_tot, n_tot, linear_to_db(g), tuple(zip(ase, nlis)))


def gsnr_from_noise(p: float, ase: float, nli: float) -> float:
    return linear_to_db(p / (ase + nli))


# ------------------------------------------------------------------ LOGON


def span_eta(variant, params: CfmParams, span: FiberSpan, plan: ChannelPlan, spans_before=()) -> float:
    """Per-span NLI coefficient (W^-2) of the CUT at uniform unit power."""
    return cfm.span_nli(variant, params, span, plan.with_power(1.0), spans_before).total


def logon_closed_form(p_ase: float, eta: float) -> float:
    """Optimum power (W) of P / (P_ase + eta P^3)."""
    if not eta > 0:
        raise ValueError("NLI coefficient must be positive")
    return (p_ase / (2.0 * eta)) ** (1.0 / 3.0)


def logon_grid(p_ase: float, eta: float, grid_dbm: np.ndarray = LOGON_GRID_DBM) -> float:
    """Grid argmax (dBm) of the span SNR over ``grid_dbm``."""
    p = 1e-3 * 10.0 ** (grid_dbm / 10.0)
    snr = p / (p_ase + eta * p**3)
    return float(grid_dbm[int(np.argmax(snr))])


def logon_power(
    variant: Variant | str,
    params: CfmParams,
    span: FiberSpan,
    plan_template: ChannelPlan | None = None,
) -> float:
    """LOGON optimum launch power in dBm per channel for a fully loaded span."""
    plan = plan_template or uniform_plan()
    eta = span_eta(variant, params, span, plan)
    cut = plan.cut
    p_ase = ase_power(span, cut.center_frequency, cut.symbol_rate)
    return watt_to_dbm(logon_closed_form(p_ase, eta))


# -------------------------------------------------------------- thresholds


def ber_curve(fmt: ModulationFormat) -> Callable[[float], float]:
    """Nearest-neighbour Gray-coded BER(SNR) for the format's constellation."""
    pts = np.asarray(fmt.constellation, dtype=complex)
    pts = pts / np.sqrt(np.mean(np.abs(pts) ** 2))
    d = np.abs(pts[:, None] - pts[None, :])
    np.fill_diagonal(d, np.inf)
    d_min = d.min()
    n_nb = float(np.mean(np.sum(np.isclose(d, d_min, rtol=1e-9), axis=1)))
    bits = math.log2(len(pts))

    def ber(snr_lin: float) -> float:
        # Q(d_min / 2 / sigma), complex noise variance 1/snr
        return n_nb / bits * 0.5 * erfc(0.5 * d_min * math.sqrt(snr_lin))

    return ber


def ber_to_gsnr_threshold(fmt: ModulationFormat, ber: float = BER_THRESHOLD) -> float:
    """Required GSNR (dB) for a pre-FEC BER, by bisection on the monotone BER curve."""
    if not 0 < ber < 0.5:
        raise ValueError("BER must be in (0, 0.5)")
    curve = ber_curve(fmt)
    lo, hi = -20.0, 60.0
    f = lambda x: curve(db_to_linear(x)) - ber  # noqa: E731
    if f(lo) < 0:
        lo = -60.0
    if not (f(lo) > 0 > f(hi)):
        raise ValueError(f"BER {ber} not bracketed for {fmt.name}")
    return bisect(f, lo, hi, xtol=1e-10)


# ---------------------------------------------------------- span counting


def _span_list(span_template, n_max: int) -> list[FiberSpan]:
    if isinstance(span_template, FiberSpan):
        return [span_template] * n_max
    spans = list(span_template)
    if len(spans) < n_max:
        raise ValueError(f"need at least {n_max} spans, got {len(spans)}")
    return spans[:n_max]


class _PrefixGsnr:
    """GSNR of the first n spans with per-span noise computed lazily."""

    def __init__(self, variant, params, spans, plan, noise_fn=None):
        self.variant, self.params, self.spans, self.plan = variant, params, spans, plan
        cut = plan.cut
        self.p = cut.launch_power
        self.ase = [ase_power(s, cut.center_frequency, cut.symbol_rate) for s in spans]
        self.nli: list[float] = []
        self.noise_fn = noise_fn

    def _fill(self, n):
        while len(self.nli) < n:
            i = len(self.nli)
            if self.noise_fn is not None:
                self.nli.append(self.noise_fn(i))
            else:
                self.nli.append(
                    cfm.span_nli(self.variant, self.params, self.spans[i], self.plan, self.spans[:i]).total
                )

    def __call__(self, n: int) -> float:
        self._fill(n)
        return gsnr_from_noise(self.p, math.fsum(self.ase[:n]), math.fsum(self.nli[:n]))


def refine_span_count(
    variant,
    params: CfmParams,
    span_template,
    plan: ChannelPlan,
    mfl: int | ModulationFormat,
    threshold: float | None = None,
    n_max: int = 100,
    method: str = "bisect",
) -> int:
    """Largest n <= n_max with GSNR(n spans) >= threshold; 0 if one span already fails."""
    if threshold is None:
        fmt = mfl if isinstance(mfl, ModulationFormat) else FORMATS[mfl - 1]
        threshold = fmt.gsnr_threshold
    if threshold == -math.inf:
        return n_max
    if threshold == math.inf:
        return 0
    spans = _span_list(span_template, n_max)
    g = _PrefixGsnr(variant, params, spans, plan)
    if method == "linear":
        n = 0
        while n < n_max and g(n + 1) >= threshold:
            n += 1
        return n
    if g(1) < threshold:
        return 0
    lo, hi = 1, n_max  # GSNR(lo) passes
    if g(hi) >= threshold:
        return hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid) >= threshold:
            lo = mid
        else:
            hi = mid
    return lo


# ------------------------------------------------------------ reach table


@dataclass(frozen=True)
class ReachTable:
    variants: tuple[str, ...]
    max_spans: dict  # (variant, level) -> count
    logon_power: dict  # (variant, level) -> dBm

    def row(self, variant) -> list[int]:
        v = variant.value if isinstance(variant, Variant) else variant
        return [self.max_spans[(v, lvl)] for lvl in range(1, 7)]

    def header(self) -> list[str]:
        return (["variant"] + [f"mfl_{lvl}" for lvl in range(1, 7)]
                + [f"launch_power_dBm_mfl_{lvl}" for lvl in range(1, 7)])

    def csv_rows(self) -> list[list]:
        return [
            [v] + self.row(v) + [f"{self.logon_power[(v, lvl)]:.2f}" for lvl in range(1, 7)]
            for v in self.variants
        ]

    def to_csv(self, manifest=None) -> str:
        from .io import render_csv

        return render_csv(manifest, self.header(), self.csv_rows())

    @classmethod
    def from_csv(cls, text: str) -> ReachTable:
        from .io import read_csv

        _, rows = read_csv(text)
        variants, spans, power = [], {}, {}
        for r in rows:
            variants.append(r[0])
            for lvl in range(1, 7):
                spans[(r[0], lvl)] = int(r[lvl])
                power[(r[0], lvl)] = float(r[6 + lvl])
        return cls(tuple(variants), spans, power)

    def ordering_violations(self) -> list[str]:
        """Breaches of MDCT >= MCT2 >= WoMDCT1 per MFL and of monotone decrease across MFLs."""
        out = []
        chain = [v.value for v in (Variant.MDCT, Variant.MCT2, Variant.WoMDCT1) if v.value in self.variants]
        for hi, lo in zip(chain, chain[1:]):
            for lvl in range(1, 7):
                if self.max_spans[(hi, lvl)] < self.max_spans[(lo, lvl)]:
                    out.append(f"{hi} < {lo} at MFL {lvl}")
        for v in self.variants:
            r = self.row(v)
            for lvl in range(1, 6):
                if r[lvl] > r[lvl - 1]:
                    out.append(f"{v} increases from MFL {lvl} to {lvl + 1}")
        return out


def reach_table(
    variants: Sequence[Variant | str],
    params: CfmParams,
    span_80km_template: FiberSpan | None = None,
    plan: ChannelPlan | None = None,
    n_limit: int = 2000,
) -> ReachTable:
    """Max homogeneous span count per (variant, MFL) at the variant's LOGON power.

    The comb is fully loaded with the format under evaluation so that
    every interferer carries the same excess kurtosis as the CUT.
    """
    span = span_80km_template or FiberSpan(80e3)
    base = plan or uniform_plan()
    spans, power = {}, {}
    names = []
    for v in variants:
        v = Variant.parse(v) if isinstance(v, str) else v
        names.append(v.value)
        for fmt in FORMATS:
            p_plan = base.with_format(fmt)
            p_dbm = logon_power(v, params, span, p_plan)
            spans[(v.value, fmt.level)] = max_reach(v, params, span, p_plan.with_power(dbm_to_watt(p_dbm)),
                                                   fmt.gsnr_threshold, n_limit)
            power[(v.value, fmt.level)] = round(p_dbm, 2)
    return ReachTable(tuple(names), spans, power)


def max_reach(variant, params, span: FiberSpan, plan: ChannelPlan, threshold: float, n_limit: int = 2000) -> int:
    """Largest homogeneous span count meeting ``threshold`` (exponential + binary search)."""
    g = _PrefixGsnr(variant, params, [span] * n_limit, plan, noise_fn=_homog_nli(variant, params, span, plan))
    if g(1) < threshold:
        return 0
    lo, hi = 1, 2
    while hi <= n_limit and g(hi) >= threshold:
        lo, hi = hi, hi * 2
    hi = min(hi, n_limit + 1)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if g(mid) >= threshold:
            lo = mid
        else:
            hi = mid
    return lo


def _homog_nli(variant, params, span, plan):
    """Per-span NLI along a homogeneous path, indexed by span position."""
    fixed, decaying = cfm.decay_split(variant, params, span, plan)
    if not decaying:
        return lambda i: fixed
    r_cut = plan.cut.symbol_rate
    return lambda i: fixed + cfm.accumulated_dispersion_decay(params, [span] * i, r_cut) * decaying


__all__ = [
    "BER_THRESHOLD",
    "GsnrReport",
    "ReachTable",
    "ase_power",
    "ber_to_gsnr_threshold",
    "logon_closed_form",
    "logon_grid",
    "logon_power",
    "max_reach",
    "path_gsnr",
    "reach_table",
    "refine_span_count",
    "span_eta",
]
