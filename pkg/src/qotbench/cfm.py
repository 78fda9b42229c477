"""Incoherent closed-form NLI models.

Five variants share one building-block set:

* ``WoMDCT1``  asinh self/cross kernels, Gaussian signals
* ``WoMDCT2``  asinh self kernel, atan cross kernel, Gaussian signals
* ``MCT1``     WoMDCT1 plus a kurtosis correction for each interferer
* ``MCT2``     WoMDCT2 plus the same interferer correction
* ``MDCT``     MCT1 plus a CUT self-correction weighted by the
  accumulated-dispersion decay of the span position

Every function here is pure; the per-span NLI of a path is summed
incoherently.
"""

from __future__ import annotations

import enum
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np

from .units import ChannelPlan, FiberSpan, LinkPath, effective_lengths


class Variant(str, enum.Enum):
    WoMDCT1 = "WoMDCT1"
    WoMDCT2 = "WoMDCT2"
    MCT1 = "MCT1"
    MCT2 = "MCT2"
    MDCT = "MDCT"

    @classmethod
    def parse(cls, name: str) -> Variant:
        key = name.replace("-", "").replace("_", "").upper()
        for v in cls:
            if v.value.upper() == key:
                return v
        raise ValueError(f"unknown CFM variant {name!r}")

    @property
    def atan_backbone(self) -> bool:
        return self in (Variant.WoMDCT2, Variant.MCT2)

    @property
    def corrected(self) -> bool:
        return self in (Variant.MCT1, Variant.MCT2, Variant.MDCT)


@dataclass(frozen=True)
class CfmParams:
    cross_multiplicity: float = 1.0
    atan_coefficient: float = 64 / 27
    kurtosis_coefficient: float = 80 / 81
    self_kurtosis_coefficient: float = 0.8
    dispersion_decay_coefficient: float = 0.003
    version: str = field(default="2", compare=False)

    def __post_init__(self):
        for name, value in asdict(self).items():
            if name == "version":
                continue
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"CFM constant {name} must be finite and positive, got {value}")

    @classmethod
    def load(cls, path: str | Path | None = None) -> CfmParams:
        data = json.loads(constants_text(path))
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)


def constants_text(path: str | Path | None = None) -> str:
    if path is None:
        return resources.files("qotbench").joinpath("data/cfm_constants.json").read_text()
    return Path(path).read_text()


def constants_hash(path: str | Path | None = None) -> str:
    return hashlib.sha256(constants_text(path).encode()).hexdigest()[:16]


DEFAULT_PARAMS = CfmParams.load()


@dataclass(frozen=True)
class NliBreakdown:
    sci: float
    xpm_per_interferer: tuple[tuple[int, float], ...]
    correction: float
    total: float

    @property
    def xpm(self) -> float:
        return math.fsum(w for _, w in self.xpm_per_interferer)


def _kernel_scale(span: FiberSpan) -> float:
    """pi^2 |beta2| l_eff_a, the common factor inside the asinh kernels."""
    if span.beta2 == 0:
        raise ValueError("zero dispersion is outside the closed-form validity range")
    _, l_eff_a = effective_lengths(span)
    return math.pi**2 * abs(span.beta2) * l_eff_a


def psi_self(span: FiberSpan, cut_rate: float) -> float:
    return math.asinh(0.5 * _kernel_scale(span) * cut_rate**2)


def psi_cross(span: FiberSpan, cut_rate, interferer_rate, df):
    """Cross-channel asinh kernel; broadcasts over interferer arrays."""
    df = np.abs(np.asarray(df, dtype=float))
    r_int = np.asarray(interferer_rate, dtype=float)
    if np.any(df < 0.5 * (cut_rate + r_int) * (1 - 1e-12)):
        raise ValueError("interfering channel overlaps the channel under test")
    k = _kernel_scale(span) * cut_rate
    out = np.arcsinh(k * (df + 0.5 * r_int)) - np.arcsinh(k * (df - 0.5 * r_int))
    return float(out) if out.ndim == 0 else out


def _atan_factor(span: FiberSpan, df, rate_in_atan, rate_k):
    """gamma^2 (1-e^{-aL})^2 / (R_k a phi) * atan(phi R / (2a)); unit-power XPM shape."""
    a = span.alpha_p
    phi = 4 * math.pi**2 * abs(span.beta2) * np.abs(df)
    loss = (-math.expm1(-a * span.length)) ** 2
    return span.gamma**2 * loss / (rate_k * a * phi) * np.arctan(phi * rate_in_atan / (2 * a))


def accumulated_dispersion_decay(params: CfmParams, spans_before: Sequence[FiberSpan], cut_rate: float) -> float:
    l_acc = math.fsum(s.length for s in spans_before)
    if l_acc == 0:
        return 1.0
    beta2 = abs(spans_before[-1].beta2)
    return 1.0 / (1.0 + params.dispersion_decay_coefficient * beta2 * cut_rate**2 * l_acc)


def _terms(variant: Variant, params: CfmParams, span: FiberSpan, plan: ChannelPlan):
    """sci, per-interferer xpm (with indices), interferer correction, CUT self correction at rho = 1."""
    arr = plan.arrays
    if np.any(arr["power"] < 0):
        raise ValueError("negative launch power")
    cut = plan.cut_index
    r_cut = arr["rate"][cut]
    p_cut = arr["power"][cut]

    l_eff, l_eff_a = effective_lengths(span)
    b2 = abs(span.beta2)
    pref = (8 / 27) * span.gamma**2 * l_eff**2 / (math.pi * b2 * l_eff_a)

    sci = pref * psi_self(span, r_cut) / r_cut**2 * p_cut**3

    idx = np.flatnonzero(arr["busy"])
    idx = idx[idx != cut]
    df = arr["freq"][idx] - arr["freq"][cut]
    r_k = arr["rate"][idx]
    p_k = arr["power"][idx]
    load = p_cut * p_k**2

    if variant.atan_backbone:
        xpm = params.atan_coefficient * _atan_factor(span, df, r_cut, r_k) * load
    else:
        xpm = params.cross_multiplicity * pref * psi_cross(span, r_cut, r_k, df) / r_k**2 * load
    xpm = np.atleast_1d(xpm)

    corr_int = corr_self = 0.0
    if variant.corrected:
        corr_k = arr["phi"][idx] * params.kurtosis_coefficient * _atan_factor(span, df, r_k, r_k) * load
        corr_int = math.fsum(np.atleast_1d(corr_k))
        if variant is Variant.MDCT:
            corr_self = arr["phi"][cut] * params.self_kurtosis_coefficient * sci
    return float(sci), idx, xpm, corr_int, float(corr_self)


def span_nli(
    variant: Variant | str,
    params: CfmParams,
    span: FiberSpan,
    plan: ChannelPlan,
    spans_before: Sequence[FiberSpan] = (),
) -> NliBreakdown:
    """NLI power (W) falling on the CUT after one span.

    ``spans_before`` only matters for MDCT, whose CUT self-correction is
    weighted by the accumulated-dispersion decay of the span position.
    """
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    sci, idx, xpm, corr_int, corr_self = _terms(variant, params, span, plan)
    correction = corr_int
    if corr_self:
        rho = accumulated_dispersion_decay(params, spans_before, plan.cut.symbol_rate)
        correction += rho * corr_self
    xpm_list = tuple((int(i), float(w)) for i, w in zip(idx, xpm))
    total = sci + math.fsum(xpm) + correction
    return NliBreakdown(sci, xpm_list, float(correction), float(total))


def decay_split(variant: Variant | str, params: CfmParams, span: FiberSpan, plan: ChannelPlan) -> tuple[float, float]:
    """``(fixed, decaying)`` with span NLI = fixed + rho(position) * decaying."""
    variant = Variant.parse(variant) if isinstance(variant, str) else variant
    sci, _, xpm, corr_int, corr_self = _terms(variant, params, span, plan)
    return sci + math.fsum(xpm) + corr_int, corr_self


def path_nli(
    variant: Variant | str,
    params: CfmParams,
    path: LinkPath,
    plan: ChannelPlan,
    breakdown: bool = False,
):
    """Incoherent sum of per-span NLI along ``path`` (W)."""
    if not path.spans:
        raise ValueError("empty path")
    parts = [span_nli(variant, params, s, plan, path.spans[:i]) for i, s in enumerate(path.spans)]
    total = math.fsum(p.total for p in parts)
    return (total, parts) if breakdown else total
