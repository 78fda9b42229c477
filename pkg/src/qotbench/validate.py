"""Oracle-equivalence and property checks with per-check margins.

Each check returns a :class:`CheckResult`; ``margin`` is how far inside
(positive) or outside (negative) its tolerance the worst case landed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import cfm
from .cfm import CfmParams, Variant
from .gsnr import (
    BER_THRESHOLD,
    LOGON_GRID_DBM,
    ase_power,
    ber_to_gsnr_threshold,
    logon_closed_form,
    logon_grid,
    reach_table,
    span_eta,
)
from .oracle import QuadratureSpec, span_nli_quadrature
from .rng import substream
from .units import FORMATS, FiberSpan, gaussian_format, linear_to_db, uniform_plan, watt_to_dbm

ORACLE_TOLERANCE_DB = 0.5
SCI_TOLERANCE_DB = 0.3
# (level, published threshold dB, allowed deviation dB)
THRESHOLD_TARGETS = (
    (1, 5.52, 0.4), (2, 8.53, 0.05), (3, 12.51, 0.4),
    (4, 15.19, 0.1), (5, 18.19, 0.4), (6, 21.12, 0.1),
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag} {self.name:<22} margin={self.margin:+.4g} {self.detail}"


def _result(name, worst, tol, detail=""):
    margin = tol - worst
    return CheckResult(name, bool(worst <= tol) and tol > 0, float(margin), detail)


def oracle_combs(n: int = 25, seed: int = 2022):
    """Deterministic suite of (span, plan) pairs with 1..15 channels and 50..120 km spans.

    The first comb is a single channel so the SCI-only case is always covered.
    """
    out = []
    for i in range(n):
        rng = substream(seed, "misc", i)
        n_ch = 1 if i == 0 else int(rng.integers(1, 16))
        km = float(np.round(rng.uniform(50.0, 120.0), 3))
        busy = rng.random(n_ch) < 0.7
        cut = int(rng.integers(n_ch))
        busy[cut] = True
        fmt = FORMATS[int(rng.integers(6))]
        out.append((FiberSpan(km * 1e3), uniform_plan(n_ch, 1e-3, fmt, busy, cut)))
    return out


def check_thresholds() -> CheckResult:
    worst, parts = -math.inf, []
    for level, target, tol in THRESHOLD_TARGETS:
        got = ber_to_gsnr_threshold(FORMATS[level - 1], BER_THRESHOLD)
        worst = max(worst, abs(got - target) - tol)
        parts.append(f"{level}:{got:.3f}")
    return CheckResult("thresholds", worst <= 0, -worst, " ".join(parts))


def check_oracle(params: CfmParams, tolerance_db: float = ORACLE_TOLERANCE_DB, n_combs: int = 25,
                 spec: QuadratureSpec = QuadratureSpec()) -> list[CheckResult]:
    worst = 0.0
    sci_tol = tolerance_db * SCI_TOLERANCE_DB / ORACLE_TOLERANCE_DB
    for span, plan in oracle_combs(n_combs):
        ref = span_nli_quadrature(span, plan, spec).nli_power
        got = cfm.span_nli(Variant.WoMDCT1, params, span, plan).total
        worst = max(worst, abs(linear_to_db(got / ref)))
    # SCI on the 80 km reference span; the asinh form drifts on much shorter spans
    span, plan = FiberSpan(80e3), uniform_plan(1, 1.285e-3)
    worst_sci = abs(linear_to_db(cfm.span_nli(Variant.WoMDCT1, params, span, plan).total
                                 / span_nli_quadrature(span, plan, spec).nli_power))
    return [
        _result("oracle-equivalence", worst, tolerance_db, f"worst={worst:.3f} dB over {n_combs} combs"),
        _result("oracle-sci", worst_sci, sci_tol, f"worst={worst_sci:.3f} dB"),
    ]


def check_gaussian_reduction(params: CfmParams) -> CheckResult:
    pairs = ((Variant.MCT1, Variant.WoMDCT1), (Variant.MCT2, Variant.WoMDCT2), (Variant.MDCT, Variant.WoMDCT1))
    bad = 0
    span = FiberSpan(80e3)
    plan = uniform_plan(15, 1e-3, gaussian_format())
    before = (span,) * 3
    for a, b in pairs:
        if cfm.span_nli(a, params, span, plan, before).total != cfm.span_nli(b, params, span, plan, before).total:
            bad += 1
    return CheckResult("gaussian-reduction", bad == 0, float(-bad), f"{bad} mismatching pairs")


def check_logon(params: CfmParams, n: int = 50, seed: int = 2022) -> CheckResult:
    rng = substream(seed, "misc", 1000)
    plan = uniform_plan(15)
    worst_step = worst_ratio = 0.0
    for km in rng.uniform(50.0, 120.0, size=n):
        span = FiberSpan(float(km) * 1e3)
        a = ase_power(span, plan.cut.center_frequency, plan.cut.symbol_rate)
        eta = span_eta(Variant.WoMDCT1, params, span, plan)
        p = logon_closed_form(a, eta)
        worst_step = max(worst_step, abs(watt_to_dbm(p) - logon_grid(a, eta, LOGON_GRID_DBM)) / 0.01)
        worst_ratio = max(worst_ratio, abs(eta * p**3 / a - 0.5))
    ok = worst_step <= 1.0 and worst_ratio <= 1e-6
    return CheckResult("logon", ok, min(1.0 - worst_step, 1e-6 - worst_ratio),
                       f"grid steps={worst_step:.2f} ratio err={worst_ratio:.1e}")


def check_reach_ordering(params: CfmParams) -> CheckResult:
    table = reach_table([Variant.WoMDCT1, Variant.MCT2, Variant.MDCT], params)
    bad = table.ordering_violations()
    mdct, base = table.row("MDCT"), table.row("WoMDCT1")
    return CheckResult("reach-ordering", not bad, float(min(m - b for m, b in zip(mdct, base)) if not bad else -len(bad)),
                       "; ".join(bad) or f"MDCT={mdct} WoMDCT1={base}")


def check_homogeneity(params: CfmParams, c: float = 1.7) -> CheckResult:
    span = FiberSpan(90e3)
    plan = uniform_plan(9, 1e-3, FORMATS[5])
    worst = 0.0
    for v in Variant:
        a = cfm.span_nli(v, params, span, plan).total
        b = cfm.span_nli(v, params, span, plan.scaled(c)).total
        worst = max(worst, abs(b / (c**3 * a) - 1.0))
    return _result("homogeneity", worst, 1e-9, f"rel err={worst:.1e}")


def run_checks(constants: str | Path | None = None, tolerance_db: float = ORACLE_TOLERANCE_DB,
               n_combs: int = 25) -> list[CheckResult]:
    try:
        params = CfmParams.load(constants)
    except (OSError, ValueError, TypeError) as exc:
        return [CheckResult("constants-load", False, -1.0, str(exc).splitlines()[0])]
    out = [CheckResult("constants-load", True, 0.0, f"sha256={cfm.constants_hash(constants)}")]
    out.append(check_thresholds())
    out.extend(check_oracle(params, tolerance_db, n_combs))
    out.append(check_gaussian_reduction(params))
    out.append(check_logon(params))
    out.append(check_reach_ordering(params))
    out.append(check_homogeneity(params))
    return out


__all__ = ["CheckResult", "oracle_combs", "run_checks"]
