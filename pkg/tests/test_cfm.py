import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qotbench import cfm
from qotbench.cfm import DEFAULT_PARAMS, CfmParams, Variant, path_nli, psi_cross, psi_self, span_nli
from qotbench.units import FORMATS, FiberSpan, LinkPath, effective_lengths, gaussian_format, uniform_plan

spans_km = st.floats(50.0, 120.0)
levels = st.integers(1, 6)


def test_variant_parse():
    assert Variant.parse("wo-mdct-1") is Variant.WoMDCT1
    assert Variant.parse("mct_2") is Variant.MCT2
    with pytest.raises(ValueError):
        Variant.parse("GN")


def test_constants_file_matches_defaults():
    assert CfmParams.load() == CfmParams()
    assert json.loads(CfmParams().to_json())["cross_multiplicity"] == 1.0


def test_params_reject_nonpositive():
    with pytest.raises(ValueError):
        CfmParams(kurtosis_coefficient=0.0)
    with pytest.raises(ValueError):
        CfmParams(dispersion_decay_coefficient=math.nan)


def test_sci_fixture():
    # hand evaluation of (8/27) g^2 Leff^2 asinh(pi^2/2 |b2| Leff_a R^2) P^3 / (pi |b2| Leff_a R^2)
    span = FiberSpan(80e3)
    r = 64e9
    l_eff, l_eff_a = effective_lengths(span)
    b2 = 21.45e-27
    expected = 8 / 27 * 1.31e-3**2 * l_eff**2 * math.asinh(0.5 * math.pi**2 * b2 * l_eff_a * r**2) / (
        math.pi * b2 * l_eff_a * r**2) * 1e-9
    got = span_nli("WoMDCT1", DEFAULT_PARAMS, span, uniform_plan(1, 1e-3)).total
    assert got == pytest.approx(expected, rel=1e-12)


def test_psi_cross_vs_integral():
    # psi_cross is the integral of the asinh derivative across the interferer band
    span = FiberSpan(80e3)
    r, df = 64e9, 150e9
    k = cfm._kernel_scale(span) * r
    f = np.linspace(df - r / 2, df + r / 2, 200_001)
    num = np.trapezoid(k / np.sqrt(1 + (k * f) ** 2), f)
    assert psi_cross(span, r, r, df) == pytest.approx(num, rel=1e-8)


def test_psi_cross_overlap_raises():
    with pytest.raises(ValueError):
        psi_cross(FiberSpan(80e3), 64e9, 64e9, 30e9)


def test_zero_dispersion_raises():
    span = FiberSpan(80e3, beta2=0.0)
    with pytest.raises(ValueError):
        psi_self(span, 64e9)


@given(spans_km, st.integers(2, 15))
def test_xpm_decreases_with_spacing(km, n):
    span = FiberSpan(km * 1e3)
    plan = uniform_plan(n, 1e-3, cut_index=0)
    b = span_nli("WoMDCT1", DEFAULT_PARAMS, span, plan)
    xpm = [w for _, w in b.xpm_per_interferer]
    assert all(x > y for x, y in zip(xpm, xpm[1:]))


@given(spans_km, levels, st.sampled_from(list(Variant)))
def test_gaussian_reduction_bitwise(km, level, variant):
    span = FiberSpan(km * 1e3)
    plan = uniform_plan(11, 1e-3, gaussian_format(FORMATS[level - 1]))
    base = Variant.WoMDCT2 if variant.atan_backbone else Variant.WoMDCT1
    before = (span, span)
    assert span_nli(variant, DEFAULT_PARAMS, span, plan, before).total == span_nli(
        base, DEFAULT_PARAMS, span, plan, before).total


@given(spans_km, levels, st.floats(0.1, 10.0))
def test_homogeneity(km, level, c):
    span = FiberSpan(km * 1e3)
    plan = uniform_plan(9, 1e-3, FORMATS[level - 1])
    for v in Variant:
        a = span_nli(v, DEFAULT_PARAMS, span, plan).total
        b = span_nli(v, DEFAULT_PARAMS, span, plan.scaled(c)).total
        assert b == pytest.approx(c**3 * a, rel=1e-9)


@given(spans_km, levels)
def test_negative_kurtosis_lowers_nli(km, level):
    span = FiberSpan(km * 1e3)
    plan = uniform_plan(15, 1e-3, FORMATS[level - 1])
    nli = {v: span_nli(v, DEFAULT_PARAMS, span, plan).total for v in Variant}
    assert nli[Variant.MCT1] < nli[Variant.WoMDCT1]
    assert nli[Variant.MDCT] < nli[Variant.MCT1]


def test_decay_fixture():
    # rho = 1 / (1 + sigma |b2| R^2 L_acc), first span undecayed
    p = CfmParams(dispersion_decay_coefficient=math.pi**2 / 2)
    span = FiberSpan(80e3)
    assert cfm.accumulated_dispersion_decay(p, (), 64e9) == 1.0
    rho = cfm.accumulated_dispersion_decay(p, (span,), 64e9)
    assert rho == pytest.approx(1 / (1 + math.pi**2 / 2 * 21.45e-27 * 64e9**2 * 80e3))
    assert 0.02 < rho < 0.035


@given(st.integers(2, 12))
def test_mdct_tends_to_mct1_on_long_paths(n):
    span = FiberSpan(80e3)
    plan = uniform_plan(9, 1e-3, FORMATS[5])
    p = DEFAULT_PARAMS
    short = span_nli("MDCT", p, span, plan, (span,) * (n - 1)).total
    longer = span_nli("MDCT", p, span, plan, (span,) * (10 * n)).total
    floor = span_nli("MCT1", p, span, plan).total
    # the self-correction is negative and fades with accumulated dispersion
    assert short < longer < floor


def test_decay_split_consistent():
    span = FiberSpan(95e3)
    plan = uniform_plan(13, 1e-3, FORMATS[4])
    fixed, dec = cfm.decay_split("MDCT", DEFAULT_PARAMS, span, plan)
    before = (span,) * 4
    rho = cfm.accumulated_dispersion_decay(DEFAULT_PARAMS, before, 64e9)
    assert span_nli("MDCT", DEFAULT_PARAMS, span, plan, before).total == pytest.approx(fixed + rho * dec, rel=1e-14)


def test_path_is_incoherent_sum():
    spans = (FiberSpan(60e3), FiberSpan(110e3), FiberSpan(75e3))
    plan = uniform_plan(5, 2e-3, FORMATS[2])
    total, parts = path_nli("MDCT", DEFAULT_PARAMS, LinkPath(spans), plan, breakdown=True)
    assert total == pytest.approx(math.fsum(b.total for b in parts))
    assert parts[0].total == span_nli("MDCT", DEFAULT_PARAMS, spans[0], plan).total


def test_cross_multiplicity_scales_xpm():
    span = FiberSpan(80e3)
    plan = uniform_plan(5, 1e-3)
    a = span_nli("WoMDCT1", DEFAULT_PARAMS, span, plan)
    b = span_nli("WoMDCT1", replace(DEFAULT_PARAMS, cross_multiplicity=2.0), span, plan)
    assert b.xpm == pytest.approx(2 * a.xpm)
    assert b.sci == a.sci


def test_negative_power_raises():
    plan = uniform_plan(3, -1e-3)
    with pytest.raises(ValueError):
        span_nli("WoMDCT1", DEFAULT_PARAMS, FiberSpan(80e3), plan)
