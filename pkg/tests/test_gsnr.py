import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import erfcinv

from qotbench.cfm import DEFAULT_PARAMS, Variant
from qotbench.gsnr import (
    BER_THRESHOLD,
    LOGON_GRID_DBM,
    ReachTable,
    ase_power,
    ber_curve,
    ber_to_gsnr_threshold,
    logon_closed_form,
    logon_grid,
    logon_power,
    path_gsnr,
    reach_table,
    refine_span_count,
    span_eta,
)
from qotbench.units import FORMATS, PLANCK, FiberSpan, LinkPath, db_to_linear, linear_to_db, uniform_plan


def test_ase_fixture():
    span = FiberSpan(80e3)
    f, b = 193.5e12, 64e9
    expected = PLANCK * f * db_to_linear(6.0) * (db_to_linear(16.8) - 1) * b
    assert ase_power(span, f, b) == pytest.approx(expected, rel=1e-9)


def test_gsnr_without_nli_is_osnr():
    path = LinkPath.homogeneous(FiberSpan(80e3), 5)
    plan = uniform_plan(11, 1e-3)
    rep = path_gsnr("MDCT", DEFAULT_PARAMS, path, plan, nli=False)
    assert rep.nli_total == 0
    assert rep.gsnr == pytest.approx(linear_to_db(1e-3 / rep.ase_total))


def test_gsnr_report_fields():
    path = LinkPath((FiberSpan(70e3), FiberSpan(90e3)))
    rep = path_gsnr("WoMDCT1", DEFAULT_PARAMS, path, uniform_plan(7, 1e-3))
    assert len(rep.per_span_breakdown) == 2
    assert rep.gsnr == pytest.approx(linear_to_db(rep.p_ch / (rep.ase_total + rep.nli_total)))
    assert rep.as_dict()["gsnr_dB"] == rep.gsnr


def test_gsnr_rejects_empty_or_dark():
    with pytest.raises(ValueError):
        path_gsnr("WoMDCT1", DEFAULT_PARAMS, None, uniform_plan(3))
    with pytest.raises(ValueError):
        path_gsnr("WoMDCT1", DEFAULT_PARAMS, LinkPath.homogeneous(FiberSpan(80e3), 1), uniform_plan(3, 0.0))


def test_qpsk_threshold_analytic():
    # Gray QPSK: BER = 0.5 erfc(sqrt(SNR/2)) exactly
    snr = 2 * erfcinv(2 * BER_THRESHOLD) ** 2
    assert ber_to_gsnr_threshold(FORMATS[1]) == pytest.approx(linear_to_db(snr), abs=1e-6)


def test_bpsk_threshold_analytic():
    # dual-polarization BPSK per-symbol SNR: BER = 0.5 erfc(sqrt(SNR))
    snr = erfcinv(2 * BER_THRESHOLD) ** 2
    assert ber_to_gsnr_threshold(FORMATS[0]) == pytest.approx(linear_to_db(snr), abs=1e-6)


@pytest.mark.parametrize("level", range(1, 7))
def test_ber_curve_monotone(level):
    ber = ber_curve(FORMATS[level - 1])
    vals = [ber(db_to_linear(x)) for x in np.linspace(0, 30, 61)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_thresholds_increase_with_level():
    th = [ber_to_gsnr_threshold(f) for f in FORMATS]
    assert th == sorted(th)


@given(st.floats(1e-6, 1e-5), st.floats(1e2, 1e4))
def test_logon_closed_form_optimum(ase, eta):
    p = logon_closed_form(ase, eta)
    assert eta * p**3 / ase == pytest.approx(0.5, abs=1e-9)
    snr = lambda q: q / (ase + eta * q**3)
    assert snr(p) >= snr(1.01 * p) and snr(p) >= snr(0.99 * p)


@given(st.floats(50, 120), st.integers(1, 6))
def test_logon_grid_within_one_step(km, level):
    span = FiberSpan(km * 1e3)
    plan = uniform_plan(15, 1e-3, FORMATS[level - 1])
    a = ase_power(span, plan.cut.center_frequency, plan.cut.symbol_rate)
    eta = span_eta("WoMDCT1", DEFAULT_PARAMS, span, plan)
    p_dbm = linear_to_db(logon_closed_form(a, eta) / 1e-3)
    assert abs(p_dbm - logon_grid(a, eta, LOGON_GRID_DBM)) <= 0.01 + 1e-9


def test_logon_rejects_zero_eta():
    with pytest.raises(ValueError):
        logon_closed_form(1e-6, 0.0)


def test_logon_power_in_sensible_range():
    p = logon_power("WoMDCT1", DEFAULT_PARAMS, FiberSpan(80e3))
    assert -5 < p < 5


@settings(max_examples=20)
@given(st.integers(0, 2**31 - 1), st.integers(1, 6), st.sampled_from(["WoMDCT1", "MDCT"]))
def test_refine_bisect_equals_linear(seed, level, variant):
    rng = np.random.default_rng(seed)
    spans = [FiberSpan(x * 1e3) for x in rng.uniform(50, 120, 40)]
    plan = uniform_plan(5, 2e-3, FORMATS[level - 1])
    kw = dict(n_max=40)
    a = refine_span_count(variant, DEFAULT_PARAMS, spans, plan, level, method="bisect", **kw)
    b = refine_span_count(variant, DEFAULT_PARAMS, spans, plan, level, method="linear", **kw)
    assert a == b


def test_refine_infinite_thresholds():
    span, plan = FiberSpan(80e3), uniform_plan(3)
    assert refine_span_count("WoMDCT1", DEFAULT_PARAMS, span, plan, 1, threshold=-math.inf, n_max=7) == 7
    assert refine_span_count("WoMDCT1", DEFAULT_PARAMS, span, plan, 1, threshold=math.inf) == 0


@pytest.fixture(scope="module")
def table():
    return reach_table(["WoMDCT1", "MCT2", "MDCT"], DEFAULT_PARAMS)


def test_reach_table_monotone(table):
    assert table.ordering_violations() == []
    for v in table.variants:
        r = table.row(v)
        assert all(a >= b for a, b in zip(r, r[1:]))


def test_reach_roundtrip(table):
    assert ReachTable.from_csv(table.to_csv()) == table


def test_reach_noise_figure_penalty(table):
    worse = reach_table(table.variants, DEFAULT_PARAMS, FiberSpan(80e3, noise_figure=9.0))
    for v in table.variants:
        assert all(a <= b for a, b in zip(worse.row(v), table.row(v)))


def test_reach_matches_direct_span_count(table):
    # the homogeneous fast path agrees with the generic prefix search
    from qotbench.units import dbm_to_watt

    span = FiberSpan(80e3)
    for v in ("WoMDCT1", "MDCT"):
        fmt = FORMATS[3]
        plan = uniform_plan(60, dbm_to_watt(logon_power(v, DEFAULT_PARAMS, span, uniform_plan(fmt=fmt))), fmt)
        n = refine_span_count(v, DEFAULT_PARAMS, span, plan, 4, n_max=60)
        assert n == table.max_spans[(v, 4)]
