import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qotbench.units import (
    FORMATS,
    ChannelPlan,
    Channel,
    FiberSpan,
    LinkPath,
    alpha_p_to_attenuation,
    attenuation_to_alpha_p,
    build_cband_plan,
    db_to_linear,
    dbm_to_watt,
    effective_lengths,
    excess_kurtosis,
    gaussian_format,
    get_format,
    linear_to_db,
    uniform_plan,
    watt_to_dbm,
)


def test_dbm_fixture():
    assert dbm_to_watt(0.0) == pytest.approx(1e-3)
    assert watt_to_dbm(1e-3) == pytest.approx(0.0)
    assert dbm_to_watt(30.0) == pytest.approx(1.0)


@given(st.floats(-60, 40))
def test_dbm_roundtrip(x):
    assert watt_to_dbm(dbm_to_watt(x)) == pytest.approx(x, abs=1e-9)


@given(st.floats(0.01, 1.0))
def test_attenuation_roundtrip(a):
    assert alpha_p_to_attenuation(attenuation_to_alpha_p(a)) == pytest.approx(a, rel=1e-12)


def test_attenuation_nonpositive_rejected():
    with pytest.raises(ValueError):
        attenuation_to_alpha_p(0.0)


def test_effective_length_limits():
    span = FiberSpan(80e3)
    l_eff, l_eff_a = effective_lengths(span)
    assert l_eff_a == pytest.approx(1 / span.alpha_p)
    assert l_eff < l_eff_a
    # 80 km at 0.21 dB/km: about 20.1 km
    assert l_eff == pytest.approx((1 - math.exp(-span.alpha_p * 80e3)) / span.alpha_p)
    assert 19e3 < l_eff < 21e3


def test_transparency_gain():
    span = FiberSpan(100e3)
    assert span.gain_db == pytest.approx(21.0)
    assert linear_to_db(span.gain) == pytest.approx(21.0)


def test_span_validation():
    with pytest.raises(ValueError):
        FiberSpan(0.0)
    with pytest.raises(ValueError):
        FiberSpan(80e3, attenuation=-1)


def test_kurtosis_values():
    # textbook excess kurtosis values of unit-energy constellations
    assert FORMATS[0].excess_kurtosis == pytest.approx(-1.0)
    assert FORMATS[1].excess_kurtosis == pytest.approx(-1.0)
    assert FORMATS[3].excess_kurtosis == pytest.approx(-0.68)
    assert FORMATS[5].excess_kurtosis == pytest.approx(-13 / 21)
    assert gaussian_format().excess_kurtosis == 0.0


def test_kurtosis_of_gaussian_samples_near_zero():
    rng = np.random.default_rng(0)
    z = rng.normal(size=200_000) + 1j * rng.normal(size=200_000)
    assert abs(excess_kurtosis(z)) < 0.03


def test_format_table():
    assert [f.level for f in FORMATS] == [1, 2, 3, 4, 5, 6]
    assert [f.rate_per_carrier for f in FORMATS] == [92, 184, 276, 368, 460, 552]
    assert get_format(6).bits_per_symbol == 6
    with pytest.raises(ValueError):
        get_format(7)


def test_plan_cut_must_be_busy():
    with pytest.raises(ValueError):
        uniform_plan(5, busy=[True, True, False, True, True], cut_index=2)


def test_plan_overlap_rejected():
    fmt = FORMATS[3]
    chs = (Channel(193e12, 1e-3, fmt), Channel(193e12 + 50e9, 1e-3, fmt))
    with pytest.raises(ValueError):
        ChannelPlan(chs, 0)


@given(st.integers(1, 60), st.integers(0, 2**32 - 1))
def test_cband_plan_loading(n_busy, seed):
    plan = build_cband_plan(n_busy, np.random.default_rng(seed))
    assert plan.n_busy == n_busy
    assert plan.cut.busy


def test_plan_scaling():
    plan = uniform_plan(7, 1e-3)
    assert np.allclose(plan.scaled(2.0).arrays["power"], 2e-3)
    assert plan.with_power(5e-3).cut.launch_power == 5e-3


def test_link_path():
    path = LinkPath.homogeneous(FiberSpan(80e3), 3)
    assert path.n_spans == 3
    assert path.total_length == pytest.approx(240e3)
    with pytest.raises(ValueError):
        LinkPath(())
