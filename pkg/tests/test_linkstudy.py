import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qotbench import linkstudy
from qotbench.cfm import DEFAULT_PARAMS
from qotbench.gsnr import path_gsnr
from qotbench.linkstudy import StudyConfig, run_study, sample_link, stats
from qotbench.oracle import OracleConvergenceError
from qotbench.rng import substream

SMALL = dict(n_per_class={"highMFL": 3, "QPSK": 1, "BPSK": 1}, n_channels=9, max_spans=6, seed=5)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=50))
def test_stats_relations(d):
    s = stats(d)
    assert s.rmse >= s.mae * (1 - 1e-12)
    assert s.rmse**2 == pytest.approx(s.std**2 + s.mean**2, rel=1e-9, abs=1e-12)
    assert s.n == len(d)


def test_stats_fixture():
    s = stats([1.0, -1.0, 3.0])
    assert s.mae == pytest.approx(5 / 3)
    assert s.rmse == pytest.approx(math.sqrt(11 / 3))
    assert s.mean == pytest.approx(1.0)
    with pytest.raises(ValueError):
        stats([])


@pytest.mark.parametrize("cls", ["highMFL", "QPSK", "BPSK"])
def test_sample_ranges(cls):
    s = sample_link(substream(3, "sample", 0), cls, 0, n_channels=15, n_max=10)
    assert s.mfl in linkstudy.CLASSES[cls]
    assert 10 <= s.loading_pct <= 100
    assert all(50 <= x <= 120 for x in s.span_lengths_km)
    assert 1 <= s.n_spans <= 10
    assert -5 <= s.launch_power_dbm <= 5
    assert s.busy[s.cut_index]


def test_sample_span_count_is_maximal():
    s = sample_link(substream(11, "sample", 0), "highMFL", 0, n_channels=15, n_max=10)
    plan = s.plan()
    thr = linkstudy.FORMATS[s.mfl - 1].gsnr_threshold
    g = lambda n: path_gsnr("WoMDCT1", DEFAULT_PARAMS, linkstudy.LinkPath(s.spans()[:n]), plan).gsnr
    if s.n_spans < 10 and g(1) >= thr:
        assert g(s.n_spans) >= thr > g(s.n_spans + 1)


def test_sample_seed_determinism():
    a = sample_link(substream(1, "sample", 4), "QPSK", 4, 9, 6)
    b = sample_link(substream(1, "sample", 4), "QPSK", 4, 9, 6)
    c = sample_link(substream(1, "sample", 5), "QPSK", 4, 9, 6)
    assert a == b and a != c


def test_unknown_class():
    with pytest.raises(ValueError):
        sample_link(np.random.default_rng(0), "16QAM")


def test_config_from_dict():
    cfg = StudyConfig.from_dict({"variants": ["mdct"], "seed": 3})
    assert cfg.variants == ("MDCT",) and cfg.seed == 3
    with pytest.raises(ValueError):
        StudyConfig.from_dict({"samples": 3})


def test_self_baseline_gives_zero_stats():
    res = run_study(StudyConfig(**SMALL, variants=("WoMDCT1", "MDCT"), baseline="WoMDCT1"))
    assert res.stats[("WoMDCT1", "all")].rmse == 0.0
    assert res.stats[("MDCT", "all")].rmse > 0.0


def test_study_rerun_identical():
    cfg = StudyConfig(**SMALL, variants=("WoMDCT1",))
    a, b = run_study(cfg), run_study(cfg)
    assert list(a.csv_rows()) == list(b.csv_rows())
    assert a.stats[("WoMDCT1", "all")].rmse < 0.5


def test_nonconverging_samples_are_excluded(monkeypatch):
    real = linkstudy.path_nli_quadrature
    calls = []

    def flaky(path, plan, spec):
        calls.append(1)
        if len(calls) % 2:
            raise OracleConvergenceError("forced")
        return real(path, plan, spec)

    monkeypatch.setattr(linkstudy, "path_nli_quadrature", flaky)
    res = run_study(StudyConfig(**SMALL, variants=("WoMDCT1",)))
    assert res.excluded == [0, 2, 4]
    assert [r.sample.sample_id for r in res.rows] == [1, 3]
    assert res.stats[("WoMDCT1", "all")].n == 2
