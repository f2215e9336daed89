import math

import numpy as np
import pytest

from driftstream.core import ConfigError, DriftSignal, make_rng
from driftstream.detectors import ADWIN, DDM, make_detector
from driftstream.streams import generate_bernoulli_stream


def brute_force_adwin(values, delta):
    """Unbucketed reference: keep every value, test every split point."""
    window: list[float] = []
    signals = []
    for v in values:
        window.append(v)
        fired = False
        while True:
            n = len(window)
            cut = None
            for n0 in range(1, n):
                w0, w1 = window[:n0], window[n0:]
                m = 1.0 / (1.0 / len(w0) + 1.0 / len(w1))
                eps = math.sqrt(math.log(4 * n / delta) / (2 * m))
                if abs(sum(w0) / len(w0) - sum(w1) / len(w1)) >= eps:
                    cut = n0
                    break
            if cut is None:
                break
            del window[:cut]
            fired = True
        signals.append(fired)
    return signals, len(window)


def test_adwin_matches_unbucketed_reference():
    values = generate_bernoulli_stream([(0.1, 150), (0.9, 100)], seed=4)
    det = ADWIN(delta=0.01, max_buckets=10**6)  # every bucket stays at size 1
    got = [det.update(v) is DriftSignal.DRIFT for v in values]
    ref, ref_width = brute_force_adwin(values, 0.01)
    assert got == ref
    assert any(ref)
    assert det.width == ref_width


def test_adwin_constant_zero_is_stable():
    det = ADWIN()
    assert all(det.update(0.0) is DriftSignal.STABLE for _ in range(10_000))
    assert det.width == 10_000


def test_adwin_alternating_is_stable():
    det = ADWIN()
    assert all(det.update(float(i % 2)) is DriftSignal.STABLE for i in range(10_000))


def test_adwin_detects_bernoulli_shift():
    values = generate_bernoulli_stream([(0.2, 1000), (0.8, 3000)], seed=1)
    det = ADWIN()
    first = next(i for i, v in enumerate(values) if det.update(v) is DriftSignal.DRIFT)
    assert 1000 <= first < 1300
    assert det.width < 1000


def test_adwin_bucket_count_is_logarithmic():
    det = ADWIN()
    rng = make_rng(0)
    for n in range(1, 20_001):
        det.update(float(rng.random() < 0.3))
        assert det.n_buckets <= det.max_buckets * (int(math.log2(det.width)) + 1)
    assert sum(det.bucket_sizes()) == det.width


def test_adwin_rejects_out_of_range():
    with pytest.raises(ConfigError):
        ADWIN().update(1.5)
    with pytest.raises(ConfigError):
        ADWIN(delta=0)


def test_adwin_reset_replay_matches_fresh():
    values = generate_bernoulli_stream([(0.3, 400)], seed=9)
    used = ADWIN()
    for v in generate_bernoulli_stream([(0.2, 500), (0.9, 500)], seed=2):
        used.update(v)
    used.reset()
    fresh = ADWIN()
    assert [used.update(v) for v in values] == [fresh.update(v) for v in values]
    assert (used.width, used.total, used.bucket_sizes()) == (fresh.width, fresh.total, fresh.bucket_sizes())


def ddm_oracle(errors, warn=2.0, drift=3.0, min_n=30):
    """Vectorised evaluation of the smoothed DDM threshold recurrence up to the first drift.

    Returns (first warning index, first drift index), -1 when absent.
    """
    e = np.asarray(errors, dtype=float)
    n = np.arange(1, len(e) + 1, dtype=float)
    p = (np.cumsum(e) + 1.0) / (n + 2.0)
    s = np.sqrt(p * (1.0 - p) / n)
    level = p + s
    # minima only start being tracked once min_n instances have been seen
    level_eligible = np.where(n >= min_n, level, np.inf)
    arg = np.zeros(len(e), dtype=int)
    best = 0
    for i in range(len(e)):  # running argmin with strict improvement
        if level_eligible[i] < level_eligible[best]:
            best = i
        arg[i] = best
    pmin, smin = p[arg], s[arg]
    eligible = n >= min_n
    drift_hits = np.flatnonzero(eligible & (level >= pmin + drift * smin))
    d_idx = int(drift_hits[0]) if len(drift_hits) else -1
    upto = d_idx if d_idx >= 0 else len(e)
    warn_hits = np.flatnonzero((eligible & (level >= pmin + warn * smin))[:upto])
    return (int(warn_hits[0]) if len(warn_hits) else -1), d_idx


def _first(det, errors, signal):
    for i, e in enumerate(errors):
        if det.update(e) is signal:
            return i
    return -1


def test_ddm_zeros_then_ones_matches_recurrence():
    errors = [0] * 1000 + [1] * 500
    _, expected = ddm_oracle(errors)
    assert expected > 1000
    assert _first(DDM(), errors, DriftSignal.DRIFT) == expected


def test_ddm_rate_half_warning_precedes_drift():
    rng = make_rng(17)
    errors = [0] * 1000 + [int(b) for b in rng.random(2000) < 0.5]
    w_expected, d_expected = ddm_oracle(errors)
    det = DDM()
    signals = [det.update(e) for e in errors[: d_expected + 1]]
    first_warn = signals.index(DriftSignal.WARNING)
    assert first_warn == w_expected
    assert signals[-1] is DriftSignal.DRIFT and first_warn < d_expected


def test_ddm_all_zero_stable_forever():
    det = DDM()
    assert all(det.update(0) is DriftSignal.STABLE for _ in range(20_000))


def test_ddm_silent_before_min_instances():
    det = DDM(min_instances=30)
    assert all(det.update(1) is DriftSignal.STABLE for _ in range(29))


def test_ddm_minimum_recorded_jointly():
    det = DDM()
    rng = make_rng(5)
    for e in (rng.random(3000) < 0.2).astype(int):
        det.update(int(e))
        if det.n >= det.min_instances:
            assert det.p_min + det.s_min <= det.p + det.s + 1e-15
        assert 0.0 <= det.p <= 1.0 and det.s >= 0.0


def test_ddm_reset_clears_warning():
    errors = [0] * 1000 + [1] * 500
    warn_at, drift_at = ddm_oracle(errors)
    assert warn_at < drift_at
    det = DDM()
    for e in errors[: warn_at + 1]:
        det.update(e)
    assert det.in_warning
    det.reset()
    assert not det.in_warning and det.n == 0


def test_ddm_rejects_non_binary():
    with pytest.raises(ConfigError):
        DDM().update(2)


def test_make_detector():
    assert isinstance(make_detector("adwin", adwin_delta=0.01), ADWIN)
    assert isinstance(make_detector("DDM"), DDM)
    with pytest.raises(ConfigError):
        make_detector("eddm")
