import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from synth_cases import random_spec

from genepat.classifier import (
    ClassifierConfig,
    PatternFeatures,
    Periodicity,
    aggregate_suite,
    classify_window,
    classify_windows,
    decompose_trace,
    extract_features,
)
from genepat.errors import ParameterError
from genepat.patterns import LABELS, PatternLabel, PatternMix
from genepat.synthgen import GenSpec, generate, generate_mix
from genepat.trace import Trace

P = PatternLabel


def test_p1_features():
    f = extract_features(generate(GenSpec("P1", stride=128), 2048))
    assert f.slope_k == pytest.approx(128)
    assert f.periodic is Periodicity.APERIODIC
    assert f.linearity_r2 > 0.999
    assert f.reset_count == 0 and f.period_mean is None


def test_constant_address_is_flat_p1():
    t = Trace(np.full(100, 0x5000, np.uint64), np.zeros(100, bool), np.full(100, 8))
    f = extract_features(t)
    assert (f.slope_k, f.linearity_r2, f.periodic) == (0.0, 1.0, Periodicity.APERIODIC)
    assert classify_window(f) is P.P1


def test_p5_triangle_is_variable():
    f = extract_features(generate(GenSpec("P5", stride=128, n_outer=100)))
    assert f.periodic is Periodicity.VARIABLE
    assert f.period_cv > 0.10
    # the sweep for i starts with a drop of (i - 2) strides, detectable once
    # that exceeds 1.5 strides, i.e. for i = 4..100
    assert f.reset_count == 97
    assert f.slope_k == pytest.approx(128)


def test_p2_fixed_period_features():
    f = extract_features(generate(GenSpec("P2", stride=8, period=64), 2048))
    assert f.periodic is Periodicity.FIXED
    assert f.period_mean == 64 and f.period_cv == 0.0
    assert f.slope_k == pytest.approx(8)


def test_descending_sawtooth_detected():
    addr = np.tile(np.arange(50, 0, -1, dtype=np.uint64) * 256, 40)
    t = Trace(addr, np.zeros(addr.size, bool), np.full(addr.size, 8))
    f = extract_features(t)
    assert f.periodic is Periodicity.FIXED and f.period_mean == 50
    assert classify_window(f) is P.P2


def test_p4_features_classify_random():
    f = extract_features(generate(GenSpec("P4", footprint=1 << 30), 4096))
    assert classify_window(f) is P.P4


@pytest.mark.parametrize(
    "features,label",
    [
        (PatternFeatures(8.0, 1.0, Periodicity.FIXED, 64.0, 0.0, 30), P.P2),
        (PatternFeatures(4096.0, 1.0, Periodicity.FIXED, 64.0, 0.0, 30), P.P6),
        (PatternFeatures(4096.0, 1.0, Periodicity.VARIABLE, 30.0, 0.5, 30), P.P4),
        (PatternFeatures(128.0, 0.99, Periodicity.VARIABLE, 30.0, 0.5, 30), P.P5),
        (PatternFeatures(128.0, 0.99, Periodicity.APERIODIC), P.P1),
        (PatternFeatures(2048.0, 0.99, Periodicity.APERIODIC), P.P1),
        (PatternFeatures(2048.5, 0.99, Periodicity.APERIODIC), P.P3),
        (PatternFeatures(128.0, 0.5, Periodicity.APERIODIC), P.P4),
    ],
)
def test_decision_tree(features, label):
    assert classify_window(features) is label


def test_slope_threshold_configurable():
    f = PatternFeatures(1500.0, 1.0, Periodicity.APERIODIC)
    assert classify_window(f, ClassifierConfig(slope_hi=1000)) is P.P3
    assert classify_window(f) is P.P1


def test_short_window_rejected():
    with pytest.raises(ParameterError):
        extract_features(generate(GenSpec("P1"), 63))
    with pytest.raises(ParameterError):
        decompose_trace(generate(GenSpec("P1"), 10))


@pytest.mark.parametrize(
    "kwargs",
    [dict(c=0), dict(c=4096), dict(r2_line=1.0), dict(cv_fixed=0), dict(slope_hi=-1),
     dict(reset_factor=0), dict(max_pairs=0), dict(window_len=32)],
)
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        ClassifierConfig(**kwargs)


def test_pure_p2_decomposes_to_p2():
    m = decompose_trace(generate(GenSpec("P2"), 20_000))
    assert m[P.P2] == 1.0


@pytest.mark.parametrize("frac", [0.5, 0.25])
def test_mix_decomposition(frac):
    t = generate_mix([(GenSpec("P2"), frac), (GenSpec("P4"), 1 - frac)], 100_000)
    m = decompose_trace(t)
    assert abs(m[P.P2] - frac) <= 0.05
    assert abs(m[P.P4] - (1 - frac)) <= 0.05


def test_aggregate_examples():
    p4, p2 = PatternMix.pure("P4"), PatternMix.pure("P2")
    agg = aggregate_suite([p4, p4, p4, p2])
    assert agg[P.P2] == pytest.approx(0.25) and agg[P.P4] == pytest.approx(0.75)
    m = PatternMix({"P1": 0.3, "P5": 0.7})
    assert aggregate_suite([m]).as_vector() == pytest.approx(m.as_vector())
    both = aggregate_suite([PatternMix.pure("P1"), PatternMix.pure("P3")])
    assert (both[P.P1], both[P.P3]) == (0.5, 0.5)
    with pytest.raises(ParameterError):
        aggregate_suite([])


features = st.builds(
    PatternFeatures,
    slope_k=st.floats(0, 1e12, allow_nan=False),
    linearity_r2=st.floats(0, 1),
    periodic=st.sampled_from(list(Periodicity)),
)


@given(features)
def test_every_feature_vector_gets_one_label(f):
    assert classify_window(f) in LABELS


@settings(max_examples=60, deadline=None)
@given(
    addr=st.lists(st.integers(0, 2**48), min_size=64, max_size=600),
    wl=st.integers(64, 256),
)
def test_decomposition_is_complete(addr, wl):
    t = Trace(np.array(addr, np.uint64), np.zeros(len(addr), bool), np.full(len(addr), 8))
    m = decompose_trace(t, window_len=wl)
    assert set(m.weights) == set(LABELS)
    assert abs(math.fsum(m.weights.values()) - 1.0) <= 1e-9


@pytest.mark.parametrize("label", list(PatternLabel))
def test_labels_survive_address_shift_and_stride_scaling(label):
    spec = random_spec(label, np.random.default_rng(5))
    t = generate(spec, 8192)
    base = [r.label for r in classify_windows(t)]
    shifted = Trace(t.addr + np.uint64(1 << 40), t.is_write, t.size)
    assert [r.label for r in classify_windows(shifted)] == base
    if label in (P.P1, P.P5):
        scaled = generate(spec.with_(stride=(spec.stride // 2) + 64), 8192)
        assert decompose_trace(scaled).dominant() is label


def test_classification_is_deterministic():
    t = generate(GenSpec("P4", seed=3), 20_000)
    assert decompose_trace(t) == decompose_trace(t)


@pytest.mark.parametrize("label", list(PatternLabel))
def test_window_accuracy_on_random_specs(label):
    rng = np.random.default_rng(100 + LABELS.index(label))
    hits = total = 0
    for _ in range(15):
        results = classify_windows(generate(random_spec(label, rng), 16_384))
        hits += sum(r.label is label for r in results)
        total += len(results)
    assert hits / total >= 0.95
