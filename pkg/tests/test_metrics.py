import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genepat.memsim import LevelCounters, SimCounters, simulate
from genepat.metrics import derive_metrics
from genepat.synthgen import GenSpec, generate


def _counters(**kw):
    s = SimCounters()
    for k, v in kw.items():
        if k.startswith(("l1_", "l2_", "l3_")) and hasattr(LevelCounters, k[3:]):
            setattr(getattr(s, k[:2]), k[3:], v)
        else:
            setattr(s, k, v)
    return s


def test_ral_arithmetic():
    m = derive_metrics(_counters(l1_hits=990, offchip_movements=10, total_cycles=1))
    assert m.ral == 99.0


def test_apc_arithmetic():
    m = derive_metrics(_counters(l3_accesses_completed=100, l3_active_cycles=400, total_cycles=1))
    assert m.l3_apc == 0.25


def test_prefetch_ratio_high_case():
    m = derive_metrics(_counters(l2_prefetch_requests=88, l2_demand_requests=12, total_cycles=1))
    assert m.prefetch_request_ratio == pytest.approx(0.88)
    d = derive_metrics(_counters(l2_prefetch_requests=88, l2_demand_requests=12, total_cycles=1), True)
    assert d.prefetch_request_ratio == pytest.approx(88 / 12)


def test_cycle_degrees():
    m = derive_metrics(
        _counters(stall_cycles=30, total_cycles=120, mem_active_cycles=60, l2_beyond_active_cycles=45, records=60)
    )
    assert m.pipeline_stall_degree == 0.25
    assert m.l2_beyond_active_degree == 0.75
    assert m.latency_non_hidden_degree == 0.5
    assert m.ipc_model == 0.5
    assert not [f for f in m.flags if "degree" in f or "ipc" in f]


def test_zero_denominators_are_guarded_and_flagged():
    m = derive_metrics(SimCounters(l1=LevelCounters(hits=5)))
    assert m.ral == 5.0
    assert m.l3_apc == 0.0
    assert "ral:no_offchip_movements" in m.flags
    assert "l3_apc:no_l3_activity" in m.flags
    assert len(m.flags) == 7


def test_ral_recomputable_from_simulation():
    s = simulate(generate(GenSpec("P5", n_outer=300)))
    m = derive_metrics(s)
    assert s.offchip_movements > 0
    assert round(m.ral * s.offchip_movements) == s.l1.hits
    assert m.ral * s.offchip_movements == pytest.approx(s.l1.hits, rel=1e-12)


def test_metric_orderings_on_generators():
    small_period = derive_metrics(simulate(generate(GenSpec("P2", stride=8, period=64), 100_000)))
    streaming = derive_metrics(simulate(generate(GenSpec("P2", stride=8, period=1 << 17), 100_000)))
    line = derive_metrics(simulate(generate(GenSpec("P1", stride=128), 100_000)))
    random = derive_metrics(simulate(generate(GenSpec("P4", footprint=1 << 30), 100_000)))
    assert small_period.ral > streaming.ral > random.ral
    assert line.prefetch_request_ratio > random.prefetch_request_ratio


counter_sets = st.builds(
    lambda total, stall_frac, mem, l2b_frac, l3_frac, hits, off, pf, dem, done: _counters(
        total_cycles=total,
        stall_cycles=int(total * stall_frac),
        mem_active_cycles=mem,
        l2_beyond_active_cycles=int(mem * l2b_frac),
        l3_active_cycles=int(mem * l2b_frac * l3_frac),
        l1_hits=hits,
        offchip_movements=off,
        l2_prefetch_requests=pf,
        l2_demand_requests=dem,
        l3_accesses_completed=done,
        records=hits,
    ),
    st.integers(0, 10**9),
    st.floats(0, 1),
    st.integers(0, 10**9),
    st.floats(0, 1),
    st.floats(0, 1),
    st.integers(0, 10**9),
    st.integers(0, 10**9),
    st.integers(0, 10**6),
    st.integers(0, 10**6),
    st.integers(0, 10**6),
)


@settings(max_examples=1000, deadline=None)
@given(counter_sets)
def test_metric_ranges(s):
    m = derive_metrics(s)
    for name, v in m.rows():
        assert v >= 0, name
    assert m.pipeline_stall_degree <= 1
    assert m.l2_beyond_active_degree <= 1
    assert m.prefetch_request_ratio <= 1
