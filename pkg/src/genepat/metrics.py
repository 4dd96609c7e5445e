"""Characterisation metrics derived from simulator counters."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .memsim import SimCounters


@dataclass(frozen=True)
class MetricSet:
    ral: float
    l3_apc: float
    pipeline_stall_degree: float
    l2_beyond_active_degree: float
    latency_non_hidden_degree: float
    prefetch_request_ratio: float
    ipc_model: float
    flags: tuple[str, ...] = ()

    def rows(self) -> list[tuple[str, float]]:
        return [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "flags"]


def _ratio(num: float, den: float, flag: str, flags: list[str]) -> float:
    if den <= 0:
        flags.append(flag)
        return num / 1.0
    return num / den


def derive_metrics(s: SimCounters, demand_only_prefetch_ratio: bool = False) -> MetricSet:
    """Compute the metric suite.

    RaL is L1 hits per off-chip line movement (demand and prefetch fills
    alike).  Zero denominators are replaced by one and reported in ``flags``.
    With ``demand_only_prefetch_ratio`` the prefetch ratio divides by L2
    demand requests only.
    """
    flags: list[str] = []
    ral = _ratio(s.l1.hits, s.offchip_movements, "ral:no_offchip_movements", flags)
    apc = _ratio(s.l3_accesses_completed, s.l3_active_cycles, "l3_apc:no_l3_activity", flags)
    stall = _ratio(s.stall_cycles, s.total_cycles, "pipeline_stall_degree:no_cycles", flags)
    active = _ratio(
        s.l2_beyond_active_cycles, s.mem_active_cycles, "l2_beyond_active_degree:no_memory_activity", flags
    )
    non_hidden = _ratio(
        s.stall_cycles, s.mem_active_cycles, "latency_non_hidden_degree:no_memory_activity", flags
    )
    l2_requests = s.l2.demand_requests + (0 if demand_only_prefetch_ratio else s.l2.prefetch_requests)
    pf = _ratio(s.l2.prefetch_requests, l2_requests, "prefetch_request_ratio:no_l2_requests", flags)
    ipc = _ratio(s.records, s.total_cycles, "ipc_model:no_cycles", flags)
    return MetricSet(ral, apc, stall, active, non_hidden, pf, ipc, tuple(flags))
