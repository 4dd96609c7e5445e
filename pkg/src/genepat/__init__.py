"""Memory access pattern toolkit: synthetic traces, six-way pattern
classification, a cache-hierarchy model, locality metrics and the APC/RaL map."""

from .classifier import ClassifierConfig, classify_window, decompose_trace, extract_features
from .errors import ParameterError, TraceFormatError
from .memsim import HierarchyConfig, SimCounters, reference_lru, simulate
from .metrics import MetricSet, derive_metrics
from .patterns import LABELS, PatternLabel, PatternMix
from .policy import Advice, PolicyRecommendation, recommend
from .profiler import ProfileRecord, ProgramProfile, importance, select_hotspots
from .ptmap import PtMapConfig, PtMapPoint, energy_level, order_suites, suite_centers
from .synthgen import GenSpec, generate, generate_mix
from .trace import Trace, validate_trace, window_trace

__version__ = "0.1.0"

__all__ = [
    "ClassifierConfig",
    "GenSpec",
    "HierarchyConfig",
    "LABELS",
    "MetricSet",
    "ParameterError",
    "PatternLabel",
    "PatternMix",
    "SimCounters",
    "Trace",
    "TraceFormatError",
    "Advice",
    "PolicyRecommendation",
    "ProfileRecord",
    "ProgramProfile",
    "PtMapConfig",
    "PtMapPoint",
    "classify_window",
    "energy_level",
    "importance",
    "order_suites",
    "recommend",
    "select_hotspots",
    "suite_centers",
    "decompose_trace",
    "derive_metrics",
    "extract_features",
    "generate",
    "generate_mix",
    "reference_lru",
    "simulate",
    "validate_trace",
    "window_trace",
]
