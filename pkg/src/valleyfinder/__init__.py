"""Session identification from event logs via Gaussian mixtures over log2 gaps."""

from .em import bic, em_fit, init_params, label_components, log_likelihood, responsibilities
from .errors import DataError, NumericalError, ValleyfinderError
from .estimator import GapMixture
from .histogram import build_histogram
from .ingest import (
    ColumnMap,
    FilterSpec,
    SpikeReport,
    apply_filters,
    compute_deltas,
    detect_spikes,
    fingerprint,
    parse_events,
)
from .sessions import SessionSummary, session_summary, sessionize
from .synth import SynthSpec, generate_event_log, sample_mixture
from .threshold import (
    DbiReport,
    ValleyReport,
    crossover_threshold,
    davies_bouldin,
    find_valley,
    group_components,
    group_density,
)
from .types import (
    Event,
    FitConfig,
    Histogram,
    InterActivitySample,
    Label,
    MixtureComponent,
    MixtureFit,
    Session,
    ThresholdResult,
    validate_fit,
)

__version__ = "0.1.0"

__all__ = [
    "ColumnMap",
    "DataError",
    "DbiReport",
    "Event",
    "FilterSpec",
    "FitConfig",
    "GapMixture",
    "Histogram",
    "InterActivitySample",
    "Label",
    "MixtureComponent",
    "MixtureFit",
    "NumericalError",
    "Session",
    "SessionSummary",
    "SpikeReport",
    "SynthSpec",
    "ThresholdResult",
    "ValleyReport",
    "ValleyfinderError",
    "apply_filters",
    "bic",
    "build_histogram",
    "compute_deltas",
    "crossover_threshold",
    "davies_bouldin",
    "detect_spikes",
    "em_fit",
    "find_valley",
    "fingerprint",
    "generate_event_log",
    "group_components",
    "group_density",
    "init_params",
    "label_components",
    "log_likelihood",
    "parse_events",
    "responsibilities",
    "sample_mixture",
    "session_summary",
    "sessionize",
    "validate_fit",
]
