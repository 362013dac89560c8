"""Discrete-event simulator of a multi-model GPU inference-serving node
with dynamic batching, capped concurrent batch execution, an explicit
interference model, and an interference-prediction pipeline."""

__version__ = "0.1.0"

from .batcher import BatchRequest, PendingQueue
from .colocation import (
    CoLocationEstimate,
    Mode,
    Sample,
    STATIC_MODE,
    ewma_mode,
    finalize_features,
    init_estimate,
    observe,
)
from .metrics import RequestRecord, percentile, slo_report
from .oracle import InterferenceOracle, oracle_slowdown
from .predict import (
    EvalReport,
    LinearModel,
    RlsState,
    SgdState,
    evaluate,
    fit_ols,
    rls_init,
    rls_update,
    sgd_update,
)
from .profiles import (
    Archetype,
    DEFAULT_ARCHETYPES,
    ModelProfile,
    ProfileTable,
    gen_synthetic_profiles,
    load_profiles,
    throughput_curve,
    write_profiles,
)
from .simcore import BatchOutcome, GpuState, ScenarioResult, run_scenario
from .workload import (
    DeployedModel,
    RequestEvent,
    ScenarioSpec,
    drift_scenarios,
    generate_arrivals,
    load_scenario,
    rate_for_utilization,
    save_scenario,
)
