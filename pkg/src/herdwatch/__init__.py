"""Risk-averse social learning filters and quickest change detection."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (
    DivergenceError,
    HerdwatchError,
    ImpossibleActionError,
    ImpossibleObservationError,
    ReplayError,
    SimulationError,
    ValidationError,
)
from .model import (
    AgentModel,
    AssumptionReport,
    Belief,
    fosd_compare,
    is_tp2,
    mlr_compare,
    validate_model,
)
from .changepoint import (
    ChangeProcess,
    expected_change_time,
    mc_change_times,
    ph_pmf,
    ph_pmf_sequence,
    sample_chain,
)
from .detector import (
    ObserverModel,
    SolvedPolicy,
    StoppingSetReport,
    constant_policy,
    observer_cost,
    solve,
    stopping_set_analysis,
    value_jumps,
)
from .risk import CvarResult, DiscreteCostDistribution, cvar_discrete, risk_adjusted_cost
from .sim import (
    DetectionMetrics,
    Trajectory,
    derive_seed,
    monte_carlo,
    replay_csv,
    simulate_episode,
)
from .socialfilter import (
    BeliefRegion,
    DecisionProfile,
    RegionSweepRow,
    RegionTable,
    agent_decision,
    decision_profile,
    learning_region_sweep,
    partition_scan,
    private_update,
    public_update,
)

__version__ = "0.1.0"

__all__ = [
    "AgentModel",
    "AssumptionReport",
    "Belief",
    "BeliefRegion",
    "ChangeProcess",
    "CvarResult",
    "DecisionProfile",
    "DetectionMetrics",
    "DiscreteCostDistribution",
    "DivergenceError",
    "HerdwatchError",
    "ImpossibleActionError",
    "ImpossibleObservationError",
    "KERNEL_BACKEND",
    "ObserverModel",
    "RegionSweepRow",
    "RegionTable",
    "ReplayError",
    "SimulationError",
    "SolvedPolicy",
    "StoppingSetReport",
    "Trajectory",
    "ValidationError",
    "agent_decision",
    "constant_policy",
    "cvar_discrete",
    "decision_profile",
    "derive_seed",
    "expected_change_time",
    "fosd_compare",
    "is_tp2",
    "learning_region_sweep",
    "mc_change_times",
    "mlr_compare",
    "monte_carlo",
    "observer_cost",
    "partition_scan",
    "ph_pmf",
    "ph_pmf_sequence",
    "private_update",
    "public_update",
    "replay_csv",
    "risk_adjusted_cost",
    "sample_chain",
    "simulate_episode",
    "solve",
    "stopping_set_analysis",
    "validate_model",
    "value_jumps",
]
