"""Runtime analysis and simulation toolkit for two-stage nested adiabatic search."""

from .csp import (
    CensusScaleError,
    Constraint,
    ConstraintSplit,
    CspInstance,
    SolutionCensus,
    census,
    classify,
    generate,
    instance_from_json,
    instance_to_json,
    read_instance,
    shapes_from_census,
    write_instance,
)
from .dynamics import (
    AdiabaticBoundReport,
    EvolutionConfig,
    NestedSearchReport,
    SimulationReport,
    Stage2Calibration,
    calibrate_stage2,
    run_nested_search,
    simulate_stage1,
    simulate_stage2,
    verify_adiabatic_bound,
)
from .model import (
    ModelEstimates,
    PartitionModel,
    ScalingFit,
    approx_model_time,
    estimate,
    fit_scaling,
    model_time,
    optimize_x,
    scaling_exponent,
)
from .schedule import (
    AccuracyTarget,
    TimeBudget,
    approx_stage1_time,
    approx_total_time,
    stage1_time,
    stage2_iterations,
    total_time,
)
from .spectral import (
    SchedulePoint,
    SubsystemShape,
    TwoLevelSpectrum,
    gap,
    transition_strength,
    two_level_spectrum,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyTarget",
    "AdiabaticBoundReport",
    "CensusScaleError",
    "Constraint",
    "ConstraintSplit",
    "CspInstance",
    "EvolutionConfig",
    "ModelEstimates",
    "NestedSearchReport",
    "PartitionModel",
    "ScalingFit",
    "SchedulePoint",
    "SimulationReport",
    "SolutionCensus",
    "Stage2Calibration",
    "SubsystemShape",
    "TimeBudget",
    "TwoLevelSpectrum",
    "approx_model_time",
    "approx_stage1_time",
    "approx_total_time",
    "calibrate_stage2",
    "census",
    "classify",
    "estimate",
    "fit_scaling",
    "gap",
    "generate",
    "instance_from_json",
    "instance_to_json",
    "model_time",
    "optimize_x",
    "read_instance",
    "run_nested_search",
    "scaling_exponent",
    "shapes_from_census",
    "simulate_stage1",
    "simulate_stage2",
    "stage1_time",
    "stage2_iterations",
    "total_time",
    "transition_strength",
    "two_level_spectrum",
    "verify_adiabatic_bound",
    "write_instance",
]
