"""Schedulability analysis for gang (rigid parallel) sporadic tasks under Gang EDF."""

from .analysis import (
    AnalysisConfig,
    AnalysisPoint,
    AnalysisVerdict,
    CarryInStrategy,
    Certified,
    DeltaBound,
    Inapplicable,
    InterferenceSummary,
    NoDeltaBound,
    NotProven,
    Variant,
    analyze,
    analyze_task,
    carry_in_bound,
    carry_in_extra,
    check_condition,
    interference_no_carry_in,
    interference_rectangle,
    interference_with_carry_in,
    scan_upper_bound,
)
from .demand import dbf, hbf, hbf_prime
from .generator import (
    DeadlineMode,
    GenParams,
    GenerationError,
    generate_task_system,
    rand_fixed_sum,
    rand_fixed_sum_batch,
)
from .model import (
    GangTask,
    ParseError,
    Rational,
    TaskSystem,
    ValidationError,
    is_valid,
    parse_task_system,
    print_task_system,
    validate,
)
from .simulator import (
    HorizonOverflowError,
    Job,
    ScheduleTrace,
    check_no_miss,
    hyperperiod,
    simulate_synchronous,
)

__all__ = [
    "AnalysisConfig",
    "AnalysisPoint",
    "AnalysisVerdict",
    "CarryInStrategy",
    "Certified",
    "DeadlineMode",
    "DeltaBound",
    "GangTask",
    "GenParams",
    "GenerationError",
    "HorizonOverflowError",
    "Inapplicable",
    "InterferenceSummary",
    "Job",
    "NoDeltaBound",
    "NotProven",
    "ParseError",
    "Rational",
    "ScheduleTrace",
    "TaskSystem",
    "ValidationError",
    "Variant",
    "analyze",
    "analyze_task",
    "carry_in_bound",
    "carry_in_extra",
    "check_condition",
    "check_no_miss",
    "dbf",
    "generate_task_system",
    "hbf",
    "hbf_prime",
    "hyperperiod",
    "interference_no_carry_in",
    "interference_rectangle",
    "interference_with_carry_in",
    "is_valid",
    "parse_task_system",
    "print_task_system",
    "rand_fixed_sum",
    "rand_fixed_sum_batch",
    "scan_upper_bound",
    "simulate_synchronous",
    "validate",
]

__version__ = "0.1.0"
