"""Throughput-fairness tradeoff of finite-user slotted Aloha."""

from .alpha import (
    AlphaTradeoffPoint,
    AlwaysConcave,
    InflectionResult,
    alpha_curve,
    alpha_optimal_point,
    alpha_optimal_point_inequality,
    inflection_threshold,
)
from .constraint import (
    FeasiblePairSet,
    ThroughputRange,
    achievable_range,
    feasible_pairs,
    restricted_throughput,
    solve_ps,
)
from .errors import (
    AlohaTFError,
    DomainError,
    GridTooCoarse,
    InvalidN,
    InvalidParameters,
    NoFeasiblePoint,
    OutOfRegime,
    ZeroVector,
)
from .grid import Grid
from .jain import (
    TradeoffCurve,
    TradeoffPoint,
    jain_curve,
    jain_curve_properties,
    jain_interpolation,
    jain_optimal_point,
    jain_optimal_point_inequality,
)
from .majorization import majorization_probe
from .model import (
    ControlVector,
    CriticalThroughputs,
    FairnessMeasure,
    RateVector,
    Regime,
    RestrictedControl,
    alpha_objective,
    critical_throughputs,
    expand_restricted,
    jain_fairness,
    rates_from_control,
    single_value_rate,
    throughput,
)
from .oracle import OracleResult, oracle_optimum
from .report import PropertyReport
from .simulator import SimReport, simulate_saturated

__version__ = "0.1.0"
