"""Epidemic exit-strategy engine.

Combines a SEI-HCRD compartmental model, a Hill-decay R_t fit, a neural
R_t surrogate over mobility/demographic features, Shapley attributions,
and an NSGA-II search for Pareto-optimal mobility-restriction schedules
under an ICU-capacity constraint.
"""

from . import epi, ingest, network, nsga, rt, shapley, stats, strategy, uncertainty
from .epi import CompartmentState, EpiParams, RtSeries, Trajectory
from .errors import ExitsimError
from .ingest import Dataset, Demographics, FeatureRow, MobilityRecord
from .network import FeedForwardRegressor, NetworkConfig, TrainedPredictor
from .nsga import ParetoFront, SearchConfig
from .rt import FitResult, HillParams, ObservedSeries
from .strategy import CountryContext, PolicySchedule, StrategyOutcome

__version__ = "0.1.0"

__all__ = [
    "CompartmentState",
    "CountryContext",
    "Dataset",
    "Demographics",
    "EpiParams",
    "ExitsimError",
    "FeatureRow",
    "FeedForwardRegressor",
    "FitResult",
    "HillParams",
    "MobilityRecord",
    "NetworkConfig",
    "ObservedSeries",
    "ParetoFront",
    "PolicySchedule",
    "RtSeries",
    "SearchConfig",
    "StrategyOutcome",
    "TrainedPredictor",
    "Trajectory",
    "epi",
    "ingest",
    "network",
    "nsga",
    "rt",
    "shapley",
    "stats",
    "strategy",
    "uncertainty",
]
