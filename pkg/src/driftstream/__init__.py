"""Drift-adaptive online learning for data streams."""
from .core import (AdaptiveLearner, ConfigError, DataError, DriftSignal, DriftStreamError, InvariantError,
                   LabeledInstance, StreamSchema, argmax_class, make_rng, normalize, poisson_draw)
from .detectors import ADWIN, DDM
from .ensembles import (ARFClassifier, EnsembleConfig, LeveragingBaggingClassifier, SRPClassifier,
                        build_ensemble)
from .evaluation import ConfusionCounts, PrequentialReport, compute_metrics, holdout_split, prequential_run
from .pwpae import PWPAEClassifier, error_rate, performance_weight
from .sampling import KMeansClusterSampler, KMeansConfig, cluster_sample, kmeans_fit
from .streams import ConceptSwitchConfig, generate_bernoulli_stream, generate_concept_switch, open_csv_stream
from .trees import ExtremelyFastDecisionTreeClassifier, HoeffdingTreeClassifier, HoeffdingTreeConfig, hoeffding_bound

__all__ = [
    "ADWIN", "ARFClassifier", "AdaptiveLearner", "ConceptSwitchConfig", "ConfigError", "ConfusionCounts",
    "DDM", "DataError", "DriftSignal", "DriftStreamError", "EnsembleConfig",
    "ExtremelyFastDecisionTreeClassifier", "HoeffdingTreeClassifier", "HoeffdingTreeConfig", "InvariantError",
    "KMeansClusterSampler", "KMeansConfig", "LabeledInstance", "LeveragingBaggingClassifier",
    "PWPAEClassifier", "PrequentialReport", "SRPClassifier", "StreamSchema", "argmax_class", "build_ensemble",
    "cluster_sample", "compute_metrics", "error_rate", "generate_bernoulli_stream", "generate_concept_switch",
    "hoeffding_bound", "holdout_split", "kmeans_fit", "make_rng", "normalize", "open_csv_stream",
    "performance_weight", "poisson_draw", "prequential_run",
]
__version__ = "0.1.0"
