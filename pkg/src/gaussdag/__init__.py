"""Bayesian scoring and structure learning of Gaussian DAG models under a normal-Wishart prior."""

from .dag import DagStructure, enumerate_dags, equivalence_classes, equivalent, parse_dag, read_dag_file
from .dataset import Dataset, ingest_dataset, parse_dataset
from .errors import (
    CycleDetected,
    GaussDagError,
    MissingValue,
    NonFinite,
    NotPositiveDefinite,
    NumericalError,
    ParseError,
    VariableMismatch,
)
from .prior import (
    NormalWishartPrior,
    default_prior,
    load_prior,
    local_regression_prior,
    marginal_prior,
    posterior_update,
    sufficient_stats,
)
from .sampler import GaussianDagParams, sample_dataset, sample_normal_wishart, sample_wishart
from .score import Scorer, complete_log_marginal, dag_log_score, structure_posterior, subset_log_marginal
from .search import SearchConfig, greedy_search

__version__ = "0.1.0"
