"""Monitoring of spatio-temporal reach/escape logic and unsupervised formula mining."""

from .boxtree import (
    ClusterFormula,
    DecisionTree,
    HyperBox,
    box_to_formula,
    cluster_formulas,
    fit_tree,
    kfold_cv,
    paths_to_boxes,
    prune_search,
)
from .clustering import ClusterAssignment, ahc_complete, choose_k, silhouette
from .errors import (
    ConfigError,
    DataError,
    EvaluationError,
    FormulaSyntaxError,
    ProjectionError,
    StrelMinerError,
    TemplateError,
)
from .formula import desugar, instantiate, to_text
from .monitor import Monitor, robustness, satisfies
from .parser import parse
from .pipeline import PipelineConfig, run
from .pstrel import PstrelTemplate, infer_polarity, project_all, project_lex
from .spatial import (
    Location,
    SpatialModel,
    build_delta,
    build_enhanced_msg,
    build_full,
    build_model,
    build_mst,
    haversine,
    induced_distance,
)
from .traces import SpatioTemporalTrace, clean, generate_food_court, load_traces

__all__ = [
    "ClusterAssignment",
    "ClusterFormula",
    "ConfigError",
    "DataError",
    "DecisionTree",
    "EvaluationError",
    "FormulaSyntaxError",
    "HyperBox",
    "Location",
    "Monitor",
    "PipelineConfig",
    "ProjectionError",
    "PstrelTemplate",
    "SpatialModel",
    "SpatioTemporalTrace",
    "StrelMinerError",
    "TemplateError",
    "ahc_complete",
    "box_to_formula",
    "build_delta",
    "build_enhanced_msg",
    "build_full",
    "build_model",
    "build_mst",
    "choose_k",
    "clean",
    "cluster_formulas",
    "desugar",
    "fit_tree",
    "generate_food_court",
    "haversine",
    "induced_distance",
    "infer_polarity",
    "instantiate",
    "kfold_cv",
    "load_traces",
    "parse",
    "paths_to_boxes",
    "project_all",
    "project_lex",
    "prune_search",
    "robustness",
    "run",
    "satisfies",
    "silhouette",
    "to_text",
]

__version__ = "0.1.0"
