"""Interpretable causal transformation models on DAGs.

Each node of a user-declared DAG gets a monotone transformation of its
conditional distribution onto a standard-logistic latent scale; parents
act through linear shifts, learned shift curves, or learned intercepts.
The fitted graph answers observational, interventional, and
counterfactual queries from a single maximum-likelihood fit.
"""

from .causal import (
    OddsRatioResult,
    SampleSet,
    TreatmentEffect,
    abduct_noise,
    counterfactual,
    odds_ratio_from_counts,
    odds_ratio_from_samples,
    predicted_odds_ratio,
    sample_interventional,
    sample_observational,
    treatment_effect,
)
from .errors import TramDagError
from .graph import (
    DagSpec,
    EffectKind,
    NodeDecl,
    NodeKind,
    parse_dag_spec,
    post_intervention_graph,
    serialize_dag_spec,
    strict_descendants,
    topological_order,
)
from .model import (
    Dataset,
    FitHistory,
    TrainConfig,
    TramDag,
    TramNode,
    extract_coefficients,
    extract_shift_curve,
    fit,
    initialize_model,
    load_model,
    nll_dataset,
    nll_row,
    save_model,
)

__version__ = "0.1.0"

__all__ = [
    "DagSpec",
    "Dataset",
    "EffectKind",
    "FitHistory",
    "NodeDecl",
    "NodeKind",
    "OddsRatioResult",
    "SampleSet",
    "TrainConfig",
    "TramDag",
    "TramDagError",
    "TramNode",
    "TreatmentEffect",
    "abduct_noise",
    "counterfactual",
    "extract_coefficients",
    "extract_shift_curve",
    "fit",
    "initialize_model",
    "load_model",
    "nll_dataset",
    "nll_row",
    "odds_ratio_from_counts",
    "odds_ratio_from_samples",
    "parse_dag_spec",
    "post_intervention_graph",
    "predicted_odds_ratio",
    "sample_interventional",
    "sample_observational",
    "save_model",
    "serialize_dag_spec",
    "strict_descendants",
    "topological_order",
    "treatment_effect",
]
