"""Multi-object tracking by dense-structure search on a non-uniform hypergraph.

The package re-exports the compiled extension module: hypergraph
construction, dense-structure search, the near-online tracking pipeline,
structural-SVM weight training, CLEAR-MOT/IDF1 metrics and the synthetic
scenario generator.
"""

from ._ntrack import (
    Detection,
    Hypergraph,
    IoError,
    ValidationError,
    __version__,
    default_weights,
    evaluate,
    local_maximizer,
    scenario_names,
    search_all,
    structured_score,
    support_objective,
    synthesize,
    track,
    train_weights,
)

__all__ = [
    "Detection",
    "Hypergraph",
    "IoError",
    "ValidationError",
    "__version__",
    "default_weights",
    "evaluate",
    "local_maximizer",
    "scenario_names",
    "search_all",
    "structured_score",
    "support_objective",
    "synthesize",
    "track",
    "train_weights",
]
