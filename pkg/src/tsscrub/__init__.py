"""tsscrub: multivariate time-series cleaning driven by hierarchical tabular RL.

Mines data-quality constraints from dirty data, detects missing/outlier/
violation cells, and composes an ordered pipeline of cleaning operators that
maximizes downstream task performance, without clean ground truth.
"""

__version__ = "0.1.0"

from tsscrub.core import (
    CleaningPipeline,
    ConstraintSet,
    CrossConstraint,
    EvaluationReport,
    OperatorDescriptor,
    QualityRates,
    TemporalConstraint,
    TimeSeriesFrame,
)

__all__ = [
    "CleaningPipeline",
    "ConstraintSet",
    "CrossConstraint",
    "EvaluationReport",
    "OperatorDescriptor",
    "QualityRates",
    "TemporalConstraint",
    "TimeSeriesFrame",
    "__version__",
]
