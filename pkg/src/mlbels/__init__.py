"""Streaming multi-label classification with broad-learning ensembles.

Typical use::

    from mlbels import MLBelsModel, ModelConfig, run_prequential
    from mlbels.data import parse_synthetic, generate_synthetic

    stream = generate_synthetic(parse_synthetic("A:10:20"))
    model = MLBelsModel(ModelConfig(), stream.n_features, stream.n_labels)
    report = run_prequential(model, stream.chunks(500))
    print(report.summary())
"""

from .errors import ConfigurationError, MLBelsError, NumericalError, ParseError, StreamError
from .evaluation import PrequentialReport, example_accuracy, example_f1, micro_f1, run_prequential
from .linalg import RidgeAccumulator, accumulate, ridge_solve
from .mapping import BroadMapper, new_mapper
from .model import MLBelsModel, ModelConfig, Variant

__version__ = "0.1.0"

__all__ = [
    "BroadMapper",
    "ConfigurationError",
    "MLBelsError",
    "MLBelsModel",
    "ModelConfig",
    "NumericalError",
    "ParseError",
    "PrequentialReport",
    "RidgeAccumulator",
    "StreamError",
    "Variant",
    "accumulate",
    "example_accuracy",
    "example_f1",
    "micro_f1",
    "new_mapper",
    "ridge_solve",
    "run_prequential",
]
