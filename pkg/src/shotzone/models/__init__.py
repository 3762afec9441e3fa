"""Model ladder, training, evaluation and bundle persistence."""

from .bundle import ModelBundle, load_bundle, save_bundle
from .nets import Batch, FfnModel, LstmModel, MODEL_KINDS, NaiveModel, PersonalizedLstmModel, make_model
from .train import (
    EvalReport,
    Experiment,
    TrainConfig,
    evaluate,
    make_experiment,
    split_chronological,
    split_index,
    train_model,
)

__all__ = [
    "Batch",
    "EvalReport",
    "Experiment",
    "FfnModel",
    "LstmModel",
    "MODEL_KINDS",
    "ModelBundle",
    "NaiveModel",
    "PersonalizedLstmModel",
    "TrainConfig",
    "evaluate",
    "load_bundle",
    "make_experiment",
    "make_model",
    "save_bundle",
    "split_chronological",
    "split_index",
    "train_model",
]
