from .windows import (WindowConfig, Scaler, DegenerateSignalError,
                      baseline_normalize, trace_features, make_windows)
from .lstm import LSTMClassifier, gradient_check
from .train import TrainConfig, TrainingDiverged, train
from .metrics import EvalReport, evaluate, predict_trace, StablePredictor
from .artifact import export_model, preload_model, ArtifactError
from .data import make_dataset, save_dataset, load_dataset, rest_calibration

__all__ = [
    "WindowConfig", "Scaler", "DegenerateSignalError", "baseline_normalize",
    "trace_features", "make_windows",
    "LSTMClassifier", "gradient_check",
    "TrainConfig", "TrainingDiverged", "train",
    "EvalReport", "evaluate", "predict_trace", "StablePredictor",
    "export_model", "preload_model", "ArtifactError",
    "make_dataset", "save_dataset", "load_dataset", "rest_calibration",
]
