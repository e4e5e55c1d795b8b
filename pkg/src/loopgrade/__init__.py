"""Classify PID load-disturbance rejection loops on SOPDT-like processes as OK or NOK."""

from .errors import LoopgradeError
from .features import FEATURE_IDS, FeatureVector, extract_features
from .frequency import MarginPair, margins
from .process import (NormalizedProcess, PidTuning, RejectionResponse, SopdtModel, denormalize,
                      normalize, simulate_rejection)

__version__ = "0.1.0"

__all__ = [
    "FEATURE_IDS", "FeatureVector", "LoopgradeError", "MarginPair", "NormalizedProcess",
    "PidTuning", "RejectionResponse", "SopdtModel", "denormalize", "extract_features",
    "margins", "normalize", "simulate_rejection",
]
