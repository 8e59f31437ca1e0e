"""Executable duality between quantization of events and measurement of states."""

from .duality import (
    MeasurementMap,
    Povm,
    QuantizationMap,
    measure,
    povm_from_measurement,
    povm_from_quantization,
    quantize,
    random_povm,
    verify_duality_square,
)
from .effects import ClassicalEffect, OutcomeSpace, QuantumEffect, effect_metric, neg, ovee, scalar
from .states import DensityMatrix, ProbabilityVector, busch_extract, convex_combine, expectation, riesz_extract

__all__ = [
    "ClassicalEffect",
    "DensityMatrix",
    "MeasurementMap",
    "OutcomeSpace",
    "Povm",
    "ProbabilityVector",
    "QuantizationMap",
    "QuantumEffect",
    "busch_extract",
    "convex_combine",
    "effect_metric",
    "expectation",
    "measure",
    "neg",
    "ovee",
    "povm_from_measurement",
    "povm_from_quantization",
    "quantize",
    "random_povm",
    "riesz_extract",
    "scalar",
    "verify_duality_square",
]

__version__ = "0.1.0"
