"""Kazhdan-Wenzl cell systems on finite directed graphs."""

from .cells import CellSystem, GaugeTransform, VerificationReport, apply_gauge, verify
from .graph import DirectedGraph, FPData, enumerate_B_loops, enumerate_paths, enumerate_U_loops, fp_eigenvector
from .qarith import Params, galois_exponent, quantum_factorial, quantum_integer

__all__ = [
    "CellSystem",
    "DirectedGraph",
    "FPData",
    "GaugeTransform",
    "Params",
    "VerificationReport",
    "apply_gauge",
    "enumerate_B_loops",
    "enumerate_U_loops",
    "enumerate_paths",
    "fp_eigenvector",
    "galois_exponent",
    "quantum_factorial",
    "quantum_integer",
    "verify",
]
