"""Quantum hidden Markov models: simulation, analysis and learning."""

__version__ = "0.1.0"

from .channels import KrausChannel
from .circuits import Circuit, GateSpec
from .classical import ClassicalHmm
from .lang import DistributionTable, HankelMatrix
from .models import QhmmKraus, QhmmUnitary

__all__ = [
    "__version__",
    "KrausChannel",
    "Circuit",
    "GateSpec",
    "ClassicalHmm",
    "DistributionTable",
    "HankelMatrix",
    "QhmmKraus",
    "QhmmUnitary",
]
