"""Shift scheduling for part-time workers with GA-tuned fuzzy inference."""

__version__ = "0.1.0"

from .assignment import Schedule, build_schedule
from .fuzzy import Fis, FisPair, InputPartition, OutputPartition, RuleTable, TriangularMf
from .ga import Chromosome, GaConfig, decode, evolve, fitness
from .scenario import N_SLOTS, Scenario, WorkerSpec

__all__ = [
    "Chromosome",
    "Fis",
    "FisPair",
    "GaConfig",
    "InputPartition",
    "N_SLOTS",
    "OutputPartition",
    "RuleTable",
    "Scenario",
    "Schedule",
    "TriangularMf",
    "WorkerSpec",
    "build_schedule",
    "decode",
    "evolve",
    "fitness",
]
