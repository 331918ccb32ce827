"""Linear-ramp QAOA: problem generators, state-vector and noisy simulators, baselines and metrics."""

from .errors import (
    CapacityError,
    NormalizationError,
    ParameterError,
    UndefinedMetricError,
    UnsupportedModelError,
)
from .ising import GroundTruth, IsingModel, Normalization, QuboModel, brute_force, energy, qubo_to_ising
from .metrics import SampleSet, fit_scaling, mitigate_hd1
from .problems import Family, ProblemInstance, generate
from .schedule import LinearRampSchedule, build_schedule
from .simulator import run, success_probability

__version__ = "0.1.0"
