"""Simulation and benchmarking of coherent versus measure-first learning of random phase states."""
from ._accel import NUMBA_ENABLED, backend_name
from .errors import CapExceededError, InvariantError
from .noise import NoiseChannelSpec
from .phase_states import BooleanFunction, Concept, concept_for_rule, random_function
from .rng import RandomSource

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED", "backend_name", "CapExceededError", "InvariantError", "NoiseChannelSpec",
    "BooleanFunction", "Concept", "concept_for_rule", "random_function", "RandomSource", "__version__",
]
