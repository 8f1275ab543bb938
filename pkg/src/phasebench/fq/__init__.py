"""The coherent (fully quantum) protocol: circuit, routing, simulation and visibility models."""
from .circuit import build_measurement_circuit, permute_outcomes, permute_state
from .devices import PRESETS, DeviceModel, get_preset
from .routing import RoutedCircuit, check_adjacency, route_circuit
from .simulate import FqResult, SimulationBudget, simulate_protocol
from .visibility import VisibilityModel, estimate_vm, fit_vm, predict_accuracy, readout_visibility

__all__ = [
    "build_measurement_circuit", "permute_outcomes", "permute_state", "PRESETS", "DeviceModel",
    "get_preset", "RoutedCircuit", "check_adjacency", "route_circuit", "FqResult",
    "SimulationBudget", "simulate_protocol", "VisibilityModel", "estimate_vm", "fit_vm",
    "predict_accuracy", "readout_visibility",
]
