"""Differentiable search over quantum circuit ensembles that generate
classical network weights, with classification, time-series and RL trainers."""

__version__ = "0.1.0"

from .circuits import CircuitConfig, config_from_index, run_circuit
from .ensemble import EnsembleState, ensemble_backward, ensemble_forward
from .gradients import parameter_shift_vjp, prob_vjp
from .generator import QTGenerator
from .mapping import GeneratorSpec, MappingParams, generate_params, mapping_backward, required_qubits, total_trainable

__all__ = [
    "CircuitConfig",
    "EnsembleState",
    "GeneratorSpec",
    "MappingParams",
    "QTGenerator",
    "config_from_index",
    "ensemble_backward",
    "ensemble_forward",
    "generate_params",
    "mapping_backward",
    "parameter_shift_vjp",
    "prob_vjp",
    "required_qubits",
    "run_circuit",
    "total_trainable",
]
