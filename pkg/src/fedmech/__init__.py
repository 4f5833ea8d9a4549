"""Mechanism-design engine and simulator for incentive-aware federated learning."""
__version__ = "0.1.0"

from fedmech.accuracy import AccuracyForm, AccuracyModel, ServerAccuracyModel
from fedmech.device import Device, LocalOptimum, local_optimum
from fedmech.equilibrium import EquilibriumOutcome, SolveOptions, best_response, solve
from fedmech.errors import FedMechError
from fedmech.mechanism import MechanismConfig, RewardBundle, audit_ir, settle
from fedmech.payoff import Payoff, PayoffFamily
from fedmech.shaping import ShapingConfig, shaped_optimum
from fedmech.scenarios import ScenarioSpec, cifar10_spec, mnist_spec

__all__ = [
    "AccuracyForm", "AccuracyModel", "ServerAccuracyModel", "Device", "LocalOptimum",
    "local_optimum", "EquilibriumOutcome", "SolveOptions", "best_response", "solve",
    "FedMechError", "MechanismConfig", "RewardBundle", "audit_ir", "settle", "Payoff",
    "PayoffFamily", "ShapingConfig", "shaped_optimum", "ScenarioSpec", "cifar10_spec",
    "mnist_spec", "__version__",
]
