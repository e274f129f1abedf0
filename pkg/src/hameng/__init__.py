"""Average Hamiltonian engineering for global-pulse spin ensembles."""

from .irrep import IrreducibleForm, SpinCoefficients, decompose, reconstruct
from .rotgroup import RotationGroup, clifford_group, icosahedral_group, named_group
from .synth import PulseSequence, assemble_sequence, build_lp, solve_lp

__version__ = "0.1.0"

__all__ = [
    "IrreducibleForm",
    "SpinCoefficients",
    "decompose",
    "reconstruct",
    "RotationGroup",
    "clifford_group",
    "icosahedral_group",
    "named_group",
    "PulseSequence",
    "assemble_sequence",
    "build_lp",
    "solve_lp",
]
