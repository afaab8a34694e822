"""Quantum channel inverses, Drazin recovery and error-mitigation analysis."""

from .errors import NumericalError, QemtkError
from .matrep import ChannelRep, check_properties, fidelity, unitary_channel
from .inverses import classify, drazin_inverse, exact_inverse, moore_penrose
from .circuits import CircuitLayer, LayeredCircuit

__version__ = "0.1.0"
