"""Layered noisy circuits and the outputs of the different recovery schemes.

Layer ``i`` applies the ideal gate ``U_i`` followed by the noise ``N_i``; the
estimated noise ``N~_i`` is what characterization handed us. Layers are listed
in execution order, so the first layer acts first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import tolerances as tol
from .errors import (
    DimensionMismatch,
    NonInvertibleChannel,
    NonInvertibleEstimate,
    NonInvertibleNoise,
    NonUnitaryInput,
    ShapeMismatch,
)
from .inverses import drazin_inverse, exact_inverse
from .matrep import ChannelRep, _as_matrix, as_channel, is_unitary_channel


@dataclass(frozen=True)
class CircuitLayer:
    ideal: ChannelRep
    true_noise: ChannelRep
    estimated_noise: ChannelRep

    def __post_init__(self):
        for name in ("ideal", "true_noise", "estimated_noise"):
            object.__setattr__(self, name, as_channel(getattr(self, name)))
        dims = {(m.dim_in, m.dim_out) for m in (self.ideal, self.true_noise, self.estimated_noise)}
        if len(dims) != 1 or not self.ideal.is_square:
            raise DimensionMismatch(f"layer maps have inconsistent dimensions {sorted(dims)}")
        if not is_unitary_channel(self.ideal):
            raise NonUnitaryInput("ideal gate of a layer must be a unitary conjugation")

    @property
    def dim(self) -> int:
        return self.ideal.dim_in


@dataclass(frozen=True)
class LayeredCircuit:
    layers: tuple[CircuitLayer, ...]
    input: np.ndarray

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ShapeMismatch("a circuit needs at least one layer")
        if len({layer.dim for layer in layers}) != 1:
            raise DimensionMismatch("layers act on different dimensions")
        rho = _as_matrix(self.input, "input state")
        if rho.shape != (layers[0].dim,) * 2:
            raise DimensionMismatch(f"input state shape {rho.shape} does not match layer dimension")
        rho.setflags(write=False)
        object.__setattr__(self, "layers", layers)
        object.__setattr__(self, "input", rho)

    @property
    def dim(self) -> int:
        return self.layers[0].dim

    def __len__(self):
        return len(self.layers)

    def with_input(self, rho) -> "LayeredCircuit":
        return LayeredCircuit(self.layers, rho)


class MitigatedState(NamedTuple):
    """Output of a recovery scheme; may fail to be a state."""

    matrix: np.ndarray
    valid: bool  # False when the smallest eigenvalue is below -tol_psd
    min_eigenvalue: float
    trace: complex


def flag_state(A, tol_psd: float = tol.TOL_PSD) -> MitigatedState:
    A = np.asarray(A)
    herm = (A + A.conj().T) / 2
    lam = float(np.linalg.eigvalsh(herm).min())
    return MitigatedState(A, lam >= -tol_psd, lam, complex(np.trace(A)))


def _chain(maps: Sequence[ChannelRep], d: int) -> ChannelRep:
    """Compose ``maps`` given in execution order."""
    M = np.eye(d * d, dtype=complex)
    for m in maps:
        M = m.natural @ M
    return ChannelRep.from_natural(M, d, d)


def ideal_unitary(c: LayeredCircuit) -> ChannelRep:
    """``U_n o ... o U_1``."""
    return _chain([layer.ideal for layer in c.layers], c.dim)


def noisy_map(c: LayeredCircuit) -> ChannelRep:
    """``N_n o U_n o ... o N_1 o U_1``."""
    return _chain([m for layer in c.layers for m in (layer.ideal, layer.true_noise)], c.dim)


def ideal_output(c: LayeredCircuit) -> np.ndarray:
    rho = c.input
    for layer in c.layers:
        rho = layer.ideal(rho)
    return rho


def noisy_output(c: LayeredCircuit) -> np.ndarray:
    rho = c.input
    for layer in c.layers:
        rho = layer.true_noise(layer.ideal(rho))
    return rho


def _invert(ch: ChannelRep, error, drazin_fallback: bool) -> ChannelRep:
    try:
        return exact_inverse(ch)
    except NonInvertibleChannel as exc:
        if drazin_fallback:
            return drazin_inverse(ch, cross_check=False)
        raise error(str(exc)) from exc


def physical_inverse_output(c: LayeredCircuit) -> MitigatedState:
    """Apply ``N~_i^-1`` right after every noisy layer."""
    rho = c.input
    for layer in c.layers:
        inv = _invert(layer.estimated_noise, NonInvertibleEstimate, False)
        rho = inv(layer.true_noise(layer.ideal(rho)))
    return flag_state(rho)


def reversal(c: LayeredCircuit, which: str = "estimated", *, drazin_fallback: bool = False) -> ChannelRep:
    """``U_1^dag o N_1^-1 o ... o U_n^dag o N_n^-1`` built from true or estimated noise.

    With ``drazin_fallback`` a non-invertible noise is replaced by its Drazin
    inverse instead of raising.
    """
    if which == "ideal":
        noises, err = [layer.true_noise for layer in c.layers], NonInvertibleNoise
    elif which == "estimated":
        noises, err = [layer.estimated_noise for layer in c.layers], NonInvertibleEstimate
    else:
        raise ValueError(f"which must be 'ideal' or 'estimated', got {which!r}")
    steps = []
    for layer, noise in zip(reversed(c.layers), reversed(noises)):
        steps += [_invert(noise, err, drazin_fallback), layer.ideal.adjoint()]
    return _chain(steps, c.dim)


def em_output(c: LayeredCircuit, *, drazin_fallback: bool = False) -> MitigatedState:
    """``U_n...1 o R~`` applied to the noisy output."""
    R = reversal(c, "estimated", drazin_fallback=drazin_fallback)
    return flag_state(ideal_unitary(c)(R(noisy_output(c))))


def effective_recovery_output(c: LayeredCircuit, effective_inverse: ChannelRep) -> MitigatedState:
    """A single recovery map applied to the noisy output."""
    effective_inverse = as_channel(effective_inverse)
    if (effective_inverse.dim_in, effective_inverse.dim_out) != (c.dim, c.dim):
        raise DimensionMismatch("recovery map does not match the circuit dimension")
    return flag_state(effective_inverse(noisy_output(c)))


def single_layer(ideal, true_noise, estimated_noise=None, rho_in=None) -> LayeredCircuit:
    """Convenience constructor for a one-layer circuit."""
    ideal = as_channel(ideal)
    d = ideal.dim_in
    if estimated_noise is None:
        estimated_noise = true_noise
    if rho_in is None:
        rho_in = np.eye(d) / d
    return LayeredCircuit((CircuitLayer(ideal, true_noise, estimated_noise),), rho_in)


