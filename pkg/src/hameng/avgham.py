"""Toggling frames and first-order average Hamiltonians.

Two independent routes to the same answer:

* coefficient level: one-spin vectors and beta go through ``S1`` (3x3),
  gamma through ``S2`` (5x5), alpha is untouched;
* operator level: ``sum_k tau_k/T  V_k^dag H V_k`` with ``V_k`` the accumulated
  spin unitary of frame ``k`` applied to every spin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .irrep import IrreducibleForm, SpinCoefficients
from .numerics import commutator, global_operator, operator_norm
from .rotgroup import RotationElement, rep5
from .synth import PulseSequence


@dataclass(frozen=True)
class Frame:
    r3: np.ndarray
    su2: np.ndarray
    duration: float


@dataclass(frozen=True)
class ToggledFrameSet:
    frames: tuple
    total_time: float

    def __len__(self):
        return len(self.frames)

    def __iter__(self):
        return iter(self.frames)


@dataclass(frozen=True)
class EngineeredTransform:
    S1: np.ndarray
    S2: np.ndarray


def toggling_frames(seq: PulseSequence, tol: float = 1e-9) -> ToggledFrameSet:
    """Split a cyclic sequence into frames between consecutive pulses.

    Frame ``k`` carries the product of all pulses applied before it; interval
    lengths may be zero and are kept.
    """
    if not seq.is_cyclic(tol):
        raise ValueError("sequence is not cyclic: pulse product differs from identity")
    frames = []
    q = np.eye(3)
    v = np.eye(2, dtype=complex)
    t_prev = 0.0
    for pulse in seq.pulses:
        frames.append(Frame(q, v, pulse.time - t_prev))
        q = q @ pulse.frame_step()
        v = pulse.unitary() @ v
        t_prev = pulse.time
    frames.append(Frame(q, v, seq.cycle_time - t_prev))
    return ToggledFrameSet(tuple(frames), seq.cycle_time)


def frames_from_rotations(rotations, durations, unitaries=None) -> ToggledFrameSet:
    """Frame set straight from coefficient rotations (no pulse bookkeeping)."""
    frames = []
    for k, (r, tau) in enumerate(zip(rotations, durations)):
        su2 = RotationElement.from_matrix(r).su2 if unitaries is None else unitaries[k]
        frames.append(Frame(np.asarray(r, float), su2, float(tau)))
    return ToggledFrameSet(tuple(frames), float(sum(durations)))


def engineered_transform(frames: ToggledFrameSet) -> EngineeredTransform:
    s1 = np.zeros((3, 3))
    s2 = np.zeros((5, 5))
    for f in frames:
        w = f.duration / frames.total_time
        s1 += w * f.r3
        s2 += w * rep5(f.r3)
    return EngineeredTransform(s1, s2)


def average_coefficients(coeffs: SpinCoefficients, t: EngineeredTransform) -> SpinCoefficients:
    fields = coeffs.fields @ t.S1.T
    pairs = {
        key: IrreducibleForm(form.alpha, t.S1 @ form.beta, t.S2 @ form.gamma)
        for key, form in coeffs.pairs.items()
    }
    return SpinCoefficients(coeffs.n_spins, fields, pairs)


def frame_hamiltonians(h: np.ndarray, frames: ToggledFrameSet, n_spins: int):
    h = np.asarray(h, dtype=complex)
    if h.shape != (2**n_spins, 2**n_spins):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match {n_spins} spins")
    out = []
    for f in frames:
        v = global_operator(f.su2, n_spins)
        out.append(v.conj().T @ h @ v)
    return out


def average_operator(h: np.ndarray, frames: ToggledFrameSet, n_spins: int) -> np.ndarray:
    avg = np.zeros_like(np.asarray(h, dtype=complex))
    for f, hk in zip(frames, frame_hamiltonians(h, frames, n_spins)):
        avg += (f.duration / frames.total_time) * hk
    return 0.5 * (avg + avg.conj().T)


def next_magnus_norm(h: np.ndarray, frames: ToggledFrameSet, n_spins: int) -> float:
    """Spectral norm of the second-order average Hamiltonian term.

    ``-i/(2T) sum_{k<l} tau_k tau_l [H_l, H_k]`` over the toggling-frame
    Hamiltonians. Vanishes for time-symmetric frame sequences.
    """
    hks = frame_hamiltonians(h, frames, n_spins)
    taus = [f.duration for f in frames]
    acc = np.zeros_like(hks[0])
    running = np.zeros_like(hks[0])
    for tau, hk in zip(taus, hks):
        if tau:
            acc += tau * commutator(hk, running)
            running = running + tau * hk
    return operator_norm(-0.5j / frames.total_time * acc)
