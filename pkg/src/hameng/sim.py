"""Exact state-vector dynamics of small NV-like spin ensembles under pulse sequences.

Frequency convention: every coefficient given in Hz enters the evolution as
``exp(-i 2 pi h t O)``; Hamiltonian matrices returned here are in rad/s.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .irrep import IrreducibleForm, SpinCoefficients
from .numerics import check_spin_count, embed, expm_hermitian, global_operator, pauli
from .rotgroup import spin_unitary
from .synth import PulseSequence, composite_pulse

ELECTRON_GYRO_HZ_PER_T = 2.8025e10
TWO_PI = 2.0 * np.pi

MODES = ("instantaneous", "composite", "off_resonant")


@dataclass
class EnsembleSpec:
    """Spins coupled by ``omega_ab (s_a.s_b - 2 sz_a sz_b)`` in a field ``bz``.

    ``couplings`` (Hz) is symmetric with zero diagonal; ``bz`` is in tesla and
    ``gyro`` in Hz/T.
    """

    n_spins: int
    couplings: np.ndarray
    bz: float = 0.0
    gyro: float = ELECTRON_GYRO_HZ_PER_T
    positions: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        check_spin_count(self.n_spins)
        self.couplings = np.asarray(self.couplings, dtype=float)
        if self.couplings.shape != (self.n_spins, self.n_spins):
            raise ValueError("coupling matrix must be N x N")
        if not np.allclose(self.couplings, self.couplings.T, rtol=0, atol=1e-12):
            raise ValueError("coupling matrix must be symmetric")
        if np.any(np.diag(self.couplings) != 0):
            raise ValueError("coupling matrix must have zero diagonal")

    @property
    def zeeman_hz(self) -> float:
        return self.gyro * self.bz

    def coefficients(self) -> SpinCoefficients:
        """Coefficient form (Hz) of the ensemble Hamiltonian."""
        fields = np.zeros((self.n_spins, 3))
        fields[:, 2] = self.zeeman_hz
        pairs = {}
        for a in range(self.n_spins):
            for b in range(a + 1, self.n_spins):
                w = self.couplings[a, b]
                if w:
                    pairs[(a, b)] = IrreducibleForm(w / 3.0, np.zeros(3), 2.0 * w / 3.0 * np.array([1, 1, 0, 0, 0]))
        return SpinCoefficients(self.n_spins, fields, pairs)

    def to_json(self) -> dict:
        out = {
            "n_spins": self.n_spins,
            "couplings_hz": self.couplings.tolist(),
            "bz_t": self.bz,
            "gyro_hz_per_t": self.gyro,
        }
        if self.seed is not None:
            out["seed"] = self.seed
        return out

    @classmethod
    def from_positions(cls, positions, coupling_const: float, **kwargs) -> "EnsembleSpec":
        positions = np.asarray(positions, dtype=float)
        return cls(len(positions), couplings_from_positions(positions, coupling_const), positions=positions, **kwargs)


def couplings_from_positions(positions, coupling_const: float) -> np.ndarray:
    """omega_ab = J (1 - 3 cos^2 theta_ab) / r_ab^3, theta measured from z."""
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    out = np.zeros((n, n))
    for a in range(n):
        for b in range(a + 1, n):
            d = pos[b] - pos[a]
            r = np.linalg.norm(d)
            if r == 0.0:
                raise ValueError(f"spins {a} and {b} coincide")
            cos2 = (d[2] / r) ** 2
            out[a, b] = out[b, a] = coupling_const * (1.0 - 3.0 * cos2) / r**3
    return out


def random_ensemble(n_spins: int, typical_hz: float = 60.0, bz: float = 2e-9, seed: int = 0) -> EnsembleSpec:
    """Couplings with random sign and magnitude uniform in [0.5, 1.5] x typical."""
    rng = np.random.default_rng(seed)
    w = np.zeros((n_spins, n_spins))
    for a in range(n_spins):
        for b in range(a + 1, n_spins):
            w[a, b] = w[b, a] = typical_hz * rng.uniform(0.5, 1.5) * rng.choice([-1.0, 1.0])
    return EnsembleSpec(n_spins, w, bz=bz, seed=seed)


def build_hamiltonian(spec: EnsembleSpec) -> np.ndarray:
    """Ensemble Hamiltonian in rad/s, built term by term from Pauli products."""
    n = spec.n_spins
    sig = [[embed(pauli(i), a, n) for i in range(3)] for a in range(n)]
    h = np.zeros((2**n, 2**n), dtype=complex)
    for a in range(n):
        h += spec.zeeman_hz * sig[a][2]
        for b in range(a + 1, n):
            w = spec.couplings[a, b]
            if w:
                h += w * (sig[a][0] @ sig[b][0] + sig[a][1] @ sig[b][1] - sig[a][2] @ sig[b][2])
    return TWO_PI * h


def zeeman_hamiltonian(spec: EnsembleSpec, coefficient: float = 1.0) -> np.ndarray:
    """coefficient * gamma Bz sum_a sz_a, in rad/s."""
    n = spec.n_spins
    return TWO_PI * coefficient * spec.zeeman_hz * sum(embed(pauli("z"), a, n) for a in range(n))


_BLOCH = {
    "+x": (np.pi / 2, 0.0),
    "-x": (np.pi / 2, np.pi),
    "+y": (np.pi / 2, np.pi / 2),
    "-y": (np.pi / 2, -np.pi / 2),
    "+z": (0.0, 0.0),
    "-z": (np.pi, 0.0),
}


def product_state(n_spins: int, initial="+x") -> np.ndarray:
    """Product state with every spin along a Bloch direction.

    ``initial`` is one of '+x', '-x', '+y', '-y', '+z', '-z' or a
    ``(theta, phi)`` pair of polar angles.
    """
    theta, phi = _BLOCH[initial] if isinstance(initial, str) else initial
    one = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
    psi = one
    for _ in range(n_spins - 1):
        psi = np.kron(psi, one)
    return psi


@dataclass
class Trajectory:
    """States sampled once per cycle (after cycles 1..n)."""

    times: np.ndarray
    states: np.ndarray
    n_spins: int
    initial: np.ndarray
    spin: np.ndarray = field(init=False)

    def __post_init__(self):
        self.spin = ensemble_spin(self.states, self.n_spins)

    @property
    def sx(self):
        return self.spin[:, 0]

    @property
    def sy(self):
        return self.spin[:, 1]

    @property
    def sz(self):
        return self.spin[:, 2]


def ensemble_spin(states: np.ndarray, n_spins: int) -> np.ndarray:
    """Ensemble-averaged <sigma_x>, <sigma_y>, <sigma_z> for each state row."""
    states = np.atleast_2d(states)
    out = np.zeros((len(states), 3))
    for i in range(3):
        total = sum(embed(pauli(i), a, n_spins) for a in range(n_spins)) / n_spins
        out[:, i] = np.real(np.einsum("ti,ij,tj->t", states.conj(), total, states))
    return out


def _resolve_hamiltonian(system, n_spins):
    if isinstance(system, EnsembleSpec):
        return build_hamiltonian(system), system.n_spins
    h = np.asarray(system, dtype=complex)
    if n_spins is None:
        n_spins = int(round(np.log2(h.shape[0])))
    if h.shape != (2**n_spins, 2**n_spins):
        raise ValueError(f"Hamiltonian shape {h.shape} does not match {n_spins} spins")
    return h, n_spins


def cycle_propagator(h: np.ndarray, seq: PulseSequence, n_spins: int, mode: str = "instantaneous"):
    """One-cycle propagator and the physical cycle duration.

    In off-resonant mode each pulse occupies its drive duration on top of the
    nominal free-evolution windows, so the cycle lasts ``T + sum(durations)``.
    """
    if mode not in MODES:
        raise ValueError(f"unknown evolution mode {mode!r}; expected one of {MODES}")
    if not seq.is_cyclic():
        raise ValueError("sequence is not cyclic")
    dim = h.shape[0]
    u = np.eye(dim, dtype=complex)
    t_prev = 0.0
    duration = seq.cycle_time
    for pulse in seq.pulses:
        dt = pulse.time - t_prev
        if dt > 0:
            u = expm_hermitian(h, dt) @ u
        t_prev = pulse.time
        if mode == "instantaneous":
            kick = global_operator(pulse.unitary(), n_spins)
        elif mode == "composite":
            realization = pulse.composite or composite_pulse(pulse.axis, pulse.angle)
            kick = np.eye(dim, dtype=complex)
            for axis, angle in realization.subpulses:
                kick = global_operator(spin_unitary(axis, angle), n_spins) @ kick
        else:
            drive = pulse.off_resonant
            if drive is None:
                raise ValueError("off-resonant mode needs drive parameters on every pulse")
            ctrl = sum(embed(drive.control_hamiltonian(), a, n_spins) for a in range(n_spins))
            kick = expm_hermitian(h + ctrl, drive.duration_s)
            duration += drive.duration_s
        u = kick @ u
    tail = seq.cycle_time - t_prev
    if tail > 0:
        u = expm_hermitian(h, tail) @ u
    return u, duration


def evolve(system, seq: PulseSequence, mode: str = "instantaneous", cycles: int = 1, initial="+x", n_spins=None) -> Trajectory:
    """Repeat ``seq`` for ``cycles`` cycles starting from a product state.

    ``system`` is an :class:`EnsembleSpec` or a Hamiltonian matrix in rad/s.
    """
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    h, n_spins = _resolve_hamiltonian(system, n_spins)
    u, duration = cycle_propagator(h, seq, n_spins, mode)
    psi0 = product_state(n_spins, initial) if not isinstance(initial, np.ndarray) else initial.astype(complex)
    states = np.empty((cycles, len(psi0)), dtype=complex)
    psi = psi0
    for k in range(cycles):
        psi = u @ psi
        states[k] = psi
    times = duration * np.arange(1, cycles + 1)
    return Trajectory(times, states, n_spins, psi0)


def evolve_static(h: np.ndarray, times, initial="+x", n_spins=None) -> Trajectory:
    """Evolution under a time-independent Hamiltonian (rad/s) sampled at ``times``."""
    h, n_spins = _resolve_hamiltonian(h, n_spins)
    psi0 = product_state(n_spins, initial) if not isinstance(initial, np.ndarray) else initial.astype(complex)
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    coeff = evecs.conj().T @ psi0
    times = np.asarray(times, dtype=float)
    states = (evecs @ (np.exp(-1j * np.outer(evals, times)) * coeff[:, None])).T
    return Trajectory(times, states, n_spins, psi0)


def fidelity_trace(traj: Trajectory, reference: Trajectory) -> np.ndarray:
    """|<psi_ref(t)|psi(t)>|^2 at the shared sample times."""
    if traj.times.shape != reference.times.shape or not np.allclose(traj.times, reference.times, rtol=1e-12, atol=0):
        raise ValueError("trajectories are sampled on different time grids")
    return np.abs(np.einsum("ti,ti->t", reference.states.conj(), traj.states)) ** 2


def extract_precession_frequency(sx, sy, times) -> float:
    """Frequency (Hz) of the rotation of (sx, sy) in the xy plane.

    The phase ``atan2(-sy, sx)`` is unwrapped and fit with a straight line; a
    signal ``sx = cos(2 pi f t), sy = -sin(2 pi f t)`` gives ``+f``.
    """
    sx, sy, times = (np.asarray(a, dtype=float) for a in (sx, sy, times))
    if len(times) < 8:
        raise ValueError("insufficient samples: need at least 8")
    amplitude = np.hypot(sx, sy)
    if np.min(amplitude) < 1e-6:
        raise ValueError("no detectable rotation: transverse signal vanishes")
    phase = np.unwrap(np.arctan2(-sy, sx))
    slope, _ = np.polyfit(times, phase, 1)
    if abs(slope) * (times[-1] - times[0]) < 1e-6:
        raise ValueError("no detectable rotation")
    return float(slope / TWO_PI)


def write_csv(path, traj: Trajectory, fidelity=None) -> None:
    """Columns t_s, fidelity, sx, sy, sz; one row per sample."""
    fid = np.full(len(traj.times), np.nan) if fidelity is None else np.asarray(fidelity)
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_s", "fidelity", "sx", "sy", "sz"])
        for t, f, (x, y, z) in zip(traj.times, fid, traj.spin):
            writer.writerow([repr(float(t)), repr(float(f)), repr(float(x)), repr(float(y)), repr(float(z))])


def read_csv(path) -> dict:
    with Path(path).open() as fh:
        rows = list(csv.DictReader(fh))
    return {key: np.array([float(r[key]) for r in rows]) for key in ("t_s", "fidelity", "sx", "sy", "sz")}
