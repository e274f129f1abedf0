"""Named synthesis problems for the NV dipolar Hamiltonian.

Coefficients are dimensionless (gamma*Bz = 1, omega = 1): the LP is invariant
under rescaling the input and target blocks together, so only directions matter.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .irrep import IrreducibleForm, SpinCoefficients
from .rotgroup import RotationGroup, named_group
from .synth import (
    MAX_SCALE,
    PINNED,
    LPProblem,
    LPSolution,
    PulseSequence,
    assemble_sequence,
    build_lp,
    sequence_from_pulses,
    solve_lp,
)

NV_GAMMA = 2.0 / 3.0 * np.array([1.0, 1.0, 0.0, 0.0, 0.0])
Z_HAT = np.array([0.0, 0.0, 1.0])
N_FREE = ("n_x", "n_y", "n_z")


def nv_input(zeeman: float = 1.0, omega: float = 1.0) -> np.ndarray:
    """Stacked [n; gamma] of one NV pair: n = zeeman z, gamma = 2/3 omega [1,1,0,0,0]."""
    return np.concatenate([zeeman * Z_HAT, omega * NV_GAMMA])


def nv_coefficients(n_spins: int = 2, zeeman: float = 1.0, omega: float = 1.0) -> SpinCoefficients:
    fields = np.tile(zeeman * Z_HAT, (n_spins, 1))
    pairs = {
        (a, b): IrreducibleForm(omega / 3.0, np.zeros(3), omega * NV_GAMMA)
        for a in range(n_spins)
        for b in range(a + 1, n_spins)
    }
    return SpinCoefficients(n_spins, fields, pairs)


@dataclass(frozen=True)
class Preset:
    name: str
    group: str
    v_in: np.ndarray
    target: np.ndarray
    mode: str = MAX_SCALE
    free_rows: tuple = ()
    scale: float | None = None
    symmetrize: bool = True
    zeeman: float = 1.0
    description: str = ""
    fixed_pulses: tuple = field(default=())

    def problem(self) -> tuple[RotationGroup, LPProblem]:
        group = named_group(self.group)
        return group, build_lp(group, self.v_in, self.target, self.mode, self.free_rows, self.scale)

    def input_coefficients(self) -> SpinCoefficients:
        return nv_coefficients(2, zeeman=self.zeeman)


def _wahuha_pulses():
    x, y = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    half = np.pi / 2
    # tau - X - tau - (-Y) - 2tau - Y - tau - (-X) - tau, in units of T/6
    return ((x, half, 1 / 6), (-y, half, 2 / 6), (y, half, 4 / 6), (-x, half, 5 / 6))


PRESETS = {
    p.name: p
    for p in (
        Preset(
            "wahuha",
            "clifford",
            nv_input(),
            np.concatenate([np.ones(3), np.zeros(5)]),
            description="WAHUHA: dipolar gamma averaged away, Zeeman along (x+y+z)/3",
            fixed_pulses=_wahuha_pulses(),
        ),
        Preset(
            "zeeman-clifford",
            "clifford",
            nv_input(),
            np.concatenate([Z_HAT, np.zeros(5)]),
            description="Clifford Zeeman-preserving decoupling (coefficient 1/3)",
        ),
        Preset(
            "zeeman-icosahedral",
            "icosahedral",
            nv_input(),
            np.concatenate([Z_HAT, np.zeros(5)]),
            mode=PINNED,
            scale=0.5,
            description="icosahedral Zeeman-preserving decoupling with the Zeeman coefficient pinned to 1/2",
        ),
        Preset(
            "zeeman-icosahedral-max",
            "icosahedral",
            nv_input(),
            np.concatenate([Z_HAT, np.zeros(5)]),
            description="icosahedral Zeeman-preserving decoupling at the largest reachable coefficient",
        ),
        Preset(
            "sigmaxy-icosahedral",
            "icosahedral",
            nv_input(zeeman=0.0),
            np.concatenate([np.zeros(3), 2.0 / 3.0 * np.eye(5)[2]]),
            free_rows=N_FREE,
            zeeman=0.0,
            description="sx sy + sy sx pair term from the NV dipolar term (Bz = 0)",
        ),
        Preset(
            "sigmaxy-clifford",
            "clifford",
            nv_input(zeeman=0.0),
            np.concatenate([np.zeros(3), 2.0 / 3.0 * np.eye(5)[2]]),
            free_rows=N_FREE,
            zeeman=0.0,
            description="same target with Clifford pulses only (unreachable)",
        ),
        Preset(
            "zz-product",
            "clifford",
            nv_input(zeeman=0.0),
            np.concatenate([np.zeros(3), -NV_GAMMA]),
            free_rows=N_FREE,
            zeeman=0.0,
            description="sz sz product term (gamma along -[1,1,0,0,0]) at Bz = 0",
        ),
    )
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None


def synthesize(preset: Preset, cycle_time: float = 1e-4) -> tuple[LPSolution | None, PulseSequence | None]:
    """Solve a preset's LP and assemble its sequence (fixed presets skip the LP)."""
    if preset.fixed_pulses:
        seq = sequence_from_pulses([(a, t, s * cycle_time) for a, t, s in preset.fixed_pulses], cycle_time)
        seq.meta.update({"group": preset.group, "preset": preset.name})
        return None, seq
    group, problem = preset.problem()
    solution = solve_lp(problem)
    if not solution.optimal:
        return solution, None
    seq = assemble_sequence(group, solution, cycle_time, symmetrize=preset.symmetrize)
    seq.meta["preset"] = preset.name
    return solution, seq
