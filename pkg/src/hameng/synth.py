"""Pulse-sequence synthesis: linear program, cyclic assembly, hardware lowering.

The LP picks duration fractions ``x_k`` for the elements ``R_k`` of a rotation
group so that the first-order average of the stacked coefficient vector
``v_in = [n (or beta); gamma]`` lands on a target direction::

    sum_k x_k blockdiag(R3_k, R5_k) v_in = c * b      (kept rows)
    sum_k x_k = 1,  x >= 0

Rows where ``b`` is zero are forced to vanish; rows listed as free are not
constrained at all.

Pulse convention: pulses in a :class:`PulseSequence` are *physical* rotations,
realized by ``spin_unitary(axis, angle) = exp(-i angle/2 n.sigma)``. Such a pulse
advances the toggling frame by the coefficient rotation
``axis_angle_matrix(axis, -angle)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import simplex
from .numerics import expm_hermitian, pauli
from .rotgroup import (
    RotationGroup,
    axis_angle,
    axis_angle_matrix,
    normalized,
    spin_unitary,
)

DURATION_THRESHOLD = 1e-10
SCALE_TOL = 1e-9

MAX_SCALE = "max-scale"
PURE_DECOUPLE = "pure-decouple"
PINNED = "pinned"
LP_MODES = (MAX_SCALE, PURE_DECOUPLE, PINNED)

GAMMA_LABELS = ("gamma1", "gamma2", "gamma3", "gamma4", "gamma5")


def row_labels(dim: int, first: str = "n") -> tuple[str, ...]:
    head = tuple(f"{first}_{a}" for a in "xyz")
    if dim == 8:
        return head + GAMMA_LABELS
    if dim == 6:
        return head + tuple(f"beta_{a}" for a in "xyz")
    raise ValueError(f"stacked vector must have 8 (3+5) or 6 (3+3) entries, got {dim}")


@dataclass
class LPProblem:
    """Linear program over the elements of a rotation group.

    ``A`` has one column per group element restricted to the kept rows,
    ``b_dir`` is the target on those rows, ``zero_rows`` index the rows of
    ``A`` pinned to zero. ``scale`` is only used in pinned mode.
    """

    A: np.ndarray
    b_dir: np.ndarray
    zero_rows: tuple
    labels: tuple
    mode: str = MAX_SCALE
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    scale: float | None = None
    v_in: np.ndarray | None = None

    def __post_init__(self):
        if self.mode not in LP_MODES:
            raise ValueError(f"unknown LP mode {self.mode!r}")
        if self.mode != PURE_DECOUPLE and not np.any(self.b_dir):
            raise ValueError("target direction is all zero; use pure-decouple mode")
        if self.mode == PINNED and self.scale is None:
            raise ValueError("pinned mode needs a scale")

    @property
    def n_vars(self) -> int:
        return self.A.shape[1]


@dataclass
class LPSolution:
    x: np.ndarray | None
    scale: float
    status: str  # "optimal" | "infeasible"
    unreachable: tuple = ()

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def support(self, threshold: float = DURATION_THRESHOLD) -> np.ndarray:
        return np.nonzero(self.x > threshold)[0]


def coefficient_columns(group: RotationGroup, v_in) -> np.ndarray:
    """Matrix whose column k is blockdiag(R3_k, R5_k or R3_k) @ v_in."""
    v_in = np.asarray(v_in, dtype=float)
    if v_in.shape not in ((8,), (6,)):
        raise ValueError(f"v_in must have 8 or 6 entries, got shape {v_in.shape}")
    cols = []
    for el in group:
        second = el.r5 if v_in.size == 8 else el.r3
        cols.append(np.concatenate([el.r3 @ v_in[:3], second @ v_in[3:]]))
    return np.array(cols).T


def build_lp(
    group: RotationGroup,
    v_in,
    target=None,
    mode: str = MAX_SCALE,
    free_rows=(),
    scale: float | None = None,
    lower=None,
    upper=None,
    first_block: str = "n",
) -> LPProblem:
    full = coefficient_columns(group, v_in)
    dim = full.shape[0]
    labels = row_labels(dim, first_block)
    free = {labels.index(r) if isinstance(r, str) else int(r) for r in free_rows}
    keep = [i for i in range(dim) if i not in free]
    if mode == PURE_DECOUPLE:
        b = np.zeros(dim)
    else:
        if target is None:
            raise ValueError(f"mode {mode!r} needs a target vector")
        b = np.asarray(target, dtype=float).reshape(-1)
        if b.size != dim:
            raise ValueError(f"target has {b.size} entries, v_in has {dim}")
    b = b[keep]
    zero_rows = tuple(i for i in range(len(keep)) if b[i] == 0.0)
    return LPProblem(
        A=full[keep],
        b_dir=b,
        zero_rows=zero_rows,
        labels=tuple(labels[i] for i in keep),
        mode=mode,
        lower=None if lower is None else np.asarray(lower, dtype=float),
        upper=None if upper is None else np.asarray(upper, dtype=float),
        scale=scale,
        v_in=np.asarray(v_in, dtype=float),
    )


def unreachable_components(p: LPProblem, tol: float = 1e-12) -> tuple[str, ...]:
    """Target rows no group element can populate (identically zero rows of A)."""
    return tuple(
        p.labels[i]
        for i in range(len(p.b_dir))
        if p.b_dir[i] != 0.0 and np.max(np.abs(p.A[i])) <= tol
    )


def solve_lp(p: LPProblem) -> LPSolution:
    """Solve with the in-house simplex.

    max-scale maximizes c with c >= 0; a best c of zero counts as infeasible
    because the target is then unreachable. pinned and pure-decouple are
    feasibility problems.
    """
    n = p.n_vars
    rows = p.A.shape[0]
    lower = np.zeros(n) if p.lower is None else p.lower
    upper = np.full(n, np.inf) if p.upper is None else p.upper
    if p.mode == MAX_SCALE:
        a_eq = np.zeros((rows + 1, n + 1))
        a_eq[:rows, :n] = p.A
        a_eq[:rows, n] = -p.b_dir
        a_eq[rows, :n] = 1.0
        b_eq = np.zeros(rows + 1)
        b_eq[rows] = 1.0
        cost = np.zeros(n + 1)
        cost[n] = -1.0
        res = simplex.solve(cost, a_eq, b_eq, np.append(lower, 0.0), np.append(upper, np.inf))
        if res.status != "optimal":
            return LPSolution(None, 0.0, "infeasible", unreachable_components(p))
        x, c = res.x[:n], float(res.x[n])
        if c <= SCALE_TOL:
            return LPSolution(np.clip(x, 0.0, None), 0.0, "infeasible", unreachable_components(p))
    else:
        c = 0.0 if p.mode == PURE_DECOUPLE else float(p.scale)
        a_eq = np.vstack([p.A, np.ones((1, n))])
        b_eq = np.append(c * p.b_dir, 1.0)
        res = simplex.solve(np.zeros(n), a_eq, b_eq, lower, upper)
        if res.status != "optimal":
            return LPSolution(None, c, "infeasible", unreachable_components(p))
        x = res.x
    x = np.where(np.abs(x) <= DURATION_THRESHOLD, 0.0, x)
    x = x / x.sum()
    return LPSolution(x, c, "optimal")


def engineered_vector(group: RotationGroup, v_in, x) -> np.ndarray:
    """sum_k x_k blockdiag(R3_k, R5_k) v_in over the full stacked vector."""
    return coefficient_columns(group, v_in) @ np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# sequences


@dataclass
class HardwarePulse:
    """A hardware realization of one ideal pulse.

    ``kind == "composite"``: ``subpulses`` holds three ``(axis, angle)`` rotations
    with axes in the x-y plane, in time order. ``kind == "off_resonant"``: a
    detuned drive with Rabi frequency ``rabi_hz``, detuning ``detuning_hz`` and
    drive phase ``phase_rad`` (0 = x, pi/2 = y) held for ``duration_s``.
    """

    kind: str
    subpulses: list = field(default_factory=list)
    rabi_hz: float = 0.0
    detuning_hz: float = 0.0
    phase_rad: float = 0.0
    duration_s: float = 0.0

    def unitary(self) -> np.ndarray:
        """Control-only single-spin propagator."""
        if self.kind == "composite":
            u = np.eye(2, dtype=complex)
            for axis, angle in self.subpulses:
                u = spin_unitary(axis, angle) @ u
            return u
        if self.kind == "off_resonant":
            return expm_hermitian(self.control_hamiltonian(), self.duration_s)
        raise ValueError(f"unknown realization kind {self.kind!r}")

    def drive_axis_angle(self) -> tuple[np.ndarray, float]:
        vec = np.array(
            [self.rabi_hz * np.cos(self.phase_rad), self.rabi_hz * np.sin(self.phase_rad), self.detuning_hz]
        )
        eff = np.linalg.norm(vec)
        return vec / eff, 2 * np.pi * eff * self.duration_s

    def control_hamiltonian(self) -> np.ndarray:
        """Single-spin control term in rad/s: 2pi (delta/2 sz + Omega/2 s_phase)."""
        drive = np.cos(self.phase_rad) * pauli("x") + np.sin(self.phase_rad) * pauli("y")
        return np.pi * (self.detuning_hz * pauli("z") + self.rabi_hz * drive)

    def to_json(self) -> dict:
        if self.kind == "composite":
            return {
                "kind": "composite",
                "subpulses": [{"axis": list(map(float, a)), "angle_rad": float(t)} for a, t in self.subpulses],
            }
        return {
            "kind": "off_resonant",
            "rabi_hz": self.rabi_hz,
            "detuning_hz": self.detuning_hz,
            "phase_rad": self.phase_rad,
            "duration_s": self.duration_s,
        }

    @classmethod
    def from_json(cls, data: dict) -> "HardwarePulse":
        if data["kind"] == "composite":
            return cls("composite", [(np.asarray(s["axis"], float), float(s["angle_rad"])) for s in data["subpulses"]])
        return cls(
            "off_resonant",
            rabi_hz=float(data["rabi_hz"]),
            detuning_hz=float(data["detuning_hz"]),
            phase_rad=float(data["phase_rad"]),
            duration_s=float(data["duration_s"]),
        )


@dataclass
class Pulse:
    axis: np.ndarray
    angle: float
    time: float
    composite: HardwarePulse | None = None
    off_resonant: HardwarePulse | None = None

    def unitary(self) -> np.ndarray:
        return spin_unitary(self.axis, self.angle)

    def frame_step(self) -> np.ndarray:
        """Coefficient rotation this pulse appends to the toggling frame."""
        return axis_angle_matrix(self.axis, -self.angle)

    def to_json(self) -> dict:
        out = {"axis": self.axis.tolist(), "angle_rad": self.angle, "time_s": self.time}
        realization = {}
        if self.composite is not None:
            realization["composite"] = self.composite.to_json()
        if self.off_resonant is not None:
            realization["off_resonant"] = self.off_resonant.to_json()
        out["realization"] = realization
        return out

    @classmethod
    def from_json(cls, data: dict) -> "Pulse":
        real = data.get("realization") or {}
        return cls(
            axis=normalized(data["axis"]),
            angle=float(data["angle_rad"]),
            time=float(data["time_s"]),
            composite=HardwarePulse.from_json(real["composite"]) if "composite" in real else None,
            off_resonant=HardwarePulse.from_json(real["off_resonant"]) if "off_resonant" in real else None,
        )


@dataclass
class PulseSequence:
    """Pulses at times within one cycle of length ``cycle_time``.

    ``frames`` lists the (coefficient rotation, duration fraction) pairs the
    sequence was assembled from, including zero-duration identity frames at
    either end when an initial/closing pulse is present.
    """

    pulses: list
    cycle_time: float
    frames: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.cycle_time <= 0:
            raise ValueError("cycle time must be positive")
        times = [p.time for p in self.pulses]
        if any(t < -1e-15 or t > self.cycle_time * (1 + 1e-12) for t in times):
            raise ValueError("pulse times must lie within [0, T]")
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValueError("pulse times must be nondecreasing")

    def with_cycle_time(self, cycle_time: float) -> "PulseSequence":
        """Same sequence with every pulse time rescaled to a new cycle length."""
        k = cycle_time / self.cycle_time
        return replace(self, pulses=[replace(p, time=p.time * k) for p in self.pulses], cycle_time=cycle_time)

    def net_rotation(self) -> np.ndarray:
        q = np.eye(3)
        for p in self.pulses:
            q = q @ p.frame_step()
        return q

    def is_cyclic(self, tol: float = 1e-9) -> bool:
        return bool(np.max(np.abs(self.net_rotation() - np.eye(3))) <= tol)

    def to_json(self) -> dict:
        out = {"cycle_time_s": self.cycle_time, "pulses": [p.to_json() for p in self.pulses]}
        if self.frames:
            out["frames"] = [{"r3": np.asarray(r).reshape(-1).tolist(), "fraction": float(f)} for r, f in self.frames]
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_json(cls, data: dict) -> "PulseSequence":
        frames = [(np.reshape(f["r3"], (3, 3)), float(f["fraction"])) for f in data.get("frames", [])]
        return cls(
            pulses=[Pulse.from_json(p) for p in data["pulses"]],
            cycle_time=float(data["cycle_time_s"]),
            frames=frames,
            meta=dict(data.get("meta", {})),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=1))

    @classmethod
    def load(cls, path) -> "PulseSequence":
        return cls.from_json(json.loads(Path(path).read_text()))


def pulse_from_rotation_step(r_prev, r_next) -> tuple[np.ndarray, float]:
    """Axis and angle of the frame step R_prev^-1 R_next (angle 0 for no step)."""
    step = np.asarray(r_prev, dtype=float).T @ np.asarray(r_next, dtype=float)
    return axis_angle(step)


def _physical_pulse(r_prev, r_next) -> tuple[np.ndarray, float]:
    # spin_unitary(-n, t) advances the frame by axis_angle_matrix(n, t)
    axis, angle = pulse_from_rotation_step(r_prev, r_next)
    return -axis, angle


def assemble_sequence(
    group: RotationGroup,
    solution: LPSolution,
    cycle_time: float,
    symmetrize: bool = True,
    order=None,
) -> PulseSequence:
    """Turn LP durations into a cyclic pulse sequence.

    Frames with ``x_k > 1e-10`` are sorted by descending duration (ties by
    group index) unless ``order`` gives an explicit permutation of them. With
    ``symmetrize`` the frame list becomes the palindrome
    ``F1/2 ... F(m-1)/2  Fm  F(m-1)/2 ... F1/2``.
    """
    if not solution.optimal or solution.x is None:
        raise ValueError("cannot assemble a sequence from an infeasible LP")
    support = [int(k) for k in solution.support()]
    if not support:
        raise ValueError("LP solution has no nonzero durations")
    if order is None:
        support.sort(key=lambda k: (-solution.x[k], k))
    else:
        order = [int(k) for k in order]
        if sorted(order) != sorted(support):
            raise ValueError("order must be a permutation of the selected elements")
        support = order
    frames = [(group[k].r3, float(solution.x[k])) for k in support]
    if symmetrize and len(frames) > 1:
        half = [(r, f / 2.0) for r, f in frames[:-1]]
        frames = half + [frames[-1]] + half[::-1]

    pulses = []
    out_frames = []
    prev = np.eye(3)
    t = 0.0
    for r, frac in frames:
        axis, angle = _physical_pulse(prev, r)
        if angle > 1e-12:
            if not out_frames:
                out_frames.append((np.eye(3), 0.0))
            pulses.append(Pulse(axis, angle, t * cycle_time))
        out_frames.append((r, frac))
        prev = r
        t += frac
    axis, angle = _physical_pulse(prev, np.eye(3))
    if angle > 1e-12:
        pulses.append(Pulse(axis, angle, cycle_time))
        out_frames.append((np.eye(3), 0.0))
    meta = {"group": group.name, "scale": solution.scale, "symmetrized": bool(symmetrize)}
    return PulseSequence(pulses, cycle_time, out_frames, meta)


def sequence_from_pulses(pulse_list, cycle_time: float) -> PulseSequence:
    """Build a sequence from (axis, angle, time) triples."""
    return PulseSequence([Pulse(normalized(a), float(t), float(s)) for a, t, s in pulse_list], cycle_time)


# ---------------------------------------------------------------------------
# hardware lowering


def _canonical(axis, angle) -> tuple[np.ndarray, float]:
    axis = np.asarray(axis, dtype=float)
    if angle < 0:
        return -axis, -angle
    return axis, angle


def decompose_composite(axis, angle: float, tol: float = 1e-12) -> list[tuple[np.ndarray, float]]:
    """Three x-y plane rotations (time order) whose product is spin_unitary(axis, angle).

    x-z plane axes (n1, 0, n2) use an x-axis pi/2 conjugation pair around a
    middle pulse about (n1, n2, 0); y-z plane axes (0, n1, n2) use a y-axis pair
    around (n2, n1, 0). Any other tilted axis is conjugated by a rotation about
    the in-plane direction perpendicular to its projection. Axes already in the
    x-y plane pass through between two identity wrappers.
    """
    n = normalized(axis)
    x_hat, y_hat = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    if abs(n[2]) <= tol:
        return [(x_hat, 0.0), _canonical(n, angle), (x_hat, 0.0)]
    if abs(n[1]) <= tol:
        middle = np.array([n[0], n[2], 0.0])
        return [_canonical(x_hat, -np.pi / 2), _canonical(middle, angle), (x_hat, np.pi / 2)]
    if abs(n[0]) <= tol:
        middle = np.array([n[2], n[1], 0.0])
        return [(y_hat, np.pi / 2), _canonical(middle, angle), _canonical(y_hat, -np.pi / 2)]
    r = np.hypot(n[0], n[1])
    if r < tol:
        raise ValueError("axis not representable by in-plane pulses")
    phase = np.arctan2(n[1], n[0])
    in_plane = np.array([np.cos(phase), np.sin(phase), 0.0])
    hinge = np.array([-np.sin(phase), np.cos(phase), 0.0])
    elevation = np.arctan2(n[2], r)
    return [_canonical(hinge, elevation), _canonical(in_plane, angle), _canonical(hinge, -elevation)]


def composite_pulse(axis, angle: float) -> HardwarePulse:
    return HardwarePulse("composite", decompose_composite(axis, angle))


def off_resonant_params(axis, angle: float, rabi_hz: float) -> HardwarePulse:
    """Detuned-drive parameters realizing spin_unitary(axis, angle).

    For an axis with in-plane part of length r at azimuth phi, drive at phase
    phi with detuning delta = (n_z / r) * Omega; for x-z plane axes with n_x > 0
    this is delta = (n2/n1) Omega with the drive on x.
    """
    if rabi_hz <= 0:
        raise ValueError("Rabi frequency must be positive")
    n, theta = _canonical(normalized(axis), angle)
    r = np.hypot(n[0], n[1])
    if r < 1e-12:
        raise ValueError("pure z rotations cannot be realized by an off-resonant drive")
    phase = float(np.arctan2(n[1], n[0]))
    detuning = n[2] / r * rabi_hz
    eff = np.hypot(rabi_hz, detuning)
    return HardwarePulse(
        "off_resonant",
        rabi_hz=float(rabi_hz),
        detuning_hz=float(detuning),
        phase_rad=phase,
        duration_s=float(theta / (2 * np.pi * eff)),
    )


def lower_sequence(seq: PulseSequence, rabi_hz: float | None = None) -> PulseSequence:
    """Attach composite (always) and off-resonant (when rabi_hz given) realizations."""
    pulses = []
    for p in seq.pulses:
        pulses.append(
            replace(
                p,
                composite=composite_pulse(p.axis, p.angle),
                off_resonant=None if rabi_hz is None else off_resonant_params(p.axis, p.angle, rabi_hz),
            )
        )
    return replace(seq, pulses=pulses)
