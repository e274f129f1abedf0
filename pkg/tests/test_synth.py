import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from hameng.avgham import engineered_transform, toggling_frames
from hameng.numerics import phase_distance
from hameng.presets import nv_input
from hameng.rotgroup import (
    PHI,
    RotationGroup,
    RotationElement,
    axis_angle_matrix,
    clifford_group,
    icosahedral_group,
    spin_unitary,
)
from hameng.synth import (
    PINNED,
    PURE_DECOUPLE,
    HardwarePulse,
    LPSolution,
    Pulse,
    PulseSequence,
    assemble_sequence,
    build_lp,
    coefficient_columns,
    composite_pulse,
    decompose_composite,
    engineered_vector,
    lower_sequence,
    off_resonant_params,
    pulse_from_rotation_step,
    sequence_from_pulses,
    solve_lp,
)

from conftest import random_rotation

ZEEMAN_TARGET = np.concatenate([[0, 0, 1.0], np.zeros(5)])
GAMMA3_TARGET = np.concatenate([np.zeros(3), [0, 0, 1.0, 0, 0]])


@pytest.fixture(scope="module")
def clifford():
    return clifford_group()


@pytest.fixture(scope="module")
def ico():
    return icosahedral_group()


def scipy_max_scale(group, v_in, target, free=()):
    """Oracle: the same LP posed independently for scipy's HiGHS."""
    full = coefficient_columns(group, v_in)
    keep = [i for i in range(full.shape[0]) if i not in free]
    a, b = full[keep], np.asarray(target)[keep]
    n = a.shape[1]
    a_eq = np.vstack([np.hstack([a, -b[:, None]]), np.append(np.ones(n), 0.0)])
    b_eq = np.append(np.zeros(len(keep)), 1.0)
    res = linprog(np.append(np.zeros(n), -1.0), A_eq=a_eq, b_eq=b_eq, bounds=[(0, None)] * (n + 1), method="highs")
    return res.x[-1]


def test_columns_shape_and_identity():
    ident = RotationGroup((RotationElement.from_matrix(np.eye(3)),))
    v = nv_input()
    assert np.allclose(coefficient_columns(ident, v), v[:, None])
    assert coefficient_columns(clifford_group(), v).shape == (8, 24)
    with pytest.raises(ValueError):
        coefficient_columns(ident, np.zeros(4))


def test_inverse_columns_equal_for_invariant_input(ico):
    axis = np.array([0, 1, PHI]) / np.linalg.norm([0, 1, PHI])
    v = np.concatenate([axis, np.zeros(5)])
    k = ico.index_of(axis_angle_matrix(axis, 2 * np.pi / 5))
    k_inv = ico.index_of(axis_angle_matrix(axis, -2 * np.pi / 5))
    cols = coefficient_columns(ico, v)
    assert np.allclose(cols[:, k], cols[:, k_inv])


def test_clifford_zeeman_one_third(clifford):
    sol = solve_lp(build_lp(clifford, nv_input(), ZEEMAN_TARGET))
    assert sol.optimal
    assert sol.scale == pytest.approx(1 / 3, abs=1e-9)
    assert sol.scale == pytest.approx(scipy_max_scale(clifford, nv_input(), ZEEMAN_TARGET), abs=1e-9)
    assert np.allclose(engineered_vector(clifford, nv_input(), sol.x), sol.scale * ZEEMAN_TARGET, atol=1e-12)


def test_icosahedral_zeeman_matches_scipy(ico):
    sol = solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET))
    assert sol.optimal
    assert sol.scale == pytest.approx(scipy_max_scale(ico, nv_input(), ZEEMAN_TARGET), abs=1e-9)
    # best attainable coefficient with this group is phi / 3 (> 1/2)
    assert sol.scale == pytest.approx(PHI / 3, abs=1e-9)


def test_pinned_half_is_feasible(ico):
    sol = solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET, PINNED, scale=0.5))
    assert sol.optimal and sol.scale == 0.5
    assert np.allclose(engineered_vector(ico, nv_input(), sol.x), 0.5 * ZEEMAN_TARGET, atol=1e-10)
    assert solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET, PINNED, scale=0.6)).status == "infeasible"


def test_gamma3_reachability(clifford, ico):
    v = nv_input(zeeman=0.0)
    free = ("n_x", "n_y", "n_z")
    sol = solve_lp(build_lp(clifford, v, GAMMA3_TARGET, free_rows=free))
    assert sol.status == "infeasible"
    assert sol.unreachable == ("gamma3",)
    sol = solve_lp(build_lp(ico, v, GAMMA3_TARGET, free_rows=free))
    assert sol.optimal and sol.scale > 0
    assert sol.scale == pytest.approx(scipy_max_scale(ico, v, GAMMA3_TARGET, free=(0, 1, 2)), abs=1e-9)


def test_pure_decouple(clifford):
    sol = solve_lp(build_lp(clifford, nv_input(), mode=PURE_DECOUPLE))
    assert sol.optimal
    assert np.allclose(engineered_vector(clifford, nv_input(), sol.x), 0, atol=1e-12)


def test_lp_validation(clifford):
    with pytest.raises(ValueError):
        build_lp(clifford, nv_input(), np.zeros(8))
    with pytest.raises(ValueError):
        build_lp(clifford, nv_input(), ZEEMAN_TARGET, PINNED)
    with pytest.raises(ValueError):
        build_lp(clifford, nv_input(), np.ones(5))
    with pytest.raises(ValueError):
        build_lp(clifford, nv_input(), ZEEMAN_TARGET, mode="nope")


def test_upper_bounds_respected(clifford):
    upper = np.full(24, 0.2)
    sol = solve_lp(build_lp(clifford, nv_input(), ZEEMAN_TARGET, upper=upper))
    assert sol.optimal and np.all(sol.x <= 0.2 + 1e-12)


def test_solutions_on_simplex(ico):
    sol = solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET))
    assert np.all(sol.x >= 0)
    assert sol.x.sum() == pytest.approx(1.0, abs=1e-14)


def test_pulse_from_rotation_step():
    axis, angle = pulse_from_rotation_step(np.eye(3), axis_angle_matrix([0, 0, 1], np.pi / 2))
    assert np.allclose(axis, [0, 0, 1]) and angle == pytest.approx(np.pi / 2)
    r = axis_angle_matrix([1, 0, 0], 0.4)
    assert pulse_from_rotation_step(r, r)[1] == 0.0


@given(st.integers(0, 100_000))
def test_pulse_from_rotation_step_reconstructs(seed):
    rng = np.random.default_rng(seed)
    r1, r2 = random_rotation(rng), random_rotation(rng)
    axis, angle = pulse_from_rotation_step(r1, r2)
    assert np.allclose(axis_angle_matrix(axis, angle), r1.T @ r2, atol=1e-10)


def _assembled(group, sol, symmetrize=True):
    seq = assemble_sequence(group, sol, 1e-3, symmetrize=symmetrize)
    t = engineered_transform(toggling_frames(seq))
    v = nv_input()
    return seq, np.concatenate([t.S1 @ v[:3], t.S2 @ v[3:]])


@pytest.mark.parametrize("symmetrize", [True, False])
def test_assembled_average_reproduces_lp(ico, symmetrize):
    sol = solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET))
    seq, got = _assembled(ico, sol, symmetrize)
    assert seq.is_cyclic()
    assert np.allclose(got, sol.scale * ZEEMAN_TARGET, atol=1e-10)
    frames = toggling_frames(seq)
    assert len(frames) == len(seq.pulses) + 1


def test_symmetrized_pulse_count(ico):
    sol = solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET, PINNED, scale=0.5))
    m = len(sol.support())
    seq = assemble_sequence(ico, sol, 1e-3)
    # 2m - 1 palindromic frames plus opening and closing pulses
    assert len(seq.pulses) == 2 * m
    assert seq.meta["symmetrized"] is True


def test_identity_only_solution(clifford):
    x = np.zeros(24)
    x[clifford.index_of(np.eye(3))] = 1.0
    seq = assemble_sequence(clifford, LPSolution(x, 1.0, "optimal"), 1e-3)
    assert seq.pulses == []
    frames = toggling_frames(seq)
    assert len(frames) == 1 and frames.frames[0].duration == pytest.approx(1e-3)


def test_assemble_rejects_infeasible(clifford):
    with pytest.raises(ValueError):
        assemble_sequence(clifford, LPSolution(None, 0.0, "infeasible"), 1e-3)


def test_sequence_validation():
    with pytest.raises(ValueError):
        PulseSequence([Pulse(np.array([1.0, 0, 0]), 1.0, 2.0)], 1.0)
    with pytest.raises(ValueError):
        sequence_from_pulses([([1, 0, 0], 1.0, 0.5), ([1, 0, 0], 1.0, 0.2)], 1.0)
    with pytest.raises(ValueError):
        PulseSequence([], 0.0)


def test_sequence_json_round_trip(tmp_path, ico):
    sol = solve_lp(build_lp(ico, nv_input(), ZEEMAN_TARGET))
    seq = lower_sequence(assemble_sequence(ico, sol, 2e-4), rabi_hz=1e7)
    seq.save(tmp_path / "s.json")
    back = PulseSequence.load(tmp_path / "s.json")
    assert back.cycle_time == seq.cycle_time and len(back.pulses) == len(seq.pulses)
    for a, b in zip(seq.pulses, back.pulses):
        assert np.allclose(a.unitary(), b.unitary())
        assert np.allclose(a.off_resonant.unitary(), b.off_resonant.unitary())
        assert np.allclose(a.composite.unitary(), b.composite.unitary())
    data = seq.to_json()
    assert set(data["pulses"][0]) == {"axis", "angle_rad", "time_s", "realization"}


def test_with_cycle_time():
    seq = sequence_from_pulses([([1, 0, 0], np.pi, 0.25), ([1, 0, 0], np.pi, 0.75)], 1.0)
    half = seq.with_cycle_time(0.5)
    assert [p.time for p in half.pulses] == [0.125, 0.375]


# --- hardware lowering


def test_composite_xz_structure():
    n = np.array([1.0, 0, 1]) / np.sqrt(2)
    parts = decompose_composite(n, 2 * np.pi / 5)
    assert np.allclose(parts[0][0], [-1, 0, 0]) and parts[0][1] == pytest.approx(np.pi / 2)
    assert np.allclose(parts[1][0], np.array([1, 1, 0]) / np.sqrt(2))
    assert np.allclose(parts[2][0], [1, 0, 0]) and parts[2][1] == pytest.approx(np.pi / 2)
    assert phase_distance(composite_pulse(n, 2 * np.pi / 5).unitary(), spin_unitary(n, 2 * np.pi / 5)) < 1e-12


def test_composite_passthrough():
    parts = decompose_composite([1, 0, 0], 0.7)
    assert parts[0][1] == 0 and parts[2][1] == 0
    assert np.allclose(parts[1][0], [1, 0, 0]) and parts[1][1] == 0.7


def test_composite_yz_plane():
    n = np.array([0, 1, PHI]) / np.linalg.norm([0, 1, PHI])
    parts = decompose_composite(n, 4 * np.pi / 5)
    assert len(parts) == 3 and all(abs(a[2]) < 1e-15 for a, _ in parts)
    assert phase_distance(composite_pulse(n, 4 * np.pi / 5).unitary(), spin_unitary(n, 4 * np.pi / 5)) < 1e-12


@given(st.integers(0, 100_000))
def test_composite_any_axis(seed):
    rng = np.random.default_rng(seed)
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    theta = rng.uniform(-np.pi, 2 * np.pi)
    hw = composite_pulse(n, theta)
    assert all(abs(a[2]) < 1e-15 for a, _ in hw.subpulses)
    assert phase_distance(hw.unitary(), spin_unitary(n, theta)) < 1e-12
    if np.hypot(n[0], n[1]) > 1e-6:
        assert phase_distance(off_resonant_params(n, theta, 1e7).unitary(), spin_unitary(n, theta)) < 1e-12


def test_off_resonant_examples():
    hw = off_resonant_params(np.array([1.0, 0, 1]) / np.sqrt(2), np.pi / 2, 1e7)
    assert hw.detuning_hz == pytest.approx(1e7) and hw.phase_rad == pytest.approx(0.0)
    hw = off_resonant_params([1, 0, 0], 1.3, 1e7)
    assert hw.detuning_hz == 0 and hw.duration_s == pytest.approx(1.3 / (2 * np.pi * 1e7))
    hw = off_resonant_params(np.array([0, 1, PHI]) / np.linalg.norm([0, 1, PHI]), 1.0, 1e7)
    assert hw.phase_rad == pytest.approx(np.pi / 2) and hw.detuning_hz == pytest.approx(PHI * 1e7)
    with pytest.raises(ValueError):
        off_resonant_params([0, 0, 1], 1.0, 1e7)
    with pytest.raises(ValueError):
        off_resonant_params([1, 0, 0], 1.0, 0.0)


def test_hardware_json_round_trip():
    for hw in (composite_pulse([0.3, 0.4, 0.5], 1.1), off_resonant_params([0.3, 0.4, 0.5], 1.1, 1e6)):
        back = HardwarePulse.from_json(hw.to_json())
        assert np.allclose(back.unitary(), hw.unitary())
    with pytest.raises(ValueError):
        HardwarePulse("laser").unitary()
