import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_rotation(rng):
    """Haar-ish rotation from a QR decomposition (independent of Rodrigues)."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return a + a.conj().T


def random_cyclic_sequence(rng, n_pulses=4, cycle_time=1.0):
    """Random pulses at random times plus the closing pulse that undoes them."""
    from hameng.rotgroup import axis_angle
    from hameng.synth import Pulse, PulseSequence

    times = np.sort(rng.uniform(0, cycle_time, n_pulses))
    pulses = []
    q = np.eye(3)
    for t in times:
        n = rng.normal(size=3)
        p = Pulse(n / np.linalg.norm(n), float(rng.uniform(-np.pi, np.pi)), float(t))
        q = q @ p.frame_step()
        pulses.append(p)
    axis, angle = axis_angle(q.T)
    pulses.append(Pulse(axis, -angle, cycle_time))
    return PulseSequence(pulses, cycle_time)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
