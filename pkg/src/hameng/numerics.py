"""Dense matrix kernel for small spin-1/2 registers.

Everything here works on plain ``numpy`` arrays. Operators on ``N`` spins are
``2**N x 2**N`` complex matrices with spin 0 as the most significant tensor
factor (``kron(op_0, op_1, ...)``).
"""

from __future__ import annotations

from functools import reduce

import numpy as np

MAX_SPINS = 10

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_AXIS_NAMES = ("x", "y", "z")


def pauli(axis) -> np.ndarray:
    """Return the 2x2 Pauli matrix for ``axis`` ('x', 'y', 'z' or 0, 1, 2)."""
    if isinstance(axis, (int, np.integer)) and not isinstance(axis, bool):
        if not 0 <= axis < 3:
            raise ValueError(f"invalid Pauli axis index {axis!r}")
        axis = _AXIS_NAMES[axis]
    try:
        return _PAULI[axis].copy()
    except (KeyError, TypeError):
        raise ValueError(f"invalid Pauli axis {axis!r}") from None


def pauli_vector() -> np.ndarray:
    """Stack of (sigma_x, sigma_y, sigma_z), shape (3, 2, 2)."""
    return np.stack([_PAULI[a] for a in _AXIS_NAMES])


def check_spin_count(n_spins: int, max_spins: int = MAX_SPINS) -> None:
    if n_spins < 1:
        raise ValueError(f"spin count must be positive, got {n_spins}")
    if n_spins > max_spins:
        raise ValueError(
            f"spin count {n_spins} exceeds the configured maximum {max_spins}"
        )


def embed(op: np.ndarray, site: int, n_spins: int, max_spins: int = MAX_SPINS) -> np.ndarray:
    """Place a single-spin operator at ``site`` of an ``n_spins`` register."""
    check_spin_count(n_spins, max_spins)
    if not 0 <= site < n_spins:
        raise ValueError(f"site {site} out of range for {n_spins} spins")
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError(f"expected a 2x2 operator, got shape {op.shape}")
    left = np.eye(2**site, dtype=complex)
    right = np.eye(2 ** (n_spins - site - 1), dtype=complex)
    return np.kron(np.kron(left, op), right)


def global_operator(op: np.ndarray, n_spins: int, max_spins: int = MAX_SPINS) -> np.ndarray:
    """``op`` applied identically to every spin: op (x) op (x) ... (x) op."""
    check_spin_count(n_spins, max_spins)
    op = np.asarray(op, dtype=complex)
    return reduce(np.kron, [op] * n_spins)


def is_hermitian(h: np.ndarray, tol: float = 1e-10) -> bool:
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        return False
    scale = max(1.0, float(np.max(np.abs(h), initial=0.0)))
    return bool(np.max(np.abs(h - h.conj().T), initial=0.0) <= tol * scale)


def expm_hermitian(h: np.ndarray, t: float = 1.0) -> np.ndarray:
    """Return ``exp(-i h t)`` for Hermitian ``h`` via its eigendecomposition.

    Going through ``eigh`` keeps the result unitary to rounding, which matters
    when the same propagator is applied thousands of times.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise ValueError("expm_hermitian requires a Hermitian matrix")
    h = 0.5 * (h + h.conj().T)
    evals, evecs = np.linalg.eigh(h)
    return (evecs * np.exp(-1j * evals * t)) @ evecs.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def operator_norm(a: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    return float(np.linalg.norm(a, ord=2))


def phase_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Distance between two unitaries after removing the best global phase."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    overlap = np.trace(v.conj().T @ u)
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(u - phase * v)))
