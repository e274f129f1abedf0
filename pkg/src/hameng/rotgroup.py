"""Rotations, their 5x5 action on gamma coefficients, and finite rotation groups.

Convention
----------
A :class:`RotationElement` describes how a toggling frame acts on Hamiltonian
*coefficients*: one-spin vectors and beta go to ``r3 @ v``, gamma goes to
``r5 @ gamma``. Its ``su2`` field is the spin unitary ``U`` satisfying
``U^dag (v . sigma) U = (r3 v) . sigma``.

``spin_unitary(n, theta) = exp(-i theta/2 n.sigma)`` (the physical pulse) acts on
coefficients through ``axis_angle_matrix(n, -theta)``; so the su2 of a
coefficient rotation ``(n, theta)`` is ``spin_unitary(n, -theta)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .irrep import gamma_coords, gamma_matrix
from .numerics import pauli_vector

PHI = (1.0 + np.sqrt(5.0)) / 2.0
GROUP_SIZE_CAP = 200
_AXIS_TOL = 1e-9


def _unit_axis(axis) -> np.ndarray:
    axis = np.asarray(axis, dtype=float).reshape(-1)
    if axis.shape != (3,):
        raise ValueError(f"axis must be a 3-vector, got shape {axis.shape}")
    if abs(np.linalg.norm(axis) - 1.0) > _AXIS_TOL:
        raise ValueError(f"axis must be a unit vector, got norm {np.linalg.norm(axis):.3g}")
    return axis


def normalized(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def cross_matrix(n) -> np.ndarray:
    x, y, z = n
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def axis_angle_matrix(axis, angle: float) -> np.ndarray:
    """Rodrigues rotation I + sin(t) K + (1 - cos(t)) K^2."""
    k = cross_matrix(_unit_axis(axis))
    return np.eye(3) + np.sin(angle) * k + (1.0 - np.cos(angle)) * (k @ k)


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        return False
    return bool(np.allclose(r.T @ r, np.eye(3), rtol=0, atol=tol) and abs(np.linalg.det(r) - 1.0) < tol)


def axis_angle(r: np.ndarray) -> tuple[np.ndarray, float]:
    """Recover (unit axis, angle in [0, pi]) from a proper rotation.

    The axis comes from the symmetric part ``(R + R^T)/2 - cos(t) I``, which
    is ``(1 - cos t) n n^T`` and stays well conditioned near ``t = pi``. The
    antisymmetric part only fixes the sign. Identity returns ``(z, 0)``.
    """
    r = np.asarray(r, dtype=float)
    cos_t = np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0)
    anti = np.array([r[2, 1] - r[1, 2], r[0, 2] - r[2, 0], r[1, 0] - r[0, 1]]) / 2.0
    angle = float(np.arctan2(np.linalg.norm(anti), cos_t))
    if angle < 1e-12:
        return np.array([0.0, 0.0, 1.0]), 0.0
    if np.sin(angle) > 1e-3 or cos_t > 0:
        return anti / np.linalg.norm(anti), angle
    outer = 0.5 * (r + r.T) - cos_t * np.eye(3)
    col = outer[:, int(np.argmax(np.diag(outer)))]
    axis = col / np.linalg.norm(col)
    if np.dot(axis, anti) < 0:
        axis = -axis
    return axis, angle


def rep5(r3: np.ndarray) -> np.ndarray:
    """5x5 matrix of gamma -> coords(R M(gamma) R^T)."""
    r3 = np.asarray(r3, dtype=float)
    if not is_rotation(r3):
        raise ValueError("rep5 needs a proper rotation matrix")
    basis = np.eye(5)
    return np.column_stack([gamma_coords(r3 @ gamma_matrix(e) @ r3.T) for e in basis])


def spin_unitary(axis, angle: float) -> np.ndarray:
    """exp(-i angle/2 n.sigma).

    Under conjugation ``U^dag (v.sigma) U = (R v).sigma`` with
    ``R = axis_angle_matrix(axis, -angle)``.
    """
    n = _unit_axis(axis)
    n_sigma = np.tensordot(n, pauli_vector(), axes=1)
    return np.cos(angle / 2.0) * np.eye(2) - 1j * np.sin(angle / 2.0) * n_sigma


def conjugation_rotation(u: np.ndarray) -> np.ndarray:
    """3x3 matrix R with U^dag (v.sigma) U = (R v).sigma for a 2x2 unitary U."""
    sig = pauli_vector()
    return np.array(
        [[0.5 * np.real(np.trace(sig[i] @ u.conj().T @ sig[j] @ u)) for j in range(3)] for i in range(3)]
    )


@dataclass(frozen=True)
class RotationElement:
    r3: np.ndarray
    r5: np.ndarray
    axis: np.ndarray
    angle: float
    su2: np.ndarray

    @classmethod
    def from_matrix(cls, r3: np.ndarray) -> "RotationElement":
        r3 = np.asarray(r3, dtype=float)
        if not is_rotation(r3):
            raise ValueError("not a proper rotation matrix")
        axis, angle = axis_angle(r3)
        return cls(r3=r3, r5=rep5(r3), axis=axis, angle=angle, su2=spin_unitary(axis, -angle))

    @classmethod
    def from_axis_angle(cls, axis, angle: float) -> "RotationElement":
        return cls.from_matrix(axis_angle_matrix(axis, angle))

    @property
    def is_identity(self) -> bool:
        return bool(np.allclose(self.r3, np.eye(3), rtol=0, atol=1e-9))

    def to_json(self) -> dict:
        return {"axis": self.axis.tolist(), "angle": self.angle, "r3": self.r3.reshape(-1).tolist()}


@dataclass(frozen=True)
class RotationGroup:
    elements: tuple
    name: str = "Custom"

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __getitem__(self, k):
        return self.elements[k]

    def index_of(self, r3: np.ndarray, tol: float = 1e-9) -> int:
        for k, el in enumerate(self.elements):
            if np.linalg.norm(el.r3 - r3) < tol:
                return k
        raise KeyError("rotation is not an element of the group")

    def check_axioms(self, tol: float = 1e-9) -> None:
        """Raise AssertionError unless identity, inverses and closure hold."""
        mats = np.array([el.r3 for el in self.elements])

        def member(r):
            return np.min(np.linalg.norm(mats - r, axis=(1, 2))) < tol

        assert member(np.eye(3)), "identity missing"
        for a in mats:
            assert member(a.T), "inverse missing"
            for b in mats:
                assert member(a @ b), "group not closed"

    def dump(self) -> list[dict]:
        return [el.to_json() for el in self.elements]

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.dump(), indent=1))

    @classmethod
    def load(cls, path, name: str = "Custom") -> "RotationGroup":
        data = json.loads(Path(path).read_text())
        return cls(tuple(RotationElement.from_matrix(np.reshape(d["r3"], (3, 3))) for d in data), name)


def generate_group(generators, tol: float = 1e-9, name: str = "Custom", cap: int = GROUP_SIZE_CAP) -> RotationGroup:
    """Close a set of rotation matrices under multiplication (breadth first)."""
    gens = [np.asarray(g, dtype=float) for g in generators]
    for g in gens:
        if not is_rotation(g):
            raise ValueError("generators must be proper rotations")
    found = [np.eye(3)]
    frontier = [np.eye(3)]
    while frontier:
        fresh = []
        for a in frontier:
            for g in gens:
                p = a @ g
                if min(np.linalg.norm(p - e) for e in found) >= tol:
                    found.append(p)
                    fresh.append(p)
                    if len(found) > cap:
                        raise RuntimeError(
                            f"group closure exceeded {cap} elements; check generators or tolerance"
                        )
        frontier = fresh
    return RotationGroup(tuple(RotationElement.from_matrix(r) for r in found), name)


def clifford_group() -> RotationGroup:
    """24 rotations generated by pi/2 turns about x and z."""
    return generate_group(
        [axis_angle_matrix([1, 0, 0], np.pi / 2), axis_angle_matrix([0, 0, 1], np.pi / 2)],
        name="Clifford",
    )


def icosahedral_vertex_axis() -> np.ndarray:
    return normalized([0.0, 1.0, PHI])


def icosahedral_group() -> RotationGroup:
    """60 rotations of the icosahedron with vertices at cyclic permutations of (0, +-1, +-phi).

    Generated by a 2pi/5 turn about the vertex (0, 1, phi) and a pi turn about z
    (an edge-midpoint axis not perpendicular to that vertex).
    """
    return generate_group(
        [
            axis_angle_matrix(icosahedral_vertex_axis(), 2 * np.pi / 5),
            axis_angle_matrix([0, 0, 1], np.pi),
        ],
        name="Icosahedral",
    )


def named_group(name: str) -> RotationGroup:
    key = name.strip().lower()
    if key == "clifford":
        return clifford_group()
    if key == "icosahedral":
        return icosahedral_group()
    raise ValueError(f"unknown group {name!r} (expected 'clifford' or 'icosahedral')")


def block_coupling(r5: np.ndarray) -> float:
    """Largest |entry| linking gamma components {1,2} with {3,4,5}."""
    r5 = np.asarray(r5)
    return float(max(np.max(np.abs(r5[:2, 2:])), np.max(np.abs(r5[2:, :2]))))
