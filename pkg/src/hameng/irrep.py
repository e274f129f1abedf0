"""Irreducible decomposition of two-body spin-1/2 couplings.

A pair term ``sum_ij T_ij s_i^(a) s_j^(b)`` splits into

* an isotropic scalar ``alpha`` multiplying ``s^(a) . s^(b)``,
* an antisymmetric 3-vector ``beta`` multiplying ``lambda1``,
* a symmetric traceless 5-vector ``gamma`` multiplying ``lambda2``.

The gamma wire order is ``[S_xx, S_yy, S_xy, S_xz, S_yz]`` of the symmetric
traceless part ``S``. All coefficients carry the units of ``T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .numerics import check_spin_count, embed, pauli

# (i, j) index pairs of lambda1 = s_i s_j - s_j s_i and of the lambda2 entries.
_LAMBDA1_PAIRS = ((1, 2), (2, 0), (0, 1))
_GAMMA_INDEX = ((0, 0), (1, 1), (0, 1), (0, 2), (1, 2))


@dataclass(frozen=True)
class IrreducibleForm:
    alpha: float = 0.0
    beta: np.ndarray = field(default_factory=lambda: np.zeros(3))
    gamma: np.ndarray = field(default_factory=lambda: np.zeros(5))

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        gamma = np.asarray(self.gamma, dtype=float).reshape(-1)
        if beta.shape != (3,) or gamma.shape != (5,):
            raise ValueError("beta must have 3 entries and gamma 5")
        if not (np.isfinite(self.alpha) and np.all(np.isfinite(beta)) and np.all(np.isfinite(gamma))):
            raise ValueError("irreducible form entries must be finite")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "gamma", gamma)

    def to_json(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta.tolist(), "gamma": self.gamma.tolist()}

    @classmethod
    def from_json(cls, data: Mapping) -> "IrreducibleForm":
        return cls(
            alpha=data.get("alpha", 0.0),
            beta=data.get("beta", [0.0] * 3),
            gamma=data.get("gamma", [0.0] * 5),
        )

    def allclose(self, other: "IrreducibleForm", atol: float = 1e-12) -> bool:
        return (
            abs(self.alpha - other.alpha) <= atol
            and np.allclose(self.beta, other.beta, rtol=0, atol=atol)
            and np.allclose(self.gamma, other.gamma, rtol=0, atol=atol)
        )


def gamma_matrix(gamma) -> np.ndarray:
    """Symmetric traceless 3x3 matrix holding the five gamma components."""
    g1, g2, g3, g4, g5 = np.asarray(gamma, dtype=float)
    return np.array([[g1, g3, g4], [g3, g2, g5], [g4, g5, -g1 - g2]])


def gamma_coords(s: np.ndarray) -> np.ndarray:
    """Inverse of :func:`gamma_matrix` on symmetric traceless input."""
    s = np.asarray(s)
    return np.array([s[i, j] for i, j in _GAMMA_INDEX])


def antisymmetric_matrix(beta) -> np.ndarray:
    """Antisymmetric matrix A with beta_k = 1/2 eps_ijk A_ij."""
    bx, by, bz = np.asarray(beta, dtype=float)
    return np.array([[0.0, bz, -by], [-bz, 0.0, bx], [by, -bx, 0.0]])


def decompose(t: np.ndarray) -> IrreducibleForm:
    t = np.asarray(t, dtype=float)
    if t.shape != (3, 3):
        raise ValueError(f"coupling matrix must be 3x3, got {t.shape}")
    alpha = np.trace(t) / 3.0
    beta = np.array([0.5 * (t[i, j] - t[j, i]) for i, j in _LAMBDA1_PAIRS])
    s = 0.5 * (t + t.T) - alpha * np.eye(3)
    return IrreducibleForm(alpha, beta, gamma_coords(s))


def reconstruct(form: IrreducibleForm) -> np.ndarray:
    return form.alpha * np.eye(3) + antisymmetric_matrix(form.beta) + gamma_matrix(form.gamma)


def _pair_products(a: int, b: int, n_spins: int) -> np.ndarray:
    """Array P[i, j] = s_i^(a) s_j^(b) embedded in the full register."""
    sa = [embed(pauli(i), a, n_spins) for i in range(3)]
    sb = [embed(pauli(j), b, n_spins) for j in range(3)]
    return np.array([[sa[i] @ sb[j] for j in range(3)] for i in range(3)])


def lambda_operators(a: int, b: int, n_spins: int):
    """Return (s.s, lambda1[3], lambda2[5]) operators for the pair (a, b)."""
    check_spin_count(n_spins)
    if not 0 <= a < b < n_spins:
        raise ValueError(f"need 0 <= a < b < N, got a={a}, b={b}, N={n_spins}")
    p = _pair_products(a, b, n_spins)
    dot = p[0, 0] + p[1, 1] + p[2, 2]
    lam1 = np.array([p[i, j] - p[j, i] for i, j in _LAMBDA1_PAIRS])
    lam2 = np.array(
        [
            p[0, 0] - p[2, 2],
            p[1, 1] - p[2, 2],
            p[0, 1] + p[1, 0],
            p[0, 2] + p[2, 0],
            p[1, 2] + p[2, 1],
        ]
    )
    return dot, lam1, lam2


def pair_operator(form: IrreducibleForm, a: int, b: int, n_spins: int) -> np.ndarray:
    """alpha s.s + beta.lambda1 + gamma.lambda2 on the N-spin register."""
    dot, lam1, lam2 = lambda_operators(a, b, n_spins)
    return (
        form.alpha * dot
        + np.tensordot(form.beta, lam1, axes=1)
        + np.tensordot(form.gamma, lam2, axes=1)
    )


def one_spin_operator(n_vec, site: int, n_spins: int) -> np.ndarray:
    n_vec = np.asarray(n_vec, dtype=float)
    return sum(n_vec[i] * embed(pauli(i), site, n_spins) for i in range(3))


@dataclass
class SpinCoefficients:
    """Coefficient-level description of a Hamiltonian on ``n_spins`` spins.

    ``fields`` has shape (N, 3) (one-spin vectors); ``pairs`` maps ``(a, b)``
    with ``a < b`` to the pair's :class:`IrreducibleForm`. Missing pairs are zero.
    """

    n_spins: int
    fields: np.ndarray
    pairs: dict = field(default_factory=dict)

    def __post_init__(self):
        self.fields = np.asarray(self.fields, dtype=float).reshape(self.n_spins, 3)
        for a, b in self.pairs:
            if not 0 <= a < b < self.n_spins:
                raise ValueError(f"invalid pair ({a}, {b}) for {self.n_spins} spins")

    def operator(self) -> np.ndarray:
        dim = 2**self.n_spins
        h = np.zeros((dim, dim), dtype=complex)
        for site in range(self.n_spins):
            if np.any(self.fields[site]):
                h += one_spin_operator(self.fields[site], site, self.n_spins)
        for (a, b), form in self.pairs.items():
            h += pair_operator(form, a, b, self.n_spins)
        return h

    def form(self, a: int, b: int) -> IrreducibleForm:
        return self.pairs.get((a, b), IrreducibleForm())

    def max_difference(self, other: "SpinCoefficients") -> float:
        diff = float(np.max(np.abs(self.fields - other.fields), initial=0.0))
        for key in set(self.pairs) | set(other.pairs):
            f, g = self.form(*key), other.form(*key)
            diff = max(
                diff,
                abs(f.alpha - g.alpha),
                float(np.max(np.abs(f.beta - g.beta))),
                float(np.max(np.abs(f.gamma - g.gamma))),
            )
        return diff

    def to_json(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "fields": self.fields.tolist(),
            "pairs": [
                {"a": a, "b": b, **form.to_json()} for (a, b), form in sorted(self.pairs.items())
            ],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SpinCoefficients":
        pairs = {
            (int(p["a"]), int(p["b"])): IrreducibleForm.from_json(p) for p in data.get("pairs", [])
        }
        n = int(data["n_spins"])
        return cls(n, data.get("fields", np.zeros((n, 3))), pairs)


def extract_coefficients(h: np.ndarray, n_spins: int, tol: float = 0.0) -> SpinCoefficients:
    """Project an operator onto one- and two-spin Pauli strings.

    Identity and >2-body content is ignored. Pairs whose coefficients are all
    below ``tol`` are dropped.
    """
    h = np.asarray(h, dtype=complex)
    dim = 2**n_spins
    if h.shape != (dim, dim):
        raise ValueError(f"operator shape {h.shape} does not match {n_spins} spins")
    fields = np.zeros((n_spins, 3))
    for site in range(n_spins):
        for i in range(3):
            fields[site, i] = np.real(np.trace(h @ embed(pauli(i), site, n_spins))) / dim
    pairs = {}
    for a in range(n_spins):
        for b in range(a + 1, n_spins):
            p = _pair_products(a, b, n_spins)
            t = np.array(
                [[np.real(np.trace(h @ p[i, j])) / dim for j in range(3)] for i in range(3)]
            )
            if np.max(np.abs(t)) > tol:
                pairs[(a, b)] = decompose(t)
    return SpinCoefficients(n_spins, fields, pairs)
