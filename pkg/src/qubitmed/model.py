"""Domain types: ensembles, Lagrange-operator candidates, POVMs and solutions.

Vectors are plain ``numpy`` arrays of shape ``(3,)``. Every container is a
frozen dataclass whose arrays are marked read-only, so instances can be shared
freely between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    InvalidPovm,
    NegativePrior,
    PriorsNotNormalized,
    StateOutsideBall,
)

IDENTITY = np.eye(2, dtype=complex)
PAULI = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


def as_bloch_vector(v, tol: Tolerances = DEFAULT_TOLERANCES, index: int | None = None) -> np.ndarray:
    """Validate ``v`` as a point of the closed unit ball and return a read-only copy."""
    arr = np.asarray(v, dtype=float)
    if arr.shape != (3,):
        raise ValueError(f"Bloch vector must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Bloch vector has non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm > 1.0 + tol.ball:
        raise StateOutsideBall(index, norm)
    return _frozen(arr)


def density_matrix_of(v, tol: Tolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """Return the qubit density matrix ``(1 + v.sigma) / 2``."""
    v = as_bloch_vector(v, tol)
    return 0.5 * (IDENTITY + np.einsum("k,kij->ij", v, PAULI))


def bloch_of(matrix) -> tuple[float, np.ndarray]:
    """Split a 2x2 operator ``(c0*1 + c.sigma)/2`` into ``(c0, c)``.

    Only the Hermitian part contributes; use this on Hermitian input.
    """
    m = np.asarray(matrix, dtype=complex)
    c0 = float(np.trace(m).real)
    c = np.array([np.trace(m @ s).real for s in PAULI])
    return c0, c


def operator_of(c0: float, c) -> np.ndarray:
    """Inverse of :func:`bloch_of`."""
    return 0.5 * (c0 * IDENTITY + np.einsum("k,kij->ij", np.asarray(c, dtype=float), PAULI))


@dataclass(frozen=True)
class EnsembleState:
    prior: float
    v: np.ndarray
    v_tilde: np.ndarray
    label: str | None = None


@dataclass(frozen=True)
class Ensemble:
    """Ordered list of ``(prior, Bloch vector)`` pairs.

    ``strict=False`` ensembles (built by :meth:`from_tilde`) skip the
    unit-ball check; they only arise as intermediate geometric reductions,
    where a rigid motion of the subnormalized vectors may leave the ball.
    """

    states: tuple[EnsembleState, ...]
    strict: bool = True
    priors: np.ndarray = field(init=False, repr=False, compare=False)
    vectors: np.ndarray = field(init=False, repr=False, compare=False)
    v_tilde: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "priors", _frozen([s.prior for s in self.states]))
        object.__setattr__(self, "vectors", _frozen(np.reshape([s.v for s in self.states], (-1, 3))))
        object.__setattr__(self, "v_tilde", _frozen(np.reshape([s.v_tilde for s in self.states], (-1, 3))))

    def __len__(self) -> int:
        return len(self.states)

    @property
    def labels(self) -> list[str | None]:
        return [s.label for s in self.states]

    @classmethod
    def from_tilde(cls, priors, v_tilde, labels=None) -> "Ensemble":
        """Build a non-strict ensemble directly from subnormalized vectors."""
        priors = np.asarray(priors, dtype=float)
        v_tilde = np.asarray(v_tilde, dtype=float).reshape(-1, 3)
        labels = labels or [None] * len(priors)
        states = []
        for p, vt, lab in zip(priors, v_tilde, labels):
            v = vt / p if p > 0 else np.zeros(3)
            states.append(EnsembleState(float(p), _frozen(v), _frozen(vt), lab))
        return cls(tuple(states), strict=False)

    def duplicates(self, tol: Tolerances = DEFAULT_TOLERANCES) -> dict[int, int]:
        """Map each later duplicate index to the first index it repeats."""
        out: dict[int, int] = {}
        for j in range(len(self)):
            for i in range(j):
                if i in out:
                    continue
                if (
                    abs(self.priors[i] - self.priors[j]) <= tol.duplicate
                    and np.max(np.abs(self.vectors[i] - self.vectors[j])) <= tol.duplicate
                ):
                    out[j] = i
                    break
        return out


def make_ensemble(entries: Iterable, tol: Tolerances = DEFAULT_TOLERANCES, labels: Sequence | None = None) -> Ensemble:
    """Validate ``[(prior, (x, y, z)), ...]`` and return an :class:`Ensemble`.

    Priors are never renormalized: a sum off by more than ``tol.priors``
    raises :class:`PriorsNotNormalized`.
    """
    entries = list(entries)
    if not entries:
        raise ValueError("an ensemble needs at least one state")
    labels = list(labels) if labels is not None else [None] * len(entries)
    states = []
    for i, (prior, v) in enumerate(entries):
        prior = float(prior)
        if not np.isfinite(prior):
            raise ValueError(f"state {i}: prior is not finite")
        if prior < 0:
            raise NegativePrior(i, prior)
        v = as_bloch_vector(v, tol, index=i)
        states.append(EnsembleState(prior, v, _frozen(prior * v), labels[i]))
    total = sum(s.prior for s in states)
    if abs(total - 1.0) > tol.priors:
        raise PriorsNotNormalized(f"priors sum to {total!r}, expected 1")
    return Ensemble(tuple(states))


@dataclass(frozen=True)
class LagrangeCandidate:
    """Candidate Lagrange operator ``(gamma0 * 1 + gamma.sigma) / 2``."""

    gamma0: float
    gamma: np.ndarray
    source: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "gamma0", float(self.gamma0))
        object.__setattr__(self, "gamma", _frozen(self.gamma))
        object.__setattr__(self, "source", tuple(int(i) for i in self.source))

    def operator(self) -> np.ndarray:
        return operator_of(self.gamma0, self.gamma)


@dataclass(frozen=True)
class PovmElement:
    """Rank-one element ``(alpha/2)(1 + n.sigma)`` assigned to ``state_index``.

    With ``full_operator=True`` the element is ``(alpha/2) * 1`` instead; this
    is how the no-measurement strategy (``alpha = 2``) is represented.
    """

    alpha: float
    n_hat: np.ndarray
    state_index: int
    full_operator: bool = False

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "n_hat", _frozen(self.n_hat))
        object.__setattr__(self, "state_index", int(self.state_index))
        if self.n_hat.shape != (3,):
            raise InvalidPovm(f"element for state {self.state_index}: direction must have 3 components")
        if abs(np.linalg.norm(self.n_hat) - 1.0) > DEFAULT_TOLERANCES.unit_norm:
            raise InvalidPovm(f"element for state {self.state_index}: direction is not a unit vector")
        upper = 2.0 if self.full_operator else 1.0
        if not (0.0 <= self.alpha <= upper + DEFAULT_TOLERANCES.unit_norm):
            raise InvalidPovm(f"element for state {self.state_index}: weight {self.alpha!r} outside [0, {upper:g}]")

    @property
    def bloch_part(self) -> np.ndarray:
        """The ``alpha * n`` contribution to the completeness sum."""
        return np.zeros(3) if self.full_operator else self.alpha * self.n_hat

    def matrix(self) -> np.ndarray:
        if self.full_operator:
            return 0.5 * self.alpha * IDENTITY
        return operator_of(self.alpha, self.alpha * self.n_hat)

    def outcome_probability(self, v) -> float:
        """``Tr(pi rho)`` for the state with Bloch vector ``v``."""
        if self.full_operator:
            return 0.5 * self.alpha
        return 0.5 * self.alpha * (1.0 + float(np.dot(self.n_hat, v)))


@dataclass(frozen=True)
class Povm:
    elements: tuple[PovmElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))

    def __len__(self) -> int:
        return len(self.elements)

    @property
    def alphas(self) -> np.ndarray:
        return np.array([e.alpha for e in self.elements])

    def completeness_residuals(self) -> tuple[float, float]:
        """Return ``(|sum alpha - 2|, |sum alpha n|)``."""
        total = sum(e.alpha for e in self.elements)
        vec = np.sum([e.bloch_part for e in self.elements], axis=0) if self.elements else np.zeros(3)
        return abs(total - 2.0), float(np.linalg.norm(vec))

    def operator_sum(self) -> np.ndarray:
        return np.sum([e.matrix() for e in self.elements], axis=0)

    def element_for(self, state_index: int) -> np.ndarray:
        """Sum of the operators assigned to ``state_index`` (zero if none)."""
        mats = [e.matrix() for e in self.elements if e.state_index == state_index]
        return np.sum(mats, axis=0) if mats else np.zeros((2, 2), dtype=complex)


def make_povm(elements: Iterable[PovmElement], tol: Tolerances = DEFAULT_TOLERANCES) -> Povm:
    """Build a :class:`Povm`, raising :class:`InvalidPovm` if it is not complete."""
    povm = Povm(tuple(elements))
    if not povm.elements:
        raise InvalidPovm("POVM has no elements")
    weight_res, vec_res = povm.completeness_residuals()
    if weight_res > tol.completeness:
        raise InvalidPovm(f"completeness violated: sum of alpha = {float(povm.alphas.sum())!r}, expected 2")
    if vec_res > tol.completeness:
        raise InvalidPovm(f"completeness violated: |sum alpha n| = {vec_res!r}, expected 0")
    return povm


@dataclass(frozen=True)
class AlphaFamily:
    """All weight assignments solving the completeness equations for fixed directions.

    A member is ``base + sum_k t[k] * free_directions[k]``. ``box[k]`` is the
    interval of ``t[k]`` (others held at zero) that keeps every weight in
    ``[0, 1]``.
    """

    indices: tuple[int, ...]
    n_hats: np.ndarray
    base: np.ndarray
    free_directions: np.ndarray
    box: tuple[tuple[float, float], ...]
    full_operator: bool = False

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
        object.__setattr__(self, "n_hats", _frozen(np.reshape(self.n_hats, (-1, 3))))
        object.__setattr__(self, "base", _frozen(self.base))
        object.__setattr__(self, "free_directions", _frozen(np.reshape(self.free_directions, (-1, len(self.indices)))))
        object.__setattr__(self, "box", tuple((float(a), float(b)) for a, b in self.box))

    @property
    def dimension(self) -> int:
        return len(self.free_directions)

    def alphas(self, t=None) -> np.ndarray:
        if t is None or self.dimension == 0:
            return np.array(self.base)
        return self.base + np.asarray(t, dtype=float) @ self.free_directions

    def povm(self, t=None) -> Povm:
        alphas = np.clip(self.alphas(t), 0.0, 2.0 if self.full_operator else 1.0)
        return Povm(
            tuple(
                PovmElement(a, n, i, self.full_operator)
                for a, n, i in zip(alphas, self.n_hats, self.indices)
            )
        )

    def extreme_points(self) -> list[np.ndarray]:
        """Parameter vectors at both ends of every box interval."""
        points = []
        for k, (lo, hi) in enumerate(self.box):
            for end in (lo, hi):
                t = np.zeros(self.dimension)
                t[k] = end
                points.append(t)
        return points

    def component_range(self, position: int) -> tuple[float, float]:
        """Range of the weight at ``position`` over the whole family."""
        if self.dimension == 0:
            a = float(self.base[position])
            return a, a
        if self.dimension == 1:
            lo, hi = self.box[0]
            d = self.free_directions[0, position]
            ends = (self.base[position] + lo * d, self.base[position] + hi * d)
            return float(min(ends)), float(max(ends))
        from scipy.optimize import linprog

        m = len(self.indices)
        bounds = [(None, None)] * self.dimension
        a_ub = np.vstack([self.free_directions.T, -self.free_directions.T])
        b_ub = np.concatenate([np.ones(m) - self.base, self.base])
        c = self.free_directions[:, position]
        lo = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
        hi = linprog(-c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
        return float(self.base[position] + lo.fun), float(self.base[position] - hi.fun)


@dataclass(frozen=True)
class Solution:
    ensemble: Ensemble
    candidate: LagrangeCandidate
    detected: tuple[int, ...]
    povm_family: AlphaFamily
    no_measurement: bool = False

    @property
    def p_guess(self) -> float:
        return self.candidate.gamma0

    @property
    def povm(self) -> Povm:
        return self.povm_family.povm()

    def margins(self) -> np.ndarray:
        """``gamma0 - p_i - |v~_i - gamma|`` for every state."""
        diff = self.ensemble.v_tilde - self.candidate.gamma
        return self.candidate.gamma0 - self.ensemble.priors - np.linalg.norm(diff, axis=1)


@dataclass(frozen=True)
class Decomposition:
    """Split of a POVM into two parts, each complete after rescaling."""

    subsets: tuple[tuple[int, ...], tuple[int, ...]]
    weight_w: float
    rescaled: tuple[Povm, Povm]
