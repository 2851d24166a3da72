"""Independent checks of a discrimination result.

* :func:`certify` tests the optimality conditions on explicit 2x2 matrices.
* :func:`dual_oracle` minimizes ``max_i (p_i + |v~_i - g|)`` directly.
* :func:`sample_outcomes` simulates measurement records.
* The ``*_reference`` functions hold closed-form results for the two-state,
  trine and four-symmetric-state problems.

Nothing here imports the solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import minimize

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    AngleOutOfRange,
    InvalidPovm,
    OutOfParameterRegion,
    ProbabilityOutOfRange,
    WrongArity,
)
from .model import (
    IDENTITY,
    Ensemble,
    Povm,
    bloch_of,
    density_matrix_of,
    make_ensemble,
)

# --------------------------------------------------------------------------
# 2x2 closed forms


def hermitian_min_eigenvalue(h: np.ndarray) -> float:
    """Smallest eigenvalue of a 2x2 Hermitian matrix from its trace and determinant."""
    a, d = h[0, 0].real, h[1, 1].real
    off = abs(0.5 * (h[0, 1] + np.conj(h[1, 0])))
    return float(0.5 * (a + d) - np.hypot(0.5 * (a - d), off))


def spectral_norm_2x2(m: np.ndarray) -> float:
    """Largest singular value of a 2x2 matrix."""
    g = m.conj().T @ m
    a, d = g[0, 0].real, g[1, 1].real
    lam = 0.5 * (a + d) + np.hypot(0.5 * (a - d), abs(g[0, 1]))
    return float(np.sqrt(max(lam, 0.0)))


# --------------------------------------------------------------------------
# certificate


@dataclass(frozen=True)
class CertificateReport:
    gamma_reconstructed: tuple[float, np.ndarray]
    hermiticity_residual: float
    psd_margins: np.ndarray
    stationarity_residuals: np.ndarray
    completeness_residual: float
    optimal: bool

    @property
    def p_guess(self) -> float:
        return self.gamma_reconstructed[0]

    def worst(self) -> tuple[str, int | None, float]:
        """The most severe violation as ``(kind, state, value)``."""
        i = int(np.argmin(self.psd_margins))
        j = int(np.argmax(self.stationarity_residuals))
        kinds = [
            ("psd_margin", i, float(self.psd_margins[i])),
            ("stationarity", j, float(self.stationarity_residuals[j])),
            ("hermiticity", None, self.hermiticity_residual),
            ("completeness", None, self.completeness_residual),
        ]
        if self.psd_margins[i] < 0:
            return kinds[0]
        return max(kinds[1:], key=lambda k: k[2])


def certify(ensemble: Ensemble, povm: Povm, tol: Tolerances = DEFAULT_TOLERANCES) -> CertificateReport:
    """Evaluate the optimality conditions for ``povm`` on ``ensemble``.

    ``Gamma = sum_i p_i rho_i pi_i`` must be Hermitian, dominate every
    ``p_i rho_i``, and satisfy ``(Gamma - p_i rho_i) pi_i = 0``.
    """
    n = len(ensemble)
    for e in povm.elements:
        if not 0 <= e.state_index < n:
            raise InvalidPovm(f"POVM element refers to state {e.state_index}, ensemble has {n}")
    rho_t = [p * density_matrix_of(v) if p > 0 else np.zeros((2, 2), complex)
             for p, v in zip(ensemble.priors, ensemble.vectors)]
    if not ensemble.strict:
        from .model import operator_of

        rho_t = [operator_of(p, vt) for p, vt in zip(ensemble.priors, ensemble.v_tilde)]
    pis = [povm.element_for(i) for i in range(n)]
    gamma = sum(r @ pi for r, pi in zip(rho_t, pis))
    herm = float(np.max(np.abs(gamma - gamma.conj().T)))
    gamma_h = 0.5 * (gamma + gamma.conj().T)
    psd = np.array([hermitian_min_eigenvalue(gamma_h - r) for r in rho_t])
    stat = np.array([spectral_norm_2x2((gamma_h - r) @ pi) for r, pi in zip(rho_t, pis)])
    compl = float(np.max(np.abs(povm.operator_sum() - IDENTITY)))
    optimal = bool(
        herm <= tol.hermiticity
        and np.all(psd >= tol.psd_margin)
        and np.all(stat <= tol.stationarity)
        and compl <= tol.completeness
    )
    return CertificateReport(bloch_of(gamma_h), herm, psd, stat, compl, optimal)


# --------------------------------------------------------------------------
# dual oracle


def _objective(ensemble: Ensemble):
    p, vt = ensemble.priors, ensemble.v_tilde

    def f(g):
        return float(np.max(p + np.linalg.norm(vt - g, axis=1)))

    return f


def _grid_minimum(ensemble: Ensemble, step: float) -> np.ndarray:
    p, vt = ensemble.priors, ensemble.v_tilde
    lo, hi = vt.min(axis=0), vt.max(axis=0)
    axes = [np.linspace(a, b, max(2, int(np.ceil((b - a) / step)) + 1)) if b > a else np.array([a])
            for a, b in zip(lo, hi)]
    best_val, best_pt = np.inf, None
    for x in axes[0]:
        yy, zz = np.meshgrid(axes[1], axes[2], indexing="ij")
        pts = np.column_stack([np.full(yy.size, x), yy.ravel(), zz.ravel()])
        dist = np.linalg.norm(pts[:, None, :] - vt[None, :, :], axis=2)
        vals = np.max(p[None, :] + dist, axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_pt = vals[k], pts[k]
    return best_pt


def dual_oracle(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOLERANCES) -> tuple[float, np.ndarray]:
    """Minimize ``max_i (p_i + |v~_i - g|)`` over ``g`` in 3-space.

    Coarse grid over the bounding box of the subnormalized vectors, then
    Nelder-Mead restarted from its own result until it stops improving. The
    minimum value upper-bounds the guessing probability and equals it.
    """
    f = _objective(ensemble)
    x = _grid_minimum(ensemble, tol.oracle_grid_step)
    fx = f(x)
    scale = tol.oracle_grid_step
    for _ in range(60):
        res = minimize(
            f,
            x,
            method="Nelder-Mead",
            options={
                "xatol": tol.oracle_xtol * 1e-3,
                "fatol": 1e-15,
                "maxiter": 4000,
                "adaptive": True,
                "initial_simplex": x + scale * np.vstack([np.zeros(3), np.eye(3)]),
            },
        )
        improved = fx - res.fun
        if res.fun < fx:
            x, fx = res.x, float(res.fun)
        scale = max(scale * 0.3, tol.oracle_xtol)
        if improved <= 1e-15 and scale <= tol.oracle_xtol:
            break
    return fx, np.array(x)


# --------------------------------------------------------------------------
# Monte Carlo


@dataclass(frozen=True)
class SampleReport:
    shots: int
    seed: int
    confusion: np.ndarray
    empirical_success: float
    theoretical_success: float
    z_score: float


def outcome_probabilities(ensemble: Ensemble, povm: Povm) -> np.ndarray:
    """Matrix ``P[i, k] = Tr(pi_k rho_i)`` over states ``i`` and elements ``k``."""
    return np.array([[e.outcome_probability(v) for e in povm.elements] for v in ensemble.vectors])


def sample_outcomes(ensemble: Ensemble, povm: Povm, shots_per_state: int, seed: int) -> SampleReport:
    """Draw ``shots_per_state`` outcomes for every state with a seeded PCG64 generator."""
    if shots_per_state < 1:
        raise ValueError("shots_per_state must be >= 1")
    probs = outcome_probabilities(ensemble, povm)
    if np.any(probs < -1e-12) or np.any(probs > 1 + 1e-12):
        i, k = np.unravel_index(np.argmax(np.abs(probs - 0.5)), probs.shape)
        raise ProbabilityOutOfRange(f"P({k}|{i}) = {probs[i, k]!r} outside [0, 1]")
    sums = probs.sum(axis=1)
    if np.any(np.abs(sums - 1.0) > 1e-9):
        i = int(np.argmax(np.abs(sums - 1.0)))
        raise ProbabilityOutOfRange(f"outcome probabilities for state {i} sum to {sums[i]!r}, not 1")
    probs = np.clip(probs, 0.0, 1.0)
    rng = np.random.Generator(np.random.PCG64(seed))
    confusion = np.array([rng.multinomial(shots_per_state, row / row.sum()) for row in probs])
    owner = np.array([e.state_index for e in povm.elements])
    priors = ensemble.priors
    n = len(ensemble)
    correct = np.array([confusion[i, owner == i].sum() for i in range(n)]) / shots_per_state
    q = np.array([probs[i, owner == i].sum() for i in range(n)])
    empirical = float(np.dot(priors, correct))
    theoretical = float(np.dot(priors, q))
    var = float(np.sum(priors**2 * q * (1 - q)) / shots_per_state)
    if var > 0:
        z = (empirical - theoretical) / np.sqrt(var)
    else:
        z = 0.0 if abs(empirical - theoretical) <= 1e-12 else float("inf")
    return SampleReport(shots_per_state, seed, confusion, empirical, theoretical, float(z))


# --------------------------------------------------------------------------
# closed-form references


def helstrom_two_state(ensemble: Ensemble) -> float:
    """``max(p_max, (1 + |p_1 v_1 - p_2 v_2|) / 2)`` for two states."""
    if len(ensemble) != 2:
        raise WrongArity(f"expected 2 states, got {len(ensemble)}")
    d = float(np.linalg.norm(ensemble.v_tilde[0] - ensemble.v_tilde[1]))
    return max(float(ensemble.priors.max()), 0.5 * (1.0 + d))


TRINE_VECTORS = np.array(
    [
        [0.0, 0.0, 1.0],
        [np.sqrt(3) / 2, 0.0, -0.5],
        [-np.sqrt(3) / 2, 0.0, -0.5],
    ]
)


def trine_ensemble(p: float = 1 / 3, delta: float = 0.0) -> Ensemble:
    """Trine states in the x-z plane with priors ``(p + delta, p - delta, 1 - 2p)``."""
    priors = (p + delta, p - delta, 1.0 - 2.0 * p)
    return make_ensemble(list(zip(priors, TRINE_VECTORS)))


def trine_boundary(p: float) -> float | None:
    """Largest ``delta`` for which two elements suffice; ``None`` if none do."""
    arg = 2 - 6 * p + 5 * p**2 - 2 * (1 - 2 * p) * np.sqrt(4 * p**2 - 2 * p + 1)
    return float(np.sqrt(arg)) if arg >= 0 else None


Regime = Literal["two_element", "three_element"]


@dataclass(frozen=True)
class TrineScenario:
    p: float
    delta: float
    regime: Regime


def _check_trine_region(p: float, delta: float, slack: float = 1e-12):
    if not (1 / 3 - slack <= p <= 0.5 + slack):
        raise OutOfParameterRegion(f"p = {p!r} outside [1/3, 1/2]")
    if not (-slack <= delta <= min(3 * p - 1, p) + slack):
        raise OutOfParameterRegion(f"delta = {delta!r} outside [0, min(3p - 1, p)] for p = {p!r}")


def trine_scenario(p: float, delta: float) -> TrineScenario:
    _check_trine_region(p, delta)
    bound = trine_boundary(p)
    regime: Regime = "two_element" if bound is not None and delta <= bound + 1e-12 else "three_element"
    return TrineScenario(p, delta, regime)


def trine_reference(p: float, delta: float) -> tuple[float, Regime, np.ndarray]:
    """Closed-form ``(p_guess, regime, gamma)`` for the weighted trine."""
    scenario = trine_scenario(p, delta)
    if scenario.regime == "two_element":
        d12 = np.sqrt(3 * p**2 + delta**2)
        p1, p2 = p + delta, p - delta
        v1, v2 = p1 * TRINE_VECTORS[0], p2 * TRINE_VECTORS[1]
        gamma = 0.5 * ((v1 + v2) + (p1 - p2) * (v1 - v2) / d12)
        return float(0.5 * d12 + p), scenario.regime, gamma
    den = 9 * p**4 - 4 * p**3 + 6 * p**2 * delta**2 - 12 * p * delta**2 + 4 * delta**2 + delta**4
    gx = 2 * np.sqrt(3) * (1 - 2 * p) * (p - delta) * (p + delta) ** 2 * (delta - 3 * p + 1) / den
    gz = 2 * (1 - 2 * p) * (p**2 - delta**2) * (-3 * p**2 + (6 * delta + 1) * p + delta**2 - 3 * delta) / den
    pg = 2 * (1 - 2 * p) * (p**2 - delta**2) * (3 * p**2 + delta**2 - 2 * p) / den
    return float(pg), scenario.regime, np.array([gx, 0.0, gz])


@dataclass(frozen=True)
class ThreeStateCanonical:
    """Three states in the x-z plane: purities ``a, b, c`` and angles ``theta, phi``.

    State 1 lies on +z; state 2 at angle ``theta`` towards +x, state 3 at
    ``phi`` towards -x. Priors are ordered ``p1 >= p2 >= p3``.
    """

    a: float
    b: float
    c: float
    theta: float
    phi: float
    priors: tuple[float, float, float]

    def __post_init__(self):
        p1, p2, p3 = self.priors
        if not p1 >= p2 >= p3:
            raise ValueError("priors must be ordered p1 >= p2 >= p3")
        if not all(0.0 <= x <= 1.0 for x in (self.a, self.b, self.c)):
            raise ValueError("purities must lie in [0, 1]")

    def bloch_vectors(self) -> np.ndarray:
        return np.array(
            [
                [0.0, 0.0, self.a],
                [self.b * np.sin(self.theta), 0.0, self.b * np.cos(self.theta)],
                [-self.c * np.sin(self.phi), 0.0, self.c * np.cos(self.phi)],
            ]
        )

    def v_tilde(self) -> np.ndarray:
        return np.asarray(self.priors)[:, None] * self.bloch_vectors()

    def density_matrices(self) -> list[np.ndarray]:
        a, b, c, th, ph = self.a, self.b, self.c, self.theta, self.phi
        return [
            0.5 * np.array([[1 + a, 0], [0, 1 - a]], dtype=complex),
            0.5 * np.array([[1 + b * np.cos(th), b * np.sin(th)], [b * np.sin(th), 1 - b * np.cos(th)]], dtype=complex),
            0.5 * np.array([[1 + c * np.cos(ph), -c * np.sin(ph)], [-c * np.sin(ph), 1 - c * np.cos(ph)]], dtype=complex),
        ]

    def ensemble(self, tol: Tolerances = DEFAULT_TOLERANCES) -> Ensemble:
        return make_ensemble(list(zip(self.priors, self.bloch_vectors())), tol)


def four_symmetric_ensemble(theta: float) -> Ensemble:
    """Equiprobable ``+z``, ``(sin t, 0, cos t)``, ``-z``, ``(-sin t, 0, cos t)``."""
    s, c = np.sin(theta), np.cos(theta)
    vecs = [(0, 0, 1), (s, 0, c), (0, 0, -1), (-s, 0, c)]
    return make_ensemble([(0.25, v) for v in vecs])


@dataclass(frozen=True)
class FourSymmetricReference:
    theta: float
    alpha4_interval: tuple[float, float]
    extreme_solutions: tuple[np.ndarray, np.ndarray]
    decomposable_at_pi_half: tuple[tuple[int, int], tuple[int, int]] | None
    degenerate: bool

    def alphas(self, alpha4: float) -> np.ndarray:
        """Weights ``(a1, a2, a3, a4)`` of the family member with fourth weight ``alpha4``."""
        c = np.cos(self.theta)
        return np.array([1 - (1 + c) * alpha4, alpha4, 1 - (1 - c) * alpha4, alpha4])


def four_symmetric_reference(theta: float) -> FourSymmetricReference:
    """Closed-form weight family of the four symmetric pure states.

    At ``theta = pi/2`` the family is ``a1 = a3 = 1 - a2``, ``a2 = a4`` and the
    measurement splits into the Z basis (elements 0, 2) and X basis (1, 3).
    """
    if not (0.0 <= theta <= np.pi / 2 + 1e-15):
        raise AngleOutOfRange(f"theta = {theta!r} outside [0, pi/2]")
    c = np.cos(theta)
    upper = 1.0 / (1.0 + c)
    lower_sol = np.array([1.0, 0.0, 1.0, 0.0])
    upper_sol = np.array([0.0, upper, 2 * c / (1 + c), upper])
    split = ((0, 2), (1, 3)) if abs(theta - np.pi / 2) <= 1e-12 else None
    return FourSymmetricReference(theta, (0.0, upper), (lower_sol, upper_sol), split, degenerate=theta == 0.0)
