"""Constructive minimum-error discrimination for qubit ensembles.

The optimal measurement is found through its Lagrange operator
``Gamma = (gamma0 * 1 + gamma.sigma) / 2``. Every candidate for ``Gamma`` is
built from one, two, three or four states whose hyperbola branches meet, and
accepted only if ``gamma0 - p_i >= |v~_i - gamma|`` holds for every state and
the completeness equations admit nonnegative weights. Equal priors go through
the minimal enclosing sphere instead.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.optimize import linprog, minimize

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    CollinearPoints,
    DegenerateAllCoincident,
    GammaCoincidesWithState,
    InfeasibleAlphaSystem,
    NoIntersection,
    NotApplicable,
    NotConstructible,
    SolverExhausted,
)
from .geometry import circumsphere, hyperbola_pair, plane_frame
from .model import (
    AlphaFamily,
    Decomposition,
    Ensemble,
    LagrangeCandidate,
    Povm,
    PovmElement,
    Solution,
)

log = logging.getLogger(__name__)

Z_AXIS = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class CandidateReport:
    candidate: LagrangeCandidate
    valid: bool
    violations: tuple[tuple[int, float], ...]
    margins: np.ndarray


def _margins(ensemble: Ensemble, gamma0: float, gamma) -> np.ndarray:
    return gamma0 - ensemble.priors - np.linalg.norm(ensemble.v_tilde - np.asarray(gamma), axis=1)


def validate_candidate(ensemble: Ensemble, candidate: LagrangeCandidate, tol: Tolerances = DEFAULT_TOLERANCES) -> CandidateReport:
    """Check ``gamma0 - p_i - |v~_i - gamma| >= -tol.equality`` for every state."""
    margins = _margins(ensemble, candidate.gamma0, candidate.gamma)
    violations = tuple((int(i), float(margins[i])) for i in np.flatnonzero(margins < -tol.equality))
    return CandidateReport(candidate, not violations, violations, margins)


def _active_states(ensemble: Ensemble, tol: Tolerances) -> list[int]:
    """Indices that may be detected: positive prior and not a repeat of an earlier state."""
    dup = ensemble.duplicates(tol)
    return [i for i in range(len(ensemble)) if i not in dup and ensemble.priors[i] > 0.0]


def _no_measurement_solution(ensemble: Ensemble, j: int, gamma0: float | None = None) -> Solution:
    cand = LagrangeCandidate(ensemble.priors[j] if gamma0 is None else gamma0, ensemble.v_tilde[j], (j,))
    family = AlphaFamily(
        indices=(j,),
        n_hats=[Z_AXIS],
        base=[2.0],
        free_directions=np.zeros((0, 1)),
        box=(),
        full_operator=True,
    )
    return Solution(ensemble, cand, (j,), family, no_measurement=True)


def check_no_measurement(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOLERANCES) -> Solution:
    """Return the guess-without-measuring solution, or raise :class:`NotApplicable`.

    Requires a state ``j`` whose prior strictly exceeds every other (repeated
    copies of ``j`` aside) with ``p_j - p_i >= |v~_j - v~_i|`` for all ``i``.
    """
    active = _active_states(ensemble, tol)
    p = ensemble.priors
    j = max(active, key=lambda i: (p[i], -i))
    if any(p[i] >= p[j] for i in active if i != j):
        raise NotApplicable("no state has a strictly greatest prior")
    gaps = p[j] - p - np.linalg.norm(ensemble.v_tilde - ensemble.v_tilde[j], axis=1)
    if np.any(gaps < -tol.equality):
        raise NotApplicable(f"state {int(np.argmin(gaps))} violates the no-measurement condition")
    return _no_measurement_solution(ensemble, j)


def pair_candidate(ensemble: Ensemble, l: int, m: int) -> LagrangeCandidate:
    """Point of the segment between the two vectors lying on their hyperbola branch."""
    hp = hyperbola_pair(ensemble, l, m)
    p = ensemble.priors
    vt = ensemble.v_tilde
    gamma0 = 0.5 * (p[hp.l] + p[hp.m] + hp.d_lm)
    gamma = 0.5 * ((vt[hp.l] + vt[hp.m]) + (p[hp.l] - p[hp.m]) * hp.e_lm)
    return LagrangeCandidate(gamma0, gamma, tuple(sorted((hp.l, hp.m))))


# --------------------------------------------------------------------------
# hyperbola intersections


def _newton(residual, jacobian, x0, tol: Tolerances):
    """Damped Newton iteration; returns the root or ``None``."""
    x = np.array(x0, dtype=float)
    f = residual(x)
    fn = np.linalg.norm(f)
    for _ in range(tol.newton_max_iter):
        if fn <= tol.newton_residual:
            return x
        try:
            step = np.linalg.lstsq(jacobian(x), -f, rcond=None)[0]
        except np.linalg.LinAlgError:
            return None
        lam = 1.0
        while lam > 1e-10:
            trial = x + lam * step
            ft = residual(trial)
            if np.linalg.norm(ft) < fn:
                break
            lam *= 0.5
        else:
            return None
        x, f, fn = trial, ft, np.linalg.norm(ft)
    return x if fn <= tol.newton_residual else None


def _difference_system(foci: np.ndarray, priors: np.ndarray):
    """Residuals ``|f_k - g| - |f_0 - g| - (p_0 - p_k)`` for k >= 1 and their Jacobian."""
    targets = priors[0] - priors[1:]

    def residual(g):
        d = np.linalg.norm(foci - g, axis=1)
        return d[1:] - d[0] - targets

    def jacobian(g):
        diff = g - foci
        d = np.linalg.norm(diff, axis=1)[:, None]
        unit = diff / np.where(d > 0, d, 1.0)
        return unit[1:] - unit[0]

    return residual, jacobian


def _barycentric(simplex: np.ndarray, point: np.ndarray) -> np.ndarray:
    base = simplex[0]
    edges = (simplex[1:] - base).T
    lam = np.linalg.lstsq(edges, point - base, rcond=None)[0]
    return np.concatenate([[1.0 - lam.sum()], lam])


def _in_hull(foci: np.ndarray, point: np.ndarray, tol: Tolerances) -> bool:
    if len(foci) == foci.shape[1] + 1:
        return np.min(_barycentric(foci, point)) >= -tol.hull
    # more foci than a simplex (coplanar quadruple): inside any triangle of them
    for tri in combinations(range(len(foci)), foci.shape[1] + 1):
        simplex = foci[list(tri)]
        if np.linalg.matrix_rank(simplex[1:] - simplex[0], tol=1e-12) < foci.shape[1]:
            continue
        if np.min(_barycentric(simplex, point)) >= -tol.hull:
            return True
    return False


def _intersections(foci, priors, starts, tol: Tolerances) -> list[np.ndarray]:
    residual, jacobian = _difference_system(foci, priors)
    roots: list[np.ndarray] = []
    for x0 in starts:
        root = _newton(residual, jacobian, x0, tol)
        if root is None:
            continue
        if not _in_hull(foci, root, tol):
            continue
        if all(np.linalg.norm(root - r) > 1e-9 for r in roots):
            roots.append(root)
    return roots


def _perturbed(center: np.ndarray, scale: float, dim: int) -> list[np.ndarray]:
    if dim == 2:
        angles = 2 * np.pi * np.arange(8) / 8
        offsets = np.column_stack([np.cos(angles), np.sin(angles)])
    else:
        offsets = np.array([[sx, sy, sz] for sx in (-1, 1) for sy in (-1, 1) for sz in (-1, 1)]) / np.sqrt(3)
    return [center + 0.25 * scale * o for o in offsets]


def _sorted_by_prior(ensemble: Ensemble, idx) -> tuple[int, ...]:
    return tuple(sorted(idx, key=lambda i: (-ensemble.priors[i], i)))


def _triple_roots(ensemble: Ensemble, l: int, m: int, n: int, tol: Tolerances) -> list[LagrangeCandidate]:
    idx = _sorted_by_prior(ensemble, (l, m, n))
    p = ensemble.priors[list(idx)]
    pts = ensemble.v_tilde[list(idx)]
    try:
        frame = plane_frame(pts, anchor=0)
    except CollinearPoints:
        return []
    flat = frame.apply(pts)[:, [0, 2]]
    centroid = flat.mean(axis=0)
    scale = max(np.max(np.linalg.norm(flat - centroid, axis=1)), 1e-12)
    starts = [centroid]
    for a, b in combinations(range(3), 2):
        try:
            pc = pair_candidate(ensemble, idx[a], idx[b])
        except NotConstructible:
            continue
        starts.append(frame.apply(pc.gamma)[[0, 2]])
    starts += _perturbed(centroid, scale, 2)
    out = []
    for root in _intersections(flat, p, starts, tol):
        gamma = frame.inverse(np.array([root[0], 0.0, root[1]]))
        gamma0 = p[0] + np.linalg.norm(pts[0] - gamma)
        out.append(LagrangeCandidate(gamma0, gamma, tuple(sorted(idx))))
    return out


def triple_candidate(ensemble: Ensemble, l: int, m: int, n: int, tol: Tolerances = DEFAULT_TOLERANCES) -> LagrangeCandidate:
    """Common point of the three pair hyperbolas inside the triangle of the foci.

    The search runs in the plane of the three vectors.
    """
    roots = _triple_roots(ensemble, l, m, n, tol)
    if not roots:
        raise NoIntersection(f"triple ({l}, {m}, {n}) has no intersection inside its triangle")
    return roots[0]


def _quad_roots(ensemble: Ensemble, idx4, tol: Tolerances) -> list[LagrangeCandidate]:
    idx = _sorted_by_prior(ensemble, idx4)
    p = ensemble.priors[list(idx)]
    pts = ensemble.v_tilde[list(idx)]
    edges = pts[1:] - pts[0]
    if abs(np.linalg.det(edges)) <= 1e-14:
        return _coplanar_quad_roots(ensemble, idx, tol)
    centroid = pts.mean(axis=0)
    scale = max(np.max(np.linalg.norm(pts - centroid, axis=1)), 1e-12)
    starts = [centroid]
    for face in combinations(idx, 3):
        starts += [c.gamma for c in _triple_roots(ensemble, *face, tol)]
    starts += _perturbed(centroid, scale, 3)
    out = []
    for root in _intersections(pts, p, starts, tol):
        gamma0 = p[0] + np.linalg.norm(pts[0] - root)
        out.append(LagrangeCandidate(gamma0, root, tuple(sorted(idx))))
    return out


def _coplanar_quad_roots(ensemble: Ensemble, idx, tol: Tolerances) -> list[LagrangeCandidate]:
    # In 3-D the equations leave a line of solutions normal to the plane; the
    # hull restriction picks its in-plane point, so solve there directly.
    p = ensemble.priors[list(idx)]
    pts = ensemble.v_tilde[list(idx)]
    frame = None
    for tri in combinations(range(4), 3):
        try:
            frame = plane_frame(pts[list(tri)])
            break
        except CollinearPoints:
            continue
    if frame is None:
        return []
    flat3 = frame.apply(pts)
    if np.max(np.abs(flat3[:, 1])) > 1e-9:
        return []
    flat = flat3[:, [0, 2]]
    centroid = flat.mean(axis=0)
    scale = max(np.max(np.linalg.norm(flat - centroid, axis=1)), 1e-12)
    starts = [centroid]
    for face in combinations(idx, 3):
        starts += [frame.apply(c.gamma)[[0, 2]] for c in _triple_roots(ensemble, *face, tol)]
    starts += _perturbed(centroid, scale, 2)
    out = []
    for root in _intersections(flat, p, starts, tol):
        gamma = frame.inverse(np.array([root[0], 0.0, root[1]]))
        gamma0 = p[0] + np.linalg.norm(pts[0] - gamma)
        out.append(LagrangeCandidate(gamma0, gamma, tuple(sorted(idx))))
    return out


def quad_candidate(ensemble: Ensemble, l: int, m: int, n: int, o: int, tol: Tolerances = DEFAULT_TOLERANCES) -> LagrangeCandidate:
    """Common point of the six pair hyperbolas of four states inside their tetrahedron."""
    roots = _quad_roots(ensemble, (l, m, n, o), tol)
    if not roots:
        raise NoIntersection(f"quadruple ({l}, {m}, {n}, {o}) has no intersection inside its tetrahedron")
    return roots[0]


# --------------------------------------------------------------------------
# measurement assembly


def detection_vectors(
    ensemble: Ensemble,
    candidate: LagrangeCandidate,
    tol: Tolerances = DEFAULT_TOLERANCES,
    eligible=None,
) -> list[tuple[int, np.ndarray]]:
    """Unit vectors ``(v~_i - gamma)/|v~_i - gamma|`` of every state saturating the bound.

    ``eligible`` restricts which indices may be detected (by default: positive
    prior, first copy of repeated states).
    """
    if eligible is None:
        eligible = _active_states(ensemble, tol)
    margins = _margins(ensemble, candidate.gamma0, candidate.gamma)
    out = []
    for i in eligible:
        if abs(margins[i]) > tol.equality:
            continue
        diff = ensemble.v_tilde[i] - candidate.gamma
        norm = np.linalg.norm(diff)
        if norm <= tol.equality:
            raise GammaCoincidesWithState(i)
        out.append((int(i), diff / norm))
    return out


def _interval(base: np.ndarray, direction: np.ndarray) -> tuple[float, float]:
    lo, hi = -np.inf, np.inf
    for b, d in zip(base, direction):
        if abs(d) < 1e-14:
            continue
        ends = sorted(((-b) / d, (1.0 - b) / d))
        lo, hi = max(lo, ends[0]), min(hi, ends[1])
    return lo, hi


def solve_alphas(detection, tol: Tolerances = DEFAULT_TOLERANCES) -> AlphaFamily:
    """Weights with ``sum alpha = 2``, ``sum alpha n = 0`` and ``0 <= alpha <= 1``.

    Unique when the system has full column rank; otherwise the family is the
    minimum-norm feasible point plus an orthonormal basis of the null space.
    """
    detection = list(detection)
    if len(detection) < 2:
        raise InfeasibleAlphaSystem("need at least two detection vectors")
    indices = [i for i, _ in detection]
    n_hats = np.array([n for _, n in detection], dtype=float)
    m = len(indices)
    a = np.vstack([np.ones(m), n_hats.T])
    b = np.array([2.0, 0.0, 0.0, 0.0])
    _, s, vt = np.linalg.svd(a)
    rank = int(np.sum(s > 1e-10 * s[0]))
    null = vt[rank:]
    alpha_mn = np.linalg.lstsq(a, b, rcond=None)[0]
    if np.linalg.norm(a @ alpha_mn - b) > tol.completeness:
        raise InfeasibleAlphaSystem("completeness equations are inconsistent for these directions")
    slack = tol.completeness

    if len(null) == 0:
        if np.any(alpha_mn < -slack) or np.any(alpha_mn > 1 + slack):
            raise InfeasibleAlphaSystem(f"unique weights {alpha_mn} leave [0, 1]")
        base = np.clip(alpha_mn, 0.0, 1.0)
        return AlphaFamily(indices, n_hats, base, np.zeros((0, m)), ())

    # alpha = alpha_mn + t @ null, with alpha_mn orthogonal to the null space,
    # so |alpha|^2 = |alpha_mn|^2 + |t|^2.
    k = len(null)
    a_ub = np.vstack([null.T, -null.T])
    b_ub = np.concatenate([1.0 - alpha_mn, alpha_mn])
    lp = linprog(np.zeros(k), A_ub=a_ub, b_ub=b_ub + slack, bounds=[(None, None)] * k, method="highs")
    if lp.status != 0:
        raise InfeasibleAlphaSystem("no weights in [0, 1] satisfy completeness")
    res = minimize(
        lambda t: t @ t,
        lp.x,
        jac=lambda t: 2 * t,
        constraints=[{"type": "ineq", "fun": lambda t: b_ub - a_ub @ t, "jac": lambda t: -a_ub}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    t = res.x if res.success and np.all(b_ub - a_ub @ res.x >= -slack) else lp.x
    base = alpha_mn + t @ null
    base = np.clip(base, 0.0, 1.0)
    # restore the equality part removed by clipping
    base = base + np.linalg.lstsq(a, b - a @ base, rcond=None)[0]
    box = tuple(_interval(base, d) for d in null)
    return AlphaFamily(indices, n_hats, base, null, box)


def _accept(ensemble: Ensemble, candidate: LagrangeCandidate, tol: Tolerances, eligible) -> Solution | None:
    from .verification import certify

    if not validate_candidate(ensemble, candidate, tol).valid:
        return None
    try:
        detection = detection_vectors(ensemble, candidate, tol, eligible)
        family = solve_alphas(detection, tol)
    except (GammaCoincidesWithState, InfeasibleAlphaSystem) as exc:
        log.debug("candidate %s rejected: %s", candidate.source, exc)
        return None
    sol = Solution(ensemble, candidate, tuple(i for i, _ in detection), family)
    if not certify(ensemble, sol.povm, tol).optimal:
        log.debug("candidate %s rejected by certificate", candidate.source)
        return None
    return sol


def _equal_priors(ensemble: Ensemble, tol: Tolerances) -> bool:
    return bool(np.all(np.abs(ensemble.priors - 1.0 / len(ensemble)) <= tol.priors))


def equal_priors_solve(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOLERANCES) -> Solution:
    """Equal priors: the detected states are those on the minimal enclosing sphere.

    ``gamma = O / N`` and ``gamma0 = (1 + R) / N`` for center ``O`` and radius
    ``R``. If all states coincide, no measurement helps and ``1/N`` is returned
    through the no-measurement solution.
    """
    n = len(ensemble)
    active = _active_states(ensemble, tol)
    try:
        sphere = circumsphere(ensemble.vectors[active], tol)
    except DegenerateAllCoincident:
        return _no_measurement_solution(ensemble, active[0], gamma0=1.0 / n)
    support = [active[k] for k in sphere.support]
    gamma = sphere.center_O / n
    gamma0 = (1.0 + sphere.radius_R) / n
    assert 1.0 / n < gamma0 <= 2.0 / n + tol.equality, "equal-prior bound violated"
    detection = [(i, (ensemble.vectors[i] - sphere.center_O) / sphere.radius_R) for i in support]
    family = solve_alphas(detection, tol)
    cand = LagrangeCandidate(gamma0, gamma, tuple(support))
    return Solution(ensemble, cand, tuple(support), family)


def _enumerate(ensemble: Ensemble, active, tol: Tolerances):
    """Yield candidates in dispatch order: pairs by gamma0 descending, then triples, then quadruples."""
    pairs = []
    for l, m in combinations(active, 2):
        try:
            pairs.append(pair_candidate(ensemble, l, m))
        except NotConstructible:
            continue
    pairs.sort(key=lambda c: -c.gamma0)
    yield from pairs
    for triple in combinations(active, 3):
        yield from _triple_roots(ensemble, *triple, tol)
    for quad in combinations(active, 4):
        yield from _quad_roots(ensemble, quad, tol)


def all_candidates(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOLERANCES) -> list[LagrangeCandidate]:
    """Every pair, triple and quadruple candidate (validated or not)."""
    return list(_enumerate(ensemble, _active_states(ensemble, tol), tol))


def solve(ensemble: Ensemble, tol: Tolerances = DEFAULT_TOLERANCES) -> Solution:
    """Optimal guessing probability and measurement family for ``ensemble``."""
    if _equal_priors(ensemble, tol):
        return equal_priors_solve(ensemble, tol)
    try:
        return check_no_measurement(ensemble, tol)
    except NotApplicable:
        pass
    active = _active_states(ensemble, tol)
    best, best_margin = None, -np.inf
    for cand in _enumerate(ensemble, active, tol):
        sol = _accept(ensemble, cand, tol, active)
        if sol is not None:
            return sol
        worst = float(np.min(_margins(ensemble, cand.gamma0, cand.gamma)))
        if worst > best_margin:
            best, best_margin = cand, worst
    from .verification import dual_oracle

    raise SolverExhausted(
        f"no candidate validated (best worst-margin {best_margin:.3e})",
        oracle=dual_oracle(ensemble, tol),
        best=best,
    )


# --------------------------------------------------------------------------
# decomposition


def decompose_povm(povm: Povm, tol: Tolerances = DEFAULT_TOLERANCES) -> list[Decomposition]:
    """All splits of ``povm`` into two parts that are complete after rescaling.

    Subsets hold positions in ``povm.elements``. Zero-weight elements belong
    to neither part.
    """
    live = [k for k, e in enumerate(povm.elements) if e.alpha > tol.completeness and not e.full_operator]
    out = []
    if len(live) < 4:
        return out
    first, rest = live[0], live[1:]
    for size in range(0, len(rest)):
        for extra in combinations(rest, size):
            part1 = (first,) + extra
            part2 = tuple(k for k in live if k not in part1)
            if len(part1) < 2 or len(part2) < 2:
                continue
            vec1 = np.sum([povm.elements[k].bloch_part for k in part1], axis=0)
            vec2 = np.sum([povm.elements[k].bloch_part for k in part2], axis=0)
            if np.linalg.norm(vec1) > tol.completeness or np.linalg.norm(vec2) > tol.completeness:
                continue
            w = 0.5 * sum(povm.elements[k].alpha for k in part1)
            if not 0.0 < w < 1.0:
                continue
            m1 = Povm(tuple(_rescaled(povm.elements[k], 1.0 / w) for k in part1))
            m2 = Povm(tuple(_rescaled(povm.elements[k], 1.0 / (1.0 - w)) for k in part2))
            out.append(Decomposition((part1, part2), float(w), (m1, m2)))
    return out


def _rescaled(e: PovmElement, factor: float) -> PovmElement:
    return PovmElement(e.alpha * factor, e.n_hat, e.state_index, e.full_operator)
