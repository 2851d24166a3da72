"""Machine-readable reports and the trine sweep table."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .fileio import povm_to_json
from .model import Ensemble, Povm, Solution
from .solver import solve
from .verification import CertificateReport, SampleReport, certify, trine_ensemble, trine_reference

SIG_DIGITS = 9


def sig(x: float) -> float:
    """Round to the report precision."""
    return float(f"{float(x):.{SIG_DIGITS}g}")


def _vec(v) -> list[float]:
    return [sig(x) for x in v]


def certificate_json(cert: CertificateReport, full_precision: bool = False) -> dict:
    r = (lambda x: float(x)) if full_precision else sig
    g0, g = cert.gamma_reconstructed
    kind, state, value = cert.worst()
    return {
        "optimal": cert.optimal,
        "gamma0": r(g0),
        "gamma": [r(x) for x in g],
        "hermiticity_residual": r(cert.hermiticity_residual),
        "psd_margins": [r(x) for x in cert.psd_margins],
        "stationarity_residuals": [r(x) for x in cert.stationarity_residuals],
        "completeness_residual": r(cert.completeness_residual),
        "worst": {"kind": kind, "state": state, "value": r(value)},
    }


def solution_json(solution: Solution, tol: Tolerances = DEFAULT_TOLERANCES) -> dict:
    """Summary at 9 significant digits plus a full-precision ``povm`` block."""
    fam = solution.povm_family
    povm = solution.povm
    cert = certify(solution.ensemble, povm, tol)
    return {
        "p_guess": sig(solution.p_guess),
        "gamma0": sig(solution.candidate.gamma0),
        "gamma": _vec(solution.candidate.gamma),
        "detected": list(solution.detected),
        "no_measurement": solution.no_measurement,
        "measurement": [
            {"state": e.state_index, "alpha": sig(e.alpha), "n": _vec(e.n_hat), "full_operator": e.full_operator}
            for e in povm.elements
        ],
        "alpha_family": {
            "indices": list(fam.indices),
            "base": _vec(fam.base),
            "free_directions": [_vec(d) for d in fam.free_directions],
            "box": [[sig(lo), sig(hi)] for lo, hi in fam.box],
        },
        "certificate": certificate_json(cert),
        "povm": povm_to_json(povm),
    }


def sample_json(report: SampleReport) -> dict:
    return {
        "shots_per_state": report.shots,
        "seed": report.seed,
        "confusion": report.confusion.tolist(),
        "empirical_success": sig(report.empirical_success),
        "theoretical_success": sig(report.theoretical_success),
        "z_score": sig(report.z_score),
    }


# --------------------------------------------------------------------------
# trine sweep

SWEEP_COLUMNS = ("p", "delta", "regime", "p_guess_solver", "p_guess_reference", "abs_diff", "solver_regime")


@dataclass(frozen=True)
class SweepRow:
    p: float
    delta: float
    regime: str
    p_guess_solver: float
    p_guess_reference: float
    abs_diff: float
    solver_regime: str


def _solver_regime(povm: Povm, tol: Tolerances) -> str:
    live = sum(1 for e in povm.elements if e.alpha > tol.equality)
    return {1: "no_measurement", 2: "two_element", 3: "three_element"}.get(live, f"{live}_element")


def trine_grid(p_steps: int, delta_steps: int) -> list[tuple[float, float]]:
    """Grid over ``1/3 <= p <= 1/2``, ``0 <= delta <= min(3p - 1, p)`` in row-major (p, delta) order."""
    if p_steps < 2 or delta_steps < 2:
        raise ValueError("step counts must be >= 2")
    cells = []
    for p in np.linspace(1 / 3, 0.5, p_steps):
        top = max(min(3 * p - 1, p), 0.0)
        for d in np.linspace(0.0, top, delta_steps):
            cells.append((float(p), float(min(d, top))))
    return cells


def trine_sweep(p_steps: int = 50, delta_steps: int = 50, tol: Tolerances = DEFAULT_TOLERANCES) -> list[SweepRow]:
    rows = []
    for p, d in trine_grid(p_steps, delta_steps):
        sol = solve(trine_ensemble(p, d), tol)
        ref, regime, _ = trine_reference(p, d)
        rows.append(SweepRow(p, d, regime, float(sol.p_guess), float(ref), float(abs(sol.p_guess - ref)),
                             _solver_regime(sol.povm, tol)))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for r in rows:
        w.writerow([repr(float(r.p)), repr(float(r.delta)), r.regime, repr(float(r.p_guess_solver)),
                    repr(float(r.p_guess_reference)), repr(float(r.abs_diff)), r.solver_regime])
    worst = max((r.abs_diff for r in rows), default=0.0)
    buf.write(f"# max_abs_diff={float(worst)!r}\n")
    return buf.getvalue()
