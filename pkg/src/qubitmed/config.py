"""Numerical tolerances shared by the solver, the verifier and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Mapping


@dataclass(frozen=True)
class Tolerances:
    """One record holding every tolerance used by the package.

    The defaults are the values the test-suite and the CLI agree on. Use
    :meth:`override` to derive a modified copy, e.g. from a problem file.
    """

    equality: float = 1e-9
    psd_margin: float = -1e-10
    completeness: float = 1e-10
    stationarity: float = 1e-9
    hermiticity: float = 1e-10
    ball: float = 1e-12
    priors: float = 1e-12
    unit_norm: float = 1e-12
    hull: float = 1e-9
    duplicate: float = 1e-12
    newton_residual: float = 1e-12
    newton_max_iter: int = 200
    oracle_grid_step: float = 0.02
    oracle_xtol: float = 1e-9

    def override(self, values: Mapping[str, Any] | None = None, **kwargs: Any) -> "Tolerances":
        merged = dict(values or {})
        merged.update(kwargs)
        known = {f.name for f in fields(self)}
        unknown = sorted(set(merged) - known)
        if unknown:
            raise KeyError(f"unknown tolerance field(s): {', '.join(unknown)}")
        return replace(self, **merged)


DEFAULT_TOLERANCES = Tolerances()
