import sys
from pathlib import Path

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from scipy import optimize

from backend.services.errors import ConfigError, SearchError
from pulse_processing.envelopes import GateKind, GateSpec, build_adiabatic_envelope
from pulse_processing.phases import (
    adiabaticity_margin,
    cz_phase_defect,
    dynamical_phases,
    propagated_phases,
    signed_phase_residual,
)

logger = logging.getLogger(__name__)

PHASE_MODELS = ("propagated", "adiabatic")
MAX_EXPANSIONS = 8


# Class: SearchResult
@dataclass
class SearchResult:
    gate: GateSpec
    defect: float
    margin: float
    phases: Dict[str, float]
    discarded: int = 0


# Class: AdiabaticGateSearch
class AdiabaticGateSearch:
    """
    Finds (Δ/Ω₀, δt) satisfying the C_Z phase condition for a given blockade

    The entangling phase comes from `phase_model`: "propagated" integrates the
    Schrödinger equation, "adiabatic" integrates the tracked eigenvalues.
    Brackets are always seeded from the adiabatic residual on a coarse grid,
    then refined against the chosen model.
    """

    # Function: __init__
    def __init__(
        self,
        blockade: float,
        omega0: float,
        detuning_bounds: Tuple[float, float] = (-1.2, -0.1),
        grid_points: int = 41,
        margin_weight: float = 1e-3,
        window_factor: float = 4.0,
        n_points: int = 2001,
        phase_model: str = "propagated",
        max_defect: Optional[float] = 1e-3,
    ):
        if blockade <= 0 or omega0 <= 0:
            raise ConfigError(
                "SEARCH_INPUT", "B and Ω₀ must be positive", {"B": blockade, "omega0": omega0}
            )
        if phase_model not in PHASE_MODELS:
            raise ConfigError(
                "SEARCH_INPUT", f"unknown phase model {phase_model}", {"allowed": list(PHASE_MODELS)}
            )
        self.blockade = blockade
        self.omega0 = omega0
        self.detuning_bounds = tuple(sorted(detuning_bounds))
        self.grid_points = grid_points
        self.margin_weight = margin_weight
        self.window_factor = window_factor
        self.n_points = n_points
        self.phase_model = phase_model
        self.max_defect = max_defect

    # Function: spec
    def spec(self, ratio: float, delta_t: float) -> GateSpec:
        return GateSpec(
            kind=GateKind.ADIABATIC,
            omega0=self.omega0,
            detuning_ratio=float(ratio),
            delta_t=float(delta_t),
            blockade=self.blockade,
            window_factor=self.window_factor,
        )

    # Function: phases
    def phases(self, ratio: float, delta_t: float, model: Optional[str] = None) -> Dict[str, float]:
        envelope = build_adiabatic_envelope(self.spec(ratio, delta_t))
        if (model or self.phase_model) == "adiabatic":
            return dynamical_phases(envelope, self.blockade, self.n_points)
        return propagated_phases(envelope, self.blockade)

    # Function: residual
    def residual(self, ratio: float, delta_t: float, model: Optional[str] = None) -> float:
        """Signed entangling residual in (-π, π]."""
        p = self.phases(ratio, delta_t, model)
        return signed_phase_residual(p["phi01"], p["phi10"], p["phi11"])

    # Function: defect
    def defect(self, ratio: float, delta_t: float) -> float:
        p = self.phases(ratio, delta_t)
        return cz_phase_defect(p["phi01"], p["phi10"], p["phi11"], rule="entangling")

    # Function: margin
    def margin(self, ratio: float, delta_t: float) -> float:
        envelope = build_adiabatic_envelope(self.spec(ratio, delta_t))
        return adiabaticity_margin(envelope, n_points=self.n_points)

    # Function: objective
    def objective(self, ratio: float, delta_t: float) -> float:
        """|residual| + margin penalty, plus the lost |11⟩ population when propagated."""
        p = self.phases(ratio, delta_t)
        value = abs(signed_phase_residual(p["phi01"], p["phi10"], p["phi11"]))
        value += self.margin_weight / self.margin(ratio, delta_t)
        return value + (1.0 - p.get("p11", 1.0))

    # Function: _roots_along
    def _roots_along(
        self, line: Callable[[float], Tuple[float, float]], grid: np.ndarray
    ) -> List[float]:
        """Roots of the residual along a one-parameter line through (ratio, δt)."""
        seed = [self.residual(*line(s), model="adiabatic") for s in grid]
        exact = lambda s: self.residual(*line(s))

        roots: List[float] = []
        for a, b, fa, fb in zip(grid[:-1], grid[1:], seed[:-1], seed[1:]):
            # a sign change across a 2π wrap is not a root
            if fa * fb > 0 or abs(fa) + abs(fb) >= math.pi:
                continue
            if self.phase_model == "adiabatic":
                bracket = (a, b, fa, fb)
            else:
                bracket = self._shifted_bracket(exact, a, b, fa, fb, grid[0], grid[-1])
            if bracket is None:
                logger.debug("seed root in [%.6g, %.6g] not found after propagation", a, b)
                continue
            lo, hi, ga, gb = bracket
            if ga == 0.0 or gb == 0.0:
                roots.append(float(lo if ga == 0.0 else hi))
            else:
                roots.append(float(optimize.brentq(exact, lo, hi, xtol=1e-11, rtol=1e-12)))

        unique: List[float] = []
        for r in sorted(roots):
            if not unique or not math.isclose(r, unique[-1], rel_tol=0.0, abs_tol=1e-8):
                unique.append(r)
        return unique

    # Function: _shifted_bracket
    def _shifted_bracket(
        self,
        exact: Callable[[float], float],
        a: float,
        b: float,
        fa: float,
        fb: float,
        lower: float,
        upper: float,
    ) -> Optional[Tuple[float, float, float, float]]:
        """
        Bracket of the propagated root next to an adiabatic one

        Starts at the linear seed root and steps outward along the seed slope,
        doubling the step until the propagated residual changes sign.
        """
        slope = (fb - fa) / (b - a)
        if slope == 0.0:
            return None
        start = min(max(a - fa / slope, lower), upper)
        g0 = exact(start)
        if g0 == 0.0:
            return start, start, g0, g0
        direction = -math.copysign(1.0, g0 / slope)
        step = max(1.5 * abs(g0 / slope), 1e-3 * (b - a))
        for _ in range(MAX_EXPANSIONS):
            other = min(max(start + direction * step, lower), upper)
            g1 = exact(other)
            if g0 * g1 <= 0 and abs(g0) + abs(g1) < math.pi:
                return (start, other, g0, g1) if start < other else (other, start, g1, g0)
            if other in (lower, upper):
                return None
            step *= 2.0
        return None

    # Function: run
    def run(
        self, delta_t_bounds: Tuple[float, float], detuning_ratio: Optional[float] = None
    ) -> SearchResult:
        """
        Search mode follows the inputs

        A fixed `detuning_ratio` solves for δt inside the bounds; collapsed
        δt bounds solve for Δ/Ω₀ at that width; otherwise both move.
        """
        lo, hi = sorted(delta_t_bounds)
        if lo <= 0:
            raise ConfigError("SEARCH_INPUT", "δt bounds must be positive", {"bounds": delta_t_bounds})
        fixed_width = math.isclose(lo, hi)

        if detuning_ratio is not None and fixed_width:
            candidates = [(float(detuning_ratio), lo)]
        elif detuning_ratio is not None:
            grid = np.linspace(lo, hi, self.grid_points)
            roots = self._roots_along(lambda s: (detuning_ratio, s), grid)
            candidates = [(float(detuning_ratio), w) for w in roots]
        elif fixed_width:
            grid = np.linspace(*self.detuning_bounds, self.grid_points)
            candidates = [(x, lo) for x in self._roots_along(lambda s: (s, lo), grid)]
        else:
            candidates = self._direct_search(lo, hi)
        return self._select(candidates, (lo, hi), detuning_ratio)

    # Function: _direct_search
    def _direct_search(self, lo: float, hi: float) -> List[Tuple[float, float]]:
        ratios = np.linspace(*self.detuning_bounds, self.grid_points)
        widths = np.linspace(lo, hi, max(3, self.grid_points // 4))
        seeds = sorted(
            (abs(self.residual(x, w, model="adiabatic")), x, w) for x in ratios for w in widths
        )[:3]
        bounds = [self.detuning_bounds, (lo, hi)]
        found = []
        for _, x, w in seeds:
            res = optimize.minimize(
                lambda p: self.objective(p[0], p[1]),
                x0=np.array([x, w]),
                method="Nelder-Mead",
                bounds=bounds,
                options={"xatol": 1e-7, "fatol": 1e-10, "maxiter": 400},
            )
            found.append((float(res.x[0]), float(res.x[1])))
        return found

    # Function: _select
    def _select(
        self,
        candidates: List[Tuple[float, float]],
        delta_t_bounds: Tuple[float, float],
        detuning_ratio: Optional[float],
    ) -> SearchResult:
        scored = [(self.defect(*c), c) for c in candidates]
        accepted = [
            (d, c) for d, c in scored if self.max_defect is None or d <= self.max_defect
        ]
        if not accepted:
            best_defect = min((d for d, _ in scored), default=None)
            raise SearchError(
                "NO_SOLUTION_IN_BOUNDS",
                "No candidate meets the phase defect tolerance",
                {
                    "defect": best_defect,
                    "max_defect": self.max_defect,
                    "candidates": len(candidates),
                    "detuning_bounds": list(self.detuning_bounds),
                    "delta_t_bounds": list(delta_t_bounds),
                    "detuning_ratio": detuning_ratio,
                },
            )

        ranked = sorted(accepted, key=lambda dc: self.objective(*dc[1]))
        defect, (ratio, delta_t) = ranked[0]
        for d, (x, w) in ranked[1:]:
            logger.info("discarded root ratio=%.6f dt=%.5f defect=%.2e", x, w, d)

        result = SearchResult(
            gate=self.spec(ratio, delta_t),
            defect=defect,
            margin=self.margin(ratio, delta_t),
            phases=self.phases(ratio, delta_t),
            discarded=len(scored) - 1,
        )
        logger.info(
            "search B=%.4g (%s): ratio=%.6f dt=%.5f defect=%.2e margin=%.1f",
            self.blockade,
            self.phase_model,
            ratio,
            delta_t,
            defect,
            result.margin,
        )
        return result


# Function: search_adiabatic_params
def search_adiabatic_params(
    blockade: float,
    omega0: float,
    delta_t_bounds: Tuple[float, float],
    detuning_bounds: Tuple[float, float] = (-1.2, -0.1),
    max_defect: Optional[float] = 1e-3,
    detuning_ratio: Optional[float] = None,
    **kwargs,
) -> SearchResult:
    """
    Gate parameters satisfying the C_Z condition

    Collapsed δt bounds give a 1-D root search in Δ/Ω₀, a fixed Δ/Ω₀ gives a
    1-D root search in δt, and otherwise a coarse grid seeds a bounded
    Nelder-Mead search. Roots whose defect exceeds `max_defect` are dropped;
    among the rest the soft penalty on 1/margin and on leakage out of |11⟩
    picks a single one.

    Raises:
        SearchError: NO_SOLUTION_IN_BOUNDS when nothing meets the tolerance
    """
    search = AdiabaticGateSearch(
        blockade, omega0, detuning_bounds, max_defect=max_defect, **kwargs
    )
    return search.run(delta_t_bounds, detuning_ratio=detuning_ratio)
