"""
Intensity and phase inhomogeneity of focused beams over the thermal cloud.
"""

import sys
from pathlib import Path

project_root = Path(__file__).parent.parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

import math
from typing import Dict, List, Optional

import numpy as np

from physics_models.units import (
    PhysicalSetup,
    effective_beam_geometry,
    position_variance,
    thermal_rms_extent,
)


# Function: eps_focusing
def eps_focusing(setup: PhysicalSetup) -> Dict[str, float]:
    """
    Infidelity from the thermal average of (π²/2)η², η the fractional intensity drop

    Returns:
        eps_full, eps_transverse_only and the spread parameter D = ⟨y²⟩/w0²
    """
    geom = effective_beam_geometry(setup)
    w0 = geom["w0_eff"]
    x_r = geom["xR_eff"]
    x0 = setup.misalign_x0_um
    y0 = setup.misalign_y0_um
    sx = position_variance(setup, setup.omega_parallel)
    sy = position_variance(setup, setup.omega_perp)

    axial = (3.0 * sx**2 + 6.0 * sx * x0**2 + x0**4) / (4.0 * x_r**4)
    cross = (sx + x0**2) * (2.0 * sy + y0**2) / (x_r**2 * w0**2)
    transverse = (8.0 * sy**2 + 8.0 * sy * y0**2 + y0**4) / w0**4
    spread = sy / w0**2
    ratio = (y0 / w0) ** 2
    return {
        "eps_full": 0.5 * math.pi**2 * (axial + cross + transverse),
        "eps_transverse_only": 0.5 * math.pi**2 * ratio**2
        + 4.0 * math.pi**2 * ratio * spread
        + 4.0 * math.pi**2 * spread**2,
        "spread": spread,
        "axial_fraction": (axial + cross) / transverse if transverse > 0 else math.inf,
    }


# Function: eps_focusing_quadrature
def eps_focusing_quadrature(setup: PhysicalSetup, order: int = 12) -> float:
    """Gauss-Hermite average of (π²/2)η(x,y,z)² over the thermal position distribution."""
    geom = effective_beam_geometry(setup)
    w0 = geom["w0_eff"]
    x_r = geom["xR_eff"]
    nodes, weights = np.polynomial.hermite_e.hermegauss(order)
    weights = weights / weights.sum()
    sx = math.sqrt(position_variance(setup, setup.omega_parallel))
    sy = math.sqrt(position_variance(setup, setup.omega_perp))

    x = sx * nodes[:, None, None]
    y = sy * nodes[None, :, None]
    z = sy * nodes[None, None, :]
    eta = (x - setup.misalign_x0_um) ** 2 / (2.0 * x_r**2) + (
        (y - setup.misalign_y0_um) ** 2 + z**2
    ) / w0**2
    w = weights[:, None, None] * weights[None, :, None] * weights[None, None, :]
    return float(0.5 * math.pi**2 * np.sum(w * eta**2))


# Function: phase_variation_estimates
def phase_variation_estimates(
    setup: PhysicalSetup, extent: Optional[float] = None
) -> Dict[str, object]:
    """
    Relative size of the Gouy and wavefront-curvature phases against Kx

    Each beam is evaluated with its own wave number, waist and Rayleigh range at
    the rms thermal extent (taken equal along all three axes).

    Args:
        extent: position spread in µm; defaults to the transverse thermal rms extent
    """
    if extent is None:
        extent = thermal_rms_extent(setup, setup.omega_perp)
    gouy: List[float] = []
    curvature: List[float] = []
    for beam in setup.beams:
        k_beam = abs(beam.wavenumber())
        x_r = beam.rayleigh_range()
        plane = k_beam * extent
        if plane == 0.0:
            gouy.append(0.0)
            curvature.append(0.0)
            continue
        gouy.append(extent**3 / (3.0 * x_r**3) / plane)
        curvature.append(extent * 2.0 * extent**2 / (x_r * beam.waist_um**2) / plane)
    return {
        "gouy_rel": gouy,
        "curvature_rel": curvature,
        "gouy_rel_max": max(gouy),
        "curvature_rel_max": max(curvature),
        "extent": extent,
    }
