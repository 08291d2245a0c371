"""Holomorphic flow analysis: equilibria, transit times, blow-up detection and
separatrix configurations of dx/dt = F(x) on the complex plane.

The heavy lifting lives in the C++ extension ``_holoflow``; this package adds
JSON decoding for the report-producing entry points.
"""

import json as _json

try:
    from ._holoflow import (
        FieldExpr,
        HoloflowError,
        analyze_json,
        contour_integral,
        find_equilibria,
        integrate_orbit,
        period,
        render_svg,
        residue_period,
        sector_directions,
        substitute_parameter,
        sweep_json,
    )
except ImportError:  # standalone build: extension on sys.path
    from _holoflow import (
        FieldExpr,
        HoloflowError,
        analyze_json,
        contour_integral,
        find_equilibria,
        integrate_orbit,
        period,
        render_svg,
        residue_period,
        sector_directions,
        substitute_parameter,
        sweep_json,
    )

__version__ = "0.1.0"


def analyze(source, window=None, nx=160, ny=140, max_seeds=48, threads=0):
    """Run the full pipeline and return the report as nested dicts."""
    return _json.loads(
        analyze_json(source, list(window) if window else [], nx, ny, max_seeds, threads)
    )


def sweep(source_template, name, values, window=None, nx=160, ny=140, max_seeds=48):
    """Parameter sweep; returns the summary as nested dicts."""
    return _json.loads(
        sweep_json(source_template, name, list(values), list(window) if window else [], nx, ny,
                   max_seeds)
    )


__all__ = [
    "FieldExpr",
    "HoloflowError",
    "analyze",
    "contour_integral",
    "find_equilibria",
    "integrate_orbit",
    "period",
    "render_svg",
    "residue_period",
    "sector_directions",
    "substitute_parameter",
    "sweep",
]
