"""Smoke tests for the pybind11 module."""

import cmath
import math

import pytest

import holoflow as hf


def test_parse_eval_derivative():
    f = hf.FieldExpr("x*exp(x)")
    assert f(0) == 0
    z = complex(-2, 0.1)
    want = z * cmath.exp(z)
    assert abs(f(z) - want) < 1e-14
    d = f.derivative(1)
    assert abs(d(0) - 1.0) < 1e-14
    assert not f.has_division
    assert hf.FieldExpr("1/x").has_division


def test_parse_errors():
    with pytest.raises(hf.HoloflowError):
        hf.FieldExpr("x**")
    with pytest.raises(hf.HoloflowError):
        hf.FieldExpr("y+1")


def test_equilibria_quartic():
    eqs = hf.find_equilibria("x^2*(x-1)*(x-i)*(x-1-i)", [-2, -2, 3, 3])
    assert len(eqs) == 4
    by_loc = {complex(round(e["location"].real), round(e["location"].imag)): e for e in eqs}
    assert by_loc[0j]["class"] == "Multiple"
    assert by_loc[0j]["order"] == 2
    assert by_loc[1 + 1j]["class"] == "StableNode"
    assert by_loc[1 + 0j]["class"] == "StableFocus"
    assert by_loc[1j]["class"] == "StableFocus"


def test_orbit_blow_up():
    orbit = hf.integrate_orbit("x^2", 1.0, "forward", [-3, -3, 3, 3])
    assert orbit["forward_fate"]["kind"].startswith("BlowUp")
    assert abs(orbit["t_plus"] - 1.0) < 1e-5
    assert orbit["samples"][0][0] == 0.0


def test_transit_and_residue():
    value, err = hf.contour_integral("x", [1 + 0j, 2 + 0j])
    assert abs(value - math.log(2)) < 1e-10
    assert err < 1e-8
    residue = hf.residue_period("1+x^2", 1j, 0.3)
    assert abs(residue - math.pi) < 1e-9
    assert abs(hf.period("i*x", 0j) - 2 * math.pi) < 1e-9


def test_sector_directions():
    dirs = hf.sector_directions("x^2", 0j, 2)
    assert len(dirs) == 2
    assert abs(dirs[0] - 0.0) < 1e-12
    assert abs(dirs[1] - math.pi) < 1e-12


def test_analyze_center_report():
    report = hf.analyze("i*x*(x-1)", window=[-2, -2, 3, 2], nx=72, ny=56, max_seeds=10)
    assert len(report["reports"]) == 2
    center = report["reports"][0]
    assert center["region_kind"] == "CenterBasin"
    assert all(v["pass"] for v in center["theorem_verdicts"])
    sep = center["separatrices"]
    assert len(sep) == 1
    assert sep[0]["side"] == "double"
    assert abs(sep[0]["transit_time"] - 2 * math.pi) < 1e-2


def test_render_svg():
    svg = hf.render_svg("x^2", window=[-2, -2, 2, 2], nx=48, ny=48)
    assert svg.startswith("<svg")
    assert "</svg>" in svg


def test_substitute_parameter():
    assert hf.substitute_parameter("exp(i*A)*x", "A", 0.5) == "exp(i*(0.5))*x"
