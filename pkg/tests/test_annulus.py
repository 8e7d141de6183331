import json

import numpy as np
import pytest

from semistiff.annulus import (AnnulusGrid, BoundaryTrace, DegreeUndefinedError, HarmonicField,
                               HolomorphicField, KelvinField, SampledField, capacity,
                               capacity_potential, capacity_quadrature, degree_difference_integral,
                               dirichlet_energy, eval_field, harmonic_extension,
                               hopf_constant_check, kelvin_reflect, trace_degree, winding_degree)
from semistiff.radial import RadialSolution

IDENTITY = HolomorphicField(lambda z: z, lambda z: np.ones_like(z))


def _traces(fo, fi, rho, n=64):
    th = 2 * np.pi * np.arange(n) / n
    return BoundaryTrace(fi(th), rho), BoundaryTrace(fo(th), 1.0)


def test_grid_validation_and_shape():
    g = AnnulusGrid(0.5, 11, 16)
    R, T = g.mesh()
    assert R.shape == (11, 16)
    assert g.r[0] == 0.5 and g.r[-1] == 1.0
    assert g.refined().n_r == 21 and g.refined().n_theta == 32
    for bad in (dict(rho=0.0), dict(rho=1.0), dict(rho=0.5, n_r=2), dict(rho=0.5, n_theta=7)):
        with pytest.raises(ValueError):
            AnnulusGrid(**bad)


def test_grid_integrates_area_element():
    g = AnnulusGrid(0.5, 101, 16)
    R, _ = g.mesh()
    assert g.integrate(R) == pytest.approx(np.pi * (1 - 0.25), rel=1e-12)


def test_extension_recovers_u1():
    rho = 0.4
    inner, outer = _traces(lambda t: np.exp(1j * t), lambda t: np.exp(1j * t), rho)
    f = harmonic_extension(inner, outer, rho)
    rng = np.random.default_rng(0)
    r = rng.uniform(rho, 1, 50)
    th = rng.uniform(0, 2 * np.pi, 50)
    ref = (r + rho / r) * np.exp(1j * th) / (1 + rho)
    np.testing.assert_allclose(f(r, th), ref, atol=1e-13)


def test_extension_constant():
    inner, outer = _traces(lambda t: np.ones_like(t), lambda t: np.ones_like(t), 0.3)
    f = harmonic_extension(inner, outer, 0.3)
    assert f.a0 == pytest.approx(1) and f.b0 == 0 and f.modes == []
    assert eval_field(f, 0.77, 1.3) == pytest.approx(1.0)


def test_extension_helicoidal_against_coefficient_formulas():
    # independent evaluation: a_1 = -1 (inner), b_1 = 1 (outer), all other modes vanish
    rho = 0.5
    inner, outer = _traces(lambda t: np.exp(1j * t), lambda t: -np.exp(1j * t), rho)
    f = harmonic_extension(inner, outer, rho)
    a1, b1 = -1.0, 1.0
    A1 = (b1 - a1 * rho) / (1 - rho ** 2)
    B1 = rho * (a1 - rho * b1) / (1 - rho ** 2)
    rng = np.random.default_rng(1)
    r = rng.uniform(rho, 1, 100)
    th = rng.uniform(0, 2 * np.pi, 100)
    direct = (A1 * r + B1 / r) * np.exp(1j * th)
    closed = (r - rho / r) * np.exp(1j * th) / (1 - rho)
    np.testing.assert_allclose(direct, closed, atol=1e-14)
    np.testing.assert_allclose(f(r, th), direct, atol=1e-13)


def test_extension_log_term():
    rho = 0.5
    inner, outer = _traces(lambda t: 0 * t + 2.0, lambda t: 0 * t + 1.0, rho)
    f = harmonic_extension(inner, outer, rho)
    assert f(np.sqrt(rho), 0.0) == pytest.approx(1.5)


def test_extension_errors():
    th = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    with pytest.raises(ValueError):
        harmonic_extension(BoundaryTrace(th, 0.5), BoundaryTrace(th[:8], 1.0), 0.5)
    with pytest.raises(ValueError):
        harmonic_extension(BoundaryTrace(th, 0.5), BoundaryTrace(th, 1.0), 1.5)
    with pytest.raises(ValueError):
        harmonic_extension(BoundaryTrace(th, 0.5), BoundaryTrace(th, 1.0), 0.5, n_modes=9)


def test_eval_outside_annulus_rejected():
    f = RadialSolution(1, 0.5).field()
    with pytest.raises(ValueError):
        f(0.4, 0.0)
    with pytest.raises(ValueError):
        f(1.1, 0.0)


def test_u1_unimodular_on_outer_circle():
    f = RadialSolution(1, 0.5).field()
    th = np.linspace(0, 2 * np.pi, 37)
    np.testing.assert_allclose(np.abs(f(np.ones_like(th), th)), 1.0, atol=1e-15)


def test_radial_derivative_vanishes_at_sqrt_rho():
    f = RadialSolution(2, 0.5).field()
    _, ur, _ = f.derivatives(np.sqrt(0.5), np.linspace(0, 6, 10))
    assert np.max(np.abs(ur)) < 1e-14


def test_json_roundtrip():
    f = RadialSolution(-3, 0.3, "hel", alpha=1j).field()
    data = json.loads(json.dumps(f.to_json()))
    assert set(data["modes"][0]) == {"n", "ARe", "AIm", "BRe", "BIm"}
    g = HarmonicField.from_json(data)
    assert g == f
    assert HarmonicField.from_json(json.dumps(data)) == f


def test_laplacian_residual_second_order():
    f = RadialSolution(3, 0.4, "hel").field()
    g = AnnulusGrid(0.4, 41, 64)
    e1 = f.laplacian_residual(g)
    e2 = f.laplacian_residual(AnnulusGrid(0.4, 81, 128))
    assert 3.0 < e1 / e2 < 5.0


def test_energy_examples():
    g = AnnulusGrid(0.5, 401, 64)
    assert dirichlet_energy(RadialSolution(1, 0.5).field(), g) == pytest.approx(2 * np.pi / 3, rel=1e-8)
    assert dirichlet_energy(RadialSolution(2, 0.5).field(), g) == pytest.approx(2.4 * np.pi, rel=1e-8)
    assert dirichlet_energy(HarmonicField(0.5, 3.0), g) == 0.0


def test_energy_of_sampled_field_converges_to_analytic():
    # finite-difference steps equal the node spacing, so the error is O(dtheta^4)
    rho = 0.5
    exact = 2.4 * np.pi
    sampled = lambda r, t: (r ** 2 + rho ** 2 / r ** 2) * np.exp(2j * t) / (1 + rho ** 2)
    e1 = abs(dirichlet_energy(sampled, AnnulusGrid(rho, 201, 64)) - exact)
    e2 = abs(dirichlet_energy(sampled, AnnulusGrid(rho, 201, 128)) - exact)
    assert e1 < 1e-3 * exact
    assert 12 < e1 / e2 < 20


def test_capacity_values():
    assert capacity(np.exp(-2 * np.pi)) == pytest.approx(1.0)
    assert capacity(np.exp(-1)) == pytest.approx(2 * np.pi)
    assert capacity(0.5) == pytest.approx(9.0647202836543876, rel=1e-12)
    with pytest.raises(ValueError):
        capacity(1.0)


def test_capacity_cross_check():
    V = capacity_potential(0.5)
    assert V(0.5, 0.0) == pytest.approx(0.0, abs=1e-15)
    assert V(1.0, 0.0) == pytest.approx(1.0)
    assert capacity_quadrature(0.5) == pytest.approx(capacity(0.5), rel=1e-8)


def test_degree_difference_examples():
    g = AnnulusGrid(0.5, 201, 64)
    assert abs(degree_difference_integral(RadialSolution(2, 0.5).field(), g)) < 1e-6
    # raw Jacobian of the identity: the area of the annulus
    assert degree_difference_integral(IDENTITY, g) == pytest.approx(np.pi * 0.75, rel=1e-10)


def test_winding_examples():
    th = 2 * np.pi * np.arange(64) / 64
    assert winding_degree(BoundaryTrace(np.exp(3j * th), 1.0)) == 3
    assert winding_degree(np.full(64, 2.0 + 1j)) == 0
    assert winding_degree(np.exp(-2j * th)) == -2
    with pytest.raises(DegreeUndefinedError):
        winding_degree(np.cos(th) + 0j)


def test_winding_refines_with_sampler():
    # 40 turns on 16 samples aliases; the sampler fixes it
    th = 2 * np.pi * np.arange(16) / 16
    s = lambda t: np.exp(40j * t)
    assert winding_degree(s(th), sampler=s) == 40


def test_trace_degree_of_holomorphic_map():
    f = HolomorphicField(lambda z: z - 0.7, lambda z: np.ones_like(z))
    assert trace_degree(f, 1.0) == 1
    assert trace_degree(f, 0.5) == 0


def test_hopf_examples():
    g = AnnulusGrid(0.5, 101, 64)
    rep = hopf_constant_check(RadialSolution(2, 0.5).field(), g)
    assert rep.c_estimate == pytest.approx(-0.64, abs=1e-12)
    assert rep.max_imag_part < 1e-12 and rep.max_real_deviation < 1e-12
    rep = hopf_constant_check(RadialSolution(2, 0.5, "hel").field(), g)
    assert rep.c_estimate == pytest.approx(16 / 9, abs=1e-12)
    rep = hopf_constant_check(IDENTITY, g)
    assert abs(rep.c_estimate) < 1e-14 and rep.max_imag_part < 1e-14
    assert len(rep.as_row()) == 3


def test_hopf_not_constant_for_non_solution():
    g = AnnulusGrid(0.5, 51, 32)
    # z + 0.3 conj(z)^2: z^2 H = 0.6 z^3 is not constant
    f = HarmonicField(0.5, 0, 0, [(1, 1.0, 0.0), (-2, 0.3, 0.0)])
    rep = hopf_constant_check(f, g)
    assert rep.max_real_deviation > 1e-3 or rep.max_imag_part > 1e-3


def test_sampled_field_derivatives():
    f = SampledField(lambda r, t: r ** 2 * np.exp(1j * t))
    u, ur, ut = f.derivatives(0.7, 0.4)
    assert ur == pytest.approx(1.4 * np.exp(0.4j), abs=1e-10)
    assert ut == pytest.approx(0.49j * np.exp(0.4j), abs=1e-10)


def test_kelvin_examples():
    rho = 0.3
    g = AnnulusGrid(rho, 101, 32)
    R, T = g.mesh()
    for p in (1, 2, -3):
        u = RadialSolution(p, rho).field()
        k = kelvin_reflect(u, rho)
        np.testing.assert_allclose(k(R, T), u(R, T), atol=1e-14)
        ut = RadialSolution(p, rho, "hel").field()
        np.testing.assert_allclose(kelvin_reflect(ut, rho)(R, T), -ut(R, T), atol=1e-14)
    c = HarmonicField(rho, 2 - 1j)
    assert kelvin_reflect(c, rho)(0.5, 1.0) == pytest.approx(2 - 1j)


def test_kelvin_generic_field_and_energy():
    rho = 0.4
    f = HarmonicField(rho, 0.1, 0.3, [(1, 1.0, 0.2j), (-2, 0.5, 0.1)])
    k = kelvin_reflect(f, rho)
    g = AnnulusGrid(rho, 401, 64)
    assert dirichlet_energy(k, g) == pytest.approx(dirichlet_energy(f, g), rel=1e-8)
    wrapped = KelvinField(f, rho)
    R, T = g.mesh()
    np.testing.assert_allclose(k(R, T), wrapped(R, T), atol=1e-13)
    _, ur1, ut1 = k.derivatives(R, T)
    _, ur2, ut2 = wrapped.derivatives(R, T)
    np.testing.assert_allclose(ur1, ur2, atol=1e-12)
    np.testing.assert_allclose(ut1, ut2, atol=1e-12)
