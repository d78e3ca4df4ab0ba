import math

import numpy as np
import pytest

from src.errors import DegreeMismatchError, SingularityError, ValidationError
from src.geometry import SpherePoint
from src.sphere import (CurrentRep, GreenKernel, HarmonicBasis, base_point_change_residual, constant, dC,
                        diagonal_disk_integral, gaussian, gaussian_density, green_certification, green_eval,
                        green_pde_residual,
                        harmonic_pairing, harmonic_projector_kernel, log_abs2, SmoothForm, wedge_density)

X = np.array([0.3 + 0.1j, -1.2 + 0.4j, 2.5 - 3.0j, 0.01j])
Y = np.array([-0.7 + 0.2j, 0.9 - 0.9j, 0.2 + 0.2j, 4.0 + 0j])


def test_kernel_at_infinity_is_log_distance():
    kernel = GreenKernel()
    assert np.allclose(kernel(X, Y), np.log(np.abs(X - Y) ** 2), rtol=1e-12, atol=1e-12)


def test_finite_base_point_formula():
    a = 0.5 - 0.25j
    kernel = GreenKernel(SpherePoint(a))
    expected = (np.log(np.abs(X - Y) ** 2) - np.log(np.abs(X - a) ** 2) - np.log(np.abs(Y - a) ** 2)
                + 2 * np.log1p(abs(a) ** 2))
    assert np.allclose(kernel(X, Y), expected, rtol=1e-12, atol=1e-12)


def test_kernel_is_bitwise_symmetric():
    rng = np.random.default_rng(0)
    x = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    y = rng.normal(size=1000) + 1j * rng.normal(size=1000)
    for kernel in (GreenKernel(), GreenKernel(SpherePoint(1 + 1j))):
        assert np.array_equal(kernel(x, y), kernel(y, x))


def test_gradient_matches_finite_differences():
    kernel = GreenKernel(SpherePoint(-0.4 + 0.3j))
    h = 1e-6
    fx = (kernel(X + h, Y) - kernel(X - h, Y)) / (2 * h)
    fy = (kernel(X + 1j * h, Y) - kernel(X - 1j * h, Y)) / (2 * h)
    assert np.allclose(kernel.gradient(X, Y), fx + 1j * fy, rtol=1e-5, atol=1e-6)


def test_pointwise_evaluation():
    kernel = GreenKernel(SpherePoint(0j))
    # d(inf, 2)^2 = 1/5, d(inf, 0)^2 = 1, d(2, 0)^2 = 4/5
    assert green_eval(kernel, "inf", 2) == pytest.approx(math.log(0.25))
    assert green_eval(kernel, 2, "inf") == pytest.approx(math.log(0.25))
    for x, y in [(1, 1), (0, 1), (1, 0), ("inf", "inf")]:
        with pytest.raises(SingularityError):
            green_eval(kernel, x, y)


@pytest.mark.parametrize("base", [None, 0.5 - 0.25j, 3.0 + 1.0j])
def test_kernel_agrees_in_both_charts(base):
    # chordal distance is invariant under z -> 1/z, so G_a(x, y) = G_(1/a)(1/x, 1/y)
    kernel = GreenKernel(SpherePoint(base))
    mirrored = GreenKernel(SpherePoint(0j if base is None else 1 / base))
    assert np.allclose(kernel(X, Y), mirrored(1 / X, 1 / Y), rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("theta", [0.0, 1.0, 2.5, -2.0])
def test_kernel_is_continuous_at_infinity(theta):
    kernel = GreenKernel(SpherePoint(0.5 - 0.25j))
    far = np.array([1e8 * np.exp(1j * theta)])
    for y in (0.3 + 0.1j, -2.0 + 1.0j):
        assert float(kernel(far, np.array([y]))[0]) == pytest.approx(green_eval(kernel, "inf", y), abs=1e-6)


def test_rescaling_and_rebasing():
    kernel = GreenKernel()
    assert np.allclose(kernel.rescaled(2.0)(X, Y), 2 * kernel(X, Y))
    moved = kernel.with_base_point(SpherePoint(1j))
    assert moved.base_point == SpherePoint(1j)
    assert moved.scale == kernel.scale


@pytest.mark.slow
@pytest.mark.parametrize("center, width, y", [(0.0, 0.7, 0.1 + 0.05j), (0.5 - 0.2j, 0.5, 0.4),
                                              (-1.0 + 1.0j, 0.9, -0.8 + 0.7j)])
def test_weak_form_residual_is_small(center, width, y):
    residual, result = green_pde_residual(GreenKernel(), gaussian(center, width), y, resolution=128)
    assert residual < 1e-3
    assert result.evaluations > 0


@pytest.mark.slow
def test_mis_normalized_kernel_fails_the_weak_form():
    residual, _ = green_pde_residual(GreenKernel().rescaled(2.0), gaussian(0.0, 0.7), 0.1 + 0.05j, resolution=128)
    assert residual > 0.1


@pytest.mark.slow
def test_finite_base_point_weak_form():
    kernel = GreenKernel(SpherePoint(0.6 + 0.3j))
    residual, _ = green_pde_residual(kernel, gaussian(0.2, 0.6), -0.1 + 0.2j, resolution=128)
    assert residual < 1e-3


@pytest.mark.slow
def test_base_point_change():
    first, second = GreenKernel(), GreenKernel(SpherePoint(0.3 - 0.2j))
    residual, _ = base_point_change_residual(first, second, gaussian(0.0, 0.8), 0.5j, resolution=128)
    assert residual < 1e-3


def test_weak_form_needs_a_laplacian():
    with pytest.raises(ValidationError):
        green_pde_residual(GreenKernel(), gaussian_density(0, 1), 0.1)


def test_diagonal_disk_integral_is_finite_and_shrinks():
    kernel = GreenKernel()
    # integral of |log r^2| over the disk of radius R < 1 is pi R^2 (1 - 2 log R)
    expected = math.pi * 0.01 * (1 - 2 * math.log(0.1))
    assert diagonal_disk_integral(kernel, 0.3j, 0.1, resolution=64) == pytest.approx(expected, rel=1e-5)
    assert diagonal_disk_integral(kernel, 0.3j, 1e-3) < diagonal_disk_integral(kernel, 0.3j, 1e-2)
    with pytest.raises(ValidationError):
        diagonal_disk_integral(kernel, "inf", 0.1)


# --- Forms and currents ---

def test_gaussian_derivatives():
    form = gaussian(0.2 + 0.1j, 0.5)
    z, h = np.array([0.3 - 0.2j, -0.1j]), 1e-5
    fx = (form.value(z + h) - form.value(z - h)) / (2 * h)
    fy = (form.value(z + 1j * h) - form.value(z - 1j * h)) / (2 * h)
    assert np.allclose(form.gradient(z), fx + 1j * fy, atol=1e-8)
    lap = (form.value(z + h) + form.value(z - h) + form.value(z + 1j * h) + form.value(z - 1j * h)
           - 4 * form.value(z)) / h ** 2
    assert np.allclose(form.laplacian(z), lap, atol=1e-4)


def test_gaussian_density_has_unit_mass():
    current = CurrentRep.smooth(gaussian_density(0.1, 0.5, 3.0))
    assert current.integrate(resolution=64) == pytest.approx(3.0, abs=1e-5)


def test_dc_of_log_modulus():
    one_form = dC(CurrentRep.smooth(log_abs2())).form
    z = np.array([1.0 + 0j, 1j])
    p, q = one_form.value(z)
    # d^C log|z|^2 = (-y dx + x dy) / (2 pi |z|^2)
    assert np.allclose(p, [0.0, -1 / (2 * math.pi)])
    assert np.allclose(q, [1 / (2 * math.pi), 0.0])


def test_dc_of_a_one_form_is_a_density():
    # dd^C of a gaussian is Lap/(4 pi)
    form = gaussian(0.0, 0.6)
    density = dC(dC(CurrentRep.smooth(form))).form
    z = np.array([0.2 + 0.1j, -0.3j])
    assert np.allclose(density.value(z), np.real(form.laplacian(z)) / (4 * math.pi), rtol=1e-12, atol=1e-15)


def test_dc_of_a_bare_one_form_needs_its_derivative():
    bare = SmoothForm(1, lambda z: (np.real(z), np.imag(z)), name="radial")
    with pytest.raises(ValidationError):
        dC(CurrentRep.smooth(bare))
    exact = dC(CurrentRep.smooth(constant(2.0)))
    assert np.all(dC(exact).form.value(np.array([0.3 + 0.2j])) == 0)


def test_dc_degree_rules():
    with pytest.raises(DegreeMismatchError):
        dC(CurrentRep.delta(0.5))
    assert dC(CurrentRep.green(GreenKernel())).kind == "green-dc"
    assert dC(CurrentRep.green(GreenKernel())).degree == 1


def test_wedge_density_is_antisymmetric():
    g1, g2 = np.array([1.0 + 2.0j]), np.array([-0.5 + 1.0j])
    assert wedge_density(g1, g2) == pytest.approx(-wedge_density(g2, g1))
    assert wedge_density(g1, g1) == pytest.approx(0.0)
    # dx-gradient against dy-gradient
    assert wedge_density(np.array([1.0 + 0j]), np.array([1j])) == pytest.approx(1 / (16 * math.pi ** 2))


def test_current_validation():
    with pytest.raises(ValidationError):
        CurrentRep("bogus", 0)
    with pytest.raises(ValidationError):
        CurrentRep("delta", 1, point=SpherePoint(0j))
    with pytest.raises(ValidationError):
        CurrentRep.delta(0.5).evaluate(0.5)


# --- Harmonic basis ---

@pytest.mark.parametrize("base", ["inf", 0.5 - 1j])
def test_harmonic_basis_is_dual(base):
    basis = HarmonicBasis(SpherePoint.parse(base))
    assert basis.pairing_matrix() == [[1, 0], [0, 1]]
    basis.validate()


def test_harmonic_pairing_needs_a_function_and_a_delta():
    assert harmonic_pairing(CurrentRep.smooth(constant(2.0)), CurrentRep.delta(1j, 3.0)) == 6.0
    assert harmonic_pairing(CurrentRep.delta(1j), CurrentRep.delta(0.5)) == 0
    with pytest.raises(ValidationError):
        harmonic_pairing(CurrentRep.smooth(constant(1.0)), CurrentRep.smooth(gaussian_density(0, 1)))


def test_projector_on_functions_and_densities():
    projector = harmonic_projector_kernel(HarmonicBasis(SpherePoint(0.5)), resolution=64)
    assert projector.rank == 2
    value = projector.apply(CurrentRep.smooth(gaussian(0.0, 1.0))).form.at_infinity
    assert value == pytest.approx(math.exp(-0.25))
    delta = projector.apply(CurrentRep.delta(2j, 4.0))
    assert delta.kind == "delta"
    assert delta.point == SpherePoint(0.5)
    assert delta.coefficient == 4.0


def test_projector_at_infinity_reads_the_value_there():
    projector = harmonic_projector_kernel(HarmonicBasis())
    assert projector.apply(CurrentRep.smooth(constant(3.0))).form.at_infinity == 3.0
    assert projector.apply(CurrentRep.smooth(gaussian(0.0, 1.0))).form.at_infinity == 0.0


def test_projector_kills_exact_forms():
    projector = harmonic_projector_kernel(HarmonicBasis(), resolution=64)
    one_form = dC(CurrentRep.smooth(gaussian(0.0, 0.6)))
    density = dC(one_form)
    assert projector.apply(density).coefficient == pytest.approx(0.0, abs=1e-6)
    p, q = projector.apply(one_form).form.value(X)
    assert not np.any(p) and not np.any(q)


# --- Certification ---

def test_certification_rows():
    rows = green_certification(GreenKernel(), forms=1, resolution=128)
    assert [r["name"] for r in rows] == ["weak_form_0", "mis_normalized_control", "base_point_change", "symmetry"]
    assert all(r["passed"] for r in rows)


@pytest.mark.slow
def test_certification_on_twenty_forms_at_full_resolution():
    rows = green_certification(GreenKernel())
    assert len([r for r in rows if r["name"].startswith("weak_form")]) == 20
    assert all(r["passed"] for r in rows), [r for r in rows if not r["passed"]]
