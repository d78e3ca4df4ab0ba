import math

import numpy as np
import pytest

from src.errors import ConvergenceError
from src.geometry import SpherePoint, chordal_distance, chordal_sq
from sympy import expint

from src.quadrature import (MAX_PATCH_RADIUS, PATCH_SEPARATION, _diagonal_forest, _relative_point, adaptive_integrate,
                            bump, integrate_sphere, monte_carlo, pairwise_sum, partition_radii, sphere_rule,
                            tensor_integrate)
from src.sphere import gaussian_density


def _density(z):
    """Normalized area form of the round sphere in the z chart."""
    return 1.0 / (math.pi * (1.0 + np.abs(z) ** 2) ** 2)


# --- Geometry ---

def test_chordal_distance_is_chart_independent():
    p, q = SpherePoint(0.3 + 0.2j), SpherePoint(-2.0 + 5.0j)
    inverted = chordal_distance(SpherePoint.from_w(1 / p.z), SpherePoint.from_w(1 / q.z))
    assert chordal_distance(p, q) == pytest.approx(inverted, rel=1e-12)
    assert chordal_distance(SpherePoint(0j), SpherePoint.infinity()) == pytest.approx(1.0)
    assert chordal_distance(SpherePoint.infinity(), SpherePoint.infinity()) == 0.0
    assert chordal_sq(1.0, SpherePoint(-1.0)) == pytest.approx(1.0)


@pytest.mark.parametrize("raw, z", [("inf", None), (None, None), ([1, -2], 1 - 2j), ("0.5+1j", 0.5 + 1j), (2, 2)])
def test_sphere_point_parsing(raw, z):
    assert SpherePoint.parse(raw).z == z


def test_sphere_point_charts():
    assert SpherePoint(0.5j).chart == "z"
    assert SpherePoint(3.0).chart == "w"
    assert SpherePoint.infinity().chart == "w"
    assert SpherePoint.infinity().to_json() == "inf"


# --- Reductions and partitions ---

def test_pairwise_sum():
    assert pairwise_sum([]) == 0.0
    assert pairwise_sum([1, 2, 3, 4, 5]) == 15
    values = [0.1] * 1000
    assert pairwise_sum(values) == pairwise_sum(list(values))


def test_bump_profile():
    values = bump(np.array([0.0, 0.5, -0.5, 1.0, 2.0]))
    assert values[0] == 1.0
    assert values[1] == values[2] > 0
    assert values[3] == values[4] == 0.0


def test_partition_radii_keep_patches_apart():
    far = partition_radii([SpherePoint(0j), SpherePoint.infinity()])
    assert far == [MAX_PATCH_RADIUS, MAX_PATCH_RADIUS]
    close = partition_radii([SpherePoint(0j), SpherePoint(0.1 + 0j)])
    gap = chordal_distance(SpherePoint(0j), SpherePoint(0.1 + 0j))
    assert close == pytest.approx([PATCH_SEPARATION * gap] * 2)


# --- Deterministic rules ---

def test_rule_integrates_the_area_form():
    rule = sphere_rule([], 32)
    assert float(np.sum(_density(rule.points) * rule.weights)) == pytest.approx(1.0, abs=1e-10)


def test_rule_with_cut_outs_keeps_the_total():
    rule = sphere_rule([0.3 + 0.1j, "inf", -2.0], 128)
    assert float(np.sum(_density(rule.points) * rule.weights)) == pytest.approx(1.0, abs=1e-4)


def test_logarithmic_singularity_at_infinity():
    # integral of log(1 + |z|^2) against the area form is 1
    result = integrate_sphere(lambda z: np.log1p(np.abs(z) ** 2) * _density(z), ["inf"], resolution=64,
                              tolerance=1e-6)
    assert result.value == pytest.approx(1.0, abs=1e-5)
    assert result.method == "quad"
    assert result.trace


def test_antisymmetric_log_integrates_to_zero():
    result = integrate_sphere(lambda z: np.log(np.abs(z) ** 2) * _density(z), [0, "inf"], resolution=32,
                              tolerance=1e-6)
    assert abs(result.value) < 1e-6


def test_discontinuity_does_not_converge():
    with pytest.raises(ConvergenceError) as info:
        integrate_sphere(lambda z: np.where(np.real(z) > 0.3, 1.0, 0.0) * _density(z), [], resolution=16,
                         tolerance=1e-14, max_refinements=0)
    assert len(info.value.trace) == 1


def test_tensor_sum_is_independent_of_workers():
    rules = [sphere_rule([0.5], 16, phase=0.25), sphere_rule(["inf"], 16, phase=0.5)]

    def integrand(points):
        return _density(points[0]) * _density(points[1]) * np.log(np.abs(points[0] - points[1]) ** 2)

    serial = tensor_integrate(integrand, rules, workers=1, chunk_size=4096)
    parallel = tensor_integrate(integrand, rules, workers=4, chunk_size=4096)
    assert serial == parallel
    assert serial[1] == rules[0].size * rules[1].size


def test_product_of_area_forms():
    result = adaptive_integrate(lambda pts: _density(pts[0]) * _density(pts[1]), [[], []], resolution=16,
                                tolerance=1e-8)
    assert result.value == pytest.approx(1.0, abs=1e-8)


# --- Monte-Carlo ---

def test_monte_carlo_bookkeeping():
    result = monte_carlo(lambda pts: _density(pts[0]) * np.abs(pts[0]) ** 2 / (1.0 + np.abs(pts[0]) ** 2), 1,
                         samples=2000, seed=1, warmup=2, iterations=3)
    assert result.error > 0
    assert result.method == "mc"
    assert result.evaluations == 2000 * 5


def test_monte_carlo_is_reproducible_for_a_seed():
    def integrand(pts):
        r2 = np.abs(pts[0]) ** 2
        return _density(pts[0]) * r2 / (1.0 + r2)

    first = monte_carlo(integrand, 1, samples=2000, seed=11, warmup=2, iterations=3)
    second = monte_carlo(integrand, 1, samples=2000, seed=11, warmup=2, iterations=3)
    assert (first.value, first.error) == (second.value, second.error)
    assert first.value == pytest.approx(0.5, abs=5 * first.error + 1e-3)


# --- Diagonal bands ---

def test_diagonal_forest_hangs_factors_off_the_lowest_index():
    assert _diagonal_forest(3, []) == ({}, [])
    assert _diagonal_forest(3, [(1, 2), (0, 1)]) == ({1: 0, 2: 1}, [1, 2])
    assert _diagonal_forest(4, [(2, 3)]) == ({3: 2}, [3])


def test_relative_points_switch_chart_outside_the_unit_disk():
    anchor = np.array([0.5 + 0j, 4.0 + 0j])
    point, jac = _relative_point(anchor, np.array([0.1j, 0.01 + 0j]))
    assert point[0] == 0.5 + 0.1j
    assert point[1] == pytest.approx(1 / 0.26)
    assert jac[0] == 1.0
    assert jac[1] == pytest.approx(1 / 0.26 ** 4)


@pytest.mark.slow
def test_diagonal_bands_form_a_partition_of_unity():
    rho1, rho2 = gaussian_density(0.3, 0.5), gaussian_density(-0.4 + 0.2j, 0.4)

    def integrand(pts):
        return np.real(rho1.value(pts[0]) * rho2.value(pts[1]))

    result = adaptive_integrate(integrand, [[], []], resolution=24, tolerance=1e-3, max_refinements=1,
                                budget=30_000_000, diagonals=[(1, 0)])
    assert abs(result.value - 1.0) <= max(3 * result.error, 1e-4)


@pytest.mark.slow
def test_logarithmic_diagonal_matches_the_gaussian_closed_form():
    # X - Y is complex Gaussian: E log|X - Y|^2 = log|mu|^2 + E1(|mu|^2 / s)
    c1, w1, c2, w2 = 0.3, 0.5, -0.4 + 0.2j, 0.4
    rho1, rho2 = gaussian_density(c1, w1), gaussian_density(c2, w2)
    mu2, s = abs(c1 - c2) ** 2, w1 ** 2 + w2 ** 2
    expected = math.log(mu2) + float(expint(1, mu2 / s))

    def integrand(pts):
        return np.log(np.abs(pts[0] - pts[1]) ** 2) * np.real(rho1.value(pts[0]) * rho2.value(pts[1]))

    banded = adaptive_integrate(integrand, [[], []], resolution=24, tolerance=1e-3, max_refinements=1,
                                budget=30_000_000, diagonals=[(0, 1)])
    assert abs(banded.value - expected) <= max(3 * banded.error, 1e-4)
    assert banded.evaluations > 0
