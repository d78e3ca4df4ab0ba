"""
Sphere Green Module

Analytic layer on the Riemann sphere for the trivial rank-1 bundle:
the Green kernel, smooth forms and delta currents, the real operator
``D^C = (D' - D'') / (4 pi i)``, the harmonic basis ``(1, delta_a)`` and the
weak-form checks that certify the kernel.

The kernel is written with the chordal distance so that it is chart
independent and makes sense for ``a = inf``:

    G_a(x, y) = s * (log d(x,y)^2 - (log d(x,a)^2 + log d(y,a)^2))

It solves ``dd^C G_a(., y) = delta_y - delta_a`` in ``x``, i.e.
``(1/4pi) * integral of G * Laplacian(phi) = phi(y) - phi(a)``. For ``a = inf``
it reduces to ``log|x - y|^2``.

On functions ``d^C f = (-f_y dx + f_x dy) / (4 pi)``; on 1-forms the operator is the
exterior derivative, so ``D^C D^C f = Lap(f) / (4 pi)`` exactly. Gradients are carried in
complex form ``g = f_x + i f_y``; two 1-forms ``d^C f1 ^ d^C f2`` at one point
give the density ``Im(conj(g1) g2) / (16 pi^2)`` against ``dx ^ dy``.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from src import config
from src.errors import DegreeMismatchError, SingularityError, ValidationError
from src.geometry import SpherePoint
from src.quadrature import integrate_sphere

FOUR_PI = 4.0 * math.pi
WEDGE_SCALE = 1.0 / (16.0 * math.pi ** 2)


# --- Green kernel ---

def _log_chordal(x, y):
    x = np.asarray(x, dtype=complex)
    nx = np.log1p(np.abs(x) ** 2)
    if isinstance(y, SpherePoint):
        if y.is_infinite:
            return -nx
        y = y.z
    y = np.asarray(y, dtype=complex)
    return np.log(np.abs(x - y) ** 2) - (nx + np.log1p(np.abs(y) ** 2))


def _h(x, y):
    """Complex x-gradient of ``log d(x, y)^2``."""
    x = np.asarray(x, dtype=complex)
    tail = -2.0 * x / (1.0 + np.abs(x) ** 2)
    if isinstance(y, SpherePoint):
        if y.is_infinite:
            return tail
        y = y.z
    return 2.0 / np.conj(x - np.asarray(y, dtype=complex)) + tail


@dataclass(frozen=True)
class GreenKernel:
    """``G_a`` with base point ``base_point`` and overall scale ``scale``."""

    base_point: SpherePoint = field(default_factory=SpherePoint.infinity)
    scale: float = config.GREEN_SCALE

    def __call__(self, x, y):
        """Vectorized value; ``x`` finite points, ``y`` finite points or a ``SpherePoint``."""
        a = self.base_point
        if isinstance(y, SpherePoint):
            if not y.is_infinite:
                y = np.asarray(y.z)
            elif a.is_infinite:
                raise SingularityError("Green kernel is singular when y and the base point are both infinite")
            else:
                return self.scale * (_log_chordal(x, y) - (_log_chordal(x, a) + _log_chordal(a.z, y)))
        return self.scale * (_log_chordal(x, y) - (_log_chordal(x, a) + _log_chordal(y, a)))

    def gradient(self, x, y):
        """Complex gradient ``G_x + i G_y`` in the first argument."""
        return self.scale * (_h(x, y) - _h(x, self.base_point))

    def rescaled(self, factor: float) -> "GreenKernel":
        return GreenKernel(self.base_point, self.scale * factor)

    def with_base_point(self, point: SpherePoint) -> "GreenKernel":
        return GreenKernel(point, self.scale)


def _same(p: SpherePoint, q: SpherePoint) -> bool:
    if p.is_infinite or q.is_infinite:
        return p.is_infinite and q.is_infinite
    return p.z == q.z


def green_eval(kernel: GreenKernel, x: SpherePoint, y: SpherePoint) -> float:
    """``G_a(x, y)`` at two sphere points; raises ``SingularityError`` on the singular locus."""
    x, y = SpherePoint.parse(x), SpherePoint.parse(y)
    a = kernel.base_point
    if _same(x, y) or _same(x, a) or _same(y, a):
        raise SingularityError(f"Green kernel is singular at x={x}, y={y}, a={a}")
    if x.is_infinite:
        x, y = y, x
    return float(kernel(np.asarray(x.z), y))


def green_gradient(kernel: GreenKernel, x, y):
    return kernel.gradient(x, y)


# --- Forms and currents ---

@dataclass(frozen=True)
class SmoothForm:
    """A smooth form in the ``z`` chart.

    Degree 0: ``value(z)`` is the function, ``gradient(z)`` its complex gradient,
    ``laplacian(z)`` its Laplacian. Degree 1: ``value(z)`` returns ``(P, Q)`` for
    ``P dx + Q dy`` and ``derivative(z)`` the density ``Q_x - P_y`` of its exterior
    derivative. Degree 2: ``value(z)`` is the density against ``dx ^ dy``.
    """

    degree: int
    value: Callable
    gradient: Callable = None
    laplacian: Callable = None
    name: str = ""
    singular: tuple = ()
    at_infinity: float = 0.0
    derivative: Callable = None


def constant(c: complex = 1.0) -> SmoothForm:
    zero = lambda z: np.zeros(np.shape(z), dtype=complex)  # noqa: E731
    return SmoothForm(0, lambda z: np.full(np.shape(z), c), zero,
                      lambda z: np.zeros(np.shape(z)), f"const({c})", (), c)


def gaussian(center: complex, width: float, coefficient: complex = 1.0) -> SmoothForm:
    """``coefficient * exp(-|z - center|^2 / width^2)``, a degree-0 test function."""
    w2 = width * width

    def value(z):
        return coefficient * np.exp(-np.abs(np.asarray(z) - center) ** 2 / w2)

    def gradient(z):
        return -2.0 * (np.asarray(z) - center) / w2 * value(z)

    def laplacian(z):
        r2 = np.abs(np.asarray(z) - center) ** 2
        return value(z) * (4.0 * r2 / (w2 * w2) - 4.0 / w2)

    return SmoothForm(0, value, gradient, laplacian, f"gaussian({center}, {width})")


def gaussian_density(center: complex, width: float, coefficient: complex = 1.0) -> SmoothForm:
    """Degree-2 Gaussian normalized so that its integral is ``coefficient``."""
    w2 = width * width

    def value(z):
        return coefficient * np.exp(-np.abs(np.asarray(z) - center) ** 2 / w2) / (math.pi * w2)

    return SmoothForm(2, value, name=f"gaussian_density({center}, {width})")


def log_abs2() -> SmoothForm:
    """``log|z|^2``, singular at 0 and infinity; the calibration function for ``dC``."""
    return SmoothForm(0, lambda z: np.log(np.abs(z) ** 2), lambda z: 2.0 / np.conj(z),
                      lambda z: np.zeros(np.shape(z)), "log|z|^2",
                      (SpherePoint(0j), SpherePoint.infinity()))


@dataclass(frozen=True)
class CurrentRep:
    """A smooth form, a delta current at a point, or a Green-kernel factor."""

    kind: str
    degree: int
    form: SmoothForm = None
    point: SpherePoint = None
    coefficient: complex = 1.0
    kernel: GreenKernel = None

    def __post_init__(self):
        if self.kind not in ("smooth", "delta", "green", "green-dc"):
            raise ValidationError(f"unknown current kind {self.kind!r}")
        if self.degree not in (0, 1, 2):
            raise ValidationError(f"current degree {self.degree} outside 0..2")
        if self.kind == "delta" and (self.point is None or self.degree != 2):
            raise ValidationError("delta currents have degree 2 and a location")

    @classmethod
    def smooth(cls, form: SmoothForm, coefficient: complex = 1.0) -> "CurrentRep":
        return cls("smooth", form.degree, form=form, coefficient=coefficient)

    @classmethod
    def delta(cls, point, coefficient: complex = 1.0) -> "CurrentRep":
        return cls("delta", 2, point=SpherePoint.parse(point), coefficient=coefficient)

    @classmethod
    def green(cls, kernel: GreenKernel) -> "CurrentRep":
        return cls("green", 0, kernel=kernel)

    def evaluate(self, z):
        if self.kind != "smooth":
            raise ValidationError(f"a {self.kind} current has no pointwise value")
        return self.coefficient * self.form.value(z)

    def integrate(self, resolution: int = None) -> complex:
        """Integral over the sphere of a degree-2 current (exact for deltas)."""
        if self.degree != 2:
            return 0.0
        if self.kind == "delta":
            return self.coefficient
        result = integrate_sphere(lambda z: np.real(self.form.value(z)), list(self.form.singular), resolution)
        return self.coefficient * result.value


def dC(current: CurrentRep) -> CurrentRep:
    """Applies ``D^C``; raises the degree by one."""
    if current.degree >= 2:
        raise DegreeMismatchError(f"D^C of a degree-{current.degree} current leaves the sphere's degree range")
    if current.kind == "green":
        return CurrentRep("green-dc", 1, kernel=current.kernel)
    if current.kind != "smooth":
        raise DegreeMismatchError(f"D^C is not defined on a {current.kind} current here")
    form = current.form
    if current.degree == 0:
        grad, lap = form.gradient, form.laplacian

        def one_form(z):
            g = grad(z)
            return (-np.imag(g) / FOUR_PI, np.real(g) / FOUR_PI)

        # d(-f_y dx + f_x dy) = (f_xx + f_yy) dx ^ dy
        derivative = None if lap is None else (lambda z: np.real(lap(z)) / FOUR_PI)
        out = SmoothForm(1, one_form, name=f"dC({form.name})", singular=form.singular, derivative=derivative)
        return CurrentRep("smooth", 1, form=out, coefficient=current.coefficient)

    if form.derivative is None:
        raise ValidationError(f"D^C of the 1-form {form.name!r} needs its exterior derivative")
    out = SmoothForm(2, form.derivative, name=f"dC({form.name})", singular=form.singular)
    return CurrentRep("smooth", 2, form=out, coefficient=current.coefficient)


def wedge_density(g1, g2):
    """Density of ``d^C f1 ^ d^C f2`` from the complex gradients of ``f1`` and ``f2``."""
    return WEDGE_SCALE * np.imag(np.conj(g1) * g2)


# --- Harmonic basis and projector ---

@dataclass(frozen=True)
class HarmonicBasis:
    """``(1, delta_a)`` with dual basis ``(delta_a, 1)``; ``integral(alpha_i ^ dual_j) = delta_ij``."""

    base_point: SpherePoint = field(default_factory=SpherePoint.infinity)

    def elements(self) -> list:
        return [CurrentRep.smooth(constant(1.0)), CurrentRep.delta(self.base_point)]

    def duals(self) -> list:
        return [CurrentRep.delta(self.base_point), CurrentRep.smooth(constant(1.0))]

    @property
    def dimension(self) -> int:
        return 2

    def pairing_matrix(self) -> list:
        return [[harmonic_pairing(a, b) for b in self.duals()] for a in self.elements()]

    def validate(self):
        matrix = self.pairing_matrix()
        for i, row in enumerate(matrix):
            for j, value in enumerate(row):
                if value != (1 if i == j else 0):
                    raise ValidationError(f"harmonic basis is not dual: entry ({i},{j}) = {value}")


def harmonic_pairing(a: CurrentRep, b: CurrentRep):
    """``integral(a ^ b)`` for a constant against a delta or another constant (exact)."""
    if a.degree + b.degree != 2:
        return 0
    if a.kind == "delta":
        a, b = b, a
    if a.kind != "smooth" or b.kind != "delta":
        raise ValidationError("harmonic pairing needs a function against a delta")
    return a.coefficient * b.coefficient * _test_value(a.form, b.point)


@dataclass(frozen=True)
class ProjectorKernel:
    """``P_Har = 1 (x) delta_a + delta_a (x) 1``."""

    basis: HarmonicBasis
    resolution: int = None

    @property
    def rank(self) -> int:
        return self.basis.dimension

    def apply(self, current: CurrentRep) -> CurrentRep:
        """Harmonic part: ``phi -> phi(a)`` on functions, ``rho -> (integral rho) delta_a`` on top forms."""
        a = self.basis.base_point
        if current.degree == 0:
            if current.kind != "smooth":
                raise ValidationError("degree-0 projection needs a function")
            if a.is_infinite:
                value = current.coefficient * current.form.at_infinity
            else:
                value = complex(current.evaluate(np.asarray(a.z)))
            return CurrentRep.smooth(constant(value))
        if current.degree == 2:
            return CurrentRep.delta(a, current.integrate(self.resolution))
        zero = lambda z: np.zeros(np.shape(z))  # noqa: E731
        return CurrentRep.smooth(SmoothForm(1, lambda z: (zero(z), zero(z)), name="0", derivative=zero))


def harmonic_projector_kernel(basis: HarmonicBasis, resolution: int = None) -> ProjectorKernel:
    basis.validate()
    return ProjectorKernel(basis, resolution)


# --- Weak-form checks ---

def _test_value(form: SmoothForm, point: SpherePoint) -> float:
    if point.is_infinite:
        return float(np.real(form.at_infinity))
    return float(np.real(form.value(np.asarray(point.z))))


def green_pde_residual(kernel: GreenKernel, test_form: SmoothForm, y, resolution: int = None,
                       tolerance: float = None) -> tuple:
    """``|(1/4pi) integral G(x,y) Lap(phi)(x) dA - (phi(y) - phi(a))|`` and the quadrature result."""
    if test_form.degree != 0 or test_form.laplacian is None:
        raise ValidationError("the weak-form check needs a degree-0 test function with a Laplacian")
    y = SpherePoint.parse(y)
    a = kernel.base_point
    result = integrate_sphere(lambda x: kernel(x, y) * np.real(test_form.laplacian(x)) / FOUR_PI,
                              [y, a], resolution, tolerance)
    expected = _test_value(test_form, y) - _test_value(test_form, a)
    residual = abs(result.value - expected)
    logging.info(f"Weak-form residual of the Green kernel at y={y}: {residual:.3g}")
    return residual, result


def base_point_change_residual(first: GreenKernel, second: GreenKernel, test_form: SmoothForm, y,
                               resolution: int = None, tolerance: float = None) -> tuple:
    """Residual of ``G_a - G_b`` against ``phi``, whose exact weak value is ``phi(b) - phi(a)``."""
    y = SpherePoint.parse(y)
    a, b = first.base_point, second.base_point

    def integrand(x):
        return (first(x, y) - second(x, y)) * np.real(test_form.laplacian(x)) / FOUR_PI

    result = integrate_sphere(integrand, [y, a, b], resolution, tolerance)
    expected = _test_value(test_form, b) - _test_value(test_form, a)
    return abs(result.value - expected), result


def diagonal_disk_integral(kernel: GreenKernel, y, radius: float, resolution: int = None) -> float:
    """``integral over |x - y| < radius of |G(x, y)| dA`` in polar coordinates centred on ``y``."""
    y = SpherePoint.parse(y)
    if y.is_infinite:
        raise ValidationError("the diagonal disk integral needs a finite centre")
    resolution = resolution or config.RESOLUTION
    t, wt = np.polynomial.legendre.leggauss(resolution)
    t, wt = 0.5 * (t + 1.0), 0.5 * wt
    theta = 2.0 * math.pi * (np.arange(resolution) + 0.5) / resolution
    r = radius * t ** 2
    rr, th = np.meshgrid(r, theta, indexing="ij")
    weights = np.repeat((2.0 * radius ** 2 * t ** 3 * wt)[:, None], resolution, axis=1) * (2 * math.pi / resolution)
    x = y.z + rr * np.exp(1j * th)
    return float(np.sum(np.abs(kernel(x, y)) * weights))


# --- Certification ---

def green_certification(kernel: GreenKernel, forms: int = None, resolution: int = None, tolerance: float = None,
                        seed: int = None) -> list:
    """Rows ``{name, residual, error, threshold, passed}`` certifying ``kernel``.

    One weak-form row per random Gaussian test function, a mis-normalized
    control that must fail, a base-point change and bitwise symmetry.
    """
    forms = config.GREEN_FORMS if forms is None else forms
    resolution = resolution or config.GREEN_RESOLUTION
    seed = config.SEED if seed is None else seed
    weak, control = config.GREEN_WEAK_FORM_THRESHOLD, config.GREEN_CONTROL_THRESHOLD
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(forms):
        center = complex(*rng.uniform(-1.0, 1.0, 2))
        test = gaussian(center, float(rng.uniform(0.4, 1.0)))
        y = center + complex(*rng.uniform(-0.3, 0.3, 2))
        residual, result = green_pde_residual(kernel, test, y, resolution, tolerance)
        rows.append({"name": f"weak_form_{i}", "residual": residual, "error": result.error,
                     "threshold": weak, "passed": residual < weak})

    residual, result = green_pde_residual(kernel.rescaled(2.0), gaussian(0.0, 0.7), 0.1 + 0.05j,
                                          resolution, tolerance)
    rows.append({"name": "mis_normalized_control", "residual": residual, "error": result.error,
                 "threshold": control, "passed": residual > control})

    moved = kernel.with_base_point(SpherePoint(2.0 - 1.5j))
    residual, result = base_point_change_residual(kernel, moved, gaussian(1.0, 0.8), 0.7 + 0.2j,
                                                  resolution, tolerance)
    rows.append({"name": "base_point_change", "residual": residual, "error": result.error,
                 "threshold": weak, "passed": residual < weak})

    x = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    y = rng.normal(size=10_000) + 1j * rng.normal(size=10_000)
    gap = float(np.max(np.abs(kernel(x, y) - kernel(y, x))))
    rows.append({"name": "symmetry", "residual": gap, "threshold": 0.0, "passed": gap == 0.0})
    failed = [r["name"] for r in rows if not r["passed"]]
    logging.info(f"Green kernel certification: {len(rows) - len(failed)}/{len(rows)} checks passed.")
    return rows
