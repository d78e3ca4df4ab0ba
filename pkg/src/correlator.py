"""
Correlator Engine

Evaluates Hodge correlators of the trivial rank-1 bundle on the Riemann sphere.

A spec decorates the sides of an (m+1)-gon. For every plane trivalent tree
dual to a triangulation, the side decorations are pulled back to the tree
vertex owning the side, the internal edges carry Green kernels combined by the
xi-operator, and the resulting top-degree form on ``X^{m-1}`` is integrated.
Delta decorations pin their vertex and are never discretized; free vertices
are integrated numerically.

Degree bookkeeping: decorations have degree 0 (constants, Gaussians) or 2
(deltas, Gaussian densities). With ``e = m - 2`` internal edges, xi produces
``max(e - 1, 0)`` one-forms, so a spec is non-zero only when
``sum(degrees) + max(e - 1, 0) = 2(m - 1)``; otherwise the value is exactly 0
and nothing is integrated.

Signs: each tree carries the Koszul sign taking
``(a0, .., am, G_e sorted)`` to the tree's DFS edge order (shifted degrees),
xi carries permutation signs, and moving one-forms next to their vertex carries
the Koszul sign of that reordering.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import permutations, product

import numpy as np
from sympy import QQ

from src import config
from src.errors import ConvergenceError, SingularityError, ValidationError
from src.geometry import SpherePoint, chordal_distance
from src.graded import Letter, SignedCyclicWord, koszul_sign
from src.quadrature import adaptive_integrate, monte_carlo, pairwise_sum
from src.sphere import (CurrentRep, GreenKernel, SmoothForm, constant, gaussian, gaussian_density, green_eval,
                        wedge_density)
from src.trees import (DecoratedPolygon, PlaneTree, classify_edges, edge_endpoint_order, enumerate_trees,
                       tree_sign, vertex_stars)

KIND_DEGREES = {"constant": 0, "smooth": 0, "delta": 2, "density": 2}
POINT_SEPARATION = 1e-9


# --- Decorations and specs ---

@dataclass(frozen=True)
class Decoration:
    """One side decoration.

    ``constant``: the class of 1 times ``coefficient``; ``delta``:
    ``sum(weights[i] * delta_{points[i]})`` times ``coefficient``; ``smooth``: a
    Gaussian function; ``density``: a Gaussian 2-form of integral ``coefficient``.
    """

    kind: str
    coefficient: complex = 1.0
    points: tuple = ()
    weights: tuple = ()
    center: complex = 0j
    width: float = 1.0

    def __post_init__(self):
        if self.kind not in KIND_DEGREES:
            raise ValidationError(f"unknown decoration kind {self.kind!r}")
        if self.kind == "delta":
            if not self.points:
                raise ValidationError("a delta decoration needs at least one point")
            if self.weights and len(self.weights) != len(self.points):
                raise ValidationError("delta weights and points differ in length")
        if self.kind in ("smooth", "density") and self.width <= 0:
            raise ValidationError(f"Gaussian width must be positive, got {self.width}")

    @classmethod
    def delta(cls, point, coefficient: complex = 1.0) -> "Decoration":
        return cls("delta", coefficient, (SpherePoint.parse(point),), (1.0,))

    @property
    def degree(self) -> int:
        return KIND_DEGREES[self.kind]

    @property
    def shifted_degree(self) -> int:
        return self.degree - 1

    @property
    def point(self) -> SpherePoint:
        return self.points[0]

    def scaled(self, factor: complex) -> "Decoration":
        return replace(self, coefficient=self.coefficient * factor)

    def simple_parts(self) -> list:
        """Splits a multi-point delta into ``(weight, single-point delta)`` pairs."""
        if self.kind != "delta" or len(self.points) == 1:
            weight = self.weights[0] if self.weights else 1.0
            return [(weight, replace(self, weights=(1.0,) if self.kind == "delta" else ()))]
        weights = self.weights or (1.0,) * len(self.points)
        return [(w, replace(self, points=(p,), weights=(1.0,))) for w, p in zip(weights, self.points)]

    def form(self) -> SmoothForm:
        if self.kind == "constant":
            return constant(1.0)
        if self.kind == "smooth":
            return gaussian(self.center, self.width)
        if self.kind == "density":
            return gaussian_density(self.center, self.width)
        raise ValidationError("delta decorations have no smooth form")

    def current(self) -> CurrentRep:
        if self.kind == "delta":
            return CurrentRep.delta(self.point, self.coefficient)
        return CurrentRep.smooth(self.form(), self.coefficient)

    def profile(self, z):
        """Real shape of a smooth decoration at free points (coefficient excluded)."""
        return np.real(self.form().value(z))

    def profile_at(self, point: SpherePoint) -> float:
        if point.is_infinite:
            return 1.0 if self.kind == "constant" else 0.0
        return float(self.profile(np.asarray(point.z)))

    def to_dict(self) -> dict:
        c = complex(self.coefficient)
        out = {"kind": self.kind, "coefficient": [c.real, c.imag]}
        if self.kind == "delta":
            if len(self.points) == 1:
                out["point"] = self.point.to_json()
            else:
                out["points"] = [p.to_json() for p in self.points]
                out["weights"] = list(self.weights)
        if self.kind in ("smooth", "density"):
            out["center"] = [self.center.real, self.center.imag]
            out["width"] = self.width
        return out


@dataclass(frozen=True)
class CorrelatorSpec:
    """Decorations of the polygon sides plus kernel and integration parameters."""

    decorations: tuple
    base_point: SpherePoint = field(default_factory=SpherePoint.infinity)
    method: str = config.METHOD
    resolution: int = config.RESOLUTION
    samples: int = config.SAMPLES
    seed: int = config.SEED
    tolerance: float = config.TOLERANCE
    max_refinements: int = config.MAX_REFINEMENTS
    workers: int = config.WORKERS
    cocycle: bool = False
    name: str = ""

    @property
    def m(self) -> int:
        return len(self.decorations) - 1

    @property
    def polygon(self) -> DecoratedPolygon:
        return DecoratedPolygon(tuple(f"V{i}" for i in range(len(self.decorations))), tuple(self.decorations))

    @property
    def kernel(self) -> GreenKernel:
        return GreenKernel(self.base_point)

    def with_options(self, **changes) -> "CorrelatorSpec":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def validate(self):
        if len(self.decorations) < 3:
            raise ValidationError(f"a correlator needs at least 3 decorations, got {len(self.decorations)}")
        if self.method not in ("quad", "mc"):
            raise ValidationError(f"unknown integration method {self.method!r}")
        points = [p for d in self.decorations if d.kind == "delta" for p in d.points]
        for i, p in enumerate(points):
            for q in points[i + 1:]:
                if chordal_distance(p, q) < POINT_SEPARATION:
                    raise ValidationError(f"delta points {p} and {q} coincide")
            if len(self.decorations) >= 4 and chordal_distance(p, self.base_point) < POINT_SEPARATION:
                raise ValidationError(f"delta point {p} sits on the base point")


def selection_rule_holds(spec: CorrelatorSpec) -> bool:
    """Top-degree rule: ``sum(deg) + max(e - 1, 0) == 2(m - 1)``."""
    edges = spec.m - 2
    return sum(d.degree for d in spec.decorations) + max(edges - 1, 0) == 2 * (spec.m - 1)


def expand_decorations(spec: CorrelatorSpec) -> list:
    """Multilinear expansion into ``(weight, spec)`` pairs with single-point deltas."""
    out = []
    for parts in product(*(d.simple_parts() for d in spec.decorations)):
        weight = math.prod(w for w, _ in parts)
        out.append((weight, replace(spec, decorations=tuple(d for _, d in parts))))
    return out


# --- xi and trace ---

@dataclass(frozen=True)
class XiTerm:
    """``coefficient * phi_base ^ D^C phi_d1 ^ ... `` with indices into the xi input list."""

    coefficient: object
    base: int
    differentiated: tuple


@dataclass(frozen=True)
class XiForm:
    currents: tuple
    terms: tuple

    @property
    def degree(self) -> int:
        if not self.currents:
            return 0
        return sum(c.degree for c in self.currents) + len(self.currents) - 1

    def evaluate(self, z):
        """Pointwise value on one sphere for degree-0 smooth inputs.

        Returns the function (degree 0), the ``(P, Q)`` components (degree 1) or the
        density (degree 2); anything above the top degree is the zero current.
        """
        z = np.asarray(z, dtype=complex)
        if not self.currents:
            return np.ones(z.shape)
        if any(c.kind != "smooth" or c.degree != 0 for c in self.currents):
            raise ValidationError("pointwise xi needs degree-0 smooth inputs")
        if self.degree > 2:
            return np.zeros(z.shape)
        values = [c.evaluate(z) for c in self.currents]
        grads = [c.coefficient * c.form.gradient(z) for c in self.currents]
        if self.degree == 0:
            return values[0]
        if self.degree == 1:
            p = sum(float(t.coefficient) * values[t.base] * -np.imag(grads[t.differentiated[0]]) for t in self.terms)
            q = sum(float(t.coefficient) * values[t.base] * np.real(grads[t.differentiated[0]]) for t in self.terms)
            return p / (4 * math.pi), q / (4 * math.pi)
        return sum(float(t.coefficient) * values[t.base]
                   * wedge_density(grads[t.differentiated[0]], grads[t.differentiated[1]]) for t in self.terms)


def xi(currents: list) -> XiForm:
    """``(1/k!) sum_sigma sign * phi_s0 ^ D^C phi_s1 ^ ... ^ D^C phi_s(k-1)``.

    Signs are Koszul signs of the permutation in the degrees of the ``[-1]``-shifted
    inputs. The empty list gives the unit.
    """
    currents = tuple(currents)
    k = len(currents)
    if k == 0:
        return XiForm((), (XiTerm(QQ(1), None, ()),))
    shifted = [c.degree + 1 for c in currents]
    norm = QQ(1, math.factorial(k))
    terms = []
    for perm in permutations(range(k)):
        terms.append(XiTerm(norm * koszul_sign(perm, shifted), perm[0], tuple(perm[1:])))
    return XiForm(currents, tuple(terms))


def trace_contract(star: tuple, factors: list) -> complex:
    """Rank-1 trace at a vertex: the factors (one per star slot, or dual/primal pairs) multiply."""
    if len(factors) not in (len(star), 2 * len(star)):
        raise ValidationError(f"{len(factors)} factors do not match a star with {len(star)} slots")
    out = 1
    for f in factors:
        out = out * f
    return out


# --- Kernels with gauge perturbations ---

@dataclass(frozen=True)
class Perturbation:
    """``exact``: ``G + eta(x) + eta(y)``; ``harmonic``: ``G + amplitude``.

    ``edge`` is ``"all"`` or the index of one internal edge in sorted-diagonal order.
    """

    kind: str = "exact"
    eta: SmoothForm = None
    amplitude: float = 0.0
    edge: object = "all"

    def __post_init__(self):
        if self.kind not in ("exact", "harmonic"):
            raise ValidationError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "exact" and (self.eta is None or self.eta.degree != 0):
            raise ValidationError("an exact perturbation needs a degree-0 function eta")

    def applies_to(self, index: int) -> bool:
        return self.edge == "all" or int(self.edge) == index


@dataclass(frozen=True)
class PerturbedKernel:
    base: GreenKernel
    perturbation: Perturbation

    @property
    def base_point(self) -> SpherePoint:
        return self.base.base_point

    def _eta(self, x):
        if isinstance(x, SpherePoint):
            if x.is_infinite:
                return float(np.real(self.perturbation.eta.at_infinity))
            x = np.asarray(x.z)
        return np.real(self.perturbation.eta.value(x))

    def __call__(self, x, y):
        if self.perturbation.kind == "harmonic":
            return self.base(x, y) + self.perturbation.amplitude
        return self.base(x, y) + self._eta(x) + self._eta(y)

    def gradient(self, x, y):
        if self.perturbation.kind == "harmonic":
            return self.base.gradient(x, y)
        return self.base.gradient(x, y) + self.perturbation.eta.gradient(x)

    def between(self, x: SpherePoint, y: SpherePoint) -> float:
        value = green_eval(self.base, x, y)
        if self.perturbation.kind == "harmonic":
            return value + self.perturbation.amplitude
        return value + self._eta(x) + self._eta(y)


def _between(kernel, x: SpherePoint, y: SpherePoint) -> float:
    if isinstance(kernel, PerturbedKernel):
        return kernel.between(x, y)
    return green_eval(kernel, x, y)


# --- Tree integrands ---

@dataclass(frozen=True)
class GreenTerm:
    """``coefficient * G_base * prod_v density(one-forms at v)``; a one-form is ``(edge, vertex)``."""

    coefficient: object
    base: int
    pairs: tuple


@dataclass
class TreeIntegrand:
    tree: PlaneTree
    sign: int
    coefficient: complex
    edges: list
    kernels: list
    pinned: dict
    free: list
    free_factors: dict
    terms: list
    singular: dict
    zero_reason: str = ""
    diagonals: list = field(default_factory=list)

    @property
    def is_zero(self) -> bool:
        return bool(self.zero_reason) or not self.terms or self.coefficient == 0

    def _green(self, e: int, pos: dict):
        u, w = self.edges[e]
        pu, pw = pos[u], pos[w]
        kernel = self.kernels[e]
        if isinstance(pu, SpherePoint) and isinstance(pw, SpherePoint):
            return _between(kernel, pu, pw)
        if isinstance(pu, SpherePoint):
            return kernel(pw, pu)
        if isinstance(pw, SpherePoint):
            return kernel(pu, pw)
        return kernel(pu, pw)

    def _gradient(self, form: tuple, pos: dict):
        e, v = form
        u, w = self.edges[e]
        other = w if v == u else u
        return self.kernels[e].gradient(pos[v], pos[other])

    def evaluate(self, free_points: list):
        """Real integrand at arrays of free-vertex positions (one array per free vertex)."""
        pos = dict(self.pinned)
        for v, pts in zip(self.free, free_points):
            pos[v] = np.asarray(pts, dtype=complex)
        size = len(free_points[0]) if free_points else 1
        profile = np.ones(size)
        for v, decorations in self.free_factors.items():
            for d in decorations:
                profile = profile * d.profile(pos[v])
        total = np.zeros(size)
        for term in self.terms:
            value = np.full(size, float(term.coefficient))
            if term.base is not None:
                value = value * self._green(term.base, pos)
            for _, (f1, f2) in term.pairs:
                value = value * wedge_density(self._gradient(f1, pos), self._gradient(f2, pos))
            total = total + value
        return total * profile

    def exact_value(self) -> float:
        return float(self.evaluate([])[0])

    def describe(self) -> dict:
        return {
            "pinned": {str(v): p.to_json() for v, p in sorted(self.pinned.items())},
            "free_vertices": list(self.free),
            "terms": len(self.terms),
            "diagonals": [list(pair) for pair in self.diagonals],
            "zero_reason": self.zero_reason,
        }


def _vertex_decorations(tree: PlaneTree, spec: CorrelatorSpec) -> tuple:
    edges = classify_edges(tree, spec.polygon)
    at_vertex = {v: [] for v in range(len(tree.triangles))}
    factors = {v: [] for v in range(len(tree.triangles))}
    by_segment = {e.segment: e for e in edges["external"]}
    for v, tri in enumerate(tree.triangles):
        for seg in tree.clockwise_segments(v):
            edge = by_segment.get(seg)
            if edge is None:
                factors[v].append(1)
            else:
                at_vertex[v].append(spec.decorations[edge.side])
                factors[v].append(spec.decorations[edge.side].coefficient)
    return edges, at_vertex, factors


def tree_integrand(tree: PlaneTree, spec: CorrelatorSpec, reverse_edges: bool = False,
                   perturbation: Perturbation = None) -> TreeIntegrand:
    """Integrand of one tree on ``X^(free vertices)``, with deltas already collapsed."""
    degrees = [d.degree for d in spec.decorations]
    sign = tree_sign(tree, degrees)
    edges_info, at_vertex, factors = _vertex_decorations(tree, spec)
    edges = [edge_endpoint_order(e.segment, tree) for e in edges_info["internal"]]
    if reverse_edges:
        edges = [(b, a) for a, b in edges]
    kernels = [PerturbedKernel(spec.kernel, perturbation) if perturbation and perturbation.applies_to(i)
               else spec.kernel for i in range(len(edges))]
    stars = vertex_stars(tree, spec.polygon)
    coefficient = complex(config.HCAL_COEFFICIENT) * sign
    for v, star in enumerate(stars):
        coefficient *= trace_contract(star, factors[v])

    integrand = TreeIntegrand(tree, sign, coefficient, edges, kernels, {}, [], {}, [], {})
    need = {}
    for v, decorations in at_vertex.items():
        degree = sum(d.degree for d in decorations)
        if degree > 2:
            integrand.zero_reason = f"vertex {v} carries degree {degree}"
            return integrand
        need[v] = 2 - degree
        deltas = [d for d in decorations if d.kind == "delta"]
        if deltas:
            point = deltas[0].point
            integrand.pinned[v] = point
            for d in decorations:
                if d.kind == "smooth":
                    integrand.coefficient *= d.profile_at(point)
        else:
            integrand.free.append(v)
            integrand.free_factors[v] = [d for d in decorations if d.kind in ("smooth", "density")]

    k = len(edges)
    if sum(need.values()) != max(k - 1, 0):
        integrand.zero_reason = "degree selection"
        return integrand

    combined = {}
    for term in xi([CurrentRep.green(kernels[i]) for i in range(k)]).terms:
        diff = term.differentiated
        for choice in product((0, 1), repeat=len(diff)):
            verts = [edges[e][c] for e, c in zip(diff, choice)]
            if any(verts.count(v) != need[v] for v in need):
                continue
            order = sorted(range(len(verts)), key=lambda i: verts[i])
            s = koszul_sign(order, [1] * len(verts))
            pairs = []
            for v in sorted(set(verts)):
                forms = [(diff[i], verts[i]) for i in order if verts[i] == v]
                if forms[0] > forms[1]:
                    forms.reverse()
                    s = -s
                pairs.append((v, tuple(forms)))
            key = (term.base, tuple(pairs))
            combined[key] = combined.get(key, QQ(0)) + term.coefficient * s
    integrand.terms = [GreenTerm(c, base, pairs) for (base, pairs), c in sorted(
        combined.items(), key=lambda item: (-1 if item[0][0] is None else item[0][0], item[0][1])) if c != 0]
    if not integrand.terms:
        integrand.zero_reason = "no admissible one-form placement"

    for v in integrand.free:
        points = []
        for a, b in edges:
            if v in (a, b):
                other = b if v == a else a
                if other in integrand.pinned:
                    points.append(integrand.pinned[other])
        if any(v in edge for edge in edges):
            points.append(spec.base_point)
        integrand.singular[v] = points
    slot = {v: i for i, v in enumerate(integrand.free)}
    integrand.diagonals = [tuple(sorted((slot[a], slot[b]))) for a, b in edges if a in slot and b in slot]
    return integrand


# --- Integration and evaluation ---

@dataclass
class TreeContribution:
    tree: PlaneTree
    sign: int
    value: complex
    error: float
    evaluations: int
    method: str
    exact: bool
    trace: list = field(default_factory=list)
    zero_reason: str = ""

    def to_dict(self) -> dict:
        return {
            "triangles": [list(t) for t in self.tree.triangles],
            "sign": self.sign,
            "value": [self.value.real, self.value.imag],
            "abs_error": self.error,
            "evaluations": self.evaluations,
            "method": self.method,
            "exact": self.exact,
            "zero_reason": self.zero_reason,
            "trace": self.trace,
        }


def integrate(integrand: TreeIntegrand, method: str = "quad", spec: CorrelatorSpec = None,
              seed: int = None, workers: int = 1) -> tuple:
    """``(value, error, evaluations, trace, exact)`` of one tree integrand."""
    if integrand.is_zero:
        return 0j, 0.0, 0, [], True
    if not integrand.free:
        return integrand.coefficient * integrand.exact_value(), 0.0, 1, [], True
    spec = spec or CorrelatorSpec(())
    singular = [integrand.singular.get(v, []) for v in integrand.free]
    if method == "mc":
        result = monte_carlo(integrand.evaluate, len(integrand.free), spec.samples,
                             spec.seed if seed is None else seed)
    else:
        result = adaptive_integrate(integrand.evaluate, singular, spec.resolution, spec.tolerance,
                                    spec.max_refinements, workers, diagonals=integrand.diagonals)
    scale = abs(integrand.coefficient)
    return integrand.coefficient * result.value, scale * result.error, result.evaluations, result.trace, False


@dataclass
class CorrelatorResult:
    value: complex
    error: float
    contributions: list
    selection_rule: bool
    evaluations: int
    method: str

    def to_dict(self) -> dict:
        return {
            "value": [self.value.real, self.value.imag],
            "abs_error": self.error,
            "selection_rule": self.selection_rule,
            "evaluations": self.evaluations,
            "method": self.method,
            "trees": [c.to_dict() for c in self.contributions],
        }


def _tree_seeds(seed: int, count: int) -> list:
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(count)]


def _evaluate_simple(spec: CorrelatorSpec, reverse_edges: bool, perturbation: Perturbation) -> list:
    trees = enumerate_trees(spec.polygon)
    seeds = _tree_seeds(spec.seed, len(trees))
    parallel_trees = spec.workers > 1 and len(trees) > 1
    inner_workers = 1 if parallel_trees else spec.workers

    def run(i):
        tree = trees[i]
        integrand = tree_integrand(tree, spec, reverse_edges, perturbation)
        try:
            value, error, evaluations, trace, exact = integrate(integrand, spec.method, spec, seeds[i], inner_workers)
        except ConvergenceError as exc:
            raise ConvergenceError(f"tree {i} {list(tree.triangles)}: {exc}", exc.trace) from exc
        except SingularityError as exc:
            raise SingularityError(f"tree {i} {list(tree.triangles)}: {exc}") from exc
        logging.info(f"Tree {i} {list(tree.triangles)}: {value:.10g} (+- {error:.2g})")
        return TreeContribution(tree, integrand.sign, complex(value), float(error), evaluations,
                                spec.method, exact, trace, integrand.zero_reason)

    if parallel_trees:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            return list(pool.map(run, range(len(trees))))
    return [run(i) for i in range(len(trees))]


def evaluate(spec: CorrelatorSpec, reverse_edges: bool = False, perturbation: Perturbation = None) -> CorrelatorResult:
    """Sum over all plane trees of the signed tree values, with the per-tree breakdown."""
    spec.validate()
    if not selection_rule_holds(spec):
        logging.info("Degree selection rule fails; the correlator is exactly 0.")
        return CorrelatorResult(0j, 0.0, [], False, 0, spec.method)
    logging.info(f"--- Starting correlator evaluation of '{spec.name}' ({len(spec.decorations)}-gon) ---")
    contributions, values, errors = [], [], []
    for weight, simple in expand_decorations(spec):
        parts = _evaluate_simple(simple, reverse_edges, perturbation)
        for part in parts:
            part.value *= weight
            part.error *= abs(weight)
        contributions.extend(parts)
    values = [c.value for c in contributions]
    errors = [c.error for c in contributions]
    if spec.method == "mc":
        error = math.sqrt(pairwise_sum([e * e for e in errors]))
    else:
        error = pairwise_sum(errors)
    evaluations = sum(c.evaluations for c in contributions)
    total = complex(pairwise_sum(values))
    logging.info(f"Correlator value {total:.10g} (+- {error:.2g}) from {len(contributions)} tree term(s).")
    return CorrelatorResult(total, float(error), contributions, True, evaluations, spec.method)


# --- Well-definedness checks ---

def rotate_spec(spec: CorrelatorSpec, r: int) -> CorrelatorSpec:
    """Moves the last ``r`` decorations to the front."""
    n = len(spec.decorations)
    r %= n
    return replace(spec, decorations=tuple(spec.decorations[(i - r) % n] for i in range(n)))


def predicted_rotation_sign(shifted_degrees: list, r: int) -> int:
    """Sign with which the cyclic word of ``shifted_degrees`` equals its ``r``-fold rotation."""
    word = SignedCyclicWord(tuple(Letter(str(i), d) for i, d in enumerate(shifted_degrees)))
    for _ in range(r % max(len(shifted_degrees), 1)):
        word = word.rotate()
    return word.sign


def _deviation(reference: complex, other: complex) -> float:
    gap = abs(other - reference)
    return gap / abs(reference) if abs(reference) >= 1e-6 else gap


@dataclass
class InvarianceReport:
    reference: CorrelatorResult
    rows: list
    max_deviation: float

    def to_dict(self) -> dict:
        return {"reference": self.reference.to_dict(), "rotations": self.rows, "max_deviation": self.max_deviation}


def cyclic_invariance_check(spec: CorrelatorSpec) -> InvarianceReport:
    """Evaluates every rotation and compares ``sign * value`` with the unrotated value."""
    reference = evaluate(spec)
    degrees = [d.shifted_degree for d in spec.decorations]
    rows, worst = [], 0.0
    for r in range(1, len(spec.decorations)):
        sign = predicted_rotation_sign(degrees, r)
        rotated = evaluate(rotate_spec(spec, r))
        deviation = _deviation(reference.value, sign * rotated.value)
        worst = max(worst, deviation)
        rows.append({"rotation": r, "predicted_sign": sign, "value": [rotated.value.real, rotated.value.imag],
                     "abs_error": rotated.error, "deviation": deviation})
    logging.info(f"Cyclic invariance: max deviation {worst:.3g}")
    return InvarianceReport(reference, rows, worst)


@dataclass
class GaugeReport:
    reference: CorrelatorResult
    perturbed: CorrelatorResult
    deviation: float
    passed: object

    def to_dict(self) -> dict:
        return {"reference": self.reference.to_dict(), "perturbed": self.perturbed.to_dict(),
                "deviation": self.deviation, "passed": self.passed}


def gauge_perturbation_check(spec: CorrelatorSpec, perturbation: Perturbation) -> GaugeReport:
    """Re-evaluates with the perturbed kernel; judged against ``tolerance`` only for cocycle inputs."""
    reference = evaluate(spec)
    perturbed = evaluate(spec, perturbation=perturbation)
    deviation = abs(perturbed.value - reference.value)
    passed = (deviation <= max(spec.tolerance, 10 * (reference.error + perturbed.error))) if spec.cocycle else None
    logging.info(f"Gauge perturbation ({perturbation.kind}): deviation {deviation:.3g}")
    return GaugeReport(reference, perturbed, deviation, passed)
