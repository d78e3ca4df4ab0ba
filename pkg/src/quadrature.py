"""
Sphere Quadrature Module

Numerical integration over products of Riemann spheres.

Deterministic rules cover the sphere by the unit disks of the ``z`` and
``w = 1/z`` charts (Gauss-Legendre in the radius, trapezoid in the angle). A
smooth partition of unity cuts a small chordal ball out around every singular
point; each ball is integrated in polar coordinates centred on the point with
the substitution ``r = R t^2``, which absorbs logarithmic and ``1/r``
singularities. Pairs of factors whose integrand is singular along their diagonal
get a second partition: inside a chordal band around the diagonal the later
factor is integrated in coordinates relative to the earlier one, with the same
squared-radius substitution. Error estimates compare a rule with its
half-resolution rule.

The Monte-Carlo path runs ``vegas`` on an equal-area parametrisation of each
sphere factor.

All sums over shards use a fixed-order pairwise reduction, so results never
depend on the number of workers.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product

import numpy as np
import vegas

from src import config
from src.errors import ConvergenceError
from src.geometry import SpherePoint, chordal_distance, chordal_sq

MAX_PATCH_RADIUS = 0.2
PATCH_SEPARATION = 0.45
PATCH_SCALE = 3.2
DIAGONAL_RADIUS = MAX_PATCH_RADIUS


# --- Reductions ---

def pairwise_sum(values):
    """Sums a sequence by halving strides; the association order depends only on the length."""
    items = list(values)
    if not items:
        return 0.0
    while len(items) > 1:
        paired = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return items[0]


# --- Partition of unity ---

def bump(t):
    """``exp(1 - 1/(1 - t^2))`` on ``|t| < 1``, zero outside; equals 1 at ``t = 0``."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


def partition_radii(points: list) -> list:
    """Chordal radius of the cut-out ball around each singular point."""
    radii = []
    for i, p in enumerate(points):
        gaps = [chordal_distance(p, q) for j, q in enumerate(points) if j != i]
        radii.append(min([MAX_PATCH_RADIUS] + [PATCH_SEPARATION * g for g in gaps]))
    return radii


def _dedupe(points: list) -> list:
    out = []
    for p in points:
        if not any(chordal_distance(p, q) < 1e-14 for q in out):
            out.append(p)
    return out


@dataclass(frozen=True)
class SphereRule:
    """Nodes (finite ``z`` coordinates) and area weights for ``dA_z``; partition weights folded in."""

    points: np.ndarray
    weights: np.ndarray
    resolution: int

    @property
    def size(self) -> int:
        return len(self.points)


def _disk_nodes(resolution: int, radius: float, phase: float, squared: bool):
    t, wt = np.polynomial.legendre.leggauss(resolution)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    theta = 2.0 * math.pi * (np.arange(resolution) + phase) / resolution
    if squared:
        r = radius * t ** 2
        wr = 2.0 * radius ** 2 * t ** 3 * wt
    else:
        r = radius * t
        wr = radius ** 2 * t * wt
    rr, th = np.meshgrid(r, theta, indexing="ij")
    ww = np.repeat(wr[:, None], resolution, axis=1) * (2.0 * math.pi / resolution)
    return (rr * np.exp(1j * th)).ravel(), ww.ravel()


def sphere_rule(singular: list, resolution: int, phase: float = 0.0) -> SphereRule:
    """Quadrature rule for one sphere factor with cut-outs around ``singular`` points.

    ``phase`` shifts the angular nodes by a fraction of a step; distinct phases
    keep the nodes of different factors apart.
    """
    singular = _dedupe([SpherePoint.parse(s) for s in singular])
    radii = partition_radii(singular)

    def psi(z, s, rho):
        return bump(np.sqrt(chordal_sq(z, s)) / rho)

    points, weights = [], []
    u, w0 = _disk_nodes(resolution, 1.0, phase, squared=False)
    for chart in ("z", "w"):
        z = u if chart == "z" else 1.0 / u
        w = w0 if chart == "z" else w0 / np.abs(u) ** 4
        psi0 = np.ones_like(w)
        for s, rho in zip(singular, radii):
            psi0 = psi0 - psi(z, s, rho)
        points.append(z)
        weights.append(w * psi0)

    for s, rho in zip(singular, radii):
        u, w0 = _disk_nodes(resolution, PATCH_SCALE * rho, phase, squared=True)
        if s.chart == "z":
            z, w = s.z + u, w0
        else:
            centre = s.w
            z, w = 1.0 / (centre + u), w0 / np.abs(centre + u) ** 4
        points.append(z)
        weights.append(w * psi(z, s, rho))

    points = np.concatenate(points)
    weights = np.concatenate(weights)
    keep = weights != 0
    return SphereRule(points[keep], weights[keep], resolution)


# --- Results ---

@dataclass
class QuadratureResult:
    value: float
    error: float
    evaluations: int = 0
    trace: list = field(default_factory=list)
    method: str = "quad"

    def to_dict(self) -> dict:
        return {"value": self.value, "error": self.error, "evaluations": self.evaluations,
                "method": self.method, "trace": self.trace}


# --- Tensor-product quadrature ---

def _budget_resolution(resolution: int, n_factors: int, n_patches: int, budget: int) -> int:
    per_factor = lambda r: 2 * r * r * (1 + n_patches)  # noqa: E731
    while resolution > 4 and per_factor(resolution) ** n_factors > budget:
        resolution //= 2
    return resolution


def tensor_integrate(integrand, rules: list, workers: int = 1, chunk_size: int = None) -> tuple:
    """Sums ``integrand(points per factor) * weights`` over the product grid in fixed shards."""
    chunk_size = chunk_size or config.CHUNK_SIZE
    shape = tuple(rule.size for rule in rules)
    total = int(np.prod(shape)) if shape else 1
    if total == 0:
        return 0.0, 0
    starts = list(range(0, total, chunk_size))

    def shard(start):
        flat = np.arange(start, min(start + chunk_size, total))
        index = np.unravel_index(flat, shape)
        points = [rule.points[i] for rule, i in zip(rules, index)]
        weight = np.ones(len(flat))
        for rule, i in zip(rules, index):
            weight = weight * rule.weights[i]
        with np.errstate(all="ignore"):
            values = np.asarray(integrand(points), dtype=float) * weight
        values = np.where(weight != 0, values, 0.0)
        return float(np.sum(values))

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(shard, starts))
    else:
        partials = [shard(s) for s in starts]
    return pairwise_sum(partials), total


# --- Diagonal bands ---

def _diagonal_forest(n: int, near: list) -> tuple:
    """``(parent, order)`` orienting the ``near`` pairs as a forest rooted at each component's lowest factor."""
    links = {i: [] for i in range(n)}
    for i, j in near:
        links[i].append(j)
        links[j].append(i)
    parent, order, seen = {}, [], set()
    for root in range(n):
        if root in seen:
            continue
        seen.add(root)
        queue = [root]
        while queue:
            v = queue.pop(0)
            for w in sorted(links[v]):
                if w not in seen:
                    seen.add(w)
                    parent[w] = v
                    order.append(w)
                    queue.append(w)
    return parent, order


def _relative_point(anchor, u) -> tuple:
    """Point ``u`` away from ``anchor`` in the anchor's chart, with the area jacobian."""
    with np.errstate(all="ignore"):
        inner = np.abs(anchor) <= 1.0
        shifted = 1.0 / anchor + u
        point = np.where(inner, anchor + u, 1.0 / shifted)
        jac = np.where(inner, 1.0, 1.0 / np.abs(shifted) ** 4)
    return point, jac


def _diagonal_part(integrand, n: int, diagonals: list, near: set, singular_sets: list, res: int) -> tuple:
    """Rules and wrapped integrand for the piece of the partition where exactly ``near`` diagonals are close."""
    parent, order = _diagonal_forest(n, sorted(near))
    roots = [i for i in range(n) if i not in parent]
    component = {i: i for i in roots}
    for child in order:
        component[child] = component[parent[child]]
    rules = []
    for i in range(n):
        phase = (i + 0.5) / (n + 1)
        if i in parent:
            u, w = _disk_nodes(res, PATCH_SCALE * DIAGONAL_RADIUS, phase, squared=True)
            rules.append(SphereRule(u, w, res))
        else:
            merged = [s for j in range(n) if component[j] == i for s in singular_sets[j]]
            rules.append(sphere_rule(merged, res, phase=phase))

    def wrapped(points):
        pts, jac = list(points), 1.0
        for child in order:
            pts[child], step = _relative_point(pts[parent[child]], points[child])
            jac = jac * step
        window = 1.0
        for pair in diagonals:
            psi = bump(np.sqrt(chordal_sq(pts[pair[0]], pts[pair[1]])) / DIAGONAL_RADIUS)
            window = window * (psi if pair in near else 1.0 - psi)
        window = np.broadcast_to(window, np.shape(pts[0]))
        with np.errstate(all="ignore"):
            values = np.asarray(integrand(pts), dtype=float) * jac * window
        return np.where(window > 0, values, 0.0)

    return rules, wrapped


def adaptive_integrate(integrand, singular_sets: list, resolution: int = None, tolerance: float = None,
                       max_refinements: int = None, workers: int = 1, budget: int = None,
                       diagonals: list = ()) -> QuadratureResult:
    """Tensor-product quadrature over ``len(singular_sets)`` sphere factors with doubling refinement.

    ``diagonals`` lists factor pairs ``(i, j)`` along whose diagonal the
    integrand is singular; each one splits the domain into a band and its
    complement, and every combination of bands is integrated separately.

    The error estimate is ``|Q(n) - Q(n/2)|``; the run stops once it is below
    ``tolerance * max(1, |Q(n)|)``, and raises ``ConvergenceError`` with the
    refinement trace if ``max_refinements`` doublings do not get there.
    """
    resolution = resolution or config.RESOLUTION
    tolerance = config.TOLERANCE if tolerance is None else tolerance
    max_refinements = config.MAX_REFINEMENTS if max_refinements is None else max_refinements
    budget = budget or config.QUADRATURE_POINT_BUDGET
    n = len(singular_sets)
    patches = max((len(s) for s in singular_sets), default=0)
    fitted = _budget_resolution(resolution, n, patches, budget)
    if fitted < resolution:
        logging.warning(f"Resolution {resolution} exceeds the point budget for {n} factors; using {fitted}.")
    resolution = fitted

    diagonals = sorted({tuple(sorted(pair)) for pair in diagonals})

    def run(res):
        if not diagonals:
            rules = [sphere_rule(s, res, phase=(i + 0.5) / (n + 1)) for i, s in enumerate(singular_sets)]
            return tensor_integrate(integrand, rules, workers)
        values, count = [], 0
        for mask in product((False, True), repeat=len(diagonals)):
            near = {pair for pair, close in zip(diagonals, mask) if close}
            rules, wrapped = _diagonal_part(integrand, n, diagonals, near, singular_sets, res)
            value, evaluations = tensor_integrate(wrapped, rules, workers)
            values.append(value)
            count += evaluations
        return pairwise_sum(values), count

    coarse, evaluations = run(max(resolution // 2, 2))
    trace = []
    for step in range(max_refinements + 1):
        fine, count = run(resolution)
        evaluations += count
        error = abs(fine - coarse)
        trace.append({"resolution": resolution, "value": fine, "error": error})
        logging.info(f"Quadrature at resolution {resolution}: value={fine:.10g}, error={error:.3g}")
        if error <= tolerance * max(1.0, abs(fine)):
            return QuadratureResult(fine, error, evaluations, trace, "quad")
        doubled = _budget_resolution(2 * resolution, n, patches, budget)
        if step == max_refinements or doubled <= resolution:
            break
        coarse, resolution = fine, doubled
    raise ConvergenceError(f"quadrature did not reach tolerance {tolerance} (last error {error:.3g})", trace)


def integrate_sphere(f, singular: list, resolution: int = None, tolerance: float = None,
                     max_refinements: int = None) -> QuadratureResult:
    """Integral of ``f(z) dA_z`` over one sphere."""
    return adaptive_integrate(lambda pts: f(pts[0]), [list(singular)], resolution, tolerance, max_refinements)


# --- Monte-Carlo ---

def monte_carlo(integrand, n_factors: int, samples: int = None, seed: int = None,
                warmup: int = None, iterations: int = None) -> QuadratureResult:
    """Adaptive importance sampling with ``vegas``.

    Each factor uses ``z = sqrt(u/(1-u)) exp(2 pi i v)`` on the unit square, whose
    area jacobian is ``pi / (1 - u)^2``.
    """
    samples = samples or config.SAMPLES
    seed = config.SEED if seed is None else seed
    warmup = config.MC_WARMUP_ITERATIONS if warmup is None else warmup
    iterations = config.MC_ITERATIONS if iterations is None else iterations
    rng = np.random.default_rng(seed)
    integ = vegas.Integrator(2 * n_factors * [[0.0, 1.0]], ran_array_generator=rng.random)

    @vegas.rbatchintegrand
    def f(x):
        points, jac = [], np.ones(x.shape[1])
        for v in range(n_factors):
            u = np.clip(x[2 * v], 0.0, 1.0 - 1e-15)
            points.append(np.sqrt(u / (1.0 - u)) * np.exp(2j * math.pi * x[2 * v + 1]))
            jac = jac * math.pi / (1.0 - u) ** 2
        with np.errstate(all="ignore"):
            values = np.asarray(integrand(points), dtype=float) * jac
        return np.where(np.isfinite(values), values, 0.0)

    integ(f, nitn=warmup, neval=samples)
    result = integ(f, nitn=iterations, neval=samples)
    evaluations = samples * (warmup + iterations)
    logging.info(f"vegas: {result.mean:.10g} +- {result.sdev:.3g} (Q = {result.Q:.2f})")
    trace = [{"iterations": iterations, "samples": samples, "Q": float(result.Q)}]
    return QuadratureResult(float(result.mean), float(result.sdev), evaluations, trace, "mc")
