"""
Tree Combinatorics Module

Plane trivalent trees dual to triangulations of a decorated polygon.

Polygon vertices ``0..n-1`` are read clockwise; side ``i`` joins vertices ``i``
and ``i+1 (mod n)``. A tree is stored as its triangulation: internal vertices
are the triangles, internal edges the diagonals, external edges the sides.
The domain labels of an edge ``(a, b)`` with ``a < b`` are
``(V_E-, V_E+) = (V_a, V_b)``.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import pandas as pd

from src.errors import ValidationError
from src.graded import koszul_sign


@dataclass(frozen=True)
class DecoratedPolygon:
    """Cyclic vertex decorations ``V0..Vm`` and optional side decorations (side ``i`` is ``ViV(i+1)``)."""

    vertices: tuple
    sides: tuple = ()

    def __post_init__(self):
        if self.sides and len(self.sides) != len(self.vertices):
            raise ValidationError(f"{len(self.sides)} side decorations for {len(self.vertices)} vertices")

    @classmethod
    def plain(cls, n_vertices: int) -> "DecoratedPolygon":
        return cls(tuple(f"V{i}" for i in range(n_vertices)))

    @property
    def m(self) -> int:
        return len(self.vertices) - 1

    def vertex(self, i: int):
        return self.vertices[i % len(self.vertices)]


@dataclass(frozen=True)
class TreeEdge:
    kind: str
    segment: tuple
    endpoints: tuple
    labels: tuple
    side: int = None

    def to_dict(self) -> dict:
        return {"kind": self.kind, "segment": list(self.segment), "endpoints": list(self.endpoints),
                "labels": list(self.labels), "side": self.side}


@dataclass(frozen=True)
class PlaneTree:
    """A plane trivalent tree, stored as a triangulation of the ``n``-gon."""

    n: int
    triangles: tuple

    @property
    def diagonals(self) -> tuple:
        segments = set()
        for i, j, k in self.triangles:
            segments.update({(i, j), (j, k), (i, k)})
        return tuple(sorted(s for s in segments if not _is_side(s, self.n)))

    def side_segment(self, side: int) -> tuple:
        return tuple(sorted((side, (side + 1) % self.n)))

    def triangles_with(self, segment: tuple) -> list:
        a, b = segment
        return [t for t, tri in enumerate(self.triangles) if a in tri and b in tri]

    def clockwise_segments(self, vertex: int) -> list:
        """Segments around an internal vertex in clockwise order: (i,j), (j,k), (k,i)."""
        i, j, k = self.triangles[vertex]
        return [(i, j), (j, k), (i, k)]

    def to_dict(self) -> dict:
        return {"n": self.n, "triangles": [list(t) for t in self.triangles],
                "diagonals": [list(d) for d in self.diagonals]}


def _is_side(segment: tuple, n: int) -> bool:
    a, b = segment
    return b - a == 1 or (a == 0 and b == n - 1)


def side_index(segment: tuple, n: int) -> int:
    a, b = segment
    return n - 1 if (a == 0 and b == n - 1) else a


def catalan(k: int) -> int:
    return math.comb(2 * k, k) // (k + 1)


@lru_cache(maxsize=None)
def _triangulate(i: int, k: int) -> tuple:
    if k - i < 2:
        return ((),)
    out = []
    for j in range(i + 1, k):
        for left in _triangulate(i, j):
            for right in _triangulate(j, k):
                out.append(left + ((i, j, k),) + right)
    return tuple(out)


def triangulations(n: int) -> list:
    """All triangulations of the convex ``n``-gon, by ear recursion on the edge (0, n-1)."""
    if n < 3:
        raise ValidationError(f"a polygon needs at least 3 vertices, got {n}")
    return [tuple(sorted(t)) for t in _triangulate(0, n - 1)]


def enumerate_trees(polygon: DecoratedPolygon) -> list:
    """One plane tree per triangulation, in a deterministic order; ``catalan(m-1)`` of them."""
    if polygon.m < 2:
        raise ValidationError(f"tree enumeration needs m >= 2, got m = {polygon.m}")
    n = len(polygon.vertices)
    trees = [PlaneTree(n, tri) for tri in triangulations(n)]
    logging.info(f"Enumerated {len(trees)} plane trees for the {n}-gon.")
    return trees


def classify_edges(tree: PlaneTree, polygon: DecoratedPolygon = None) -> dict:
    """Splits edges into internal (diagonals) and external (sides) with their domain labels."""
    polygon = polygon or DecoratedPolygon.plain(tree.n)
    internal, external = [], []
    for d in tree.diagonals:
        ends = tree.triangles_with(d)
        if len(ends) != 2:
            raise ValidationError(f"malformed tree: diagonal {d} borders {len(ends)} triangles")
        internal.append(TreeEdge("internal", d, tuple(ends), (polygon.vertex(d[0]), polygon.vertex(d[1]))))
    for side in range(tree.n):
        segment = tree.side_segment(side)
        ends = tree.triangles_with(segment)
        if len(ends) != 1:
            raise ValidationError(f"malformed tree: side {side} borders {len(ends)} triangles")
        external.append(TreeEdge("external", segment, tuple(ends),
                                 (polygon.vertex(segment[0]), polygon.vertex(segment[1])), side))
    m = tree.n - 1
    if len(internal) != m - 2 or len(external) != m + 1 or len(tree.triangles) != m - 1:
        raise ValidationError(f"malformed tree on the {tree.n}-gon")
    return {"internal": internal, "external": external}


def vertex_stars(tree: PlaneTree, polygon: DecoratedPolygon = None) -> list:
    """Per internal vertex, the clockwise triple of surrounding labels starting at the smallest index."""
    polygon = polygon or DecoratedPolygon.plain(tree.n)
    return [tuple(polygon.vertex(i) for i in tri) for tri in tree.triangles]


def edge_endpoint_order(segment: tuple, tree: PlaneTree) -> tuple:
    """``(x-, x+)`` for a diagonal: ``x-`` is the triangle with a vertex strictly between its ends."""
    segment = tuple(sorted(segment))
    if _is_side(segment, tree.n):
        raise ValidationError(f"{segment} is an external edge")
    a, b = segment
    ends = tree.triangles_with(segment)
    if len(ends) != 2:
        raise ValidationError(f"{segment} is not a diagonal of this tree")
    first, second = ends
    if any(a < v < b for v in tree.triangles[first]):
        return first, second
    return second, first


def dfs_edge_order(tree: PlaneTree) -> list:
    """Edges in pre-order from the side-0 leaf, turning clockwise after each incoming edge.

    Items are ``("side", i)`` or ``("diagonal", (a, b))``.
    """
    order = []
    start = tree.side_segment(0)

    def visit(vertex: int, incoming: tuple):
        segments = tree.clockwise_segments(vertex)
        at = segments.index(incoming)
        for offset in (1, 2):
            seg = segments[(at + offset) % 3]
            if _is_side(seg, tree.n):
                order.append(("side", side_index(seg, tree.n)))
            else:
                order.append(("diagonal", seg))
                nxt = [t for t in tree.triangles_with(seg) if t != vertex][0]
                visit(nxt, seg)

    order.append(("side", 0))
    visit(tree.triangles_with(start)[0], start)
    return order


def tree_sign(tree: PlaneTree, decoration_degrees: list) -> int:
    """Koszul sign taking ``(a0, .., am, G_e sorted)`` to the DFS edge order.

    Decorations contribute their shifted degrees, each Green factor degree 1.
    """
    diagonals = list(tree.diagonals)
    n = tree.n
    if len(decoration_degrees) != n:
        raise ValidationError(f"{len(decoration_degrees)} decorations for the {n}-gon")
    degrees = [d - 1 for d in decoration_degrees] + [1] * len(diagonals)
    reference = {("side", i): i for i in range(n)}
    reference.update({("diagonal", d): n + k for k, d in enumerate(diagonals)})
    permutation = [reference[item] for item in dfs_edge_order(tree)]
    return koszul_sign(permutation, degrees)


def rotate_tree(tree: PlaneTree, r: int) -> PlaneTree:
    """Relabels polygon vertex ``v`` as ``v + r (mod n)``."""
    triangles = tuple(sorted(tuple(sorted((v + r) % tree.n for v in tri)) for tri in tree.triangles))
    return PlaneTree(tree.n, triangles)


def tree_table(tree: PlaneTree, polygon: DecoratedPolygon = None) -> tuple:
    """Vertex and edge tables of a tree as DataFrames."""
    polygon = polygon or DecoratedPolygon.plain(tree.n)
    stars = vertex_stars(tree, polygon)
    vertices = pd.DataFrame({
        "vertex": range(len(tree.triangles)),
        "triangle": [list(t) for t in tree.triangles],
        "star": [list(s) for s in stars],
    })
    edges = classify_edges(tree, polygon)
    rows = []
    for edge in edges["external"] + edges["internal"]:
        row = edge.to_dict()
        if edge.kind == "internal":
            row["endpoints"] = list(edge_endpoint_order(edge.segment, tree))
        rows.append(row)
    return vertices, pd.DataFrame(rows).astype({"side": "Int64"})
