"""Exact geometry of configuration spaces inside the standard simplex.

Every polytope here lives in an affine plane cut out of ``R^d`` by
``sum(x) = 1`` plus at most one homogeneous switch equation ``n . x = 0``.
Each plane carries a fixed coordinate chart (a subset of the coordinates),
so volumes measured in chart units are exact rationals and ratios of them
equal ratios of Euclidean volumes.  Euclidean volumes differ from chart
volumes by a per-plane constant ``sqrt(det(B^T B))`` and are the only place
floating point enters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Optional, Sequence

import numpy as np

from .combinatorics import GeneralizedPermutation
from .matrices import ExpansionMatrix, exact_det

Point = tuple[Fraction, ...]


class DegeneratePolytope(ValueError):
    pass


class ZeroImage(ValueError):
    pass


class SingularMatrix(ValueError):
    pass


class DegenerateNormal(ValueError):
    pass


def norm1(y: Sequence):
    """Coordinate-sum norm; additive on the nonnegative orthant."""
    return sum(abs(a) for a in y)


def projectivize(q: ExpansionMatrix, y: Sequence) -> tuple:
    w = q.apply(y)
    s = sum(w)
    if s == 0:
        raise ZeroImage("A y = 0")
    return tuple(Fraction(a) / s for a in w) if _exact(w) else tuple(a / s for a in w)


def _exact(v) -> bool:
    return all(isinstance(a, (int, Fraction)) for a in v)


def _primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    v = [Fraction(a) for a in v]
    den = math.lcm(*(a.denominator for a in v)) if v else 1
    ints = [int(a * den) for a in v]
    g = math.gcd(*ints) or 1
    ints = [a // g for a in ints]
    first = next((a for a in ints if a), 0)
    if first < 0:
        ints = [-a for a in ints]
    return tuple(ints)


def _nullspace(rows: list[list[Fraction]], n: int) -> list[list[Fraction]]:
    """Exact basis of ``{x : rows x = 0}`` via reduced row echelon form."""
    a = [list(map(Fraction, r)) for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, len(a)) if a[i][c] != 0), None)
        if piv is None:
            continue
        a[r], a[piv] = a[piv], a[r]
        p = a[r][c]
        a[r] = [x / p for x in a[r]]
        for i in range(len(a)):
            if i != r and a[i][c]:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == len(a):
            break
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -a[i][f]
        basis.append(v)
    return basis


@dataclass(frozen=True)
class Plane:
    """``{x : sum(x) = 1, n . x = 0 for n in normals}`` with a fixed chart."""

    d: int
    normals: tuple[tuple[int, ...], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "normals", tuple(_primitive(n) for n in self.normals))

    @classmethod
    def simplex(cls, d: int) -> "Plane":
        return cls(d, ())

    @classmethod
    def switch(cls, d: int, s_top, s_bottom) -> "Plane":
        if not s_top and not s_bottom:
            return cls(d, ())
        n = [0] * d
        for a in s_top:
            n[a - 1] += 1
        for a in s_bottom:
            n[a - 1] -= 1
        return cls(d, (tuple(n),))

    @property
    def dim(self) -> int:
        return self.d - 1 - len(self.normals)

    @cached_property
    def _constraints(self) -> list[tuple[tuple[int, ...], int]]:
        return [((1,) * self.d, 1)] + [(n, 0) for n in self.normals]

    @cached_property
    def dropped(self) -> tuple[int, ...]:
        """0-based coordinates solved for; the largest indices that keep the chart invertible."""
        r = len(self._constraints)
        for drop in combinations(reversed(range(self.d)), r):
            if exact_det([[row[j] for j in drop] for row, _ in self._constraints]) != 0:
                return tuple(sorted(drop))
        raise DegeneratePolytope("plane equations are dependent")

    @cached_property
    def kept(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.d) if i not in self.dropped)

    def chart(self, x: Sequence) -> tuple:
        return tuple(x[i] for i in self.kept)

    def contains(self, x: Sequence) -> bool:
        return all(sum(a * b for a, b in zip(row, x)) == rhs for row, rhs in self._constraints)

    @cached_property
    def lift_matrix(self) -> np.ndarray:
        """``B`` with ``dx = B dc`` for chart displacements ``dc``."""
        drop = self.dropped
        a_d = np.array([[row[j] for j in drop] for row, _ in self._constraints], dtype=float)
        a_k = np.array([[row[j] for j in self.kept] for row, _ in self._constraints], dtype=float)
        b = np.zeros((self.d, len(self.kept)))
        for c, i in enumerate(self.kept):
            b[i, c] = 1.0
        b[list(drop), :] = -np.linalg.solve(a_d, a_k)
        return b

    @cached_property
    def gram_det(self) -> Fraction:
        """Exact ``det(B^T B)`` for the chart lift."""
        drop = self.dropped
        a_d = [[row[j] for j in drop] for row, _ in self._constraints]
        cols = []
        for i in self.kept:
            rhs = [-row[i] for row, _ in self._constraints]
            from .matrices import exact_solve

            sol = exact_solve(a_d, rhs)
            v = [Fraction(0)] * self.d
            v[i] = Fraction(1)
            for j, s in zip(drop, sol):
                v[j] = s
            cols.append(v)
        k = len(cols)
        g = [[sum(a * b for a, b in zip(cols[i], cols[j])) for j in range(k)] for i in range(k)]
        return exact_det(g) if k else Fraction(1)

    @property
    def chart_to_euclid(self) -> float:
        return math.sqrt(self.gram_det)

    def tangent_frame(self) -> np.ndarray:
        """Orthonormal basis (columns) of the plane's direction space."""
        a = np.array([row for row, _ in self._constraints], dtype=float)
        _, s, vt = np.linalg.svd(a)
        rank = int((s > 1e-12).sum())
        return vt[rank:].T


def _simplex_chart_volume(pts: Sequence[Sequence[Fraction]]) -> Fraction:
    k = len(pts) - 1
    if k == 0:
        return Fraction(1)
    p0 = pts[0]
    m = [[p[i] - p0[i] for i in range(k)] for p in pts[1:]]
    return abs(exact_det(m)) / math.factorial(k)


def _affine_rank(pts: Sequence[Sequence[Fraction]]) -> int:
    if len(pts) <= 1:
        return 0
    p0 = pts[0]
    rows = [[a - b for a, b in zip(p, p0)] for p in pts[1:]]
    n = len(p0)
    return n - len(_nullspace(rows, n)) if rows else 0


def triangulate_points(pts: Sequence[Sequence[Fraction]]) -> list[tuple[int, ...]]:
    """Triangulate the convex hull of full-dimensional ``pts`` in ``R^k``.

    Cones from the lexicographically least point over a recursive
    triangulation of each facet not containing it.  Facets are found by
    brute force over affinely independent k-subsets, which is fine for the
    handful of vertices that occur here.  Returns index tuples into ``pts``.
    """
    pts = [tuple(Fraction(a) for a in p) for p in pts]
    k = len(pts[0]) if pts else 0
    idx = list(range(len(pts)))
    if k == 0:
        return [(0,)]
    if _affine_rank(pts) < k:
        raise DegeneratePolytope(f"points span less than dimension {k}")
    if k == 1:
        lo = min(idx, key=lambda i: pts[i][0])
        hi = max(idx, key=lambda i: pts[i][0])
        return [(lo, hi)]
    v0 = min(idx, key=lambda i: pts[i])
    out = []
    for facet, normal in _facets(pts):
        if v0 in facet:
            continue
        # chart of the facet hyperplane: drop one coordinate where the normal is nonzero
        j = next(c for c in range(k) if normal[c] != 0)
        sub = [tuple(x for c, x in enumerate(pts[i]) if c != j) for i in facet]
        for s in triangulate_points(sub):
            out.append((v0,) + tuple(facet[t] for t in s))
    return out


def _facets(pts):
    k = len(pts[0])
    n = len(pts)
    seen = set()
    for combo in combinations(range(n), k):
        base = pts[combo[0]]
        rows = [[a - b for a, b in zip(pts[i], base)] for i in combo[1:]]
        ns = _nullspace(rows, k)
        if len(ns) != 1:
            continue
        normal = ns[0]
        vals = [sum(a * (x - b) for a, x, b in zip(normal, p, base)) for p in pts]
        if all(v >= 0 for v in vals) or all(v <= 0 for v in vals):
            on = tuple(i for i, v in enumerate(vals) if v == 0)
            if on not in seen:
                seen.add(on)
                yield on, normal


@dataclass(frozen=True)
class PlanePolytope:
    """A polytope in ``plane`` given as a union of simplices with disjoint interiors."""

    plane: Plane
    simplices: tuple[tuple[Point, ...], ...]

    @classmethod
    def from_vertices(cls, plane: Plane, vertices: Sequence[Sequence]) -> "PlanePolytope":
        verts = list(dict.fromkeys(tuple(Fraction(a) for a in v) for v in vertices))
        for v in verts:
            if not plane.contains(v):
                raise ValueError(f"vertex {v} is not on the plane")
        if not verts:
            return cls(plane, ())
        charted = [plane.chart(v) for v in verts]
        if plane.dim == 0:
            return cls(plane, ((verts[0],),))
        tri = triangulate_points(charted)
        return cls(plane, tuple(tuple(verts[i] for i in s) for s in tri))

    @classmethod
    def empty(cls, plane: Plane) -> "PlanePolytope":
        return cls(plane, ())

    @property
    def is_empty(self) -> bool:
        return not self.simplices

    @cached_property
    def vertices(self) -> tuple[Point, ...]:
        return tuple(dict.fromkeys(v for s in self.simplices for v in s))

    def simplex_chart_measures(self) -> list[Fraction]:
        return [_simplex_chart_volume([self.plane.chart(v) for v in s]) for s in self.simplices]


def triangulate(p: PlanePolytope) -> list[tuple[Point, ...]]:
    return list(p.simplices)


def chart_measure(p: PlanePolytope) -> Fraction:
    return sum(p.simplex_chart_measures(), Fraction(0))


def euclidean_measure(p: PlanePolytope) -> float:
    return float(chart_measure(p)) * p.plane.chart_to_euclid


@dataclass(frozen=True)
class ConfigurationSpace:
    d: int
    s_top: frozenset[int]
    s_bottom: frozenset[int]
    vertices: tuple[Point, ...]

    @property
    def classical(self) -> bool:
        return not self.s_top and not self.s_bottom

    @property
    def plane(self) -> Plane:
        return Plane.switch(self.d, self.s_top, self.s_bottom)

    def polytope(self) -> PlanePolytope:
        return PlanePolytope.from_vertices(self.plane, self.vertices)


def _unit(d: int, *labels: int) -> Point:
    v = [Fraction(0)] * d
    for a in labels:
        v[a - 1] += Fraction(1, len(labels))
    return tuple(v)


def configuration_space(perm: GeneralizedPermutation) -> ConfigurationSpace:
    d = perm.d
    st, sb = perm.reversing_top, perm.reversing_bottom
    verts = [_unit(d, a, b) for a in sorted(st) for b in sorted(sb)]
    verts += [_unit(d, r) for r in range(1, d + 1) if r not in st and r not in sb]
    return ConfigurationSpace(d, st, sb, tuple(verts))


def simplex_polytope(d: int) -> PlanePolytope:
    return PlanePolytope.from_vertices(Plane.simplex(d), [_unit(d, a) for a in range(1, d + 1)])


def ge_halfspace(d: int, a: int, b: int, r: Fraction = Fraction(1)) -> tuple[Fraction, ...]:
    """Coefficients ``c`` with ``c . x >= 0`` meaning ``x_a >= r x_b``."""
    c = [Fraction(0)] * d
    c[a - 1] += 1
    c[b - 1] -= Fraction(r)
    return tuple(c)


def clip_halfspace(p: PlanePolytope, coeffs: Sequence) -> PlanePolytope:
    """``p`` intersected with ``{x : coeffs . x >= 0}``, clipping simplex by simplex."""
    coeffs = [Fraction(c) for c in coeffs]
    out = []
    for s in p.simplices:
        h = [sum(c * x for c, x in zip(coeffs, v)) for v in s]
        if all(v >= 0 for v in h):
            out.append(s)
            continue
        if not any(v > 0 for v in h):
            continue
        keep = [v for v, hv in zip(s, h) if hv >= 0]
        for (u, hu), (w, hw) in combinations(zip(s, h), 2):
            if (hu > 0 and hw < 0) or (hu < 0 and hw > 0):
                t = hu / (hu - hw)
                keep.append(tuple(a + t * (b - a) for a, b in zip(u, w)))
        keep = list(dict.fromkeys(keep))
        charted = [p.plane.chart(v) for v in keep]
        if _affine_rank(charted) < p.plane.dim:
            continue
        for tri in triangulate_points(charted):
            out.append(tuple(keep[i] for i in tri))
    return PlanePolytope(p.plane, tuple(out))


def image_plane(q: ExpansionMatrix, plane: Plane) -> Plane:
    """Plane containing ``JQ(plane)``: each normal ``n`` becomes ``n Q^{-1}``."""
    if not plane.normals:
        return Plane.simplex(plane.d)
    from .matrices import exact_solve

    qt = [list(c) for c in q.cols]  # rows of Q^T
    normals = [exact_solve(qt, list(n)) for n in plane.normals]
    return Plane(plane.d, tuple(normals))


def image_polytope(q: ExpansionMatrix, p: PlanePolytope) -> PlanePolytope:
    target = image_plane(q, p.plane)
    return PlanePolytope(
        target, tuple(tuple(projectivize(q, v) for v in s) for s in p.simplices)
    )


def image_measure(q: ExpansionMatrix, p: PlanePolytope) -> Fraction:
    """Exact chart measure of ``JQ(p)`` in the image plane's chart."""
    return chart_measure(image_polytope(q, p))


def image_euclidean_measure(q: ExpansionMatrix, p: PlanePolytope) -> float:
    return euclidean_measure(image_polytope(q, p))


def simplex_measure_ratio(q: ExpansionMatrix) -> Fraction:
    """``l(JQ(Delta)) / l(Delta)`` for a nonnegative determinant-one ``Q``."""
    if q.det() == 0:
        raise SingularMatrix("Q is singular")
    prod = 1
    for n in q.column_norms():
        prod *= n
    return Fraction(1, prod)


def elementary_measure_ratio(q: ExpansionMatrix, beta: int, alpha: int, r=1) -> Fraction:
    """``l(J(QE)(Delta)) / l(JQ(Delta))`` for ``E = I + r M[beta, alpha]``."""
    na = q.column_norms()[alpha - 1]
    nb = q.column_norms()[beta - 1]
    return Fraction(na) / (na + Fraction(r) * nb)


def wedge(d: int, alpha: int, beta: int, r) -> PlanePolytope:
    """``{x in Delta : x_beta >= r x_alpha}``."""
    return clip_halfspace(simplex_polytope(d), ge_halfspace(d, beta, alpha, Fraction(r)))


# --- Jacobians -----------------------------------------------------------


def _reversing_normal(plane: Plane) -> np.ndarray:
    """Unit normal to the plane's directions inside ``T Delta``, first nonzero entry positive."""
    if len(plane.normals) != 1:
        raise DegenerateNormal("plane is not codimension one in the simplex")
    n = np.array(plane.normals[0], dtype=float)
    n = n - n.mean()
    nn = np.linalg.norm(n)
    if nn == 0:
        raise DegenerateNormal("switch normal is parallel to the all-ones direction")
    n /= nn
    first = n[np.flatnonzero(np.abs(n) > 1e-15)[0]]
    return n if first > 0 else -n


@dataclass(frozen=True)
class DistortionConstant:
    a: float
    classical: bool = False
    normal: Optional[tuple[float, ...]] = None
    normal0: Optional[tuple[float, ...]] = None


def _as_plane(w) -> Plane:
    if isinstance(w, Plane):
        return w
    if isinstance(w, (ConfigurationSpace, PlanePolytope)):
        return w.plane
    raise TypeError(f"expected a plane-like object, got {type(w).__name__}")


def distortion_constant(q: ExpansionMatrix, w, w0, y: Optional[Sequence] = None) -> DistortionConstant:
    """The constant ``a`` in ``J(JQ)(y) = 1 / (a |Qy|^(d-1))`` on ``W -> W0``.

    ``a`` is evaluated at ``y`` (default: a fixed interior point of the
    plane), and is in fact independent of it.
    """
    plane, plane0 = _as_plane(w), _as_plane(w0)
    if not plane.normals and not plane0.normals:
        return DistortionConstant(1.0, classical=True)
    m = _reversing_normal(plane)
    m0 = _reversing_normal(plane0)
    qf = q.to_numpy()
    if y is None:
        y = _interior_point(w)
    wv = qf @ np.asarray([float(t) for t in y])
    qm = qf @ m
    phi = qm - (qm.sum() / wv.sum()) * wv
    a = float(phi @ m0)
    if a < 0:
        a, m = -a, -m
    return DistortionConstant(a, False, tuple(m), tuple(m0))


def _interior_point(w) -> tuple[float, ...]:
    if isinstance(w, ConfigurationSpace):
        verts = w.vertices
    elif isinstance(w, PlanePolytope):
        verts = w.vertices
    else:
        raise ValueError("need a polytope to pick an interior point")
    n = len(verts)
    return tuple(float(sum(v[i] for v in verts)) / n for i in range(len(verts[0])))


def full_jacobian(q: ExpansionMatrix, y: Sequence) -> float:
    return 1.0 / float(sum(q.apply(y))) ** q.d


def restricted_jacobian(q: ExpansionMatrix, w, w0, y: Sequence) -> float:
    """Jacobian of ``JQ`` restricted to ``W -> W0`` at ``y``; the full one if classical."""
    dc = distortion_constant(q, w, w0, y)
    if dc.classical:
        return full_jacobian(q, y)
    return 1.0 / (dc.a * float(sum(q.apply(y))) ** (q.d - 1))


def numerical_restricted_jacobian(q: ExpansionMatrix, w, w0, y: Sequence, h: float = 1e-6) -> float:
    """Finite-difference ``|det|`` of ``D JQ`` between orthonormal frames of ``W`` and ``W0``."""
    plane, plane0 = _as_plane(w), _as_plane(w0)
    f, f0 = plane.tangent_frame(), plane0.tangent_frame()
    qf = q.to_numpy()
    y = np.array([float(t) for t in y])

    def jq(z):
        v = qf @ z
        return v / v.sum()

    cols = [(jq(y + h * f[:, j]) - jq(y - h * f[:, j])) / (2 * h) for j in range(f.shape[1])]
    dm = f0.T @ np.column_stack(cols)
    return abs(float(np.linalg.det(dm)))


def vertex_norms(q: ExpansionMatrix, space: ConfigurationSpace) -> list[Fraction]:
    return [Fraction(sum(q.apply(v))) for v in space.vertices]


def is_c_distributed(norms: Sequence, c: float) -> bool:
    """Pairwise norm ratios all strictly inside ``(1/C, C)``."""
    return max(norms) < c * min(norms)


def is_uniformly_distorted(q: ExpansionMatrix, space: ConfigurationSpace, c: float) -> bool:
    """Sup/inf of the restricted Jacobian over ``W`` is at most ``C``.

    The Jacobian is a negative power of the affine function ``|Qy|``, so its
    extremes sit at vertices.
    """
    norms = vertex_norms(q, space)
    k = q.d if space.classical else q.d - 1
    return float(Fraction(max(norms)) / min(norms)) ** k <= c


def jacobian_ratio_at_vertices(q: ExpansionMatrix, space: ConfigurationSpace, w0=None) -> float:
    """Sup/inf of the restricted Jacobian over the vertices of ``W``."""
    w0 = w0 if w0 is not None else image_plane(q, space.plane)
    vals = [restricted_jacobian(q, space, w0, v) for v in space.vertices]
    return max(vals) / min(vals)
