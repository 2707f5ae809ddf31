"""Lattice polytopes given by their supports, and complete simplicial fans.

Polytopes are never turned into inequality systems: every vertex or facet
question is answered by minimising linear functionals over the support.
Fans are stored as primitive ray generators plus maximal cones given as
sorted tuples of ray indices.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx
import numpy as np

from .exact_linalg import (
    IntMatrix,
    IntVec,
    NotInCone,
    adjugate_det,
    primitive,
    rational_rank,
    solve_linear,
    solve_simplicial_membership,
)


class FanError(ValueError):
    pass


class RayOnExistingRay(FanError):
    pass


class NotACone(FanError):
    pass


class NotFlag(FanError):
    def __init__(self, message: str, clique: tuple[int, ...]):
        super().__init__(message)
        self.clique = clique


class AmbiguousVertex(FanError):
    def __init__(self, message: str, cone: tuple[int, ...], minimizers: list[IntVec]):
        super().__init__(message)
        self.cone = cone
        self.minimizers = minimizers


def unit(n: int, i: int, sign: int = 1) -> IntVec:
    return tuple(sign if j == i else 0 for j in range(n))


@dataclass(frozen=True)
class LatticePolytope:
    dim: int
    support: tuple[IntVec, ...]
    vertices: tuple[IntVec, ...] | None = None

    def __post_init__(self):
        if any(len(p) != self.dim for p in self.support):
            raise ValueError("support point of the wrong dimension")
        if self.vertices is not None and not set(self.vertices) <= set(self.support):
            raise ValueError("vertices must be drawn from the support")

    @classmethod
    def from_support(cls, points: Iterable[Sequence[int]], dim: int | None = None) -> LatticePolytope:
        pts = sorted({tuple(int(x) for x in p) for p in points})
        if dim is None:
            dim = len(pts[0])
        return cls(dim, tuple(pts))

    @cached_property
    def array(self) -> np.ndarray:
        return np.array(self.support, dtype=np.int64).reshape(len(self.support), self.dim)

    def minimizers(self, w: Sequence[int]) -> list[IntVec]:
        """Support points minimising ``<w, .>``."""
        vals = self.array @ np.asarray(w, dtype=np.int64)
        idx = np.flatnonzero(vals == vals.min())
        return [self.support[i] for i in idx]

    def face_dimension(self, w: Sequence[int]) -> int:
        pts = self.minimizers(w)
        base = pts[0]
        return rational_rank([[a - b for a, b in zip(p, base)] for p in pts[1:]])

    def to_json(self) -> dict:
        return {
            "dim": self.dim,
            "support": [list(p) for p in self.support],
            "vertices": [list(v) for v in self.vertices] if self.vertices is not None else None,
        }


@dataclass(frozen=True)
class SimplicialFan:
    dim: int
    rays: tuple[IntVec, ...]
    maximal_cones: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for r in self.rays:
            if len(r) != self.dim:
                raise FanError(f"ray {r} does not live in dimension {self.dim}")
            if primitive(r) != tuple(r):
                raise FanError(f"ray {r} is not primitive")
        if len(set(self.rays)) != len(self.rays):
            raise FanError("repeated ray")
        for c in self.maximal_cones:
            if tuple(sorted(set(c))) != tuple(c):
                raise FanError(f"cone {c} must be a sorted tuple of distinct indices")
            if c and (c[0] < 0 or c[-1] >= len(self.rays)):
                raise FanError(f"cone {c} references a missing ray")

    @classmethod
    def build(cls, dim: int, rays: Iterable[Sequence[int]], cones: Iterable[Iterable[int]]) -> SimplicialFan:
        return cls(dim, tuple(tuple(int(x) for x in r) for r in rays),
                   tuple(sorted(tuple(sorted(c)) for c in cones)))

    @classmethod
    def zero(cls) -> SimplicialFan:
        """The fan in R^0 with the single cone {0}."""
        return cls(0, (), ((),))

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    @cached_property
    def ray_index(self) -> dict[IntVec, int]:
        return {r: i for i, r in enumerate(self.rays)}

    @cached_property
    def _cone_set(self) -> frozenset:
        return frozenset(frozenset(c) for c in self.maximal_cones)

    def generators(self, cone: Iterable[int]) -> list[IntVec]:
        return [self.rays[i] for i in cone]

    def is_cone(self, indices: Iterable[int]) -> bool:
        s = set(indices)
        return any(s <= set(c) for c in self.maximal_cones)

    def cones_containing(self, indices: Iterable[int]) -> list[tuple[int, ...]]:
        s = set(indices)
        return [c for c in self.maximal_cones if s <= set(c)]

    @cached_property
    def _inverse_cache(self) -> dict[tuple[int, ...], tuple[IntMatrix, int]]:
        return {}

    def cone_coefficients(self, cone: tuple[int, ...], v: Sequence) -> tuple[Fraction, ...] | None:
        """Exact coefficients of ``v`` on the generators of ``cone`` (None if outside the span)."""
        if len(cone) != self.dim:
            return solve_linear(self.generators(cone), v)
        cache = self._inverse_cache
        if cone not in cache:
            cache[cone] = adjugate_det(IntMatrix.from_columns(self.generators(cone)))
        adj, det = cache[cone]
        if det == 0:
            return solve_linear(self.generators(cone), v)
        return tuple(Fraction(x, det) if isinstance(x, int) else Fraction(x) / det for x in adj.apply(v))

    def contains(self, cone: tuple[int, ...], v: Sequence) -> bool:
        lam = self.cone_coefficients(cone, v)
        return lam is not None and all(x >= 0 for x in lam)

    def locate(self, v: Sequence) -> list[tuple[int, ...]]:
        """All maximal cones containing ``v``."""
        return [c for c in self.maximal_cones if self.contains(c, v)]

    def check_simplicial(self) -> bool:
        return all(rational_rank(self.generators(c)) == len(c) for c in self.maximal_cones)

    def check_complete(self, samples: int = 200, seed: int = 0) -> bool:
        """Every sampled rational direction lies in at least one maximal cone."""
        rng = random.Random(seed)
        for _ in range(samples):
            v = [Fraction(rng.randint(-1000, 1000), rng.randint(1, 1000)) for _ in range(self.dim)]
            if not any(x for x in v):
                continue
            if not self.locate(v):
                return False
        return True

    def reordered(self, rays: Sequence[Sequence[int]]) -> SimplicialFan:
        """Same fan with its rays listed in the given order."""
        rays = [tuple(r) for r in rays]
        if sorted(rays) != sorted(self.rays):
            raise FanError("reordering must use exactly the fan's rays")
        pos = {r: i for i, r in enumerate(rays)}
        perm = [pos[r] for r in self.rays]
        return SimplicialFan.build(self.dim, rays, ([perm[i] for i in c] for c in self.maximal_cones))

    def two_cones(self) -> set[frozenset[int]]:
        out = set()
        for c in self.maximal_cones:
            out.update(frozenset(p) for p in combinations(c, 2))
        return out

    def to_json(self) -> dict:
        return {"dim": self.dim, "rays": [list(r) for r in self.rays],
                "maximal_cones": [list(c) for c in self.maximal_cones]}

    @classmethod
    def from_json(cls, data: dict) -> SimplicialFan:
        return cls.build(data["dim"], data["rays"], data["maximal_cones"])

    def same_as(self, other: SimplicialFan) -> bool:
        """Equality as sets of cones, independent of ray order."""
        if self.dim != other.dim or set(self.rays) != set(other.rays):
            return False
        mine = {frozenset(self.rays[i] for i in c) for c in self.maximal_cones}
        theirs = {frozenset(other.rays[i] for i in c) for c in other.maximal_cones}
        return mine == theirs


@dataclass(frozen=True)
class FlagComplex:
    n: int
    non_edges: frozenset[frozenset[int]]
    maximal_faces: tuple[tuple[int, ...], ...] = field(default=(), compare=False)

    def compatible(self, i: int, j: int) -> bool:
        return i != j and frozenset((i, j)) not in self.non_edges

    def is_face(self, s: Iterable[int]) -> bool:
        s = list(s)
        return all(self.compatible(i, j) for i, j in combinations(s, 2))

    def incompatibility_graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(tuple(e) for e in self.non_edges)
        return g

    def compatibility_graph(self) -> nx.Graph:
        return nx.complement(self.incompatibility_graph())


def fan_product(a: SimplicialFan, b: SimplicialFan) -> SimplicialFan:
    rays = [tuple(r) + (0,) * b.dim for r in a.rays]
    rays += [(0,) * a.dim + tuple(r) for r in b.rays]
    off = a.n_rays
    cones = [tuple(ca) + tuple(off + j for j in cb) for ca in a.maximal_cones for cb in b.maximal_cones]
    return SimplicialFan.build(a.dim + b.dim, rays, cones)


def _first_containing_cone(fan: SimplicialFan, v: IntVec) -> tuple[tuple[int, ...], tuple[Fraction, ...]]:
    # cones whose generators lean towards v are the likely hosts; try them first
    def lean(c):
        return -sum(1 for g in fan.generators(c) if sum(x * y for x, y in zip(g, v)) > 0)

    for c in sorted(fan.maximal_cones, key=lean):
        lam = fan.cone_coefficients(c, v)
        if lam is not None and all(x >= 0 for x in lam):
            return c, lam
    raise FanError(f"{v} lies in no cone of the fan")


def stellar_refine(fan: SimplicialFan, ray: Sequence[int]) -> SimplicialFan:
    """Stellar subdivision of ``fan`` at a new ray.

    Each maximal cone containing the ray is replaced by the cones obtained by
    swapping one generator with a positive coefficient for the new ray.  The
    new ray is appended at the end of the ray list.
    """
    rho = primitive(ray)
    if rho in fan.ray_index:
        raise RayOnExistingRay(f"{rho} is already a ray of the fan")
    host, lam = _first_containing_cone(fan, rho)
    # the carrier face: generators with positive coefficient.  Every cone
    # containing rho contains this face.
    face = {i for i, x in zip(host, lam) if x > 0}
    new = fan.n_rays
    cones = []
    for c in fan.maximal_cones:
        if face <= set(c):
            for i in face:
                cones.append(tuple(j for j in c if j != i) + (new,))
        else:
            cones.append(c)
    return SimplicialFan.build(fan.dim, fan.rays + (rho,), cones)


@dataclass(frozen=True)
class StarResult:
    fan: SimplicialFan
    basis: tuple[IntVec, ...]          # complement vectors used as quotient coordinates
    ray_origin: tuple[int, ...]        # original ray index of each star ray


def star(fan: SimplicialFan, tau: Iterable[int]) -> StarResult:
    """Project the cones containing ``tau`` to R^n / span(tau)."""
    tau = tuple(sorted(set(tau)))
    host = fan.cones_containing(tau)
    if not host:
        raise NotACone(f"{tau} does not span a cone of the fan")
    n = fan.dim
    gens = fan.generators(tau)
    basis = list(gens)
    complement: list[IntVec] = []
    for i in range(n):
        e = unit(n, i)
        if rational_rank(basis + [e]) > len(basis):
            basis.append(e)
            complement.append(e)
    adj, det = adjugate_det(IntMatrix.from_columns(basis))
    k = len(tau)
    sgn = 1 if det > 0 else -1

    def project(v):
        coords = adj.apply(v)[k:]
        return tuple(sgn * x for x in coords)

    origin: list[int] = []
    rays: list[IntVec] = []
    index: dict[IntVec, int] = {}
    cones = []
    for c in host:
        cone = []
        for i in c:
            if i in tau:
                continue
            r = primitive(project(fan.rays[i]))
            if r not in index:
                index[r] = len(rays)
                rays.append(r)
                origin.append(i)
            cone.append(index[r])
        cones.append(cone)
    return StarResult(SimplicialFan.build(n - k, rays, cones), tuple(complement), tuple(origin))


def extract_flag_complex(fan: SimplicialFan) -> FlagComplex:
    """Incompatibility data of the fan, after checking that it is flag."""
    compatible = fan.two_cones()
    non_edges = frozenset(frozenset(p) for p in combinations(range(fan.n_rays), 2)
                          if frozenset(p) not in compatible)
    g = nx.Graph()
    g.add_nodes_from(range(fan.n_rays))
    g.add_edges_from(tuple(p) for p in compatible)
    cones = fan._cone_set
    maximal = []
    for clique in nx.find_cliques(g):
        s = frozenset(clique)
        if s not in cones and not any(s <= c for c in cones):
            raise NotFlag(f"clique {sorted(s)} spans no cone", tuple(sorted(s)))
        maximal.append(tuple(sorted(s)))
    return FlagComplex(fan.n_rays, non_edges, tuple(sorted(maximal)))


def _cone_vertex(poly: LatticePolytope, gens: list[IntVec], retries: int) -> IntVec | None:
    w = [sum(col) for col in zip(*gens)]
    cands = poly.minimizers(w)
    attempt = 0
    while len(cands) > 1 and attempt < retries:
        attempt += 1
        # stay inside the cone: scale the barycentre and tilt towards single generators
        w = [(attempt + 2) * x for x in w]
        for j, g in enumerate(gens):
            w = [x + (j + 1) ** attempt * y for x, y in zip(w, g)]
        cands = poly.minimizers(w)
    if len(cands) != 1:
        return None
    v = cands[0]
    # v must also minimise every generator, otherwise the cone straddles
    # several normal cones of the polytope
    for g in gens:
        vals = poly.array @ np.asarray(g, dtype=np.int64)
        if int(np.dot(v, g)) != int(vals.min()):
            return None
    return v


def vertices_from_fan(support, fan: SimplicialFan, retries: int = 3) -> dict[tuple[int, ...], IntVec]:
    """Vertex of the polytope attached to each maximal cone of ``fan``.

    Raises :class:`AmbiguousVertex` when some maximal cone is not contained in
    a single normal cone of the polytope, i.e. when ``fan`` does not refine the
    inner normal fan.
    """
    poly = support if isinstance(support, LatticePolytope) else LatticePolytope.from_support(support, fan.dim)
    out = {}
    for c in fan.maximal_cones:
        gens = fan.generators(c)
        v = _cone_vertex(poly, gens, retries)
        if v is None:
            w = [sum(col) for col in zip(*gens)]
            raise AmbiguousVertex(f"cone {c} does not single out a vertex", c, poly.minimizers(w))
        out[c] = v
    return out


@dataclass(frozen=True)
class FacetReport:
    facets: int
    vertices: int
    simple: bool
    rays: int
    maximal_cones: int
    facet_dimensions: tuple[int, ...]

    def to_json(self) -> dict:
        return {"facets": self.facets, "vertices": self.vertices, "simple": self.simple,
                "rays": self.rays, "maximal_cones": self.maximal_cones}


def check_simple_and_facets(poly: LatticePolytope, fan: SimplicialFan) -> FacetReport:
    verts = vertices_from_fan(poly, fan)
    distinct = set(verts.values())
    dims = tuple(poly.face_dimension(r) for r in fan.rays)
    facets = sum(1 for k in dims if k == poly.dim - 1)
    simple = all(len(c) == poly.dim for c in fan.maximal_cones) and len(distinct) == len(verts)
    if simple:
        # each vertex lies on exactly dim facets
        facet_sets = [set(poly.minimizers(r)) for r in fan.rays]
        simple = all(sum(v in f for f in facet_sets) == poly.dim for v in distinct)
    return FacetReport(facets, len(distinct), simple, fan.n_rays, len(fan.maximal_cones), dims)


@dataclass(frozen=True)
class RefinementReport:
    refines: bool
    cone_map: tuple[tuple[int, int], ...]
    missing_rays: tuple[IntVec, ...]
    witness: str | None = None


def is_refinement(fine: SimplicialFan, coarse: SimplicialFan) -> RefinementReport:
    """Whether every cone of ``fine`` sits inside a cone of ``coarse``."""
    if fine.dim != coarse.dim:
        raise FanError("fans live in different dimensions")
    missing = tuple(r for r in coarse.rays if r not in fine.ray_index)
    if missing:
        return RefinementReport(False, (), missing, f"ray {list(missing[0])} of the coarse fan is missing")
    coarse_index = {c: k for k, c in enumerate(coarse.maximal_cones)}
    cone_map = []
    for fi, c in enumerate(fine.maximal_cones):
        gens = fine.generators(c)
        interior = [sum(col) for col in zip(*gens)]
        hosts = coarse.locate(interior)
        if not hosts:
            return RefinementReport(False, tuple(cone_map), (), f"fine cone {list(c)} lies in no coarse cone")
        host = hosts[0]
        for g in gens:
            try:
                solve_simplicial_membership(coarse.generators(host), g)
            except NotInCone:
                return RefinementReport(False, tuple(cone_map), (),
                                        f"generator {list(g)} of fine cone {list(c)} leaves coarse cone {list(host)}")
        cone_map.append((fi, coarse_index[host]))
    return RefinementReport(True, tuple(cone_map), ())
