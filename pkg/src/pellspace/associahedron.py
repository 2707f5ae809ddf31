"""Associahedron side: polygon arcs, the polynomial G, its fan and dihedral coordinates.

An n-gon has ``n(n-3)/2`` arcs (diagonals) ``(i, j)`` with ``i < j``.  The
associahedron lives in dimension ``d = n - 3`` and shares the rays of the
Pell fan, plus one ray ``e_i - e_k`` for every ``k >= i + 2``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Sequence

from .exact_linalg import IntVec
from .laurent import SparsePoly, fraction_str, poly_product, y_alphabet
from .pellytope import build_fan, pellytope_poly, ray_generators
from .polyhedra import LatticePolytope, SimplicialFan, is_refinement, vertices_from_fan


class InvalidArc(ValueError):
    pass


class DegenerateConfig(ValueError):
    pass


def catalan(k: int) -> int:
    return comb(2 * k, k) // (k + 1)


@dataclass(frozen=True, order=True)
class Arc:
    i: int
    j: int

    def __post_init__(self):
        if not 1 <= self.i < self.j - 1:
            raise InvalidArc(f"({self.i}, {self.j}) is not a diagonal")

    def check(self, n: int) -> Arc:
        if self.j > n or (self.i, self.j) == (1, n):
            raise InvalidArc(f"({self.i}, {self.j}) is not a diagonal of the {n}-gon")
        return self

    def __str__(self):
        return f"{self.i}{self.j}" if self.j < 10 else f"{self.i},{self.j}"


def arcs(n: int) -> list[Arc]:
    if n < 4:
        raise ValueError("need a polygon with at least 4 vertices")
    return [Arc(i, j) for i in range(1, n - 1) for j in range(i + 2, n + 1) if (i, j) != (1, n)]


def crossing(a: Arc, b: Arc) -> bool:
    return a.i < b.i < a.j < b.j or b.i < a.i < b.j < a.j


# -- the polynomial G ---------------------------------------------------------

def arc_factor(a: Arc, d: int) -> SparsePoly:
    """``1 + y_i + y_i y_{i+1} + ... + y_i ... y_{j-2}``."""
    ys = y_alphabet(d)
    if a.j - 2 > d:
        raise InvalidArc(f"arc {a} carries no factor in dimension {d}")
    total = SparsePoly.constant(ys)
    run = SparsePoly.constant(ys)
    for k in range(a.i, a.j - 1):
        run = run * SparsePoly.variable(ys, ys[k - 1])
        total = total + run
    return total


@lru_cache(maxsize=None)
def build_G(n: int) -> SparsePoly:
    """Product of the arc factors over all arcs avoiding vertex ``n``."""
    d = n - 3
    return poly_product([arc_factor(a, d) for a in arcs(n) if a.j <= n - 1], y_alphabet(d))


def pellytope_divides_G(n: int) -> tuple[bool, SparsePoly]:
    q, r = build_G(n).divmod(pellytope_poly(n - 3))
    return r.is_zero(), q


# -- fan ------------------------------------------------------------------------

def arc_to_ray(a: Arc, n: int) -> IntVec:
    a.check(n)
    d = n - 3
    v = [0] * d
    if a.j == n - 1:
        v[a.i - 1] = 1
    elif a.j == n:
        v[a.i - 2] = -1
    else:
        v[a.i - 1], v[a.j - 2] = 1, -1
    return tuple(v)


def ray_to_arc(v: Sequence[int], n: int) -> Arc:
    nz = [(k, x) for k, x in enumerate(v) if x]
    if len(nz) == 1 and nz[0][1] == 1:
        return Arc(nz[0][0] + 1, n - 1)
    if len(nz) == 1 and nz[0][1] == -1:
        return Arc(nz[0][0] + 2, n)
    if len(nz) == 2 and nz[0][1] == 1 and nz[1][1] == -1:
        return Arc(nz[0][0] + 1, nz[1][0] + 2)
    raise InvalidArc(f"{list(v)} is not an associahedron ray")


def assoc_rays(n: int) -> list[IntVec]:
    """Pell rays in their usual order, then ``e_i - e_k`` for ``k >= i + 2``."""
    d = n - 3
    rays = ray_generators(d)
    for i in range(d):
        for k in range(i + 2, d):
            rays.append(tuple(1 if t == i else -1 if t == k else 0 for t in range(d)))
    return rays


def triangulations(n: int) -> list[frozenset[Arc]]:
    """All triangulations of the n-gon as sets of arcs."""

    def side(a, b):
        return b - a == 1 or (a, b) == (1, n)

    @lru_cache(maxsize=None)
    def tri(lo: int, hi: int) -> tuple[frozenset, ...]:
        # triangulations of the sub-polygon lo, lo+1, ..., hi
        if hi - lo < 2:
            return (frozenset(),)
        out = []
        for k in range(lo + 1, hi):
            extra = {Arc(a, b) for a, b in ((lo, k), (k, hi)) if not side(a, b)}
            for left in tri(lo, k):
                for right in tri(k, hi):
                    out.append(left | right | extra)
        return tuple(out)

    return list(tri(1, n))


@dataclass(frozen=True)
class AssocFan:
    n: int
    fan: SimplicialFan
    arc_ray: dict  # Arc -> ray index

    @property
    def d(self) -> int:
        return self.n - 3


@lru_cache(maxsize=None)
def build_assoc_fan(n: int) -> AssocFan:
    rays = assoc_rays(n)
    index = {r: k for k, r in enumerate(rays)}
    arc_ray = {a: index[arc_to_ray(a, n)] for a in arcs(n)}
    if len(arc_ray) != len(rays) or set(arc_ray.values()) != set(range(len(rays))):
        raise AssertionError("arc dictionary is not a bijection onto the rays")
    cones = [sorted(arc_ray[a] for a in t) for t in triangulations(n)]
    return AssocFan(n, SimplicialFan.build(n - 3, rays, cones), arc_ray)


@dataclass(frozen=True)
class NewtonCheck:
    n: int
    vertices: int
    expected: int
    complete: bool

    @property
    def passed(self) -> bool:
        return self.complete and self.vertices == self.expected


def check_newton_polytope(n: int, samples: int = 200, seed: int = 0) -> NewtonCheck:
    """Vertices of Newt(G) read off the triangulation fan; propagates AmbiguousVertex."""
    af = build_assoc_fan(n)
    af.fan.check_simplicial()
    complete = af.fan.check_complete(samples=samples, seed=seed)
    poly = LatticePolytope.from_support(build_G(n).terms, n - 3)
    verts = vertices_from_fan(poly, af.fan)
    return NewtonCheck(n, len(set(verts.values())), catalan(n - 2), complete)


@dataclass(frozen=True)
class RefinementCheck:
    n: int
    refines: bool
    extra_rays: tuple[IntVec, ...]
    cone_map: tuple[tuple[int, int], ...]
    witness: str | None

    def to_json(self) -> dict:
        return {"n": self.n, "refines": self.refines,
                "extra_rays": [list(r) for r in self.extra_rays],
                "cone_map": [list(p) for p in self.cone_map]}


def check_refinement(n: int) -> RefinementCheck:
    fine = build_assoc_fan(n).fan
    coarse = build_fan(n - 3)
    rep = is_refinement(fine, coarse)
    extra = tuple(sorted((r for r in fine.rays if r not in coarse.ray_index), reverse=True))
    return RefinementCheck(n, rep.refines, extra, rep.cone_map, rep.witness)


# -- dihedral coordinates -------------------------------------------------------

def dihedral(x: Sequence, a: Arc) -> Fraction:
    """Cross-ratio coordinate of an arc; vertex labels are read modulo n."""
    n = len(x)
    a.check(n)
    x = [Fraction(v) for v in x]
    if len(set(x)) != n:
        raise DegenerateConfig("marked points must be pairwise distinct")

    def X(k):
        return x[(k - 1) % n]

    i, j = a.i, a.j
    den = (X(i) - X(j)) * (X(i + 1) - X(j + 1))
    num = (X(i) - X(j + 1)) * (X(i + 1) - X(j))
    if den == 0 or num == 0:
        raise DegenerateConfig(f"coinciding points for arc {a}")
    return num / den


def random_config(n: int, rng: random.Random) -> tuple[Fraction, ...]:
    return tuple(Fraction(v) for v in rng.sample(range(10 * n + 1), n))


@dataclass(frozen=True)
class DihedralTrial:
    config: tuple[Fraction, ...]
    residuals: tuple[Fraction, ...]  # u_a + prod_{b crosses a} u_b - 1, per arc

    @property
    def passed(self) -> bool:
        return not any(self.residuals)


@dataclass(frozen=True)
class DihedralReport:
    n: int
    arcs: tuple[Arc, ...]
    trials: tuple[DihedralTrial, ...]

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.trials)

    def to_json(self) -> dict:
        return {"n": self.n, "arcs": [[a.i, a.j] for a in self.arcs], "trials": [
            {"config": [fraction_str(v) for v in t.config],
             "residuals": [fraction_str(r) for r in t.residuals],
             "passed": t.passed} for t in self.trials]}


def assoc_residuals(x: Sequence, n: int) -> tuple[Fraction, ...]:
    all_arcs = arcs(n)
    u = {a: dihedral(x, a) for a in all_arcs}
    out = []
    for a in all_arcs:
        prod = Fraction(1)
        for b in all_arcs:
            if crossing(a, b):
                prod *= u[b]
        out.append(u[a] + prod - 1)
    return tuple(out)


def check_assoc_u_equations(n: int, trials: int = 20, seed: int = 0, max_retries: int = 100) -> DihedralReport:
    rng = random.Random(seed)
    done = []
    for _ in range(trials):
        for _ in range(max_retries):
            x = random_config(n, rng)
            try:
                done.append(DihedralTrial(x, assoc_residuals(x, n)))
                break
            except DegenerateConfig:
                continue
        else:
            raise DegenerateConfig(f"no usable configuration in {max_retries} draws")
    return DihedralReport(n, tuple(arcs(n)), tuple(done))
