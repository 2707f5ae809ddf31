"""Stratum-by-stratum verification that a u-equation system is a binary geometry.

For every index set ``S`` the stratum ``{u_i = 0 for i in S}`` must be empty
exactly when ``S`` is not a face, and otherwise have codimension ``|S|``.
Non-faces are certified by an incompatible pair inside ``S``.  Faces get an
exact rational point, assembled from interior points of smaller Pellspaces
after matching the connected pieces of the reduced system by graph
isomorphism.  Every point is checked against the original equations.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from .exact_linalg import RatVec, rational_rank
from .laurent import fraction_str
from .pellytope import PellModel, UEquationSystem, pell_model

MAX_EXHAUSTIVE_D = 5


class PointNotOnVariety(ValueError):
    pass


class FactorMatchFailed(AssertionError):
    pass


class BinaryGeometryFailure(AssertionError):
    def __init__(self, message: str, S: tuple[int, ...] | None = None):
        super().__init__(message)
        self.S = S


def incompatibility_graph(system: UEquationSystem, nodes: Iterable[int] | None = None) -> nx.Graph:
    keep = set(range(system.n)) if nodes is None else set(nodes)
    g = nx.Graph()
    g.add_nodes_from(sorted(keep))
    for i in keep:
        g.add_edges_from((i, j) for j in system.incompatible(i) if j in keep)
    return g


def system_product(A: UEquationSystem, B: UEquationSystem) -> UEquationSystem:
    """Disjoint union of two systems; variables of ``B`` are shifted past those of ``A``."""
    shifted = tuple(tuple((j + A.n, a) for j, a in prod) for prod in B.products)
    return UEquationSystem(A.n + B.n, A.products + shifted)


def restrict(system: UEquationSystem, zero: Iterable[int] = (), one: Iterable[int] = ()) -> UEquationSystem:
    """Substitute zeros and ones and drop the corresponding variables.

    A kept equation may not mention a variable set to zero: it would force
    its own variable to 1, which belongs in ``one``.
    """
    zero, one = set(zero), set(one)
    keep = [i for i in range(system.n) if i not in zero and i not in one]
    relabel = {v: k for k, v in enumerate(keep)}
    products = []
    for i in keep:
        prod = []
        for j, a in system.products[i]:
            if j in zero:
                raise ValueError(f"u_{j + 1} = 0 forces u_{i + 1} = 1; pass it in `one`")
            if j not in one:
                prod.append((relabel[j], a))
        products.append(tuple(prod))
    return UEquationSystem(len(keep), tuple(products))


# -- reduced systems and reports ---------------------------------------------

@dataclass(frozen=True)
class StratumSystem:
    S: tuple[int, ...]
    active: tuple[int, ...]
    frozen_ones: tuple[int, ...]
    reduced: UEquationSystem  # variable k of ``reduced`` is ``active[k]``


def stratum_system(system: UEquationSystem, S: Iterable[int]) -> StratumSystem:
    S = tuple(sorted(set(S)))
    inS = set(S)
    blocked = set().union(*(system.incompatible(i) for i in S)) if S else set()
    active = tuple(j for j in range(system.n) if j not in inS and j not in blocked)
    frozen = tuple(j for j in range(system.n) if j not in inS and j in blocked)
    return StratumSystem(S, active, frozen, restrict(system, inS, frozen))


@dataclass(frozen=True)
class StratumReport:
    S: tuple[int, ...]
    is_face: bool
    witness: RatVec | None = None
    certificate: tuple[int, int] | None = None
    codim: int | None = None
    factors: tuple[int, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "S": [i + 1 for i in self.S],
            "face": self.is_face,
            "witness": None if self.witness is None else [fraction_str(x) for x in self.witness],
            "certificate": None if self.certificate is None else [i + 1 for i in self.certificate],
            "codim": self.codim,
        }


# -- witnesses -----------------------------------------------------------------

def _random_y(d: int, rng: random.Random) -> list[Fraction]:
    while True:
        ys = []
        for _ in range(d):
            den = rng.randint(1, 1000)
            ys.append(Fraction(rng.randint(1, 10 * den - 1), den))
        if len(set(ys)) == d:
            return ys


def evaluate_generators(model: PellModel, y: Sequence) -> RatVec:
    y = [Fraction(v) for v in y]
    d = model.d
    if len(y) != d:
        raise ValueError(f"expected {d} coordinates, got {len(y)}")
    point = y + [1 + v for v in y] + [1 + y[j] + y[j] * y[j + 1] for j in range(d - 1)]
    return tuple(g.monomial().evaluate(point) for g in model.generators)


def interior_witness(model: PellModel, seed: int | None = 0, y: Sequence | None = None) -> RatVec:
    """A point of the positive part, obtained by pushing a positive ``y`` through the u monomials."""
    rng = random.Random(seed)
    while True:
        ys = list(y) if y is not None else _random_y(model.d, rng)
        u = evaluate_generators(model, ys)
        if all(0 < x < 1 for x in u):
            break
        if y is not None:
            raise ValueError(f"y = {ys} does not give a point strictly inside (0, 1)")
    if any(model.uequations.residuals(u)):
        raise PointNotOnVariety(f"monomial image of y = {ys} misses the equations")
    return u


@lru_cache(maxsize=None)
def _reference(k: int) -> tuple[nx.Graph, RatVec]:
    model = pell_model(k)
    return incompatibility_graph(model.uequations), interior_witness(model, seed=k)


def analyze_stratum(model: PellModel, S: Iterable[int]) -> StratumReport:
    """Classify ``S`` (0-based indices) and produce a certificate or an exact point."""
    system = model.uequations
    S = tuple(sorted(set(S)))
    if any(not 0 <= i < system.n for i in S):
        raise IndexError(f"index set {S} out of range")
    for i, j in combinations(S, 2):
        if j in system.incompatible(i):
            return StratumReport(S, False, certificate=(i, j))

    red = stratum_system(system, S)
    point = [Fraction(0)] * system.n
    for j in red.frozen_ones:
        point[j] = Fraction(1)
    g = incompatibility_graph(red.reduced)
    factors = []
    for comp in sorted(nx.connected_components(g), key=min):
        sub = g.subgraph(comp)
        size = len(comp)
        if (size + 1) % 3:
            raise FactorMatchFailed(f"component of size {size} for S={S} matches no Pellspace")
        k = (size + 1) // 3
        ref_graph, ref_point = _reference(k)
        matcher = GraphMatcher(sub, ref_graph)
        if not matcher.is_isomorphic():
            raise FactorMatchFailed(f"component {sorted(comp)} for S={S} is not the graph of dimension {k}")
        for local, ref in matcher.mapping.items():
            point[red.active[local]] = ref_point[ref]
        factors.append(k)

    residuals = system.residuals(point)
    if any(residuals):
        bad = next(i for i, r in enumerate(residuals) if r)
        raise BinaryGeometryFailure(f"assembled point violates equation {bad + 1}", S)
    if sum(factors) != model.d - len(S):
        raise BinaryGeometryFailure(
            f"factor dimensions {factors} do not add up to {model.d - len(S)}", S)
    return StratumReport(S, True, witness=tuple(point), codim=len(S), factors=tuple(sorted(factors)))


def jacobian_rank(model: PellModel | UEquationSystem, point: Sequence) -> int:
    system = model.uequations if isinstance(model, PellModel) else model
    if any(system.residuals(point)):
        raise PointNotOnVariety("point does not satisfy every equation")
    return rational_rank(system.jacobian(point))


# -- the full check ------------------------------------------------------------

@dataclass
class BinaryGeometryReport:
    d: int
    strata: list[StratumReport]
    jacobian_ranks: list[int]
    exhaustive: bool
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def faces(self) -> int:
        return sum(r.is_face for r in self.strata)

    def to_json(self) -> dict:
        rank = self.jacobian_ranks[0] if len(set(self.jacobian_ranks)) == 1 else self.jacobian_ranks
        return {"d": self.d, "strata": [r.to_json() for r in self.strata], "jacobian_rank": rank,
                "exhaustive": self.exhaustive, "passed": self.passed, "failures": self.failures}


def _subset(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


def _check_one(model: PellModel, S: tuple[int, ...]) -> tuple[StratumReport, str | None]:
    try:
        rep = analyze_stratum(model, S)
    except (FactorMatchFailed, BinaryGeometryFailure, PointNotOnVariety) as exc:
        return StratumReport(S, False), f"S={list(S)}: {exc}"
    on_fan = model.fan.is_cone(S) if S else True
    if rep.is_face != on_fan:
        return rep, f"S={list(S)}: classified face={rep.is_face} but fan says {on_fan}"
    if not rep.is_face:
        i, j = rep.certificate
        probe = [Fraction(1)] * model.n
        probe[i] = probe[j] = Fraction(0)
        if model.uequations.residuals(probe)[i] != -1:
            return rep, f"S={list(S)}: certificate {rep.certificate} does not force R_i = -1"
    return rep, None


def _check_masks(d: int, masks: Sequence[int]) -> list[tuple[StratumReport, str | None]]:
    model = pell_model(d)
    return [_check_one(model, _subset(m, model.n)) for m in masks]


def _check_sets(d: int, sets: Sequence[tuple[int, ...]]) -> list[tuple[StratumReport, str | None]]:
    model = pell_model(d)
    return [_check_one(model, S) for S in sets]


def thread_limit() -> int:
    try:
        cap = int(os.environ.get("PELL_THREADS", "0"))
    except ValueError:
        cap = 0
    return max(1, cap or os.cpu_count() or 1)


def _faces(system: UEquationSystem) -> list[tuple[int, ...]]:
    g = nx.complement(incompatibility_graph(system))
    out = {()}
    for clique in nx.find_cliques(g):
        for r in range(1, len(clique) + 1):
            out.update(tuple(sorted(c)) for c in combinations(clique, r))
    return sorted(out, key=lambda s: (len(s), s))


def verify_binary_geometry(model: PellModel, seed: int = 0, samples: int = 10,
                           workers: int | None = None) -> BinaryGeometryReport:
    d, n = model.d, model.n
    workers = workers or thread_limit()
    exhaustive = d <= MAX_EXHAUSTIVE_D
    if exhaustive:
        items: list = list(range(1 << n))
        worker_fn = _check_masks
    else:
        items = _faces(model.uequations) + sorted(
            tuple(sorted(p)) for p in model.uequations.incompatible_pairs())
        worker_fn = _check_sets

    results: list[tuple[StratumReport, str | None]] = []
    if workers > 1 and len(items) > 512:
        chunk = -(-len(items) // (workers * 4))
        chunks = [items[k:k + chunk] for k in range(0, len(items), chunk)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(worker_fn, [d] * len(chunks), chunks):
                results.extend(part)
    else:
        results = worker_fn(d, items)

    strata = sorted((r for r, _ in results), key=lambda r: (len(r.S), r.S))
    failures = [msg for _, msg in results if msg]

    ranks = []
    for k in range(samples):
        u = interior_witness(model, seed=seed * 1000 + k)
        ranks.append(jacobian_rank(model, u))
    if any(r != 2 * d - 1 for r in ranks):
        failures.append(f"Jacobian ranks {ranks} differ from {2 * d - 1}")
    return BinaryGeometryReport(d, strata, ranks, exhaustive, failures)
