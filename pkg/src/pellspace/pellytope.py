"""Pellytopes, their normal fans, bounded characters and u-equations.

Indexing.  Rays of the fan in dimension ``d`` are always listed as

    e_1, ..., e_d, -e_1, ..., -e_d, e_1 - e_2, ..., e_{d-1} - e_d

and ray ``k`` (0-based) carries the variable ``u_{k+1}``.  The tropical
functions are listed in the matching order ``y_1..y_d, p_1..p_d, q_1..q_{d-1}``
with ``p_i = 1 + y_i`` and ``q_j = 1 + y_j + y_j y_{j+1}``.  Internally every
index is 0-based; JSON output uses the 1-based labels.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms.isomorphism import GraphMatcher

from .exact_linalg import IntMatrix, IntVec, int_inverse
from .laurent import (
    Monomial,
    MonomialMap,
    SparsePoly,
    poly_product,
    u_alphabet,
    y_alphabet,
    ypq_alphabet,
)
from .polyhedra import (
    LatticePolytope,
    SimplicialFan,
    extract_flag_complex,
    fan_product,
    star,
    stellar_refine,
    vertices_from_fan,
)


class NotBounded(ValueError):
    def __init__(self, message: str, image: tuple[int, ...]):
        super().__init__(message)
        self.image = image


class AsymmetricIncompatibility(ValueError):
    pass


class GeneratorMismatch(AssertionError):
    pass


def pell_number(k: int) -> int:
    if k < 1:
        raise ValueError("Pell numbers are indexed from 1")
    a, b = 1, 2
    for _ in range(k - 1):
        a, b = b, 2 * b + a
    return a


# -- rays ---------------------------------------------------------------------

def n_rays(d: int) -> int:
    return 3 * d - 1


def ray_generators(d: int) -> list[IntVec]:
    def e(i, s=1):
        return tuple(s if j == i else 0 for j in range(d))

    rays = [e(i) for i in range(d)] + [e(i, -1) for i in range(d)]
    rays += [tuple(1 if j == i else -1 if j == i + 1 else 0 for j in range(d)) for i in range(d - 1)]
    return rays


def ray_kind(k: int, d: int) -> tuple[str, int]:
    """Classify ray ``k`` as ``('e', i)``, ``('-e', i)`` or ``('diff', i)`` (0-based ``i``).

    ``('diff', i)`` stands for ``e_i - e_{i+1}``.
    """
    if not 0 <= k < n_rays(d):
        raise IndexError(f"ray index {k} out of range for d={d}")
    if k < d:
        return "e", k
    if k < 2 * d:
        return "-e", k - d
    return "diff", k - 2 * d


def ray_label(k: int, d: int) -> str:
    kind, i = ray_kind(k, d)
    if kind == "e":
        return f"e{i + 1}"
    if kind == "-e":
        return f"-e{i + 1}"
    return f"e{i + 1}-e{i + 2}"


def ray_of(kind: str, i: int, d: int) -> int:
    """Inverse of :func:`ray_kind`."""
    return {"e": i, "-e": d + i, "diff": 2 * d + i}[kind]


# -- polytope and fan ---------------------------------------------------------

def pellytope_poly(d: int) -> SparsePoly:
    ys = y_alphabet(d)
    y = [SparsePoly.variable(ys, v) for v in ys]
    factors = [1 + y[i] for i in range(d)]
    factors += [1 + y[j] + y[j] * y[j + 1] for j in range(d - 1)]
    return poly_product(factors, ys)


@lru_cache(maxsize=None)
def build_fan(d: int) -> SimplicialFan:
    """Inner normal fan of the pellytope, built recursively by products and one stellar refinement per step."""
    if d < 1:
        raise ValueError("d must be at least 1")
    segment = SimplicialFan.build(1, [(1,), (-1,)], [(0,), (1,)])
    if d == 1:
        return segment
    prev = build_fan(d - 1)
    diff = tuple(1 if j == d - 2 else -1 if j == d - 1 else 0 for j in range(d))
    fan = stellar_refine(fan_product(prev, segment), diff)
    return fan.reordered(ray_generators(d))


@lru_cache(maxsize=None)
def build_pellytope(d: int) -> LatticePolytope:
    support = LatticePolytope.from_support(pellytope_poly(d).terms, d)
    verts = vertices_from_fan(support, build_fan(d))
    return LatticePolytope(d, support.support, tuple(sorted(set(verts.values()))))


# -- characters and tropical evaluation ---------------------------------------

@dataclass(frozen=True)
class Character:
    """Exponents of ``y^a p^b q^c``."""

    a: tuple[int, ...]
    b: tuple[int, ...]
    c: tuple[int, ...]

    def __post_init__(self):
        d = len(self.a)
        if len(self.b) != d or len(self.c) != max(d - 1, 0):
            raise ValueError(f"character lengths must be (d, d, d-1); got "
                             f"({len(self.a)}, {len(self.b)}, {len(self.c)})")

    @property
    def d(self) -> int:
        return len(self.a)

    @classmethod
    def from_vector(cls, v: Sequence[int], d: int) -> Character:
        v = tuple(int(x) for x in v)
        if len(v) != n_rays(d):
            raise ValueError("vector length must be 3d-1")
        return cls(v[:d], v[d:2 * d], v[2 * d:])

    @classmethod
    def trivial(cls, d: int) -> Character:
        return cls.from_vector((0,) * n_rays(d), d)

    @property
    def vector(self) -> tuple[int, ...]:
        return self.a + self.b + self.c

    def __mul__(self, other: Character) -> Character:
        return Character.from_vector([x + y for x, y in zip(self.vector, other.vector)], self.d)

    def monomial(self) -> Monomial:
        return Monomial(ypq_alphabet(self.d), self.vector)

    def to_json(self) -> dict:
        return {"a": list(self.a), "b": list(self.b), "c": list(self.c)}

    @classmethod
    def from_json(cls, data: dict) -> Character:
        return cls(tuple(data["a"]), tuple(data["b"]), tuple(data["c"]))

    def __str__(self):
        return str(self.monomial())


def trop_eval(chi: Character, Y: Sequence) -> Fraction:
    d = chi.d
    if len(Y) != d:
        raise ValueError(f"expected a point of length {d}, got {len(Y)}")
    Y = [Fraction(v) for v in Y]
    total = sum((a * v for a, v in zip(chi.a, Y)), Fraction(0))
    total += sum((b * min(0, v) for b, v in zip(chi.b, Y)), Fraction(0))
    total += sum((c * min(0, Y[i], Y[i] + Y[i + 1]) for i, c in enumerate(chi.c)), Fraction(0))
    return total


def tropical_functions(d: int) -> list[Character]:
    """The characters ``y_1..y_d, p_1..p_d, q_1..q_{d-1}``."""
    return [Character.from_vector([int(j == i) for j in range(n_rays(d))], d) for i in range(n_rays(d))]


@lru_cache(maxsize=None)
def build_M(d: int) -> IntMatrix:
    rays = ray_generators(d)
    return IntMatrix.from_rows([[int(trop_eval(F, v)) for v in rays] for F in tropical_functions(d)])


@lru_cache(maxsize=None)
def closed_form_Minv(d: int) -> IntMatrix:
    """Rows written down directly from their closed form, not by inversion."""
    n = n_rays(d)
    rows = [[0] * n for _ in range(n)]

    def put(row, *entries):
        for col, val in entries:
            rows[row][col] += val

    # 0-based: index d+k is p_{k+1}, index 2d+k is q_{k+1}
    for i in range(d - 1):
        put(i, (i, 1), (d + i + 1, 1), (2 * d + i, -1))
    put(d - 1, (d - 1, 1), (2 * d - 1, -1))
    put(d, (d, -1))
    for j in range(1, d):
        put(d + j, (d + j - 1, 1), (2 * d + j - 1, -1))
    for i in range(d - 1):
        put(2 * d + i, (d + i, -1), (d + i + 1, -1), (2 * d + i, 1))
    return IntMatrix.from_rows(rows)


def formula_generators(d: int) -> list[Character]:
    """The u-monomials written as explicit ratios of y, p and q."""
    n = n_rays(d)
    alpha = ypq_alphabet(d)

    def mono(num: Iterable[str] = (), den: Iterable[str] = ()):
        m = Monomial.one(alpha)
        for v in num:
            m = m * Monomial.var(alpha, v)
        for v in den:
            m = m / Monomial.var(alpha, v)
        return Character.from_vector(m.exponents, d)

    gens: list[Character | None] = [None] * n
    for i in range(1, d):
        gens[i - 1] = mono([f"y{i}", f"p{i + 1}"], [f"q{i}"])
        gens[i + d] = mono([f"p{i}"], [f"q{i}"])
        gens[i + 2 * d - 1] = mono([f"q{i}"], [f"p{i}", f"p{i + 1}"])
    gens[d - 1] = mono([f"y{d}"], [f"p{d}"])
    gens[d] = mono([], ["p1"])
    return gens  # type: ignore[return-value]


def minimal_generators(d: int) -> list[Character]:
    """Rows of the inverse matrix read as characters, checked against the ratio formulas."""
    Minv = closed_form_Minv(d)
    rows = [Character.from_vector(Minv.row(i), d) for i in range(Minv.rows)]
    expected = formula_generators(d)
    for i, (r, e) in enumerate(zip(rows, expected)):
        if r != e:
            raise GeneratorMismatch(f"u_{i + 1}: matrix row {r} differs from formula {e}")
    return rows


def is_bounded(chi: Character, model: PellModel | None = None) -> bool:
    M = model.M if model else build_M(chi.d)
    return all(x >= 0 for x in M.row_apply(chi.vector))


def factor_character(chi: Character, model: PellModel | None = None) -> tuple[int, ...]:
    """Multiplicities ``lam`` with ``chi = prod u_i^lam_i``; requires ``chi`` bounded."""
    M = model.M if model else build_M(chi.d)
    image = tuple(M.row_apply(chi.vector))
    if any(x < 0 for x in image):
        raise NotBounded(f"{chi} is unbounded on the positive orthant", image)
    return image


def u_monomial_map(d: int) -> MonomialMap:
    return MonomialMap(u_alphabet(n_rays(d)), tuple(g.monomial() for g in minimal_generators(d)))


def inverse_monomial_map(d: int) -> MonomialMap:
    """y, p, q written as Laurent monomials in the u variables (the inverse of :func:`u_monomial_map`)."""
    if d < 2:
        # y_1 = u_1 / u_2, p_1 = 1 / u_2
        alpha = u_alphabet(2)
        return MonomialMap(ypq_alphabet(1), (Monomial(alpha, (1, -1)), Monomial(alpha, (0, -1))))
    n = n_rays(d)
    alpha = u_alphabet(n)

    def m(num=(), den=()):
        e = [0] * n
        for k in num:
            e[k - 1] += 1
        for k in den:
            e[k - 1] -= 1
        return Monomial(alpha, tuple(e))

    ys = [m([1, 1 + 2 * d], [d + 1])]
    ys += [m([i, i + 2 * d], [i - 1 + 2 * d, i + d]) for i in range(2, d)]
    ys += [m([d], [2 * d, 3 * d - 1])]
    ps = [m([], [d + 1])]
    ps += [m([], [i + d, i - 1 + 2 * d]) for i in range(2, d)]
    ps += [m([], [2 * d, 3 * d - 1])]
    qs = [m([], [d + 2, d + 1])]
    qs += [m([], [i + d, i + d + 1, i - 1 + 2 * d]) for i in range(2, d)]
    return MonomialMap(ypq_alphabet(d), tuple(ys + ps + qs))


# -- u-equations --------------------------------------------------------------

@dataclass(frozen=True)
class UEquationSystem:
    """Equations ``u_i + prod_j u_j^{a_ij} - 1`` with 0-based variable indices."""

    n: int
    products: tuple[tuple[tuple[int, int], ...], ...]

    def __post_init__(self):
        if len(self.products) != self.n:
            raise ValueError("one product per variable required")
        for i, prod in enumerate(self.products):
            for j, a in prod:
                if a <= 0:
                    raise ValueError(f"exponent a_{i + 1},{j + 1} = {a} is not positive")
                if j == i or not 0 <= j < self.n:
                    raise ValueError(f"equation {i + 1} references invalid variable {j + 1}")
        for i, prod in enumerate(self.products):
            for j, _ in prod:
                if not any(k == i for k, _ in self.products[j]):
                    raise AsymmetricIncompatibility(
                        f"u_{j + 1} appears in equation {i + 1} but not vice versa")

    @classmethod
    def from_sets(cls, sets: Sequence[Iterable[int]]) -> UEquationSystem:
        return cls(len(sets), tuple(tuple((j, 1) for j in sorted(s)) for s in sets))

    @classmethod
    def empty(cls) -> UEquationSystem:
        return cls(0, ())

    def incompatible(self, i: int) -> set[int]:
        return {j for j, _ in self.products[i]}

    def incompatible_pairs(self) -> set[frozenset[int]]:
        return {frozenset((i, j)) for i, prod in enumerate(self.products) for j, _ in prod}

    def residuals(self, point: Sequence) -> list[Fraction]:
        point = [Fraction(x) for x in point]
        out = []
        for i, prod in enumerate(self.products):
            term = Fraction(1)
            for j, a in prod:
                term *= point[j] ** a
            out.append(point[i] + term - 1)
        return out

    def jacobian(self, point: Sequence) -> list[list[Fraction]]:
        point = [Fraction(x) for x in point]
        rows = []
        for i, prod in enumerate(self.products):
            row = [Fraction(0)] * self.n
            row[i] += 1
            for k, ak in prod:
                val = Fraction(ak) * point[k] ** (ak - 1)
                for j, a in prod:
                    if j != k:
                        val *= point[j] ** a
                row[k] += val
            rows.append(row)
        return rows

    def polynomials(self) -> list[SparsePoly]:
        alpha = u_alphabet(self.n)
        out = []
        for i, prod in enumerate(self.products):
            e = [0] * self.n
            for j, a in prod:
                e[j] += a
            lone = [int(k == i) for k in range(self.n)]
            out.append(SparsePoly(alpha, {tuple(lone): 1, tuple(e): 1}) - 1)
        return out

    def to_json(self, **extra) -> dict:
        return {**extra, "equations": [
            {"i": i + 1, "product": [{"j": j + 1, "a": a} for j, a in prod]}
            for i, prod in enumerate(self.products)]}

    @classmethod
    def from_json(cls, data: dict) -> UEquationSystem:
        eqs = sorted(data["equations"], key=lambda e: e["i"])
        return cls(len(eqs), tuple(tuple((t["j"] - 1, t["a"]) for t in e["product"]) for e in eqs))

    def __str__(self):
        lines = []
        for i, prod in enumerate(self.products):
            mono = "*".join(f"u{j + 1}" + (f"^{a}" if a != 1 else "") for j, a in prod)
            lines.append(f"u{i + 1} + {mono or '1'} - 1")
        return "\n".join(lines)


def _equation_sets(d: int) -> list[list[int]]:
    """Incompatible variables of each u-equation, 1-based, case by case.

    Index expressions that name a ray which does not exist for this ``d``
    (the chains e_{j} - e_{j+1} run out for small d) are dropped.
    """
    n = n_rays(d)
    diff_lo, diff_hi = 2 * d + 1, 3 * d - 1

    def keep(*ks):
        return [k for k in ks if 1 <= k <= n and (k <= 2 * d or diff_lo <= k <= diff_hi)]

    def diff(j):
        # variable of e_j - e_{j+1}; None when the ray does not exist
        return 2 * d + j if 1 <= j <= d - 1 else None

    eq: dict[int, list[int]] = {}
    eq[1] = keep(d + 1, d + 2)
    for i in range(2, d):
        eq[i] = keep(i + d, i + d + 1, i - 1 + 2 * d)
    eq[d] = keep(3 * d - 1, 2 * d)
    eq[d + 1] = keep(1, 1 + 2 * d)
    for j in range(1, d - 1):
        eq[j + d + 1] = [k for k in (j, j + 1, diff(j + 1)) if k]
    eq[2 * d] = keep(d - 1, d)
    eq[1 + 2 * d] = [k for k in (d + 1, 2, diff(2)) if k]
    for j in range(2, d - 1):
        eq[j + 2 * d] = [k for k in (diff(j - 1), j + d, j + 1, diff(j + 1)) if k]
    last = [k for k in (d, diff(d - 2), 2 * d - 1) if k]
    if 3 * d - 1 in eq and sorted(eq[3 * d - 1]) != sorted(last):
        raise AssertionError(f"conflicting cases for u_{3 * d - 1}")
    eq[3 * d - 1] = last
    return [eq[i] for i in range(1, n + 1)]


@lru_cache(maxsize=None)
def build_u_equations(d: int) -> UEquationSystem:
    if d < 1:
        raise ValueError("d must be at least 1")
    if d == 1:
        return UEquationSystem.from_sets([[1], [0]])
    sets = _equation_sets(d)
    if len(sets) != n_rays(d):
        raise AssertionError("wrong number of equations")
    return UEquationSystem.from_sets([[k - 1 for k in s] for s in sets])


def compatibility(i: int, j: int, d: int) -> bool:
    """Closed-form compatibility of two rays (0-based indices)."""
    if i == j:
        raise ValueError("compatibility of a ray with itself is undefined")
    (ki, a), (kj, b) = ray_kind(i, d), ray_kind(j, d)
    if (ki, kj) > (kj, ki) or ((ki, kj) == (kj, ki) and a > b):
        ki, a, kj, b = kj, b, ki, a
    # kinds now ordered: '-e' < 'diff' < 'e'
    if ki == "-e" and kj == "e":
        # +-e_i always incompatible; -e_{i+1} is cut off from e_i by e_i - e_{i+1}
        return not (a == b or a == b + 1)
    if ki == "-e" and kj == "diff":
        # e_b - e_{b+1} against -e_a: incompatible only for a == b
        return a != b
    if ki == "diff" and kj == "e":
        # e_a - e_{a+1} against e_b: incompatible only for b == a + 1
        return b != a + 1
    if ki == kj == "diff":
        return abs(a - b) != 1
    return True


# -- aggregated model ---------------------------------------------------------

@dataclass(frozen=True)
class PellModel:
    d: int
    fan: SimplicialFan
    M: IntMatrix
    Minv: IntMatrix
    generators: tuple[Character, ...]
    uequations: UEquationSystem

    @property
    def n(self) -> int:
        return n_rays(self.d)


@lru_cache(maxsize=None)
def pell_model(d: int) -> PellModel:
    M = build_M(d)
    Minv = closed_form_Minv(d)
    if not (Minv @ M).is_identity() or int_inverse(M) != Minv:
        raise AssertionError(f"closed-form inverse fails for d={d}")
    return PellModel(d, build_fan(d), M, Minv, tuple(minimal_generators(d)), build_u_equations(d))


def star_prescription(k: int, d: int) -> list[int]:
    """Dimensions of the factors Sigma_m whose product is the star of ray ``k``.

    Zero-dimensional factors are omitted.  Diagonal rays at either end of the
    chain split off one segment and the fan of dimension d - 2.
    """
    kind, i = ray_kind(k, d)
    i += 1
    if kind in ("e", "-e"):
        if i in (1, d):
            parts = [d - 1]
        else:
            parts = [i - 1, d - i]
    else:
        if i in (1, d - 1):
            parts = [d - 2, 1]
        else:
            parts = [i - 1, 1, d - i - 1]
    return sorted(m for m in parts if m > 0)


@dataclass(frozen=True)
class StarCheck:
    ray: int
    prescription: tuple[int, ...]
    star_rays: int
    isomorphic: bool


def _fan_incompatibility_graph(fan: SimplicialFan):
    g = nx.Graph()
    g.add_nodes_from(range(fan.n_rays))
    g.add_edges_from(tuple(p) for p in extract_flag_complex(fan).non_edges)
    return g


def prescribed_star_graph(parts: Sequence[int]):
    """Incompatibility graph of a product of Pell fans: disjoint union, no cross pairs."""
    g = nx.Graph()
    for m in parts:
        g = nx.disjoint_union(g, _fan_incompatibility_graph(build_fan(m)))
    return g


def check_star(d: int, k: int) -> StarCheck:
    parts = tuple(star_prescription(k, d))
    st = star(build_fan(d), (k,)).fan
    if sum(parts) != st.dim:
        return StarCheck(k, parts, st.n_rays, False)
    got = _fan_incompatibility_graph(st)
    ok = GraphMatcher(got, prescribed_star_graph(parts)).is_isomorphic()
    return StarCheck(k, parts, st.n_rays, ok)
