"""Sparse multivariate polynomials over Q and Laurent monomials.

A :class:`SparsePoly` is a dict from exponent tuples to nonzero Fractions over
a named, ordered alphabet.  Exponents in a SparsePoly are nonnegative;
negative exponents live only in :class:`Monomial`.  Crossing between the two
goes through :func:`substitute_monomials`, which returns a numerator
polynomial together with a denominator monomial.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Iterable, Mapping, Sequence

Exps = tuple[int, ...]


class AlphabetMismatch(ValueError):
    pass


class PNegativeExponent(ValueError):
    """A polynomial was asked to carry a negative exponent."""


def y_alphabet(d: int) -> tuple[str, ...]:
    return tuple(f"y{i}" for i in range(1, d + 1))


def ypq_alphabet(d: int) -> tuple[str, ...]:
    return (y_alphabet(d) + tuple(f"p{i}" for i in range(1, d + 1))
            + tuple(f"q{i}" for i in range(1, d)))


def u_alphabet(n: int) -> tuple[str, ...]:
    return tuple(f"u{i}" for i in range(1, n + 1))


def grlex_key(e: Exps) -> tuple:
    return (sum(e), e)


def _add(a: Exps, b: Exps) -> Exps:
    return tuple(x + y for x, y in zip(a, b))


def _fmt_term(alphabet, e):
    parts = []
    for name, k in zip(alphabet, e):
        if k == 1:
            parts.append(name)
        elif k:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


@dataclass(frozen=True)
class Monomial:
    alphabet: tuple[str, ...]
    exponents: Exps

    def __post_init__(self):
        if len(self.exponents) != len(self.alphabet):
            raise AlphabetMismatch(
                f"{len(self.exponents)} exponents over an alphabet of {len(self.alphabet)}")

    @classmethod
    def one(cls, alphabet: Sequence[str]) -> Monomial:
        return cls(tuple(alphabet), (0,) * len(alphabet))

    @classmethod
    def var(cls, alphabet: Sequence[str], name: str) -> Monomial:
        alphabet = tuple(alphabet)
        i = alphabet.index(name)
        return cls(alphabet, tuple(int(j == i) for j in range(len(alphabet))))

    def _check(self, other: Monomial):
        if other.alphabet != self.alphabet:
            raise AlphabetMismatch("monomials over different alphabets")

    def __mul__(self, other: Monomial) -> Monomial:
        self._check(other)
        return Monomial(self.alphabet, _add(self.exponents, other.exponents))

    def __truediv__(self, other: Monomial) -> Monomial:
        self._check(other)
        return Monomial(self.alphabet, tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k: int) -> Monomial:
        return Monomial(self.alphabet, tuple(k * a for a in self.exponents))

    def is_polynomial(self) -> bool:
        return all(a >= 0 for a in self.exponents)

    def is_one(self) -> bool:
        return not any(self.exponents)

    def numerator(self) -> Monomial:
        return Monomial(self.alphabet, tuple(max(a, 0) for a in self.exponents))

    def denominator(self) -> Monomial:
        return Monomial(self.alphabet, tuple(max(-a, 0) for a in self.exponents))

    def evaluate(self, point: Sequence) -> Fraction:
        val = Fraction(1)
        for x, k in zip(point, self.exponents):
            if k:
                val *= Fraction(x) ** k
        return val

    def __str__(self):
        num = _fmt_term(self.alphabet, self.numerator().exponents) or "1"
        den = _fmt_term(self.alphabet, self.denominator().exponents)
        if not den:
            return num
        return f"{num}/({den})" if "*" in den else f"{num}/{den}"


class SparsePoly:
    __slots__ = ("alphabet", "terms")

    def __init__(self, alphabet: Sequence[str], terms: Mapping[Exps, object] | None = None):
        self.alphabet = tuple(alphabet)
        n = len(self.alphabet)
        clean: dict[Exps, Fraction] = {}
        for e, c in (terms or {}).items():
            e = tuple(int(x) for x in e)
            if len(e) != n:
                raise AlphabetMismatch(f"exponent {e} does not fit alphabet of size {n}")
            if any(x < 0 for x in e):
                raise PNegativeExponent(f"negative exponent {e} in a polynomial")
            c = Fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.terms = clean

    @classmethod
    def _raw(cls, alphabet, terms):
        p = object.__new__(cls)
        p.alphabet = alphabet
        p.terms = terms
        return p

    @classmethod
    def constant(cls, alphabet: Sequence[str], c=1) -> SparsePoly:
        return cls(alphabet, {(0,) * len(alphabet): c})

    @classmethod
    def variable(cls, alphabet: Sequence[str], name: str) -> SparsePoly:
        return cls.from_monomial(Monomial.var(alphabet, name))

    @classmethod
    def from_monomial(cls, m: Monomial, coeff=1) -> SparsePoly:
        if not m.is_polynomial():
            raise ValueError(f"{m} has negative exponents")
        return cls(m.alphabet, {m.exponents: coeff})

    def _coerce(self, other) -> SparsePoly:
        if isinstance(other, SparsePoly):
            if other.alphabet != self.alphabet:
                raise AlphabetMismatch(f"{other.alphabet} vs {self.alphabet}")
            return other
        if isinstance(other, Monomial):
            if other.alphabet != self.alphabet:
                raise AlphabetMismatch(f"{other.alphabet} vs {self.alphabet}")
            return SparsePoly.from_monomial(other)
        if isinstance(other, (int, Fraction)):
            return SparsePoly.constant(self.alphabet, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return SparsePoly._raw(self.alphabet, out)

    __radd__ = __add__

    def __neg__(self):
        return SparsePoly._raw(self.alphabet, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Exps, Fraction] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    del out[e]
        return SparsePoly._raw(self.alphabet, out)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> SparsePoly:
        if k < 0:
            raise ValueError("negative power of a polynomial")
        result = SparsePoly.constant(self.alphabet)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        other = self._coerce(other) if not isinstance(other, SparsePoly) else other
        if other is NotImplemented or not isinstance(other, SparsePoly):
            return NotImplemented
        return self.alphabet == other.alphabet and self.terms == other.terms

    def __hash__(self):
        return hash((self.alphabet, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def support(self) -> list[Exps]:
        return sorted(self.terms, key=grlex_key)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def evaluate(self, point: Sequence) -> Fraction:
        point = [Fraction(x) for x in point]
        total = Fraction(0)
        for e, c in self.terms.items():
            v = c
            for x, k in zip(point, e):
                if k:
                    v *= x ** k
            total += v
        return total

    def leading(self) -> tuple[Exps, Fraction]:
        e = max(self.terms, key=grlex_key)
        return e, self.terms[e]

    def divmod(self, g: SparsePoly) -> tuple[SparsePoly, SparsePoly]:
        """Multivariate division by a single divisor in graded-lex order.

        With one divisor the remainder is zero exactly when ``g`` divides
        ``self``.
        """
        g = self._coerce(g)
        if g.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lg, cg = g.leading()
        rest = [(e, c) for e, c in g.terms.items() if e != lg]
        p = dict(self.terms)
        heap = [(-sum(e), tuple(-x for x in e)) for e in p]
        heapq.heapify(heap)
        quot: dict[Exps, Fraction] = {}
        rem: dict[Exps, Fraction] = {}
        while heap:
            _, neg = heapq.heappop(heap)
            e = tuple(-x for x in neg)
            c = p.pop(e, 0)
            if not c:
                continue
            shift = tuple(a - b for a, b in zip(e, lg))
            if all(s >= 0 for s in shift):
                t = c / cg
                quot[shift] = quot.get(shift, 0) + t
                for e2, c2 in rest:
                    e3 = _add(e2, shift)
                    v = p.get(e3, 0) - t * c2
                    if e3 not in p:
                        heapq.heappush(heap, (-sum(e3), tuple(-x for x in e3)))
                    if v:
                        p[e3] = v
                    else:
                        p.pop(e3, None)
            else:
                rem[e] = c
        return SparsePoly(self.alphabet, quot), SparsePoly(self.alphabet, rem)

    def rename(self, alphabet: Sequence[str]) -> SparsePoly:
        """Reinterpret over a same-length alphabet or embed into a superset alphabet."""
        alphabet = tuple(alphabet)
        if len(alphabet) == len(self.alphabet) and set(alphabet).isdisjoint(self.alphabet):
            return SparsePoly._raw(alphabet, dict(self.terms))
        pos = [alphabet.index(v) for v in self.alphabet]
        out = {}
        for e, c in self.terms.items():
            f = [0] * len(alphabet)
            for i, k in zip(pos, e):
                f[i] = k
            out[tuple(f)] = c
        return SparsePoly._raw(alphabet, out)

    def to_json(self) -> dict:
        return {
            "vars": list(self.alphabet),
            "terms": [{"exp": list(e), "coeff": fraction_str(self.terms[e])}
                      for e in self.support()],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> SparsePoly:
        return cls(data["vars"], {tuple(t["exp"]): parse_fraction(t["coeff"]) for t in data["terms"]})

    def __repr__(self):
        return f"SparsePoly({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        out = []
        for e in reversed(self.support()):
            c = self.terms[e]
            m = _fmt_term(self.alphabet, e)
            if not m:
                out.append(str(c))
            elif c == 1:
                out.append(m)
            elif c == -1:
                out.append("-" + m)
            else:
                out.append(f"{c}*{m}")
        return " + ".join(out).replace("+ -", "- ")


def fraction_str(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def parse_fraction(s) -> Fraction:
    return Fraction(s)


def poly_product(factors: Iterable[SparsePoly], alphabet: Sequence[str] | None = None) -> SparsePoly:
    factors = list(factors)
    if alphabet is None:
        if not factors:
            raise ValueError("alphabet required for an empty product")
        alphabet = factors[0].alphabet
    alphabet = tuple(alphabet)
    for f in factors:
        if f.alphabet != alphabet:
            raise AlphabetMismatch(f"factor over {f.alphabet}, expected {alphabet}")
    return reduce(lambda a, b: a * b, factors, SparsePoly.constant(alphabet))


@dataclass(frozen=True)
class MonomialMap:
    """A map sending each source variable to a Laurent monomial."""

    source: tuple[str, ...]
    images: tuple[Monomial, ...]

    def __post_init__(self):
        if len(self.images) != len(self.source):
            raise AlphabetMismatch("one image per source variable required")
        if len({m.alphabet for m in self.images}) > 1:
            raise AlphabetMismatch("images over different target alphabets")

    @property
    def target(self) -> tuple[str, ...]:
        return self.images[0].alphabet

    def apply(self, exps: Sequence[int]) -> Monomial:
        out = [0] * len(self.target)
        for k, m in zip(exps, self.images):
            if k:
                for j, a in enumerate(m.exponents):
                    out[j] += k * a
        return Monomial(self.target, tuple(out))

    def __call__(self, m: Monomial) -> Monomial:
        if m.alphabet != self.source:
            raise AlphabetMismatch("monomial is not over the source alphabet")
        return self.apply(m.exponents)

    def compose(self, other: MonomialMap) -> MonomialMap:
        """``self`` after ``other``: source of ``other`` -> target of ``self``."""
        if other.target != self.source:
            raise AlphabetMismatch("maps do not compose")
        return MonomialMap(other.source, tuple(self(m) for m in other.images))


def substitute_monomials(P: SparsePoly, phi: MonomialMap) -> tuple[SparsePoly, Monomial]:
    """Push ``P`` through a monomial map and clear denominators.

    Returns ``(num, den)`` with ``P o phi == num / den``, ``den`` the least
    common denominator monomial of the images of the terms.
    """
    if P.alphabet != phi.source:
        raise AlphabetMismatch(f"{P.alphabet} vs map source {phi.source}")
    images = [(phi.apply(e), c) for e, c in P.terms.items()]
    width = len(phi.target)
    den = [0] * width
    for m, _ in images:
        for j, a in enumerate(m.exponents):
            if -a > den[j]:
                den[j] = -a
    num: dict[Exps, Fraction] = {}
    for m, c in images:
        e = tuple(a + b for a, b in zip(m.exponents, den))
        v = num.get(e, 0) + c
        if v:
            num[e] = v
        else:
            num.pop(e, None)
    return SparsePoly._raw(phi.target, num), Monomial(phi.target, tuple(den))


def substitute_polys(P: SparsePoly, images: Mapping[str, SparsePoly],
                     target: Sequence[str]) -> SparsePoly:
    """Replace variables of ``P`` by polynomials over ``target``.

    Variables absent from ``images`` must themselves belong to ``target``.
    """
    target = tuple(target)
    polys = []
    for v in P.alphabet:
        if v in images:
            img = images[v]
            if img.alphabet != target:
                raise AlphabetMismatch(f"image of {v} is not over {target}")
            polys.append(img)
        elif v in target:
            polys.append(SparsePoly.variable(target, v))
        else:
            raise AlphabetMismatch(f"no image for {v}")
    power_cache: dict[tuple[int, int], SparsePoly] = {}

    def power(i, k):
        if (i, k) not in power_cache:
            power_cache[(i, k)] = polys[i] ** k
        return power_cache[(i, k)]

    total = SparsePoly(target)
    for e, c in P.terms.items():
        term = SparsePoly.constant(target, c)
        for i, k in enumerate(e):
            if k:
                term = term * power(i, k)
        total = total + term
    return total


def pq_images(d: int) -> dict[str, SparsePoly]:
    """``p_i -> 1 + y_i`` and ``q_j -> 1 + y_j + y_j y_{j+1}`` over the y alphabet."""
    ys = y_alphabet(d)
    y = [SparsePoly.variable(ys, v) for v in ys]
    images = {f"p{i + 1}": 1 + y[i] for i in range(d)}
    images.update({f"q{j + 1}": 1 + y[j] + y[j] * y[j + 1] for j in range(d - 1)})
    return images


def reduce_pq(P: SparsePoly, d: int) -> SparsePoly:
    """Eliminate the p and q symbols through their defining relations.

    The result is the canonical representative over the y alphabet.  Negative
    powers of p or q cannot occur: a SparsePoly refuses them at construction,
    so denominators must be cleared first (see :func:`substitute_monomials`).
    """
    if P.alphabet != ypq_alphabet(d):
        raise AlphabetMismatch(f"expected the (y, p, q) alphabet for d={d}")
    return substitute_polys(P, pq_images(d), y_alphabet(d))


def is_zero_identity(P: SparsePoly) -> bool:
    return P.is_zero()
