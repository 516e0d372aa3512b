"""Exact sparse polynomials in three variables over the rationals.

Certifying an invariant algebraic surface reduces to polynomial identities,
so the arithmetic here is exact: coefficients are `fractions.Fraction` and
every operation, including single-divisor division, runs over Q.  A separate
floating-point evaluation path serves the numerical integrators.

A polynomial is a map from exponent triples (e1, e2, e3) to nonzero rational
coefficients; the zero polynomial stores no terms.  `divide` uses the graded
lexicographic term order with x1 > x2 > x3.

Values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

import re
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Tuple, Union

Exponent = Tuple[int, int, int]
Rational = Union[int, Fraction, str]

_TERM_RE = re.compile(
    r"^(?P<coeff>[0-9]+(?:/[0-9]+)?)?"
    r"(?P<vars>(?:\*?x[123](?:\^[0-9]+)?)*)$"
)
_VAR_RE = re.compile(r"x(?P<idx>[123])(?:\^(?P<exp>[0-9]+))?")


def _grlex_key(e: Exponent):
    # total degree first, then lexicographic with x1 > x2 > x3
    return (e[0] + e[1] + e[2], e)


def _coerce_coeff(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(
        f"coefficients must be exact rationals (int/Fraction/str), got {type(value).__name__}"
    )


class SparsePoly:
    """Sparse trivariate polynomial with exact rational coefficients."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Sequence[int], Rational] | Iterable = ()):
        clean: dict[Exponent, Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for exps, coeff in items:
            e = tuple(int(v) for v in exps)
            if len(e) != 3 or any(v < 0 for v in e):
                raise ValueError(f"exponent triple of non-negative ints required, got {exps!r}")
            q = clean.get(e, Fraction(0)) + _coerce_coeff(coeff)
            if q:
                clean[e] = q
            else:
                clean.pop(e, None)
        self._terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls) -> "SparsePoly":
        return cls()

    @classmethod
    def constant(cls, c: Rational) -> "SparsePoly":
        return cls({(0, 0, 0): c})

    @classmethod
    def variable(cls, index: int) -> "SparsePoly":
        """x1, x2 or x3 for index in 1..3."""
        if index not in (1, 2, 3):
            raise ValueError("variable index must be 1, 2 or 3")
        e = [0, 0, 0]
        e[index - 1] = 1
        return cls({tuple(e): 1})

    @classmethod
    def monomial(cls, exps: Sequence[int], coeff: Rational = 1) -> "SparsePoly":
        return cls({tuple(exps): coeff})

    # -- inspection --------------------------------------------------------

    @property
    def terms(self) -> Mapping[Exponent, Fraction]:
        return MappingProxyType(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self._terms:
            return -1
        return max(e[0] + e[1] + e[2] for e in self._terms)

    def leading_term(self) -> Tuple[Exponent, Fraction]:
        """Largest term under graded lex (x1 > x2 > x3)."""
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self._terms, key=_grlex_key)
        return e, self._terms[e]

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other) -> "SparsePoly":
        other = self._as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        merged = dict(self._terms)
        for e, c in other._terms.items():
            s = merged.get(e, Fraction(0)) + c
            if s:
                merged[e] = s
            else:
                merged.pop(e, None)
        return self._wrap(merged)

    __radd__ = __add__

    def __neg__(self) -> "SparsePoly":
        return self._wrap({e: -c for e, c in self._terms.items()})

    def __sub__(self, other) -> "SparsePoly":
        other = self._as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "SparsePoly":
        return self._as_poly(other) + (-self)

    def __mul__(self, other) -> "SparsePoly":
        other = self._as_poly(other)
        if other is NotImplemented:
            return NotImplemented
        prod: dict[Exponent, Fraction] = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                e = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2])
                s = prod.get(e, Fraction(0)) + c1 * c2
                if s:
                    prod[e] = s
                else:
                    prod.pop(e, None)
        return self._wrap(prod)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "SparsePoly":
        if n < 0:
            raise ValueError("negative powers not defined")
        out = SparsePoly.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, SparsePoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == SparsePoly.constant(other)._terms
        return NotImplemented

    __hash__ = None  # mutable dict inside; compare by value only

    def partial(self, var: int) -> "SparsePoly":
        """Formal partial derivative with respect to x_var, var in 1..3."""
        if var not in (1, 2, 3):
            raise ValueError("variable index must be 1, 2 or 3")
        i = var - 1
        out: dict[Exponent, Fraction] = {}
        for e, c in self._terms.items():
            if e[i] == 0:
                continue
            d = list(e)
            d[i] -= 1
            out[tuple(d)] = c * e[i]
        return self._wrap(out)

    def divide(self, d: "SparsePoly") -> Tuple["SparsePoly", "SparsePoly"]:
        """Single-divisor division: self = q*d + r, exact over Q.

        No term of r is divisible by the leading term of d under graded lex,
        so r == 0 if and only if d divides self (the only property consumed
        by the invariance certificates).
        """
        if not isinstance(d, SparsePoly) or d.is_zero:
            raise ZeroDivisionError("division by zero polynomial")
        de, dc = d.leading_term()
        quot: dict[Exponent, Fraction] = {}
        rem: dict[Exponent, Fraction] = {}
        work = dict(self._terms)
        while work:
            e = max(work, key=_grlex_key)
            c = work.pop(e)
            if e[0] >= de[0] and e[1] >= de[1] and e[2] >= de[2]:
                t = (e[0] - de[0], e[1] - de[1], e[2] - de[2])
                f = c / dc
                quot[t] = quot.get(t, Fraction(0)) + f
                # work -= f * x^t * d  (leading term cancels by construction)
                for e2, c2 in d._terms.items():
                    s = (t[0] + e2[0], t[1] + e2[1], t[2] + e2[2])
                    v = work.get(s, Fraction(0)) - f * c2
                    if s == e:
                        continue
                    if v:
                        work[s] = v
                    else:
                        work.pop(s, None)
            else:
                rem[e] = c
        return self._wrap(quot), self._wrap(rem)

    # -- evaluation --------------------------------------------------------

    def evaluate(self, point: Sequence[float]) -> float:
        """Monomial-sum evaluation in floating point."""
        x1, x2, x3 = (float(v) for v in point)
        total = 0.0
        for (e1, e2, e3), c in self._terms.items():
            total += float(c) * x1**e1 * x2**e2 * x3**e3
        return total

    def evaluate_exact(self, point: Sequence[Rational]) -> Fraction:
        """Exact evaluation at a rational point."""
        x1, x2, x3 = (_coerce_coeff(v) for v in point)
        total = Fraction(0)
        for (e1, e2, e3), c in self._terms.items():
            total += c * x1**e1 * x2**e2 * x3**e3
        return total

    # -- text form ---------------------------------------------------------

    def to_string(self) -> str:
        """Canonical text form, terms in descending graded-lex order.

        Example: "-2*x1^2 - 4*x2^2 + 1/2*x3".  The zero polynomial is "0".
        """
        if not self._terms:
            return "0"
        parts = []
        for e in sorted(self._terms, key=_grlex_key, reverse=True):
            c = self._terms[e]
            mono = "*".join(
                f"x{i+1}" + (f"^{e[i]}" if e[i] > 1 else "")
                for i in range(3)
                if e[i] > 0
            )
            mag = abs(c)
            if mono and mag == 1:
                body = mono
            elif mono:
                body = f"{mag}*{mono}"
            else:
                body = str(mag)
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    @classmethod
    def from_string(cls, text: str) -> "SparsePoly":
        """Parse the canonical text form produced by `to_string`."""
        s = text.replace(" ", "")
        if not s:
            raise ValueError("empty polynomial text")
        if s == "0":
            return cls.zero()
        # split into signed chunks
        chunks = re.findall(r"[+-]?[^+-]+", s)
        terms = []
        for chunk in chunks:
            sign = Fraction(1)
            if chunk[0] == "+":
                chunk = chunk[1:]
            elif chunk[0] == "-":
                sign = Fraction(-1)
                chunk = chunk[1:]
            m = _TERM_RE.match(chunk)
            if not m or not chunk:
                raise ValueError(f"malformed polynomial term: {chunk!r}")
            coeff = Fraction(m.group("coeff")) if m.group("coeff") else Fraction(1)
            e = [0, 0, 0]
            for vm in _VAR_RE.finditer(m.group("vars") or ""):
                idx = int(vm.group("idx")) - 1
                e[idx] += int(vm.group("exp") or 1)
            terms.append((tuple(e), sign * coeff))
        return cls(terms)

    def __str__(self) -> str:
        return self.to_string()

    def __repr__(self) -> str:
        return f"SparsePoly({self.to_string()!r})"

    # -- helpers -----------------------------------------------------------

    @staticmethod
    def _as_poly(value):
        if isinstance(value, SparsePoly):
            return value
        if isinstance(value, (int, Fraction)):
            return SparsePoly.constant(value)
        return NotImplemented

    @classmethod
    def _wrap(cls, terms: dict) -> "SparsePoly":
        p = cls.__new__(cls)
        p._terms = terms
        return p


def sphere_polynomial() -> SparsePoly:
    """x1^2 + x2^2 + x3^2 - 1, the defining polynomial of the unit sphere."""
    return SparsePoly({(2, 0, 0): 1, (0, 2, 0): 1, (0, 0, 2): 1, (0, 0, 0): -1})
