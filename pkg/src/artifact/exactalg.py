"""Exact coefficient arithmetic.

Laurent polynomials over Q in a variable v (with q = v**2) and character
variables z1, z2, ...; rational functions kept with a factored denominator;
and series supported in a translated simplicial cone, together with the
constant-term functional on such series.

Exponent vectors are tuples ``(v_exp, z1_exp, z2_exp, ...)`` with trailing
zeros stripped, so ``(2,)`` and ``(2, 0, 0)`` denote the same monomial.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import zip_longest
from numbers import Rational
from typing import Iterable, Mapping, Sequence


class ExactAlgError(ArithmeticError):
    """Base class for errors raised by this module."""


class NotExpandable(ExactAlgError):
    """A denominator factor has no unit term relative to the chosen cone."""


class InsufficientOrder(ExactAlgError):
    """The truncation order of a series does not reach the requested exponent."""


class ConeMismatch(ExactAlgError):
    """Two series with different cones were combined."""


Key = tuple


def _strip(key: Iterable[int]) -> Key:
    key = list(key)
    while key and key[-1] == 0:
        key.pop()
    return tuple(key)


def _kadd(a: Key, b: Key) -> Key:
    return _strip(x + y for x, y in zip_longest(a, b, fillvalue=0))


def _kneg(a: Key) -> Key:
    return tuple(-x for x in a)


def _ksub(a: Key, b: Key) -> Key:
    return _kadd(a, _kneg(b))


def _kcmp_key(a: Key, width: int) -> tuple:
    return tuple(a) + (0,) * (width - len(a))


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    raise TypeError(f"cannot use {type(c).__name__} as an exact coefficient")


def _fmt_fraction(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Laurent:
    """Laurent polynomial with rational coefficients.

    Variable 0 is ``v``; variable ``i >= 1`` is ``z_i``. Instances are
    immutable and hashable.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Iterable[int], object] | None = None):
        clean: dict[Key, Fraction] = {}
        for k, c in (terms or {}).items():
            c = _as_fraction(c)
            if c:
                k = _strip(k)
                s = clean.get(k, Fraction(0)) + c
                if s:
                    clean[k] = s
                else:
                    clean.pop(k, None)
        self._terms = clean
        self._hash = None

    # constructors

    @classmethod
    def const(cls, c) -> "Laurent":
        return cls({(): c})

    @classmethod
    def monomial(cls, key: Iterable[int], c=1) -> "Laurent":
        return cls({tuple(key): c})

    @classmethod
    def v(cls, power: int = 1) -> "Laurent":
        return cls({(power,): 1})

    @classmethod
    def q(cls, power: int = 1) -> "Laurent":
        return cls({(2 * power,): 1})

    @classmethod
    def z(cls, index: int = 1, power: int = 1) -> "Laurent":
        if index < 1:
            raise ValueError("z variables are numbered from 1")
        return cls({(0,) * index + (power,): 1})

    @classmethod
    def var(cls, index: int, power: int = 1) -> "Laurent":
        return cls({(0,) * index + (power,): 1})

    @classmethod
    def coerce(cls, x) -> "Laurent":
        if isinstance(x, Laurent):
            return x
        return cls.const(x)

    # inspection

    @property
    def terms(self) -> dict[Key, Fraction]:
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, key: Iterable[int]) -> Fraction:
        return self._terms.get(_strip(key), Fraction(0))

    @property
    def nvars(self) -> int:
        return max((len(k) for k in self._terms), default=0)

    def is_monomial(self) -> bool:
        return len(self._terms) == 1

    def is_constant(self) -> bool:
        return not self._terms or set(self._terms) == {()}

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self._terms.get((), Fraction(0))

    def depends_only_on_v(self) -> bool:
        return all(len(k) <= 1 for k in self._terms)

    def sorted_terms(self) -> list[tuple[Key, Fraction]]:
        """Terms in descending lexicographic order of exponent vectors."""
        w = self.nvars
        return sorted(self._terms.items(), key=lambda kv: _kcmp_key(kv[0], w), reverse=True)

    def leading(self) -> tuple[Key, Fraction]:
        return self.sorted_terms()[0]

    def trailing(self) -> tuple[Key, Fraction]:
        return self.sorted_terms()[-1]

    def v_degree_range(self) -> tuple[int, int]:
        degs = [k[0] if k else 0 for k in self._terms]
        if not degs:
            raise ValueError("zero has no degree")
        return min(degs), max(degs)

    def z_support(self) -> set[Key]:
        return {_strip(k[1:]) for k in self._terms}

    # arithmetic

    def __eq__(self, other) -> bool:
        if isinstance(other, Laurent):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == Laurent.const(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def __neg__(self) -> "Laurent":
        return Laurent({k: -c for k, c in self._terms.items()})

    def __add__(self, other) -> "Laurent":
        if isinstance(other, RationalFunction):
            return NotImplemented
        other = Laurent.coerce(other)
        out = dict(self._terms)
        for k, c in other._terms.items():
            out[k] = out.get(k, 0) + c
        return Laurent(out)

    __radd__ = __add__

    def __sub__(self, other) -> "Laurent":
        if isinstance(other, RationalFunction):
            return NotImplemented
        return self + (-Laurent.coerce(other))

    def __rsub__(self, other) -> "Laurent":
        return Laurent.coerce(other) - self

    def __mul__(self, other) -> "Laurent":
        if isinstance(other, RationalFunction):
            return NotImplemented
        other = Laurent.coerce(other)
        out: dict[Key, Fraction] = {}
        for k1, c1 in self._terms.items():
            for k2, c2 in other._terms.items():
                k = _kadd(k1, k2)
                out[k] = out.get(k, 0) + c1 * c2
        return Laurent(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Laurent":
        if not isinstance(n, int):
            raise TypeError("integer exponents only")
        if n < 0:
            if not self.is_monomial():
                raise ZeroDivisionError(f"{self} is not a unit in the Laurent ring")
            (k, c), = self._terms.items()
            return Laurent({tuple(x * n for x in k): c ** n})
        result = Laurent.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return Laurent({k: c / other for k, c in self._terms.items()})
        if isinstance(other, Laurent) and other.is_monomial():
            return self * other ** -1
        return RationalFunction(self) / other

    def __rtruediv__(self, other):
        return RationalFunction(Laurent.coerce(other)) / self

    def exact_divide(self, other: "Laurent") -> "Laurent | None":
        """Quotient in the Laurent ring, or None if ``other`` does not divide."""
        if not other:
            raise ZeroDivisionError("division by zero Laurent polynomial")
        if not self:
            return Laurent()
        if other.is_monomial():
            return self * other ** -1
        w = max(self.nvars, other.nvars)
        lead_k, lead_c = other.leading()
        # exponents of a quotient lie in a box fixed by the extreme exponents
        box = []
        for i in range(w):
            fi = [k[i] if i < len(k) else 0 for k in self._terms]
            gi = [k[i] if i < len(k) else 0 for k in other._terms]
            box.append((min(fi) - min(gi), max(fi) - max(gi)))
        rem = self
        quot: dict[Key, Fraction] = {}
        while rem:
            rk, rc = rem.leading()
            qk = _ksub(rk, lead_k)
            full = _kcmp_key(qk, w)
            if any(not lo <= x <= hi for x, (lo, hi) in zip(full, box)):
                return None
            qc = rc / lead_c
            quot[qk] = quot.get(qk, 0) + qc
            rem = rem - Laurent({qk: qc}) * other
        return Laurent(quot)

    def derivative(self, index: int) -> "Laurent":
        """Partial derivative with respect to variable ``index`` (0 is v)."""
        out = {}
        for k, c in self._terms.items():
            e = k[index] if index < len(k) else 0
            if e:
                nk = list(k)
                nk[index] -= 1
                out[tuple(nk)] = c * e
        return Laurent(out)

    def substitute(self, values: Mapping[int, object]) -> "Laurent | RationalFunction":
        """Replace the listed variables by numbers, Laurent or rational elements."""
        total: object = Laurent()
        for k, c in self._terms.items():
            rest = list(k)
            factor: object = Laurent.const(c)
            for idx, val in values.items():
                e = rest[idx] if idx < len(rest) else 0
                if idx < len(rest):
                    rest[idx] = 0
                if e:
                    if isinstance(val, (int, Fraction)):
                        factor = factor * (Fraction(val) ** e)
                    else:
                        factor = factor * (val ** e)
            total = total + factor * Laurent.monomial(rest)
        if isinstance(total, RationalFunction):
            return total.simplified()
        return total

    def at_q(self, q) -> Fraction:
        """Numeric value at q (requires only even powers of v, no z)."""
        s = Fraction(0)
        for k, c in self._terms.items():
            if len(k) > 1:
                raise ValueError(f"{self} involves z variables")
            e = k[0] if k else 0
            if e % 2:
                raise ValueError(f"{self} has an odd power of v")
            s += c * Fraction(q) ** (e // 2)
        return s

    def evaluate(self, point: Sequence[object]):
        """Numeric value at ``point = (v, z1, z2, ...)``."""
        s = 0
        for k, c in self._terms.items():
            t = c
            for i, e in enumerate(k):
                if e:
                    t = t * (point[i] ** e)
            s = s + t
        return s

    # text

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        pieces = []
        for k, c in self.sorted_terms():
            factors = []
            for i, e in enumerate(k):
                if e:
                    name = "v" if i == 0 else f"z{i}"
                    factors.append(name if e == 1 else f"{name}^{e}")
            mag = abs(c)
            if factors:
                body = "*".join(factors) if mag == 1 else _fmt_fraction(mag) + "*" + "*".join(factors)
            else:
                body = _fmt_fraction(mag)
            pieces.append(("-" if c < 0 else "+", body))
        out = ("-" if pieces[0][0] == "-" else "") + pieces[0][1]
        for sign, body in pieces[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Laurent({str(self)!r})"

    def to_q_string(self) -> str:
        """Render an element with even v-powers as a polynomial in q."""
        if not self.depends_only_on_v() or any(k and k[0] % 2 for k in self._terms):
            return str(self)
        return str(Laurent({(k[0] // 2 if k else 0,): c for k, c in self._terms.items()})).replace("v", "q")


# univariate helpers for elements in v only

def _v_coeffs(p: Laurent) -> tuple[int, list[Fraction]]:
    """Shift to a polynomial in v: returns (min exponent, dense coefficients low to high)."""
    lo, hi = p.v_degree_range()
    dense = [Fraction(0)] * (hi - lo + 1)
    for k, c in p.items():
        dense[(k[0] if k else 0) - lo] = c
    return lo, dense


def _poly_divmod(a: list[Fraction], b: list[Fraction]) -> tuple[list[Fraction], list[Fraction]]:
    a = list(a)
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 1)
    while len(a) >= len(b) and any(a):
        shift = len(a) - len(b)
        f = a[-1] / b[-1]
        q[shift] = f
        for i, bc in enumerate(b):
            a[i + shift] -= f * bc
        while a and a[-1] == 0:
            a.pop()
    return q, a


def _poly_gcd(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    while b and any(b):
        _, r = _poly_divmod(a, b)
        a, b = b, r
    lead = a[-1]
    return [c / lead for c in a]


def _dense_to_laurent(lo: int, dense: Sequence[Fraction]) -> Laurent:
    return Laurent({(lo + i,): c for i, c in enumerate(dense) if c})


def _normalize_factor(f: Laurent) -> tuple[Laurent, Laurent]:
    """Write f = unit_monomial * g with g having lowest term 1; return (monomial, g)."""
    k, c = f.trailing()
    mono = Laurent({k: c})
    return mono, f * mono ** -1


class RationalFunction:
    """Quotient of a Laurent numerator by a product of Laurent factors.

    Denominator factors are stored individually so that cone expansion can
    treat each factor on its own. Monomials are absorbed into the numerator.
    Equality is decided by cross-multiplication; elements in v alone are kept
    reduced by a univariate gcd.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den: Laurent | Sequence[Laurent] | None = None):
        num = Laurent.coerce(num)
        if den is None:
            factors: list[Laurent] = []
        elif isinstance(den, (Laurent, int, Fraction)):
            factors = [Laurent.coerce(den)]
        else:
            factors = [Laurent.coerce(d) for d in den]
        kept = []
        for d in factors:
            if not d:
                raise ZeroDivisionError("zero denominator")
            mono, g = _normalize_factor(d)
            num = num * mono ** -1
            if g != 1:
                kept.append(g)
        self.num = num
        self.den = tuple(kept)
        self._cancel()

    @classmethod
    def _raw(cls, num: Laurent, den: tuple) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        return obj

    def _cancel(self) -> None:
        if not self.num:
            self.den = ()
            return
        if not self.den:
            return
        if self.num.depends_only_on_v() and all(d.depends_only_on_v() for d in self.den):
            self._reduce_univariate()
            return
        kept = []
        num = self.num
        for d in self.den:
            quo = num.exact_divide(d)
            if quo is None:
                kept.append(d)
            else:
                num = quo
        self.num = num
        self.den = tuple(kept)

    def _reduce_univariate(self) -> None:
        den = Laurent.const(1)
        for d in self.den:
            den = den * d
        nlo, ndense = _v_coeffs(self.num)
        dlo, ddense = _v_coeffs(den)
        g = _poly_gcd(ndense, ddense)
        if len(g) > 1:
            ndense, _ = _poly_divmod(ndense, g)
            ddense, _ = _poly_divmod(ddense, g)
        num = _dense_to_laurent(nlo, ndense)
        den = _dense_to_laurent(dlo, ddense)
        mono, den = _normalize_factor(den)
        self.num = num * mono ** -1
        self.den = () if den == 1 else (den,)

    # construction helpers

    @classmethod
    def coerce(cls, x) -> "RationalFunction":
        if isinstance(x, RationalFunction):
            return x
        return cls(Laurent.coerce(x))

    def denominator(self) -> Laurent:
        out = Laurent.const(1)
        for d in self.den:
            out = out * d
        return out

    def is_laurent(self) -> bool:
        return not self.den

    def as_laurent(self) -> Laurent:
        if self.den:
            raise ValueError(f"{self} is not a Laurent polynomial")
        return self.num

    def simplified(self) -> "Laurent | RationalFunction":
        return self.num if not self.den else self

    def depends_only_on_v(self) -> bool:
        return self.num.depends_only_on_v() and all(d.depends_only_on_v() for d in self.den)

    def __bool__(self) -> bool:
        return bool(self.num)

    # arithmetic

    def __eq__(self, other) -> bool:
        if isinstance(other, (Laurent, int, Fraction)):
            other = RationalFunction(Laurent.coerce(other))
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num * other.denominator() == other.num * self.denominator()

    __hash__ = None

    def __neg__(self) -> "RationalFunction":
        return RationalFunction._raw(-self.num, self.den)

    def __add__(self, other) -> "RationalFunction":
        other = RationalFunction.coerce(other)
        if not other.num:
            return self
        if not self.num:
            return other
        # lcm of the factor multisets
        remaining = list(other.den)
        common = []
        extra_for_other = []
        for d in self.den:
            if d in remaining:
                remaining.remove(d)
                common.append(d)
            else:
                extra_for_other.append(d)
        extra_for_self = remaining
        num = self.num
        for d in extra_for_self:
            num = num * d
        onum = other.num
        for d in extra_for_other:
            onum = onum * d
        return RationalFunction(num + onum, tuple(self.den) + tuple(extra_for_self))

    __radd__ = __add__

    def __sub__(self, other) -> "RationalFunction":
        return self + (-RationalFunction.coerce(other))

    def __rsub__(self, other) -> "RationalFunction":
        return RationalFunction.coerce(other) - self

    def __mul__(self, other) -> "RationalFunction":
        other = RationalFunction.coerce(other)
        if not self.num or not other.num:
            return RationalFunction(Laurent())
        return RationalFunction(self.num * other.num, self.den + other.den)

    __rmul__ = __mul__

    def inverse(self) -> "RationalFunction":
        if not self.num:
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.denominator(), (self.num,))

    def __truediv__(self, other) -> "RationalFunction":
        return self * RationalFunction.coerce(other).inverse()

    def __rtruediv__(self, other) -> "RationalFunction":
        return RationalFunction.coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return self.inverse() ** (-n)
        out = RationalFunction(Laurent.const(1))
        for _ in range(n):
            out = out * self
        return out

    # evaluation

    def substitute(self, values: Mapping[int, object]) -> "RationalFunction":
        num = RationalFunction.coerce(self.num.substitute(values))
        for d in self.den:
            dv = RationalFunction.coerce(d.substitute(values))
            if not dv:
                raise ZeroDivisionError("denominator vanishes at the substituted point")
            num = num / dv
        return num

    def evaluate(self, point: Sequence[object]):
        den = 1
        for d in self.den:
            den = den * d.evaluate(point)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the point")
        return self.num.evaluate(point) / den

    def at_q(self, q) -> Fraction:
        den = Fraction(1)
        for d in self.den:
            den *= d.at_q(q)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at this q")
        return self.num.at_q(q) / den

    def __str__(self) -> str:
        if not self.den:
            return str(self.num)
        dens = "*".join(f"({d})" for d in self.den)
        return f"({self.num})/{dens}"

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"

    def to_q_string(self) -> str:
        if not self.den:
            return self.num.to_q_string()
        dens = "*".join(f"({d.to_q_string()})" for d in self.den)
        return f"({self.num.to_q_string()})/{dens}"


def q_rational(num: Laurent | int, den: Laurent | int = 1) -> RationalFunction:
    """Convenience constructor for an element of Q(v)."""
    return RationalFunction(Laurent.coerce(num), Laurent.coerce(den))


Q = Laurent.q()
V = Laurent.v()


class Cone:
    """Simplicial full-rank cone in Z^r given by r generators.

    The degree of an exponent is the sum of its coordinates in the generator
    basis; the cone is the set of exponents with all coordinates >= 0.
    """

    def __init__(self, generators: Sequence[Sequence[int]]):
        gens = [tuple(int(x) for x in g) for g in generators]
        r = len(gens)
        if r == 0 or any(len(g) != r for g in gens):
            raise ValueError("a cone needs r generators in Z^r")
        self.generators = tuple(gens)
        self.rank = r
        self._inv = _rational_inverse([[Fraction(x) for x in g] for g in gens])

    @classmethod
    def positive(cls, rank: int = 1) -> "Cone":
        return cls([tuple(int(i == j) for j in range(rank)) for i in range(rank)])

    @classmethod
    def negative(cls, rank: int = 1) -> "Cone":
        return cls([tuple(-int(i == j) for j in range(rank)) for i in range(rank)])

    def coordinates(self, e: Sequence[int]) -> tuple[Fraction, ...]:
        e = tuple(e) + (0,) * (self.rank - len(e))
        # e = sum c_i g_i  <=>  c = e * G^{-1}
        return tuple(sum(Fraction(e[j]) * self._inv[j][i] for j in range(self.rank)) for i in range(self.rank))

    def degree(self, e: Sequence[int]) -> Fraction:
        return sum(self.coordinates(e), Fraction(0))

    def contains(self, e: Sequence[int]) -> bool:
        return all(c >= 0 for c in self.coordinates(e))

    def __eq__(self, other) -> bool:
        return isinstance(other, Cone) and self.generators == other.generators

    def __hash__(self) -> int:
        return hash(self.generators)

    def __repr__(self) -> str:
        return f"Cone({list(self.generators)})"


def _rational_inverse(m: list[list[Fraction]]) -> list[list[Fraction]]:
    n = len(m)
    aug = [row[:] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("cone generators are linearly dependent")
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _vrat(x) -> RationalFunction:
    rf = RationalFunction.coerce(x)
    if not rf.depends_only_on_v():
        raise ValueError(f"coefficient {rf} involves z")
    return rf


class ConeSeries:
    """Series in z supported in ``offset + cone``, exact up to an absolute degree.

    ``order`` is the largest cone degree for which coefficients are known
    exactly; every term of degree <= order is present (missing means zero).
    Coefficients are rational functions of v.
    """

    def __init__(self, cone: Cone, coeffs: Mapping[Sequence[int], object], order, offset: Sequence | None = None):
        self.cone = cone
        self.order = Fraction(order)
        clean: dict[tuple, RationalFunction] = {}
        for e, c in coeffs.items():
            e = tuple(e) + (0,) * (cone.rank - len(tuple(e)))
            if cone.degree(e) > self.order:
                continue
            c = _vrat(c)
            if c:
                clean[e] = c
        self.coeffs = clean
        if offset is None:
            if clean:
                coords = [cone.coordinates(e) for e in clean]
                offset = tuple(min(c[i] for c in coords) for i in range(cone.rank))
            else:
                offset = (Fraction(0),) * cone.rank
        # offset is stored in cone coordinates
        self.offset = tuple(Fraction(x) for x in offset)
        for e in clean:
            if any(c < o for c, o in zip(cone.coordinates(e), self.offset)):
                raise ValueError(f"term z^{e} lies outside offset + cone")

    @property
    def min_degree(self) -> Fraction:
        return sum(self.offset, Fraction(0))

    def coefficient(self, e: Sequence[int]) -> RationalFunction:
        e = tuple(e) + (0,) * (self.cone.rank - len(tuple(e)))
        if self.cone.degree(e) > self.order:
            raise InsufficientOrder(f"degree of z^{e} exceeds truncation order {self.order}")
        return self.coeffs.get(e, RationalFunction(Laurent()))

    def _check(self, other: "ConeSeries") -> None:
        if not isinstance(other, ConeSeries):
            raise TypeError("cone series arithmetic needs two cone series")
        if other.cone != self.cone:
            raise ConeMismatch(f"{self.cone} vs {other.cone}")

    def __add__(self, other: "ConeSeries") -> "ConeSeries":
        self._check(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        offset = tuple(min(a, b) for a, b in zip(self.offset, other.offset))
        return ConeSeries(self.cone, out, min(self.order, other.order), offset)

    def __neg__(self) -> "ConeSeries":
        return ConeSeries(self.cone, {e: -c for e, c in self.coeffs.items()}, self.order, self.offset)

    def __sub__(self, other: "ConeSeries") -> "ConeSeries":
        return self + (-other)

    def scale(self, c) -> "ConeSeries":
        c = _vrat(c)
        return ConeSeries(self.cone, {e: x * c for e, x in self.coeffs.items()}, self.order, self.offset)

    def __mul__(self, other: "ConeSeries") -> "ConeSeries":
        self._check(other)
        order = min(self.order + other.min_degree, other.order + self.min_degree)
        out: dict[tuple, RationalFunction] = {}
        for e1, c1 in self.coeffs.items():
            d1 = self.cone.degree(e1)
            for e2, c2 in other.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if d1 + self.cone.degree(e2) > order:
                    continue
                out[e] = out[e] + c1 * c2 if e in out else c1 * c2
        offset = tuple(a + b for a, b in zip(self.offset, other.offset))
        return ConeSeries(self.cone, out, order, offset)

    def truncate(self, order) -> "ConeSeries":
        order = min(Fraction(order), self.order)
        return ConeSeries(self.cone, self.coeffs, order, self.offset)

    def agrees_with(self, other: "ConeSeries") -> bool:
        """Equality of coefficients up to the smaller truncation order."""
        self._check(other)
        order = min(self.order, other.order)
        keys = set(self.coeffs) | set(other.coeffs)
        zero = RationalFunction(Laurent())
        for e in keys:
            if self.cone.degree(e) <= order and self.coeffs.get(e, zero) != other.coeffs.get(e, zero):
                return False
        return True

    def __str__(self) -> str:
        w = self.cone.rank
        parts = []
        for e in sorted(self.coeffs, key=lambda k: (self.cone.degree(k), k)):
            mono = "*".join(f"z{i + 1}^{x}" for i, x in enumerate(e) if x) or "1"
            parts.append(f"({self.coeffs[e]})*{mono}")
        body = " + ".join(parts) if parts else "0"
        return f"{body} + O(deg>{self.order})" if w else body

    def __repr__(self) -> str:
        return f"ConeSeries({self})"


def _split_by_z(f: Laurent, rank: int) -> dict[tuple, RationalFunction]:
    groups: dict[tuple, Laurent] = {}
    for k, c in f.items():
        v_exp = k[0] if k else 0
        z = tuple(k[1:]) + (0,) * (rank - max(len(k) - 1, 0))
        if len(z) > rank:
            raise ValueError(f"{f} uses more than {rank} z variables")
        groups[z] = groups.get(z, Laurent()) + Laurent({(v_exp,): c})
    return {z: RationalFunction(c) for z, c in groups.items()}


def _series_of_laurent(f: Laurent, cone: Cone, order) -> ConeSeries:
    parts = _split_by_z(f, cone.rank)
    if not parts:
        return ConeSeries(cone, {}, order)
    coords = [cone.coordinates(e) for e in parts]
    offset = tuple(min(c[i] for c in coords) for i in range(cone.rank))
    return ConeSeries(cone, parts, order, offset)


def _geometric_inverse(d: Laurent, cone: Cone, budget: Fraction) -> tuple[tuple, RationalFunction, ConeSeries]:
    """Write 1/d = c^{-1} z^{-m} * S with S = sum E^k; S truncated at relative degree ``budget``."""
    parts = _split_by_z(d, cone.rank)
    anchor = None
    for m in parts:
        ok = True
        for e in parts:
            if e == m:
                continue
            diff = tuple(a - b for a, b in zip(e, m))
            if not cone.contains(diff):
                ok = False
                break
        if ok:
            anchor = m
            break
    if anchor is None:
        raise NotExpandable(f"factor {d} has no term dominating the others in {cone}")
    c = parts[anchor]
    e_terms = {}
    for e, ce in parts.items():
        if e != anchor:
            e_terms[tuple(a - b for a, b in zip(e, anchor))] = -ce / c
    zero_offset = (Fraction(0),) * cone.rank
    step = ConeSeries(cone, e_terms, budget, zero_offset)
    total = ConeSeries(cone, {(0,) * cone.rank: 1}, budget, zero_offset)
    power = total
    min_step = min((cone.degree(e) for e in e_terms), default=None)
    if min_step is not None:
        k = 0
        while (k + 1) * min_step <= budget:
            power = power * step
            power = ConeSeries(cone, power.coeffs, budget, zero_offset)
            total = total + power
            k += 1
    return anchor, c, ConeSeries(cone, total.coeffs, budget, zero_offset)


def cone_expand(f, cone: Cone, order) -> ConeSeries:
    """Expand a rational function into a cone-supported series up to degree ``order``.

    >>> z = Laurent.z()
    >>> str(cone_expand(1 / (1 - z), Cone.positive(), 3).coeffs[(3,)])
    '1'
    """
    f = RationalFunction.coerce(f)
    order = Fraction(order)
    prefactor = f.num
    inverses = []
    for d in f.den:
        inverses.append(d)
    # first pass: anchors and the monomial prefactor
    anchors = []
    for d in inverses:
        anchor, c, _ = _geometric_inverse(d, cone, Fraction(0))
        anchors.append((anchor, c))
        prefactor = prefactor * Laurent.monomial((0,) + tuple(-x for x in anchor))
    pre_series = _series_of_laurent(prefactor, cone, order)
    for _, c in anchors:
        pre_series = pre_series.scale(c.inverse())
    budget = order - pre_series.min_degree if pre_series.coeffs else Fraction(0)
    result = pre_series
    if budget < 0:
        return ConeSeries(cone, {}, order, pre_series.offset)
    for d in inverses:
        _, _, s = _geometric_inverse(d, cone, budget)
        result = result * s
    return ConeSeries(cone, result.coeffs, order, pre_series.offset)


def const_term(s: ConeSeries) -> RationalFunction:
    """Coefficient of z^0 of a cone series."""
    if s.order < 0 or s.cone.degree((0,) * s.cone.rank) > s.order:
        raise InsufficientOrder(f"order {s.order} does not cover the zero exponent")
    return s.coeffs.get((0,) * s.cone.rank, RationalFunction(Laurent()))


def partial_const_term(s: ConeSeries, variables: Iterable[int]) -> ConeSeries:
    """Keep the terms whose exponents vanish in the listed z variables (1-based)."""
    idx = [i - 1 for i in variables]
    kept = {e: c for e, c in s.coeffs.items() if all(e[i] == 0 for i in idx)}
    return ConeSeries(s.cone, kept, s.order, s.offset)
