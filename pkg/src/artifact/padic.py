"""Finite-precision p-adic scalars and locally constant functions at finite level.

A :class:`LevelFunction` on F^n (F = Q_p) with window M and level N is
constant on the cells ``a * p^-M + p^N O^n`` for integer index vectors ``a``
taken modulo ``p^(M+N)``, and vanishes outside ``p^-M O^n``. Haar measure is
normalized by vol(O^n) = 1, so every cell has measure ``p^(-n N)``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from itertools import product
from typing import Callable, Mapping, Sequence


DEFAULT_WINDOW_CAP = 8
DEFAULT_LEVEL_CAP = 8


class PAdicError(ArithmeticError):
    pass


class WindowOverflow(PAdicError):
    """The result does not fit in the configured window or level caps."""


class PrecisionLoss(PAdicError):
    """An operation needs more precision than the operands carry."""


def valuation(x, p: int) -> float | int:
    """p-adic valuation of an integer or Fraction (inf for zero)."""
    x = Fraction(x)
    if x == 0:
        return float("inf")
    v = 0
    n, d = x.numerator, x.denominator
    while n % p == 0:
        n //= p
        v += 1
    while d % p == 0:
        d //= p
        v -= 1
    return v


def unit_part(x, p: int) -> Fraction:
    x = Fraction(x)
    return x / Fraction(p) ** valuation(x, p)


def residue(x, p: int, k: int) -> int:
    """The class of a p-integral rational modulo p^k."""
    x = Fraction(x)
    mod = p ** k
    if x.denominator % p == 0:
        raise ValueError(f"{x} is not p-integral for p={p}")
    return x.numerator * pow(x.denominator, -1, mod) % mod


class PAdicScalar:
    """p^val * (unit + O(p^prec)) with 0 <= unit < p^prec coprime to p.

    Zero is stored with ``val = None``; its ``prec`` is then the absolute
    precision (``None`` for an exact zero).
    """

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p: int, val: int | None, unit: int, prec: int | None):
        self.p = p
        self.val = val
        if val is None:
            self.unit = 0
            self.prec = prec
            return
        if prec is None or prec <= 0:
            raise PrecisionLoss("nonzero p-adic scalar needs positive relative precision")
        unit %= p ** prec
        if unit % p == 0:
            raise ValueError("unit part must be coprime to p")
        self.unit = unit
        self.prec = prec

    @classmethod
    def from_rational(cls, x, p: int, prec: int = 20) -> "PAdicScalar":
        x = Fraction(x)
        if x == 0:
            return cls(p, None, 0, None)
        v = valuation(x, p)
        return cls(p, v, residue(unit_part(x, p), p, prec), prec)

    @classmethod
    def uniformizer(cls, p: int, power: int = 1, prec: int = 20) -> "PAdicScalar":
        return cls(p, power, 1, prec)

    def is_zero(self) -> bool:
        return self.val is None

    @property
    def absolute_precision(self) -> float | int:
        if self.val is None:
            return float("inf") if self.prec is None else self.prec
        return self.val + self.prec

    def norm(self) -> Fraction:
        return Fraction(0) if self.val is None else Fraction(self.p) ** (-self.val)

    def to_rational(self) -> Fraction:
        """The canonical representative p^val * unit."""
        if self.val is None:
            return Fraction(0)
        return Fraction(self.p) ** self.val * self.unit

    def _check(self, other: "PAdicScalar") -> None:
        if other.p != self.p:
            raise ValueError("p-adic scalars for different primes")

    def _coerce(self, other) -> "PAdicScalar":
        if isinstance(other, PAdicScalar):
            self._check(other)
            return other
        return PAdicScalar.from_rational(other, self.p, max(self.prec or 20, 20))

    def __add__(self, other) -> "PAdicScalar":
        other = self._coerce(other)
        if self.val is None and self.prec is None:
            return other
        if other.val is None and other.prec is None:
            return self
        cap = min(self.absolute_precision, other.absolute_precision)
        vals = [x.val for x in (self, other) if x.val is not None]
        m = min(vals) if vals else cap
        if cap == float("inf"):
            raise PrecisionLoss("cannot add without a finite precision")
        if m >= cap:
            return PAdicScalar(self.p, None, 0, int(cap))
        mod = self.p ** int(cap - m)
        total = 0
        for x in (self, other):
            if x.val is not None:
                total += x.unit * self.p ** (x.val - m)
        total %= mod
        if total == 0:
            return PAdicScalar(self.p, None, 0, int(cap))
        v = 0
        while total % self.p == 0:
            total //= self.p
            v += 1
        val = m + v
        return PAdicScalar(self.p, val, total, int(cap - val))

    __radd__ = __add__

    def __neg__(self) -> "PAdicScalar":
        if self.val is None:
            return self
        return PAdicScalar(self.p, self.val, -self.unit, self.prec)

    def __sub__(self, other) -> "PAdicScalar":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "PAdicScalar":
        return self._coerce(other) - self

    def __mul__(self, other) -> "PAdicScalar":
        other = self._coerce(other)
        if self.val is None or other.val is None:
            a = self.absolute_precision if self.val is None else float("inf")
            b = other.absolute_precision if other.val is None else float("inf")
            # O(p^A) * y has absolute precision A + val(y)
            ya = a + (other.val if other.val is not None else 0) if self.val is None else float("inf")
            yb = b + (self.val if self.val is not None else 0) if other.val is None else float("inf")
            cap = min(ya, yb)
            return PAdicScalar(self.p, None, 0, None if cap == float("inf") else int(cap))
        prec = min(self.prec, other.prec)
        return PAdicScalar(self.p, self.val + other.val, self.unit * other.unit, prec)

    __rmul__ = __mul__

    def inverse(self) -> "PAdicScalar":
        if self.val is None:
            raise ZeroDivisionError("inverse of a p-adic zero")
        mod = self.p ** self.prec
        return PAdicScalar(self.p, -self.val, pow(self.unit, -1, mod), self.prec)

    def __truediv__(self, other) -> "PAdicScalar":
        return self * self._coerce(other).inverse()

    def __rtruediv__(self, other) -> "PAdicScalar":
        return self._coerce(other) * self.inverse()

    def __pow__(self, n: int) -> "PAdicScalar":
        if n < 0:
            return self.inverse() ** (-n)
        out = PAdicScalar(self.p, 0, 1, self.prec or 20)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, (PAdicScalar, int, Fraction)):
            return NotImplemented
        diff = self - self._coerce(other)
        return diff.val is None

    __hash__ = None

    def __repr__(self) -> str:
        if self.val is None:
            return f"O({self.p}^{self.prec})" if self.prec is not None else "0"
        return f"{self.p}^{self.val}*({self.unit} + O({self.p}^{self.prec}))"


def _as_point(x: Sequence) -> tuple[Fraction, ...]:
    out = []
    for c in x:
        out.append(c.to_rational() if isinstance(c, PAdicScalar) else Fraction(c))
    return tuple(out)


class LevelFunction:
    """Locally constant compactly supported function on F^n at finite level.

    ``values`` maps index tuples ``a`` (entries in range(p**(M+N))) to
    values; missing cells are zero. ``mode`` is "rational" or "complex".
    """

    __slots__ = ("p", "n", "M", "N", "values", "mode", "window_cap", "level_cap")

    def __init__(
        self,
        p: int,
        n: int,
        M: int,
        N: int,
        values: Mapping[Sequence[int], object] | None = None,
        mode: str = "rational",
        window_cap: int = DEFAULT_WINDOW_CAP,
        level_cap: int = DEFAULT_LEVEL_CAP,
    ):
        if M + N < 0:
            raise ValueError("window and level must satisfy M + N >= 0")
        if mode not in ("rational", "complex"):
            raise ValueError(f"unknown value mode {mode!r}")
        self.p, self.n, self.M, self.N = p, n, M, N
        self.mode = mode
        self.window_cap = window_cap
        self.level_cap = level_cap
        mod = p ** (M + N)
        clean = {}
        for a, val in (values or {}).items():
            a = tuple(int(x) % mod for x in a)
            if len(a) != n:
                raise ValueError(f"index {a} has wrong dimension")
            val = Fraction(val) if mode == "rational" else complex(val)
            if val != 0:
                clean[a] = clean.get(a, 0) + val
                if clean[a] == 0:
                    del clean[a]
        self.values = clean

    # constructors

    @classmethod
    def zero(cls, p: int, n: int, M: int = 0, N: int = 0, mode: str = "rational") -> "LevelFunction":
        return cls(p, n, M, N, {}, mode)

    @classmethod
    def indicator_ball(cls, p: int, n: int, radius_val: int = 0, center: Sequence | None = None, value=1, mode: str = "rational") -> "LevelFunction":
        """Indicator of center + p^radius_val O^n (value times it)."""
        center = _as_point(center) if center is not None else (Fraction(0),) * n
        cv = min((valuation(c, p) for c in center), default=float("inf"))
        M = max(-radius_val, 0, -int(cv) if cv != float("inf") else 0)
        N = radius_val
        if M + N < 0:
            M = -N
        a = tuple(residue(c * Fraction(p) ** M, p, M + N) if M + N > 0 else 0 for c in center)
        return cls(p, n, M, N, {a: value}, mode)

    @classmethod
    def from_callable(cls, p: int, n: int, M: int, N: int, func: Callable[[tuple[Fraction, ...]], object], mode: str = "rational") -> "LevelFunction":
        """Sample func at one point per cell (func must be constant on cells)."""
        mod = p ** (M + N)
        scale = Fraction(p) ** (-M)
        vals = {}
        for a in product(range(mod), repeat=n):
            val = func(tuple(x * scale for x in a))
            if val:
                vals[a] = val
        return cls(p, n, M, N, vals, mode)

    @classmethod
    def random(cls, rng: random.Random, p: int, n: int, M: int, N: int, density: float = 0.3, values: Sequence[int] = (-3, -2, -1, 1, 2, 3), mode: str = "rational") -> "LevelFunction":
        mod = p ** (M + N)
        vals = {}
        for a in product(range(mod), repeat=n):
            if rng.random() < density:
                vals[a] = rng.choice(values)
        return cls(p, n, M, N, vals, mode)

    def with_values(self, values: Mapping) -> "LevelFunction":
        return LevelFunction(self.p, self.n, self.M, self.N, values, self.mode, self.window_cap, self.level_cap)

    # basic queries

    @property
    def modulus(self) -> int:
        return self.p ** (self.M + self.N)

    def cell_measure(self) -> Fraction:
        return Fraction(self.p) ** (-self.n * self.N)

    def cell_point(self, a: Sequence[int]) -> tuple[Fraction, ...]:
        scale = Fraction(self.p) ** (-self.M)
        return tuple(x * scale for x in a)

    def index_of(self, x: Sequence) -> tuple[int, ...] | None:
        """Cell index of a point, or None if the point is outside the window."""
        x = _as_point(x)
        out = []
        mod = self.modulus
        shift = Fraction(self.p) ** self.M
        for c in x:
            y = c * shift
            if y == 0:
                out.append(0)
                continue
            if y.denominator % self.p == 0:
                return None
            out.append(y.numerator * pow(y.denominator, -1, mod) % mod if mod > 1 else 0)
        return tuple(out)

    def __call__(self, x: Sequence):
        a = self.index_of(x)
        if a is None:
            return Fraction(0) if self.mode == "rational" else 0j
        return self.values.get(a, Fraction(0) if self.mode == "rational" else 0j)

    def haar_integral(self):
        total = sum(self.values.values(), Fraction(0) if self.mode == "rational" else 0j)
        return total * self.cell_measure() if self.mode == "rational" else total * float(self.cell_measure())

    def __bool__(self) -> bool:
        return bool(self.values)

    def support_size(self) -> int:
        return len(self.values)

    # level changes

    def refine(self, N_new: int) -> "LevelFunction":
        if N_new < self.N:
            raise ValueError("refine only goes to finer levels")
        if N_new > self.level_cap:
            raise WindowOverflow(f"level {N_new} exceeds cap {self.level_cap}")
        k = N_new - self.N
        if k == 0:
            return self
        old_mod = self.modulus
        step = self.p ** k
        vals = {}
        for a, val in self.values.items():
            for js in product(range(step), repeat=self.n):
                vals[tuple(x + j * old_mod for x, j in zip(a, js))] = val
        return LevelFunction(self.p, self.n, self.M, N_new, vals, self.mode, self.window_cap, self.level_cap)

    def extend_window(self, M_new: int) -> "LevelFunction":
        if M_new < self.M:
            raise ValueError("extend_window only enlarges the window")
        if M_new > self.window_cap:
            raise WindowOverflow(f"window {M_new} exceeds cap {self.window_cap}")
        k = M_new - self.M
        if k == 0:
            return self
        f = self.p ** k
        vals = {tuple(x * f for x in a): val for a, val in self.values.items()}
        return LevelFunction(self.p, self.n, M_new, self.N, vals, self.mode, self.window_cap, self.level_cap)

    def to_grid(self, M: int, N: int) -> "LevelFunction":
        """Same function on a finer grid (M >= self.M, N >= self.N)."""
        return self.extend_window(M).refine(N)

    def normalized(self) -> "LevelFunction":
        """Coarsest level and smallest window carrying the same function."""
        f = self
        # shrink window while the support stays inside p^{-(M-1)} O^n
        while f.M + f.N > 0 and all(all(x % f.p == 0 for x in a) for a in f.values):
            vals = {tuple(x // f.p for x in a): val for a, val in f.values.items()}
            f = LevelFunction(f.p, f.n, f.M - 1, f.N, vals, f.mode, f.window_cap, f.level_cap)
        # coarsen while every coarse cell is constant
        while f.M + f.N > 0:
            coarse_mod = f.p ** (f.M + f.N - 1)
            groups: dict[tuple, list] = {}
            for a, val in f.values.items():
                groups.setdefault(tuple(x % coarse_mod for x in a), []).append(val)
            full = f.p ** f.n
            if all(len(vs) == full and all(v == vs[0] for v in vs) for vs in groups.values()):
                vals = {k: vs[0] for k, vs in groups.items()}
                f = LevelFunction(f.p, f.n, f.M, f.N - 1, vals, f.mode, f.window_cap, f.level_cap)
            else:
                break
        if not f.values:
            return LevelFunction(f.p, f.n, 0, 0, {}, f.mode, f.window_cap, f.level_cap)
        return f

    def _aligned(self, other: "LevelFunction") -> tuple["LevelFunction", "LevelFunction"]:
        if (self.p, self.n) != (other.p, other.n):
            raise ValueError("functions on different spaces")
        M, N = max(self.M, other.M), max(self.N, other.N)
        caps = max(self.window_cap, other.window_cap), max(self.level_cap, other.level_cap)
        a = LevelFunction(self.p, self.n, self.M, self.N, self.values, self.mode, *caps)
        b = LevelFunction(other.p, other.n, other.M, other.N, other.values, other.mode, *caps)
        return a.to_grid(M, N), b.to_grid(M, N)

    # linear structure

    def __add__(self, other: "LevelFunction") -> "LevelFunction":
        a, b = self._aligned(other)
        mode = "complex" if "complex" in (a.mode, b.mode) else "rational"
        vals = dict(a.values)
        for k, val in b.values.items():
            vals[k] = vals.get(k, 0) + val
        return LevelFunction(a.p, a.n, a.M, a.N, vals, mode, a.window_cap, a.level_cap)

    def scale(self, c) -> "LevelFunction":
        if self.mode == "rational" and isinstance(c, (int, Fraction)):
            return self.with_values({a: val * c for a, val in self.values.items()})
        return LevelFunction(self.p, self.n, self.M, self.N, {a: complex(val) * c for a, val in self.values.items()}, "complex", self.window_cap, self.level_cap)

    def __neg__(self) -> "LevelFunction":
        return self.scale(-1)

    def __sub__(self, other: "LevelFunction") -> "LevelFunction":
        return self + (-other)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def equals(self, other: "LevelFunction", tol: float = 0.0) -> bool:
        a, b = self._aligned(other)
        keys = set(a.values) | set(b.values)
        for k in keys:
            d = a.values.get(k, 0) - b.values.get(k, 0)
            if abs(d) > tol:
                return False
        return True

    def __eq__(self, other) -> bool:
        if not isinstance(other, LevelFunction):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def as_complex(self) -> "LevelFunction":
        return LevelFunction(self.p, self.n, self.M, self.N, {a: complex(v) for a, v in self.values.items()}, "complex", self.window_cap, self.level_cap)

    def map_values(self, func: Callable) -> "LevelFunction":
        return self.with_values({a: func(v) for a, v in self.values.items()})

    # text

    def dump(self) -> str:
        lines = [f"LevelFunction p={self.p} n={self.n} M={self.M} N={self.N} mode={self.mode}"]
        for a in sorted(self.values):
            val = self.values[a]
            txt = str(val) if self.mode == "rational" else f"{val.real:.12g}{val.imag:+.12g}j"
            lines.append(",".join(str(x) for x in a) + " : " + txt)
        return "\n".join(lines)

    def __repr__(self) -> str:
        return f"<LevelFunction p={self.p} n={self.n} M={self.M} N={self.N} cells={len(self.values)}>"


def haar_integral(f: LevelFunction):
    return f.haar_integral()


def refine(f: LevelFunction, N_new: int) -> LevelFunction:
    return f.refine(N_new)


def dilate(f: LevelFunction, t, window_cap: int | None = None, level_cap: int | None = None) -> LevelFunction:
    """(t.f)(x) = f(t^{-1} x), computed by re-indexing cells exactly."""
    p = f.p
    if not isinstance(t, PAdicScalar):
        t = PAdicScalar.from_rational(t, p, max(f.M + f.N, 1) + 2)
    if t.is_zero():
        raise ValueError("dilation by zero")
    if t.p != p:
        raise ValueError("dilation parameter for a different prime")
    k = t.val
    mod = f.modulus
    if mod > 1 and t.prec < f.M + f.N:
        raise PrecisionLoss(f"dilation needs {f.M + f.N} digits of the unit, have {t.prec}")
    u = t.unit % mod if mod > 1 else 0
    vals = {tuple(x * u % mod for x in a): val for a, val in f.values.items()} if mod > 1 else dict(f.values)
    wcap = f.window_cap if window_cap is None else window_cap
    lcap = f.level_cap if level_cap is None else level_cap
    M_new, N_new = f.M - k, f.N + k
    # allow temporarily out-of-range M/N before normalizing
    out = LevelFunction.__new__(LevelFunction)
    out.p, out.n, out.M, out.N = p, f.n, M_new, N_new
    out.values, out.mode = vals, f.mode
    out.window_cap, out.level_cap = wcap, lcap
    out = out.normalized()
    if out.M > wcap or out.N > lcap:
        raise WindowOverflow(f"dilated function needs window {out.M} and level {out.N}")
    if out.M < 0 or out.N < 0:
        # re-express on a grid with non-negative parameters
        out = _nonnegative_grid(out)
    return out


def _nonnegative_grid(f: LevelFunction) -> LevelFunction:
    g = f
    if g.M < 0:
        # shift the window up to 0: multiply indices by p^{-M}
        k = -g.M
        fac = g.p ** k
        g = _raw(g, 0, g.N, {tuple(x * fac for x in a): v for a, v in g.values.items()})
    if g.N < 0:
        k = -g.N
        old_mod = g.modulus
        step = g.p ** k
        vals = {}
        for a, v in g.values.items():
            for js in product(range(step), repeat=g.n):
                vals[tuple(x + j * old_mod for x, j in zip(a, js))] = v
        g = _raw(g, g.M, 0, vals)
    return g


def _raw(f: LevelFunction, M: int, N: int, values: dict) -> LevelFunction:
    out = LevelFunction.__new__(LevelFunction)
    out.p, out.n, out.M, out.N = f.p, f.n, M, N
    out.values, out.mode = values, f.mode
    out.window_cap, out.level_cap = f.window_cap, f.level_cap
    return out


def integrate_line(f: LevelFunction, base: Sequence, direction: Sequence) -> object:
    """Exact value of the integral over t in F of f(base + t * direction), dt with vol(O) = 1."""
    base = _as_point(base)
    direction = _as_point(direction)
    p = f.p
    zero = Fraction(0) if f.mode == "rational" else 0j
    moving = [i for i, d in enumerate(direction) if d != 0]
    if not moving:
        raise ValueError("line integral along the zero vector")
    for i, d in enumerate(direction):
        if d == 0 and base[i] != 0 and valuation(base[i], p) < -f.M:
            return zero
    vals = {i: valuation(direction[i], p) for i in moving}
    istar = min(moving, key=lambda i: (vals[i], i))
    vmin = vals[istar]
    center = -base[istar] / direction[istar]
    # representatives of the p^(N - vmin) cells inside center + p^(-M - vmin) O
    ball = Fraction(p) ** (-f.M - vmin)
    count = p ** (f.M + f.N)
    # in cell coordinates the point is A + j B with B = d p^-vmin integral,
    # so the sweep runs on residues mod p^(M+N)
    shift = Fraction(p) ** f.M
    starts, steps = [], []
    for b, d in zip(base, direction):
        A = (b + center * d) * shift
        if A != 0 and A.denominator % p == 0:
            return zero
        B = d * ball * shift
        starts.append(A.numerator * pow(A.denominator, -1, count) % count if count > 1 else 0)
        steps.append(B.numerator * pow(B.denominator, -1, count) % count if count > 1 else 0)
    total = zero
    values = f.values
    for j in range(count):
        val = values.get(tuple((a + j * s) % count for a, s in zip(starts, steps)))
        if val is not None:
            total += val
    return total * (Fraction(p) ** (vmin - f.N) if f.mode == "rational" else float(Fraction(p) ** (vmin - f.N)))
