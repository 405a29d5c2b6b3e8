"""Radon and Fourier transforms on the p-adic plane.

Pairing: <(a, b), (c, d)> = a d - b c. The additive character psi is
exp(2 pi i {x}) with {x} the p-adic fractional part, trivial on O and not on
p^-1 O. Haar measure: vol(O) = 1 on F and vol(O^2) = 1 on F^2 (self-dual).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .padic import LevelFunction, PAdicScalar, dilate, integrate_line, valuation


class RadonError(ValueError):
    pass


class Unbounded(RadonError):
    """R(f) does not vanish beyond the shell where vanishing is provable."""


class NonContracting(RadonError):
    pass


class ZeroComponent(RadonError):
    pass


def pairing(x: Sequence, y: Sequence) -> Fraction:
    return Fraction(x[0]) * Fraction(y[1]) - Fraction(x[1]) * Fraction(y[0])


def _vmin(y: Sequence, p: int) -> int:
    return min(valuation(Fraction(c), p) for c in y if c != 0)


def base_point(y: Sequence, p: int) -> tuple[Fraction, Fraction]:
    """Minimal-valuation x0 with <x0, y> = 1."""
    c, d = Fraction(y[0]), Fraction(y[1])
    if c == 0 and d == 0:
        raise RadonError("y must be nonzero")
    if c == 0 or (d != 0 and valuation(d, p) <= valuation(c, p)):
        return (1 / d, Fraction(0))
    return (Fraction(0), -1 / c)


def line_integral(f: LevelFunction, y: Sequence):
    """L(f)(y) = integral of f(t y) dt."""
    return integrate_line(f, (0, 0), y)


def radon(f: LevelFunction, y: Sequence, x0: Sequence | None = None):
    """R(f)(y) = integral of f(x0 + t y) dt with <x0, y> = 1."""
    if x0 is None:
        x0 = base_point(y, f.p)
    elif pairing(x0, y) != 1:
        raise RadonError("x0 must pair to 1 with y")
    return integrate_line(f, x0, y)


# Fourier transform

def fourier(f: LevelFunction) -> LevelFunction:
    """Phi(f)(y) = integral of f(x) psi(<x, y>) dx, as a complex LevelFunction.

    f on cells a p^-M + p^N O^2 gives Phi(f) on cells b p^-N + p^M O^2 with
    Phi(f)[b] = p^-2N sum_a f[a] exp(2 pi i (a1 b2 - a2 b1) / P), P = p^(M+N),
    which is numpy's fft2 read at index (-b2, b1).
    """
    if f.n != 2:
        raise RadonError("the Fourier transform is on the plane")
    p, M, N = f.p, f.M, f.N
    P = p ** (M + N)
    grid = np.zeros((P, P), dtype=complex)
    for (a1, a2), val in f.values.items():
        grid[a1, a2] = complex(val)
    spectrum = np.fft.fft2(grid)
    scale = float(Fraction(1, p ** (2 * N)))
    vals = {}
    for b1 in range(P):
        for b2 in range(P):
            val = spectrum[(-b2) % P, b1] * scale
            if abs(val) > 1e-12:
                vals[(b1, b2)] = complex(val)
    out = LevelFunction(p, 2, N, M, vals, mode="complex", window_cap=max(f.window_cap, N), level_cap=max(f.level_cap, M))
    return out


# the torus group algebra

@dataclass
class TorusGroupAlgebraElement:
    """Finite formal sum of c_i [t_i] acting by dilation."""

    terms: list = field(default_factory=list)  # (coefficient, t)

    @classmethod
    def point(cls, t, c=1) -> "TorusGroupAlgebraElement":
        return cls([(Fraction(c), t)])

    @classmethod
    def factor(cls, t, c) -> "TorusGroupAlgebraElement":
        """[t] - c."""
        return cls([(Fraction(1), t), (-Fraction(c), 1)])

    def __add__(self, other: "TorusGroupAlgebraElement") -> "TorusGroupAlgebraElement":
        return TorusGroupAlgebraElement(self.terms + other.terms)

    def __mul__(self, other: "TorusGroupAlgebraElement") -> "TorusGroupAlgebraElement":
        out = []
        for c1, t1 in self.terms:
            for c2, t2 in other.terms:
                out.append((c1 * c2, _tmul(t1, t2)))
        return TorusGroupAlgebraElement(out)


def _tmul(a, b):
    if isinstance(a, PAdicScalar) or isinstance(b, PAdicScalar):
        return (a if isinstance(a, PAdicScalar) else b) * (b if isinstance(a, PAdicScalar) else a)
    return Fraction(a) * Fraction(b)


def sigma_apply(sigma: TorusGroupAlgebraElement, f: LevelFunction) -> LevelFunction:
    """Sum of c_i dilate(f, t_i)."""
    total = LevelFunction.zero(f.p, f.n, f.M, f.N, f.mode)
    for c, t in sigma.terms:
        total = total + dilate(f, t).scale(c)
    return total.normalized()


def pi_minus_inverse_q(p: int) -> TorusGroupAlgebraElement:
    """The element [p] - q^-1 that kills line integrals."""
    return TorusGroupAlgebraElement.factor(p, Fraction(1, p))


# compact support

def projective_directions(p: int, k: int) -> list[tuple[Fraction, Fraction]]:
    """Representatives of P^1(Z / p^k): (1, b) and (p c, 1)."""
    out = [(Fraction(1), Fraction(b)) for b in range(p ** k)]
    out += [(Fraction(p * c), Fraction(1)) for c in range(p ** max(k - 1, 0))]
    return out


@dataclass
class SupportReport:
    radius: Fraction  # sup |y| over the observed support of R(f); 0 if none
    certified_bound: Fraction  # |y| beyond which vanishing is provable once L(f) = 0
    shells: dict  # valuation k -> number of sampled nonzero values


def compact_support_radius(f: LevelFunction, unit_digits: int = 1, sample_digits: int | None = 2) -> SupportReport:
    """Support radius of y -> R(f)(y) on F^2 minus 0.

    If f lives in p^-M O^2 at level N, then R(f)(y) = 0 for v(y) > M (the line
    misses the support) and R(f)(y) = L(f)(y) for v(y) <= -N (x0 is then in
    p^N O^2). So R(f) has compact support iff L(f) vanishes, which is checked
    on all of P^1(Z / p^(M+N)); the shells in between are sampled on
    P^1(Z / p^sample_digits) (None: all of them) times units,
    which locates the radius.
    """
    p, M, N = f.p, f.M, f.N
    certified = Fraction(p) ** N
    if not f:
        return SupportReport(Fraction(0), certified, {})
    k = max(M + N, 1)
    for y in projective_directions(p, k):
        if line_integral(f, y) != 0:
            far = tuple(Fraction(p) ** (-N - 1) * c for c in y)
            raise Unbounded(f"L(f)({y}) != 0, so R(f)({far}) = {radon(f, far)} persists on every outer shell")
    units = [u for u in range(1, p ** unit_digits) if u % p]
    shells = {}
    radius = Fraction(0)
    sample = projective_directions(p, k if sample_digits is None else min(k, sample_digits))
    for shell in range(-N - 2, M + 3):
        count = 0
        for y in sample:
            for u in units:
                yy = tuple(Fraction(p) ** shell * u * c for c in y)
                if radon(f, yy) != 0:
                    count += 1
        shells[shell] = count
        if count:
            radius = max(radius, Fraction(p) ** (-shell))
    if any(shells[s] for s in shells if s <= -N):
        raise Unbounded("R(f) is nonzero beyond the certified shell")
    return SupportReport(radius, certified, shells)


# geometric inversion of [alpha] - c

def _mask_annulus(f: LevelFunction, depth: int) -> LevelFunction:
    """Restrict f to {x : min valuation <= depth}; needs level > depth."""
    if f.N <= depth:
        f = f.refine(depth + 1)
    p, M = f.p, f.M
    vals = {}
    for a, v in f.values.items():
        # a cell is inside p^(depth+1) O^n iff all coordinates are divisible by p^(M+depth+1)
        if all(x % p ** (M + depth + 1) == 0 for x in a):
            continue
        vals[a] = v
    return f.with_values(vals)


def geometric_sum(t, c, f: LevelFunction, depth: int, max_terms: int = 64) -> LevelFunction:
    """sum_{n >= 0} c^-n [t]^n f on the annulus {min valuation <= depth}.

    Requires v(t) > 0 so that [t]^n f is pushed towards 0 and eventually
    leaves the annulus; only finitely many terms then contribute.
    """
    p = f.p
    tv = valuation(t.to_rational() if isinstance(t, PAdicScalar) else Fraction(t), p)
    if tv <= 0:
        raise NonContracting(f"[t] with v(t) = {tv} does not contract towards 0")
    c = Fraction(c)
    if c == 0:
        raise NonContracting("c must be nonzero")
    total = LevelFunction.zero(p, f.n, f.M, f.N, f.mode)
    term = _mask_annulus(f, depth)
    current = f
    n = 0
    while term:
        total = total + term.scale(c ** (-n))
        n += 1
        if n > max_terms:
            raise NonContracting("terms keep reaching the window")
        current = dilate(current, t, window_cap=max(f.window_cap, f.M + 1), level_cap=max(f.level_cap, f.N + n * tv + depth + 2))
        term = _mask_annulus(current, depth)
    return _mask_annulus(total.normalized(), depth)


def geom_inverse(t, c, f: LevelFunction, depth: int) -> LevelFunction:
    """([t] - c)^-1 f = -c^-1 sum_n c^-n [t]^n f, exact on the annulus {min valuation <= depth}."""
    return geometric_sum(t, c, f, depth).scale(-1 / Fraction(c))


def apply_factor(t, c, f: LevelFunction) -> LevelFunction:
    return sigma_apply(TorusGroupAlgebraElement.factor(t, c), f)


def restrict_annulus(f: LevelFunction, depth: int) -> LevelFunction:
    return _mask_annulus(f, depth).normalized()


# Mellin components and gamma

def _primitive_root(p: int) -> int:
    for g in range(2, p + 1):
        if all(pow(g, (p - 1) // r, p) != 1 for r in _prime_factors(p - 1)):
            return g
    return 1


def _prime_factors(n: int) -> list[int]:
    out, d = [], 2
    while d * d <= n:
        while n % d == 0:
            out.append(d)
            n //= d
        d += 1
    if n > 1:
        out.append(n)
    return sorted(set(out))


def unit_character(p: int, index: int):
    """Character of (Z/p)^x sending the primitive root to exp(2 pi i index / (p - 1))."""
    g = _primitive_root(p)
    logs = {}
    x = 1
    for k in range(p - 1):
        logs[x] = k
        x = x * g % p
    return lambda u: cmath.exp(2j * math.pi * index * logs[u % p] / (p - 1))


def _shell_sum(values_at, p: int, eta, k: int, units: list[int]) -> complex:
    total = 0j
    for u in units:
        val = values_at(Fraction(p) ** k * u)
        if val:
            total += eta(u) * complex(val)
    return total / len(units)


def _geometric_tail(edge: complex, inner1: complex, inner2: complex, tol: float = 1e-9) -> complex:
    """Continuation of the terms beyond ``edge``, given the two terms just inside it.

    The terms must be geometric: outward ratio r = edge / inner1, checked
    against inner1 / inner2. Returns edge * r / (1 - r).
    """
    scale = max(abs(edge), abs(inner1), abs(inner2))
    if scale < 1e-14:
        return 0j
    if abs(inner1) < 1e-14 or abs(inner1 * inner1 - edge * inner2) > tol * scale * scale:
        raise RadonError("shell sums are not geometric at the edge of the window")
    r = edge / inner1
    if abs(1 - r) < 1e-12:
        raise ZeroComponent("the tail sits on a pole of the Mellin transform")
    return edge * r / (1 - r)


def mellin_component(values_at, p: int, index: int, z: complex, shells: range, unit_digits: int) -> complex:
    """sum over all k of z^k times the eta-average of g over the shell v = k, with vol(O^x) = 1.

    Shells in ``shells`` are summed directly; beyond them the shell terms must
    be geometric in k (checked on three shells at each edge) and the tails are
    summed in closed form, i.e. analytically continued in z.
    """
    eta = unit_character(p, index)
    units = [u for u in range(1, p ** unit_digits) if u % p]
    terms = {k: z ** k * _shell_sum(values_at, p, eta, k, units) for k in shells}
    lo, hi = shells.start, shells.stop - 1
    total = sum(terms.values(), 0j)
    total += _geometric_tail(terms[lo], terms[lo + 1], terms[lo + 2])
    total += _geometric_tail(terms[hi], terms[hi - 1], terms[hi - 2])
    return total


def mellin_gamma_check(f1: LevelFunction, f2: LevelFunction, index: int, z: complex, direction: Sequence = (1, 0), unit_digits: int | None = None) -> tuple[complex, complex]:
    """Ratios Phi-component / R-component of f1 and f2 at the character eta_index |.|-twisted by z.

    Both transforms are restricted to the line through ``direction``. Far out
    R(f) equals the line integral (homogeneous of degree -1) and Phi(f)
    vanishes; near 0, R(f) vanishes and Phi(f) is constant. The shell range
    below reaches into both regimes so the tails are geometric.
    """
    p = f1.p
    ratios = []
    for f in (f1, f2):
        phi = fourier(f)
        M, N = f.M, f.N
        digits = unit_digits or (M + N + 1)
        shells = range(-N - 4, M + N + 4)
        y0 = tuple(Fraction(c) for c in direction)
        comp_phi = mellin_component(lambda s: phi(tuple(s * c for c in y0)), p, index, z, shells, digits)
        comp_r = mellin_component(lambda s: radon(f, tuple(s * c for c in y0)), p, index, z, shells, digits)
        if abs(comp_r) < 1e-12:
            raise ZeroComponent(f"R-component vanishes (Phi-component {comp_phi:.3g})")
        ratios.append(comp_phi / comp_r)
    return ratios[0], ratios[1]
