"""Asymptotic specialization on normal-crossing charts.

A chart is F^n with some coordinates marked as divisor coordinates (the
divisor S_i is {x_i = 0}) and the rest transverse. Locally the normal bundle
N_I of the deepest stratum has the same coordinates, so functions on the
chart and on N_I are both LevelFunctions on F^n. Admissible maps are
polynomial coordinate changes whose defining conditions are checked
symbolically. With integral coefficients they are isometries of the
certified box U = (p^r O)^I x O^t, which makes pullbacks exact cell maps.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Sequence

from .cosets import (
    IDENTITY,
    XElement,
    _in_Km_iota_Km,
    depth_threshold,
    iota_X,
    mat,
    mdet,
    minv,
    mmul,
    random_K0,
    random_Km,
    NotDeep,
)
from .padic import LevelFunction, WindowOverflow, residue, valuation


class SpecializationError(ValueError):
    pass


class NotYetDeep(SpecializationError):
    """The scaled support is not inside the certified domain of the map."""


class NoStabilization(SpecializationError):
    pass


class NonTransverse(SpecializationError):
    pass


# scaling vectors

@dataclass(frozen=True)
class ScalingVector:
    components: tuple[int, ...]

    @classmethod
    def of(cls, *values: int) -> "ScalingVector":
        return cls(tuple(int(v) for v in values))

    @classmethod
    def constant(cls, value: int, size: int) -> "ScalingVector":
        return cls((int(value),) * size)

    def __len__(self) -> int:
        return len(self.components)

    def __add__(self, other: "ScalingVector") -> "ScalingVector":
        if len(self) != len(other):
            raise ValueError("scaling vectors of different length")
        return ScalingVector(tuple(a + b for a, b in zip(self.components, other.components)))

    def __ge__(self, other: "ScalingVector") -> bool:
        return all(a >= b for a, b in zip(self.components, other.components))

    def __le__(self, other: "ScalingVector") -> bool:
        return other >= self

    def __gt__(self, other) -> bool:
        return self >= other and self != other

    def __lt__(self, other) -> bool:
        return other >= self and self != other

    def to_json(self) -> list[int]:
        return list(self.components)


def _as_scaling(lam, size: int) -> ScalingVector:
    if isinstance(lam, ScalingVector):
        if len(lam) != size:
            raise ValueError(f"expected {size} scaling components, got {len(lam)}")
        return lam
    if isinstance(lam, int):
        return ScalingVector.constant(lam, size)
    return ScalingVector(tuple(int(v) for v in lam))


# charts

@dataclass(frozen=True)
class NCChart:
    """F^dim with divisor coordinates; degrees > 1 mark a toric cover t -> t^d."""

    p: int
    dim: int
    divisor_coords: tuple[int, ...]
    degrees: tuple[int, ...] = ()
    names: tuple[str, ...] = ()
    name: str = "chart"
    domain_depth: int = 1

    def __post_init__(self):
        if not self.degrees:
            object.__setattr__(self, "degrees", (1,) * len(self.divisor_coords))
        if not self.names:
            object.__setattr__(self, "names", tuple(f"x{i}" for i in range(self.dim)))
        if len(self.degrees) != len(self.divisor_coords):
            raise ValueError("one covering degree per divisor coordinate")
        if len(set(self.divisor_coords)) != len(self.divisor_coords) or any(not 0 <= c < self.dim for c in self.divisor_coords):
            raise ValueError("divisor coordinates must be distinct coordinate indices")
        if self.domain_depth < 1:
            raise ValueError("the certified domain needs depth >= 1")

    @property
    def transverse_coords(self) -> tuple[int, ...]:
        return tuple(c for c in range(self.dim) if c not in self.divisor_coords)

    def stratum(self, J: Sequence[int]) -> tuple[int, ...]:
        """Coordinates that vanish on S_J (J indexes divisor_coords)."""
        return tuple(self.divisor_coords[j] for j in J)

    def exponents(self, lam) -> tuple[int, ...]:
        """Per-coordinate exponent e with z_lambda acting as p^-e."""
        lam = _as_scaling(lam, len(self.divisor_coords))
        out = [0] * self.dim
        for c, d, l in zip(self.divisor_coords, self.degrees, lam.components):
            out[c] = d * l
        return tuple(out)

    def depth_of(self, c: int) -> int:
        return self.domain_depth if c in self.divisor_coords else 0

    def in_domain(self, point: Sequence) -> bool:
        for c, x in enumerate(point):
            x = Fraction(x)
            if x != 0 and valuation(x, self.p) < self.depth_of(c):
                return False
        return True

    # presets

    @classmethod
    def toy_line(cls, p: int) -> "NCChart":
        return cls(p, 1, (0,), names=("x",), name="toy-line")

    @classmethod
    def toy_plane(cls, p: int) -> "NCChart":
        """F^2 with the two coordinate axes as divisors."""
        return cls(p, 2, (0, 1), names=("x", "y"), name="toy-plane")

    @classmethod
    def toy_transverse(cls, p: int) -> "NCChart":
        """F^2 with divisor {x = 0} and a transverse coordinate s."""
        return cls(p, 2, (0,), names=("x", "s"), name="toy-transverse")

    @classmethod
    def cover(cls, p: int, d: int = 2) -> "NCChart":
        """Base coordinate of the cover t -> t^d: the lifted scaling moves it in steps of d."""
        return cls(p, 1, (0,), degrees=(d,), names=("x",), name=f"cover-d{d}")

    @classmethod
    def pgl2_boundary(cls, p: int) -> "NCChart":
        """Affine chart of the PGL2 compactification near the closed orbit.

        Coordinates (u, m12, m21) stand for [[1, m12], [m21, m12 m21 + u]];
        u = 0 is the boundary divisor.
        """
        return cls(p, 3, (0,), names=("u", "m12", "m21"), name="pgl2-boundary")

    def to_json(self) -> dict:
        return {"name": self.name, "p": self.p, "dim": self.dim, "divisor": [self.names[c] for c in self.divisor_coords], "degrees": list(self.degrees)}


# polynomials

Monomial = tuple[int, ...]


@dataclass(frozen=True)
class Polynomial:
    nvars: int
    terms: tuple[tuple[Monomial, Fraction], ...]

    @classmethod
    def from_dict(cls, nvars: int, terms: dict) -> "Polynomial":
        clean = {}
        for mono, c in terms.items():
            mono = tuple(mono)
            if len(mono) != nvars:
                raise ValueError("monomial has the wrong number of variables")
            c = Fraction(c)
            if c:
                clean[mono] = clean.get(mono, Fraction(0)) + c
        return cls(nvars, tuple(sorted((m, c) for m, c in clean.items() if c)))

    @classmethod
    def variable(cls, i: int, nvars: int) -> "Polynomial":
        return cls.from_dict(nvars, {tuple(int(j == i) for j in range(nvars)): 1})

    @classmethod
    def constant(cls, c, nvars: int) -> "Polynomial":
        return cls.from_dict(nvars, {(0,) * nvars: c})

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        d = self.as_dict()
        for m, c in other.terms:
            d[m] = d.get(m, Fraction(0)) + c
        return Polynomial.from_dict(self.nvars, d)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.nvars, tuple((m, -c) for m, c in self.terms))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return Polynomial.from_dict(self.nvars, {m: c * Fraction(other) for m, c in self.terms})
        d: dict = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = tuple(a + b for a, b in zip(m1, m2))
                d[m] = d.get(m, Fraction(0)) + c1 * c2
        return Polynomial.from_dict(self.nvars, d)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "Polynomial":
        out = Polynomial.constant(1, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def compose(self, subs: Sequence["Polynomial"]) -> "Polynomial":
        nv = subs[0].nvars
        out = Polynomial.constant(0, nv)
        for mono, c in self.terms:
            term = Polynomial.constant(c, nv)
            for s, e in zip(subs, mono):
                if e:
                    term = term * (s ** e)
            out = out + term
        return out

    def __call__(self, point: Sequence) -> Fraction:
        total = Fraction(0)
        for mono, c in self.terms:
            val = c
            for x, e in zip(point, mono):
                if e:
                    val *= Fraction(x) ** e
            total += val
        return total

    def eval_mod(self, point: Sequence[int], p: int, k: int) -> int:
        mod = p ** k
        total = 0
        for mono, c in self.terms:
            val = c.numerator * pow(c.denominator, -1, mod) % mod
            for x, e in zip(point, mono):
                if e:
                    val = val * pow(x, e, mod) % mod
            total += val
        return total % mod

    def is_integral(self, p: int) -> bool:
        return all(c.denominator % p for _, c in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mono, c in self.terms:
            vars_ = "*".join(f"x{i}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mono) if e)
            parts.append(f"{c}" + (f"*{vars_}" if vars_ else "") if c != 1 or not vars_ else vars_)
        return " + ".join(parts)


# admissible maps

@dataclass(frozen=True)
class AdmissibleMapData:
    """Polynomial map U -> N_I on a chart, one polynomial per coordinate."""

    chart: NCChart
    components: tuple[Polynomial, ...]
    name: str = "tau"

    @classmethod
    def identity(cls, chart: NCChart) -> "AdmissibleMapData":
        return cls(chart, tuple(Polynomial.variable(i, chart.dim) for i in range(chart.dim)), "identity")

    @classmethod
    def perturbed(cls, chart: NCChart, corrections: dict, name: str = "perturbed") -> "AdmissibleMapData":
        """Identity plus corrections {coordinate: {monomial: coefficient}}."""
        comps = []
        for i in range(chart.dim):
            base = Polynomial.variable(i, chart.dim)
            if i in corrections:
                base = base + Polynomial.from_dict(chart.dim, corrections[i])
            comps.append(base)
        return cls(chart, tuple(comps), name)

    def __post_init__(self):
        if len(self.components) != self.chart.dim or any(c.nvars != self.chart.dim for c in self.components):
            raise ValueError("one polynomial in dim variables per coordinate")

    def corrections(self) -> list[Polynomial]:
        return [c - Polynomial.variable(i, self.chart.dim) for i, c in enumerate(self.components)]

    def _divisor_degree(self, mono: Monomial) -> int:
        return sum(mono[c] for c in self.chart.divisor_coords)

    def certificate(self, step: int | None = None) -> dict[str, bool]:
        """The defining conditions, checked on the coefficients.

        fixes_stratum: every correction term involves a divisor coordinate, so
        tau = Id on S_I. preserves_strata: the x_i component is divisible by
        x_i, so S_J lands in N_I^J. normal_differential: corrections have
        degree >= 2 in the divisor coordinates, so d tau = Id along S_I.
        integral: p-integral coefficients, needed for the isometry on U.
        scaling_lifts: a base scaling step must be a multiple of every covering
        degree for the lifted action alpha_d to exist.
        """
        corr = self.corrections()
        checks = {
            "integral": all(c.is_integral(self.chart.p) for c in self.components),
            "fixes_stratum": all(self._divisor_degree(m) >= 1 for c in corr for m, _ in c.terms),
            "preserves_strata": all(
                all(m[ci] >= 1 for m, _ in self.components[ci].terms) for ci in self.chart.divisor_coords
            ),
            "normal_differential": all(self._divisor_degree(m) >= 2 for c in corr for m, _ in c.terms),
        }
        if step is not None or any(d > 1 for d in self.chart.degrees):
            used = step if step is not None else None
            checks["scaling_lifts"] = all(used is None or used % d == 0 for d in self.chart.degrees)
        return checks

    def is_admissible(self, step: int | None = None) -> bool:
        return all(self.certificate(step).values())

    def require_admissible(self) -> None:
        failed = [k for k, ok in self.certificate().items() if not ok]
        if failed:
            raise SpecializationError(f"{self.name} fails the admissibility certificate: {', '.join(failed)}")

    def __call__(self, point: Sequence) -> tuple[Fraction, ...]:
        return tuple(c(point) for c in self.components)

    def eval_mod(self, point: Sequence[int], k: int) -> tuple[int, ...]:
        return tuple(c.eval_mod(point, self.chart.p, k) for c in self.components)

    def preimage_mod(self, y: Sequence[int], k: int) -> tuple[int, ...]:
        """x in U with tau(x) = y mod p^k, by iterating x -> y - (tau(x) - x).

        On U the correction tau - Id is p^-r Lipschitz, so this contracts.
        """
        mod = self.chart.p ** k
        x = tuple(v % mod for v in y)
        for _ in range(k + 2):
            tx = self.eval_mod(x, k)
            nxt = tuple((yi - (ti - xi)) % mod for yi, ti, xi in zip(y, tx, x))
            if nxt == x:
                return x
            x = nxt
        if self.eval_mod(x, k) != tuple(v % mod for v in y):
            raise SpecializationError("fixed-point inversion did not converge")
        return x

    def compose(self, inner: "AdmissibleMapData") -> "AdmissibleMapData":
        """self after inner."""
        if inner.chart.dim != self.chart.dim:
            raise ValueError("composing maps on charts of different dimension")
        return AdmissibleMapData(inner.chart, tuple(c.compose(inner.components) for c in self.components), f"{self.name}.{inner.name}")

    def on_chart(self, chart: NCChart) -> "AdmissibleMapData":
        return AdmissibleMapData(chart, self.components, self.name)


# scaling operators

def scale(f: LevelFunction, lam, chart: NCChart, step_override: int | None = None) -> LevelFunction:
    """T^lambda f(y) = f(z_lambda y), z_lambda = p^-lambda per divisor coordinate.

    Exact re-indexing: the cell a p^-M + p^N O in coordinate c with exponent e
    becomes a p^(e-M) + p^(N+e) O, split into cells of the common grid.
    step_override forces a raw exponent per unit of lambda (ignoring the
    covering degree); it exists only to exhibit the failure of step-1 scaling
    on a cover and is refused by the certificate.
    """
    if f.n != chart.dim:
        raise ValueError("function and chart dimensions differ")
    if step_override is None:
        exps = chart.exponents(lam)
    else:
        lam = _as_scaling(lam, len(chart.divisor_coords))
        exps = [0] * chart.dim
        for c, l in zip(chart.divisor_coords, lam.components):
            exps[c] = step_override * l
    if not any(exps):
        return f
    p, M, N = f.p, f.M, f.N
    M_new = max(M - e for e in exps)
    N_new = max(N + e for e in exps)
    if M_new > f.window_cap or N_new > f.level_cap:
        raise WindowOverflow(f"scaling needs window {M_new} and level {N_new}")
    mod_new = p ** (M_new + N_new)
    per_coord = []
    for e in exps:
        splits = p ** (N_new - N - e)
        per_coord.append((p ** (e - M + M_new), p ** (N + e + M_new), splits))
    vals = {}
    for a, v in f.values.items():
        choices = []
        for x, (mult, stride, splits) in zip(a, per_coord):
            base = x * mult
            choices.append([(base + j * stride) % mod_new for j in range(splits)])
        for idx in product(*choices):
            vals[idx] = v
    out = LevelFunction(p, f.n, M_new, N_new, vals, f.mode, f.window_cap, f.level_cap)
    return out.normalized()


# pullbacks

def _support_in_domain(g: LevelFunction, chart: NCChart) -> bool:
    p = g.p
    for a in g.values:
        pt = g.cell_point(a)
        for c, x in enumerate(pt):
            r = chart.depth_of(c)
            if g.N < r:
                return False
            if x != 0 and valuation(x, p) < r:
                return False
    return True


def pullback(g: LevelFunction, tau: AdmissibleMapData) -> LevelFunction:
    """tau^*(g) on U, for g supported inside tau(U) = U."""
    chart = tau.chart
    if not g:
        return g
    if not _support_in_domain(g, chart):
        raise NotYetDeep(f"support of the function is not inside the certified domain of {tau.name}")
    level = max(g.N, chart.domain_depth, 1)
    if g.N < level:
        g = g.refine(level)
    p = g.p
    vals = {}
    for a, v in g.values.items():
        pt = g.cell_point(a)
        y = tuple(residue(x, p, level) for x in pt)
        x = tau.preimage_mod(y, level)
        vals[x] = v
    return LevelFunction(p, g.n, 0, level, vals, g.mode, g.window_cap, g.level_cap).normalized()


def asymptotic_pullback(f: LevelFunction, tau: AdmissibleMapData, lam) -> LevelFunction:
    """tau^*(T^lambda f)."""
    tau.require_admissible()
    return pullback(scale(f, lam, tau.chart), tau)


def _agree_at(f, tau1, tau2, mu) -> bool:
    try:
        return asymptotic_pullback(f, tau1, mu) == asymptotic_pullback(f, tau2, mu)
    except (NotYetDeep, WindowOverflow):
        return False


def _box(lam: ScalingVector, margin: int):
    for offs in product(range(margin + 1), repeat=len(lam)):
        yield ScalingVector(tuple(l + o for l, o in zip(lam.components, offs)))


def stabilization_threshold(f: LevelFunction, tau1: AdmissibleMapData, tau2: AdmissibleMapData, margin: int = 2, search: range = range(-6, 12)) -> ScalingVector:
    """Least lambda_0 with tau1^* T^mu f = tau2^* T^mu f for mu in [lambda_0, lambda_0 + margin]."""
    if tau1.chart != tau2.chart:
        raise ValueError("both maps must live on the same chart")
    k = len(tau1.chart.divisor_coords)

    def ok(lam: ScalingVector) -> bool:
        return all(_agree_at(f, tau1, tau2, mu) for mu in _box(lam, margin))

    start = None
    for t in search:
        lam = ScalingVector.constant(t, k)
        if ok(lam):
            start = lam
            break
    if start is None:
        raise NoStabilization(f"pullbacks never agreed over the margin for lambda up to {search.stop - 1}")
    comps = list(start.components)
    for i in range(k):
        while comps[i] > search.start:
            trial = comps.copy()
            trial[i] -= 1
            if not ok(ScalingVector(tuple(trial))):
                break
            comps = trial
    return ScalingVector(tuple(comps))


# tower compatibility on the plane with two divisors

@dataclass(frozen=True)
class TowerFamily:
    """Maps for J = {x} inside I = {x, y} on F^2, with tau_I = tau_I^J after tau_J."""

    tau_J: AdmissibleMapData  # chart: divisor x, y transverse
    tau_IJ: AdmissibleMapData  # chart: divisor y, x transverse
    tau_I: AdmissibleMapData  # chart: both divisors

    @classmethod
    def build(cls, p: int, beta=0, gamma=0, delta=0, eps=0) -> "TowerFamily":
        """tau_J = (x + beta x^2, y + gamma x^2 y); tau_IJ = (x + delta x y^2, y + eps y^2)."""
        chart_J = NCChart(p, 2, (0,), names=("x", "y"), name="plane-J")
        chart_IJ = NCChart(p, 2, (1,), names=("x", "y"), name="plane-IJ")
        chart_I = NCChart.toy_plane(p)
        tau_J = AdmissibleMapData.perturbed(chart_J, {0: {(2, 0): beta}, 1: {(2, 1): gamma}}, "tau_J")
        tau_IJ = AdmissibleMapData.perturbed(chart_IJ, {0: {(1, 2): delta}, 1: {(0, 2): eps}}, "tau_IJ")
        tau_I = tau_IJ.compose(tau_J).on_chart(chart_I)
        return cls(tau_J, tau_IJ, AdmissibleMapData(chart_I, tau_I.components, "tau_I"))

    def coherent(self) -> bool:
        return all(t.is_admissible() for t in (self.tau_J, self.tau_IJ, self.tau_I))


def check_tower(f: LevelFunction, family: TowerFamily, lam_tilde: int, mu: int) -> bool:
    """j_J(mu) after j_I^J(lam_tilde) against j_I(lam_tilde + mu); False below the thresholds."""
    try:
        inner = asymptotic_pullback(f, family.tau_IJ, ScalingVector.of(lam_tilde))
        lhs = asymptotic_pullback(inner, family.tau_J, ScalingVector.of(mu))
        rhs = asymptotic_pullback(f, family.tau_I, ScalingVector.of(mu, lam_tilde))
    except NotYetDeep:
        return False
    return lhs == rhs


# push-forward along translations of the transverse coordinate

def pushforward(f: LevelFunction, coord: int = 1) -> LevelFunction:
    """Integrate over the O-translates in one coordinate: f(x, s) -> integral over h in O of f(x, s + h)."""
    if f.N < 0:
        f = f.refine(0)
    p, M, N = f.p, f.M, f.N
    mod = f.modulus
    weight = Fraction(1, p ** N)
    acc: dict = {}
    # the O-orbit of a cell index: shifts by multiples of p^M in that coordinate
    for a, v in f.values.items():
        for h in range(p ** N):
            b = list(a)
            b[coord] = (b[coord] + h * p ** M) % mod
            b = tuple(b)
            acc[b] = acc.get(b, 0) + (v * weight if f.mode == "rational" else v * float(weight))
    return LevelFunction(p, f.n, M, N, acc, f.mode, f.window_cap, f.level_cap).normalized()


def _translation_equivariant(tau: AdmissibleMapData, coord: int) -> bool:
    corr = tau.corrections()
    return all(m[coord] == 0 for c in corr for m, _ in c.terms)


def pushforward_compat(f: LevelFunction, tau: AdmissibleMapData, lam, trivial_group: bool = False) -> bool:
    """pi_* j(lambda) f = j(lambda) pi_* f for H0 = O translating the transverse coordinate."""
    chart = tau.chart
    (coord,) = chart.transverse_coords
    if not _translation_equivariant(tau, coord):
        raise SpecializationError("the admissible map is not equivariant for the translation action")
    push = (lambda g: g) if trivial_group else (lambda g: pushforward(g, coord))
    lhs = push(asymptotic_pullback(f, tau, lam))
    rhs = asymptotic_pullback(push(f), tau, lam)
    return lhs == rhs


# restriction to a transverse slice

@dataclass(frozen=True)
class Slice:
    """The line a x + b s = c in the (x, s) chart."""

    a: Fraction
    b: Fraction
    c: Fraction

    def graph(self, p: int) -> tuple[Fraction, Fraction]:
        """(s0, slope) with s = s0 + slope x."""
        if self.b == 0:
            raise NonTransverse("the slice is not transverse to the divisor")
        s0, slope = Fraction(self.c) / self.b, -Fraction(self.a) / self.b
        for v in (s0, slope):
            if v != 0 and valuation(v, p) < 0:
                raise SpecializationError("slice leaves the integral window of the chart")
        return s0, slope


def restriction_compat(f: LevelFunction, tau: AdmissibleMapData, slice_: Slice, lam: int) -> bool:
    """Restrict-then-specialize against specialize-then-restrict on the toy transverse chart.

    False below the threshold: a tilted slice moves the transverse coordinate
    by about p^lam, so lam must reach the level of f.
    """
    chart = tau.chart
    if chart.dim != 2 or chart.divisor_coords != (0,):
        raise ValueError("restriction is implemented on the (x, s) chart")
    p = chart.p
    s0, slope = slice_.graph(p)
    try:
        g = asymptotic_pullback(f, tau, ScalingVector.of(lam))
    except NotYetDeep:
        return False
    level = max(g.N, 1)
    lhs = LevelFunction.from_callable(p, 1, 0, level, lambda x: g((x[0], s0 + slope * x[0])), f.mode)
    # the slice inherits the chart: divisor x, map x -> tau_x(x, s0 + slope x)
    line = NCChart(p, 1, (0,), names=("x",), name="slice")
    sub = [Polynomial.variable(0, 1), Polynomial.constant(s0, 1) + Polynomial.variable(0, 1) * slope]
    tau_Z = AdmissibleMapData(line, (tau.components[0].compose(sub),), "tau_slice")
    ff = f if f.N >= 0 else f.refine(0)
    f_line = LevelFunction.from_callable(p, 1, ff.M, ff.N, lambda x: ff((x[0], s0)), f.mode)
    try:
        rhs = asymptotic_pullback(f_line, tau_Z, ScalingVector.of(lam))
    except NotYetDeep:
        return False
    return lhs.normalized() == rhs


# the PGL2 boundary chart

def chart_group_matrix(point: Sequence) -> tuple:
    u, m12, m21 = (Fraction(x) for x in point)
    return mat(1, m12, m21, m12 * m21 + u)


def chart_x_point(point: Sequence, p: int) -> XElement:
    u, m12, m21 = (Fraction(x) for x in point)
    return XElement(mat(1, m12, m21, m12 * m21), "PGL2", p, u)


def tau_global(g: tuple, p: int) -> XElement:
    """Identity-in-coordinates map extended to all pivots.

    For primitive g with a unit entry g_ij, subtract the multiple of the
    opposite elementary matrix that kills the determinant; delta = det g.
    On the 11-chart this is (u, m12, m21) -> (x(m12, m21), u).
    """
    v = min(valuation(e, p) for e in g if e != 0)
    g = tuple(e / Fraction(p) ** v for e in g)
    det = mdet(g)
    a, b, c, d = g
    pivot = next(i for i, e in enumerate(g) if e != 0 and valuation(e, p) == 0)
    if pivot == 0:
        x = (a, b, c, d - det / a)
    elif pivot == 1:
        x = (a, b, c + det / b, d)
    elif pivot == 2:
        x = (a, b + det / c, c, d)
    else:
        x = (a - det / d, b, c, d)
    return XElement(x, "PGL2", p, det)


def iwahori_biinvariant_x(p: int) -> LevelFunction:
    """Indicator of I (E11, 1) I on the chart: u a unit, m21 in pO, m12 in O."""
    return LevelFunction.from_callable(
        p, 3, 0, 1, lambda pt: 1 if (pt[0] != 0 and valuation(pt[0], p) == 0 and (pt[2] == 0 or valuation(pt[2], p) >= 1)) else 0
    )


@dataclass
class EquivarianceReport:
    ok: bool
    depth: int  # V = {v(u) >= depth}
    radius: Fraction  # p^-depth
    checked: int
    failures_by_depth: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"ok": self.ok, "depth": self.depth, "radius": str(self.radius), "checked": self.checked, "failures_by_depth": {str(k): v for k, v in self.failures_by_depth.items()}}


def _random_chart_point(rng: random.Random, p: int, depth: int, digits: int) -> tuple[Fraction, Fraction, Fraction]:
    unit = rng.randrange(1, p ** digits)
    while unit % p == 0:
        unit = rng.randrange(1, p ** digits)
    return (Fraction(p) ** depth * unit, Fraction(rng.randrange(p ** digits)), Fraction(rng.randrange(p ** digits)))


def check_equivariance(p: int, m: int, rng: random.Random, samples: int = 20, points_per_depth: int = 6, max_depth: int = 8, tau: AdmissibleMapData | None = None) -> EquivarianceReport:
    """tau(h K v) = h K tau(v) for sampled h in K0, k in K_m, and v with v(u) >= depth.

    Compared through K_m double-coset labels on X. The neighborhood depth is
    discovered: the least depth from which every deeper tested point passes.
    """
    hs = [(random_K0(rng, p, "PGL2"), random_K0(rng, p, "PGL2")) for _ in range(samples)]
    failures = {}
    total = 0
    for depth in range(1, max_depth + 1):
        bad = 0
        for _ in range(points_per_depth):
            pt = _random_chart_point(rng, p, depth, m + depth + 2)
            g = chart_group_matrix(pt)
            tv = chart_x_point(tau(pt), p) if tau is not None else tau_global(g, p)
            for h1, h2 in hs:
                k1, k2 = random_Km(rng, p, m, "PGL2"), random_Km(rng, p, m, "PGL2")
                hk1, hk2 = mmul(h1, k1), mmul(h2, k2)
                moved = mmul(mmul(hk1, g), minv(hk2))
                lhs = tau_global(moved, p).label(m)
                rhs = tv.act(h1, h2).label(m)
                total += 1
                if lhs != rhs:
                    bad += 1
        failures[depth] = bad
    good_from = max_depth + 1
    for depth in range(max_depth, 0, -1):
        if failures[depth]:
            break
        good_from = depth
    ok = good_from <= max_depth
    return EquivarianceReport(ok, good_from, Fraction(1, p ** good_from) if ok else Fraction(0), total, failures)


def deep_cell_crosscheck(a: int, m: int, p: int, tau: AdmissibleMapData | None = None, translates: Sequence | None = None, enforce_depth: bool = True) -> bool:
    """tau^*(T^a 1_{K_m iota_X(0) K_m}) = 1_{K_m iota_G(a) K_m} on the PGL2 boundary chart.

    Both sides are K_m-biinvariant, and on the chart the unipotent parts of
    K_m move m12, m21 by p^m O while fixing u, and diag(1, 1 + p^m O) moves u
    within u (1 + p^m O). So both factor through (m12, m21 mod p^m, u mod
    p^(v(u) + m)), and it suffices to compare them there, for v(u) in a band
    around a (off the band both sides vanish: v(u) is the valuation of the
    normalized determinant, resp. of delta).

    translates: pairs (k1, k2) in K0 replacing iota by k1 iota k2^-1 on both
    sides; below the depth threshold some translate disagrees.
    enforce_depth=False skips the NotDeep guard (for the negative control).
    """
    threshold = depth_threshold(m, p, "PGL2")
    if enforce_depth and a <= threshold:
        raise NotDeep(f"a = {a} is not beyond N({m}) = {threshold}")
    chart = NCChart.pgl2_boundary(p)
    tau = tau or AdmissibleMapData.identity(chart)
    tau.require_admissible()
    pairs = list(translates) if translates is not None else [(IDENTITY, IDENTITY)]
    mod = p ** m
    for k1, k2 in pairs:
        if not _crosscheck_one(a, m, p, tau, k1, k2, mod):
            return False
    return True


def _crosscheck_one(a, m, p, tau, k1, k2, mod) -> bool:
    chart = tau.chart
    base_label = iota_X(0, "PGL2", p).act(k1, k2).label(m)
    k1inv = minv(k1)
    for shift in (-1, 0, 1):
        vu = a + shift
        if vu < chart.domain_depth:
            continue
        for w in range(1, mod * p if m == 0 else mod):
            if w % p == 0:
                continue
            for m12, m21 in product(range(mod), repeat=2):
                pt = (Fraction(p) ** vu * w, Fraction(m12), Fraction(m21))
                g = mmul(k1inv, mmul(chart_group_matrix(pt), k2))
                g_side = _in_Km_iota_Km(g, a, "PGL2", p, m)
                image = tau(pt)
                scaled = (image[0] / Fraction(p) ** a, image[1], image[2])
                x_side = chart_x_point(scaled, p).label(m) == base_label
                if g_side != x_side:
                    return False
    return True


def cover_negative_test(p: int, d: int = 2) -> dict:
    """Certificates for a step-d and a forced step-1 scaling on the t -> t^d cover."""
    chart = NCChart.cover(p, d)
    tau = AdmissibleMapData.perturbed(chart, {0: {(2,): 1}}, "cover-tau")
    return {"step_d": tau.is_admissible(step=d), "step_1": tau.is_admissible(step=1), "certificate_step_1": tau.certificate(step=1)}
