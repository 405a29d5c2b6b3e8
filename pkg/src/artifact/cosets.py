"""Matrix models of SL2 and PGL2 over Q_p.

Entries are exact rationals, read as elements of Q_p. Conventions:

* K0 = SL2(O) or PGL2(O); K_m = kernel of reduction mod p^m.
* I is the upper Iwahori subgroup (lower-left entry in pO).
* For SL2 the coweight basis vector alpha_vee is diag(p, 1/p); for PGL2 the
  basis vector omega is diag(p, 1). The simple reflection s1 is
  [[0, 1], [-1, 0]] and t_lam * s1 is represented by diag(lam) * s1.
* The X-models: rank-one 2x2 matrices for SL2 with (g1, g2).x = g1 x g2^-1;
  for PGL2 pairs (x, delta), x of rank one and delta a scalar, modulo
  t.(x, delta) = (t x, t^2 delta), with (g1, g2).(x, delta) =
  (g1 x g2^-1, det(g1) / det(g2) * delta).
* The base points are e in G and x_base = E11 (SL2) or (E11, 1) (PGL2). The
  torus element iota(a) is diag(p^-a, p^a) for SL2 and diag(1, p^a) for PGL2,
  and the X-side representative is iota(a).x_base.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

from .hecke import HeckeElement
from .padic import LevelFunction, PAdicScalar, integrate_line, residue, valuation
from .rootdata import ExtAffineWeylElement, RootDatum

class CosetError(ValueError):
    pass


class PrecisionExhausted(CosetError):
    """Entries do not carry enough p-adic precision for the requested reduction."""


class NotDeep(CosetError):
    """The element is not beyond the depth threshold N(m)."""


Mat = tuple  # (a, b, c, d) with Fraction entries


def mat(a, b, c, d) -> Mat:
    return (Fraction(a), Fraction(b), Fraction(c), Fraction(d))


def mmul(x: Mat, y: Mat) -> Mat:
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def mdet(x: Mat) -> Fraction:
    return x[0] * x[3] - x[1] * x[2]


def minv(x: Mat) -> Mat:
    det = mdet(x)
    if det == 0:
        raise ZeroDivisionError("singular matrix")
    a, b, c, d = x
    return (d / det, -b / det, -c / det, a / det)


def mscale(t, x: Mat) -> Mat:
    t = Fraction(t)
    return tuple(t * e for e in x)


IDENTITY = mat(1, 0, 0, 1)
S1 = mat(0, 1, -1, 0)
E11 = mat(1, 0, 0, 0)
E12 = mat(0, 1, 0, 0)


def _entries_from(value) -> Mat:
    if isinstance(value, GroupElement):
        return value.m
    flat = []
    for e in value:
        if isinstance(e, (list, tuple)):
            flat.extend(e)
        else:
            flat.append(e)
    out = []
    for e in flat:
        out.append(e.to_rational() if isinstance(e, PAdicScalar) else Fraction(e))
    if len(out) != 4:
        raise CosetError("a 2x2 matrix needs four entries")
    return tuple(out)


@dataclass(frozen=True)
class GroupElement:
    """A 2x2 matrix over Q (inside Q_p) tagged with its group."""

    m: Mat
    group: str
    p: int

    def __post_init__(self):
        if self.group not in ("SL2", "PGL2"):
            raise CosetError(f"unknown group {self.group!r}")
        det = mdet(self.m)
        if self.group == "SL2" and det != 1:
            raise CosetError(f"determinant {det} is not 1")
        if det == 0:
            raise CosetError("singular matrix")

    @classmethod
    def of(cls, entries, group: str, p: int) -> "GroupElement":
        return cls(_entries_from(entries), group, p)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(mmul(self.m, other.m), self.group, self.p)

    def inverse(self) -> "GroupElement":
        return GroupElement(minv(self.m), self.group, self.p)

    def det(self) -> Fraction:
        return mdet(self.m)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GroupElement) or other.group != self.group:
            return NotImplemented
        if self.group == "SL2":
            return self.m == other.m
        # projective equality: entrywise proportional
        return _proportional(self.m, other.m)

    def __hash__(self) -> int:
        if self.group == "SL2":
            return hash(self.m)
        pivot = next(e for e in self.m if e != 0)
        return hash(tuple(e / pivot for e in self.m))

    def __repr__(self) -> str:
        a, b, c, d = self.m
        return f"{self.group}[[{a}, {b}], [{c}, {d}]]"


def _proportional(x: Mat, y: Mat) -> bool:
    return all(x[i] * y[j] == x[j] * y[i] for i in range(4) for j in range(4))


def datum_for(group: str) -> RootDatum:
    return RootDatum.preset(group)


# valuations and reductions

def vmat(x: Mat, p: int) -> list:
    return [valuation(e, p) for e in x]


def is_integral(x: Mat, p: int) -> bool:
    return all(e == 0 or valuation(e, p) >= 0 for e in x)


def reduce_mod(x: Mat, p: int, m: int) -> tuple[int, ...]:
    return tuple(residue(e, p, m) for e in x)


def in_K0(x: Mat, p: int, group: str) -> bool:
    if group == "SL2":
        return is_integral(x, p) and mdet(x) == 1
    y = _primitive_scaling(x, p)
    return valuation(mdet(y), p) == 0


def _primitive_scaling(x: Mat, p: int) -> Mat:
    v = min(valuation(e, p) for e in x if e != 0)
    return mscale(Fraction(p) ** (-v), x)


def in_Km(x: Mat, p: int, m: int, group: str) -> bool:
    """Membership in the principal congruence subgroup K_m (projectively for PGL2)."""
    if group == "SL2":
        if not (is_integral(x, p) and mdet(x) == 1):
            return False
        r = reduce_mod(x, p, m)
        return r == (1, 0, 0, 1 % p ** m)
    y = _primitive_scaling(x, p)
    if valuation(mdet(y), p) != 0:
        return False
    r = reduce_mod(y, p, m)
    return r[1] == 0 and r[2] == 0 and r[0] == r[3] and r[0] % p != 0


# random compact elements

def random_K0(rng: random.Random, p: int, group: str, steps: int = 6) -> Mat:
    """Random element of K0 as a product of elementary integral matrices."""
    out = IDENTITY
    for _ in range(steps):
        kind = rng.randrange(3)
        x = rng.randrange(-2 * p * p, 2 * p * p + 1)
        if kind == 0:
            g = mat(1, x, 0, 1)
        elif kind == 1:
            g = mat(1, 0, x, 1)
        else:
            u = rng.choice([k for k in range(1, 4 * p) if k % p])
            u = u if rng.random() < 0.5 else -u
            if group == "SL2":
                g = mat(u, 0, 0, Fraction(1, u))
            else:
                w = rng.choice([k for k in range(1, 4 * p) if k % p])
                g = mat(u, 0, 0, w)
        out = mmul(out, g)
    if rng.random() < 0.5:
        out = mmul(out, S1)
    return out


def random_Km(rng: random.Random, p: int, m: int, group: str, steps: int = 4) -> Mat:
    out = IDENTITY
    pm = p ** m
    for _ in range(steps):
        kind = rng.randrange(3)
        x = pm * rng.randrange(-p, p + 1)
        if kind == 0:
            g = mat(1, x, 0, 1)
        elif kind == 1:
            g = mat(1, 0, x, 1)
        else:
            u = 1 + pm * rng.randrange(-p, p + 1)
            if u == 0:
                u = 1
            g = mat(u, 0, 0, Fraction(1, u)) if group == "SL2" else mat(u, 0, 0, 1 + pm * rng.randrange(0, p))
        out = mmul(out, g)
    return out


# Cartan decomposition

@dataclass(frozen=True)
class DoubleCosetLabel:
    """Label of a double coset.

    ``side`` is "G" or "X"; ``coweight`` is the K0-level label; ``depth`` the
    level m of K_m (0 for K0); ``fine`` holds residue data at depth m.
    """

    group: str
    side: str
    coweight: tuple
    depth: int = 0
    fine: tuple = field(default=())

    def to_json(self) -> dict:
        return {
            "group": self.group,
            "side": self.side,
            "coweight": list(self.coweight),
            "depth": self.depth,
            "fine": [list(x) if isinstance(x, tuple) else x for x in self.fine],
        }


def _check_precision(entries, margin_needed: int) -> None:
    for e in entries:
        if isinstance(e, PAdicScalar) and not e.is_zero() and e.prec < margin_needed:
            raise PrecisionExhausted(f"entry {e!r} carries {e.prec} digits, need {margin_needed}")


def smith_cartan(g, p: int | None = None, group: str | None = None) -> tuple[DoubleCosetLabel, GroupElement, GroupElement]:
    """Cartan decomposition g = k1 * d * k2 with k1, k2 in K0.

    SL2: d = diag(p^a, p^-a), label a * alpha_vee with a >= 0.
    PGL2: d = diag(p^a, 1) up to the center, label a * omega with a >= 0.
    The reconstruction is verified exactly.
    """
    if isinstance(g, GroupElement):
        x, p, group = g.m, g.p, g.group
    else:
        raw = list(g)
        flat = []
        for e in raw:
            flat.extend(e if isinstance(e, (list, tuple)) else [e])
        vals = [e.val for e in flat if isinstance(e, PAdicScalar) and not e.is_zero()]
        if vals:
            _check_precision(flat, 2 * (max(vals) - min(vals)) + 1)
        x = _entries_from(flat)
    if p is None or group is None:
        raise CosetError("need p and group")
    # Smith normal form over Z_p, tracking the unimodular factors
    left, right = IDENTITY, IDENTITY
    y = x
    vals = vmat(y, p)
    idx = min(range(4), key=lambda i: (vals[i], i))
    r, c = divmod(idx, 2)
    if r == 1:
        y = mmul(S1, y)
        left = mmul(left, minv(S1))
    if c == 1:
        y = mmul(y, minv(S1))
        right = mmul(S1, right)
    a, b, cc, d = y
    # clear below and to the right of the pivot
    lower = mat(1, 0, -cc / a, 1)
    y = mmul(lower, y)
    left = mmul(left, minv(lower))
    upper = mat(1, -y[1] / y[0], 0, 1)
    y = mmul(y, upper)
    right = mmul(minv(upper), right)
    d1, d2 = y[0], y[3]
    v1, v2 = valuation(d1, p), valuation(d2, p)
    u1 = d1 / Fraction(p) ** v1
    u2 = d2 / Fraction(p) ** v2
    if group == "SL2":
        # d1 d2 = 1 with v1 <= v2, so v1 = -a
        a_label = -v1
        dunit = mat(u1, 0, 0, u2)
        left = mmul(left, dunit)
        # the core diag(p^-a, p^a) is S1 * diag(p^a, p^-a) * S1^-1
        left = mmul(left, S1)
        right = mmul(minv(S1), right)
        dmat = mat(Fraction(p) ** a_label, 0, 0, Fraction(p) ** (-a_label))
    else:
        a_label = v2 - v1
        scale = Fraction(p) ** v1 * u1
        dunit = mat(1, 0, 0, u2 / u1)
        left = mmul(left, dunit)
        left = mmul(left, S1)
        right = mmul(minv(S1), right)
        dmat = mat(Fraction(p) ** a_label, 0, 0, 1)
        left = mscale(scale, left)
        # absorb the scalar so k1 is primitive with unit determinant
        left = _primitive_scaling(left, p)
    k1 = GroupElement(left, group, p)
    k2 = GroupElement(right, group, p)
    recon = mmul(mmul(left, dmat), right)
    if group == "SL2":
        ok = recon == x and in_K0(left, p, group) and in_K0(right, p, group)
    else:
        ok = _proportional(recon, x) and in_K0(left, p, group) and in_K0(right, p, group)
    if not ok:
        raise CosetError(f"Cartan reconstruction failed for {x}")
    label = DoubleCosetLabel(group, "G", (a_label,))
    return label, k1, k2


def iota_G_matrix(a: int, group: str, p: int) -> Mat:
    """The torus point iota(a): diag(p^-a, p^a) (SL2) or diag(1, p^a) (PGL2)."""
    if group == "SL2":
        return mat(Fraction(p) ** (-a), 0, 0, Fraction(p) ** a)
    return mat(1, 0, 0, Fraction(p) ** a)


def cartan_with_iota(g: GroupElement) -> tuple[int, Mat, Mat]:
    """g = k1 * iota(a) * k2 with a >= 0 (up to the center for PGL2)."""
    label, k1, k2 = smith_cartan(g)
    a = label.coweight[0]
    # diag(p^a, p^-a) = S1^-1 iota(a) S1 for SL2; diag(p^a, 1) ~ S1^-1 diag(1, p^a) S1
    left = mmul(k1.m, minv(S1))
    right = mmul(S1, k2.m)
    return a, left, right


# Iwahori decomposition

def weyl_matrix(w: ExtAffineWeylElement, p: int) -> Mat:
    """Monomial matrix representing t_lam * w."""
    group = w.datum.name
    (k,) = w.translation
    if group == "SL2":
        t = mat(Fraction(p) ** k, 0, 0, Fraction(p) ** (-k))
    elif group == "PGL2":
        t = mat(Fraction(p) ** k, 0, 0, 1)
    else:
        raise CosetError(f"no matrix model for {group}")
    flip = w.finite != ((1,),)
    return mmul(t, S1) if flip else t


def iwahori_coset(g, p: int | None = None, group: str | None = None) -> ExtAffineWeylElement:
    """Label of IgI by pivoting on the weighted valuation v(g_ij) + [i=1]/2 + [j=2]/2."""
    if isinstance(g, GroupElement):
        x, p, group = g.m, g.p, g.group
    else:
        x = _entries_from(g)
    datum = datum_for(group)
    vals = vmat(x, p)
    weights = [vals[0] + 0.5, vals[1] + 1.0, vals[2], vals[3] + 0.5]
    idx = min(range(4), key=lambda i: (weights[i], i))
    r, c = divmod(idx, 2)
    y = list(x)
    piv = y[idx]
    # clear the other entry in the pivot column by a row operation inside I
    orow = 1 - r
    f = y[2 * orow + c] / piv
    for j in range(2):
        y[2 * orow + j] -= f * y[2 * r + j]
    # clear the other entry in the pivot row by a column operation inside I
    ocol = 1 - c
    f = y[2 * r + ocol] / piv
    for i in range(2):
        y[2 * i + ocol] -= f * y[2 * i + c]
    if r == c:
        k1, k2 = valuation(y[0], p), valuation(y[3], p)
        flip = 0
    else:
        k1, k2 = valuation(y[1], p), valuation(y[2], p)
        flip = 1
    if group == "SL2":
        lam = (k1,)
    else:
        lam = (k1 - k2,)
    finite = ((-1,),) if flip else ((1,),)
    return ExtAffineWeylElement(datum, lam, finite)


# X-side orbits and labels

def x_orbit(x) -> DoubleCosetLabel:
    """K0-orbit label of a rank-one matrix: its minimal entry valuation."""
    if isinstance(x, XElement):
        return x.k0_label()
    raise CosetError("x_orbit expects an XElement")


@dataclass(frozen=True)
class XElement:
    """Point of the X-model: rank-one matrix, with delta for PGL2."""

    m: Mat
    group: str
    p: int
    delta: Fraction | None = None

    def __post_init__(self):
        if all(e == 0 for e in self.m):
            raise CosetError("X-points are nonzero")
        if mdet(self.m) != 0:
            raise CosetError("X-points have rank one")
        if self.group == "PGL2" and (self.delta is None or self.delta == 0):
            raise CosetError("PGL2 X-points carry a nonzero delta")

    def act(self, g1: Mat, g2: Mat) -> "XElement":
        y = mmul(mmul(g1, self.m), minv(g2))
        if self.group == "SL2":
            return XElement(y, self.group, self.p)
        return XElement(y, self.group, self.p, self.delta * mdet(g1) / mdet(g2))

    def k0_label(self) -> DoubleCosetLabel:
        v = min(valuation(e, self.p) for e in self.m if e != 0)
        if self.group == "SL2":
            return DoubleCosetLabel("SL2", "X", (v,))
        return DoubleCosetLabel("PGL2", "X", (valuation(self.delta, self.p) - 2 * v,))

    def label(self, m: int) -> DoubleCosetLabel:
        """K_m double-coset label."""
        p = self.p
        v = min(valuation(e, p) for e in self.m if e != 0)
        prim = mscale(Fraction(p) ** (-v), self.m)
        if m == 0:
            return self.k0_label()
        res = reduce_mod(prim, p, m)
        if self.group == "SL2":
            return DoubleCosetLabel("SL2", "X", (v,), m, res)
        delta = self.delta / Fraction(p) ** (2 * v)
        dv = valuation(delta, p)
        dunit = residue(delta / Fraction(p) ** dv, p, m)
        # normalize by u in (Z/p^m)^x acting as (u x, u^2 delta): first unit entry -> 1
        mod = p ** m
        lead = next(e for e in res if e % p)
        u = pow(lead, -1, mod)
        res = tuple(e * u % mod for e in res)
        dunit = dunit * u * u % mod
        return DoubleCosetLabel("PGL2", "X", (dv,), m, (res, dunit))


def iota_X(a: int, group: str, p: int) -> XElement:
    if group == "SL2":
        return XElement(mscale(Fraction(p) ** (-a), E11), "SL2", p)
    return XElement(E11, "PGL2", p, Fraction(p) ** a)


# depth threshold and the bijection

def _in_Km_iota_Km(y: Mat, a: int, group: str, p: int, m: int) -> bool:
    """Whether y lies in K_m iota(a) K_m.

    K_m iota K_m = union over t of h_t iota K_m with h_t = [[1, 0], [p^m t, 1]]
    and t running over O / p^d, where d is the exponent gap of iota; this
    list is a full set of representatives of K_m / (K_m cap iota K_m iota^-1).
    """
    io = iota_G_matrix(a, group, p)
    d = 2 * a if group == "SL2" else a
    ioinv = minv(io)
    for t in range(p ** d):
        h = mat(1, 0, Fraction(-(p ** m) * t), 1)
        if in_Km(mmul(ioinv, mmul(h, y)), p, m, group):
            return True
    return False


@lru_cache(maxsize=None)
def _K0_mod_Km(p: int, m: int, group: str) -> tuple[Mat, ...]:
    """Integral representatives of K0 / K_m."""
    mod = p ** m
    reps = []
    seen = set()
    for a, b, c, d in product(range(mod), repeat=4):
        det = (a * d - b * c) % mod
        if group == "SL2":
            if det != 1 % mod:
                continue
            key = (a, b, c, d)
        else:
            if det % p == 0:
                continue
            lead = next(e for e in (a, b, c, d) if e % p)
            u = pow(lead, -1, mod)
            key = tuple(e * u % mod for e in (a, b, c, d))
            if key in seen:
                continue
            seen.add(key)
        reps.append(_lift(key, p, m, group))
    return tuple(reps)


def _lift(r: tuple[int, ...], p: int, m: int, group: str) -> Mat:
    """An element of K0 reducing to the residue matrix r."""
    a, b, c, d = r
    mod = p ** m
    if group == "PGL2":
        return mat(a, b, c, d) if (a * d - b * c) % p else mat(a, b, c, d + mod)
    # SL2: adjust one entry so the determinant is exactly 1
    if a % p:
        # choose d' = (1 + b c) / a, congruent to d mod p^m
        return mat(a, b, c, Fraction(1 + b * c, a))
    if b % p:
        return mat(a, b, Fraction(a * d - 1, b), d)
    raise CosetError("residue matrix is not invertible")


def km_key(x: Mat, p: int, m: int, group: str) -> tuple[int, ...]:
    """Canonical residue key of the coset x K_m for x in K0."""
    if group == "SL2":
        return reduce_mod(x, p, m)
    res = reduce_mod(_primitive_scaling(x, p), p, m)
    mod = p ** m
    u = pow(next(e for e in res if e % p), -1, mod)
    return tuple(e * u % mod for e in res)


def stabilizer_G(a: int, group: str, p: int, m: int) -> frozenset:
    """Pairs (k1, k2) in (K0/K_m)^2 with k1 iota(a) k2^-1 in K_m iota(a) K_m, as residue keys.

    k1 iota k2^-1 = h iota h' forces k2 = iota^-1 h^-1 k1 iota mod K_m, so the
    stabilizer is swept out by k1 and the coset representatives h_t.
    """
    io = iota_G_matrix(a, group, p)
    ioinv = minv(io)
    d = 2 * a if group == "SL2" else a
    out = set()
    for k1 in _K0_mod_Km(p, m, group):
        for t in range(p ** d):
            h = mat(1, 0, Fraction(-(p ** m) * t), 1)
            k2 = mmul(mmul(ioinv, mmul(h, k1)), io)
            if in_K0(k2, p, group):
                out.add((km_key(k1, p, m, group), km_key(k2, p, m, group)))
    return frozenset(out)


def _generators_K0(p: int, m: int, group: str) -> list[Mat]:
    gens = [mat(1, 1, 0, 1), mat(1, 0, 1, 1), S1]
    if group == "PGL2":
        gens += [mat(u, 0, 0, 1) for u in range(2, p ** m) if u % p]
    return gens


def x_orbit_size(a: int, group: str, p: int, m: int) -> int:
    """Size of the (K0/K_m)^2-orbit of the K_m label of iota_X(a), by breadth-first search."""
    start = iota_X(a, group, p)
    seen = {start.label(m): start}
    frontier = [start]
    gens = _generators_K0(p, m, group)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                for y in (x.act(g, IDENTITY), x.act(IDENTITY, g)):
                    key = y.label(m)
                    if key not in seen:
                        seen[key] = y
                        nxt.append(y)
        frontier = nxt
    return len(seen)


def stabilizers_agree(a: int, group: str, p: int, m: int) -> bool:
    """Whether Stab(iota(a)) equals Stab(iota_X(a)) inside (K0/K_m)^2.

    The G-side stabilizer is listed explicitly; the X-side one is compared
    by containment plus cardinality (orbit-stabilizer).
    """
    stab_g = stabilizer_G(a, group, p, m)
    order = len(_K0_mod_Km(p, m, group))
    stab_x_size = order * order // x_orbit_size(a, group, p, m)
    if len(stab_g) != stab_x_size:
        return False
    base = iota_X(a, group, p)
    target = base.label(m)
    lifts = {km_key(k, p, m, group): k for k in _K0_mod_Km(p, m, group)}
    return all(base.act(lifts[k1], lifts[k2]).label(m) == target for k1, k2 in stab_g)


@lru_cache(maxsize=None)
def depth_threshold(m: int, p: int, group: str = "SL2", search_limit: int = 6) -> int:
    """N(m): the smallest a >= 0 at which the K_m-stabilizers of iota(a) and iota_X(a) agree."""
    for a in range(search_limit + 1):
        if stabilizers_agree(a, group, p, m):
            return a
    raise CosetError(f"stabilizers never agreed up to a = {search_limit}")


def psi_P(g: GroupElement, m: int) -> DoubleCosetLabel:
    """X-side K_m label attached to a deep group element.

    With g = k1 iota(a) k2, returns the K_m label of (k1, k2^-1).iota_X(a).
    """
    a, k1, k2 = cartan_with_iota(g)
    threshold = depth_threshold(m, g.p, g.group)
    if a <= threshold:
        raise NotDeep(f"a = {a} is not beyond N({m}) = {threshold}")
    return iota_X(a, g.group, g.p).act(k1, minv(k2)).label(m)


# the orispheric transform

def flatten(x: Mat) -> tuple:
    return tuple(x)


def indicator_K0(p: int, group: str = "PGL2") -> LevelFunction:
    """1_{K0} as a function on 2x2 matrices (entries in O, unit determinant) at level 1."""
    vals = {}
    for a, b, c, d in product(range(p), repeat=4):
        if (a * d - b * c) % p:
            vals[(a, b, c, d)] = 1
    return LevelFunction(p, 4, 0, 1, vals)


def orispheric_A(f: LevelFunction, g1: GroupElement, g2: GroupElement):
    """A(f)(g1, g2): integral over x in F of f(g1 u(x) g2^-1), vol(U(O)) = 1."""
    base = mmul(g1.m, minv(g2.m))
    direction = mmul(mmul(g1.m, E12), minv(g2.m))
    return integrate_line(f, flatten(base), flatten(direction))


# the convolution oracle

def _simple_coset_reps(s: ExtAffineWeylElement, p: int) -> list[Mat]:
    """Representatives x with IsI = disjoint union of x I."""
    n = weyl_matrix(s, p)
    if s.finite == ((1,),) and s.translation == (0,):
        return [IDENTITY]
    if s.length() == 0:
        return [n]
    if s.translation == (0,):
        return [mmul(mat(1, b, 0, 1), n) for b in range(p)]
    return [mmul(mat(1, 0, p * c, 1), n) for c in range(p)]


def left_coset_reps(w: ExtAffineWeylElement, p: int) -> list[Mat]:
    """Representatives of the q^l(w) left I-cosets in IwI."""
    word, omega = w.reduced_word(check=False)
    simples = w.datum.affine_simple_reflections
    reps = [IDENTITY]
    for i in word:
        reps = [mmul(x, y) for x in reps for y in _simple_coset_reps(simples[i], p)]
    om = weyl_matrix(omega, p)
    return [mmul(x, om) for x in reps]


def hecke_convolution_oracle(w1: ExtAffineWeylElement, w2: ExtAffineWeylElement, p: int, level: int = 8) -> HeckeElement:
    """1_{I w1 I} * 1_{I w2 I} with vol(I) = 1, by enumerating left I-cosets."""
    datum = w1.datum
    group = datum.name
    if w1.length() + w2.length() > level:
        raise PrecisionExhausted(f"total length exceeds the configured bound {level}")
    reps1 = left_coset_reps(w1, p)
    reps2 = left_coset_reps(w2, p)
    candidates = set()
    for x in reps1:
        for y in reps2:
            candidates.add(iwahori_coset(mmul(x, y), p, group))
    terms = {}
    for w in candidates:
        n = weyl_matrix(w, p)
        count = sum(1 for x in reps1 if iwahori_coset(mmul(minv(x), n), p, group) == w2)
        if count:
            terms[w] = count
    result = HeckeElement(datum, terms)
    # total mass check: q^l1 q^l2 = sum c_w q^l(w)
    mass = sum(c * p ** w.length() for w, c in terms.items())
    if mass != len(reps1) * len(reps2):
        raise CosetError("coset count does not balance")
    return result


def hecke_at_q(h: HeckeElement, q: int) -> dict:
    return {w: c.at_q(q) for w, c in h.terms.items()}
