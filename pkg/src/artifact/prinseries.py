"""Unramified principal series of SL2 at Iwahori level.

Two H-modules on the Iwahori-fixed vectors, both with basis indexed by the
finite Weyl group {e, s}:

* i(chi): normalized induction from the upper Borel B; b_w is supported on
  B w I with b_w(n_w) = 1, where n_e = 1 and n_s = [[0, 1], [-1, 0]].
* i^-(chi): the same from the opposite Borel B^-.

chi is the unramified character with chi(alpha_vee(p)) = z. The Hecke action
is computed algebraically: each module is induced from the theta-subalgebra
A, with cyclic vector b_s (for i) or b_e (for i^-), on which A acts by the
character of :func:`_cyclic_character`; the other basis vector is T_s^-1
applied to the cyclic one. A p-adic coset-sum
oracle for the same matrices lives in :func:`action_oracle`.

The intertwiner R: i(chi) -> i^-(chi) is (Rf)(g) = integral over the lower
unipotent group of f(u g), with vol(lower unipotent(O)) = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Sequence

from .exactalg import Cone, Laurent, RationalFunction, cone_expand, const_term
from .hecke import HeckeElement, T, bernstein_normal_form, mul, value_at_identity
from .padic import LevelFunction, valuation
from .rootdata import ExtAffineWeylElement, RootDatum


class PrincipalSeriesError(ValueError):
    pass


class NonInvertibleAtPoint(PrincipalSeriesError, ZeroDivisionError):
    pass


class ConvergenceRegion(PrincipalSeriesError):
    """A defining integral does not terminate inside the working window."""


Z = Laurent.z(1)
Q = Laurent.q()
SLOTS = ("i", "i-")
INDEX = {"e": 0, "s": 1}


# small matrix kit over RationalFunction

Matrix = list


def rf(x) -> RationalFunction:
    return RationalFunction.coerce(x)


def zeros(n: int) -> Matrix:
    return [[rf(0) for _ in range(n)] for _ in range(n)]


def identity(n: int) -> Matrix:
    return [[rf(1 if i == j else 0) for j in range(n)] for i in range(n)]


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = rf(0)
            for t in range(k):
                if a[i][t] and b[t][j]:
                    acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(c, a: Matrix) -> Matrix:
    c = rf(c)
    return [[c * x for x in row] for row in a]


def mat_sub(a: Matrix, b: Matrix) -> Matrix:
    return mat_add(a, mat_scale(-1, b))


def mat_eq(a: Matrix, b: Matrix) -> bool:
    return all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def trace(a: Matrix) -> RationalFunction:
    acc = rf(0)
    for i in range(len(a)):
        acc = acc + a[i][i]
    return acc


def det2(a: Matrix) -> RationalFunction:
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]


def inv2(a: Matrix) -> Matrix:
    d = det2(a)
    if not d:
        raise NonInvertibleAtPoint("singular matrix")
    di = d.inverse()
    return [[a[1][1] * di, -a[0][1] * di], [-a[1][0] * di, a[0][0] * di]]


def mat_evaluate(a: Matrix, q, z) -> list[list]:
    """Numeric values at (q, z); raises NonInvertibleAtPoint at a pole."""
    out = []
    for row in a:
        vals = []
        for x in row:
            try:
                vals.append(_eval_rf(x, q, z))
            except ZeroDivisionError as exc:
                raise NonInvertibleAtPoint(f"pole at z = {z}") from exc
        out.append(vals)
    return out


def _eval_rf(x: RationalFunction, q, z):
    num = _eval_laurent(x.num, q, z)
    den = Fraction(1)
    for d in x.den:
        den *= _eval_laurent(d, q, z)
    if den == 0:
        raise ZeroDivisionError("pole")
    return num / den


def _eval_laurent(f: Laurent, q, z):
    total = Fraction(0)
    for key, c in f.items():
        ve = key[0] if key else 0
        ze = key[1] if len(key) > 1 else 0
        if ve % 2:
            raise PrincipalSeriesError("odd power of v has no value at a rational q")
        total += c * Fraction(q) ** (ve // 2) * Fraction(z) ** ze
    return total


# characters

@dataclass(frozen=True)
class CharacterPoint:
    """Unramified character chi(t_lam) = z^lam on the coweight lattice."""

    z: object = None

    def coordinate(self):
        return Z if self.z is None else self.z

    def __call__(self, lam: Sequence[int]):
        (k,) = tuple(lam)
        return rf(self.coordinate()) ** k if self.z is None else Fraction(self.z) ** k


# the modules

def _sl2() -> RootDatum:
    return RootDatum.preset("SL2")


def _check_datum(datum: RootDatum) -> None:
    if datum.name != "SL2":
        raise PrincipalSeriesError("the principal series model is implemented for SL2 only")


@lru_cache(maxsize=None)
def _change_of_basis(slot: str) -> tuple:
    """Columns: geometric basis (b_e, b_s) in the T_w (x) 1 basis ordered (e, s)."""
    qi = RationalFunction(Laurent.const(1), Q)
    # T_s^-1 = q^-1 T_s + (q^-1 - 1)
    tinv = [qi - 1, qi]
    if slot == "i":
        cols = [tinv, [rf(1), rf(0)]]
    else:
        cols = [[rf(1), rf(0)], tinv]
    p = [[cols[j][i] for j in range(2)] for i in range(2)]
    return p, inv2(p)


def _cyclic_character(slot: str) -> RationalFunction:
    """theta_alpha_vee on the cyclic vector: q/z on i(chi), q z on i^-(chi).

    These are the unnormalized parameters z/q (for B, inverted) and q z (for
    B^-) of the normalized inductions, with theta_lam = T_{t_lam} for
    dominant lam.
    """
    if slot == "i":
        return rf(Q) * RationalFunction(Laurent.const(1), Z)
    return rf(Q * Z)


def _induced_action(h: HeckeElement, slot: str) -> Matrix:
    """Left action on H (x)_A chi^(+-1) in the basis T_w (x) 1, via right normal forms."""
    datum = h.datum
    base = _cyclic_character(slot)
    finite = datum.finite_weyl
    order = {w: i for i, w in enumerate(finite)}
    out = zeros(len(finite))
    for j, w in enumerate(finite):
        prod = mul(h, T(datum.finite_element(w)))
        if not prod:
            continue
        form = bernstein_normal_form(prod, side="right")
        for (lam, w2), c in form.items():
            (k,) = lam
            out[order[w2]][j] = out[order[w2]][j] + rf(c) * base ** k
    return out


class PSModel:
    """Iwahori-fixed vectors of i(chi) or i^-(chi) with cached generator matrices."""

    def __init__(self, slot: str, datum: RootDatum | None = None):
        if slot not in SLOTS:
            raise PrincipalSeriesError(f"slot must be one of {SLOTS}")
        self.datum = datum or _sl2()
        _check_datum(self.datum)
        self.slot = slot
        self._basis_cache: dict[ExtAffineWeylElement, Matrix] = {}

    def act_by_normal_form(self, h: HeckeElement) -> Matrix:
        """Matrix of h in the geometric basis, computed directly from normal forms."""
        p, pinv = _change_of_basis(self.slot)
        return mat_mul(pinv, mat_mul(_induced_action(h, self.slot), p))

    def generator(self, i: int) -> Matrix:
        s = self.datum.affine_simple_reflections[i]
        return self.basis_matrix(s)

    def basis_matrix(self, w: ExtAffineWeylElement) -> Matrix:
        if w not in self._basis_cache:
            word, omega = w.reduced_word(check=False)
            if len(word) <= 1:
                self._basis_cache[w] = self.act_by_normal_form(T(w))
            else:
                m = identity(2)
                for i in word:
                    m = mat_mul(m, self.generator(i))
                if omega != self.datum.identity():
                    m = mat_mul(m, self.basis_matrix(omega))
                self._basis_cache[w] = m
        return self._basis_cache[w]

    def act(self, h: HeckeElement) -> Matrix:
        out = zeros(2)
        for w, c in h.terms.items():
            out = mat_add(out, mat_scale(c, self.basis_matrix(w)))
        return out


@lru_cache(maxsize=None)
def model(slot: str) -> PSModel:
    return PSModel(slot)


def act(h: HeckeElement, slot: str = "i") -> Matrix:
    """Matrix of the left action of h on i(chi)^I ("i") or i^-(chi)^I ("i-")."""
    _check_datum(h.datum)
    return model(slot).act(h)


def pi_matrix() -> Matrix:
    """i(chi)^I -> C_chi -> i^-(chi)^I in the aligned geometric bases."""
    out = zeros(2)
    out[0][0] = rf(1)
    return out


# the intertwiner

def _solve_nullspace(rows: list[list[RationalFunction]], ncols: int) -> list[list[RationalFunction]]:
    """Basis of the right nullspace by exact Gauss-Jordan elimination."""
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = m[r][col].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col]:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        vec = [rf(0)] * ncols
        vec[fcol] = rf(1)
        for i, pcol in enumerate(pivots):
            vec[pcol] = -m[i][fcol]
        basis.append(vec)
    return basis


@lru_cache(maxsize=None)
def intertwiner_matrix() -> tuple:
    """R with R act_i(T) = act_i-(T) R for all generators, normalized by R[s][s] = 1.

    The normalization is the one of the integral over the lower unipotent
    group with vol = 1 (see :func:`intertwiner_oracle`).
    """
    gens_i = [model("i").generator(k) for k in range(2)]
    gens_m = [model("i-").generator(k) for k in range(2)]
    rows = []
    # unknown r = (r00, r01, r10, r11); equation (R A - B R)[a][b] = 0
    for a_mat, b_mat in zip(gens_i, gens_m):
        for a in range(2):
            for b in range(2):
                row = [rf(0)] * 4
                for t in range(2):
                    row[2 * a + t] = row[2 * a + t] + a_mat[t][b]
                    row[2 * t + b] = row[2 * t + b] - b_mat[a][t]
                rows.append(row)
    basis = _solve_nullspace(rows, 4)
    if len(basis) != 1:
        raise PrincipalSeriesError(f"intertwiner space has dimension {len(basis)}")
    vec = basis[0]
    if not vec[3]:
        raise PrincipalSeriesError("cannot normalize the intertwiner")
    scale = vec[3].inverse()
    vec = [x * scale for x in vec]
    r = [[vec[0], vec[1]], [vec[2], vec[3]]]
    if not det2(r):
        raise PrincipalSeriesError("intertwiner is degenerate")
    return tuple(tuple(row) for row in r)


def intertwiner() -> Matrix:
    return [list(row) for row in intertwiner_matrix()]


def intertwiner_at(z, q) -> list[list[Fraction]]:
    r = mat_evaluate(intertwiner(), q, z)
    if r[0][0] * r[1][1] - r[0][1] * r[1][0] == 0:
        raise NonInvertibleAtPoint(f"R is singular at z = {z}")
    return r


# p-adic oracles

_INF = 10 ** 9
_N_E = (Fraction(1), Fraction(0), Fraction(0), Fraction(1))
_N_S = (Fraction(0), Fraction(1), Fraction(-1), Fraction(0))
_REPS = {"e": _N_E, "s": _N_S}


def _v(x, p):
    return _INF if x == 0 else valuation(x, p)


def basis_function(slot: str, w: str, g, p: int, z, q=None) -> Fraction:
    """Value of the geometric basis vector b_w at the matrix g = (a, b, c, d).

    Normalized induction is realized by the unnormalized parameter z/q on B
    and q z on B^-.
    """
    q = p if q is None else q
    a, b, c, d = g
    if slot == "i":
        zz = Fraction(z) / q
        if w == "e":
            return zz ** (-_v(d, p)) if _v(c, p) > _v(d, p) else Fraction(0)
        return zz ** (-_v(c, p)) if _v(c, p) <= _v(d, p) else Fraction(0)
    zz = Fraction(z) * q
    if w == "e":
        return zz ** _v(a, p) if _v(a, p) <= _v(b, p) else Fraction(0)
    return zz ** _v(b, p) if _v(b, p) < _v(a, p) else Fraction(0)


def _mm(x, y):
    a, b, c, d = x
    e, f, g, h = y
    return (a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)


def action_oracle(w: ExtAffineWeylElement, slot: str, p: int, z) -> list[list[Fraction]]:
    """(T_w f)(n_x) = sum over left I-cosets x' I in I w I of f(n_x x'), at numeric z, q = p."""
    from .cosets import left_coset_reps

    reps = left_coset_reps(w, p)
    out = [[Fraction(0)] * 2 for _ in range(2)]
    for xi, xn in enumerate("es"):
        for yi, yn in enumerate("es"):
            out[xi][yi] = sum((basis_function(slot, yn, _mm(_REPS[xn], r), p, z) for r in reps), Fraction(0))
    return out


def intertwiner_oracle(p: int, z, depth: int = 8) -> list[list[Fraction]]:
    """(R b_y)(n_x) by integrating over the lower unipotent group shell by shell.

    Shells {v(t) = k} for -depth <= k < depth are summed exactly, each over
    the p^2 - p unit residues u with t = u p^k; {v(t) >= depth} is one ball.
    The result is the depth-truncated integral, so it approaches R as depth
    grows when |z| < 1.
    """
    out = [[Fraction(0)] * 2 for _ in range(2)]
    units = [u for u in range(1, p * p) if u % p]
    for xi, xn in enumerate("es"):
        for yi, yn in enumerate("es"):
            acc = Fraction(0)
            for k in range(-depth, depth):
                cell = Fraction(1, p) ** (k + 2)
                for u in units:
                    t = Fraction(u) * Fraction(p) ** k
                    g = _mm((Fraction(1), Fraction(0), t, Fraction(1)), _REPS[xn])
                    acc += cell * basis_function("i", yn, g, p, z)
            # the ball v(t) >= depth, sampled at t = 0
            g = _REPS[xn]
            acc += Fraction(1, p) ** depth * basis_function("i", yn, g, p, z)
            out[xi][yi] = acc
    return out


def interpolate_intertwiner(p: int, samples: Sequence, depth: int = 8) -> list[list[list[float]]]:
    """Fit (1 - z) * R_oracle(z) entrywise by a polynomial of degree len(samples) - 1.

    Returns coefficient lists (constant term first) per entry, in floats.
    """
    import numpy as np

    zs = [Fraction(s) for s in samples]
    vals = [intertwiner_oracle(p, s, depth) for s in zs]
    vander = np.array([[float(s) ** k for k in range(len(zs))] for s in zs])
    out = []
    for i in range(2):
        row = []
        for j in range(2):
            rhs = np.array([float((1 - s) * v[i][j]) for s, v in zip(zs, vals)])
            row.append(list(np.linalg.solve(vander, rhs)))
        out.append(row)
    return out


# sigma_chi on the rank-one matrix model

def iwahori_x_label(x, p: int) -> tuple[int, str, str]:
    """I x I orbit of a rank-one matrix x = y c: (min valuation, column type, row type).

    Column type "e" if the primitive column y has y2 in pO, else "s"; row
    type "e" if the primitive row c has c1 a unit, else "s".
    """
    a, b, c, d = (Fraction(t) for t in x)
    if a * d - b * c != 0 or not any((a, b, c, d)):
        raise PrincipalSeriesError("not a nonzero rank-one matrix")
    mv = min(_v(t, p) for t in (a, b, c, d))
    # a column and a row of x span y and c up to scalars
    col = (a, c) if (a, c) != (0, 0) else (b, d)
    row = (a, b) if (a, b) != (0, 0) else (c, d)
    col_type = "e" if _v(col[1], p) > _v(col[0], p) else "s"
    row_type = "e" if _v(row[0], p) <= _v(row[1], p) else "s"
    return mv, col_type, row_type


def x_nu(nu: int, p: int) -> Callable:
    """Indicator of the I x I orbit of p^-nu E11 on the rank-one model."""

    def f(x):
        return Fraction(1) if iwahori_x_label(x, p) == (-nu, "e", "e") else Fraction(0)

    return f


def x_zero(p: int) -> LevelFunction:
    """x_0 = 1_{I E11 I}: x11 a unit, x21 and x22 in pO, x12 in O (on rank-one points)."""
    vals = {(a, b, 0, 0): 1 for a in range(1, p) for b in range(p)}
    return LevelFunction(p, 4, 0, 1, vals)


def x_spherical(p: int) -> LevelFunction:
    """Indicator of the K0-orbit of E11: entries in O, not all in pO."""
    from itertools import product

    vals = {cell: 1 for cell in product(range(p), repeat=4) if any(cell)}
    return LevelFunction(p, 4, 0, 1, vals)


def spherical_projection() -> Matrix:
    """i(chi)^I -> i(chi)^K0 -> i^-(chi)^I: average over K0, then the spherical vector."""
    q = rf(Q)
    total = q + 1
    return [[rf(1) / total, q / total], [rf(1) / total, q / total]]


def sigma_chi(f, z, p: int, window: int = 8) -> list[list[Fraction]]:
    """Operator i(chi)^I -> i^-(chi)^I attached to an I-biinvariant f on X.

    (sigma(f) phi)(g) = integral over U\\G of f(h^-1 E11 g) phi(h) dh. With
    h = t k this is (1 / (q + 1)) sum over k in K0/I of phi(k) times
    sum_j (q z)^j f(p^-j k^-1 E11 g), j = v(t_1). The j-sum runs over
    |j| <= window and must vanish at the edges.
    """
    q = p
    evaluate = f if callable(f) and not isinstance(f, LevelFunction) else (lambda x: f(tuple(x)))
    coset_reps = [_N_E] + [_mm((Fraction(1), Fraction(b), Fraction(0), Fraction(1)), _N_S) for b in range(p)]
    e11 = (Fraction(1), Fraction(0), Fraction(0), Fraction(0))
    out = [[Fraction(0)] * 2 for _ in range(2)]
    zq = Fraction(z) * q
    for xi, xn in enumerate("es"):
        for yi, yn in enumerate("es"):
            acc = Fraction(0)
            for k in coset_reps:
                phi = basis_function("i", yn, k, p, z)
                if not phi:
                    continue
                a, b, c, d = k
                kinv = (d, -b, -c, a)
                base = _mm(_mm(kinv, e11), _REPS[xn])
                for j in range(-window, window + 1):
                    val = evaluate(tuple(Fraction(p) ** (-j) * t for t in base))
                    if val and abs(j) == window:
                        raise ConvergenceRegion(f"f does not vanish at the window edge j = {j}")
                    acc += phi * zq ** j * val
            out[xi][yi] = acc / (q + 1)
    return out


# Plancherel

POSITIVE = Cone.positive(1)


def plancherel_integrand(h: HeckeElement) -> RationalFunction:
    """Tr(act_i-(h) Pi R^-1) as a rational function of v and z."""
    return trace(mat_mul(act(h, "i-"), mat_mul(pi_matrix(), inv2(intertwiner()))))


def plancherel_rhs(h: HeckeElement, order: int | None = None) -> RationalFunction:
    """Constant term of the expansion of the Plancherel integrand in the positive z-cone."""
    integrand = plancherel_integrand(h)
    if order is None:
        order = 1
    return const_term(cone_expand(integrand, POSITIVE, order))


@lru_cache(maxsize=None)
def kappa() -> RationalFunction:
    """Calibration constant: value_at_identity(T_e) / plancherel_rhs(T_e)."""
    unit = HeckeElement.unit(_sl2())
    rhs = plancherel_rhs(unit)
    if not rhs:
        raise PrincipalSeriesError("calibration value vanishes")
    return rf(value_at_identity(unit)) / rhs


def plancherel_check(h: HeckeElement) -> tuple[RationalFunction, RationalFunction, bool]:
    lhs = rf(value_at_identity(h))
    rhs = kappa() * plancherel_rhs(h)
    return lhs, rhs, lhs == rhs
