"""Extended affine Hecke algebra in the T-basis, Bernstein elements, and h(1).

Normalization: T_w is the indicator of the Iwahori double coset IwI with
vol(I) = 1, so T_e is the unit and

    T_x T_s = T_{xs}                     if l(xs) > l(x)
    T_x T_s = (q - 1) T_x + q T_{xs}     otherwise,

and T_x T_omega = T_{x omega} for length-zero omega. Coefficients are Laurent
polynomials in v with q = v**2.

With the matrix conventions of :mod:`artifact.cosets`, the dominant
translation t_{alpha_vee} = s1 s0 is represented by diag(p, 1/p); this
orientation is pinned by the coset oracle in the test suite.
"""

from __future__ import annotations

from typing import Iterable, Mapping

from .exactalg import Laurent, Q
from .rootdata import Coweight, ExtAffineWeylElement, RootDatum


class NotDominant(ValueError):
    pass


class NormalFormError(ArithmeticError):
    """The Bernstein rewriting did not terminate or did not reconstruct."""


def _coerce_coeff(c) -> Laurent:
    c = Laurent.coerce(c)
    if not c.depends_only_on_v():
        raise ValueError(f"Hecke coefficients live in Q[v, 1/v], got {c}")
    return c


class HeckeElement:
    """Finite combination sum c_w T_w with Laurent coefficients in v."""

    __slots__ = ("datum", "terms")

    def __init__(self, datum: RootDatum, terms: Mapping[ExtAffineWeylElement, object] | None = None):
        self.datum = datum
        clean: dict[ExtAffineWeylElement, Laurent] = {}
        for w, c in (terms or {}).items():
            c = _coerce_coeff(c)
            if c:
                clean[w] = clean.get(w, Laurent()) + c
                if not clean[w]:
                    del clean[w]
        self.terms = clean

    @classmethod
    def basis(cls, w: ExtAffineWeylElement, coeff=1) -> "HeckeElement":
        return cls(w.datum, {w: coeff})

    @classmethod
    def unit(cls, datum: RootDatum) -> "HeckeElement":
        return cls(datum, {datum.identity(): 1})

    def coefficient(self, w: ExtAffineWeylElement) -> Laurent:
        return self.terms.get(w, Laurent())

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, HeckeElement) and self.datum == other.datum and self.terms == other.terms

    __hash__ = None

    def __add__(self, other: "HeckeElement") -> "HeckeElement":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Laurent()) + c
        return HeckeElement(self.datum, out)

    def __neg__(self) -> "HeckeElement":
        return HeckeElement(self.datum, {w: -c for w, c in self.terms.items()})

    def __sub__(self, other: "HeckeElement") -> "HeckeElement":
        return self + (-other)

    def scale(self, c) -> "HeckeElement":
        c = _coerce_coeff(c)
        return HeckeElement(self.datum, {w: x * c for w, x in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, HeckeElement):
            return mul(self, other)
        return self.scale(other)

    def __rmul__(self, other):
        return self.scale(other)

    def max_length(self) -> int:
        return max((_length(w) for w in self.terms), default=-1)

    def sorted_terms(self) -> list[tuple[ExtAffineWeylElement, Laurent]]:
        return sorted(self.terms.items(), key=lambda wc: wc[0].sort_key())

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(f"({c.to_q_string()})*T[{w.label()}]" for w, c in self.sorted_terms())

    def __repr__(self) -> str:
        return f"HeckeElement({self})"

    def to_json(self) -> dict:
        return {w.label(): c.to_q_string() for w, c in self.sorted_terms()}


_LENGTHS: dict[ExtAffineWeylElement, int] = {}
_WORDS: dict[ExtAffineWeylElement, tuple] = {}


def _length(w: ExtAffineWeylElement) -> int:
    ell = _LENGTHS.get(w)
    if ell is None:
        ell = w.length()
        _LENGTHS[w] = ell
    return ell


def _word(w: ExtAffineWeylElement) -> tuple[tuple[int, ...], ExtAffineWeylElement]:
    r = _WORDS.get(w)
    if r is None:
        r = w.reduced_word(check=False)
        _WORDS[w] = r
    return r


def _times_simple(h: dict, s: ExtAffineWeylElement, q: Laurent) -> dict:
    out: dict[ExtAffineWeylElement, Laurent] = {}
    for x, c in h.items():
        xs = x * s
        if _length(xs) > _length(x):
            out[xs] = out.get(xs, Laurent()) + c
        else:
            out[x] = out.get(x, Laurent()) + c * (q - 1)
            out[xs] = out.get(xs, Laurent()) + c * q
    return {w: c for w, c in out.items() if c}


def _times_basis(h: dict, y: ExtAffineWeylElement) -> dict:
    word, omega = _word(y)
    simples = y.datum.affine_simple_reflections
    cur = h
    for i in word:
        cur = _times_simple(cur, simples[i], Q)
    return {x * omega: c for x, c in cur.items()}


def mul(h1: HeckeElement, h2: HeckeElement) -> HeckeElement:
    """Product in the Iwahori-Hecke algebra."""
    if h1.datum != h2.datum:
        raise ValueError("Hecke elements over different root data")
    total: dict[ExtAffineWeylElement, Laurent] = {}
    for y, cy in h2.terms.items():
        part = _times_basis(h1.terms, y)
        for w, c in part.items():
            total[w] = total.get(w, Laurent()) + c * cy
    return HeckeElement(h1.datum, total)


def T(w: ExtAffineWeylElement) -> HeckeElement:
    return HeckeElement.basis(w)


def basis_inverse(w: ExtAffineWeylElement) -> HeckeElement:
    """T_w^{-1}, using T_s^{-1} = q^{-1} T_s - (1 - q^{-1}) T_e."""
    datum = w.datum
    word, omega = _word(w)
    simples = datum.affine_simple_reflections
    out = HeckeElement.basis(omega.inverse())
    qinv = Q ** -1
    for i in reversed(word):
        s = simples[i]
        sinv = HeckeElement(datum, {s: qinv, datum.identity(): qinv - 1})
        out = mul(out, sinv)
    return out


def e(datum: RootDatum, nu: Coweight) -> HeckeElement:
    """The basis element T_{t_nu} for dominant nu."""
    nu = tuple(nu)
    if not datum.is_dominant(nu):
        raise NotDominant(f"{nu} is not dominant for {datum.name}")
    return T(datum.translation(nu))


def _rho2(datum: RootDatum) -> Coweight:
    total = [0] * datum.dim
    for _, coroot in datum.positive_roots:
        total = [a + b for a, b in zip(total, coroot)]
    return tuple(total)


def default_decomposition(datum: RootDatum, lam: Coweight) -> tuple[Coweight, Coweight]:
    """lam = mu - nu with mu, nu dominant; nu a multiple of the sum of positive coroots."""
    lam = tuple(lam)
    if datum.is_dominant(lam):
        return lam, (0,) * datum.dim
    rho2 = _rho2(datum)
    k = 0
    while True:
        k += 1
        nu = tuple(k * x for x in rho2)
        mu = tuple(a + b for a, b in zip(lam, nu))
        if datum.is_dominant(mu):
            return mu, nu


def theta_from(datum: RootDatum, mu: Coweight, nu: Coweight) -> HeckeElement:
    """e_mu * e_nu^{-1} for dominant mu, nu."""
    e(datum, mu)
    e(datum, nu)
    return mul(T(datum.translation(mu)), basis_inverse(datum.translation(nu)))


_THETA: dict[tuple, HeckeElement] = {}


def theta(datum: RootDatum, lam: Coweight) -> HeckeElement:
    """Bernstein element theta_lam."""
    key = (datum, tuple(lam))
    if key not in _THETA:
        mu, nu = default_decomposition(datum, lam)
        _THETA[key] = theta_from(datum, mu, nu)
    return _THETA[key]


def weyl_poincare(datum: RootDatum) -> Laurent:
    """Sum over the finite Weyl group of q^{l(w)} (the index [K0 : I] as a q-polynomial)."""
    total = Laurent()
    for w in datum.finite_weyl:
        total = total + Q ** datum.finite_length(w)
    return total


def value_at_identity(h: HeckeElement) -> Laurent:
    """h(1) in the normalization vol(K0) = 1."""
    return h.coefficient(h.datum.identity()) * weyl_poincare(h.datum)


def bstar_support(h: HeckeElement, window: Iterable[Coweight]) -> set[Coweight]:
    ident = h.datum.identity()
    return {tuple(nu) for nu in window if mul(h, theta(h.datum, nu)).coefficient(ident)}


def bernstein_normal_form(h: HeckeElement, side: str = "left", max_steps: int = 10000) -> dict[tuple, Laurent]:
    """Coefficients c with h = sum c[(lam, w)] theta_lam T_w ("left") or T_w theta_lam ("right").

    The left form peels the longest T-basis term each step; the top
    coefficient of theta_lam T_w must be a monomial in v for the division to
    be exact. The right form has no such triangularity with respect to
    length, so it is found by an exact linear solve over Q(v).
    """
    if side == "right":
        form = _right_form_by_solve(h)
    elif side == "left":
        form = _left_form_by_peeling(h, max_steps)
    else:
        raise ValueError("side must be 'left' or 'right'")
    if from_normal_form(h.datum, form, side) != h:
        raise NormalFormError("normal form does not reconstruct the element")
    return form


def _left_form_by_peeling(h: HeckeElement, max_steps: int) -> dict[tuple, Laurent]:
    datum = h.datum
    rest = HeckeElement(datum, h.terms)
    out: dict[tuple, Laurent] = {}
    steps = 0
    while rest:
        steps += 1
        if steps > max_steps:
            raise NormalFormError("rewriting did not terminate")
        top = max(rest.terms, key=lambda w: (_length(w), w.sort_key()))
        lam, w = top.translation, top.finite
        piece = mul(theta(datum, lam), T(datum.finite_element(w)))
        lead = piece.coefficient(top)
        if not lead.is_monomial() or piece.max_length() != _length(top):
            raise NormalFormError(f"unexpected leading behaviour of the Bernstein element at {top!r}")
        c = rest.coefficient(top) * lead ** -1
        key = (lam, w)
        out[key] = out.get(key, Laurent()) + c
        if not out[key]:
            del out[key]
        rest = rest - piece.scale(c)
    return out


def _right_form_by_solve(h: HeckeElement) -> dict[tuple, Laurent]:
    from .exactalg import RationalFunction

    datum = h.datum
    if not h:
        return {}
    reach = max(max(abs(x) for x in w.translation) for w in h.terms) + 1
    lams = [()]
    for _ in range(datum.dim):
        lams = [l + (x,) for l in lams for x in range(-reach, reach + 1)]
    unknowns = [(lam, w) for lam in lams for w in datum.finite_weyl]
    pieces = [mul(T(datum.finite_element(w)), theta(datum, lam)) for lam, w in unknowns]
    rows = sorted(set().union(h.terms, *(p.terms for p in pieces)), key=lambda x: x.sort_key())
    mat = [[RationalFunction(p.coefficient(r)) for p in pieces] + [RationalFunction(h.coefficient(r))] for r in rows]
    ncol = len(unknowns)
    pivots = []
    r = 0
    for col in range(ncol):
        piv = next((i for i in range(r, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[r], mat[piv] = mat[piv], mat[r]
        inv = mat[r][col].inverse()
        mat[r] = [x * inv for x in mat[r]]
        for i in range(len(mat)):
            if i != r and mat[i][col]:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivots.append(col)
        r += 1
    if any(mat[i][ncol] for i in range(r, len(mat))):
        raise NormalFormError("element is not in the span of the chosen Bernstein window")
    out: dict[tuple, Laurent] = {}
    for i, col in enumerate(pivots):
        val = mat[i][ncol]
        if val:
            if val.den:
                raise NormalFormError(f"non-Laurent coefficient {val}")
            out[unknowns[col]] = val.num
    return out


def _apply_inverse(datum: RootDatum, w, lam):
    from .rootdata import _matvec

    return _matvec(datum._inverse_finite(w), lam)


def from_normal_form(datum: RootDatum, form: Mapping[tuple, Laurent], side: str = "left") -> HeckeElement:
    total = HeckeElement(datum)
    for (lam, w), c in form.items():
        if side == "left":
            piece = mul(theta(datum, lam), T(datum.finite_element(w)))
        else:
            piece = mul(T(datum.finite_element(w)), theta(datum, lam))
        total = total + piece.scale(c)
    return total


def bstar_bound(h: HeckeElement) -> int:
    """Bound beyond which h * theta_nu has no T_e term for dominant nu in rank one.

    For dominant nu the product T_w theta_nu only involves elements of length
    at least l(t_nu) - l(w), so the T_e coefficient vanishes once
    l(t_nu) > max l(w).
    """
    datum = h.datum
    if datum.rank != 1:
        raise NotImplementedError("bound implemented in rank one")
    (root, _), = datum.positive_roots
    top = h.max_length()
    # l(t_{k b}) = |k <b, alpha>|
    step = abs(root[0])
    return top // step + 1
