"""Root data, finite and extended affine Weyl groups, dominance and lengths.

Coweights are integer tuples in a fixed basis of the coweight lattice. Roots
are integer row vectors acting on coweights by the dot product. Presets:

* ``SL2``: lattice Z*a, coroot a = (1,), root (2,)
* ``PGL2``: lattice Z*w, coroot 2w = (2,), root (1,)

Elements of the extended affine Weyl group are pairs ``t_lam * w`` with
``w`` in the finite Weyl group acting on coweights. Affine simple reflections
are the finite ones plus ``s0 = t_{-theta_vee} * s_theta``.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

Coweight = tuple  # tuple[int, ...]
Matrix = tuple  # tuple[tuple[int, ...], ...], acts on column vectors


class RootDataError(ValueError):
    pass


class LengthMismatch(RootDataError):
    """Closed-form length disagrees with word reduction."""


def _identity(n: int) -> Matrix:
    return tuple(tuple(int(i == j) for j in range(n)) for i in range(n))


def _matmul(a: Matrix, b: Matrix) -> Matrix:
    n = len(a)
    return tuple(tuple(sum(a[i][k] * b[k][j] for k in range(n)) for j in range(n)) for i in range(n))


def _matvec(a: Matrix, v: Sequence[int]) -> Coweight:
    return tuple(sum(a[i][k] * v[k] for k in range(len(v))) for i in range(len(a)))


def _rowmat(r: Sequence[int], a: Matrix) -> tuple:
    n = len(a)
    return tuple(sum(r[k] * a[k][j] for k in range(n)) for j in range(n))


def _dot(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x * y for x, y in zip(a, b))


def _solve(columns: Sequence[Sequence[int]], target: Sequence[int]) -> list[Fraction] | None:
    """Exact solution c of sum c_j * columns[j] = target, or None if inconsistent."""
    n = len(target)
    m = len(columns)
    rows = [[Fraction(columns[j][i]) for j in range(m)] + [Fraction(target[i])] for i in range(n)]
    pivots = []
    r = 0
    for col in range(m):
        piv = next((i for i in range(r, n) if rows[i][col] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][col]
        rows[r] = [x / p for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
    if any(rows[i][m] != 0 for i in range(r, n)):
        return None
    if len(pivots) < m:
        raise RootDataError("columns are linearly dependent")
    sol = [Fraction(0)] * m
    for i, col in enumerate(pivots):
        sol[col] = rows[i][m]
    return sol


class RootDatum:
    """A reduced root datum given by simple roots and coroots.

    ``simple_roots[i]`` and ``simple_coroots[i]`` are integer vectors in the
    dual basis and in the coweight basis respectively.
    """

    def __init__(self, name: str, simple_roots: Sequence[Sequence[int]], simple_coroots: Sequence[Sequence[int]]):
        self.name = name
        self.simple_roots = tuple(tuple(int(x) for x in r) for r in simple_roots)
        self.simple_coroots = tuple(tuple(int(x) for x in c) for c in simple_coroots)
        if len(self.simple_roots) != len(self.simple_coroots):
            raise RootDataError("need as many simple roots as simple coroots")
        self.rank = len(self.simple_roots)
        self.dim = len(self.simple_coroots[0]) if self.rank else 0
        for i in range(self.rank):
            if _dot(self.simple_coroots[i], self.simple_roots[i]) != 2:
                raise RootDataError(f"<alpha_{i}^vee, alpha_{i}> must be 2")
        self.cartan = tuple(
            tuple(_dot(self.simple_coroots[i], self.simple_roots[j]) for j in range(self.rank))
            for i in range(self.rank)
        )
        for i in range(self.rank):
            for j in range(self.rank):
                if i != j and (self.cartan[i][j] > 0 or (self.cartan[i][j] == 0) != (self.cartan[j][i] == 0)):
                    raise RootDataError("pairings do not form a Cartan matrix")

    @classmethod
    def preset(cls, name: str) -> "RootDatum":
        key = name.upper()
        if key == "SL2":
            return cls("SL2", [(2,)], [(1,)])
        if key == "PGL2":
            return cls("PGL2", [(1,)], [(2,)])
        raise RootDataError(f"unknown root datum {name!r}")

    @classmethod
    def from_cartan(cls, cartan: Sequence[Sequence[int]], name: str = "simply-connected") -> "RootDatum":
        """Simply connected datum: coweight lattice spanned by the simple coroots."""
        n = len(cartan)
        coroots = [tuple(int(i == j) for j in range(n)) for i in range(n)]
        # <alpha_i^vee, alpha_j> = cartan[i][j], so alpha_j has coordinates cartan[.][j]
        roots = [tuple(cartan[i][j] for i in range(n)) for j in range(n)]
        return cls(name, roots, coroots)

    def __repr__(self) -> str:
        return f"RootDatum({self.name!r})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RootDatum)
            and self.simple_roots == other.simple_roots
            and self.simple_coroots == other.simple_coroots
        )

    def __hash__(self) -> int:
        return hash((self.simple_roots, self.simple_coroots))

    # coweights

    def pairing(self, lam: Coweight, root: Sequence[int]) -> int:
        return _dot(lam, root)

    def is_dominant(self, lam: Coweight) -> bool:
        return all(_dot(lam, a) >= 0 for a in self.simple_roots)

    def coroot_coordinates(self, lam: Coweight) -> list[Fraction] | None:
        """Rational coordinates of lam in the simple coroots, None if outside their span."""
        return _solve(self.simple_coroots, lam)

    def dominance_leq(self, lam: Coweight, mu: Coweight) -> bool:
        """True iff mu - lam is a non-negative integer combination of simple coroots."""
        diff = tuple(m - l for l, m in zip(lam, mu))
        coords = self.coroot_coordinates(diff)
        return coords is not None and all(c >= 0 and c.denominator == 1 for c in coords)

    def in_coroot_lattice(self, lam: Coweight) -> bool:
        coords = self.coroot_coordinates(lam)
        return coords is not None and all(c.denominator == 1 for c in coords)

    def dominant_representative(self, lam: Coweight) -> Coweight:
        lam = tuple(lam)
        changed = True
        while changed:
            changed = False
            for a, c in zip(self.simple_roots, self.simple_coroots):
                m = _dot(lam, a)
                if m < 0:
                    lam = tuple(x - m * y for x, y in zip(lam, c))
                    changed = True
        return lam

    def conv_hull_member(self, eta: Coweight, mu: Coweight) -> bool:
        """Membership of eta in conv(W mu) intersected with mu + coroot lattice.

        Exact test: the dominant conjugate of eta must lie below mu in the
        rational dominance cone, and eta - mu must be an integral coroot
        combination.
        """
        if not self.is_dominant(mu):
            raise RootDataError(f"{mu} is not dominant")
        diff = tuple(m - e for e, m in zip(eta, mu))
        if not self.in_coroot_lattice(diff):
            return False
        top = self.dominant_representative(eta)
        coords = self.coroot_coordinates(tuple(m - t for t, m in zip(top, mu)))
        return coords is not None and all(c >= 0 for c in coords)

    # finite Weyl group

    def reflection_matrix(self, i: int) -> Matrix:
        a, c = self.simple_roots[i], self.simple_coroots[i]
        n = self.dim
        return tuple(tuple(int(r == k) - c[r] * a[k] for k in range(n)) for r in range(n))

    @cached_property
    def finite_weyl(self) -> tuple[Matrix, ...]:
        start = _identity(self.dim)
        seen = {start: ()}
        order = [start]
        frontier = deque([start])
        while frontier:
            w = frontier.popleft()
            for i in range(self.rank):
                x = _matmul(w, self.reflection_matrix(i))
                if x not in seen:
                    seen[x] = seen[w] + (i,)
                    order.append(x)
                    frontier.append(x)
                if len(seen) > 100000:
                    raise RootDataError("finite Weyl group too large; not of finite type")
        self._finite_words = seen
        return tuple(order)

    def finite_word(self, w: Matrix) -> tuple[int, ...]:
        self.finite_weyl
        return self._finite_words[w]

    def finite_length(self, w: Matrix) -> int:
        return len(self.finite_word(w))

    @cached_property
    def longest_element(self) -> Matrix:
        return max(self.finite_weyl, key=self.finite_length)

    def _root_coords(self, root: Sequence[int]) -> list[Fraction]:
        coords = _solve(self.simple_roots, root)
        if coords is None:
            raise RootDataError(f"{root} is not in the root span")
        return coords

    @cached_property
    def positive_roots(self) -> tuple[tuple[tuple, tuple], ...]:
        """Pairs (root, coroot) for all positive roots."""
        pairs = {}
        for w in self.finite_weyl:
            winv = self._inverse_finite(w)
            for a, c in zip(self.simple_roots, self.simple_coroots):
                root = _rowmat(a, winv)  # (w a)(lam) = a(w^{-1} lam)
                coroot = _matvec(w, c)
                if all(x >= 0 for x in self._root_coords(root)):
                    pairs[root] = coroot
        return tuple(sorted(pairs.items()))

    def is_positive_root(self, root: Sequence[int]) -> bool:
        return all(x >= 0 for x in self._root_coords(root))

    def _inverse_finite(self, w: Matrix) -> Matrix:
        word = self.finite_word(w)
        out = _identity(self.dim)
        for i in reversed(word):
            out = _matmul(out, self.reflection_matrix(i))
        return out

    @cached_property
    def highest_root(self) -> tuple[tuple, tuple]:
        return max(self.positive_roots, key=lambda rc: (sum(self._root_coords(rc[0])), rc[0]))

    def reflection_of_root(self, root: Sequence[int], coroot: Sequence[int]) -> Matrix:
        n = self.dim
        return tuple(tuple(int(r == k) - coroot[r] * root[k] for k in range(n)) for r in range(n))

    # extended affine Weyl group

    def identity(self) -> "ExtAffineWeylElement":
        return ExtAffineWeylElement(self, (0,) * self.dim, _identity(self.dim))

    def translation(self, lam: Coweight) -> "ExtAffineWeylElement":
        return ExtAffineWeylElement(self, tuple(lam), _identity(self.dim))

    def finite_element(self, w: Matrix) -> "ExtAffineWeylElement":
        return ExtAffineWeylElement(self, (0,) * self.dim, w)

    @cached_property
    def affine_simple_reflections(self) -> tuple["ExtAffineWeylElement", ...]:
        """(s0, s1, ..., sr) with s0 = t_{-theta_vee} s_theta."""
        theta, theta_vee = self.highest_root
        s0 = ExtAffineWeylElement(
            self, tuple(-x for x in theta_vee), self.reflection_of_root(theta, theta_vee)
        )
        finite = tuple(self.finite_element(self.reflection_matrix(i)) for i in range(self.rank))
        return (s0,) + finite

    def s(self, i: int) -> "ExtAffineWeylElement":
        return self.affine_simple_reflections[i]

    @cached_property
    def length_zero_elements(self) -> tuple["ExtAffineWeylElement", ...]:
        """The subgroup of length-zero elements, found in a small translation box."""
        out = []
        box = [-1, 0, 1]
        vectors = [()]
        for _ in range(self.dim):
            vectors = [v + (x,) for v in vectors for x in box]
        for lam in vectors:
            for w in self.finite_weyl:
                x = ExtAffineWeylElement(self, lam, w)
                if x.length() == 0:
                    out.append(x)
        out.sort(key=lambda x: (x.translation, x.finite))
        return tuple(out)

    def word_lengths(self, max_length: int) -> dict["ExtAffineWeylElement", int]:
        """Lengths by breadth-first word reduction (length-zero moves are free)."""
        dist = {self.identity(): 0}
        queue = deque([self.identity()])
        omegas = self.length_zero_elements
        while queue:
            x = queue.popleft()
            d = dist[x]
            for om in omegas:
                y = x * om
                if y not in dist or dist[y] > d:
                    dist[y] = d
                    queue.appendleft(y)
            if d == max_length:
                continue
            for s in self.affine_simple_reflections:
                y = x * s
                if y not in dist:
                    dist[y] = d + 1
                    queue.append(y)
        return dist

    def elements_up_to_length(self, max_length: int) -> list["ExtAffineWeylElement"]:
        lengths = self.word_lengths(max_length)
        return sorted((x for x, d in lengths.items() if d <= max_length), key=lambda x: (lengths[x], x.sort_key()))

    def translation_element(self, lam: Coweight) -> "ExtAffineWeylElement":
        """t_lam, with its length checked against word reduction."""
        t = self.translation(lam)
        t.reduced_word(check=True)
        return t


class ExtAffineWeylElement:
    """The element t_lam * w of the extended affine Weyl group."""

    __slots__ = ("datum", "translation", "finite", "_hash")

    def __init__(self, datum: RootDatum, translation: Coweight, finite: Matrix):
        self.datum = datum
        self.translation = tuple(translation)
        self.finite = finite
        self._hash = hash((self.translation, self.finite, datum.simple_roots, datum.simple_coroots))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExtAffineWeylElement)
            and self.translation == other.translation
            and self.finite == other.finite
            and self.datum == other.datum
        )

    def __hash__(self) -> int:
        return self._hash

    def sort_key(self) -> tuple:
        return (self.length(), self.translation, self.datum.finite_word(self.finite))

    def __lt__(self, other: "ExtAffineWeylElement") -> bool:
        return self.sort_key() < other.sort_key()

    def __mul__(self, other: "ExtAffineWeylElement") -> "ExtAffineWeylElement":
        lam = tuple(a + b for a, b in zip(self.translation, _matvec(self.finite, other.translation)))
        return ExtAffineWeylElement(self.datum, lam, _matmul(self.finite, other.finite))

    def inverse(self) -> "ExtAffineWeylElement":
        winv = self.datum._inverse_finite(self.finite)
        lam = tuple(-x for x in _matvec(winv, self.translation))
        return ExtAffineWeylElement(self.datum, lam, winv)

    def is_translation(self) -> bool:
        return self.finite == _identity(self.datum.dim)

    def length(self) -> int:
        """Closed-form length: sum over positive roots, shifted on inverted ones."""
        total = 0
        for root, _ in self.datum.positive_roots:
            m = _dot(self.translation, root)
            back = _rowmat(root, self.finite)  # the functional w^{-1} root
            if self.datum.is_positive_root(back):
                total += abs(m)
            else:
                total += abs(m + 1)
        return total

    def reduced_word(self, check: bool = True) -> tuple[tuple[int, ...], "ExtAffineWeylElement"]:
        """A reduced expression s_{i1}...s_{ik} * omega with omega of length zero.

        With ``check`` the closed-form length is compared with the number of
        peeled reflections and with a breadth-first search.
        """
        word = []
        x = self
        ell = x.length()
        while ell > 0:
            for i, s in enumerate(self.datum.affine_simple_reflections):
                y = s * x
                if y.length() < ell:
                    word.append(i)
                    x = y
                    ell -= 1
                    break
            else:
                raise LengthMismatch(f"no descent found for {self!r} at length {ell}")
        if x.length() != 0 or x not in self.datum.length_zero_elements:
            raise LengthMismatch(f"remainder {x!r} is not a length-zero element")
        if check:
            bfs = self.datum.word_lengths(self.length())
            if bfs.get(self) != self.length():
                raise LengthMismatch(f"closed-form length {self.length()} vs word length {bfs.get(self)} for {self!r}")
        return tuple(word), x

    def __repr__(self) -> str:
        w = self.datum.finite_word(self.finite)
        wtxt = "".join(f"s{i + 1}" for i in w) or "e"
        return f"t{list(self.translation)}*{wtxt}"

    def label(self) -> str:
        """Short human label: reduced word in s0, s1, ... and tau for the length-zero part."""
        word, om = self.reduced_word(check=False)
        omegas = self.datum.length_zero_elements
        head = "".join(f"s{i}" for i in word)
        if om == self.datum.identity():
            return head or "e"
        nontrivial = [o for o in omegas if o != self.datum.identity()]
        name = "tau" if len(nontrivial) == 1 else f"tau{nontrivial.index(om) + 1}"
        return head + name


def parse_coweight(text: str, datum: RootDatum) -> Coweight:
    parts = [p for p in text.replace(",", " ").split()]
    if len(parts) != datum.dim:
        raise RootDataError(f"expected {datum.dim} integers for a coweight of {datum.name}")
    return tuple(int(p) for p in parts)


def coweight_interval(datum: RootDatum, lo: int, hi: int, direction: Iterable[int] | None = None) -> list[Coweight]:
    """Multiples k * direction for lo <= k <= hi (direction defaults to the first basis vector)."""
    d = tuple(direction) if direction is not None else tuple(int(i == 0) for i in range(datum.dim))
    return [tuple(k * x for x in d) for k in range(lo, hi + 1)]
