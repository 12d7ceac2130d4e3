"""Graded determinant lines with exact Koszul signs.

A graded line is a one-dimensional space together with a parity.  Tensor
products are kept as ordered words of atomic lines, because reordering
costs a sign: swapping ``a (x) b`` to ``b (x) a`` multiplies by
``(-1)^(e_a e_b)``.  An element of a line is a scalar times the canonical
generator of that word.

All arithmetic is exact.  Scalars are Gaussian rationals (:class:`QQi`),
so property tests over random complexes compare with ``==``.

Generators of inverse lines are right inverses: the generator of ``L^-1``
is ``(g_L)_r^-1``, characterised by ``g_L (x) (g_L)_r^-1 -> 1``.  The left
inverse then differs by the parity sign, ``(s)_l^-1 = (-1)^e (s)_r^-1``.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "QQi",
    "koszul_sign",
    "GradedLine",
    "GradedElement",
    "tensor",
    "swap",
    "right_inverse",
    "left_inverse",
    "contract",
    "equal",
    "VectorSpace",
    "det_line",
    "wedge",
    "GradedComplex",
    "det_complex",
    "torsion_element",
    "ShortExactSequence",
    "connecting_iso",
    "random_acyclic_complex",
    "random_invertible",
    "property_suite",
    "filtration_sequences",
    "filtration_associativity",
    "monomial_ses",
    "iterate_monomial",
]


# --------------------------------------------------------------------------
# exact scalars


class QQi:
    """Gaussian rational ``re + i im`` with :class:`fractions.Fraction` parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        if isinstance(re, QQi):
            self.re, self.im = re.re, re.im
            return
        if isinstance(re, complex):
            re, im = re.real, re.imag
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def of(x) -> "QQi":
        return x if isinstance(x, QQi) else QQi(x)

    def __add__(self, o):
        o = QQi.of(o)
        return QQi(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QQi(-self.re, -self.im)

    def __sub__(self, o):
        return self + (-QQi.of(o))

    def __rsub__(self, o):
        return QQi.of(o) - self

    def __mul__(self, o):
        o = QQi.of(o)
        return QQi(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def conjugate(self):
        return QQi(self.re, -self.im)

    def inverse(self):
        n = self.abs2()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QQi(self.re / n, -self.im / n)

    def __truediv__(self, o):
        return self * QQi.of(o).inverse()

    def __rtruediv__(self, o):
        return QQi.of(o) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QQi(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, o):
        try:
            o = QQi.of(o)
        except (TypeError, ValueError):
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        if self.im == 0:
            return f"QQi({self.re})"
        return f"QQi({self.re}, {self.im})"


# --------------------------------------------------------------------------
# sign rule


def koszul_sign(e1: int, e2: int) -> int:
    """Sign for commuting graded objects of parities ``e1`` and ``e2``."""
    return -1 if (e1 % 2 and e2 % 2) else 1


# --------------------------------------------------------------------------
# lines and elements


@dataclass(frozen=True)
class GradedLine:
    """Ordered tensor word of atomic lines.

    Each factor is ``(name, parity, exponent)`` with ``exponent`` in ``{+1, -1}``.
    The empty word is the trivial even line.
    """

    factors: tuple = ()

    @classmethod
    def atom(cls, name: str, parity: int) -> "GradedLine":
        return cls(((name, int(parity) % 2, 1),))

    @classmethod
    def trivial(cls) -> "GradedLine":
        return cls(())

    @property
    def parity(self) -> int:
        return sum(f[1] for f in self.factors) % 2

    def __mul__(self, other: "GradedLine") -> "GradedLine":
        return GradedLine(self.factors + other.factors)

    def inverse(self) -> "GradedLine":
        return GradedLine(tuple((n, e, -x) for (n, e, x) in reversed(self.factors)))

    def __repr__(self):
        if not self.factors:
            return "GradedLine(1)"
        parts = [f"{n}{'' if x == 1 else '^-1'}[{e}]" for (n, e, x) in self.factors]
        return "GradedLine(" + " (x) ".join(parts) + ")"


@dataclass(frozen=True)
class GradedElement:
    """``scalar * generator(line)``."""

    line: GradedLine
    scalar: QQi

    def __post_init__(self):
        object.__setattr__(self, "scalar", QQi.of(self.scalar))

    @property
    def parity(self) -> int:
        return self.line.parity

    def scale(self, c) -> "GradedElement":
        return GradedElement(self.line, self.scalar * QQi.of(c))


def tensor(*elems: GradedElement) -> GradedElement:
    line = GradedLine.trivial()
    s = QQi(1)
    for x in elems:
        line = line * x.line
        s = s * x.scalar
    return GradedElement(line, s)


def swap(x: GradedElement, y: GradedElement) -> GradedElement:
    """Re-express ``x (x) y`` as an element of ``L_y (x) L_x``."""
    sign = koszul_sign(x.parity, y.parity)
    return GradedElement(y.line * x.line, x.scalar * y.scalar * sign)


def right_inverse(x: GradedElement) -> GradedElement:
    return GradedElement(x.line.inverse(), x.scalar.inverse())


def left_inverse(x: GradedElement) -> GradedElement:
    """``(x)_l^-1``, characterised by ``(x)_l^-1 (x) x -> 1``."""
    sign = koszul_sign(x.parity, 1)
    return GradedElement(x.line.inverse(), x.scalar.inverse() * sign)


def contract(x: GradedElement) -> GradedElement:
    """Bring an element to normal form.

    Factors are sorted by name with Koszul signs for every transposition,
    then adjacent ``A (x) A^-1`` pairs are cancelled (pairing value 1) and
    ``A^-1 (x) A`` pairs likewise (pairing value ``(-1)^e_A``).
    """
    word = list(x.line.factors)
    s = x.scalar
    # stable insertion sort with signs
    for i in range(1, len(word)):
        j = i
        while j > 0 and word[j - 1][0] > word[j][0]:
            s = s * koszul_sign(word[j - 1][1], word[j][1])
            word[j - 1], word[j] = word[j], word[j - 1]
            j -= 1
    stack: list = []
    for f in word:
        if stack and stack[-1][0] == f[0] and stack[-1][2] == -f[2]:
            top = stack.pop()
            if top[2] == -1:  # A^-1 (x) A
                s = s * koszul_sign(f[1], 1)
            continue
        stack.append(f)
    return GradedElement(GradedLine(tuple(stack)), s)


def equal(x: GradedElement, y: GradedElement, ordinary: bool = False) -> bool:
    """Equality after normal form.

    ``ordinary=True`` is a debugging mode that forgets the grading and
    compares up to sign, as one would for ungraded lines.
    """
    cx, cy = contract(x), contract(y)
    strip = (lambda L: tuple((n, x_) for (n, _, x_) in L.factors)) if ordinary else (lambda L: L.factors)
    if strip(cx.line) != strip(cy.line):
        return False
    if ordinary:
        return cx.scalar.abs2() == cy.scalar.abs2()
    return cx.scalar == cy.scalar


# --------------------------------------------------------------------------
# exact linear algebra on lists of lists


def _mat(rows) -> list[list[QQi]]:
    return [[QQi.of(v) for v in r] for r in rows]


def _zeros(n, m):
    return [[QQi(0) for _ in range(m)] for _ in range(n)]


def _matmul(A, B):
    n, k = len(A), len(B)
    m = len(B[0]) if k else 0
    out = _zeros(n, m)
    for i in range(n):
        for j in range(m):
            acc = QQi(0)
            for t in range(k):
                if A[i][t] and B[t][j]:
                    acc = acc + A[i][t] * B[t][j]
            out[i][j] = acc
    return out


def _columns(vectors: Sequence[Sequence], n: int):
    """Matrix whose columns are ``vectors`` (each of length ``n``)."""
    return [[QQi.of(v[i]) for v in vectors] for i in range(n)]


def _det(M) -> QQi:
    n = len(M)
    if n == 0:
        return QQi(1)
    A = [list(r) for r in M]
    d = QQi(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if A[r][c]), None)
        if piv is None:
            return QQi(0)
        if piv != c:
            A[c], A[piv] = A[piv], A[c]
            d = -d
        d = d * A[c][c]
        inv = A[c][c].inverse()
        for r in range(c + 1, n):
            if A[r][c]:
                f = A[r][c] * inv
                A[r] = [A[r][k] - f * A[c][k] for k in range(n)]
    return d


def _rref(M):
    A = [list(r) for r in M]
    n = len(A)
    m = len(A[0]) if n else 0
    pivots = []
    row = 0
    for c in range(m):
        piv = next((r for r in range(row, n) if A[r][c]), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        inv = A[row][c].inverse()
        A[row] = [v * inv for v in A[row]]
        for r in range(n):
            if r != row and A[r][c]:
                f = A[r][c]
                A[r] = [A[r][k] - f * A[row][k] for k in range(m)]
        pivots.append(c)
        row += 1
        if row == n:
            break
    return A, pivots


def _rank(M) -> int:
    if not M or not M[0]:
        return 0
    return len(_rref(M)[1])


def _inverse(M):
    n = len(M)
    aug = [list(M[i]) + [QQi(1) if i == j else QQi(0) for j in range(n)] for i in range(n)]
    R, piv = _rref(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [r[n:] for r in R]


def _solve(M, b):
    """One solution ``x`` of ``M x = b`` (raises if inconsistent)."""
    n = len(M)
    m = len(M[0]) if n else 0
    aug = [list(M[i]) + [QQi.of(b[i])] for i in range(n)]
    R, piv = _rref(aug)
    if m in piv:
        raise ValueError("inconsistent system")
    x = [QQi(0)] * m
    for r, c in enumerate(piv):
        x[c] = R[r][m]
    return x


def _apply(M, v):
    return [sum((M[i][j] * QQi.of(v[j]) for j in range(len(v))), QQi(0)) for i in range(len(M))]


# --------------------------------------------------------------------------
# vector spaces, complexes


@dataclass(frozen=True)
class VectorSpace:
    """Finite-dimensional space with a chosen standard basis."""

    name: str
    dim: int


def det_line(V: VectorSpace) -> GradedLine:
    """``det V = Lambda^top V`` with parity ``dim V mod 2``."""
    return GradedLine.atom(f"det({V.name})", V.dim % 2)


def wedge(V: VectorSpace, vectors: Sequence[Sequence]) -> GradedElement:
    """``v_1 ^ ... ^ v_n`` relative to the standard generator of ``det V``."""
    if len(vectors) != V.dim:
        raise ValueError(f"need {V.dim} vectors, got {len(vectors)}")
    return GradedElement(det_line(V), _det(_columns(vectors, V.dim)))


@dataclass
class GradedComplex:
    """``E^lo -> ... -> E^hi`` with ``d[i] : E^i -> E^(i+1)`` as row-major matrices."""

    spaces: dict
    d: dict

    def __post_init__(self):
        self.d = {i: _mat(M) for i, M in self.d.items()}
        for i, M in self.d.items():
            src, dst = self.spaces[i], self.spaces[i + 1]
            if len(M) != dst.dim or (dst.dim and len(M[0]) != src.dim):
                raise ValueError(f"differential d[{i}] has the wrong shape")
        for i in self.d:
            if i + 1 in self.d:
                prod = _matmul(self.d[i + 1], self.d[i])
                if any(v for r in prod for v in r):
                    raise ValueError("d o d != 0")

    @property
    def degrees(self) -> list[int]:
        return sorted(self.spaces)

    def diff(self, i):
        if i in self.d:
            return self.d[i]
        return _zeros(self.spaces[i + 1].dim if i + 1 in self.spaces else 0, self.spaces[i].dim)

    def rank(self, i) -> int:
        if i not in self.spaces or i + 1 not in self.spaces:
            return 0
        return _rank(self.diff(i))

    def is_acyclic(self) -> bool:
        for i in self.degrees:
            if self.rank(i - 1) + self.rank(i) != self.spaces[i].dim:
                return False
        return True


def det_complex(c: GradedComplex) -> GradedLine:
    """``det E = (x)_i det(E^i)^((-1)^i)`` in increasing degree."""
    line = GradedLine.trivial()
    for i in c.degrees:
        L = det_line(c.spaces[i])
        line = line * (L if i % 2 == 0 else L.inverse())
    return line


def _default_lifts(c: GradedComplex) -> dict:
    """Standard basis vectors completing ``im d[i-1]`` greedily, per degree."""
    lifts = {}
    for i in c.degrees:
        n = c.spaces[i].dim
        if i - 1 in c.spaces:
            M = c.diff(i - 1)
            imgs = [[M[r][k] for r in range(n)] for k in range(len(M[0]) if M and M[0] else 0)]
        else:
            imgs = []
        basis = []
        current = [v for v in imgs]
        r = _rank(_columns(current, n)) if current else 0
        for k in range(n):
            e = [QQi(1) if j == k else QQi(0) for j in range(n)]
            trial = current + [e]
            rr = _rank(_columns(trial, n))
            if rr > r:
                current = trial
                basis.append(e)
                r = rr
        lifts[i] = basis
    return lifts


def torsion_element(c: GradedComplex, lifts: dict | None = None) -> GradedElement:
    """Torsion of an acyclic complex as an element of :func:`det_complex`.

    ``lifts[i]`` lists vectors of ``E^i`` whose classes form a basis of
    ``E^i / d E^(i-1)``.  With ``s_i = det[d(lifts[i-1]) | lifts[i]]`` the
    element is ``prod_i s_i^((-1)^i)`` times ``(-1)^(#lifts[i])`` for every odd
    ``i``; that sign encodes the convention that odd-degree factors are
    inverted as ``(d e^(i-1))_r^-1 ^ (e^i)_l^-1``.  The result does not depend
    on the choice of lifts.
    """
    if not c.is_acyclic():
        raise ValueError("complex is not acyclic")
    if lifts is None:
        lifts = _default_lifts(c)
    scalar = QQi(1)
    for i in c.degrees:
        n = c.spaces[i].dim
        prev = lifts.get(i - 1, []) if i - 1 in c.spaces else []
        M = c.diff(i - 1) if i - 1 in c.spaces else None
        images = [_apply(M, v) for v in prev] if M is not None else []
        cols = images + [list(map(QQi.of, v)) for v in lifts.get(i, [])]
        if len(cols) != n:
            raise ValueError(f"lifts in degree {i} do not complete a basis")
        s = _det(_columns(cols, n))
        if not s:
            raise ValueError(f"lifts in degree {i} are dependent modulo the image")
        if i % 2 == 0:
            scalar = scalar * s
        else:
            scalar = scalar * s.inverse() * koszul_sign(len(lifts.get(i, [])), 1)
    return GradedElement(det_complex(c), scalar)


# --------------------------------------------------------------------------
# short exact sequences


@dataclass
class ShortExactSequence:
    """``0 -> A --i--> B --q--> C -> 0`` of vector spaces."""

    A: VectorSpace
    B: VectorSpace
    C: VectorSpace
    i: list
    q: list

    def __post_init__(self):
        self.i = _mat(self.i) if self.i else _zeros(self.B.dim, self.A.dim)
        self.q = _mat(self.q) if self.q else _zeros(self.C.dim, self.B.dim)
        if self.A.dim + self.C.dim != self.B.dim:
            raise ValueError("dimensions are not additive")
        if self.A.dim and _rank(self.i) != self.A.dim:
            raise ValueError("i is not injective")
        if self.C.dim and _rank(self.q) != self.C.dim:
            raise ValueError("q is not surjective")
        if self.A.dim and self.C.dim:
            if any(v for r in _matmul(self.q, self.i) for v in r):
                raise ValueError("q o i != 0")

    def lift(self, c_vec) -> list[QQi]:
        return _solve(self.q, c_vec)

    def as_complex(self) -> GradedComplex:
        return GradedComplex({0: self.A, 1: self.B, 2: self.C}, {0: self.i, 1: self.q})


def connecting_iso(ses: ShortExactSequence):
    """Return ``sigma : det A (x) det C -> det B``.

    ``sigma(a_1^...^a_k (x) c_1^...^c_m) = i(a_1)^...^i(a_k)^c~_1^...^c~_m``
    with ``c~`` any lifts.  The returned callable maps a pair of elements to
    an element of ``det B``; its attribute ``scalar`` is the image of the
    product of standard generators.
    """
    nA, nC, nB = ses.A.dim, ses.C.dim, ses.B.dim
    cols = [[ses.i[r][k] for r in range(nB)] for k in range(nA)]
    for k in range(nC):
        e = [QQi(1) if j == k else QQi(0) for j in range(nC)]
        cols.append(ses.lift(e))
    kappa = _det(_columns(cols, nB))
    LA, LC, LB = det_line(ses.A), det_line(ses.C), det_line(ses.B)

    def sigma(a: GradedElement, c: GradedElement) -> GradedElement:
        if a.line != LA or c.line != LC:
            raise ValueError("arguments must lie in det A and det C")
        return GradedElement(LB, a.scalar * c.scalar * kappa)

    sigma.scalar = kappa
    return sigma


# --------------------------------------------------------------------------
# random generators for property tests


def random_invertible(n: int, rng: random.Random, span: int = 3, gaussian: bool = True):
    """Random invertible ``n x n`` matrix with small Gaussian-integer entries."""
    while True:
        M = [
            [QQi(rng.randint(-span, span), rng.randint(-span, span) if gaussian else 0) for _ in range(n)]
            for _ in range(n)
        ]
        if n == 0 or _det(M):
            return M


def random_acyclic_complex(rng: random.Random, length: int | None = None, max_rank: int = 3, lo: int | None = None):
    """Random exact complex ``E^lo -> ... -> E^hi`` over the Gaussian rationals.

    Ranks ``r_i`` of the differentials are drawn first; ``E^i`` has dimension
    ``r_(i-1) + r_i`` and the split model is conjugated by random invertible
    matrices so nothing is aligned with the standard bases.
    """
    length = length if length is not None else rng.randint(2, 4)
    lo = lo if lo is not None else rng.randint(-2, 1)
    ranks = [rng.randint(0, max_rank) for _ in range(length - 1)]
    dims = [(ranks[k - 1] if k > 0 else 0) + (ranks[k] if k < length - 1 else 0) for k in range(length)]
    P = [random_invertible(n, rng) for n in dims]
    Pinv = [_inverse(M) if M else [] for M in P]
    spaces = {lo + k: VectorSpace(f"E{lo + k}", dims[k]) for k in range(length)}
    d = {}
    for k in range(length - 1):
        r = ranks[k]
        n_src, n_dst = dims[k], dims[k + 1]
        # split model: E^k = im (first r_(k-1)) + complement (last r_k); complement -> first r_k of E^(k+1)
        S = _zeros(n_dst, n_src)
        off = dims[k] - r
        for t in range(r):
            S[t][off + t] = QQi(1)
        if n_src and n_dst:
            d[lo + k] = _matmul(_matmul(P[k + 1], S), Pinv[k])
        else:
            d[lo + k] = _zeros(n_dst, n_src)
    return GradedComplex(spaces, d)


def _random_lifts(c: GradedComplex, rng: random.Random) -> dict:
    """Alternative lifts: recombine default lifts and add random image vectors."""
    base = _default_lifts(c)
    out = {}
    for i in c.degrees:
        n = c.spaces[i].dim
        L = base[i]
        k = len(L)
        if k == 0:
            out[i] = []
            continue
        R = random_invertible(k, rng, span=2)
        new = []
        for col in range(k):
            v = [sum((R[row][col] * L[row][j] for row in range(k)), QQi(0)) for j in range(n)]
            if i - 1 in c.spaces and c.spaces[i - 1].dim:
                M = c.diff(i - 1)
                w = [QQi(rng.randint(-2, 2)) for _ in range(c.spaces[i - 1].dim)]
                img = _apply(M, w)
                v = [v[j] + img[j] for j in range(n)]
            new.append(v)
        out[i] = new
    return out


def _select_rows(M, rows):
    return [list(M[r]) for r in rows]


def filtration_sequences(rng: random.Random, dims: tuple | None = None):
    """Three short exact sequences attached to a random filtration ``A < M < B``.

    Returns ``(A_M, M_B, Q)`` with ``A_M: A -> M -> M/A``, ``M_B: M -> B -> B/M``
    and ``Q: M/A -> B/A -> B/M``, together with ``A_B: A -> B -> B/A``, all in
    randomly chosen coordinates.
    """
    a, b, c = dims if dims is not None else (rng.randint(0, 3), rng.randint(0, 3), rng.randint(0, 3))
    n = a + b + c
    P = random_invertible(n, rng)
    Pinv = _inverse(P) if n else []
    GA = random_invertible(a, rng)
    GM = random_invertible(a + b, rng)
    H1 = random_invertible(b, rng)
    H2 = random_invertible(c, rng)
    H3 = random_invertible(b + c, rng)
    A, M, B = VectorSpace("A", a), VectorSpace("M", a + b), VectorSpace("B", n)
    MA, BM, BA = VectorSpace("M/A", b), VectorSpace("B/M", c), VectorSpace("B/A", b + c)

    def cols(X, k):
        return [row[:k] for row in X]

    def block(X, r0, r1):
        return [list(X[r]) for r in range(r0, r1)]

    # inclusions in P-coordinates
    jA = _matmul(cols(P, a), GA) if a else _zeros(n, 0)
    GAext = GA + _zeros(b, a) if a else _zeros(a + b, 0)
    iAM = _matmul(_inverse(GM), GAext) if a else _zeros(a + b, 0)
    jM = _matmul(cols(P, a + b), GM) if a + b else _zeros(n, 0)
    qMA = _matmul(H1, block(GM, a, a + b)) if b else _zeros(0, a + b)
    qBM = _matmul(H2, block(Pinv, a + b, n)) if c else _zeros(0, n)
    qBA = _matmul(H3, block(Pinv, a, n)) if b + c else _zeros(0, n)
    # M/A -> B/A and B/A -> B/M
    H1inv = _inverse(H1) if b else []
    iQ = _matmul(H3, (H1inv if b else []) + _zeros(c, b)) if b else _zeros(b + c, 0)
    H3inv = _inverse(H3) if b + c else []
    proj = [[QQi(1) if (k == b + r) else QQi(0) for k in range(b + c)] for r in range(c)]
    qQ = _matmul(H2, _matmul(proj, H3inv)) if c else _zeros(0, b + c)
    return {
        "A_M": ShortExactSequence(A, M, MA, iAM, qMA),
        "M_B": ShortExactSequence(M, B, BM, jM, qBM),
        "Q": ShortExactSequence(MA, BA, BM, iQ, qQ),
        "A_B": ShortExactSequence(A, B, BA, jA, qBA),
    }


def filtration_associativity(rng: random.Random, dims: tuple | None = None) -> tuple:
    """Scalars of ``det A (x) det M/A (x) det B/M -> det B`` by both bracketings."""
    seqs = filtration_sequences(rng, dims)
    k = {name: connecting_iso(ses).scalar for name, ses in seqs.items()}
    return k["A_M"] * k["M_B"], k["Q"] * k["A_B"]


def monomial_ses(i: int) -> ShortExactSequence:
    """``0 -> H0(L^(i-1)) --s_D--> H0(L^i) --ev_D--> L^i_D -> 0`` on the projective line.

    Bases ``x^(k-j) y^j`` (``j = 0..k``); ``s_D = x`` and ``D = [0 : 1]`` so
    evaluation at ``D`` reads the coefficient of ``y^i``.
    """
    if i < 1:
        raise ValueError("i must be positive")
    A, B, C = VectorSpace(f"H0(L^{i - 1})", i), VectorSpace(f"H0(L^{i})", i + 1), VectorSpace(f"L^{i}_D", 1)
    inc = [[QQi(1) if r == j else QQi(0) for j in range(i)] for r in range(i + 1)]
    ev = [[QQi(1) if j == i else QQi(0) for j in range(i + 1)]]
    return ShortExactSequence(A, B, C, inc, ev)


def iterate_monomial(p: int) -> GradedElement:
    """Image of ``1 (x) u_1 (x) ... (x) u_p`` in ``det H0(L^p)`` by ``p`` connecting maps.

    ``u_i`` is the generator of ``L^i_D`` dual to ``y^i``.  The scalar is the
    coefficient relative to the monomial wedge.
    """
    cur = GradedElement(det_line(VectorSpace("H0(L^0)", 1)), QQi(1))
    for i in range(1, p + 1):
        ses = monomial_ses(i)
        sigma = connecting_iso(ses)
        cur = sigma(GradedElement(det_line(ses.A), cur.scalar), GradedElement(det_line(ses.C), QQi(1)))
    return cur


def property_suite(n_trials: int = 1000, seed: int = 0) -> dict:
    """Run the graded-line identities on random data; returns failure counts."""
    rng = random.Random(seed)
    fails = {
        "koszul_odd": 0,
        "swap_involution": 0,
        "koszul_hexagon": 0,
        "left_right": 0,
        "lift_independence": 0,
        "parity": 0,
        "connecting_torsion": 0,
        "associativity": 0,
    }
    a = GradedElement(GradedLine.atom("A", 1), QQi(1))
    b = GradedElement(GradedLine.atom("B", 1), QQi(1))
    if swap(a, b).scalar != QQi(-1):
        fails["koszul_odd"] += 1
    for _ in range(n_trials):
        e1, e2 = rng.randint(0, 1), rng.randint(0, 1)
        x = GradedElement(GradedLine.atom("X", e1), QQi(rng.randint(1, 9), rng.randint(-3, 3)))
        y = GradedElement(GradedLine.atom("Y", e2), QQi(rng.randint(1, 9), rng.randint(-3, 3)))
        sw = swap(x, y)
        back = swap(GradedElement(y.line, QQi(1)), GradedElement(x.line, sw.scalar))
        if not equal(back, tensor(x, y)):
            fails["swap_involution"] += 1
        if not equal(tensor(left_inverse(x), x), GradedElement(GradedLine.trivial(), QQi(1))):
            fails["left_right"] += 1
        if not equal(tensor(x, right_inverse(x)), GradedElement(GradedLine.trivial(), QQi(1))):
            fails["left_right"] += 1
        c = random_acyclic_complex(rng)
        t1 = torsion_element(c)
        t2 = torsion_element(c, _random_lifts(c, rng))
        if t1.scalar != t2.scalar:
            fails["lift_independence"] += 1
        tot = sum(V.dim for V in c.spaces.values()) % 2
        if det_complex(c).parity != tot:
            fails["parity"] += 1
        # moving x past y (x) z equals moving it past y, then past z
        z = GradedElement(GradedLine.atom("Z", rng.randint(0, 1)), QQi(rng.randint(1, 9)))
        once = swap(x, tensor(y, z))
        twice = QQi(koszul_sign(x.parity, y.parity) * koszul_sign(x.parity, z.parity)) * x.scalar * y.scalar * z.scalar
        if once.scalar != twice or not equal(once, tensor(x, y, z)):
            fails["koszul_hexagon"] += 1
        seqs = filtration_sequences(rng, (rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 2)))
        ses = seqs["A_B"]
        kappa = connecting_iso(ses).scalar
        tt = torsion_element(ses.as_complex())
        if tt.scalar != kappa.inverse() * koszul_sign(ses.C.dim, 1):
            fails["connecting_torsion"] += 1
        k = {name: connecting_iso(q).scalar for name, q in seqs.items()}
        if k["A_M"] * k["M_B"] != k["Q"] * k["A_B"]:
            fails["associativity"] += 1
    return fails
