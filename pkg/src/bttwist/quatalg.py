"""Quaternion algebras: arithmetic, the standard finite groups, matrix
trivializations over splitting fields, and maximality of orders.

An algebra (a, b) has basis 1, i, j, k with i^2 = a, j^2 = b, ij = -ji = k.
Orders are O-lattices closed under multiplication; maximality is decided by
the reduced discriminant against the Hilbert symbol of the algebra.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import FieldTooSmall, NotIntegral
from .padic import (FieldElement, LocalField, legendre, squarefree_part,
                    vp_int)
from .bttree import MoebiusMap

Matrix2 = MoebiusMap


@dataclass(frozen=True)
class QuaternionAlgebra:
    """(a, b / Q): parameters are rationals; scalars live in any model."""

    a: Fraction
    b: Fraction

    def __repr__(self):
        return f"({self.a},{self.b})"


class Quaternion:
    __slots__ = ("alg", "x")

    def __init__(self, alg: QuaternionAlgebra, coords):
        self.alg = alg
        self.x = tuple(Fraction(c) for c in coords)

    def __add__(self, o):
        return Quaternion(self.alg, tuple(p + q for p, q in zip(self.x, o.x)))

    def __sub__(self, o):
        return Quaternion(self.alg, tuple(p - q for p, q in zip(self.x, o.x)))

    def __neg__(self):
        return Quaternion(self.alg, tuple(-p for p in self.x))

    def __mul__(self, o):
        if isinstance(o, (int, Fraction)):
            return Quaternion(self.alg, tuple(p * o for p in self.x))
        assert self.alg == o.alg
        a, b = self.alg.a, self.alg.b
        x0, x1, x2, x3 = self.x
        y0, y1, y2, y3 = o.x
        return Quaternion(self.alg, (
            x0 * y0 + a * x1 * y1 + b * x2 * y2 - a * b * x3 * y3,
            x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2,
            x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1,
            x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1,
        ))

    __rmul__ = __mul__

    def __truediv__(self, c):
        return Quaternion(self.alg, tuple(p / Fraction(c) for p in self.x))

    def conj(self) -> "Quaternion":
        x0, x1, x2, x3 = self.x
        return Quaternion(self.alg, (x0, -x1, -x2, -x3))

    def trd(self) -> Fraction:
        return 2 * self.x[0]

    def nrd(self) -> Fraction:
        a, b = self.alg.a, self.alg.b
        x0, x1, x2, x3 = self.x
        return x0 * x0 - a * x1 * x1 - b * x2 * x2 + a * b * x3 * x3

    def inv(self) -> "Quaternion":
        n = self.nrd()
        assert n != 0
        return self.conj() / n

    def __eq__(self, o):
        return isinstance(o, Quaternion) and self.alg == o.alg and self.x == o.x

    def __hash__(self):
        return hash((self.alg, self.x))

    def __repr__(self):
        names = ["", "i", "j", "k"]
        parts = [f"{c}{n}" for c, n in zip(self.x, names) if c != 0]
        return " + ".join(parts) if parts else "0"


def quat(alg, x0=0, x1=0, x2=0, x3=0) -> Quaternion:
    return Quaternion(alg, (x0, x1, x2, x3))


def mulclose(gens, cap=2000):
    """Multiplicative closure of a set of invertible quaternions."""
    seen = {g for g in gens}
    frontier = list(seen)
    while frontier:
        new = []
        for g in frontier:
            for h in list(seen):
                for prod in (g * h, h * g):
                    if prod not in seen:
                        seen.add(prod)
                        new.append(prod)
                        if len(seen) > cap:
                            raise NotIntegral("group closure exceeded cap")
        frontier = new
    return seen


# -- the standard groups ------------------------------------------------------

HAMILTON = QuaternionAlgebra(Fraction(-1), Fraction(-1))
DICYCLIC_ALG = QuaternionAlgebra(Fraction(-3), Fraction(-1))


def standard_groups() -> dict:
    """Named generator sets: Q8 and the Hurwitz unit group in (-1,-1), the
    dicyclic group in (-3,-1), and the maximal-order generators of the
    division algebra presentation (pi, Delta)."""
    u = quat(HAMILTON, 0, 1, 0, 0)
    v = quat(HAMILTON, 0, 0, 1, 0)
    w = quat(HAMILTON, Fraction(-1, 2), Fraction(1, 2), Fraction(1, 2), Fraction(1, 2))
    # dicyclic: q^2 = -3 (first generator), p^2 = -1, r = (1+q)/2
    r = quat(DICYCLIC_ALG, Fraction(1, 2), Fraction(1, 2), 0, 0)
    p = quat(DICYCLIC_ALG, 0, 0, 1, 0)
    return {
        "q8": (HAMILTON, [u, v]),
        "hurwitz": (HAMILTON, [w, u, v]),
        "dicyclic": (DICYCLIC_ALG, [r, p]),
    }


def maxorder_generators(pi: int, delta: int):
    """Generators {i, (j-1)/2} of the maximal order in (pi, delta)."""
    alg = QuaternionAlgebra(Fraction(pi), Fraction(delta))
    i = quat(alg, 0, 1, 0, 0)
    jm1 = quat(alg, Fraction(-1, 2), 0, Fraction(1, 2), 0)
    return alg, [i, jm1]


# -- Hilbert symbol ------------------------------------------------------------


def hilbert_symbol(a: Fraction, b: Fraction, p: int) -> int:
    """(a, b)_p for nonzero rationals at a finite prime."""
    a, b = Fraction(a), Fraction(b)
    assert a != 0 and b != 0

    def split(x):
        v = vp_int(x.numerator, p) - vp_int(x.denominator, p)
        u = x / Fraction(p) ** v
        return v, u

    al, u = split(a)
    be, v = split(b)
    if p != 2:
        eps = (p - 1) // 2
        sign = (-1) ** (al * be * eps)
        s = sign
        if be % 2:
            s *= _leg_frac(u, p)
        if al % 2:
            s *= _leg_frac(v, p)
        return s

    def eps2(x):  # (x-1)/2 mod 2 for odd rational x
        return ((x.numerator * pow(x.denominator, -1, 8) % 8) - 1) // 2 % 2

    def omega(x):  # (x^2-1)/8 mod 2
        m = x.numerator * pow(x.denominator, -1, 16) % 16
        return (m * m - 1) // 8 % 2

    exp = eps2(u) * eps2(v) + al * omega(v) + be * omega(u)
    return (-1) ** (exp % 2)


def _leg_frac(u: Fraction, p: int) -> int:
    return legendre(u.numerator * pow(u.denominator, -1, p) % p, p)


def is_division_at(alg: QuaternionAlgebra, p: int) -> bool:
    return hilbert_symbol(alg.a, alg.b, p) == -1


# -- trivializations -----------------------------------------------------------


class Trivialization:
    """An isomorphism of the algebra (over a splitting model field) with the
    2x2 matrices, given by the images of i and j.

    cocycle_witness is the matrix W with f = W . (sigma f) . W^-1 in PGL_2
    for every Galois element flipping sqrt(flip_d); it is the i-image when
    sigma(J) = -J and a companion in the i-subalgebra otherwise."""

    def __init__(self, alg: QuaternionAlgebra, field: LocalField,
                 I: Matrix2, J: Matrix2, flip_d: int):
        self.alg = alg
        self.field = field
        self.I = I
        self.J = J
        self.flip_d = flip_d
        one = field.one
        ident = Matrix2(one, field.zero, field.zero, one)
        aI = _scalar_mat(field, alg.a)
        bI = _scalar_mat(field, alg.b)
        assert _mat_eq(I * I, aI), "i-image relation fails"
        assert _mat_eq(J * J, bI), "j-image relation fails"
        assert _mat_eq(I * J, _neg(J * I)), "anticommutation fails"
        self.K = I * J
        self.basis = (ident, I, J, self.K)
        self.cocycle_witness = self._find_witness()

    def _find_witness(self) -> Matrix2:
        """W in the i-subalgebra span{1, I} conjugating sigma(J) back to J."""
        f = self.field
        mask = _flip_mask(f, self.flip_d)
        sJ = self.J.galois(mask)
        if _mat_eq(sJ, self.J):
            return Matrix2(f.one, f.zero, f.zero, f.one)
        # write J = D(x + y I) with D = diag(1,-1): x = J_11, y = J_12
        x, y = self.J.a, self.J.b
        sx, sy = x.conj(mask), y.conj(mask)
        if sx == -x and sy == -y:
            return self.I
        if sx == x and sy == -y:
            w0, w1 = x, -y
        elif sx == -x and sy == y:
            w0, w1 = f.from_rational(self.alg.a) * y, -x
        else:
            raise FieldTooSmall("j-image not adapted to the flip generator")
        # W = w0 + w1 I
        W = Matrix2(w0, w1, f.from_rational(self.alg.a) * w1, w0)
        return W

    def image(self, q: Quaternion) -> Matrix2:
        assert q.alg == self.alg
        out = None
        for c, m in zip(q.x, self.basis):
            term = Matrix2(m.a * c, m.b * c, m.c * c, m.d * c)
            out = term if out is None else Matrix2(
                out.a + term.a, out.b + term.b, out.c + term.c, out.d + term.d)
        return out

    def matrix_coords(self, X: Matrix2):
        """Quaternion coordinates (as field elements) of a 2x2 matrix."""
        cols = [_vec(m) for m in self.basis]
        target = _vec(X)
        sol = _solve4(self.field, cols, target)
        return tuple(sol)


def _scalar_mat(field, c) -> Matrix2:
    z = field.zero
    e = field.from_rational(c)
    return Matrix2(e, z, z, e)


def _neg(m: Matrix2) -> Matrix2:
    return Matrix2(-m.a, -m.b, -m.c, -m.d)


def _mat_eq(m1: Matrix2, m2: Matrix2) -> bool:
    return (m1.a == m2.a and m1.b == m2.b and m1.c == m2.c and m1.d == m2.d)


def _vec(m: Matrix2):
    return [m.a, m.b, m.c, m.d]


def _solve4(field, cols, target):
    """Solve a 4x4 linear system over the field by Gaussian elimination."""
    n = 4
    aug = [[cols[j][i] for j in range(n)] + [target[i]] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if not aug[r][col].is_zero())
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = aug[col][col].inv()
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [aug[i][n] for i in range(n)]


def _flip_mask(field: LocalField, d: int) -> int:
    """A Galois mask flipping sqrt(d) (and possibly other generators)."""
    for m in range(1, field.degree):
        if field.span_class[m][0] == d:
            # flip exactly the lowest generator occurring in the monomial
            for i in range(field.k):
                if m >> i & 1:
                    return 1 << i
    raise ValueError(f"sqrt({d}) not in {field}")


def standard_trivialization(alg: QuaternionAlgebra, field: LocalField,
                            flip_d: int, x: FieldElement,
                            y: FieldElement) -> Trivialization:
    """f(i) = [[0,1],[a,0]],  f(j) = [[x, y],[-a y, -x]] with x^2 - a y^2 = b.

    x and y live in Q(sqrt(flip_d)), each rational or a rational multiple of
    the root, so the induced cocycle has an explicit witness."""
    one, zero = field.one, field.zero
    a_el = field.from_rational(alg.a)
    I = Matrix2(zero, one, a_el, zero)
    J = Matrix2(x, y, -(a_el * y), -x)
    return Trivialization(alg, field, I, J, flip_d)


def find_trivialization(alg: QuaternionAlgebra,
                        field: LocalField) -> Trivialization:
    """Search for a standard trivialization over the given model field.

    Solves x^2 - a y^2 = b with x, y rational or pure multiples of a square
    root available in the model, over a small rational grid."""
    ds = [field.span_class[m][0] for m in range(1, field.degree)]
    small = [Fraction(n, m) for m in (1, 2, 3, 6) for n in range(-6, 7)]
    # fully rational solutions first: the trivialization is then defined over
    # the base and the induced cocycle is trivial
    for x1 in small:
        for y1 in small:
            if x1 * x1 - alg.a * y1 * y1 == alg.b:
                return standard_trivialization(
                    alg, field, ds[0], field.from_rational(x1),
                    field.from_rational(y1))
    # canonical diagonal shape next: J = diag(sqrt b, -sqrt b) when possible,
    # which keeps division-order branches on the standard line(0, inf)
    try:
        root_b = field.sqrt_of(alg.b)
        from .padic import squarefree_part
        d_b = squarefree_part(Fraction(alg.b).numerator *
                              Fraction(alg.b).denominator)[0]
        if d_b != 1:
            return standard_trivialization(alg, field, d_b, root_b, field.zero)
    except ValueError:
        pass
    shapes = []
    for d in ds:
        shapes.append(("pure_rat", d))   # x = x1 sqrt(d), y rational
        shapes.append(("rat_pure", d))   # x rational, y = y1 sqrt(d)
        shapes.append(("pure_pure", d))  # both pure
    for shape, d in shapes:
        root = field.sqrt_of(d)
        for x1 in small:
            for y1 in small:
                if shape == "pure_rat":
                    ok = d * x1 * x1 - alg.a * y1 * y1 == alg.b
                    x, y = root * x1, field.from_rational(y1)
                elif shape == "rat_pure":
                    ok = x1 * x1 - alg.a * d * y1 * y1 == alg.b
                    x, y = field.from_rational(x1), root * y1
                else:
                    ok = d * (x1 * x1 - alg.a * y1 * y1) == alg.b
                    x, y = root * x1, root * y1
                if ok:
                    return standard_trivialization(alg, field, d, x, y)
    raise FieldTooSmall(f"no trivialization of {alg} over {field}")


def q8_trivialization(field: LocalField) -> "_ComposedTrivialization":
    """The dyadic trivialization of (-1,-1) through (-2,-3), over a model
    containing sqrt(-3); the group images are the classical matrices with
    entries in Q(omega)."""
    phi_alg = QuaternionAlgebra(Fraction(-2), Fraction(-3))
    s = field.sqrt_of(-3)
    inner = standard_trivialization(phi_alg, field, -3, s, field.zero)
    return _ComposedTrivialization(field, inner)


class _ComposedTrivialization:
    """Trivialization of (-1,-1) as f o phi with phi: (-1,-1) -> (-2,-3)."""

    alg = HAMILTON

    def __init__(self, field: LocalField, inner: Trivialization):
        self.field = field
        self.inner = inner
        self.flip_d = inner.flip_d
        self.I = inner.I  # cocycle witness: the image of the (-2,-3) i
        self.basis = tuple(inner.image(_phi(q)) for q in (
            quat(HAMILTON, 1), quat(HAMILTON, 0, 1),
            quat(HAMILTON, 0, 0, 1), quat(HAMILTON, 0, 0, 0, 1)))

    def image(self, q: Quaternion) -> Matrix2:
        assert q.alg == HAMILTON
        return self.inner.image(_phi(q))

    def matrix_coords(self, X: Matrix2):
        cols = [_vec(m) for m in self.basis]
        return tuple(_solve4(self.field, cols, _vec(X)))


def _phi(q: Quaternion) -> Quaternion:
    """The isomorphism (-1,-1) -> (-2,-3): u, v map to combinations of the
    target generators; extended linearly on the basis 1, u, v, uv."""
    alg2 = QuaternionAlgebra(Fraction(-2), Fraction(-3))
    u_img = quat(alg2, 0, Fraction(1, 2), Fraction(1, 3), Fraction(-1, 6))
    v_img = quat(alg2, 0, Fraction(-1, 2), Fraction(1, 3), Fraction(-1, 6))
    one = quat(alg2, 1)
    uv_img = u_img * v_img
    out = quat(alg2, 0)
    for c, base in zip(q.x, (one, u_img, v_img, uv_img)):
        out = out + base * c
    return out


# -- orders and maximality -------------------------------------------------------


def _echelon_valuation(field_p: int, vectors):
    """Echelonize rational 4-vectors over Z_(p) by valuation pivoting.

    Returns a list of at most 4 basis vectors (tuples of Fractions)."""
    from .padic import vp_frac
    vecs = [list(v) for v in vectors]
    basis = []
    for col in range(4):
        best = None
        for r, v in enumerate(vecs):
            if v[col] == 0:
                continue
            val = vp_frac(v[col], field_p)
            if best is None or val < best[1]:
                best = (r, val)
        if best is None:
            continue
        pivot = vecs.pop(best[0])
        basis.append(pivot)
        for v in vecs:
            if v[col] != 0:
                f = v[col] / pivot[col]
                for idx in range(4):
                    v[idx] -= f * pivot[idx]
    return [tuple(v) for v in basis]


def order_closure(alg: QuaternionAlgebra, gens, p: int):
    """Multiplicative closure of Z_(p)[gens] as a lattice, plus maximality.

    Iterates products until the lattice stabilizes; maximality holds iff the
    reduced discriminant matches the algebra's (unit for split, p^2 in the
    Gram determinant for division)."""
    one = quat(alg, 1)
    for g in gens:
        if vp_frac_int(g.trd(), p) < 0 or vp_frac_int(g.nrd(), p) < 0:
            raise NotIntegral(f"generator {g} is not integral at {p}")
    basis = _echelon_valuation(p, [one.x] + [g.x for g in gens])
    while True:
        prods = [Quaternion(alg, b1) * Quaternion(alg, b2)
                 for b1 in basis for b2 in basis]
        new_basis = _echelon_valuation(p, list(basis) + [q.x for q in prods])
        if _same_lattice(p, basis, new_basis):
            break
        basis = new_basis
    if len(basis) < 4:
        raise NotIntegral("generators do not span the algebra")
    qb = [Quaternion(alg, b) for b in basis]
    gram = [[(qb[i] * qb[j]).trd() for j in range(4)] for i in range(4)]
    det = _det4(gram)
    v = vp_frac_int(det, p)
    target = 2 if is_division_at(alg, p) else 0
    return basis, v == target, v


def vp_frac_int(x: Fraction, p: int):
    from .padic import vp_frac
    return vp_frac(Fraction(x), p)


def _same_lattice(p, b1, b2):
    # the closure only grows, so equal volumes mean equal lattices
    if len(b1) != len(b2):
        return False
    return _volume(p, b1) == _volume(p, b2)


def _volume(p, basis):
    m = [list(v) for v in basis]
    if len(m) < 4:
        return None
    return vp_frac_int(_det4(m), p)


def _det4(m):
    import itertools
    det = Fraction(0)
    for perm in itertools.permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4)
                  if perm[i] > perm[j])
        term = Fraction(1)
        for i in range(4):
            term *= Fraction(m[i][perm[i]])
        det += -term if inv % 2 else term
    return det
