"""Branches: the convex set of maximal orders containing a matrix or family.

Three independent engines compute branches:
  * a closed form from the classification of the generated quadratic algebra
    (scalar / nilpotent-bearing / split etale / field etale),
  * the lattice-integrality oracle (conjugate by the vertex basis, check
    valuations), and
  * for integral units, the fixed points of the associated Moebius map.
They are cross-checked against each other in the test suite.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import NeedsExtension, NotAUnit
from .padic import (INFINITY, FieldElement, LocalField, element_sqrt,
                    make_field, squarefree_part)
from .bttree import (
    EMPTY, WHOLE, BoundaryEnd, BoundaryPoint, ConvexSubtree, Horoball,
    MoebiusMap, Vertex, intersect, tube,
)

Matrix2 = MoebiusMap  # same data; branch code reads it as a plain matrix


def mat(field: LocalField, rows) -> Matrix2:
    return Matrix2.from_rows(field, rows)


def trace(q: Matrix2) -> FieldElement:
    return q.a + q.d


@dataclass
class QuadClass:
    kind: str  # scalar | nonetale | etale_split | etale_field
    eigenvalues: tuple = None  # for etale_split
    ramified: bool = None  # for etale_field

    def __repr__(self):
        if self.kind == "etale_split":
            return f"EtaleSplit{self.eigenvalues}"
        if self.kind == "etale_field":
            return f"EtaleField(ramified={self.ramified})"
        return {"scalar": "Scalar", "nonetale": "NonEtale"}[self.kind]


def try_sqrt(field: LocalField, x: FieldElement):
    """A model element whose square is x, when one is expressible.

    Note x may be a square in the local field without the model containing
    a square root (e.g. 17 over the plain dyadic model); those come back
    None and force the caller to a splitting extension.
    """
    if x.is_rational():
        try:
            return field.sqrt_of(x.rational_value())
        except ValueError:
            return None
    return element_sqrt(x)


def classify(q: Matrix2, field: LocalField) -> QuadClass:
    t = trace(q)
    disc = t * t - 4 * q.det()
    if q.b.is_zero() and q.c.is_zero() and q.a == q.d:
        return QuadClass("scalar")
    if disc.is_zero():
        return QuadClass("nonetale")
    defect = field.quadratic_defect(disc)
    if defect is INFINITY:
        s = try_sqrt(field, disc)
        if s is None:
            raise NeedsExtension(
                "discriminant is a local square with no model square root"
            )
        lam1 = (t + s) / 2
        lam2 = (t - s) / 2
        return QuadClass("etale_split", eigenvalues=(lam1, lam2))
    v = disc.valuation()
    if int(v * field.e) % 2:
        ramified = True
    else:
        u = disc / field.pi_pow(int(v * field.e))
        ramified = not (field.quadratic_defect(u) == field.nu4)
    return QuadClass("etale_field", ramified=ramified)


def _eigen_direction(q: Matrix2, lam: FieldElement) -> BoundaryPoint:
    # kernel of (q - lam): a fixed point of the Moebius transformation
    if not q.b.is_zero():
        vec = (q.b, lam - q.a)
    elif not q.c.is_zero():
        vec = (lam - q.d, q.c)
    else:  # diagonal
        vec = (q.a.field.one, q.a.field.zero) if q.a == lam else (q.a.field.zero, q.a.field.one)
    x, y = vec
    if y.is_zero():
        return BoundaryPoint.infinity()
    return BoundaryPoint(x / y)


def branch_closed_form(q: Matrix2, field: LocalField) -> ConvexSubtree:
    """The branch of a single matrix, by case analysis on K(q).

    Raises NeedsExtension for irreducible characteristic polynomials; see
    branch_with_extension for the extend-and-descend route.
    """
    cls = classify(q, field)
    if cls.kind == "scalar":
        return WHOLE if q.a.valuation() >= 0 else EMPTY
    if cls.kind == "nonetale":
        s = trace(q) / 2
        if s.valuation() < 0:
            return EMPTY
        n0 = Matrix2(q.a - s, q.b, q.c, q.d - s)
        return _nilpotent_horoball(n0, field)
    if cls.kind == "etale_split":
        lam1, lam2 = cls.eigenvalues
        if lam1.valuation() < 0 or lam2.valuation() < 0:
            return EMPTY
        xi1 = _eigen_direction(q, lam1)
        xi2 = _eigen_direction(q, lam2)
        return tube(field, BoundaryEnd(xi1), BoundaryEnd(xi2),
                    (lam1 - lam2).valuation())
    raise NeedsExtension("characteristic polynomial irreducible over the field")


def _nilpotent_horoball(n0: Matrix2, field: LocalField) -> ConvexSubtree:
    # n0 nonzero nilpotent; branch = {v : level(gamma^-1 . v) <= nu(content)}
    if not (n0.a.is_zero() and n0.b.is_zero()):
        k = (n0.b, -n0.a)
    else:
        k = (field.zero, field.one)
    m = (field.one, field.zero)
    if (k[0] * m[1] - k[1] * m[0]).is_zero():
        m = (field.zero, field.one)
    n0m = (n0.a * m[0] + n0.b * m[1], n0.c * m[0] + n0.d * m[1])
    c = n0m[0] / k[0] if not k[0].is_zero() else n0m[1] / k[1]
    witness = Matrix2(k[0], m[0], k[1], m[1])
    return Horoball(field, witness, c.valuation())


def branch_with_extension(q: Matrix2, field: LocalField):
    """Closed form, passing to a model splitting extension when needed.

    Returns (subtree, ambient_field); the subtree lives in the ambient tree
    and cuts out the branch over the base by restriction.
    """
    try:
        return branch_closed_form(q, field), field
    except NeedsExtension:
        pass
    t = trace(q)
    disc = t * t - 4 * q.det()
    if not disc.is_rational():
        raise NeedsExtension("cannot model a splitting field for this matrix")
    r = disc.rational_value()
    d, _ = squarefree_part(r.numerator * r.denominator)
    try:
        big = make_field(field.p, field.sqrt_args + (d,))
    except Exception as exc:
        raise NeedsExtension(f"splitting extension not constructible: {exc}")
    qb = lift_matrix(q, big)
    return branch_closed_form(qb, big), big


def lift_element(x: FieldElement, big: LocalField) -> FieldElement:
    """Embed into a model whose sqrt_args extend the element's field's."""
    small = x.field
    assert big.sqrt_args[: small.k] == small.sqrt_args
    coords = [Fraction(0)] * big.degree
    for mask, c in enumerate(x.coords):
        coords[mask] = c
    return big.el(coords)


def lift_matrix(q: Matrix2, big: LocalField) -> Matrix2:
    return Matrix2(lift_element(q.a, big), lift_element(q.b, big),
                   lift_element(q.c, big), lift_element(q.d, big))


def branch_member(q: Matrix2, v: Vertex) -> bool:
    """Integrality oracle: M^-1 q M has integral entries, M the vertex basis."""
    f = v.field
    a = v.center
    t = f.scale_of_valuation(v.level)
    e11 = q.c * a + q.d
    e12 = q.c * t
    e21 = (q.b + (q.a - q.d) * a - q.c * a * a) / t
    e22 = q.a - a * q.c
    for entry in (e11, e12, e21, e22):
        if entry.valuation() < 0:
            return False
    return True


def family_member(qs, v: Vertex) -> bool:
    return all(branch_member(q, v) for q in qs)


def branch_of_family(qs, field: LocalField) -> ConvexSubtree:
    """Intersection of the individual closed-form branches."""
    out = WHOLE
    for q in qs:
        out = intersect(out, branch_closed_form(q, field))
    return out


def unit_fixed_points(q: Matrix2, window) -> list:
    """Vertices of the window fixed by the Moebius action of an integral unit."""
    t, n = trace(q), q.det()
    if t.valuation() < 0 or not (n.valuation() == 0):
        raise NotAUnit("need an integral matrix with unit determinant")
    return [v for v in window if q.apply_vertex(v) == v]


# ---------------------------------------------------------------------------
# samplers (used by the property suite and the verify command)


def can_extend(field: LocalField, d: int) -> bool:
    try:
        make_field(field.p, field.sqrt_args + (d,))
        return True
    except Exception:
        return False


def sample_integral_matrix(field: LocalField, rng: random.Random) -> Matrix2:
    """A random integral matrix whose splitting data stays inside the model.

    Built as g * core * g^-1 with core scalar, nilpotent-bearing, split
    diagonal, or a companion matrix with rational discriminant whose square
    class is model-representable; the closed-form engine then never needs an
    unrepresentable square root.
    """
    def small_elt():
        coords = [Fraction(0)] * field.degree
        for i in range(field.degree):
            if rng.random() < 0.5:
                coords[i] = Fraction(rng.randint(-4, 4))
        return field.el(coords)

    def integral_elt():
        while True:
            x = small_elt()
            if x.valuation() >= 0:
                return x

    one, zero = field.one, field.zero
    kind = rng.choice(["scalar", "nilpotent", "split", "companion"])
    if kind == "scalar":
        s = integral_elt()
        core = Matrix2(s, zero, zero, s)
    elif kind == "nilpotent":
        s = integral_elt()
        c = field.pi_pow(rng.randint(0, 2))
        core = Matrix2(s, c, zero, s)
    elif kind == "split":
        core = Matrix2(integral_elt(), zero, zero, integral_elt())
    else:
        while True:
            t = field.from_rational(rng.randint(-6, 6))
            n = field.from_rational(rng.randint(-6, 6))
            disc = t * t - 4 * n
            if disc.is_zero():
                continue
            d, _ = squarefree_part(disc.rational_value().numerator)
            in_span = any(field.span_class[m][0] == d
                          for m in range(1, field.degree))
            if d == 1 or in_span or can_extend(field, d):
                break
        core = Matrix2(zero, one, -n, t)
    while True:
        g = Matrix2(integral_elt(), integral_elt(),
                    integral_elt(), integral_elt())
        if g.det().valuation() == 0:
            break
    return g * core * g.inv()
