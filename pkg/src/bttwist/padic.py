"""Exact models of local fields as multiquadratic towers over Q_p.

A field is Q(sqrt(d_1), ..., sqrt(d_k)) viewed inside Q_p, constrained so
that p has a unique prime above it in the global model.  All arithmetic is
then exact (rational coordinates in the square-root monomial basis) and the
p-adic valuation, normalized by nu(p) = 1, comes from the absolute norm.
Residue representatives, uniformizers, quadratic defects and the subfield
lattice live here; everything downstream consumes them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DivisionByZero, NotSquareFree, SplitPrime, ZeroInput


class _Infinity:
    """Valuation of zero; compares above every rational."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "oo"

    def __eq__(self, other):
        return other is self

    def __hash__(self):
        return hash("bttwist-infinity")

    def __gt__(self, other):
        return other is not self

    def __ge__(self, other):
        return True

    def __lt__(self, other):
        return False

    def __le__(self, other):
        return other is self

    def __add__(self, other):
        return self

    __radd__ = __add__

    def __neg__(self):
        raise ArithmeticError("cannot negate infinite valuation")


INFINITY = _Infinity()


def val_min(*vals):
    m = INFINITY
    for v in vals:
        if m is INFINITY or (v is not INFINITY and v < m):
            m = v
    return m


def _factor(n: int) -> dict:
    n = abs(n)
    out: dict = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_part(n: int) -> tuple[int, int]:
    """n = d * t^2 with d squarefree; returns (d, t). Sign goes into d."""
    if n == 0:
        raise ZeroInput("0 has no squarefree part")
    d, t = 1, 1
    for p, a in _factor(n).items():
        if a % 2:
            d *= p
        t *= p ** (a // 2)
    return (d if n > 0 else -d), t


def legendre(a: int, p: int) -> int:
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def quad_ext_type(d: int, p: int) -> str:
    """Behavior of Q_p(sqrt(d)) for squarefree d != 1: split | unramified | ramified."""
    if d == 1:
        raise NotSquareFree("d = 1 is a square")
    if p == 2:
        if d % 2 != 0:
            m = d % 8
            if m == 1:
                return "split"
            return "unramified" if m == 5 else "ramified"
        return "ramified"
    if d % p == 0:
        return "ramified"
    return "split" if legendre(d, p) == 1 else "unramified"


def vp_int(n: int, p: int) -> int:
    if n == 0:
        raise ZeroInput
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_frac(x: Fraction, p: int):
    if x == 0:
        return INFINITY
    return Fraction(vp_int(x.numerator, p) - vp_int(x.denominator, p))


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


_FIELD_CACHE: dict = {}


def make_field(p: int, sqrt_args) -> "LocalField":
    """Build (or fetch from cache) the model of Q_p(sqrt d : d in sqrt_args)."""
    key = (p, tuple(int(d) for d in sqrt_args))
    if key not in _FIELD_CACHE:
        _FIELD_CACHE[key] = LocalField(p, key[1])
    return _FIELD_CACHE[key]


class LocalField:
    """Multiquadratic model with a unique prime above p.

    Elements are vectors of 2^k rationals in the monomial basis
    {prod sqrt(d_i)^eps_i}, indexed by bitmask over the generators.
    """

    def __init__(self, p: int, sqrt_args: tuple):
        if not _is_prime(p):
            raise ValueError(f"p must be prime, got {p}")
        self.p = p
        self.sqrt_args = tuple(int(d) for d in sqrt_args)
        for d in self.sqrt_args:
            sf, _ = squarefree_part(d)
            if sf != d:
                raise NotSquareFree(f"{d} is not squarefree")
        self.k = len(self.sqrt_args)
        self.degree = 1 << self.k
        # span_class[mask] = (squarefree d, scale t) with monomial^2 = d*t^2
        self.span_class = {}
        for mask in range(self.degree):
            prod = 1
            for i in range(self.k):
                if mask >> i & 1:
                    prod *= self.sqrt_args[i]
            d, t = squarefree_part(prod)
            self.span_class[mask] = (d, t)
            if mask:
                if d == 1:
                    raise NotSquareFree(
                        "sqrt_args multiplicatively dependent modulo squares"
                    )
                if quad_ext_type(d, p) == "split":
                    raise SplitPrime(f"Q_{p}(sqrt({d})) splits at {p}")
        self.f = 2 if any(
            quad_ext_type(self.span_class[m][0], p) == "unramified"
            for m in range(1, self.degree)
        ) else 1
        self.e = self.degree // self.f
        self.q = p ** self.f
        # monomial multiplication: m_S * m_T = coef * m_{S xor T}
        self._mult = []
        for s in range(self.degree):
            row = []
            for t in range(self.degree):
                coef = 1
                for i in range(self.k):
                    if (s & t) >> i & 1:
                        coef *= self.sqrt_args[i]
                row.append((Fraction(coef), s ^ t))
            self._mult.append(row)
        self.zero = FieldElement(self, tuple([Fraction(0)] * self.degree))
        self.one = self.from_rational(1)
        self._pi_powers: dict = {}
        self._residue_reps = None
        self._uniformizer = None
        self._subfields = None

    def __repr__(self):
        if not self.sqrt_args:
            return f"Q_{self.p}"
        roots = ",".join(f"sqrt({d})" for d in self.sqrt_args)
        return f"Q_{self.p}({roots})"

    # -- element constructors -------------------------------------------------

    def el(self, coords) -> "FieldElement":
        return FieldElement(self, tuple(Fraction(c) for c in coords))

    def from_rational(self, x) -> "FieldElement":
        coords = [Fraction(0)] * self.degree
        coords[0] = Fraction(x)
        return FieldElement(self, tuple(coords))

    def monomial(self, mask: int, coef=1) -> "FieldElement":
        coords = [Fraction(0)] * self.degree
        coords[mask] = Fraction(coef)
        return FieldElement(self, tuple(coords))

    def sqrt_gen(self, i: int) -> "FieldElement":
        return self.monomial(1 << i)

    def sqrt_of(self, n) -> "FieldElement":
        """sqrt of a rational, if the model contains it."""
        n = Fraction(n)
        dn, tn = squarefree_part(n.numerator)
        dd, td = squarefree_part(n.denominator)
        sf, extra = squarefree_part(dn * dd)
        scale = Fraction(tn * extra, td * dd)
        if sf == 1:
            return self.from_rational(scale)
        for mask in range(1, self.degree):
            md, mt = self.span_class[mask]
            if md == sf:
                return self.monomial(mask, scale / mt)
        raise ValueError(f"sqrt({n}) not in {self}")

    # -- arithmetic kernels -----------------------------------------------

    def _mul(self, a, b):
        deg = self.degree
        out = [Fraction(0)] * deg
        mult = self._mult
        for s in range(deg):
            ca = a[s]
            if not ca:
                continue
            row = mult[s]
            for t in range(deg):
                cb = b[t]
                if not cb:
                    continue
                coef, m = row[t]
                out[m] += ca * cb * coef
        return tuple(out)

    def valuation(self, x: "FieldElement"):
        if x._val is None:
            if x.is_zero():
                x._val = INFINITY
            else:
                # norm down the quadratic tower: each stage halves the degree
                fld, coords = self, x.coords
                while fld.k > 0:
                    y = FieldElement(fld, coords)
                    prod = y * y.conj(1 << (fld.k - 1))
                    half = 1 << (fld.k - 1)
                    assert all(c == 0 for c in prod.coords[half:]),                         "tower norm left the subfield"
                    fld = make_field(fld.p, fld.sqrt_args[:-1])
                    coords = prod.coords[:half]
                x._val = Fraction(vp_frac(coords[0], self.p), self.degree)
        return x._val

    # -- residue representatives and uniformizer -------------------------------

    def _unit_monomials(self):
        """One unit representative per monomial whose valuation is integral."""
        out = [self.one]
        for mask in range(1, self.degree):
            x = self.monomial(mask)
            v = x.valuation()
            if v.denominator == 1:
                out.append(self.monomial(mask, Fraction(1, self.p ** int(v))))
        return out

    def _candidate_elements(self, max_terms=3):
        """Deterministic stream of small elements, ordered by complexity."""
        coef_pool = [Fraction(1), Fraction(-1), Fraction(1, 2), Fraction(-1, 2),
                     Fraction(2), Fraction(-2), Fraction(3), Fraction(-3),
                     Fraction(1, 3), Fraction(-1, 3), Fraction(2, 3),
                     Fraction(-2, 3)]
        units = self._unit_monomials()
        for nterms in range(1, max_terms + 1):
            for support in itertools.combinations(range(len(units)), nterms):
                for coefs in itertools.product(coef_pool, repeat=nterms):
                    x = self.zero
                    for ui, c in zip(support, coefs):
                        x = x + units[ui] * c
                    yield x

    @property
    def residue_reps(self):
        """Canonical integral representatives of the residue field (q of them)."""
        if self._residue_reps is None:
            reps = [self.zero]
            for x in self._candidate_elements(max_terms=2):
                if not (x.valuation() == 0):
                    continue
                if all((x - r).valuation() == 0 for r in reps[1:]):
                    reps.append(x)
                if len(reps) == self.q:
                    break
            assert len(reps) == self.q, f"residue search failed for {self}"
            self._residue_reps = tuple(reps)
        return self._residue_reps

    @property
    def uniformizer(self) -> "FieldElement":
        if self._uniformizer is None:
            self._uniformizer = self._find_uniformizer()
        return self._uniformizer

    def _find_uniformizer(self):
        target = Fraction(1, self.e)
        if self.e == 1:
            return self.from_rational(self.p)
        for mask in range(1, self.degree):
            x = self.monomial(mask)
            if x.valuation() == target:
                return x
        for mask in range(1, self.degree):
            x = self.one + self.monomial(mask)
            if x.valuation() == target:
                return x
        # totally ramified quartic shape: (m1 +- m2)/2 - 1
        for m1 in range(1, self.degree):
            for m2 in range(m1 + 1, self.degree):
                for s in (1, -1):
                    x = (self.monomial(m1) + self.monomial(m2, s)) * Fraction(1, 2)
                    x = x - self.one
                    if x.valuation() == target:
                        return x
        for x in self._candidate_elements(max_terms=3):
            if x.valuation() == target:
                return x
        raise AssertionError(f"no uniformizer found for {self}")

    def pi_pow(self, n: int) -> "FieldElement":
        if n not in self._pi_powers:
            if n == 0:
                self._pi_powers[0] = self.one
            elif n > 0:
                self._pi_powers[n] = self.pi_pow(n - 1) * self.uniformizer
            else:
                self._pi_powers[n] = self.pi_pow(n + 1) / self.uniformizer
        return self._pi_powers[n]

    def scale_of_valuation(self, r) -> "FieldElement":
        """An element of exact valuation r (r must lie in (1/e)Z)."""
        n = Fraction(r) * self.e
        assert n.denominator == 1, f"{r} not in value group of {self}"
        return self.pi_pow(int(n))

    # -- quadratic defect -------------------------------------------------------

    @property
    def nu4(self) -> Fraction:
        return Fraction(2) if self.p == 2 else Fraction(0)

    def quadratic_defect(self, a: "FieldElement"):
        """nu of a generator of the smallest ideal containing all a - b^2.

        INFINITY iff a is a square in the local field (decided exactly via
        square-root lifting in the residue tower, cut off at the classical
        4aO bound).
        """
        if a.field is not self:
            raise ValueError("element of a different field")
        if a.is_zero():
            raise ZeroInput("defect of 0")
        v = a.valuation()
        ev = v * self.e
        if int(ev) % 2:
            return v
        u = a / self.pi_pow(int(ev))
        reps = self.residue_reps
        nu4 = self.nu4
        b = None
        for r in reps[1:]:
            if (u - r * r).valuation() > 0:
                b = r
                break
        if b is None:
            return v  # residue of u is a non-square, so the defect is (a)
        two = self.from_rational(2)
        four = self.from_rational(4)
        while True:
            d = u - b * b
            s = d.valuation()
            if s is INFINITY or s > nu4:
                return INFINITY
            if int(s * self.e) % 2:
                return v + s
            if s == nu4:
                w = d / (four * b * b)
                for xi in reps:
                    if (w - xi * xi - xi).valuation() > 0:
                        b = b * (self.one + two * xi)
                        break
                else:
                    return v + nu4
            else:
                t = self.pi_pow(int(s * self.e) // 2)
                tgt = d / (t * t)
                for g in reps:
                    if (tgt - g * g).valuation() > 0:
                        b = b + t * g
                        break
                else:
                    return v + s

    # -- subfields ----------------------------------------------------------------

    def subfields(self):
        """All proper subfields (one per subgroup of the square-class span),
        the base field included, this field itself excluded."""
        if self._subfields is None:
            subgroups = set()
            gens_all = list(range(1, self.degree))
            for r in range(self.k):
                for gens in itertools.combinations(gens_all, r):
                    span = {0}
                    for g in gens:
                        span |= {x ^ g for x in span}
                    if len(span) < self.degree:
                        subgroups.add(frozenset(span))
            self._subfields = [
                _build_subfield(self, span)
                for span in sorted(subgroups, key=lambda s: (len(s), sorted(s)))
            ]
        return self._subfields

    def find_subfield(self, sqrt_args) -> "Subfield":
        """Locate the subfield generated by the given (squarefree) integers."""
        want = {0}
        for d in sqrt_args:
            sf, _ = squarefree_part(int(d))
            mask = None
            for m in range(1, self.degree):
                if self.span_class[m][0] == sf:
                    mask = m
                    break
            if mask is None:
                raise ValueError(f"sqrt({d}) not in {self}")
            want = want | {x ^ mask for x in want}
        for sub in self.subfields():
            if sub.span == frozenset(want):
                return sub
        raise ValueError("subfield not found (it may be the whole field)")


class FieldElement:
    __slots__ = ("field", "coords", "_val")

    def __init__(self, field: LocalField, coords: tuple):
        self.field = field
        self.coords = coords
        self._val = None

    # -- ring ops -----------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        return FieldElement(
            self.field, tuple(a + b for a, b in zip(self.coords, other.coords))
        )

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        return FieldElement(
            self.field, tuple(a - b for a, b in zip(self.coords, other.coords))
        )

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coords))

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            return FieldElement(self.field, tuple(a * c for a in self.coords))
        assert other.field is self.field, "mixed fields"
        return FieldElement(self.field, self.field._mul(self.coords, other.coords))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            c = Fraction(other)
            if c == 0:
                raise DivisionByZero
            return FieldElement(self.field, tuple(a / c for a in self.coords))
        return self * other.inv()

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inv() ** (-n)
        out = self.field.one
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def _coerce(self, other):
        if isinstance(other, (int, Fraction)):
            return self.field.from_rational(other)
        assert other.field is self.field, "mixed fields"
        return other

    def inv(self) -> "FieldElement":
        if self.is_zero():
            raise DivisionByZero
        acc = self.field.one
        for mask in range(1, self.field.degree):
            acc = acc * self.conj(mask)
        norm = (self * acc).coords[0]
        return acc / norm

    def conj(self, mask: int) -> "FieldElement":
        """Galois conjugation: flip the sign of sqrt(d_i) for i in mask."""
        out = []
        for s, c in enumerate(self.coords):
            out.append(-c if bin(s & mask).count("1") % 2 else c)
        return FieldElement(self.field, tuple(out))

    # -- queries ----------------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coords[1:])

    def rational_value(self) -> Fraction:
        assert self.is_rational()
        return self.coords[0]

    def valuation(self):
        return self.field.valuation(self)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.field.from_rational(other)
        if not isinstance(other, FieldElement) or other.field is not self.field:
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash((id(self.field), self.coords))

    def key(self) -> str:
        return ",".join(str(c) for c in self.coords)

    def __repr__(self):
        parts = []
        for mask, c in enumerate(self.coords):
            if c == 0:
                continue
            label = "*".join(
                f"sqrt({self.field.sqrt_args[i]})"
                for i in range(self.field.k)
                if mask >> i & 1
            )
            parts.append(f"{c}" + (f"*{label}" if label else ""))
        return " + ".join(parts) if parts else "0"


def element_sqrt(x: FieldElement):
    """A model square root of x, or None if no global one exists.

    Recursive over the quadratic tower: writing x = a + b*sqrt(d) over the
    subtower without the last generator, a root u + v*sqrt(d) requires
    sqrt(a^2 - d*b^2) below, then u^2 = (a +- that)/2.  Exact throughout;
    a None here can still be a square in the local field (ghost squares).
    """
    f = x.field
    if x.is_zero():
        return f.zero
    if f.k == 0:
        r = x.coords[0]
        if r < 0:
            return None
        num, den = _int_sqrt(r.numerator), _int_sqrt(r.denominator)
        if num is None or den is None:
            return None
        return f.from_rational(Fraction(num, den))
    sub = make_field(f.p, f.sqrt_args[:-1])
    half = 1 << (f.k - 1)
    a = FieldElement(sub, x.coords[:half])
    b = FieldElement(sub, x.coords[half:])
    d = f.sqrt_args[-1]

    def lift(y: FieldElement, times_root=False):
        coords = [Fraction(0)] * f.degree
        for m, c in enumerate(y.coords):
            coords[m + (half if times_root else 0)] = c
        return FieldElement(f, tuple(coords))

    if b.is_zero():
        u = element_sqrt(a)
        if u is not None:
            return lift(u)
        w = element_sqrt(a / sub.from_rational(d))
        if w is not None:
            return lift(w, times_root=True)
        return None
    norm = a * a - sub.from_rational(d) * b * b
    s = element_sqrt(norm)
    if s is None:
        return None
    for sign in (1, -1):
        u2 = (a + sign * s) / 2
        u = element_sqrt(u2)
        if u is not None and not u.is_zero():
            v = b / (2 * u)
            cand = lift(u) + lift(v, times_root=True)
            if cand * cand == x:
                return cand
    return None


def _int_sqrt(n: int):
    if n < 0:
        return None
    r = int(n ** 0.5)
    for c in (r - 1, r, r + 1, r + 2):
        if c >= 0 and c * c == n:
            return c
    return None


@dataclass(frozen=True)
class Subfield:
    """A subfield of a LocalField: its own model plus the embedding data."""

    parent: LocalField
    field: LocalField
    span: frozenset
    # per subfield monomial: (parent mask, rational coefficient)
    monomial_images: tuple

    def embed(self, x: FieldElement) -> FieldElement:
        assert x.field is self.field
        coords = [Fraction(0)] * self.parent.degree
        for sub_mask, c in enumerate(x.coords):
            if c == 0:
                continue
            pm, coef = self.monomial_images[sub_mask]
            coords[pm] += c * coef
        return FieldElement(self.parent, tuple(coords))

    def project(self, y: FieldElement):
        """Inverse of embed where defined; None if y is not in the subfield."""
        assert y.field is self.parent
        coords = [Fraction(0)] * self.field.degree
        used = set()
        for sub_mask in range(self.field.degree):
            pm, coef = self.monomial_images[sub_mask]
            coords[sub_mask] = y.coords[pm] / coef
            used.add(pm)
        for pm in range(self.parent.degree):
            if pm not in used and y.coords[pm] != 0:
                return None
        return FieldElement(self.field, tuple(coords))

    def contains(self, y: FieldElement) -> bool:
        return self.project(y) is not None

    def fixing_masks(self) -> tuple:
        """Galois masks of the parent acting trivially on this subfield."""
        parent_masks = [self.monomial_images[m][0] for m in range(self.field.degree)]
        out = []
        for sigma in range(self.parent.degree):
            if all(bin(sigma & pm).count("1") % 2 == 0 for pm in parent_masks):
                out.append(sigma)
        return tuple(out)

    def __repr__(self):
        return f"Subfield({self.field!r} in {self.parent!r})"


def _build_subfield(parent: LocalField, span: frozenset) -> Subfield:
    # independent generating masks for the span, smallest first
    gens = []
    got = {0}
    for m in sorted(span):
        if m and m not in got:
            gens.append(m)
            got |= {x ^ m for x in got}
    args = tuple(parent.span_class[m][0] for m in gens)
    sub = make_field(parent.p, args)
    images = []
    for sub_mask in range(sub.degree):
        elt = parent.one
        for i, m in enumerate(gens):
            if sub_mask >> i & 1:
                _, t = parent.span_class[m]
                elt = elt * parent.monomial(m, Fraction(1, t))
        nz = [(pm, c) for pm, c in enumerate(elt.coords) if c != 0]
        assert len(nz) == 1
        images.append(nz[0])
    return Subfield(parent, sub, span, tuple(images))
