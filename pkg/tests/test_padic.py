import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from bttwist.errors import NotSquareFree, SplitPrime, ZeroInput
from bttwist.padic import (INFINITY, element_sqrt, make_field, quad_ext_type,
                           squarefree_part)

Q2 = make_field(2, ())
OMEGA = make_field(2, (-1, -3, 2))


def test_omega_invariants():
    assert OMEGA.e == 4 and OMEGA.f == 2 and OMEGA.degree == 8


def test_base_field():
    assert Q2.e == 1 and Q2.f == 1 and Q2.degree == 1


def test_unramified_quadratic_over_three():
    f = make_field(3, (2,))
    assert f.e == 1 and f.f == 2
    assert f.sqrt_gen(0).valuation() == 0
    # independent residue oracle: the nine elements a + b*sqrt(2) with
    # 0 <= a, b < 3 are pairwise incongruent, so the residue field has
    # at least nine elements
    reps = [f.from_rational(a) + f.sqrt_gen(0) * b
            for a in range(3) for b in range(3)]
    for i, x in enumerate(reps):
        for y in reps[:i]:
            assert (x - y).valuation() == 0


@pytest.mark.parametrize("p,args,err", [
    (2, (17,), SplitPrime),      # 17 = 1 mod 8
    (7, (2,), SplitPrime),       # 2 is a square mod 7
    (2, (12,), NotSquareFree),
    (2, (-1, -4), NotSquareFree),
    (2, (-1, -1), NotSquareFree),  # dependent mod squares
    (2, (2, 8), NotSquareFree),
])
def test_constructor_rejections(p, args, err):
    with pytest.raises(err):
        make_field(p, args)


def test_valuations():
    assert OMEGA.from_rational(2).valuation() == 1
    assert OMEGA.sqrt_of(2).valuation() == Fraction(1, 2)
    f = make_field(2, (-1,))
    assert (f.one + f.sqrt_gen(0)).valuation() == Fraction(1, 2)
    assert f.uniformizer.valuation() == Fraction(1, 2)
    assert f.zero.valuation() is INFINITY


def test_cube_root_of_unity():
    f = make_field(2, (-3,))
    w = (f.sqrt_gen(0) - 1) / 2
    assert (w * w + w + 1).is_zero()
    assert w * w.conj(1) == 1


def test_inverse_identity():
    f = make_field(2, (2,))
    x = f.one + f.sqrt_gen(0)
    assert x.inv() == f.sqrt_gen(0) - 1
    assert (x * x.inv()) == 1


def test_conjugation_is_involution():
    rng = random.Random(5)
    for _ in range(20):
        coords = [Fraction(rng.randint(-9, 9), rng.choice([1, 2, 3]))
                  for _ in range(8)]
        x = OMEGA.el(coords)
        for mask in range(8):
            assert x.conj(mask).conj(mask) == x


@settings(max_examples=40, deadline=None)
@given(st.integers(-30, 30), st.integers(-30, 30), st.integers(1, 4),
       st.integers(-30, 30), st.integers(-30, 30), st.integers(1, 4))
def test_valuation_laws_quadratic(a0, a1, d0, b0, b1, d1):
    f = make_field(2, (2,))
    x = f.el([Fraction(a0, d0), Fraction(a1, d0)])
    y = f.el([Fraction(b0, d1), Fraction(b1, d1)])
    if x.is_zero() or y.is_zero():
        return
    assert (x * y).valuation() == x.valuation() + y.valuation()
    s = x + y
    if not s.is_zero():
        assert s.valuation() >= min(x.valuation(), y.valuation())
        if x.valuation() != y.valuation():
            assert s.valuation() == min(x.valuation(), y.valuation())


def test_valuation_laws_bulk():
    # the large randomized sweep over a cheap field
    rng = random.Random(11)
    f = make_field(3, (2,))
    pairs = 0
    while pairs < 10 ** 4:
        x = f.el([Fraction(rng.randint(-20, 20), rng.choice([1, 3]))
                  for _ in range(2)])
        y = f.el([Fraction(rng.randint(-20, 20), rng.choice([1, 3]))
                  for _ in range(2)])
        if x.is_zero() or y.is_zero():
            continue
        pairs += 1
        assert (x * y).valuation() == x.valuation() + y.valuation()
        s = x + y
        if not s.is_zero():
            assert s.valuation() >= min(x.valuation(), y.valuation())
            if x.valuation() != y.valuation():
                assert s.valuation() == min(x.valuation(), y.valuation())


def test_valuation_galois_invariant():
    rng = random.Random(7)
    for _ in range(50):
        x = OMEGA.el([Fraction(rng.randint(-9, 9), rng.choice([1, 2]))
                      for _ in range(8)])
        if x.is_zero():
            continue
        v = x.valuation()
        for mask in range(8):
            assert x.conj(mask).valuation() == v


@pytest.mark.parametrize("p,args", [
    (2, ()), (2, (-1,)), (2, (-3,)), (2, (2,)), (2, (-1, 2)),
    (2, (-1, -3, 2)), (3, (2,)), (3, (3,)),
])
def test_value_group_is_one_over_e(p, args):
    f = make_field(p, args)
    assert f.uniformizer.valuation() == Fraction(1, f.e)
    # no smaller positive valuation among a sample of small elements
    rng = random.Random(13)
    smallest = f.uniformizer.valuation()
    for _ in range(200):
        x = f.el([Fraction(rng.randint(-6, 6), rng.choice([1, 2]))
                  for _ in range(f.degree)])
        if x.is_zero():
            continue
        v = x.valuation()
        assert (v * f.e).denominator == 1
        if 0 < v < smallest:  # pragma: no cover - would be a bug
            smallest = v
    assert smallest == Fraction(1, f.e)


def brute_defect_over_z(a: int, bound=64):
    """Independent oracle: minimize nu_2(a - b^2) over integers b."""
    best = None
    for b in range(-bound, bound + 1):
        diff = a - b * b
        if diff == 0:
            continue
        v = 0
        d = abs(diff)
        while d % 2 == 0:
            d //= 2
            v += 1
        if best is None or v > best:
            best = v
    return best


def test_defect_examples():
    # odd valuation: the ideal itself
    assert Q2.quadratic_defect(Q2.from_rational(2)) == 1
    # -3 needs the unit bound: frozen against the brute-force oracle
    assert brute_defect_over_z(-3) == 2
    assert Q2.quadratic_defect(Q2.from_rational(-3)) == 2
    assert brute_defect_over_z(-1) == 1
    assert Q2.quadratic_defect(Q2.from_rational(-1)) == 1
    assert Q2.quadratic_defect(Q2.from_rational(5)) == 2
    # squares have infinite defect, including 2-adic squares with no
    # rational square root
    assert Q2.quadratic_defect(Q2.from_rational(9)) is INFINITY
    assert Q2.quadratic_defect(Q2.from_rational(17)) is INFINITY
    assert Q2.quadratic_defect(Q2.from_rational(-7)) is INFINITY
    with pytest.raises(ZeroInput):
        Q2.quadratic_defect(Q2.zero)


def test_defect_odd_p():
    q3 = make_field(3, ())
    assert q3.quadratic_defect(q3.from_rational(3)) == 1
    assert q3.quadratic_defect(q3.from_rational(2)) == 0   # non-residue unit
    assert q3.quadratic_defect(q3.from_rational(-2)) is INFINITY


def test_defect_scaling_and_bound():
    rng = random.Random(3)
    f = make_field(2, (-1,))
    for _ in range(40):
        a = f.el([Fraction(rng.randint(-9, 9)), Fraction(rng.randint(-9, 9))])
        if a.is_zero():
            continue
        d = f.quadratic_defect(a)
        if d is INFINITY:
            continue
        assert d <= (f.from_rational(4) * a).valuation()
        b = f.pi_pow(rng.randint(1, 3))
        assert f.quadratic_defect(a * b * b) == d + 2 * b.valuation()


def test_subfield_lattice():
    subs = OMEGA.subfields()
    assert len(subs) == 15
    degs = sorted(s.field.degree for s in subs)
    assert degs == [1] + [2] * 7 + [4] * 7
    quad_args = {s.field.sqrt_args[0] for s in subs if s.field.degree == 2}
    assert quad_args == {-1, 3, -3, 2, -2, 6, -6}
    small = make_field(2, (-3,))
    assert [s.field.degree for s in small.subfields()] == [1]
    bi = make_field(2, (-1, 2))
    quads = {s.field.sqrt_args[0] for s in bi.subfields()
             if s.field.degree == 2}
    assert quads == {-1, 2, -2}


def test_subfield_embedding_roundtrip():
    sub = OMEGA.find_subfield((6,))
    x = sub.field.one + sub.field.sqrt_gen(0) * Fraction(3, 2)
    emb = sub.embed(x)
    assert emb * emb == sub.embed(x * x)
    assert sub.project(emb) == x
    assert sub.project(OMEGA.sqrt_of(-1)) is None


def test_residue_representatives():
    for p, args in [(2, ()), (2, (-3,)), (3, (2,)), (2, (-1, -3, 2))]:
        f = make_field(p, args)
        reps = f.residue_reps
        assert len(reps) == f.q
        assert reps[0].is_zero() and reps[1] == 1
        for i, r in enumerate(reps):
            for s in reps[i + 1:]:
                assert (r - s).valuation() == 0


def test_element_sqrt_roundtrip():
    rng = random.Random(17)
    f = make_field(2, (-1, 2))
    for _ in range(25):
        y = f.el([Fraction(rng.randint(-5, 5), rng.choice([1, 2]))
                  for _ in range(4)])
        if y.is_zero():
            continue
        s = element_sqrt(y * y)
        assert s is not None and s * s == y * y
    assert element_sqrt(Q2.from_rational(17)) is None


def test_squarefree_part():
    assert squarefree_part(12) == (3, 2)
    assert squarefree_part(-18) == (-2, 3)
    assert squarefree_part(1) == (1, 1)


def test_quad_ext_type():
    assert quad_ext_type(-3, 2) == "unramified"
    assert quad_ext_type(17, 2) == "split"
    assert quad_ext_type(-1, 2) == "ramified"
    assert quad_ext_type(2, 3) == "unramified"
    assert quad_ext_type(-2, 3) == "split"
    assert quad_ext_type(3, 3) == "ramified"
