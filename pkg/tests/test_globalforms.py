import pytest
from hypothesis import given, settings, strategies as st

from bttwist.errors import (BadN, DyadicSplit, ExistenceFails,
                            ExistenceUnknown, InvalidRepresentation,
                            WrongResidue)
from bttwist.globalforms import (QuadForm, case_c_example_rep,
                                 class_group, compose, discriminant_of,
                                 dyadic_class_square, genus_number,
                                 global_count, h2, principal_form,
                                 resolve_case_c, serre_existence)
from bttwist.padic import squarefree_part


SQUAREFREE = [n for n in range(1, 140) if squarefree_part(n)[0] == n]


class TestClassGroups:
    def test_small_groups(self):
        C = class_group(5)
        assert C.D == -20 and C.h == 2
        assert C.elements == [QuadForm(1, 0, 5), QuadForm(2, 2, 3)]
        assert class_group(1).h == 1
        C6 = class_group(6)
        assert C6.h == 2 and C6.elements == [QuadForm(1, 0, 6),
                                             QuadForm(2, 0, 3)]
        assert class_group(23).h == 3
        assert class_group(47).h == 5

    def test_reduction(self):
        f = QuadForm(6, 7, 3)
        r = f.reduce()
        assert r.is_reduced() and r.D == f.D

    def test_identity_and_inverse(self):
        C = class_group(14)
        e = C.identity
        for f in C.elements:
            assert compose(f, e) == f
            assert compose(f, f.inverse()) == e

    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from([5, 6, 14, 23, 26, 47, 41]), st.data())
    def test_composition_laws(self, N, data):
        C = class_group(N)
        i = data.draw(st.integers(0, C.h - 1))
        j = data.draw(st.integers(0, C.h - 1))
        k = data.draw(st.integers(0, C.h - 1))
        f, g, hq = C.elements[i], C.elements[j], C.elements[k]
        assert compose(f, g) == compose(g, f)
        assert compose(compose(f, g), hq) == compose(f, compose(g, hq))

    def test_two_torsion_vs_genus_theory(self):
        for N in SQUAREFREE:
            C = class_group(N)
            assert C.h2() == genus_number(N), N

    def test_h2_examples(self):
        assert h2(class_group(5)) == 2
        assert h2(class_group(1)) == 1
        assert h2(class_group(35)) == 2
        assert h2(class_group(30)) == 4

    def test_bad_n(self):
        with pytest.raises(BadN):
            discriminant_of(12)
        with pytest.raises(BadN):
            discriminant_of(-5)


class TestDyadicClass:
    def test_examples(self):
        assert dyadic_class_square(5) is False
        assert dyadic_class_square(6) is False
        assert dyadic_class_square(1) is True
        assert dyadic_class_square(2) is True
        assert dyadic_class_square(10) is False
        # N=14: class group is cyclic of order 4, so the
        # norm-2 class is the square of a generator
        assert dyadic_class_square(14) is True

    def test_split_and_inert_raise(self):
        with pytest.raises(DyadicSplit):
            dyadic_class_square(7)   # D = -7: 2 splits
        with pytest.raises(DyadicSplit):
            dyadic_class_square(3)   # D = -3: 2 inert


class TestExistence:
    def test_examples(self):
        assert serre_existence(3) is True
        assert serre_existence(11) is True
        assert serre_existence(35) is False
        assert serre_existence(19) is True
        assert serre_existence(115) is False  # 5 * 23

    def test_representation_oracle(self):
        # N = x^2 + 2 y^2 is solvable exactly when the criterion passes
        for N in [n for n in SQUAREFREE if n % 8 == 3]:
            found = any(N == x * x + 2 * y * y
                        for x in range(0, 12) for y in range(0, 9))
            assert serre_existence(N) == found, N

    def test_wrong_residue(self):
        with pytest.raises(WrongResidue):
            serre_existence(5)


class TestGlobalCount:
    def test_case_a(self):
        out = global_count(3)
        assert out["case"] == "a" and out["count"] == 2
        out11 = global_count(11)
        assert out11["count"] == 2 * out11["h2"] == 2

    def test_existence_failure(self):
        with pytest.raises(ExistenceFails):
            global_count(35)

    def test_existence_must_be_asserted(self):
        with pytest.raises(ExistenceUnknown):
            global_count(5)

    def test_case_b(self):
        out = global_count(2, assert_existence=True)
        assert out["case"] == "b" and out["count"] == 4 * out["h2"] == 4

    def test_case_c_pair_and_resolution(self):
        out5 = global_count(5, assert_existence=True,
                            resolve_rep=case_c_example_rep(5))
        assert out5["case"] == "c"
        assert out5["case_c_pair"] == (2, 6)
        assert out5["count"] == 6
        out6 = global_count(6, assert_existence=True,
                            resolve_rep=case_c_example_rep(6))
        assert out6["case_c_pair"] == (2, 6) and out6["count"] == 2

    def test_resolution_stays_in_the_pair(self):
        for N in (5, 6):
            out = global_count(N, assert_existence=True,
                               resolve_rep=case_c_example_rep(N))
            assert out["count"] in out["case_c_pair"]

    def test_ambiguous_residue_seven(self):
        # 7 mod 8 appears in only one stated range, and its dyadic place
        # splits, so the squareness test cannot apply
        with pytest.raises(DyadicSplit):
            global_count(15, assert_existence=True)

    def test_invalid_representation(self):
        from bttwist.bttree import MoebiusMap
        from bttwist.padic import make_field
        f = make_field(2, (-5,))
        bad_i = MoebiusMap.from_rows(f, [[0, 1], [1, 0]])  # squares to +1
        _, j = case_c_example_rep(5)
        with pytest.raises(InvalidRepresentation):
            resolve_case_c(5, (bad_i, j))


def test_principal_form():
    assert principal_form(-20) == QuadForm(1, 0, 5)
    assert principal_form(-3) == QuadForm(1, 1, 1)
