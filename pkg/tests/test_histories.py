from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import subsets

from histopos.demos import W_A, W_B, W_TRIVIAL, classical_functional, mo2_functional, union_not_intersection
from histopos.errors import NotACompleteSet, NotHermitian, NotNormalized, UndefinedPair, UnknownElement
from histopos.gaussian import Gaussian
from histopos.histories import (
    CompleteSet,
    DecoherenceFunctional,
    all_trapped_sets,
    find_intersection_failure,
    is_d_consistent,
    semantic_value,
    trapped,
    trapped_family,
)
from histopos.order import boolean_lattice, mo_lattice


def _names(ws):
    return {w.name for w in ws}


def _diagonal_only(L, p=Fraction(1, 2)):
    return DecoherenceFunctional(L, {(a, b): (p if a == b else 0) for a in L.elements for b in L.elements})


class TestFunctional:
    def test_hermitian_completion(self):
        d = mo2_functional()
        assert d("b", "b'") == Gaussian(Fraction(1, 10), Fraction(1, 5))
        assert d("b'", "b") == Gaussian(Fraction(1, 10), Fraction(-1, 5))

    def test_conflicting_entries(self):
        L = mo_lattice(1)
        with pytest.raises(NotHermitian):
            DecoherenceFunctional(L, {("a", "a'"): (1, 1), ("a'", "a"): (1, 1)})

    def test_non_real_or_out_of_range_diagonal(self):
        L = mo_lattice(1)
        with pytest.raises(NotHermitian):
            DecoherenceFunctional(L, {("a", "a"): (Fraction(1, 2), 1)})
        with pytest.raises(NotHermitian):
            DecoherenceFunctional(L, {("a", "a"): 2})

    def test_normalisation(self):
        L = mo_lattice(1)
        ok = DecoherenceFunctional(L, {("a", "a"): Fraction(1, 4), ("a'", "a'"): Fraction(3, 4)}, complete_sets=[["a", "a'"]])
        assert ok.total_probability(["a", "a'"]) == 1
        with pytest.raises(NotNormalized):
            DecoherenceFunctional(L, {("a", "a"): Fraction(1, 4), ("a'", "a'"): Fraction(1, 4)}, complete_sets=[["a", "a'"]])

    def test_complete_set_validation(self):
        L = mo_lattice(2)
        assert len(CompleteSet.of(L, ["1"])) == 1
        with pytest.raises(NotACompleteSet):
            CompleteSet.of(L, ["a", "b"])
        with pytest.raises(NotACompleteSet):
            CompleteSet.of(L, ["a"])
        with pytest.raises(UnknownElement):
            CompleteSet.of(L, ["z"])

    def test_unknown_and_undefined(self):
        L = mo_lattice(1)
        with pytest.raises(UnknownElement):
            DecoherenceFunctional(L, {("q", "a"): 0})
        d = DecoherenceFunctional(L, {("a", "a"): 1})
        with pytest.raises(UndefinedPair):
            d("a", "a'")

    def test_tolerance(self):
        L = mo_lattice(1)
        d = DecoherenceFunctional(L, {("a", "a'"): (Fraction(1, 10**10), 0)})
        assert is_d_consistent(["a", "a'"], d)
        strict = DecoherenceFunctional(L, {("a", "a'"): (Fraction(1, 10**10), 0)}, tol=0)
        assert not is_d_consistent(["a", "a'"], strict)


class TestConsistency:
    def test_running_example(self):
        d = mo2_functional()
        assert _names(d.consistent) == {W_A}

    def test_everything_consistent(self):
        for L in (mo_lattice(3), boolean_lattice(3)):
            d = _diagonal_only(L)
            assert _names(d.consistent) == {w.name for w in d.coarse_graining if not w.is_trivial}

    def test_large_interference_excludes_block(self):
        L = mo_lattice(2)
        d = DecoherenceFunctional(L, {("a", "a"): 0, ("a'", "a'"): 0, ("a", "a'"): 1, ("b", "b'"): 0})
        assert W_A not in _names(d.consistent)
        assert W_B in _names(d.consistent)

    def test_is_d_consistent_examples(self):
        d = mo2_functional()
        assert is_d_consistent(["a", "a'"], d)
        assert is_d_consistent(["1"], d)
        assert not is_d_consistent(["b", "b'"], d)

    def test_missing_pair_surfaces(self):
        L = mo_lattice(2)
        d = DecoherenceFunctional(L, {("a", "a'"): 0})
        with pytest.raises(UndefinedPair):
            d.consistent


class TestSemanticValue:
    def test_running_example(self):
        d = mo2_functional()
        B = d.coarse_graining
        assert _names(semantic_value("a", Fraction(1, 2), B[W_A], d)) == {W_A}
        assert semantic_value("a", Fraction(3, 10), B[W_A], d) == frozenset()
        assert semantic_value("a", "0.5", B[W_A], d) == semantic_value("a", Fraction(1, 2), B[W_A], d)

    def test_bottom_belongs_everywhere(self):
        d = classical_functional()
        top = d.coarse_graining.nodes[-1]
        value = semantic_value("0", d.probability("0"), top, d)
        assert value == frozenset(w for w in d.consistent if w.carrier <= top.carrier)

    def test_unknown_proposition(self):
        d = mo2_functional()
        with pytest.raises(UnknownElement):
            semantic_value("z", 0, d.coarse_graining[W_A], d)


class TestTrapped:
    def test_examples(self):
        d = mo2_functional()
        W = d.coarse_graining[W_A]
        assert _names(trapped({"a"}, W, d)) == {W_A}
        assert _names(trapped({"0"}, W, d)) == {W_A}
        assert len(trapped(set(), W, d)) == 0
        assert trapped_family([{"a"}], W, d).traps == trapped({"a"}, W, d).traps
        assert _names(trapped_family([{"0"}, {"1"}], W, d)) == {W_A}

    def test_family_needs_both(self):
        d = classical_functional(boolean_lattice(2), (Fraction(1, 2), Fraction(1, 2)))
        top = d.coarse_graining.nodes[-1]
        assert _names(trapped_family([{"a"}, {"b"}], top, d)) == {top.name}

    def test_trivial_stage_sees_nothing_consistent(self):
        d = _diagonal_only(mo_lattice(2))
        assert len(trapped({"0"}, d.coarse_graining[W_TRIVIAL], d)) == 0

    def test_all_trapped_sets_is_brute_force(self):
        for d in (classical_functional(), _diagonal_only(mo_lattice(2))):
            for stage in d.coarse_graining:
                brute = {trapped(F, stage, d).traps for F in subsets(d.lattice.elements)}
                assert all_trapped_sets(stage, d) == brute

    def test_demo_intersection_failure(self):
        report = union_not_intersection()
        assert report["union_law"] is True
        assert report["intersection_is_trapped"] is False
        d = classical_functional()
        stage = d.coarse_graining[report["stage"]]
        brute = {trapped(H, stage, d).traps for H in subsets(d.lattice.elements)}
        inter = trapped(report["F"], stage, d).traps & trapped(report["G"], stage, d).traps
        assert inter not in brute

    def test_mo_family_has_no_intersection_failure(self):
        for n in (1, 2, 3, 4):
            d = _diagonal_only(mo_lattice(n))
            for stage in d.coarse_graining:
                assert find_intersection_failure(stage, d) is None


@st.composite
def instances(draw):
    kind = draw(st.sampled_from(["boolean", "mo"]))
    L = boolean_lattice(draw(st.integers(1, 3))) if kind == "boolean" else mo_lattice(draw(st.integers(1, 3)))
    els = list(L.elements)
    pairs = {}
    for i, a in enumerate(els):
        pairs[a, a] = Fraction(draw(st.integers(0, 4)), 4)
        for b in els[i + 1 :]:
            pairs[a, b] = draw(st.sampled_from([0, 0, (Fraction(1, 3), 0), (0, Fraction(-1, 5))]))
    d = DecoherenceFunctional(L, pairs)
    stage = draw(st.sampled_from(d.coarse_graining.nodes))
    F = frozenset(draw(st.sets(st.sampled_from(els))))
    G = frozenset(draw(st.sets(st.sampled_from(els))))
    return d, stage, F, G


class TestTrappedProperties:
    @given(instances())
    def test_union_closure(self, inst):
        d, W, F, G = inst
        assert trapped(F, W, d).traps | trapped(G, W, d).traps == trapped(F | G, W, d).traps

    @given(instances())
    def test_intersection_is_family(self, inst):
        d, W, F, G = inst
        assert trapped(F, W, d).traps & trapped(G, W, d).traps == trapped_family([F, G], W, d).traps

    @given(instances())
    def test_semantic_value_is_singleton_trap(self, inst):
        d, W, F, _ = inst
        for a in F:
            p = d.probability(a)
            assert semantic_value(a, p, W, d) == trapped({a}, W, d).traps
            assert semantic_value(a, p + Fraction(1, 7), W, d) == frozenset()

    @given(instances())
    def test_monotone_in_stage(self, inst):
        d, W, F, _ = inst
        for V in d.coarse_graining:
            if V.carrier <= W.carrier:
                assert trapped(F, V, d).traps <= trapped(F, W, d).traps

    @given(instances())
    def test_members_are_consistent_and_below(self, inst):
        d, W, F, _ = inst
        for w in trapped(F, W, d):
            assert w in d.consistent.nodes and w.carrier <= W.carrier and F & w.carrier


def test_exhaustive_union_law_small():
    d = classical_functional(boolean_lattice(2), (Fraction(1, 4), Fraction(3, 4)))
    sets = list(subsets(d.lattice.elements))
    for W in d.coarse_graining:
        for F, G in product(sets, repeat=2):
            assert trapped(F, W, d).traps | trapped(G, W, d).traps == trapped(F | G, W, d).traps
