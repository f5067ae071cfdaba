import random
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import global_sections_by_product, largest_below, subpresheaves_by_product

from histopos.demos import W_A, W_B, W_TRIVIAL, double_negation, v_poset
from histopos.enumeration import poset_presheaves, posets_up_to_iso, random_causet
from histopos.errors import NotASubpresheaf, PresheafInvalid, SizeGuard, UnknownNode
from histopos.order import build_poset
from histopos.sieves import (
    PosetPresheaf,
    Sieve,
    classify_subpresheaf,
    downsets,
    global_sections,
    heyting_of_sieves,
    is_sieve,
    is_subpresheaf,
    local_sections,
    morphisms,
    omega_presheaf,
    sieve_implies,
    sieves_at,
    subobject_of,
    subpresheaves,
    valuation_from_subobject,
)

CHAIN2 = build_poset(["u", "v"], [("u", "v")])
ANTI2 = build_poset(["p", "q"], [])


def _two_chain_presheaf():
    return PosetPresheaf(CHAIN2, {"v": ("x", "y"), "u": ("z",)}, {("u", "v"): {"x": "z", "y": "z"}})


def _freeze(chi):
    return frozenset((w, x, s.members) for w, m in chi.items() for x, s in m.items())


class TestSieves:
    def test_minimal_stage(self):
        assert [s.members for s in sieves_at(CHAIN2, "u")] == [frozenset(), {"u"}]

    def test_v_poset_stage(self):
        B = v_poset().poset
        assert [s.members for s in sieves_at(B, W_A)] == [frozenset(), {W_TRIVIAL}, {W_TRIVIAL, W_A}]

    def test_antichain(self):
        assert len(sieves_at(ANTI2, "p")) == 2

    def test_unknown_stage(self):
        with pytest.raises(UnknownNode):
            sieves_at(ANTI2, "r")

    def test_is_sieve_witnesses(self):
        B = v_poset().poset
        check = is_sieve(B, W_A, {W_A})
        assert not check and check.witness == [W_A, W_TRIVIAL]
        check = is_sieve(B, W_A, {W_TRIVIAL, W_B})
        assert not check and check.witness == [W_B]

    def test_downsets_guard(self):
        with pytest.raises(SizeGuard):
            downsets(build_poset("abcdef", []), limit=10)

    @given(st.integers(1, 6), st.floats(0.1, 0.7), st.integers(0, 10**6))
    def test_every_sieve_is_downward_closed(self, n, p, seed):
        P = random_causet(n, p, random.Random(seed))
        for w in P.elements:
            found = sieves_at(P, w)
            for s in found:
                assert is_sieve(P, w, s.members)
            below = sorted(P.down(w), key=P.index)
            brute = [m for m in range(1 << len(below)) if is_sieve(P, w, {below[i] for i in range(len(below)) if m >> i & 1})]
            assert len(brute) == len(found)


class TestHeyting:
    def test_double_negation_example(self):
        B = v_poset().poset
        H = heyting_of_sieves(B, W_A)
        m = Sieve(W_A, frozenset({W_TRIVIAL}))
        empty, top = H.bottom, H.top
        assert H.neg(m) == empty
        assert H.neg(H.neg(m)) == top != m
        assert H.neg(top) == empty and H.neg(empty) == top
        assert not H.leq(H.meet(m, m), empty)
        assert not H.leq(m, H.neg(m))
        assert double_negation()["not_not"] == sorted([W_TRIVIAL, W_A])

    @given(st.integers(1, 6), st.floats(0.1, 0.7), st.integers(0, 10**6))
    def test_implication_is_generic_relative_pseudocomplement(self, n, p, seed):
        P = random_causet(n, p, random.Random(seed))
        stage = P.elements[-1]
        H = heyting_of_sieves(P, stage)
        for s, t in product(H.elements, repeat=2):
            oracle = largest_below(H.elements, H.leq, lambda z: z.members & s.members <= t.members)
            assert sieve_implies(P, stage, s, t) == oracle == H.implies(s, t)

    def test_boolean_when_stage_is_minimal(self):
        for P in posets_up_to_iso(4):
            for w in P.minimal():
                assert heyting_of_sieves(P, w).double_negation_witness() is None


class TestOmega:
    def test_point(self):
        Om = omega_presheaf(build_poset("x", []))
        assert len(Om.carrier["x"]) == 2

    def test_two_chain(self):
        Om = omega_presheaf(CHAIN2)
        assert len(Om.carrier["v"]) == 3 and len(Om.carrier["u"]) == 2
        assert set(Om.restrict["u", "v"].values()) == set(Om.carrier["u"])

    def test_v_poset(self):
        B = v_poset().poset
        Om = omega_presheaf(B)
        assert len(Om.carrier[W_A]) == 3 and len(Om.carrier[W_TRIVIAL]) == 2

    def test_functor_laws(self):
        for P in posets_up_to_iso(4):
            Om = omega_presheaf(P)
            for lo, mid in P.leq:
                for hi in P.up(mid):
                    for s in Om.carrier[hi]:
                        assert Om(lo, mid, Om(mid, hi, s)) == Om(lo, hi, s)
                        assert Om(hi, hi, s) == s


class TestClassification:
    def test_full_and_empty(self):
        F = _two_chain_presheaf()
        full = classify_subpresheaf(F, F.carrier)
        assert all(s.members == F.base.down(w) for w in full for s in full[w].values())
        empty = classify_subpresheaf(F, {})
        assert all(not s.members for w in empty for s in empty[w].values())

    def test_proper_sieve(self):
        F = _two_chain_presheaf()
        S = {"v": {"x"}, "u": {"z"}}
        chi = classify_subpresheaf(F, S)
        assert chi["v"]["y"].members == {"u"}
        assert chi["v"]["x"].members == {"u", "v"}
        assert valuation_from_subobject(F, S, "v", "y").members == {"u"}
        assert valuation_from_subobject(F, F.carrier, "u", "z").members == {"u"}
        assert valuation_from_subobject(F, {}, "v", "x").members == frozenset()

    def test_not_a_subpresheaf(self):
        F = _two_chain_presheaf()
        with pytest.raises(NotASubpresheaf) as exc:
            classify_subpresheaf(F, {"v": {"x"}, "u": set()})
        assert exc.value.witness == ["u", "v", "x"]
        assert not is_subpresheaf(F, {"u": {"q"}})

    @staticmethod
    def _round_trips(F):
        Om = omega_presheaf(F.base)
        subs = subpresheaves(F)
        arrows = morphisms(F, Om)
        assert len(subs) == len(arrows)
        for S in subs:
            assert subobject_of(F, classify_subpresheaf(F, S)) == {w: frozenset(S[w]) for w in F.base.elements}
        for chi in arrows:
            assert _freeze(classify_subpresheaf(F, subobject_of(F, chi))) == _freeze(chi)

    def test_exhaustive_three_nodes_carriers_three(self):
        for n in range(4):
            for P in posets_up_to_iso(n):
                for F in poset_presheaves(P, 3):
                    self._round_trips(F)

    def test_exhaustive_four_nodes_carriers_two(self):
        for P in posets_up_to_iso(4):
            for F in poset_presheaves(P, 2):
                self._round_trips(F)

    def test_sampled_four_nodes_carriers_three(self):
        rng = random.Random(4)
        posets = posets_up_to_iso(4)
        done = 0
        while done < 150:
            P = rng.choice(posets)
            carrier = {w: tuple(range(rng.randint(0, 3))) for w in P.elements}
            covers = {}
            for lo, hi in P.covers:
                covers[lo, hi] = {x: rng.choice(carrier[lo]) for x in carrier[hi]} if carrier[lo] else {}
                if carrier[hi] and not carrier[lo]:
                    break
            else:
                try:
                    F = PosetPresheaf.from_covers(P, carrier, covers)
                except PresheafInvalid:
                    continue
                self._round_trips(F)
                done += 1

    def test_subpresheaves_match_product_scan(self):
        for P in posets_up_to_iso(3):
            for F in poset_presheaves(P, 2):
                ours = {frozenset((w, frozenset(v)) for w, v in S.items()) for S in subpresheaves(F)}
                brute = {frozenset((w, frozenset(v)) for w, v in S.items()) for S in subpresheaves_by_product(F)}
                assert ours == brute


class TestPresheaf:
    def test_missing_restriction(self):
        with pytest.raises(PresheafInvalid):
            PosetPresheaf(CHAIN2, {"v": ("x",), "u": ("z",)}, {})

    def test_bad_identity(self):
        with pytest.raises(PresheafInvalid):
            PosetPresheaf(CHAIN2, {"v": ("x", "y"), "u": ("z",)}, {("u", "v"): {"x": "z", "y": "z"}, ("v", "v"): {"x": "y", "y": "x"}})

    def test_composition_checked(self):
        C3 = build_poset("abc", [("a", "b"), ("b", "c")])
        carrier = {"a": (0, 1), "b": (0, 1), "c": (0,)}
        with pytest.raises(PresheafInvalid) as exc:
            PosetPresheaf(C3, carrier, {("b", "c"): {0: 0}, ("a", "b"): {0: 0, 1: 1}, ("a", "c"): {0: 1}})
        assert exc.value.witness == ["a", "b", "c", 0]

    def test_from_covers_composes(self):
        C3 = build_poset("abc", [("a", "b"), ("b", "c")])
        F = PosetPresheaf.from_covers(C3, {"a": (0, 1), "b": (0, 1), "c": (0, 1)}, {("b", "c"): {0: 1, 1: 0}, ("a", "b"): {0: 1, 1: 0}})
        assert F("a", "c", 0) == 0


class TestSections:
    def test_constant_presheaf(self):
        B = v_poset().poset
        items = ("p", "q", "r")
        F = PosetPresheaf(B, {w: items for w in B.elements}, {(lo, hi): {x: x for x in items} for lo, hi in B.leq if lo != hi})
        found = global_sections(F)
        assert sorted(s[W_A] for s in found) == list(items)

    def test_clash_has_local_but_no_global(self):
        from histopos.demos import clashing_presheaf

        F = clashing_presheaf()
        assert all(local_sections(F, w) for w in F.base.elements)
        assert global_sections(F) == [] == global_sections_by_product(F)

    def test_singletons(self):
        B = v_poset().poset
        F = PosetPresheaf(B, {w: ("*",) for w in B.elements}, {(lo, hi): {"*": "*"} for lo, hi in B.leq if lo != hi})
        assert len(global_sections(F)) == 1

    def test_matches_product_oracle(self):
        for P in posets_up_to_iso(3):
            for F in poset_presheaves(P, 2):
                ours = sorted(sorted(s.items()) for s in global_sections(F))
                assert ours == sorted(sorted(s.items()) for s in global_sections_by_product(F))

    def test_size_guard(self):
        P = build_poset("abcd", [])
        F = PosetPresheaf(P, {w: tuple(range(10)) for w in P.elements}, {})
        with pytest.raises(SizeGuard):
            global_sections(F, limit=100)
