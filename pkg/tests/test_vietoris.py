from fractions import Fraction
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import largest_below, smallest_topology, subsets

from histopos.demos import W_A, W_B, mo2_functional
from histopos.enumeration import homeomorphisms, topologies, topologies_up_to_homeo
from histopos.errors import NotATopology, NotAutomorphism, NotClosed, OutOfRange
from histopos.histories import DecoherenceFunctional, all_trapped_sets, trapped
from histopos.order import mo_lattice
from histopos.vietoris import (
    FiniteTopology,
    ch_locale,
    ch_vietoris_subbasis,
    compose,
    frame_automorphisms,
    frame_ops,
    generate_topology,
    group_closure_check,
    inverse,
    is_frame_automorphism,
    point_bijection,
    require_automorphism,
    vietoris_generators,
)

SIERPINSKI = FiniteTopology(["p", "q"], [[], ["q"], ["p", "q"]])
DISCRETE2 = FiniteTopology(["p", "q"], [[], ["p"], ["q"], ["p", "q"]])
INDISCRETE2 = FiniteTopology(["p", "q"], [[], ["p", "q"]])


def _fs(*sets):
    return {frozenset(s) for s in sets}


class TestTopology:
    def test_validation(self):
        with pytest.raises(NotATopology):
            FiniteTopology("pq", [["p"], ["p", "q"]])
        with pytest.raises(NotATopology):
            FiniteTopology("pqr", [[], ["p"], ["q"], ["p", "q", "r"]])
        with pytest.raises(OutOfRange):
            FiniteTopology("pq", [[], ["z"], ["p", "q"]])
        with pytest.raises(NotATopology):
            FiniteTopology("pp", [[], ["p"]])

    def test_minimal_open_and_t0(self):
        assert SIERPINSKI.minimal_open("p") == {"p", "q"}
        assert SIERPINSKI.minimal_open("q") == {"q"}
        assert SIERPINSKI.is_t0() and not INDISCRETE2.is_t0()

    def test_counts(self):
        assert [len(topologies(range(n))) for n in range(5)] == [1, 1, 4, 29, 355]
        assert [len(topologies_up_to_homeo(range(n))) for n in range(4)] == [1, 1, 3, 9]


class TestGenerate:
    def test_examples(self):
        assert generate_topology("pq", []).opens == _fs((), "pq")
        assert generate_topology("pq", [["p"], ["q"]]).opens == _fs((), "p", "q", "pq")
        assert generate_topology("pqr", [["p", "q"], ["q", "r"]]).opens == _fs((), "q", "pq", "qr", "pqr")

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            generate_topology("pq", [["p", "z"]])

    @given(st.integers(0, 4), st.data())
    def test_matches_intersection_oracle(self, n, data):
        points = list(range(n))
        subbasis = data.draw(st.lists(st.sets(st.sampled_from(points)) if points else st.just(set()), max_size=4))
        T = generate_topology(points, subbasis)
        FiniteTopology(points, T.opens)  # full validation
        assert T.opens == smallest_topology(points, subbasis)


class TestVietorisGenerators:
    def test_single_point(self):
        X = FiniteTopology(["x"], [[], ["x"]])
        gens = {(g.kind, g.open): g.sets for g in vietoris_generators(X)}
        full = frozenset({"x"})
        assert gens["nerve", full] == {full}
        assert gens["member", full] == {frozenset(), full}
        assert gens["nerve", frozenset()] == frozenset()
        assert gens["member", frozenset()] == {frozenset()}

    def test_whole_space(self):
        gens = {(g.kind, g.open): g.sets for g in vietoris_generators(SIERPINSKI)}
        closed = set(SIERPINSKI.closed_sets)
        assert gens["nerve", SIERPINSKI.full] == {c for c in closed if c}
        assert gens["member", SIERPINSKI.full] == closed

    def test_not_closed(self):
        with pytest.raises(NotClosed):
            vietoris_generators(SIERPINSKI, [["q"]])

    def test_explicit_closed_sets(self):
        gens = vietoris_generators(SIERPINSKI, [["p"]])
        assert all(g.sets <= {frozenset("p")} for g in gens)


class TestChLocale:
    def test_running_example(self):
        d = mo2_functional()
        assert ch_vietoris_subbasis(d.consistent, d) == [frozenset(), frozenset({W_A})]
        T = ch_locale(d)
        assert T.points == (W_A,)
        assert T.opens == _fs((), [W_A])

    def test_all_consistent_mo2(self):
        L = mo_lattice(2)
        d = DecoherenceFunctional(L, {(a, b): (Fraction(1, 2) if a == b else 0) for a in L.elements for b in L.elements})
        sub = set(ch_vietoris_subbasis(d.consistent, d))
        # no stage of B^d lies above both blocks, so no single trapped set holds both
        assert sub == {frozenset(), frozenset({W_A}), frozenset({W_B})}
        assert ch_locale(d).opens == _fs((), [W_A], [W_B], [W_A, W_B])

    def test_subbasis_is_trapped_sets(self):
        for d in (mo2_functional(),):
            Bd = d.consistent
            recomputed = {
                frozenset(w.name for w in trapped(F, W, d).traps) for W in Bd.nodes for F in subsets(d.lattice.elements)
            }
            assert set(ch_vietoris_subbasis(Bd, d)) == recomputed
            for W in Bd.nodes:
                assert all_trapped_sets(W, d) <= {frozenset(Bd[n] for n in s) for s in recomputed}


class TestFrame:
    def test_sierpinski(self):
        F = frame_ops(SIERPINSKI)
        q, top, empty = frozenset("q"), SIERPINSKI.full, frozenset()
        assert F.implies(q, empty) == empty
        assert F.neg(F.neg(q)) == top != q

    def test_trivial_implications(self):
        for T in topologies(range(3)):
            F = frame_ops(T)
            for u in T.opens:
                assert F.implies(u, u) == T.full
                assert F.implies(frozenset(), u) == T.full

    def test_implication_matches_generic_oracle(self):
        for T in topologies(range(3)):
            F = frame_ops(T)
            for u in T.opens:
                for v in T.opens:
                    oracle = largest_below(T.opens, lambda a, b: a <= b, lambda w: w & u <= v)
                    assert F.implies(u, v) == oracle

    def test_intuitionistic_witness_exists(self):
        assert any(frame_ops(T).double_negation_witness() is not None for T in topologies(range(2)))
        for n in range(4):
            D = FiniteTopology(range(n), subsets(range(n)))
            assert frame_ops(D).double_negation_witness() is None

    def test_every_small_topology_is_a_frame(self):
        for n in range(4):
            for T in topologies(range(n)):
                assert frame_ops(T).verify_frame()


class TestAutomorphisms:
    def test_examples(self):
        assert len(frame_automorphisms(DISCRETE2)) == 2
        assert len(frame_automorphisms(SIERPINSKI)) == 1
        assert len(frame_automorphisms(INDISCRETE2)) == 1

    def test_group_and_point_induced_on_t0(self):
        for n in range(4):
            for T in topologies(range(n)):
                autos = frame_automorphisms(T)
                assert group_closure_check(T, autos)
                assert all(is_frame_automorphism(T, f) for f in autos)
                if T.is_t0():
                    assert len(autos) == len(homeomorphisms(T))
                    assert all(point_bijection(T, f) is not None for f in autos)

    def test_t0_four_points(self):
        for T in topologies(range(4)):
            if T.is_t0():
                autos = frame_automorphisms(T)
                assert len(autos) == len(homeomorphisms(T))

    def test_non_t0_frame_automorphism_without_points(self):
        T = FiniteTopology(range(3), [[], [0], [1, 2], [0, 1, 2]])
        autos = frame_automorphisms(T)
        assert len(autos) == 2
        assert any(point_bijection(T, f) is None for f in autos)

    def test_composition_helpers(self):
        f, g = frame_automorphisms(DISCRETE2)
        assert compose(g, g) == f
        assert compose(g, inverse(g)) == f

    def test_not_an_automorphism(self):
        bad = {u: u for u in SIERPINSKI.opens}
        bad[frozenset("q")] = SIERPINSKI.full
        with pytest.raises(NotAutomorphism):
            require_automorphism(SIERPINSKI, bad)
        assert not is_frame_automorphism(SIERPINSKI, {u: u for u in list(SIERPINSKI.opens)[:1]})

    def test_every_order_automorphism_preserves_unions(self):
        for T in topologies(range(3)):
            for f in frame_automorphisms(T):
                for u, v in combinations(T.opens, 2):
                    assert f[u | v] == f[u] | f[v] and f[u & v] == f[u] & f[v]
