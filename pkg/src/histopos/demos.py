"""Small worked instances: the two-block lattice MO2, its V-shaped coarse-graining poset, and friends."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .histories import DecoherenceFunctional, all_trapped_sets, find_intersection_failure, semantic_value, trapped
from .order import OrthoLattice, boolean_lattice, enumerate_boolean_subalgebras, mo_lattice
from .sieves import PosetPresheaf, Sieve, global_sections, heyting_of_sieves, is_sieve, local_sections

W_TRIVIAL, W_A, W_B = "W(1)", "W(a,a')", "W(b,b')"


def v_poset():
    """Coarse-graining poset of MO2: the trivial algebra below the two blocks."""
    return enumerate_boolean_subalgebras(mo_lattice(2))


def clashing_presheaf() -> PosetPresheaf:
    """F(W_a) = {1}, F(W_b) = {2}, F(trivial) = {p, q}, with 1 -> p and 2 -> q."""
    B = v_poset()
    carrier = {W_TRIVIAL: ("p", "q"), W_A: ("1",), W_B: ("2",)}
    restrict = {(W_TRIVIAL, W_A): {"1": "p"}, (W_TRIVIAL, W_B): {"2": "q"}}
    return PosetPresheaf(B.poset, carrier, restrict)


def no_global_section() -> dict:
    F = clashing_presheaf()
    local = {w: len(local_sections(F, w)) for w in F.base.elements}
    total = len(global_sections(F))
    every = all(n > 0 for n in local.values())
    return {
        "local_sections": local,
        "global_sections": total,
        "summary": f"local sections: {'yes' if every else 'no'} at every stage; global sections: {total}",
    }


def mo2_functional() -> DecoherenceFunctional:
    """d(a,a) = d(a',a') = 1/2, d(a,a') = 0, d(b,b') = 1/10 + i/5."""
    L = mo_lattice(2)
    pairs = {
        ("a", "a"): Fraction(1, 2),
        ("a'", "a'"): Fraction(1, 2),
        ("a", "a'"): 0,
        ("b", "b'"): (Fraction(1, 10), Fraction(1, 5)),
    }
    return DecoherenceFunctional(L, pairs)


def not_a_sieve() -> dict:
    d = mo2_functional()
    B = d.coarse_graining
    stage = B[W_A]
    value = semantic_value("a", Fraction(1, 2), stage, d)
    check = is_sieve(B.poset, W_A, {w.name for w in value})
    return {
        "consistent": [w.name for w in d.consistent],
        "semantic_value": sorted(w.name for w in value),
        "is_sieve": check.ok,
        "witness": check.witness,
        "summary": f"semantic value of a at {W_A}: {{{', '.join(sorted(w.name for w in value))}}}; "
        + ("a sieve" if check.ok else "not a sieve"),
    }


def classical_functional(lattice: OrthoLattice | None = None, weights=(Fraction(1, 2), Fraction(1, 3), Fraction(1, 6))):
    """d(x, y) = p(x ^ y) for a probability p on the atoms of a Boolean lattice."""
    L = lattice if lattice is not None else boolean_lattice(len(weights))
    atoms = [x for x in L.elements if x not in (L.bottom, L.top) and all(not L.le(y, x) or y in (x, L.bottom) for y in L.elements)]
    atoms = L.poset.sort(atoms)
    weight = dict(zip(atoms, weights))

    def p(x):
        return sum((weight[a] for a in atoms if L.le(a, x)), Fraction(0))

    pairs = {(x, y): p(L.meet(x, y)) for x in L.elements for y in L.elements}
    return DecoherenceFunctional(L, pairs)


def union_not_intersection() -> dict:
    d = classical_functional()
    Bd = d.consistent
    stage = max(Bd.nodes, key=lambda w: len(w.carrier))
    found = find_intersection_failure(stage, d, Bd)
    F, G, inter = found
    union_ok = all(
        trapped(set(x) | set(y), stage, d, Bd).traps == trapped(x, stage, d, Bd).traps | trapped(y, stage, d, Bd).traps
        for x, y in combinations([{e} for e in d.lattice.elements], 2)
    )
    realised = all_trapped_sets(stage, d, Bd)
    return {
        "stage": stage.name,
        "F": sorted(F),
        "G": sorted(G),
        "intersection": sorted(w.name for w in inter),
        "intersection_is_trapped": inter in realised,
        "union_law": union_ok,
        "summary": f"trapped({sorted(F)}) & trapped({sorted(G)}) = {{{', '.join(sorted(w.name for w in inter))}}}; "
        "closed under union, not under intersection",
    }


def double_negation() -> dict:
    B = v_poset()
    H = heyting_of_sieves(B.poset, W_A)
    s = Sieve(W_A, frozenset({W_TRIVIAL}))
    neg, negneg = H.neg(s), H.neg(H.neg(s))
    return {
        "stage": W_A,
        "heyting_laws": H.verify().ok,
        "sieve": sorted(s.members),
        "not": sorted(neg.members),
        "not_not": sorted(negneg.members),
        "summary": f"not not {{{W_TRIVIAL}}} = {{{', '.join(sorted(negneg.members))}}} != {{{W_TRIVIAL}}}",
    }


DEMOS = {
    "no-global-section": no_global_section,
    "not-a-sieve": not_a_sieve,
    "union-not-intersection": union_not_intersection,
    "double-negation": double_negation,
}
