"""Sieves on a finite poset, the subobject classifier and presheaf sections.

Sieves here are downward-closed sets: a sieve on W0 is a set of
coarse-grainings of W0 closed under further coarse-graining.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import prod
from typing import Hashable, Iterable, Mapping

from .checks import PASS, Check, fail
from .errors import NotASubpresheaf, PresheafInvalid, SizeGuard, UnknownNode
from .heyting import HeytingAlgebra
from .order import FinitePoset

DEFAULT_MAX_SEARCH = 10**7


@dataclass(frozen=True)
class Sieve:
    stage: Hashable
    members: frozenset

    def __contains__(self, node):
        return node in self.members

    def __len__(self):
        return len(self.members)


def _require(poset: FinitePoset, node):
    if node not in poset:
        raise UnknownNode(f"unknown node {node!r}", witness=node)


def is_sieve(poset: FinitePoset, stage, members: Iterable) -> Check:
    """Membership below ``stage`` plus downward closure."""
    _require(poset, stage)
    members = frozenset(members)
    for w in poset.sort(members):
        if not poset.le(w, stage):
            return fail([w], f"{w!r} is not below the stage {stage!r}")
    for w in poset.sort(members):
        for v in poset.sort(poset.down(w)):
            if v not in members:
                return fail([w, v], f"{v!r} <= {w!r} is missing")
    return PASS


def downsets(poset: FinitePoset, within: Iterable | None = None, limit: int = DEFAULT_MAX_SEARCH) -> list:
    """All downward-closed subsets of ``within`` (itself downward closed)."""
    scope = frozenset(poset.elements if within is None else within)
    order = [x for x in poset.linear_extension if x in scope]
    out = []

    def grow(i, chosen):
        if i == len(order):
            out.append(frozenset(chosen))
            if len(out) > limit:
                raise SizeGuard(f"more than {limit} downsets", witness=limit)
            return
        x = order[i]
        grow(i + 1, chosen)
        if poset.down(x) - {x} <= chosen:
            chosen.add(x)
            grow(i + 1, chosen)
            chosen.discard(x)

    grow(0, set())
    out.sort(key=lambda s: (len(s), sorted(poset.index(x) for x in s)))
    return out


def sieves_at(poset: FinitePoset, stage, limit: int = DEFAULT_MAX_SEARCH) -> list:
    """All sieves on ``stage``, smallest first."""
    _require(poset, stage)
    return [Sieve(stage, s) for s in downsets(poset, poset.down(stage), limit)]


def sieve_implies(poset: FinitePoset, stage, s: Sieve, t: Sieve) -> Sieve:
    """{W <= stage : every W' <= W in s is also in t}."""
    return Sieve(
        stage,
        frozenset(w for w in poset.down(stage) if all(v in t.members for v in poset.down(w) if v in s.members)),
    )


def heyting_of_sieves(poset: FinitePoset, stage, limit: int = DEFAULT_MAX_SEARCH) -> HeytingAlgebra:
    sieves = sieves_at(poset, stage, limit)
    algebra = HeytingAlgebra(
        sieves,
        leq=lambda a, b: a.members <= b.members,
        meet=lambda a, b: Sieve(stage, a.members & b.members),
        join=lambda a, b: Sieve(stage, a.members | b.members),
        implies=lambda a, b: sieve_implies(poset, stage, a, b),
        bottom=sieves[0],
        top=sieves[-1],
    )
    return algebra


class PosetPresheaf:
    """Contravariant set-valued functor on a finite poset.

    ``restrict[(lo, hi)]`` maps ``carrier[hi]`` to ``carrier[lo]`` for
    lo < hi. Identities are implicit. Both functor laws are checked here.
    """

    def __init__(self, base: FinitePoset, carrier: Mapping, restrict: Mapping):
        self.base = base
        self.carrier = {w: tuple(carrier.get(w, ())) for w in base.elements}
        self.restrict = {}
        for (lo, hi), m in restrict.items():
            _require(base, lo)
            _require(base, hi)
            if lo == hi:
                if any(m[x] != x for x in self.carrier[hi]):
                    raise PresheafInvalid(f"restriction {hi!r} -> {hi!r} is not the identity", witness=[hi, hi])
                continue
            if not base.lt(lo, hi):
                raise PresheafInvalid(f"restriction given for unrelated pair {lo!r}, {hi!r}", witness=[lo, hi])
            self.restrict[lo, hi] = dict(m)
        for lo, hi in base.leq:
            if lo == hi:
                continue
            if (lo, hi) not in self.restrict:
                raise PresheafInvalid(f"missing restriction {hi!r} -> {lo!r}", witness=[lo, hi])
            m = self.restrict[lo, hi]
            for x in self.carrier[hi]:
                if x not in m or m[x] not in self.carrier[lo]:
                    raise PresheafInvalid(f"restriction {hi!r} -> {lo!r} is not a map of carriers at {x!r}", witness=[lo, hi, x])
        for lo, mid in base.leq:
            for hi in base.up(mid):
                if lo == mid or mid == hi:
                    continue
                for x in self.carrier[hi]:
                    if self.restrict[lo, mid][self.restrict[mid, hi][x]] != self.restrict[lo, hi][x]:
                        raise PresheafInvalid(
                            f"composition fails along {lo!r} < {mid!r} < {hi!r} at {x!r}",
                            witness=[lo, mid, hi, x],
                        )

    @classmethod
    def from_covers(cls, base: FinitePoset, carrier: Mapping, restrict: Mapping) -> "PosetPresheaf":
        """Fill in restrictions along non-covering pairs by composing covers.

        Supplied maps for non-covering pairs are kept and then checked
        against the composites.
        """
        maps = {k: dict(v) for k, v in restrict.items()}
        covers = set(base.covers)
        for hi in base.linear_extension:
            for lo in base.linear_extension:
                if not base.lt(lo, hi) or (lo, hi) in maps:
                    continue
                if (lo, hi) in covers:
                    raise PresheafInvalid(f"missing restriction {hi!r} -> {lo!r}", witness=[lo, hi])
                mid = next(m for m in base.elements if base.lt(lo, m) and (m, hi) in covers)
                maps[lo, hi] = {x: maps[lo, mid][maps[mid, hi][x]] for x in carrier.get(hi, ())}
        return cls(base, carrier, maps)

    def __call__(self, lo, hi, x):
        """Restrict element x of carrier[hi] to lo."""
        if lo == hi:
            return x
        return self.restrict[lo, hi][x]

    def __eq__(self, other):
        if not isinstance(other, PosetPresheaf):
            return NotImplemented
        return self.base == other.base and self.carrier == other.carrier and self.restrict == other.restrict

    def size_product(self) -> int:
        return prod(len(c) for c in self.carrier.values())


def omega_presheaf(poset: FinitePoset, limit: int = DEFAULT_MAX_SEARCH) -> PosetPresheaf:
    """Sieves at each node; restriction pulls a sieve back to a lower node."""
    carrier = {w: sieves_at(poset, w, limit) for w in poset.elements}
    restrict = {}
    for lo, hi in poset.leq:
        if lo != hi:
            below = poset.down(lo)
            restrict[lo, hi] = {s: Sieve(lo, s.members & below) for s in carrier[hi]}
    return PosetPresheaf(poset, carrier, restrict)


def is_subpresheaf(F: PosetPresheaf, S: Mapping) -> Check:
    for w in F.base.elements:
        for x in S.get(w, ()):
            if x not in F.carrier[w]:
                return fail([w, x], f"{x!r} is not in the carrier at {w!r}")
    for lo, hi in F.base.leq:
        if lo == hi:
            continue
        for x in S.get(hi, ()):
            if F(lo, hi, x) not in S.get(lo, ()):
                return fail([lo, hi, x], f"restriction of {x!r} from {hi!r} leaves the subpresheaf at {lo!r}")
    return PASS


def classify_subpresheaf(F: PosetPresheaf, S: Mapping) -> dict:
    """Characteristic morphism: node -> (element -> sieve of stages where it lands in S)."""
    check = is_subpresheaf(F, S)
    if not check:
        raise NotASubpresheaf(check.message, witness=check.witness)
    base = F.base
    chi = {}
    for w in base.elements:
        inside = S.get(w, frozenset())
        below = base.down(w)
        tests = [(v, S.get(v, frozenset()), F.restrict.get((v, w))) for v in base.sort(below)]
        chi[w] = {
            x: Sieve(w, frozenset(v for v, sv, m in tests if (x if m is None else m[x]) in sv))
            for x in F.carrier[w]
        }
        assert all(chi[w][x].members == below for x in inside)
    return chi


def valuation_from_subobject(F: PosetPresheaf, S: Mapping, stage, x) -> Sieve:
    """Stage component of the characteristic morphism evaluated at x."""
    _require(F.base, stage)
    return classify_subpresheaf(F, S)[stage][x]


def subobject_of(F: PosetPresheaf, chi: Mapping) -> dict:
    """Inverse of classification: elements sent to the maximal sieve."""
    return {
        w: frozenset(x for x in F.carrier[w] if chi[w][x].members == F.base.down(w))
        for w in F.base.elements
    }


def subpresheaves(F: PosetPresheaf, limit: int = DEFAULT_MAX_SEARCH) -> list:
    """Every subpresheaf of F as a node -> frozenset mapping.

    Built from the top down: S(w) must contain the restrictions of every
    S(v) above w, and may add any other elements of F(w).
    """
    base = F.base
    nodes = list(reversed(base.linear_extension))
    above = {w: [v for v in nodes if base.lt(w, v)] for w in nodes}
    out, chosen = [], {}

    def step(i):
        if i == len(nodes):
            out.append({w: chosen[w] for w in base.elements})
            if len(out) > limit:
                raise SizeGuard("too many subpresheaves", witness=limit)
            return
        w = nodes[i]
        forced = frozenset(F.restrict[w, v][x] for v in above[w] for x in chosen[v])
        free = [x for x in F.carrier[w] if x not in forced]
        for mask in range(1 << len(free)):
            chosen[w] = forced | {x for j, x in enumerate(free) if mask >> j & 1}
            step(i + 1)
        chosen.pop(w, None)

    step(0)
    return out


def morphisms(F: PosetPresheaf, G: PosetPresheaf, limit: int = DEFAULT_MAX_SEARCH) -> list:
    """All natural transformations F -> G.

    Nodes are filled from the top of the order down. Naturality along each
    hi above w fixes phi_w on the image of F(w <- hi); the rest is free.
    """
    base = F.base
    nodes = list(reversed(base.linear_extension))
    above = {w: [v for v in nodes if base.lt(w, v)] for w in nodes}
    out, phi, steps = [], {}, [0]

    def step(i):
        steps[0] += 1
        if steps[0] > limit:
            raise SizeGuard(f"morphism search exceeded {limit} steps", witness=limit)
        if i == len(nodes):
            out.append({w: dict(phi[w]) for w in base.elements})
            return
        w = nodes[i]
        forced = {}
        for v in above[w]:
            fm, gm, pv = F.restrict[w, v], G.restrict[w, v], phi[v]
            for x, y in fm.items():
                t = gm[pv[x]]
                if forced.setdefault(y, t) != t:
                    return
        free = [x for x in F.carrier[w] if x not in forced]
        for choice in product(G.carrier[w], repeat=len(free)):
            phi[w] = {**forced, **dict(zip(free, choice))}
            step(i + 1)
        phi.pop(w, None)

    step(0)
    return out


def _sections_over(F: PosetPresheaf, nodes: list, limit: int) -> list:
    if prod(len(F.carrier[w]) for w in nodes) > limit:
        raise SizeGuard(f"section search space exceeds {limit}", witness=limit)
    base = F.base
    order = [w for w in reversed(base.linear_extension) if w in set(nodes)]
    out, chosen = [], {}

    def step(i):
        if i == len(order):
            out.append({w: chosen[w] for w in base.elements if w in chosen})
            return
        w = order[i]
        for x in F.carrier[w]:
            if all(F(w, v, chosen[v]) == x for v in chosen if base.lt(w, v)):
                chosen[w] = x
                step(i + 1)
                del chosen[w]

    step(0)
    return out


def global_sections(F: PosetPresheaf, limit: int = DEFAULT_MAX_SEARCH) -> list:
    """Compatible choices of one element per node, exhaustively."""
    return _sections_over(F, list(F.base.elements), limit)


def local_sections(F: PosetPresheaf, stage, limit: int = DEFAULT_MAX_SEARCH) -> list:
    """Compatible choices over the downset of ``stage``."""
    _require(F.base, stage)
    return _sections_over(F, F.base.sort(F.base.down(stage)), limit)
