"""Finite topologies, Vietoris-type generators, frames and their automorphisms."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations, permutations
from typing import Hashable, Iterable, Sequence

from .checks import PASS, Check, fail
from .errors import NotATopology, NotAutomorphism, NotClosed, OutOfRange, SizeGuard, UnknownPoint
from .heyting import HeytingAlgebra


class FiniteTopology:
    """A finite set of points with its collection of open subsets."""

    def __init__(self, points: Sequence[Hashable], opens: Iterable[Iterable]):
        self.points = tuple(points)
        self._index = {p: i for i, p in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise NotATopology("duplicate points")
        opens = frozenset(frozenset(u) for u in opens)
        full = frozenset(self.points)
        for u in opens:
            if not u <= full:
                raise OutOfRange("open set contains a non-point", witness=self.sort(u - full, strict=False))
        if frozenset() not in opens or full not in opens:
            raise NotATopology("topology must contain the empty set and the whole space")
        for u in opens:
            for v in opens:
                if u & v not in opens or u | v not in opens:
                    raise NotATopology(
                        "opens are not closed under pairwise union and intersection",
                        witness=[self.sort(u), self.sort(v)],
                    )
        self.opens = opens

    @classmethod
    def _closed_by_construction(cls, points, opens) -> "FiniteTopology":
        self = cls.__new__(cls)
        self.points = tuple(points)
        self._index = {p: i for i, p in enumerate(self.points)}
        self.opens = frozenset(opens)
        return self

    def __eq__(self, other):
        if not isinstance(other, FiniteTopology):
            return NotImplemented
        return self.points == other.points and self.opens == other.opens

    def __hash__(self):
        return hash((self.points, self.opens))

    def __repr__(self):
        return f"FiniteTopology({len(self.points)} points, {len(self.opens)} opens)"

    @property
    def full(self) -> frozenset:
        return frozenset(self.points)

    def sort(self, subset, strict=True) -> list:
        if strict:
            return sorted(subset, key=self._index.__getitem__)
        return sorted(subset, key=lambda p: self._index.get(p, len(self._index)))

    def key(self, subset):
        """Canonical sort key: size, then point positions."""
        return (len(subset), sorted(self._index[p] for p in subset))

    @cached_property
    def opens_sorted(self) -> tuple:
        return tuple(sorted(self.opens, key=self.key))

    def is_open(self, subset) -> bool:
        return frozenset(subset) in self.opens

    def minimal_open(self, x) -> frozenset:
        if x not in self._index:
            raise UnknownPoint(f"unknown point {x!r}", witness=x)
        out = self.full
        for u in self.opens:
            if x in u:
                out &= u
        return out

    def opens_within(self, u) -> list:
        return [v for v in self.opens_sorted if v <= u]

    def is_t0(self) -> bool:
        return len({self.minimal_open(x) for x in self.points}) == len(self.points)

    @cached_property
    def closed_sets(self) -> tuple:
        return tuple(sorted((self.full - u for u in self.opens), key=self.key))


def generate_topology(points: Sequence[Hashable], subbasis: Iterable[Iterable]) -> FiniteTopology:
    """Smallest topology containing ``subbasis``.

    Sub-basis sets are closed under finite intersections (the empty
    intersection being the whole space) to form a basis, whose unions are
    the opens.
    """
    points = tuple(points)
    full = frozenset(points)
    subbasis = [frozenset(s) for s in subbasis]
    for s in subbasis:
        if not s <= full:
            raise OutOfRange("sub-basis set contains a non-point", witness=sorted(map(str, s - full)))
    basis = {full}
    for s in subbasis:
        basis |= {b & s for b in basis}
    opens = {frozenset()}
    for b in basis:
        opens |= {o | b for o in opens}
    if len(set(points)) != len(points):
        raise NotATopology("duplicate points")
    return FiniteTopology._closed_by_construction(points, opens)


@dataclass(frozen=True)
class VietorisGenerator:
    kind: str  # "nerve" or "member"
    open: frozenset
    sets: frozenset


def vietoris_generators(X: FiniteTopology, closed_sets: Iterable[Iterable] | None = None) -> list:
    """Nerve {C : C meets U} and member {C : C inside U} for every open U."""
    if closed_sets is None:
        closed = list(X.closed_sets)
    else:
        complements = set(X.closed_sets)
        closed = []
        for c in closed_sets:
            c = frozenset(c)
            if c not in complements:
                raise NotClosed("not the complement of an open set", witness=X.sort(c, strict=False))
            closed.append(c)
    out = []
    for u in X.opens_sorted:
        out.append(VietorisGenerator("nerve", u, frozenset(c for c in closed if c & u)))
        out.append(VietorisGenerator("member", u, frozenset(c for c in closed if c <= u)))
    return out


def ch_vietoris_subbasis(Bd, d) -> list:
    """Distinct trapped sets over every consistent stage and every F.

    Returned as sets of node names of the consistent coarse-graining poset,
    sorted by size then node order.
    """
    from .histories import all_trapped_sets

    order = {w.name: i for i, w in enumerate(Bd.nodes)}
    found = set()
    for w in Bd.nodes:
        for traps in all_trapped_sets(w, d, Bd):
            found.add(frozenset(t.name for t in traps))
    return sorted(found, key=lambda s: (len(s), sorted(order[n] for n in s)))


def ch_locale(d, Bd=None) -> FiniteTopology:
    """Vietoris-type topology on the consistent coarse-graining poset."""
    Bd = d.consistent if Bd is None else Bd
    return generate_topology([w.name for w in Bd.nodes], ch_vietoris_subbasis(Bd, d))


class Frame(HeytingAlgebra):
    """Opens of a finite topology as a complete Heyting algebra."""

    def __init__(self, topology: FiniteTopology):
        self.topology = topology
        opens = topology.opens_sorted
        super().__init__(
            opens,
            leq=lambda a, b: a <= b,
            meet=lambda a, b: a & b,
            join=lambda a, b: a | b,
            implies=self._largest_open_inside,
            bottom=frozenset(),
            top=topology.full,
        )

    def _largest_open_inside(self, u, v):
        """Largest open W with W & U contained in V."""
        best = frozenset()
        for w in self.topology.opens:
            if w & u <= v:
                best |= w
        return best

    def big_join(self, family: Iterable[frozenset]) -> frozenset:
        out = frozenset()
        for u in family:
            out |= u
        return out

    def verify_frame(self, max_families: int = 1 << 16) -> Check:
        """Heyting laws plus U & (join of V_i) == join of (U & V_i).

        Every subfamily of opens is tried when there are at most
        ``max_families`` of them; otherwise binary distributivity (already
        part of the Heyting check) covers finite joins by induction.
        """
        check = self.verify()
        if not check:
            return check
        opens = self.elements
        if 2 ** len(opens) > max_families:
            return PASS
        for r in range(len(opens) + 1):
            for fam in combinations(opens, r):
                j = self.big_join(fam)
                for u in opens:
                    if u & j != self.big_join(u & v for v in fam):
                        return fail([u, list(fam)], "infinite distributivity fails")
        return PASS


def frame_ops(T: FiniteTopology) -> Frame:
    frame = Frame(T)
    check = frame.verify_frame()
    if not check:
        raise NotATopology(check.message, witness=check.witness)
    return frame


Automorphism = dict


def frame_automorphisms(T: FiniteTopology, limit: int = 10**6) -> list:
    """Inclusion-order automorphisms of the lattice of opens.

    Backtracking over opens sorted by size; candidates must match the
    number of opens below and above and preserve order both ways with
    everything assigned so far.
    """
    opens = list(T.opens_sorted)
    below = {u: sum(1 for v in opens if v <= u) for u in opens}
    above = {u: sum(1 for v in opens if u <= v) for u in opens}
    out, image, used = [], {}, set()
    steps = [0]

    def step(i):
        if i == len(opens):
            out.append(dict(image))
            return
        u = opens[i]
        for v in opens:
            if v in used or below[v] != below[u] or above[v] != above[u]:
                continue
            steps[0] += 1
            if steps[0] > limit:
                raise SizeGuard(f"automorphism search exceeded {limit} steps", witness=limit)
            if all((w <= u) == (image[w] <= v) and (u <= w) == (v <= image[w]) for w in image):
                image[u] = v
                used.add(v)
                step(i + 1)
                del image[u]
                used.discard(v)

    step(0)
    identity = [f for f in out if all(f[u] == u for u in opens)]
    rest = sorted((f for f in out if f not in identity), key=lambda f: [T.key(f[u]) for u in opens])
    return identity + rest


def is_frame_automorphism(T: FiniteTopology, f) -> Check:
    if set(f) != set(T.opens) or set(f.values()) != set(T.opens):
        return fail(None, "not a bijection on the opens")
    for u in T.opens:
        for v in T.opens:
            if f[u | v] != f[u] | f[v] or f[u & v] != f[u] & f[v]:
                return fail([T.sort(u), T.sort(v)], "union or intersection not preserved")
    return PASS


def compose(f, g):
    """(f o g)(U) = f(g(U))."""
    return {u: f[g[u]] for u in g}


def inverse(f):
    return {v: u for u, v in f.items()}


def group_closure_check(T: FiniteTopology, autos: list) -> Check:
    def key(f):
        return frozenset(f.items())

    pool = {key(f) for f in autos}

    for f in autos:
        if key(inverse(f)) not in pool:
            return fail(None, "not closed under inverses")
        for g in autos:
            if key(compose(f, g)) not in pool:
                return fail(None, "not closed under composition")
    return PASS


def point_bijection(T: FiniteTopology, f):
    """A permutation of points inducing ``f``, or None."""
    for perm in permutations(T.points):
        phi = dict(zip(T.points, perm))
        if all(frozenset(phi[p] for p in u) == f[u] for u in T.opens):
            return phi
    return None


def require_automorphism(T: FiniteTopology, f):
    check = is_frame_automorphism(T, f)
    if not check:
        raise NotAutomorphism(check.message, witness=check.witness)
