"""Decoherence functionals, consistency, semantic values and trapped sets."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping

from .errors import NotACompleteSet, NotHermitian, NotNormalized, UndefinedPair, UnknownElement
from .gaussian import Gaussian, to_fraction
from .order import BooleanSubalgebra, CoarseGrainingPoset, OrthoLattice, enumerate_boolean_subalgebras

DEFAULT_TOL = Fraction(1, 10**9)


@dataclass(frozen=True)
class CompleteSet:
    """Pairwise disjoint propositions whose join is the top."""

    members: frozenset

    @classmethod
    def of(cls, lattice: OrthoLattice, members: Iterable) -> "CompleteSet":
        members = frozenset(members)
        for a in members:
            if a not in lattice.poset:
                raise UnknownElement(f"unknown proposition {a!r}", witness=a)
        for a, b in combinations(lattice.poset.sort(members), 2):
            if lattice.meet(a, b) != lattice.bottom or not lattice.orthogonal(a, b):
                raise NotACompleteSet(f"{a!r} and {b!r} are not disjoint", witness=[a, b])
        if lattice.join_all(members) != lattice.top:
            raise NotACompleteSet("members do not join to the top", witness=lattice.poset.sort(members))
        return cls(members)

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.members)


class DecoherenceFunctional:
    """Complex pairwise measure on the propositions of a lattice.

    Values are given extensionally; an entry for ``(a, b)`` also fixes
    ``(b, a)`` as its conjugate. Pairs never given stay undefined.
    """

    def __init__(
        self,
        lattice: OrthoLattice,
        pairs: Mapping,
        tol=DEFAULT_TOL,
        complete_sets: Iterable[Iterable] = (),
    ):
        self.lattice = lattice
        self.tol = to_fraction(tol)
        values = {}
        for (a, b), z in pairs.items():
            for x in (a, b):
                if x not in lattice.poset:
                    raise UnknownElement(f"functional mentions unknown proposition {x!r}", witness=x)
            z = Gaussian.parse(z)
            for key, val in (((a, b), z), ((b, a), z.conjugate())):
                if key in values and not (values[key] - val).is_zero(self.tol):
                    raise NotHermitian(f"d{key!r} is not the conjugate of d{key[::-1]!r}", witness=list(key))
                values.setdefault(key, val)
        for (a, b), z in values.items():
            if a == b and (not Gaussian(0, z.im).is_zero(self.tol) or not -self.tol <= z.re <= 1 + self.tol):
                raise NotHermitian(f"d({a!r},{a!r}) = {z!r} is not a real number in [0, 1]", witness=[a])
        self.values = values
        self.complete_sets = [CompleteSet.of(lattice, c) for c in complete_sets]
        for c in self.complete_sets:
            total = self.total_probability(c)
            if abs(total - 1) > self.tol:
                raise NotNormalized(f"diagonal values over {sorted(map(str, c))} sum to {total}", witness=sorted(map(str, c)))

    def __call__(self, a, b) -> Gaussian:
        try:
            return self.values[a, b]
        except KeyError:
            raise UndefinedPair(f"d({a!r}, {b!r}) is not defined", witness=[a, b]) from None

    def probability(self, a) -> Fraction:
        return self(a, a).re

    def total_probability(self, members: Iterable) -> Fraction:
        return sum((self.probability(a) for a in members), Fraction(0))

    def is_zero(self, z) -> bool:
        return Gaussian.parse(z).is_zero(self.tol)

    @cached_property
    def coarse_graining(self) -> CoarseGrainingPoset:
        return enumerate_boolean_subalgebras(self.lattice)

    @cached_property
    def consistent(self) -> CoarseGrainingPoset:
        return restrict_to_consistent(self.coarse_graining, self)


def is_d_consistent(members: Iterable, d: DecoherenceFunctional) -> bool:
    """Medium decoherence: every off-diagonal value vanishes within tolerance."""
    items = d.lattice.poset.sort(set(members))
    return all(d.is_zero(d(a, b)) for a in items for b in items if a != b)


def restrict_to_consistent(B: CoarseGrainingPoset, d: DecoherenceFunctional) -> CoarseGrainingPoset:
    """Non-trivial subalgebras whose atoms form a d-consistent set."""
    keep = [w for w in B if not w.is_trivial and is_d_consistent(w.atoms, d)]
    return CoarseGrainingPoset(keep, consistent_only=True)


@dataclass(frozen=True)
class TrappedSetFamily:
    stage: BooleanSubalgebra
    traps: frozenset
    generated_by: tuple

    @property
    def names(self) -> list:
        return sorted((w.name for w in self.traps), key=lambda n: _order_key(self.traps, n))

    def __iter__(self):
        return iter(self.traps)

    def __len__(self):
        return len(self.traps)


def _order_key(traps, name):
    w = next(t for t in traps if t.name == name)
    return w.sort_key()


def _below(stage: BooleanSubalgebra, d: DecoherenceFunctional, Bd=None):
    Bd = d.consistent if Bd is None else Bd
    return [w for w in Bd if w.carrier <= stage.carrier]


def semantic_value(a, p, stage: BooleanSubalgebra, d: DecoherenceFunctional, Bd=None) -> frozenset:
    """Consistent coarse-grainings of ``stage`` containing ``a`` if d(a,a) = p, else empty."""
    if a not in d.lattice.poset:
        raise UnknownElement(f"unknown proposition {a!r}", witness=a)
    if not d.is_zero(d(a, a) - Gaussian.parse(p)):
        return frozenset()
    return frozenset(w for w in _below(stage, d, Bd) if a in w.carrier)


def trapped(F: Iterable, stage: BooleanSubalgebra, d: DecoherenceFunctional, Bd=None) -> TrappedSetFamily:
    """Consistent coarse-grainings of ``stage`` whose carrier meets ``F``."""
    F = frozenset(F)
    traps = frozenset(w for w in _below(stage, d, Bd) if F & w.carrier)
    return TrappedSetFamily(stage, traps, (F,))


def trapped_family(family: Iterable[Iterable], stage: BooleanSubalgebra, d: DecoherenceFunctional, Bd=None) -> TrappedSetFamily:
    """Consistent coarse-grainings of ``stage`` meeting every set in ``family``."""
    family = tuple(frozenset(F) for F in family)
    traps = frozenset(w for w in _below(stage, d, Bd) if all(F & w.carrier for F in family))
    return TrappedSetFamily(stage, traps, family)


def all_trapped_sets(stage: BooleanSubalgebra, d: DecoherenceFunctional, Bd=None) -> set:
    """Every distinct trapped set at ``stage`` as F ranges over subsets of the lattice.

    A trapped set for F is the union of those for the singletons of F, so
    the distinct values are the union closure of singleton traps plus the
    empty set.
    """
    singles = {trapped({x}, stage, d, Bd).traps for x in d.lattice.elements}
    out = {frozenset()}
    for s in singles:
        out |= {t | s for t in out}
    return out


def find_intersection_failure(stage: BooleanSubalgebra, d: DecoherenceFunctional, Bd=None):
    """Return ``(F, G, traps)`` with trapped(F) & trapped(G) not a trapped set, or None.

    Singletons suffice: an intersection for larger F, G is the union of the
    singleton intersections, and trapped sets are closed under union.
    """
    realised = all_trapped_sets(stage, d, Bd)
    singles = {x: trapped({x}, stage, d, Bd).traps for x in d.lattice.elements}
    for x in d.lattice.elements:
        for y in d.lattice.elements:
            inter = singles[x] & singles[y]
            if inter not in realised:
                return frozenset({x}), frozenset({y}), inter
    return None
