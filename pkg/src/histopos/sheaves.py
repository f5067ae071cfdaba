"""Presheaves on finite spaces, germs, etale spaces and sheafification.

On a finite space every point x has a smallest open neighbourhood U_x, so
the stalk at x is the carrier over U_x. Stalks are computed both as an
explicit quotient of the neighbourhood system and through U_x; the two
must agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, permutations, product
from math import prod
from typing import Hashable, Iterable, Mapping, NamedTuple

from .checks import PASS, Check, fail
from .errors import NotOpen, PresheafInvalid, SchemaError, SizeGuard, UnknownPoint
from .vietoris import FiniteTopology, generate_topology, require_automorphism, inverse

DEFAULT_MAX_MAPS = 10**6
EMPTY = frozenset()


class TopPresheaf:
    """Set-valued presheaf on the opens of a finite topology.

    ``restrict[(U, V)]`` maps ``carrier[V]`` to ``carrier[U]`` for U inside
    V. Identities may be omitted. When the empty open has no carrier it
    gets the one-point set ``("*",)`` with constant restrictions.
    Nothing is validated here; see :func:`validate_presheaf`.
    """

    def __init__(self, base: FiniteTopology, carrier: Mapping, restrict: Mapping):
        self.base = base
        self.carrier = {}
        for u, items in carrier.items():
            u = frozenset(u)
            if u not in base.opens:
                raise SchemaError("carrier given for a set that is not open", witness=base.sort(u, strict=False))
            self.carrier[u] = tuple(items)
        self.restrict = {}
        for (u, v), m in restrict.items():
            u, v = frozenset(u), frozenset(v)
            if u not in base.opens or v not in base.opens or not u <= v:
                raise SchemaError(
                    "restriction must go from an open to an open inside it",
                    witness=[base.sort(v, strict=False), base.sort(u, strict=False)],
                )
            self.restrict[u, v] = dict(m)
        for u in base.opens:
            self.carrier.setdefault(u, ())
        if EMPTY not in carrier:
            self.carrier[EMPTY] = ("*",)
            for v in base.opens:
                if v:
                    self.restrict[EMPTY, v] = {f: "*" for f in self.carrier[v]}

    def __call__(self, u, v, f):
        """Restrict f in carrier[v] to the smaller open u."""
        key = (u, v)
        if key in self.restrict:
            return self.restrict[key][f]
        if u == v:
            return f
        raise PresheafInvalid("missing restriction", witness=[self.base.sort(v), self.base.sort(u)])

    def map(self, u, v) -> dict:
        """Restriction from v to u as a dict (identity when u == v)."""
        m = self.restrict.get((u, v))
        if m is not None:
            return m
        if u == v:
            return {f: f for f in self.carrier[u]}
        if not self.carrier[v]:
            return {}
        raise PresheafInvalid("missing restriction", witness=[self.base.sort(v), self.base.sort(u)])

    def __eq__(self, other):
        if not isinstance(other, TopPresheaf):
            return NotImplemented
        return self.base == other.base and self.carrier == other.carrier and self._maps() == other._maps()

    def _maps(self):
        return {k: m for k, m in self.restrict.items() if not (k[0] == k[1] and all(m[x] == x for x in m))}

    @property
    def opens(self):
        return self.base.opens_sorted


@dataclass
class PresheafReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok


def validate_presheaf(P: TopPresheaf) -> PresheafReport:
    """Check that restrictions exist, are maps, and satisfy identity and composition."""
    report = PresheafReport()
    T = P.base
    opens = P.opens
    for u in opens:
        m = P.restrict.get((u, u))
        if m is not None:
            for f in P.carrier[u]:
                if m.get(f) != f:
                    report.violations.append({"law": "identity", "witness": [T.sort(u), f, m.get(f)]})
                    break
    for u in opens:
        for v in opens:
            if u < v:
                m = P.restrict.get((u, v))
                for f in P.carrier[v]:
                    if m is None or f not in m or m[f] not in P.carrier[u]:
                        report.violations.append({"law": "map", "witness": [T.sort(v), T.sort(u), f]})
                        break
    if not report.ok:
        return report
    for u in opens:
        for v in opens:
            if not u < v:
                continue
            for w in opens:
                if not v < w:
                    continue
                for f in P.carrier[w]:
                    if P(u, v, P(v, w, f)) != P(u, w, f):
                        report.violations.append(
                            {"law": "composition", "witness": [T.sort(u), T.sort(v), T.sort(w), f]}
                        )
                        break
    return report


def _require_valid(P: TopPresheaf):
    report = validate_presheaf(P)
    if not report.ok:
        raise PresheafInvalid("presheaf violates the functor laws", witness=report.violations[0])


class Germ(NamedTuple):
    """Germ at ``point``, named by its representative over the minimal open."""

    point: Hashable
    value: Hashable


def stalk_by_colimit(P: TopPresheaf, x) -> list:
    """Equivalence classes of pairs (U, f), x in U, under agreement on a smaller neighbourhood.

    Returns the classes as frozensets of pairs, in order of first appearance.
    """
    T = P.base
    if x not in T.points:
        raise UnknownPoint(f"unknown point {x!r}", witness=x)
    nbhds = [u for u in P.opens if x in u]
    pairs = [(u, f) for u in nbhds for f in P.carrier[u]]
    parent = {p: p for p in pairs}

    def find(p):
        while parent[p] != p:
            parent[p] = parent[parent[p]]
            p = parent[p]
        return p

    for (u, f), (v, g) in combinations(pairs, 2):
        common = u & v
        for w in nbhds:
            if w <= common and P(w, u, f) == P(w, v, g):
                parent[find((u, f))] = find((v, g))
                break
    classes = {}
    for p in pairs:
        classes.setdefault(find(p), []).append(p)
    return [frozenset(c) for c in classes.values()]


def stalk_by_minimal_open(P: TopPresheaf, x) -> tuple:
    return P.carrier[P.base.minimal_open(x)]


def germ(P: TopPresheaf, x, u, f) -> Germ:
    ux = P.base.minimal_open(x)
    return Germ(x, P(ux, u, f))


def stalk_at(P: TopPresheaf, x) -> tuple:
    """Germs at x, computed as a quotient and cross-checked against U_x."""
    classes = stalk_by_colimit(P, x)
    ux = P.base.minimal_open(x)
    values = stalk_by_minimal_open(P, x)
    seen = {}
    for cls in classes:
        images = {P(ux, u, f) for u, f in cls}
        if len(images) != 1:
            raise PresheafInvalid("germ class meets the minimal open in several elements", witness=x)
        (v,) = images
        if v in seen:
            raise PresheafInvalid("two germ classes share a representative over the minimal open", witness=x)
        seen[v] = cls
    if set(seen) != set(values):
        raise PresheafInvalid("colimit stalk differs from the minimal-open stalk", witness=x)
    return tuple(Germ(x, v) for v in values)


@dataclass
class EtaleSheaf:
    base: FiniteTopology
    stalks: dict
    total: FiniteTopology
    projection: dict
    basis: dict = field(default_factory=dict)

    @property
    def germs(self):
        return self.total.points

    def stalk(self, x) -> tuple:
        if x not in self.stalks:
            raise UnknownPoint(f"unknown point {x!r}", witness=x)
        return self.stalks[x]


def check_local_homeomorphism(E: EtaleSheaf) -> Check:
    """pi continuous and open; injective with open image on every basis open."""
    T, S, pi = E.base, E.total, E.projection
    for o in T.opens:
        if frozenset(g for g in S.points if pi[g] in o) not in S.opens:
            return fail(T.sort(o), "projection is not continuous")
    for o in S.opens:
        if frozenset(pi[g] for g in o) not in T.opens:
            return fail(sorted(map(repr, o)), "projection is not open")
    for key, b in E.basis.items():
        image = [pi[g] for g in b]
        if len(set(image)) != len(image):
            return fail(repr(key), "projection is not injective on a basis open")
        if frozenset(image) not in T.opens:
            return fail(repr(key), "basis open does not project onto an open")
    return PASS


def etale_space(P: TopPresheaf) -> EtaleSheaf:
    _require_valid(P)
    T = P.base
    stalks = {x: stalk_at(P, x) for x in T.points}
    germs = [g for x in T.points for g in stalks[x]]
    basis = {}
    for u in P.opens:
        if not u:
            continue
        for f in P.carrier[u]:
            basis[u, f] = frozenset(germ(P, x, u, f) for x in u)
    total = generate_topology(germs, basis.values())
    E = EtaleSheaf(T, stalks, total, {g: g.point for g in germs}, basis)
    check = check_local_homeomorphism(E)
    if not check:
        raise PresheafInvalid(check.message, witness=check.witness)
    return E


def _require_open(T: FiniteTopology, u) -> frozenset:
    u = frozenset(u)
    if u not in T.opens:
        raise NotOpen("not an open set", witness=T.sort(u, strict=False))
    return u


def is_continuous_section(E: EtaleSheaf, u, s: Mapping) -> bool:
    """Preimage of every open of the total space is open in the base."""
    opens = E.base.opens
    return all(frozenset(x for x in u if s[x] in o) in opens for o in E.total.opens)


def sections(E: EtaleSheaf, u, limit: int = DEFAULT_MAX_MAPS) -> list:
    """Continuous sections over u as tuples of germs in point order."""
    u = _require_open(E.base, u)
    pts = E.base.sort(u)
    if prod(len(E.stalks[x]) for x in pts) > limit:
        raise SizeGuard(f"section search space exceeds {limit}", witness=limit)
    out = []
    for choice in product(*(E.stalks[x] for x in pts)):
        if is_continuous_section(E, u, dict(zip(pts, choice))):
            out.append(tuple(choice))
    return out


def restrict_section(E: EtaleSheaf, s: tuple, u) -> tuple:
    return tuple(g for g in s if E.projection[g] in u)


def gamma_presheaf(E: EtaleSheaf, limit: int = DEFAULT_MAX_MAPS) -> TopPresheaf:
    """Presheaf of continuous sections."""
    T = E.base
    carrier = {u: sections(E, u, limit) for u in T.opens_sorted}
    restrict = {}
    for u in T.opens:
        for v in T.opens:
            if u < v:
                restrict[u, v] = {s: restrict_section(E, s, u) for s in carrier[v]}
    return TopPresheaf(T, carrier, restrict)


def covers_of(T: FiniteTopology, u) -> list:
    """Families of opens strictly inside u whose union is u."""
    inner = [v for v in T.opens_sorted if v < u]
    out = []
    for r in range(len(inner) + 1):
        for fam in combinations(inner, r):
            if frozenset().union(*fam) == u:
                out.append(fam)
    return out


@dataclass
class CollationReport:
    ok: bool
    separation: object = None
    gluing: object = None

    def __bool__(self):
        return self.ok


def _compatible_families(P: TopPresheaf, fam):
    """Families (s_i in P(U_i)) agreeing on overlaps, generated memberwise.

    Each member's elements are indexed by their restrictions to the
    overlaps with earlier members, so only compatible prefixes are built.
    """
    n = len(fam)
    index = []
    for i in range(n):
        maps = [P.map(fam[i] & fam[j], fam[i]) for j in range(i)]
        table = {}
        for s in P.carrier[fam[i]]:
            table.setdefault(tuple(m[s] for m in maps), []).append(s)
        index.append(table)
    back = [[P.map(fam[i] & fam[j], fam[j]) for j in range(i)] for i in range(n)]
    chosen = []

    def step(i):
        if i == n:
            yield tuple(chosen)
            return
        key = tuple(back[i][j][chosen[j]] for j in range(i))
        for s in index[i].get(key, ()):
            chosen.append(s)
            yield from step(i + 1)
            chosen.pop()

    yield from step(0)


def check_collation(P: TopPresheaf) -> CollationReport:
    """Separation (a) and gluing (b) for every open and every open cover.

    Covers containing U itself are skipped: both conditions hold for them
    whenever restrictions compose.
    """
    _require_valid(P)
    T = P.base
    for u in P.opens:
        for fam in covers_of(T, u):
            maps = [P.map(v, u) for v in fam]
            signature = {}
            for s in P.carrier[u]:
                key = tuple(m[s] for m in maps)
                if key in signature:
                    return CollationReport(
                        False,
                        separation={"open": T.sort(u), "cover": [T.sort(v) for v in fam], "sections": [signature[key], s]},
                    )
                signature[key] = s
            for family in _compatible_families(P, fam):
                if family not in signature:
                    return CollationReport(
                        False,
                        gluing={"open": T.sort(u), "cover": [T.sort(v) for v in fam], "family": list(family)},
                    )
    return CollationReport(True)


def sheafify(P: TopPresheaf):
    """Etale space of P and the unit sigma_U(f) = (x -> [f]_x)."""
    E = etale_space(P)
    T = P.base
    sigma = {u: {f: tuple(germ(P, x, u, f) for x in T.sort(u)) for f in P.carrier[u]} for u in P.opens}
    return E, sigma


def sigma_bijective(P: TopPresheaf, E: EtaleSheaf, sigma: Mapping, limit: int = DEFAULT_MAX_MAPS) -> dict:
    """Per open: (injective, surjective onto the continuous sections)."""
    out = {}
    for u in P.opens:
        images = [sigma[u][f] for f in P.carrier[u]]
        secs = set(sections(E, u, limit))
        assert set(images) <= secs
        out[u] = (len(set(images)) == len(images), set(images) == secs)
    return out


def presheaf_morphisms(P: TopPresheaf, Q: TopPresheaf, limit: int = DEFAULT_MAX_MAPS) -> list:
    """Natural transformations P -> Q over the same base.

    Opens are filled from the largest down. Naturality along V above U
    forces phi_U on the image of each restriction; elements outside every
    image are free.
    """
    opens = sorted(P.opens, key=lambda u: -len(u))
    above = {u: [v for v in opens if u < v] for u in opens}
    pmaps = {(u, v): P.map(u, v) for u in opens for v in above[u]}
    qmaps = {(u, v): Q.map(u, v) for u in opens for v in above[u]}
    out, phi, steps = [], {}, [0]

    def step(i):
        steps[0] += 1
        if steps[0] > limit:
            raise SizeGuard(f"morphism search exceeded {limit} steps", witness=limit)
        if i == len(opens):
            out.append({u: dict(phi[u]) for u in P.opens})
            return
        u = opens[i]
        forced = {}
        for v in above[u]:
            pm, qm, pv = pmaps[u, v], qmaps[u, v], phi[v]
            for g, f in pm.items():
                y = qm[pv[g]]
                if forced.setdefault(f, y) != y:
                    return
        free = [f for f in P.carrier[u] if f not in forced]
        for choice in product(Q.carrier[u], repeat=len(free)):
            phi[u] = {**forced, **dict(zip(free, choice))}
            step(i + 1)
        phi.pop(u, None)

    step(0)
    return out


def etale_maps(E1: EtaleSheaf, E2: EtaleSheaf, limit: int = DEFAULT_MAX_MAPS) -> list:
    """Continuous maps of total spaces commuting with the projections.

    Continuity is tested on preimages of the basis opens of E2, which
    generate its topology; preimages commute with unions and intersections.
    """
    germs = list(E1.germs)
    options = [E2.stalks[E1.projection[g]] for g in germs]
    if prod(len(o) for o in options) > limit:
        raise SizeGuard(f"etale map search space exceeds {limit}", witness=limit)
    bit = {g: 1 << i for i, g in enumerate(germs)}
    opens1 = {sum(bit[g] for g in o) for o in E1.total.opens}
    generators = list(E2.basis.values()) if E2.basis else list(E2.total.opens)
    out = []
    for choice in product(*options):
        if all(sum(bit[g] for g, t in zip(germs, choice) if t in b) in opens1 for b in generators):
            out.append(dict(zip(germs, choice)))
    return out


@dataclass
class AdjunctionReport:
    etale_count: int
    presheaf_count: int
    correspondence: bool

    @property
    def ok(self) -> bool:
        return self.correspondence and self.etale_count == self.presheaf_count

    def __bool__(self):
        return self.ok


def adjunction_check(
    P: TopPresheaf, E: EtaleSheaf, limit: int = DEFAULT_MAX_MAPS, sheafified: EtaleSheaf | None = None, gamma: TopPresheaf | None = None
) -> AdjunctionReport:
    """Count maps sheafify(P) -> E and P -> Gamma(E); check the canonical bijection.

    ``sheafified`` and ``gamma`` may pass in already computed S(P) and Gamma(E).
    """
    if P.base != E.base:
        raise SchemaError("presheaf and etale space live over different bases")
    SP = sheafify(P)[0] if sheafified is None else sheafified
    left = etale_maps(SP, E, limit)
    right = presheaf_morphisms(P, gamma_presheaf(E, limit) if gamma is None else gamma, limit)
    T = P.base
    left_keys = {frozenset(h.items()) for h in left}
    induced = set()
    for phi in right:
        h = {}
        for g in SP.germs:
            ux = T.minimal_open(g.point)
            s = phi[ux][g.value]
            h[g] = next(t for t in s if E.projection[t] == g.point)
        induced.add(frozenset(h.items()))
    correspondence = len(induced) == len(right) and induced == left_keys
    return AdjunctionReport(len(left), len(right), correspondence)


def etale_isomorphic(E1: EtaleSheaf, E2: EtaleSheaf, limit: int = DEFAULT_MAX_MAPS) -> bool:
    """Search stalkwise bijections that are homeomorphisms of total spaces."""
    if E1.base != E2.base:
        return False
    pts = E1.base.points
    if any(len(E1.stalks[x]) != len(E2.stalks[x]) for x in pts):
        return False
    if len(E1.total.opens) != len(E2.total.opens):
        return False
    choices = [list(permutations(E2.stalks[x])) for x in pts]
    if prod(len(c) for c in choices) > limit:
        raise SizeGuard(f"isomorphism search space exceeds {limit}", witness=limit)
    for pick in product(*choices):
        h = {}
        for x, img in zip(pts, pick):
            h.update(zip(E1.stalks[x], img))
        if {frozenset(h[g] for g in o) for o in E1.total.opens} == E2.total.opens:
            return True
    return False


def pullback_along(f: Mapping, E: EtaleSheaf, limit: int = DEFAULT_MAX_MAPS) -> EtaleSheaf:
    """Sheaf U -> Gamma(f(U), E) for a frame automorphism f of the base."""
    T = E.base
    require_automorphism(T, f)
    carrier = {u: sections(E, f[u], limit) for u in T.opens_sorted}
    restrict = {}
    for u in T.opens:
        for v in T.opens:
            if u < v:
                restrict[u, v] = {s: restrict_section(E, s, f[u]) for s in carrier[v]}
    return sheafify(TopPresheaf(T, carrier, restrict))[0]


def pushforward_along(f: Mapping, E: EtaleSheaf, limit: int = DEFAULT_MAX_MAPS) -> EtaleSheaf:
    """For an automorphism the direct image is the pullback along the inverse."""
    require_automorphism(E.base, f)
    return pullback_along(inverse(f), E, limit)


def constant_presheaf(T: FiniteTopology, items: Iterable) -> TopPresheaf:
    """Same carrier on every non-empty open, identity restrictions."""
    items = tuple(items)
    carrier = {u: items for u in T.opens if u}
    restrict = {(u, v): {x: x for x in items} for u in T.opens for v in T.opens if u and u < v}
    return TopPresheaf(T, carrier, restrict)
