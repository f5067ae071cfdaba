"""Finite posets, orthomodular lattices and their Boolean subalgebras.

The coarse-graining poset of an orthomodular lattice is the set of all its
Boolean sub-ortholattices ordered by inclusion of carriers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Hashable, Iterable, Mapping, Sequence

from .checks import PASS, Check, fail
from .errors import (
    CycleDetected,
    DuplicateElement,
    MissingBound,
    NotAPartialOrder,
    NotInvolutive,
    NotOrthomodular,
    PartialOperation,
    SchemaError,
    UnknownElement,
)

Element = Hashable


class FinitePoset:
    """Immutable finite partial order.

    ``leq`` is the full relation as a frozenset of pairs ``(x, y)`` meaning
    x <= y. All three order axioms are checked at construction.
    """

    def __init__(self, elements: Sequence[Element], leq: Iterable[tuple]):
        elements = tuple(elements)
        index = {}
        for i, x in enumerate(elements):
            if x in index:
                raise DuplicateElement(f"duplicate element {x!r}", witness=x)
            index[x] = i
        leq = frozenset(leq)
        down = {x: set() for x in elements}
        up = {x: set() for x in elements}
        for a, b in leq:
            if a not in index or b not in index:
                raise UnknownElement(f"relation mentions unknown element in {(a, b)!r}", witness=[a, b])
            down[b].add(a)
            up[a].add(b)
        for x in elements:
            if x not in down[x]:
                raise NotAPartialOrder(f"not reflexive at {x!r}", witness=x)
        for a, b in leq:
            if a != b and a in down[b] and b in down[a]:
                raise NotAPartialOrder(f"antisymmetry fails for {a!r}, {b!r}", witness=[a, b])
            if not up[b] <= up[a]:
                c = next(iter(up[b] - up[a]))
                raise NotAPartialOrder(f"transitivity fails for {a!r} <= {b!r} <= {c!r}", witness=[a, b, c])
        self.elements = elements
        self.leq = leq
        self._index = index
        self._down = {x: frozenset(s) for x, s in down.items()}
        self._up = {x: frozenset(s) for x, s in up.items()}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, x):
        return x in self._index

    def __eq__(self, other):
        if not isinstance(other, FinitePoset):
            return NotImplemented
        return self.elements == other.elements and self.leq == other.leq

    def __hash__(self):
        return hash((self.elements, self.leq))

    def __repr__(self):
        return f"FinitePoset({len(self.elements)} elements, {len(self.covers)} covers)"

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise UnknownElement(f"unknown element {x!r}", witness=x) from None

    def le(self, a, b) -> bool:
        return (a, b) in self.leq

    def lt(self, a, b) -> bool:
        return a != b and (a, b) in self.leq

    def down(self, x) -> frozenset:
        """Principal downset of ``x`` (including x)."""
        try:
            return self._down[x]
        except KeyError:
            raise UnknownElement(f"unknown element {x!r}", witness=x) from None

    def up(self, x) -> frozenset:
        try:
            return self._up[x]
        except KeyError:
            raise UnknownElement(f"unknown element {x!r}", witness=x) from None

    @cached_property
    def covers(self) -> tuple:
        """Hasse diagram edges ``(x, y)`` with x < y and nothing in between."""
        out = []
        for x in self.elements:
            above = self._up[x] - {x}
            for y in self.elements:
                if y in above and self._down[y] & above == {y}:
                    out.append((x, y))
        return tuple(out)

    def sort(self, items: Iterable) -> list:
        """Order ``items`` as they appear in ``elements``."""
        return sorted(items, key=self.index)

    @cached_property
    def linear_extension(self) -> tuple:
        """Elements ordered so that x < y puts x first."""
        return tuple(sorted(self.elements, key=lambda x: (len(self._down[x]), self._index[x])))

    def minimal(self) -> list:
        return [x for x in self.elements if len(self._down[x]) == 1]

    def maximal(self) -> list:
        return [x for x in self.elements if len(self._up[x]) == 1]

    def bottom(self):
        """Least element, or None."""
        for x in self.elements:
            if len(self._up[x]) == len(self.elements):
                return x
        return None

    def top(self):
        for x in self.elements:
            if len(self._down[x]) == len(self.elements):
                return x
        return None

    def glb(self, a, b):
        """Greatest lower bound of a and b, or None when it does not exist."""
        lower = self._down[a] & self._down[b]
        for x in lower:
            if lower <= self._down[x]:
                return x
        return None

    def lub(self, a, b):
        upper = self._up[a] & self._up[b]
        for x in upper:
            if upper <= self._up[x]:
                return x
        return None

    def induced(self, subset: Iterable) -> "FinitePoset":
        keep = set(subset)
        elements = [x for x in self.elements if x in keep]
        return FinitePoset(elements, ((a, b) for a, b in self.leq if a in keep and b in keep))

    def is_downset(self, subset) -> bool:
        s = frozenset(subset)
        return all(self._down[x] <= s for x in s)


def build_poset(elements: Sequence[Element], covers: Iterable[tuple]) -> FinitePoset:
    """Poset whose order is the reflexive-transitive closure of ``covers``.

    >>> p = build_poset(["x", "y", "z"], [("x", "y"), ("y", "z")])
    >>> p.le("x", "z")
    True
    """
    elements = list(elements)
    seen = set()
    for x in elements:
        if x in seen:
            raise DuplicateElement(f"duplicate element {x!r}", witness=x)
        seen.add(x)
    succ = {x: [] for x in elements}
    for pair in covers:
        a, b = pair
        for v in (a, b):
            if v not in succ:
                raise UnknownElement(f"cover {pair!r} mentions unknown element {v!r}", witness=v)
        if a == b:
            raise CycleDetected(f"self-loop at {a!r}", witness=[a])
        succ[a].append(b)
    _raise_on_cycle(elements, succ)
    leq = set()
    for x in elements:
        stack, reach = [x], {x}
        while stack:
            for y in succ[stack.pop()]:
                if y not in reach:
                    reach.add(y)
                    stack.append(y)
        leq.update((x, y) for y in reach)
    return FinitePoset(elements, leq)


def _raise_on_cycle(elements, succ):
    colour = {x: 0 for x in elements}
    for root in elements:
        if colour[root]:
            continue
        path = [root]
        stack = [iter(succ[root])]
        colour[root] = 1
        while stack:
            nxt = next(stack[-1], None)
            if nxt is None:
                colour[path.pop()] = 2
                stack.pop()
                continue
            if colour[nxt] == 1:
                cycle = path[path.index(nxt):] + [nxt]
                raise CycleDetected(f"covers contain a directed cycle {cycle!r}", witness=cycle)
            if colour[nxt] == 0:
                colour[nxt] = 1
                path.append(nxt)
                stack.append(iter(succ[nxt]))


class OrthoLattice:
    """Finite orthomodular lattice; meets and joins may be partial.

    Build instances with :func:`build_ortholattice` or the generators
    :func:`boolean_lattice` and :func:`mo_lattice`.
    """

    def __init__(self, poset: FinitePoset, bottom, top, ortho: Mapping, meet: Mapping, join: Mapping):
        self.poset = poset
        self.bottom = bottom
        self.top = top
        self.ortho = dict(ortho)
        self._meet = dict(meet)
        self._join = dict(join)

    @property
    def elements(self):
        return self.poset.elements

    def __len__(self):
        return len(self.poset)

    def __eq__(self, other):
        if not isinstance(other, OrthoLattice):
            return NotImplemented
        return (
            self.poset == other.poset
            and self.ortho == other.ortho
            and self._meet == other._meet
            and self._join == other._join
        )

    def __hash__(self):
        return hash(self.poset)

    def __repr__(self):
        return f"OrthoLattice({len(self)} elements)"

    def le(self, a, b):
        return self.poset.le(a, b)

    def meet(self, a, b):
        try:
            return self._meet[a, b]
        except KeyError:
            raise PartialOperation(f"meet of {a!r} and {b!r} is undefined", witness=[a, b]) from None

    def join(self, a, b):
        try:
            return self._join[a, b]
        except KeyError:
            raise PartialOperation(f"join of {a!r} and {b!r} is undefined", witness=[a, b]) from None

    def has_meet(self, a, b):
        return (a, b) in self._meet

    def has_join(self, a, b):
        return (a, b) in self._join

    def join_all(self, items: Iterable):
        acc = self.bottom
        for x in items:
            acc = self.join(acc, x)
        return acc

    def orthogonal(self, a, b) -> bool:
        return self.le(a, self.ortho[b])

    @cached_property
    def is_total(self) -> bool:
        n = len(self)
        return len(self._meet) == n * n and len(self._join) == n * n

    def covers_document(self):
        return [list(c) for c in self.poset.covers]


def build_ortholattice(poset: FinitePoset, ortho: Mapping, meet="derive", join="derive") -> OrthoLattice:
    """Validate ``ortho`` on a bounded poset and assemble an :class:`OrthoLattice`.

    With ``"derive"`` the tables hold every existing glb/lub. An explicit table
    may only list entries that are genuine glbs/lubs; absent entries are
    treated as undefined.
    """
    bottom, top = poset.bottom(), poset.top()
    if bottom is None or top is None:
        raise MissingBound("poset has no " + ("least" if bottom is None else "greatest") + " element")
    for x in poset:
        if x not in ortho:
            raise NotInvolutive(f"orthocomplement undefined at {x!r}", witness=[x])
        if ortho[x] not in poset:
            raise NotInvolutive(f"orthocomplement of {x!r} is not an element", witness=[x, ortho[x]])
    for x in poset:
        if ortho[ortho[x]] != x:
            raise NotInvolutive(f"ortho(ortho({x!r})) != {x!r}", witness=[x, ortho[x]])
    for a, b in poset.leq:
        if not poset.le(ortho[b], ortho[a]):
            raise NotInvolutive(
                f"orthocomplement is not order-reversing: {a!r} <= {b!r} but not {ortho[b]!r} <= {ortho[a]!r}",
                witness=[a, b],
            )
    meet_t = _table(poset, meet, poset.glb, "meet")
    join_t = _table(poset, join, poset.lub, "join")
    lattice = OrthoLattice(poset, bottom, top, ortho, meet_t, join_t)
    for x in poset:
        if lattice.meet(x, ortho[x]) != bottom or lattice.join(x, ortho[x]) != top:
            raise NotInvolutive(f"{ortho[x]!r} is not a complement of {x!r}", witness=[x, ortho[x]])
    for x, y in poset.leq:
        m = lattice.meet(y, ortho[x])
        if lattice.join(x, m) != y:
            raise NotOrthomodular(
                f"orthomodular law fails: {x!r} <= {y!r} but {x!r} v ({y!r} ^ {ortho[x]!r}) != {y!r}",
                witness=[x, y, m],
            )
    return lattice


def _table(poset, given, derive, name):
    derived = {}
    for a in poset:
        for b in poset:
            v = derive(a, b)
            if v is not None:
                derived[a, b] = v
    if given == "derive" or given is None:
        return derived
    out = {}
    for (a, b), v in dict(given).items():
        if derived.get((a, b)) != v:
            raise SchemaError(f"{name} table entry ({a!r}, {b!r}) -> {v!r} is not the {name} in the order", witness=[a, b, v])
        out[a, b] = out[b, a] = v
    return out


def boolean_lattice(n: int) -> OrthoLattice:
    """Power set of n atoms named a, b, c, ...; bottom '0', top '1'."""
    if not 0 <= n <= 6:
        raise ValueError("boolean lattice generator supports 0 <= n <= 6")
    letters = "abcdef"[:n]
    full = (1 << n) - 1

    def name(mask):
        if mask == 0:
            return "0"
        if mask == full:
            return "1"
        return "".join(letters[i] for i in range(n) if mask >> i & 1)

    masks = sorted(range(1 << n), key=lambda m: (bin(m).count("1"), [i for i in range(n) if m >> i & 1]))
    if n == 0:
        masks = [0]
    elements = [name(m) for m in masks]
    leq = [(name(a), name(b)) for a in masks for b in masks if a & b == a]
    poset = FinitePoset(elements, leq)
    ortho = {name(m): name(full & ~m) for m in masks}
    return build_ortholattice(poset, ortho)


def mo_lattice(n: int) -> OrthoLattice:
    """Horizontal sum of n four-element Boolean blocks: 0, 1, a, a', b, b', ..."""
    if not 1 <= n <= 4:
        raise ValueError("MO generator supports 1 <= n <= 4")
    atoms = []
    for c in "abcd"[:n]:
        atoms += [c, c + "'"]
    elements = ["0"] + atoms + ["1"]
    leq = [(x, x) for x in elements] + [("0", x) for x in atoms + ["1"]] + [(x, "1") for x in atoms]
    ortho = {"0": "1", "1": "0"}
    for c in "abcd"[:n]:
        ortho[c], ortho[c + "'"] = c + "'", c
    return build_ortholattice(FinitePoset(elements, leq), ortho)


def builtin_lattice(name: str) -> OrthoLattice:
    """Resolve ``boolean:n`` / ``mo:n``."""
    kind, _, arg = name.partition(":")
    if kind == "boolean":
        return boolean_lattice(int(arg))
    if kind == "mo":
        return mo_lattice(int(arg))
    raise ValueError(f"unknown lattice generator {name!r}")


def is_distributive(lattice: OrthoLattice, carrier: Iterable | None = None) -> Check:
    """Exhaustive x ^ (y v z) == (x ^ y) v (x ^ z) over the carrier.

    Raises PartialOperation if a needed meet/join is missing.
    """
    items = lattice.poset.sort(carrier) if carrier is not None else list(lattice.elements)
    meet, join = lattice.meet, lattice.join
    for x in items:
        for y in items:
            xy = meet(x, y)
            for z in items:
                if meet(x, join(y, z)) != join(xy, meet(x, z)):
                    return fail([x, y, z], f"{x} ^ ({y} v {z}) != ({x} ^ {y}) v ({x} ^ {z})")
    return PASS


@dataclass(frozen=True)
class BooleanSubalgebra:
    carrier: frozenset
    atoms: tuple
    parent: OrthoLattice = field(compare=False, repr=False)

    @property
    def name(self) -> str:
        return "W(" + ",".join(map(str, self.atoms)) + ")"

    @property
    def elements(self) -> list:
        return self.parent.poset.sort(self.carrier)

    @property
    def is_trivial(self) -> bool:
        return len(self.carrier) <= 2

    def sort_key(self):
        return (len(self.carrier), sorted(map(str, self.carrier)))

    def __contains__(self, x):
        return x in self.carrier

    def __le__(self, other):
        return self.carrier <= other.carrier


class CoarseGrainingPoset:
    """Boolean subalgebras ordered by inclusion; nodes are keyed by name.

    ``consistent_only`` marks the restriction to d-consistent non-trivial
    subalgebras, which need not contain the trivial algebra.
    """

    def __init__(self, nodes: Sequence[BooleanSubalgebra], consistent_only: bool = False):
        self.nodes = tuple(sorted(nodes, key=BooleanSubalgebra.sort_key))
        self.consistent_only = consistent_only
        self.by_name = {w.name: w for w in self.nodes}
        names = [w.name for w in self.nodes]
        self.poset = FinitePoset(
            names, ((u.name, v.name) for u in self.nodes for v in self.nodes if u.carrier <= v.carrier)
        )
        if not consistent_only and self.nodes:
            if not self.nodes[0].is_trivial or self.poset.bottom() != self.nodes[0].name:
                raise SchemaError("coarse-graining poset lacks the trivial subalgebra as its minimum")

    def __len__(self):
        return len(self.nodes)

    def __iter__(self):
        return iter(self.nodes)

    def __getitem__(self, name) -> BooleanSubalgebra:
        return self.by_name[name]

    def node(self, ref) -> BooleanSubalgebra:
        """Look up by name, or by the carrier/atoms of a subalgebra."""
        from .errors import UnknownNode

        if isinstance(ref, BooleanSubalgebra):
            ref = ref.name
        try:
            return self.by_name[ref]
        except KeyError:
            raise UnknownNode(f"no subalgebra named {ref!r}", witness=ref) from None

    def below(self, stage: BooleanSubalgebra) -> list:
        return [w for w in self.nodes if w.carrier <= stage.carrier]

    @property
    def trivial(self):
        return self.nodes[0] if self.nodes and self.nodes[0].is_trivial else None


def _orthogonal_decompositions(lattice: OrthoLattice):
    """Sets of pairwise orthogonal non-zero elements whose join is the top."""
    nonzero = [x for x in lattice.elements if x != lattice.bottom]
    out = []

    def extend(start, chosen, acc):
        if acc == lattice.top:
            out.append(tuple(chosen))
            return
        for i in range(start, len(nonzero)):
            x = nonzero[i]
            if all(lattice.orthogonal(x, y) for y in chosen) and lattice.has_join(acc, x):
                chosen.append(x)
                extend(i + 1, chosen, lattice.join(acc, x))
                chosen.pop()

    if lattice.bottom == lattice.top:
        return [()]
    extend(0, [], lattice.bottom)
    return out


def _close_decomposition(args):
    lattice, atoms = args
    carrier = set()
    for r in range(len(atoms) + 1):
        for combo in combinations(atoms, r):
            try:
                carrier.add(lattice.join_all(combo))
            except PartialOperation:
                return None
    carrier = frozenset(carrier)
    return carrier if _is_boolean_subalgebra(lattice, carrier) else None


def _is_boolean_subalgebra(lattice: OrthoLattice, carrier: frozenset) -> bool:
    if lattice.bottom not in carrier or lattice.top not in carrier:
        return False
    for x in carrier:
        if lattice.ortho[x] not in carrier:
            return False
        for y in carrier:
            if not (lattice.has_meet(x, y) and lattice.has_join(x, y)):
                return False
            if lattice.meet(x, y) not in carrier or lattice.join(x, y) not in carrier:
                return False
    return bool(is_distributive(lattice, carrier))


def subalgebra_from_carrier(lattice: OrthoLattice, carrier: Iterable) -> BooleanSubalgebra:
    carrier = frozenset(carrier)
    if not _is_boolean_subalgebra(lattice, carrier):
        raise SchemaError("carrier is not a Boolean subalgebra", witness=lattice.poset.sort(carrier))
    nonzero = [x for x in carrier if x != lattice.bottom]
    atoms = [x for x in nonzero if not any(y != x and lattice.le(y, x) for y in nonzero)]
    return BooleanSubalgebra(carrier, tuple(lattice.poset.sort(atoms)), lattice)


def enumerate_boolean_subalgebras(lattice: OrthoLattice, jobs: int = 1) -> CoarseGrainingPoset:
    """All Boolean sub-ortholattices of ``lattice`` ordered by inclusion.

    Every finite Boolean subalgebra is generated by its atoms, which are
    pairwise orthogonal and join to the top; so candidates are the join
    closures of such decompositions, each then re-verified for closure and
    distributivity.
    """
    decompositions = _orthogonal_decompositions(lattice)
    tasks = [(lattice, d) for d in decompositions]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            carriers = list(pool.map(_close_decomposition, tasks, chunksize=16))
    else:
        carriers = [_close_decomposition(t) for t in tasks]
    unique = {c for c in carriers if c is not None}
    return CoarseGrainingPoset([subalgebra_from_carrier(lattice, c) for c in unique])
