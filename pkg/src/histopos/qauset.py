"""Incidence algebras of finite causal sets, their grading and a discrete differential.

Elements are sparse maps from intervals (p, q), p <= q, to Gaussian
rationals. The product is convolution: e_(p,q) * e_(r,s) = [q == r] e_(p,s).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import combinations, product
from typing import Hashable, Iterable, Mapping, Sequence

from .checks import PASS, Check, fail
from .errors import NotGraded, NotHomomorphism, PresheafInvalid, SchemaError, UnknownPoint
from .gaussian import ONE, ZERO, Gaussian
from .order import FinitePoset, build_poset
from .vietoris import FiniteTopology


# -- causets -----------------------------------------------------------------------------


def chain(n: int, prefix: str = "x") -> FinitePoset:
    names = [f"{prefix}{i}" for i in range(n)]
    return build_poset(names, zip(names, names[1:]))


def antichain(n: int, prefix: str = "x") -> FinitePoset:
    return build_poset([f"{prefix}{i}" for i in range(n)], [])


def boolean_cube(n: int) -> FinitePoset:
    """Subsets of {0..n-1} ordered by inclusion, named by their bit strings."""
    def name(m):
        return format(m, f"0{n}b") if n else "e"

    masks = sorted(range(1 << n), key=lambda m: (bin(m).count("1"), m))
    leq = [(name(a), name(b)) for a in masks for b in masks if a & b == a]
    return FinitePoset([name(m) for m in masks], leq)


# -- elements ----------------------------------------------------------------------------


class Element:
    """Sparse linear combination of basis keys with Gaussian coefficients.

    Keys are intervals (p, q). Zero coefficients are dropped, so equality is
    structural.
    """

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Mapping | Iterable = ()):
        items = coeffs.items() if isinstance(coeffs, Mapping) else coeffs
        out = {}
        for k, v in items:
            out[k] = out.get(k, ZERO) + Gaussian.parse(v)
        self.coeffs = {k: v for k, v in out.items() if v}
        self._hash = None

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def __bool__(self):
        return bool(self.coeffs)

    def __add__(self, other):
        return Element(list(self.coeffs.items()) + list(other.coeffs.items()))

    def __neg__(self):
        return Element({k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c) -> "Element":
        c = Gaussian.parse(c)
        return Element({k: c * v for k, v in self.coeffs.items()})

    def __mul__(self, other):
        """Convolution."""
        by_start = {}
        for (r, s), v in other.coeffs.items():
            by_start.setdefault(r, []).append((s, v))
        terms = []
        for (p, q), u in self.coeffs.items():
            for s, v in by_start.get(q, ()):
                terms.append(((p, s), u * v))
        return Element(terms)

    def __getitem__(self, key) -> Gaussian:
        return self.coeffs.get(key, ZERO)

    def support(self):
        return set(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "0"
        return " + ".join(f"{v!r}*e{k}" for k, v in sorted(self.coeffs.items(), key=lambda kv: repr(kv[0])))


def basis_element(p, q) -> Element:
    return Element({(p, q): ONE})


# -- algebras ----------------------------------------------------------------------------


class IncidenceAlgebra:
    """Span of a product-closed set of intervals of a finite poset.

    With ``basis=None`` the full incidence algebra; otherwise a unital
    subalgebra spanned by the given intervals, which must contain every
    (p, p) and be closed under convolution.
    """

    def __init__(self, poset: FinitePoset, basis: Iterable | None = None):
        self.poset = poset
        idx = poset.index
        full = sorted(((p, q) for p, q in poset.leq), key=lambda iv: (idx(iv[0]), idx(iv[1])))
        if basis is None:
            chosen = full
        else:
            wanted = set(basis)
            for p, q in wanted:
                if (p, q) not in poset.leq:
                    raise SchemaError(f"({p!r}, {q!r}) is not an interval", witness=[p, q])
            chosen = [iv for iv in full if iv in wanted]
            for p in poset.elements:
                if (p, p) not in wanted:
                    raise SchemaError("subalgebra must contain every diagonal interval", witness=[p, p])
            for (p, q), (r, s) in product(chosen, repeat=2):
                if q == r and (p, s) not in wanted:
                    raise SchemaError("span is not closed under the product", witness=[[p, q], [r, s]])
        self.basis = tuple(chosen)
        self._basis_set = frozenset(chosen)

    def __len__(self):
        return len(self.basis)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def __eq__(self, other):
        if not isinstance(other, IncidenceAlgebra):
            return NotImplemented
        return self.poset == other.poset and self.basis == other.basis

    def __hash__(self):
        return hash((self.poset, self.basis))

    def __repr__(self):
        return f"IncidenceAlgebra(dim={self.dimension})"

    def e(self, p, q) -> Element:
        if (p, q) not in self._basis_set:
            raise SchemaError(f"({p!r}, {q!r}) is not a basis interval", witness=[p, q])
        return basis_element(p, q)

    def basis_elements(self) -> list:
        return [basis_element(p, q) for p, q in self.basis]

    def contains(self, f: Element) -> bool:
        return f.support() <= self._basis_set

    def element(self, coeffs: Mapping) -> Element:
        f = Element(coeffs)
        if not self.contains(f):
            bad = sorted(map(list, f.support() - self._basis_set))
            raise SchemaError("element has coefficients outside the basis", witness=bad)
        return f

    @cached_property
    def one(self) -> Element:
        return Element({(p, p): ONE for p in self.poset.elements})

    def delta(self) -> Element:
        return self.one

    def zero(self) -> Element:
        return Element()

    def product_table(self) -> dict:
        """(i, j) -> index of e_i * e_j, or None when the product vanishes."""
        pos = {iv: k for k, iv in enumerate(self.basis)}
        out = {}
        for i, (p, q) in enumerate(self.basis):
            for j, (r, s) in enumerate(self.basis):
                out[i, j] = pos[p, s] if q == r else None
        return out

    def verify(self) -> Check:
        """Associativity on basis triples, two-sided unit, closure."""
        els = self.basis_elements()
        one = self.one
        for x in els:
            if one * x != x or x * one != x:
                return fail([repr(x)], "delta is not a two-sided unit")
        for x, y in product(els, repeat=2):
            if not self.contains(x * y):
                return fail([repr(x), repr(y)], "product leaves the span")
        for x, y, z in product(els, repeat=3):
            if (x * y) * z != x * (y * z):
                return fail([repr(x), repr(y), repr(z)], "associativity fails")
        return PASS

    def is_commutative(self) -> bool:
        els = self.basis_elements()
        return all(x * y == y * x for x, y in combinations(els, 2))


def incidence_algebra(poset: FinitePoset) -> IncidenceAlgebra:
    A = IncidenceAlgebra(poset)
    check = A.verify()
    assert check, check.message
    return A


def diagonal_subalgebra(A: IncidenceAlgebra) -> IncidenceAlgebra:
    """Commutative span of the (p, p) intervals."""
    return IncidenceAlgebra(A.poset, [(p, p) for p in A.poset.elements])


def zero_algebra() -> IncidenceAlgebra:
    return IncidenceAlgebra(FinitePoset([], []))


# -- zeta and Moebius ----------------------------------------------------------------------


def zeta(A: IncidenceAlgebra) -> Element:
    return Element({iv: ONE for iv in A.basis})


def mobius(A: IncidenceAlgebra) -> Element:
    """mu(p,p) = 1 and mu(p,q) = -sum_{p <= r < q} mu(p,r)."""
    poset = A.poset
    mu = {}
    for p in poset.elements:
        for q in poset.linear_extension:
            if not poset.le(p, q):
                continue
            if p == q:
                mu[p, q] = ONE
            else:
                total = ZERO
                for r in poset.up(p) & poset.down(q):
                    if r != q:
                        total = total + mu[p, r]
                mu[p, q] = -total
    return Element(mu)


def zeta_mobius(A: IncidenceAlgebra):
    if A.dimension != len(A.poset.leq):
        raise SchemaError("zeta and Moebius need the full incidence algebra")
    z, m = zeta(A), mobius(A)
    if z * m != A.one or m * z != A.one:
        raise ArithmeticError("Moebius function is not the inverse of zeta")
    return z, m


# -- grading -------------------------------------------------------------------------------


def maximal_chain_lengths(poset: FinitePoset, p, q) -> set:
    """Lengths of saturated chains p = x0 < x1 < ... < xk = q."""
    if not poset.le(p, q):
        return set()
    succ = {}
    for a, b in poset.covers:
        succ.setdefault(a, []).append(b)
    memo = {}

    def lengths(x):
        if x == q:
            return {0}
        if x not in memo:
            memo[x] = {n + 1 for y in succ.get(x, ()) if poset.le(y, q) for n in lengths(y)}
        return memo[x]

    return lengths(p)


@dataclass
class GradedDecomposition:
    algebra: IncidenceAlgebra
    degree: dict
    components: dict = field(default_factory=dict)

    def degree_of(self, f: Element):
        """Common degree of a homogeneous element, or None."""
        degs = {self.degree[k] for k in f.support()}
        return degs.pop() if len(degs) == 1 else None

    def verify(self) -> Check:
        A = self.algebra
        for p in A.poset.elements:
            if self.degree.get((p, p)) != 0:
                return fail([p, p], "diagonal interval must have degree 0")
        zero_part = [basis_element(*iv) for iv in self.components.get(0, ())]
        for x, y in combinations(zero_part, 2):
            if x * y != y * x:
                return fail([repr(x), repr(y)], "degree-0 part is not commutative")
        for a, b in product(A.basis, repeat=2):
            xy = basis_element(*a) * basis_element(*b)
            if xy and self.degree_of(xy) != self.degree[a] + self.degree[b]:
                return fail([list(a), list(b)], "product does not add degrees")
        return PASS


def grade(A: IncidenceAlgebra) -> GradedDecomposition:
    """Degree of (p, q) = the common length of all maximal chains from p to q."""
    degree = {}
    for p, q in A.basis:
        lengths = maximal_chain_lengths(A.poset, p, q)
        if len(lengths) != 1:
            raise NotGraded(
                f"maximal chains from {p!r} to {q!r} have lengths {sorted(lengths)}",
                witness={"interval": [p, q], "lengths": sorted(lengths)},
            )
        degree[p, q] = lengths.pop()
    components = {}
    for iv in A.basis:
        components.setdefault(degree[iv], []).append(iv)
    G = GradedDecomposition(A, degree, {k: tuple(v) for k, v in sorted(components.items())})
    check = G.verify()
    assert check, check.message
    return G


# -- discrete differential calculus ----------------------------------------------------------


def _rref(rows: list, order: dict):
    """Row-reduce sparse rows (dict key -> Fraction); pivot on the earliest key."""
    pivots = {}
    for row in rows:
        row = _reduce(dict(row), pivots, order)
        if not row:
            continue
        lead = min(row, key=order.__getitem__)
        inv = 1 / row[lead]
        row = {k: v * inv for k, v in row.items()}
        for key, other in pivots.items():
            c = other.get(lead)
            if c:
                for k, v in row.items():
                    nv = other.get(k, 0) - c * v
                    if nv:
                        other[k] = nv
                    else:
                        other.pop(k, None)
        pivots[lead] = row
    return pivots


def _reduce(vec: dict, pivots: dict, order: dict) -> dict:
    vec = {k: v for k, v in vec.items() if v}
    for lead in sorted((k for k in vec if k in pivots), key=order.__getitem__):
        c = vec.get(lead)
        if not c:
            continue
        for k, v in pivots[lead].items():
            nv = vec.get(k, 0) - c * v
            if nv:
                vec[k] = nv
            else:
                vec.pop(k, None)
    return vec


class DiscreteCalculus:
    """Differential graded algebra of paths in the Hasse digraph.

    Degree-n elements are combinations of paths x0 -> ... -> xn along covers,
    modulo the two-sided ideal generated by sum_z e(x,z,y) for every pair
    x < y that is not a cover. This is the universal first-order calculus
    on the vertex algebra quotiented by the differential ideal of non-edges.
    Paths are tuples of points; a degree-0 path (x,) is the idempotent e_x.
    """

    def __init__(self, poset: FinitePoset):
        self.poset = poset
        succ = {x: [] for x in poset.elements}
        for a, b in poset.covers:
            succ[a].append(b)
        self._succ = succ
        self._edges = frozenset(poset.covers)
        paths = {0: [(x,) for x in poset.elements]}
        n = 0
        while paths[n]:
            paths[n + 1] = [p + (y,) for p in paths[n] for y in succ[p[-1]]]
            n += 1
        del paths[n]
        self.paths = paths
        self.top_degree = n - 1
        self._order = {p: i for k in paths for i, p in enumerate(paths[k])}
        twos = {}
        for x, z, y in paths.get(2, ()):
            twos.setdefault((x, y), {})[(x, z, y)] = Fraction(1)
        self.relations = list(twos.values())
        self._pivots = {}
        for k in paths:
            rows = []
            if k >= 2:
                for rel in self.relations:
                    (x, _, y) = next(iter(rel))
                    for i in range(k - 1):
                        for left in (p for p in paths[i] if p[-1] == x):
                            for right in (q for q in paths[k - 2 - i] if q[0] == y):
                                rows.append({left + mid[1:2] + right: c for mid, c in rel.items()})
            self._pivots[k] = _rref(rows, self._order)
        self.basis = {k: [p for p in paths[k] if p not in self._pivots[k]] for k in paths}

    def dimension(self, k: int) -> int:
        return len(self.basis.get(k, ()))

    def normal(self, vec: Mapping) -> dict:
        """Reduce a combination of paths of one degree to its normal form."""
        if not vec:
            return {}
        k = len(next(iter(vec))) - 1
        return _reduce(dict(vec), self._pivots.get(k, {}), self._order)

    def _is_path(self, p) -> bool:
        return all((a, b) in self._edges for a, b in zip(p, p[1:]))

    def d_path(self, p: tuple) -> dict:
        """d e(x0..xn) = sum_y sum_i (-1)^i e(x0..x_{i-1}, y, x_i..xn), kept on paths."""
        out = {}
        n = len(p) - 1
        for y in self.poset.elements:
            for i in range(n + 2):
                q = p[:i] + (y,) + p[i:]
                if self._is_path(q):
                    out[q] = out.get(q, 0) + (-1) ** i
        return self.normal(out)

    def d(self, vec: Mapping) -> dict:
        out = {}
        for p, c in vec.items():
            for q, v in self.d_path(p).items():
                out[q] = out.get(q, 0) + c * v
        return self.normal(out)

    def mul(self, u: Mapping, v: Mapping) -> dict:
        """Concatenation product of homogeneous elements."""
        out = {}
        for p, a in u.items():
            for q, b in v.items():
                if p[-1] == q[0]:
                    r = p + q[1:]
                    out[r] = out.get(r, 0) + a * b
        return self.normal(out)

    @property
    def one(self) -> dict:
        return {(x,): Fraction(1) for x in self.poset.elements}

    def verify(self) -> Check:
        """d^2 = 0 on every basis path and graded Leibniz on every pair."""
        for k, ps in self.basis.items():
            for p in ps:
                if self.d(self.d({p: 1})):
                    return fail(list(p), "d(d(e)) != 0")
        if self.d(self.one):
            return fail(None, "d(1) != 0")
        for (k, ps), (l, qs) in product(self.basis.items(), repeat=2):
            for p, q in product(ps, qs):
                u, v = {p: 1}, {q: 1}
                lhs = self.d(self.mul(u, v))
                rhs = _add(self.mul(self.d(u), v), _scale((-1) ** k, self.mul(u, self.d(v))))
                if self.normal(_add(lhs, _scale(-1, rhs))):
                    return fail([list(p), list(q)], "graded Leibniz rule fails")
        return PASS


def _add(u: Mapping, v: Mapping) -> dict:
    out = dict(u)
    for k, c in v.items():
        out[k] = out.get(k, 0) + c
    return {k: c for k, c in out.items() if c}


def _scale(c, u: Mapping) -> dict:
    return {k: c * v for k, v in u.items() if c * v}


def differential(A: IncidenceAlgebra) -> DiscreteCalculus:
    """Graded check, then the quotient calculus over the Hasse digraph, verified."""
    grade(A)
    calc = DiscreteCalculus(A.poset)
    check = calc.verify()
    assert check, check.message
    return calc


# -- algebra-valued presheaves ---------------------------------------------------------------


class AlgebraSheaf:
    """Incidence (sub)algebras over the opens of a finite space.

    ``maps[(U, V)]`` sends each basis interval of the algebra over V to an
    element of the algebra over U and is extended linearly.
    """

    def __init__(self, base: FiniteTopology, algebras: Mapping, maps: Mapping):
        self.base = base
        self.algebras = {frozenset(u): a for u, a in algebras.items()}
        for u in base.opens:
            self.algebras.setdefault(u, zero_algebra())
        self.maps = {}
        for (u, v), m in maps.items():
            self.maps[frozenset(u), frozenset(v)] = {tuple(k): x for k, x in m.items()}

    def restrict(self, u, v, f: Element) -> Element:
        if u == v and (u, v) not in self.maps:
            return f
        if not self.algebras[u].basis:
            return Element()
        m = self.maps.get((u, v))
        if m is None:
            raise PresheafInvalid("missing restriction", witness=[self.base.sort(v), self.base.sort(u)])
        out = Element()
        for k, c in f.coeffs.items():
            if k not in m:
                raise PresheafInvalid(f"restriction undefined on e{k!r}", witness=[self.base.sort(v), self.base.sort(u), list(k)])
            out = out + m[k].scale(c)
        return out


def validate_algebra_sheaf(S: AlgebraSheaf) -> AlgebraSheaf:
    T = S.base
    opens = T.opens_sorted
    for u in opens:
        for v in opens:
            if not u <= v:
                continue
            A, B = S.algebras[u], S.algebras[v]
            for f in B.basis_elements():
                image = S.restrict(u, v, f)
                if not A.contains(image):
                    raise PresheafInvalid("restriction leaves the target algebra", witness=[T.sort(v), T.sort(u), repr(f)])
                if u == v and image != f:
                    raise PresheafInvalid("restriction to the same open is not the identity", witness=[T.sort(u), repr(f)])
            if S.restrict(u, v, B.one) != A.one:
                raise NotHomomorphism("restriction does not preserve the unit", witness=[T.sort(v), T.sort(u), "1"])
            for f, g in product(B.basis_elements(), repeat=2):
                if S.restrict(u, v, f * g) != S.restrict(u, v, f) * S.restrict(u, v, g):
                    raise NotHomomorphism(
                        "restriction is not multiplicative",
                        witness={"from": T.sort(v), "to": T.sort(u), "pair": [repr(f), repr(g)]},
                    )
                if S.restrict(u, v, f + g) != S.restrict(u, v, f) + S.restrict(u, v, g):
                    raise NotHomomorphism(
                        "restriction is not additive",
                        witness={"from": T.sort(v), "to": T.sort(u), "pair": [repr(f), repr(g)]},
                    )
    for u in opens:
        for v in opens:
            for w in opens:
                if u < v < w:
                    for f in S.algebras[w].basis_elements():
                        if S.restrict(u, v, S.restrict(v, w, f)) != S.restrict(u, w, f):
                            raise PresheafInvalid(
                                "restrictions do not compose",
                                witness=[T.sort(u), T.sort(v), T.sort(w), repr(f)],
                            )
    return S


def algebra_sheaf(T: FiniteTopology, algebras: Mapping, maps: Mapping) -> AlgebraSheaf:
    return validate_algebra_sheaf(AlgebraSheaf(T, algebras, maps))


def constant_algebra_sheaf(T: FiniteTopology, A: IncidenceAlgebra) -> AlgebraSheaf:
    algebras = {u: A for u in T.opens if u}
    ident = {iv: basis_element(*iv) for iv in A.basis}
    maps = {(u, v): ident for u in T.opens for v in T.opens if u and u < v}
    return algebra_sheaf(T, algebras, maps)


@dataclass
class StalkAlgebra:
    """Germs at a point with operations taken on representatives."""

    point: Hashable
    algebra: IncidenceAlgebra
    sheaf: AlgebraSheaf = field(repr=False)

    def germ(self, u, f: Element) -> Element:
        """Class of f over u, represented on the minimal open."""
        ux = self.sheaf.base.minimal_open(self.point)
        return self.sheaf.restrict(ux, frozenset(u), f)

    def add(self, a: Element, b: Element) -> Element:
        return a + b

    def mul(self, a: Element, b: Element) -> Element:
        return a * b

    def is_commutative(self) -> bool:
        return self.algebra.is_commutative()


def stalk_algebra(S: AlgebraSheaf, x) -> StalkAlgebra:
    """Stalk at x, checking that germ operations do not depend on representatives.

    For every pair of neighbourhoods U, V of x and basis elements f over U,
    g over V: whenever some W inside U & V identifies them, they define the
    same germ; and germ(f*f') = germ(f)*germ(f'), germ(f+f') likewise.
    """
    T = S.base
    if x not in T.points:
        raise UnknownPoint(f"unknown point {x!r}", witness=x)
    ux = T.minimal_open(x)
    stalk = StalkAlgebra(x, S.algebras[ux], S)
    nbhds = [u for u in T.opens_sorted if x in u]
    for u in nbhds:
        els = S.algebras[u].basis_elements()
        for f, g in product(els, repeat=2):
            if stalk.germ(u, f * g) != stalk.germ(u, f) * stalk.germ(u, g):
                raise NotHomomorphism("germ product depends on representatives", witness=[T.sort(u), repr(f), repr(g)])
            if stalk.germ(u, f + g) != stalk.germ(u, f) + stalk.germ(u, g):
                raise NotHomomorphism("germ sum depends on representatives", witness=[T.sort(u), repr(f), repr(g)])
    for u, v in product(nbhds, repeat=2):
        for f in S.algebras[u].basis_elements():
            for g in S.algebras[v].basis_elements():
                same = any(
                    w <= u & v and S.restrict(w, u, f) == S.restrict(w, v, g) for w in nbhds
                )
                if same != (stalk.germ(u, f) == stalk.germ(v, g)):
                    raise PresheafInvalid("germ identification disagrees with the minimal open", witness=x)
    return stalk
