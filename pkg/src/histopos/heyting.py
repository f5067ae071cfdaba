"""Finite Heyting algebras given by explicit operation tables."""

from __future__ import annotations

from typing import Callable, Hashable, Sequence

from .checks import PASS, Check, fail


class HeytingAlgebra:
    """Bounded lattice with relative pseudo-complement, as full tables.

    ``leq`` is a predicate; ``meet``, ``join`` and ``implies`` are computed
    once for every pair of elements.
    """

    def __init__(
        self,
        elements: Sequence[Hashable],
        leq: Callable,
        meet: Callable,
        join: Callable,
        implies: Callable,
        bottom,
        top,
    ):
        self.elements = tuple(elements)
        self._leq = leq
        self.bottom = bottom
        self.top = top
        self.meet_table = {(x, y): meet(x, y) for x in self.elements for y in self.elements}
        self.join_table = {(x, y): join(x, y) for x in self.elements for y in self.elements}
        self.implies_table = {(x, y): implies(x, y) for x in self.elements for y in self.elements}

    def __len__(self):
        return len(self.elements)

    def leq(self, x, y) -> bool:
        return self._leq(x, y)

    def meet(self, x, y):
        return self.meet_table[x, y]

    def join(self, x, y):
        return self.join_table[x, y]

    def implies(self, x, y):
        return self.implies_table[x, y]

    def neg(self, x):
        return self.implies_table[x, self.bottom]

    def verify(self) -> Check:
        """Exhaustively check lattice, distributive and residuation laws."""
        els, leq = self.elements, self._leq
        members = set(els)
        for x in (self.bottom, self.top):
            if x not in members:
                return fail([x], "bound is not an element")
        for x in els:
            if not (leq(self.bottom, x) and leq(x, self.top)):
                return fail([x], "element outside the bounds")
        for x in els:
            for y in els:
                m, j, i = self.meet_table[x, y], self.join_table[x, y], self.implies_table[x, y]
                if m not in members or j not in members or i not in members:
                    return fail([x, y], "operation leaves the carrier")
                if not (leq(m, x) and leq(m, y)) or not all(leq(z, m) for z in els if leq(z, x) and leq(z, y)):
                    return fail([x, y], "meet is not the greatest lower bound")
                if not (leq(x, j) and leq(y, j)) or not all(leq(j, z) for z in els if leq(x, z) and leq(y, z)):
                    return fail([x, y], "join is not the least upper bound")
        for x in els:
            for y in els:
                for z in els:
                    lhs = self.meet_table[x, self.join_table[y, z]]
                    rhs = self.join_table[self.meet_table[x, y], self.meet_table[x, z]]
                    if lhs != rhs:
                        return fail([x, y, z], "distributivity fails")
                    if leq(self.meet_table[x, y], z) != leq(x, self.implies_table[y, z]):
                        return fail([x, y, z], "residuation fails")
        return PASS

    def double_negation_witness(self):
        """Some element with not-not-x != x, or None if the algebra is Boolean."""
        for x in self.elements:
            if self.neg(self.neg(x)) != x:
                return x
        return None
