"""Exhaustive and random generators of small posets, topologies and presheaves."""

from __future__ import annotations

import random
from itertools import combinations, permutations, product
from typing import Iterator

from .order import FinitePoset
from .sieves import PosetPresheaf, downsets
from .sheaves import TopPresheaf
from .vietoris import FiniteTopology


# -- posets ------------------------------------------------------------------------------


def _natural_posets(n: int) -> Iterator[frozenset]:
    """Order relations on range(n) with i <= j implying i <= j as integers.

    Each poset on n points extends one on n - 1 points by a new element
    whose strict downset is any downset of the smaller poset.
    """
    if n == 0:
        yield frozenset()
        return
    for rel in _natural_posets(n - 1):
        small = FinitePoset(range(n - 1), rel | {(i, i) for i in range(n - 1)})
        for ideal in downsets(small):
            yield rel | {(i, i) for i in range(n - 1)} | {(n - 1, n - 1)} | {(i, n - 1) for i in ideal}


def _canonical(n: int, rel: frozenset) -> tuple:
    """Lexicographically least relation matrix over permutations preserving a degree invariant."""
    down = [sum(1 for a in range(n) if (a, b) in rel) for b in range(n)]
    up = [sum(1 for b in range(n) if (a, b) in rel) for a in range(n)]
    sig = [(down[i], -up[i]) for i in range(n)]
    classes = {}
    for i in sorted(range(n), key=lambda i: sig[i]):
        classes.setdefault(sig[i], []).append(i)
    groups = [classes[k] for k in sorted(classes)]
    best = None
    for perms in product(*(permutations(g) for g in groups)):
        order = [i for p in perms for i in p]
        code = tuple((a, b) in rel for a in order for b in order)
        if best is None or code < best:
            best = code
    return best


def posets_up_to_iso(n: int) -> list:
    """One representative per isomorphism class of posets on n points named 0..n-1."""
    seen = {}
    for rel in _natural_posets(n):
        key = _canonical(n, rel)
        if key not in seen:
            seen[key] = FinitePoset(range(n), rel | {(i, i) for i in range(n)})
    return list(seen.values())


def labeled_posets(n: int) -> list:
    """Every partial order on 0..n-1 (exponential; intended for n <= 4)."""
    out = set()
    for rel in _natural_posets(n):
        for perm in permutations(range(n)):
            out.add(frozenset((perm[a], perm[b]) for a, b in rel))
    return [FinitePoset(range(n), rel) for rel in sorted(out, key=sorted)]


def is_ranked(poset: FinitePoset) -> bool:
    """Every interval has maximal chains of a single length."""
    from .qauset import maximal_chain_lengths

    return all(len(maximal_chain_lengths(poset, p, q)) == 1 for p, q in poset.leq)


def random_causet(n: int, p: float, rng: random.Random) -> FinitePoset:
    """Transitive closure of a random DAG on 0..n-1 with edge probability p."""
    edges = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p}
    rel = {(i, i) for i in range(n)}
    for j in range(n):
        for i in range(j):
            if (i, j) in edges:
                rel |= {(k, j) for k, m in list(rel) if m == i}
    return FinitePoset(range(n), rel)


# -- topologies --------------------------------------------------------------------------


def topologies(points) -> list:
    """Every topology on ``points`` (brute force over families; <= 4 points)."""
    points = tuple(points)
    full = frozenset(points)
    middle = [frozenset(c) for r in range(1, len(points)) for c in combinations(points, r)]
    out = []
    for mask in range(1 << len(middle)):
        opens = {frozenset(), full} | {middle[i] for i in range(len(middle)) if mask >> i & 1}
        if all(u & v in opens and u | v in opens for u in opens for v in opens):
            out.append(FiniteTopology(points, opens))
    return out


def topologies_up_to_homeo(points) -> list:
    points = tuple(points)
    seen, out = set(), []
    for T in topologies(points):
        key = min(
            tuple(sorted(tuple(sorted(perm[points.index(p)] for p in u)) for u in T.opens))
            for perm in permutations(range(len(points)))
        )
        if key not in seen:
            seen.add(key)
            out.append(T)
    return out


# -- presheaves --------------------------------------------------------------------------


def _maps(src: tuple, dst: tuple):
    for image in product(dst, repeat=len(src)):
        yield dict(zip(src, image))


def homeomorphisms(T: FiniteTopology) -> list:
    """Point permutations mapping opens to opens, as dicts."""
    out = []
    for perm in permutations(T.points):
        phi = dict(zip(T.points, perm))
        if all(frozenset(phi[p] for p in u) in T.opens for u in T.opens):
            out.append(phi)
    return out


def top_presheaves(T: FiniteTopology, max_carrier: int, canonical: bool = True) -> Iterator[TopPresheaf]:
    """Presheaves on T with carriers {0, ..., k-1}, k <= max_carrier, on every open.

    Restrictions are chosen along covering pairs of opens, from the top
    down, with composites checked for path independence. With
    ``canonical`` at least one presheaf per isomorphism class is produced
    and most duplicates are skipped: carriers are taken up to relabelling,
    and carrier sizes up to homeomorphisms of T.
    """
    opens = sorted(T.opens, key=lambda u: (-len(u), T.key(u)))
    upper = {u: [v for v in opens if u < v and not any(u < w < v for w in opens)] for u in opens}
    position = {u: i for i, u in enumerate(opens)}
    moves = [[position[frozenset(phi[p] for p in u)] for u in opens] for phi in homeomorphisms(T)]
    for ks in product(range(max_carrier + 1), repeat=len(opens)):
        if canonical and any(_moved(ks, m) < ks for m in moves):
            continue
        carrier = {u: tuple(range(k)) for u, k in zip(opens, ks)}
        yield from _fill(T, opens, upper, carrier, canonical)


def _moved(ks, move):
    out = [0] * len(ks)
    for i, j in enumerate(move):
        out[j] = ks[i]
    return tuple(out)


def _fill(T, opens, upper, carrier, canonical):
    comp = {}

    def composite_ok(u):
        for v in opens:
            if u < v:
                vals = set()
                for w in upper[u]:
                    if w == v:
                        vals.add(tuple(comp[u, w][x] for x in carrier[v]))
                    elif w < v:
                        vals.add(tuple(comp[u, w][comp[w, v][x]] for x in carrier[v]))
                if len(vals) != 1:
                    return False
                (img,) = vals
                comp[u, v] = dict(zip(carrier[v], img))
        return True

    def step(i):
        if i == len(opens):
            yield TopPresheaf(T, carrier, dict(comp))
            return
        u = opens[i]
        ups = upper[u]
        for choice in product(*(list(_maps(carrier[v], carrier[u])) for v in ups)):
            saved = dict(comp)
            for v, m in zip(ups, choice):
                comp[u, v] = m
            if composite_ok(u) and (not canonical or _minimal_prefix(carrier, comp, opens, upper, i + 1)):
                yield from step(i + 1)
            comp.clear()
            comp.update(saved)

    yield from step(0)


def _minimal_prefix(carrier, comp, opens, upper, depth) -> bool:
    """No relabelling of the first ``depth`` carriers lowers the cover code.

    The code lists, open by open from the top, the maps along covering
    pairs; composites are determined by these. A smaller prefix would make
    every completion non-minimal, so generation can prune here.
    """
    segments = [[tuple(comp[u, v][x] for x in carrier[v]) for v in upper[u]] for u in opens[:depth]]
    relabel = {}

    def search(i):
        if i == depth:
            return True
        u = opens[i]
        for perm in permutations(carrier[u]):
            seg = []
            for v in upper[u]:
                back = {y: x for x, y in relabel[v].items()}
                seg.append(tuple(perm[comp[u, v][back[y]]] for y in carrier[v]))
            if seg < segments[i]:
                return False
            if seg == segments[i]:
                relabel[u] = dict(zip(carrier[u], perm))
                if not search(i + 1):
                    return False
        relabel.pop(u, None)
        return True

    return search(0)


def poset_presheaves(poset: FinitePoset, max_carrier: int) -> Iterator[PosetPresheaf]:
    """Every presheaf on ``poset`` with carriers {0..k-1}, k <= max_carrier (labelled)."""
    nodes = list(reversed(poset.linear_extension))
    covers = set(poset.covers)
    upper = {w: [v for v in nodes if (w, v) in covers] for w in nodes}
    for ks in product(range(max_carrier + 1), repeat=len(nodes)):
        carrier = {w: tuple(range(k)) for w, k in zip(nodes, ks)}
        comp = {}

        def step(i):
            if i == len(nodes):
                yield PosetPresheaf(poset, carrier, dict(comp))
                return
            w = nodes[i]
            ups = upper[w]
            for choice in product(*(list(_maps(carrier[v], carrier[w])) for v in ups)):
                saved = dict(comp)
                for v, m in zip(ups, choice):
                    comp[w, v] = m
                ok = True
                for v in nodes:
                    if poset.lt(w, v) and ok:
                        vals = set()
                        for c in ups:
                            if c == v:
                                vals.add(tuple(comp[w, c][x] for x in carrier[v]))
                            elif poset.lt(c, v):
                                vals.add(tuple(comp[w, c][comp[c, v][x]] for x in carrier[v]))
                        if len(vals) != 1:
                            ok = False
                        else:
                            comp[w, v] = dict(zip(carrier[v], vals.pop()))
                if ok:
                    yield from step(i + 1)
                comp.clear()
                comp.update(saved)

        yield from step(0)
