"""JSON documents for lattices, functionals, posets, topologies, presheaves and algebra sheaves.

A document is ``{"kind": ..., "version": "1", "payload": {...}}``; a bare
payload is accepted when the kind is known from context. Emitted documents
parse back to equal values.
"""

from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any

from .errors import HistoposError, ParseError, SchemaError
from .gaussian import Gaussian
from .histories import DecoherenceFunctional
from .order import BooleanSubalgebra, FinitePoset, OrthoLattice, build_ortholattice, build_poset, builtin_lattice
from .qauset import AlgebraSheaf, Element, IncidenceAlgebra, antichain, boolean_cube, chain, diagonal_subalgebra
from .sheaves import Germ, TopPresheaf
from .sieves import PosetPresheaf, Sieve
from .vietoris import FiniteTopology, generate_topology

VERSION = "1"
KINDS = ("lattice", "functional", "poset", "causet", "topology", "presheaf", "algebra-sheaf")
_BUILTIN = re.compile(r"^(boolean|mo|chain|antichain|cube):(\d+)$")


# -- generic ---------------------------------------------------------------------------------


def jsonable(x: Any):
    """Convert library values to plain JSON data with deterministic ordering."""
    if isinstance(x, Gaussian):
        return x.to_json()
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, Germ):
        return {"point": jsonable(x.point), "value": jsonable(x.value)}
    if isinstance(x, Sieve):
        return _sorted_list(x.members)
    if isinstance(x, BooleanSubalgebra):
        return x.name
    if isinstance(x, Element):
        return element_json(x)
    if isinstance(x, dict):
        return {str(jsonable(k)) if not isinstance(k, str) else k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (set, frozenset)):
        return _sorted_list(x)
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    return repr(x)


def _sorted_list(items):
    out = [jsonable(v) for v in items]
    return sorted(out, key=lambda v: json.dumps(v, sort_keys=True))


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def wrap(kind: str, payload: dict) -> dict:
    return {"kind": kind, "version": VERSION, "payload": payload}


def unwrap(doc, expected: str | None = None):
    """Return ``(kind, payload)``; bare payloads take the expected kind."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object")
    if "kind" in doc and "payload" in doc:
        kind = doc["kind"]
        if kind not in KINDS:
            raise SchemaError(f"unknown document kind {kind!r}", witness=kind)
        if str(doc.get("version", VERSION)) != VERSION:
            raise SchemaError(f"unsupported version {doc.get('version')!r}", witness=doc.get("version"))
        if expected and not _compatible(kind, expected):
            raise SchemaError(f"expected a {expected} document, got {kind}", witness=kind)
        return kind, doc["payload"]
    return (expected or _guess(doc)), doc


def _compatible(kind, expected):
    return kind == expected or {kind, expected} <= {"poset", "causet"}


def _guess(payload: dict) -> str:
    if "pairs" in payload:
        return "functional"
    if "algebras" in payload:
        return "algebra-sheaf"
    if "carrier" in payload:
        return "presheaf"
    if "ortho" in payload:
        return "lattice"
    if "points" in payload:
        return "topology"
    if "elements" in payload:
        return "poset"
    raise SchemaError("cannot tell the document kind; add a \"kind\" field")


def load(source: str):
    """Read a document from a path, or resolve a built-in name such as ``mo:2``."""
    m = _BUILTIN.match(source)
    if m and not Path(source).exists():
        kind, n = m.group(1), int(m.group(2))
        return {"kind": "lattice" if kind in ("boolean", "mo") else "poset", "version": VERSION, "payload": {"builtin": source}}
    try:
        text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {source}: {exc.strerror}", witness=source) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}", witness=source) from None


def _need(payload, key, kind):
    if not isinstance(payload, dict) or key not in payload:
        raise SchemaError(f"{kind} document needs a {key!r} field", witness=key)
    return payload[key]


def _label(x):
    if isinstance(x, (str, int)) and not isinstance(x, bool):
        return x
    raise SchemaError(f"labels must be strings or integers, got {x!r}", witness=jsonable(x))


def _label_list(xs, what):
    if not isinstance(xs, list):
        raise SchemaError(f"{what} must be a list", witness=what)
    return [_label(x) for x in xs]


def _mapping(m, what):
    """Element map given as an object or as a list of [from, to] pairs."""
    if isinstance(m, dict):
        return {k: _label(v) for k, v in m.items()}
    if isinstance(m, list) and all(isinstance(p, list) and len(p) == 2 for p in m):
        return {_label(a): _label(b) for a, b in m}
    raise SchemaError(f"{what} must be an object or a list of [from, to] pairs", witness=what)


def _mapping_json(m: dict):
    if all(isinstance(k, str) for k in m):
        return dict(m)
    return [[k, v] for k, v in m.items()]


# -- lattices and posets ----------------------------------------------------------------------


def parse_lattice(doc) -> OrthoLattice:
    _, p = unwrap(doc, "lattice")
    if isinstance(p, str):
        p = {"builtin": p}
    if "builtin" in p:
        try:
            return builtin_lattice(p["builtin"])
        except ValueError as exc:
            raise SchemaError(str(exc), witness=p["builtin"]) from None
    elements = _label_list(_need(p, "elements", "lattice"), "elements")
    covers = [tuple(_label_list(c, "cover")) for c in _need(p, "covers", "lattice")]
    for c in covers:
        if len(c) != 2:
            raise SchemaError("each cover is a pair [lower, upper]", witness=list(c))
    ortho = _mapping(_need(p, "ortho", "lattice"), "ortho")
    poset = build_poset(elements, covers)
    meet = _table_doc(p.get("meet"))
    join = _table_doc(p.get("join"))
    return build_ortholattice(poset, ortho, meet=meet, join=join)


def _table_doc(t):
    if t is None:
        return "derive"
    if not isinstance(t, list):
        raise SchemaError("meet/join tables are lists of [x, y, value]")
    out = {}
    for row in t:
        if not isinstance(row, list) or len(row) != 3:
            raise SchemaError("meet/join tables are lists of [x, y, value]", witness=row)
        out[_label(row[0]), _label(row[1])] = _label(row[2])
    return out


def lattice_document(L: OrthoLattice) -> dict:
    return wrap(
        "lattice",
        {
            "elements": list(L.elements),
            "covers": [list(c) for c in L.poset.covers],
            "ortho": _mapping_json({x: L.ortho[x] for x in L.elements}),
        },
    )


def parse_poset(doc) -> FinitePoset:
    _, p = unwrap(doc, "poset")
    if isinstance(p, str):
        p = {"builtin": p}
    if "builtin" in p:
        m = _BUILTIN.match(p["builtin"])
        if not m or m.group(1) not in ("chain", "antichain", "cube"):
            raise SchemaError(f"unknown poset generator {p['builtin']!r}", witness=p["builtin"])
        n = int(m.group(2))
        return {"chain": chain, "antichain": antichain, "cube": boolean_cube}[m.group(1)](n)
    elements = _label_list(_need(p, "elements", "poset"), "elements")
    covers = []
    for c in p.get("covers", []):
        c = _label_list(c, "cover")
        if len(c) != 2:
            raise SchemaError("each cover is a pair [lower, upper]", witness=c)
        covers.append(tuple(c))
    return build_poset(elements, covers)


def poset_document(P: FinitePoset, kind: str = "poset") -> dict:
    return wrap(kind, {"elements": list(P.elements), "covers": [list(c) for c in P.covers]})


# -- functionals -------------------------------------------------------------------------------


def parse_functional(doc, lattice: OrthoLattice | None = None, tol=None) -> DecoherenceFunctional:
    from .histories import DEFAULT_TOL

    _, p = unwrap(doc, "functional")
    if "lattice" in p:
        lattice = parse_lattice(p["lattice"] if isinstance(p["lattice"], dict) else {"builtin": p["lattice"]})
    if lattice is None:
        raise SchemaError("functional needs a lattice: embed one or pass a lattice document")
    pairs = {}
    for row in _need(p, "pairs", "functional"):
        if not isinstance(row, list) or len(row) not in (3, 4):
            raise SchemaError("pairs are [a, b, re, im] rows", witness=row)
        a, b = _label(row[0]), _label(row[1])
        try:
            z = Gaussian.parse(row[2:] if len(row) == 4 else row[2])
        except (TypeError, ValueError, ZeroDivisionError):
            raise SchemaError("coefficient is not a rational number", witness=row) from None
        if (a, b) in pairs and pairs[a, b] != z:
            raise SchemaError(f"pair ({a}, {b}) given twice with different values", witness=[a, b])
        pairs[a, b] = z
    tol = tol if tol is not None else p.get("tol", DEFAULT_TOL)
    complete = [_label_list(c, "complete set") for c in p.get("complete_sets", [])]
    return DecoherenceFunctional(lattice, pairs, tol=tol, complete_sets=complete)


def functional_document(d: DecoherenceFunctional, embed_lattice: bool = True) -> dict:
    rows = []
    order = {x: i for i, x in enumerate(d.lattice.elements)}
    done = set()
    for (a, b) in sorted(d.values, key=lambda k: (order[k[0]], order[k[1]])):
        if (b, a) in done:
            continue
        done.add((a, b))
        z = d.values[a, b]
        rows.append([a, b] + z.to_json())
    payload = {"pairs": rows, "tol": jsonable(d.tol)}
    if d.complete_sets:
        payload["complete_sets"] = [d.lattice.poset.sort(c.members) for c in d.complete_sets]
    if embed_lattice:
        payload["lattice"] = lattice_document(d.lattice)
    return wrap("functional", payload)


# -- topologies --------------------------------------------------------------------------------


def parse_topology(doc) -> FiniteTopology:
    _, p = unwrap(doc, "topology")
    points = _label_list(_need(p, "points", "topology"), "points")
    if "opens" in p:
        return FiniteTopology(points, [_label_list(u, "open") for u in p["opens"]])
    if "subbasis" in p:
        return generate_topology(points, [_label_list(u, "sub-basis set") for u in p["subbasis"]])
    raise SchemaError("topology document needs \"opens\" or \"subbasis\"")


def topology_payload(T: FiniteTopology) -> dict:
    return {"points": list(T.points), "opens": [T.sort(u) for u in T.opens_sorted]}


def topology_document(T: FiniteTopology) -> dict:
    return wrap("topology", topology_payload(T))


def _open(T: FiniteTopology, u, what="open"):
    u = frozenset(_label_list(u, what))
    if u not in T.opens:
        from .errors import NotOpen

        raise NotOpen(f"{what} is not an open set", witness=T.sort(u, strict=False))
    return u


# -- presheaves --------------------------------------------------------------------------------


def parse_presheaf(doc, base=None):
    """Topological presheaf (``points``/``opens``) or poset presheaf (``poset``/``lattice``)."""
    _, p = unwrap(doc, "presheaf")
    if "points" in p:
        return _parse_top_presheaf(p)
    return _parse_poset_presheaf(p, base)


def _parse_top_presheaf(p) -> TopPresheaf:
    T = parse_topology({"points": p["points"], **({"opens": p["opens"]} if "opens" in p else {"subbasis": p.get("subbasis", [])})})
    carrier = {}
    for entry in _need(p, "carrier", "presheaf"):
        u = _open(T, _need(entry, "open", "carrier entry"))
        carrier[u] = _label_list(_need(entry, "elements", "carrier entry"), "elements")
    restrict = {}
    for entry in p.get("restrict", []):
        v = _open(T, _need(entry, "from", "restrict entry"))
        u = _open(T, _need(entry, "to", "restrict entry"))
        restrict[u, v] = _mapping(_need(entry, "map", "restrict entry"), "map")
    return TopPresheaf(T, carrier, restrict)


def top_presheaf_document(P: TopPresheaf) -> dict:
    T = P.base
    carrier = [{"open": T.sort(u), "elements": list(P.carrier[u])} for u in T.opens_sorted]
    restrict = []
    for v in T.opens_sorted:
        for u in T.opens_sorted:
            if (u, v) in P.restrict and u != v:
                restrict.append({"from": T.sort(v), "to": T.sort(u), "map": _mapping_json(P.restrict[u, v])})
    return wrap("presheaf", {**topology_payload(T), "carrier": carrier, "restrict": restrict})


def _parse_poset_presheaf(p, base=None) -> PosetPresheaf:
    if "poset" in p:
        base = parse_poset(p["poset"])
    if base is None:
        raise SchemaError("poset presheaf needs a \"poset\" field or a base from another document")
    carrier_doc = _need(p, "carrier", "presheaf")
    if not isinstance(carrier_doc, dict):
        raise SchemaError("poset presheaf carrier is an object node -> elements")
    carrier = {}
    for node, items in carrier_doc.items():
        if node not in base:
            from .errors import UnknownNode

            raise UnknownNode(f"carrier given for unknown node {node!r}", witness=node)
        carrier[node] = _label_list(items, "elements")
    restrict = {}
    for entry in p.get("restrict", []):
        hi, lo = _label(_need(entry, "from", "restrict entry")), _label(_need(entry, "to", "restrict entry"))
        restrict[lo, hi] = _mapping(_need(entry, "map", "restrict entry"), "map")
    return PosetPresheaf.from_covers(base, carrier, restrict)


def poset_presheaf_document(F: PosetPresheaf) -> dict:
    base = F.base
    restrict = [
        {"from": hi, "to": lo, "map": _mapping_json(F.restrict[lo, hi])}
        for hi in base.elements
        for lo in base.elements
        if (lo, hi) in base.covers
    ]
    return wrap(
        "presheaf",
        {
            "poset": poset_document(base)["payload"],
            "carrier": {w: list(F.carrier[w]) for w in base.elements},
            "restrict": restrict,
        },
    )


# -- algebra sheaves ---------------------------------------------------------------------------


def element_json(f: Element) -> list:
    return [[p, q] + v.to_json() for (p, q), v in sorted(f.coeffs.items(), key=lambda kv: repr(kv[0]))]


def parse_element(rows) -> Element:
    if not isinstance(rows, list):
        raise SchemaError("algebra elements are lists of [p, q, re, im]")
    terms = []
    for row in rows:
        if not isinstance(row, list) or len(row) not in (3, 4):
            raise SchemaError("algebra elements are lists of [p, q, re, im]", witness=row)
        try:
            z = Gaussian.parse(row[2:] if len(row) == 4 else row[2])
        except (TypeError, ValueError, ZeroDivisionError):
            raise SchemaError("coefficient is not a rational number", witness=row) from None
        terms.append(((_label(row[0]), _label(row[1])), z))
    return Element(terms)


def parse_algebra_sheaf(doc) -> AlgebraSheaf:
    _, p = unwrap(doc, "algebra-sheaf")
    T = parse_topology({"points": p["points"], "opens": _need(p, "opens", "algebra-sheaf")})
    default_causet = parse_poset(p["causet"]) if "causet" in p else None
    algebras = {}
    for entry in _need(p, "algebras", "algebra-sheaf"):
        u = _open(T, _need(entry, "open", "algebra entry"))
        causet = parse_poset(entry["causet"]) if "causet" in entry else default_causet
        if causet is None:
            raise SchemaError("algebra entry needs a causet", witness=T.sort(u))
        basis = entry.get("basis", "full")
        A = IncidenceAlgebra(causet)
        if basis == "diagonal":
            A = diagonal_subalgebra(A)
        elif basis != "full":
            A = IncidenceAlgebra(causet, [tuple(_label_list(iv, "interval")) for iv in basis])
        algebras[u] = A
    maps = {}
    for entry in p.get("restrict", []):
        v = _open(T, _need(entry, "from", "restrict entry"))
        u = _open(T, _need(entry, "to", "restrict entry"))
        m = {}
        for row in _need(entry, "map", "restrict entry"):
            iv = tuple(_label_list(_need(row, "interval", "map row"), "interval"))
            m[iv] = parse_element(_need(row, "image", "map row"))
        maps[u, v] = m
    return AlgebraSheaf(T, algebras, maps)


def algebra_sheaf_document(S: AlgebraSheaf) -> dict:
    T = S.base
    algebras = []
    for u in T.opens_sorted:
        A = S.algebras[u]
        if not u and not A.basis:
            continue
        algebras.append(
            {"open": T.sort(u), "causet": poset_document(A.poset, "causet")["payload"], "basis": [list(iv) for iv in A.basis]}
        )
    restrict = []
    for v in T.opens_sorted:
        for u in T.opens_sorted:
            if (u, v) in S.maps:
                rows = [{"interval": list(iv), "image": element_json(img)} for iv, img in S.maps[u, v].items()]
                restrict.append({"from": T.sort(v), "to": T.sort(u), "map": rows})
    return wrap("algebra-sheaf", {**topology_payload(T), "algebras": algebras, "restrict": restrict})


def parse_any(doc, context: dict | None = None):
    """Parse by declared or guessed kind; ``context`` may supply a lattice or base poset."""
    context = context or {}
    kind, _ = unwrap(doc)
    if kind == "lattice":
        return parse_lattice(doc)
    if kind == "functional":
        return parse_functional(doc, context.get("lattice"), context.get("tol"))
    if kind in ("poset", "causet"):
        return parse_poset(doc)
    if kind == "topology":
        return parse_topology(doc)
    if kind == "presheaf":
        return parse_presheaf(doc, context.get("poset"))
    if kind == "algebra-sheaf":
        return parse_algebra_sheaf(doc)
    raise SchemaError(f"unknown kind {kind!r}")


def to_document(obj) -> dict:
    if isinstance(obj, OrthoLattice):
        return lattice_document(obj)
    if isinstance(obj, DecoherenceFunctional):
        return functional_document(obj)
    if isinstance(obj, FinitePoset):
        return poset_document(obj)
    if isinstance(obj, FiniteTopology):
        return topology_document(obj)
    if isinstance(obj, TopPresheaf):
        return top_presheaf_document(obj)
    if isinstance(obj, PosetPresheaf):
        return poset_presheaf_document(obj)
    if isinstance(obj, AlgebraSheaf):
        return algebra_sheaf_document(obj)
    raise TypeError(f"no document form for {type(obj).__name__}")


__all__ = [
    "HistoposError",
    "dumps",
    "jsonable",
    "load",
    "parse_any",
    "to_document",
    "unwrap",
    "wrap",
]
