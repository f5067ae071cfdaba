"""Command line interface: ``histopos <command> [subcommand] --in DOC ...``.

Reports go to standard output as canonical JSON (sorted keys). Exit
status is 0 on success, 1 on a domain error (a JSON error object is
printed) and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import documents as docs
from .demos import DEMOS
from .errors import HistoposError, SchemaError, UnknownElement, UnknownNode
from .gaussian import to_fraction
from .histories import all_trapped_sets, semantic_value, trapped_family
from .order import FinitePoset, OrthoLattice, enumerate_boolean_subalgebras, is_distributive
from .qauset import differential, grade, incidence_algebra, stalk_algebra, validate_algebra_sheaf, zeta_mobius
from .sheaves import (
    TopPresheaf,
    adjunction_check,
    check_collation,
    gamma_presheaf,
    sections,
    sheafify,
    sigma_bijective,
    stalk_at,
    stalk_by_colimit,
    validate_presheaf,
)
from .sieves import PosetPresheaf, global_sections, heyting_of_sieves, is_sieve, local_sections, omega_presheaf, sieves_at
from .vietoris import ch_locale, ch_vietoris_subbasis, frame_automorphisms, frame_ops


class Workspace:
    """Parsed input documents, indexed by kind."""

    def __init__(self, args):
        self.args = args
        self.tol = to_fraction(args.tol) if args.tol is not None else None
        self.limit = args.max_search
        self.jobs = args.jobs
        self.raw = {}
        for source in args.inputs or []:
            doc = docs.load(source)
            kind, _ = docs.unwrap(doc)
            self.raw.setdefault("poset" if kind == "causet" else kind, []).append(doc)
        self._cache = {}

    def _one(self, kind, required=True):
        found = self.raw.get(kind, [])
        if len(found) > 1:
            raise SchemaError(f"more than one {kind} document given", witness=kind)
        if not found:
            if required:
                raise SchemaError(f"this command needs a {kind} document (--in)", witness=kind)
            return None
        return found[0]

    def has(self, kind):
        return bool(self.raw.get(kind))

    def lattice(self, required=True) -> OrthoLattice | None:
        if "lattice" not in self._cache:
            doc = self._one("lattice", required=False)
            self._cache["lattice"] = docs.parse_lattice(doc) if doc is not None else None
        L = self._cache["lattice"]
        if L is None and required:
            d = self.functional(required=False)
            if d is not None:
                return d.lattice
            raise SchemaError("this command needs a lattice document (--in)", witness="lattice")
        return L

    def functional(self, required=True):
        if "functional" not in self._cache:
            doc = self._one("functional", required)
            self._cache["functional"] = (
                docs.parse_functional(doc, self.lattice(required=False), self.tol) if doc is not None else None
            )
        return self._cache["functional"]

    def coarse_graining(self):
        d = self.functional(required=False)
        if d is not None:
            return d.consistent
        return enumerate_boolean_subalgebras(self.lattice(), jobs=self.jobs)

    def base_poset(self) -> FinitePoset:
        """Poset document if given, else the (consistent) coarse-graining poset."""
        doc = self._one("poset", required=False)
        if doc is not None:
            return docs.parse_poset(doc)
        return self.coarse_graining().poset

    def topology(self):
        doc = self._one("topology", required=False)
        if doc is not None:
            return docs.parse_topology(doc)
        if self.has("functional"):
            return ch_locale(self.functional())
        raise SchemaError("this command needs a topology or a functional document (--in)", witness="topology")

    def presheaves(self) -> list:
        out = []
        for doc in self.raw.get("presheaf", []):
            payload = docs.unwrap(doc, "presheaf")[1]
            base = None if "points" in payload or "poset" in payload else self.base_poset()
            out.append(docs.parse_presheaf(doc, base))
        if not out:
            raise SchemaError("this command needs a presheaf document (--in)", witness="presheaf")
        return out

    def top_presheaf(self, index=0) -> TopPresheaf:
        Ps = self.presheaves()
        P = Ps[index] if index < len(Ps) else Ps[0]
        if not isinstance(P, TopPresheaf):
            raise SchemaError("this command needs a presheaf over a topology (points/opens)")
        return P

    def poset_presheaf(self) -> PosetPresheaf:
        P = self.presheaves()[0]
        if not isinstance(P, PosetPresheaf):
            raise SchemaError("this command needs a presheaf over a poset")
        return P

    def causet(self) -> FinitePoset:
        return docs.parse_poset(self._one("poset"))


def _stage(poset: FinitePoset, name):
    if name is None:
        raise SchemaError("--stage is required")
    if name not in poset:
        raise UnknownNode(f"unknown stage {name!r}", witness=name)
    return name


def _limit_kwargs(ws):
    return {} if ws.limit is None else {"limit": ws.limit}


# -- commands ----------------------------------------------------------------------------------


def cmd_lattice(ws, args):
    L = ws.lattice()
    if args.action == "check":
        dist = is_distributive(L)
        return {
            "elements": list(L.elements),
            "size": len(L),
            "bottom": L.bottom,
            "top": L.top,
            "orthomodular": True,
            "total": L.is_total,
            "distributive": dist.ok,
        }
    if args.action == "distributive":
        check = is_distributive(L)
        return {"distributive": check.ok, "witness": check.witness}
    B = enumerate_boolean_subalgebras(L, jobs=ws.jobs)
    return _coarse_report(B)


def _coarse_report(B):
    return {
        "count": len(B),
        "subalgebras": [{"name": w.name, "atoms": list(w.atoms), "elements": w.elements} for w in B.nodes],
        "covers": [list(c) for c in B.poset.covers],
    }


def cmd_histories(ws, args):
    d = ws.functional()
    Bd = d.consistent
    if args.action == "consistent":
        return _coarse_report(Bd)
    B = d.coarse_graining
    stage = B.node(_stage(B.poset, args.stage))
    if args.action == "semantic-value":
        if args.prop is None or args.value is None:
            raise SchemaError("semantic-value needs --prop and --value")
        if args.prop not in d.lattice.poset:
            raise UnknownElement(f"unknown proposition {args.prop!r}", witness=args.prop)
        value = semantic_value(args.prop, to_fraction(args.value), stage, d, Bd)
        names = [w.name for w in Bd.nodes if w in value]
        check = is_sieve(B.poset, stage.name, names)
        return {"stage": stage.name, "proposition": args.prop, "value": names, "is_sieve": check.ok, "witness": check.witness}
    family = [s.split(",") if s else [] for s in (args.set or [])]
    if not family:
        traps = sorted(all_trapped_sets(stage, d, Bd), key=lambda t: (len(t), sorted(w.name for w in t)))
        return {"stage": stage.name, "trapped_sets": [[w.name for w in Bd.nodes if w in t] for t in traps]}
    result = trapped_family(family, stage, d, Bd)
    return {"stage": stage.name, "family": family, "trapped": [w.name for w in Bd.nodes if w in result.traps]}


def cmd_sieves(ws, args):
    poset = ws.base_poset()
    stage = _stage(poset, args.stage)
    if args.action == "list":
        return {"stage": stage, "sieves": [poset.sort(s.members) for s in sieves_at(poset, stage, **_limit_kwargs(ws))]}
    H = heyting_of_sieves(poset, stage, **_limit_kwargs(ws))
    check = H.verify()
    rows = [{"sieve": poset.sort(s.members), "not": poset.sort(H.neg(s).members), "not_not": poset.sort(H.neg(H.neg(s)).members)} for s in H.elements]
    w = H.double_negation_witness()
    return {
        "stage": stage,
        "size": len(H),
        "heyting_laws": check.ok,
        "violation": check.witness,
        "negations": rows,
        "double_negation_witness": None if w is None else poset.sort(w.members),
    }


def cmd_omega(ws, args):
    poset = ws.base_poset()
    Om = omega_presheaf(poset, **_limit_kwargs(ws))
    return {"omega": {w: [poset.sort(s.members) for s in Om.carrier[w]] for w in poset.elements}}


def cmd_sections(ws, args):
    F = ws.poset_presheaf()
    if args.action == "global":
        found = global_sections(F, **_limit_kwargs(ws))
        return {"count": len(found), "sections": found}
    stage = _stage(F.base, args.stage)
    found = local_sections(F, stage, **_limit_kwargs(ws))
    return {"stage": stage, "count": len(found), "sections": found}


def cmd_vietoris(ws, args):
    if args.action == "subbasis":
        d = ws.functional()
        return {"subbasis": [[w.name for w in d.consistent.nodes if w.name in s] for s in ch_vietoris_subbasis(d.consistent, d)]}
    T = ws.topology()
    if args.action == "topology":
        return docs.topology_document(T)
    if args.action == "frame":
        F = frame_ops(T)
        table = [[T.sort(u), T.sort(v), T.sort(F.implies(u, v))] for u in F.elements for v in F.elements]
        return {"opens": [T.sort(u) for u in F.elements], "frame_laws": True, "implication": table}
    autos = frame_automorphisms(T, **_limit_kwargs(ws))
    return {"count": len(autos), "automorphisms": [[[T.sort(u), T.sort(f[u])] for u in T.opens_sorted] for f in autos]}


def cmd_presheaf(ws, args):
    report = validate_presheaf(ws.top_presheaf())
    return {"valid": report.ok, "violations": report.violations}


def cmd_sheafify(ws, args):
    P = ws.top_presheaf()
    T = P.base
    E, sigma = sheafify(P)
    kw = _limit_kwargs(ws)
    collation = check_collation(P)
    bij = sigma_bijective(P, E, sigma, **kw)
    return {
        "germs": len(E.germs),
        "stalks": {str(x): list(E.stalks[x]) for x in T.points},
        "basis": [{"open": T.sort(u), "element": f, "germs": sorted(b, key=E.germs.index)} for (u, f), b in E.basis.items()],
        "projection": [[g, g.point] for g in E.germs],
        "global_sections": len(sections(E, T.full, **kw)),
        "sections": {", ".join(map(str, T.sort(u))) or "{}": len(sections(E, u, **kw)) for u in T.opens_sorted},
        "presheaf_collates": collation.ok,
        "collation_witness": collation.separation or collation.gluing,
        "gamma_collates": check_collation(gamma_presheaf(E, **kw)).ok,
        "sigma": [{"open": T.sort(u), "injective": bij[u][0], "surjective": bij[u][1]} for u in T.opens_sorted],
    }


def cmd_stalk(ws, args):
    P = ws.top_presheaf()
    point = _point(P.base, args.point)
    germs = stalk_at(P, point)
    classes = stalk_by_colimit(P, point)
    return {
        "point": point,
        "germs": list(germs),
        "minimal_open": P.base.sort(P.base.minimal_open(point)),
        "classes": [sorted([[P.base.sort(u), f] for u, f in c], key=str) for c in classes],
        "agree": True,
    }


def _point(T, name):
    if name is None:
        raise SchemaError("--point is required")
    for p in T.points:
        if str(p) == name:
            return p
    from .errors import UnknownPoint

    raise UnknownPoint(f"unknown point {name!r}", witness=name)


def cmd_adjunction(ws, args):
    Ps = ws.presheaves()
    P = ws.top_presheaf(0)
    Q = ws.top_presheaf(1) if len(Ps) > 1 else P
    E = sheafify(Q)[0]
    kw = _limit_kwargs(ws)
    report = adjunction_check(P, E, **kw)
    return {
        "etale_maps": report.etale_count,
        "presheaf_morphisms": report.presheaf_count,
        "bijection": report.correspondence,
        "ok": report.ok,
    }


def cmd_incidence(ws, args):
    C = ws.causet()
    A = incidence_algebra(C)
    if args.action == "build":
        return {
            "dimension": A.dimension,
            "basis": [list(iv) for iv in A.basis],
            "associative": True,
            "commutative": A.is_commutative(),
            "unit": A.one,
        }
    if args.action == "mobius":
        z, m = zeta_mobius(A)
        return {"zeta": z, "mobius": m, "inverse": True}
    if args.action == "grade":
        G = grade(A)
        return {
            "degrees": [[p, q, G.degree[p, q]] for p, q in A.basis],
            "components": {str(k): len(v) for k, v in G.components.items()},
            "degree_zero_commutative": True,
        }
    calc = differential(A)
    d_table = []
    for k in sorted(calc.basis):
        for path in calc.basis[k]:
            image = calc.d({path: 1})
            d_table.append({"path": list(path), "d": [[list(q), c] for q, c in sorted(image.items(), key=lambda kv: calc._order[kv[0]])]})
    return {
        "dimensions": {str(k): calc.dimension(k) for k in sorted(calc.basis)},
        "differential": d_table,
        "d_squared_zero": True,
        "leibniz": True,
    }


def cmd_algebra_sheaf(ws, args):
    S = docs.parse_algebra_sheaf(ws._one("algebra-sheaf"))
    validate_algebra_sheaf(S)
    T = S.base
    stalks = {}
    for x in T.points:
        st = stalk_algebra(S, x)
        stalks[str(x)] = {"dimension": st.algebra.dimension, "commutative": st.is_commutative()}
    return {"valid": True, "stalks": stalks}


def cmd_demo(ws, args):
    return DEMOS[args.action]()


COMMANDS = {
    "lattice": (cmd_lattice, ["check", "subalgebras", "distributive"]),
    "histories": (cmd_histories, ["consistent", "semantic-value", "trapped"]),
    "sieves": (cmd_sieves, ["list", "heyting"]),
    "omega": (cmd_omega, None),
    "sections": (cmd_sections, ["global", "local"]),
    "vietoris": (cmd_vietoris, ["subbasis", "topology", "frame", "automorphisms"]),
    "presheaf": (cmd_presheaf, ["validate"]),
    "sheafify": (cmd_sheafify, None),
    "stalk": (cmd_stalk, None),
    "adjunction": (cmd_adjunction, None),
    "incidence": (cmd_incidence, ["build", "mobius", "grade", "diff"]),
    "algebra-sheaf": (cmd_algebra_sheaf, ["validate"]),
    "demo": (cmd_demo, sorted(DEMOS)),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="inputs", action="append", metavar="PATH", help="input document or built-in name (repeatable)")
    common.add_argument("--out", metavar="PATH", help="write the report here instead of standard output")
    common.add_argument("--tol", metavar="RATIONAL", help="zero tolerance for decoherence values (default 1e-9)")
    common.add_argument("--jobs", type=_positive, default=1, metavar="N", help="worker processes for parallel passes")
    common.add_argument("--max-search", type=_positive, metavar="N", help="size guard for exhaustive searches")
    common.add_argument("--stage", help="node of the base poset")
    common.add_argument("--prop", help="proposition for semantic-value")
    common.add_argument("--value", help="probability for semantic-value")
    common.add_argument("--set", action="append", metavar="A,B,...", help="proposition set for trapped (repeatable)")
    common.add_argument("--point", help="base point for stalk")

    parser = argparse.ArgumentParser(prog="histopos", description="Finite consistent-histories topos toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, actions) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common])
        if actions:
            p.add_argument("action", choices=actions)
    return parser


def _positive(text):
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.tol is not None:
        try:
            to_fraction(args.tol)
        except (ValueError, ZeroDivisionError):
            parser.error(f"--tol: {args.tol!r} is not a rational number")
    handler, _ = COMMANDS[args.command]
    try:
        ws = Workspace(args)
        report = handler(ws, args)
        status = 0
    except HistoposError as exc:
        report = {"error": exc.to_dict()}
        status = 1
    text = docs.dumps(report)
    if args.out and status == 0:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        stdout.write(text)
    return status


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
