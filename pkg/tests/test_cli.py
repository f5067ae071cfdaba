import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from histopos.cli import run

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


def call(*argv):
    buf = io.StringIO()
    status = run([str(a) for a in argv], stdout=buf)
    return status, buf.getvalue()


def report(*argv):
    status, text = call(*argv)
    assert status == 0, text
    return json.loads(text)


def sample(name):
    return SAMPLES / name


class TestExamples:
    def test_mo2_subalgebras(self):
        out = report("lattice", "subalgebras", "--in", sample("mo2.json"))
        assert out["count"] == 3
        assert [s["name"] for s in out["subalgebras"]] == ["W(1)", "W(a,a')", "W(b,b')"]

    def test_lattice_check_and_distributivity(self):
        out = report("lattice", "check", "--in", "boolean:2")
        assert out["distributive"] and out["size"] == 4
        out = report("lattice", "distributive", "--in", "mo:2")
        assert out["distributive"] is False and len(out["witness"]) == 3

    def test_sheafify_sierpinski(self):
        out = report("sheafify", "--in", sample("sierpinski_presheaf.json"))
        assert out["germs"] == 3 and out["global_sections"] == 2
        assert out["presheaf_collates"] and out["gamma_collates"]

    def test_sheafify_separation_failure(self):
        out = report("sheafify", "--in", sample("separation_failure.json"))
        assert out["presheaf_collates"] is False
        assert out["collation_witness"]["sections"] == ["s1", "s2"]
        top = next(s for s in out["sigma"] if s["open"] == ["p", "q"])
        assert top["injective"] is False

    def test_semantic_value(self):
        out = report("histories", "semantic-value", "--in", sample("mo2_functional.json"), "--stage", "W(a,a')", "--prop", "a", "--value", "1/2")
        assert out["value"] == ["W(a,a')"] and out["is_sieve"] is False
        assert out["witness"] == ["W(a,a')", "W(1)"]

    def test_consistent_and_trapped(self):
        out = report("histories", "consistent", "--in", sample("mo2_functional.json"))
        assert [s["name"] for s in out["subalgebras"]] == ["W(a,a')"]
        out = report("histories", "trapped", "--in", sample("mo2_functional.json"), "--stage", "W(a,a')", "--set", "a")
        assert out["trapped"] == ["W(a,a')"]

    def test_vietoris_subbasis(self):
        out = report("vietoris", "subbasis", "--in", sample("mo2_functional.json"))
        assert out["subbasis"] == [[], ["W(a,a')"]]

    def test_sieves_and_sections(self):
        out = report("sieves", "heyting", "--in", "mo:2", "--stage", "W(a,a')")
        assert out["heyting_laws"] and out["double_negation_witness"] == ["W(1)"]
        out = report("sections", "global", "--in", sample("vposet_presheaf.json"))
        assert out["count"] == 0

    def test_stalk_and_adjunction(self):
        out = report("stalk", "--in", sample("sierpinski_presheaf.json"), "--point", "p")
        assert len(out["germs"]) == 2 and out["minimal_open"] == ["p", "q"]
        out = report("adjunction", "--in", sample("sierpinski_presheaf.json"))
        assert out["ok"] and out["etale_maps"] == out["presheaf_morphisms"]

    def test_incidence(self):
        out = report("incidence", "diff", "--in", sample("chain2.json"))
        assert out["dimensions"] == {"0": 2, "1": 1}
        out = report("incidence", "mobius", "--in", "cube:2")
        assert out["inverse"]
        status, text = call("incidence", "grade", "--in", sample("ungraded.json"))
        assert status == 1 and json.loads(text)["error"]["type"] == "NotGraded"

    def test_algebra_sheaf(self):
        assert report("algebra-sheaf", "validate", "--in", sample("algebra_sheaf_diagonal.json"))["valid"]
        status, text = call("algebra-sheaf", "validate", "--in", sample("algebra_sheaf_swap.json"))
        assert status == 1 and json.loads(text)["error"]["type"] == "NotHomomorphism"

    @pytest.mark.parametrize(
        "name, summary",
        [
            ("double-negation", "not not {W(1)} = {W(1), W(a,a')} != {W(1)}"),
            ("no-global-section", "local sections: yes at every stage; global sections: 0"),
            ("not-a-sieve", "semantic value of a at W(a,a'): {W(a,a')}; not a sieve"),
            ("union-not-intersection", "trapped(['a']) & trapped(['b']) = {W(a,b,c)}; closed under union, not under intersection"),
        ],
    )
    def test_demos(self, name, summary):
        assert report("demo", name)["summary"] == summary


class TestExitCodes:
    def test_missing_file(self, tmp_path):
        status, text = call("lattice", "check", "--in", tmp_path / "nope.json")
        assert status == 1 and json.loads(text)["error"]["type"] == "ParseError"

    def test_missing_input(self):
        status, text = call("lattice", "check")
        assert status == 1 and json.loads(text)["error"]["type"] == "SchemaError"

    def test_usage_errors(self, capsys):
        for argv in (["bogus"], ["lattice", "nonsense"], ["lattice", "check", "--jobs", "0"], ["lattice", "check", "--tol", "abc"]):
            with pytest.raises(SystemExit) as exc:
                run(argv)
            assert exc.value.code == 2

    def test_out_file(self, tmp_path):
        target = tmp_path / "report.json"
        status, text = call("lattice", "subalgebras", "--in", "mo:2", "--out", target)
        assert status == 0 and text == ""
        assert json.loads(target.read_text())["count"] == 3

    def test_size_guard(self):
        status, text = call("sieves", "list", "--in", "antichain:6", "--stage", "x0", "--max-search", "1")
        assert status == 1 and json.loads(text)["error"]["type"] == "SizeGuard"


class TestDeterminism:
    def test_repeat_runs_identical(self):
        first = call("sheafify", "--in", sample("sierpinski_presheaf.json"))
        second = call("sheafify", "--in", sample("sierpinski_presheaf.json"))
        assert first == second

    def test_jobs_do_not_change_output(self):
        serial = call("lattice", "subalgebras", "--in", "boolean:4", "--jobs", "1")
        parallel = call("lattice", "subalgebras", "--in", "boolean:4", "--jobs", "2")
        assert serial == parallel and serial[0] == 0

    def test_module_entry_point(self):
        proc = subprocess.run(
            [sys.executable, "-m", "histopos", "lattice", "subalgebras", "--in", str(sample("mo2.json"))],
            capture_output=True,
            text=True,
            check=False,
        )
        assert proc.returncode == 0 and json.loads(proc.stdout)["count"] == 3
