import subprocess
import sys
from pathlib import Path

from subdirect import cli
from subdirect.errors import InconsistencyError

DATA = Path(__file__).resolve().parent.parent / "demos" / "data"


def run(*argv):
    out, err = [], []
    status = cli.run([str(a) for a in argv], out.append, err.append)
    return status, out, err


def d(name):
    return str(DATA / name)


class TestExamples:
    def test_check_vs(self):
        status, out, _ = run("sdp", "check-vs", "--k", "2", d("stallings3.sdp"))
        assert status == 0
        assert out[0] == "virtually surjects to 2-tuples: true"
        assert sum("index of p_" in line for line in out) == 3

    def test_sigma_length(self):
        status, out, _ = run("sigma", "length", d("bieri4.kernel"))
        assert status == 0 and out[-1] == "finiteness length: 3"

    def test_witness(self):
        status, out, _ = run("witness", "commutator", "--k", "2", "--gammas", "a;b", d("stallings3.sdp"))
        assert status == 0
        assert "c: a b a^-1 b^-1" in out and out[-1] == "verdict: true"

    def test_reproduce(self):
        status, out, _ = run("reproduce", "bieri-ladder")
        assert status == 0 and out[-1] == "summary: bieri-ladder: 5/5 pass"

    def test_reproduce_snf(self):
        status, out, _ = run("reproduce", "snf-oracle")
        assert status == 0 and out[-1].endswith("200/200 pass")

    def test_unknown_suite(self):
        status, _, err = run("reproduce", "nope")
        assert status == 1 and "unknown suite" in err[0]

    def test_h1_fibre(self):
        status, out, _ = run("hom", "h1", "--fibre", d("zz_over_z2.sdp"))
        assert status == 0 and "index: 2" in out and "H_1: Z^2" in out

    def test_h1_maps(self):
        status, out, _ = run("hom", "h1", "--q1", d("z_mod2_x.map"), "--q2", d("z_mod2_y.map"))
        assert status == 0 and "H_1: Z^2" in out

    def test_flags(self):
        status, out, _ = run("flags", "derive", "--facts", d("weak_vs.facts"))
        assert status == 0
        assert "query P wFP_2: TRUE (weak virtual surjections theorem)" in out
        assert "query P wFP_3: UNKNOWN (-)" in out

    def test_fg(self):
        assert run("fg", "reduce", "a b b^-1 a")[1] == ["word: a a"]
        assert run("fg", "commutator", "a b", "b")[1] == ["commutator: a b a^-1 b^-1"]

    def test_subgroup(self):
        assert run("subgroup", "index", d("index3.word"))[1] == ["index: 3"]
        status, out, _ = run("subgroup", "basis", d("index3.word"))
        assert out[0] == "rank: 4"

    def test_contains(self):
        status, out, _ = run("sdp", "contains", d("stallings3.sdp"), "a ; b^-1 ; 1", "a ; b ; 1")
        assert out == ["contains a ; b^-1 ; 1: true", "contains a ; b ; 1: false"]

    def test_exchange(self):
        status, out, _ = run("sdp", "exchange", d("stallings3.sdp"), "--I", "1,2", "--J", "2,3")
        assert status == 0 and out[-1] == "equal: true"

    def test_sigma_member(self):
        status, out, _ = run("sigma", "member", "--chi", "1 1|0 0", "--k", "1")
        assert out[-1] == "membership: NON_MEMBER"

    def test_coinvariants(self):
        status, out, _ = run("hom", "coinvariants", "--rank", "2", "--action", "0 1;1 0")
        assert "coinvariants: Z" in out

    def test_witness_bound(self):
        assert run("witness", "bound", "--n", "4", "--k", "2")[1] == ["class bound: 2"]


class TestExitCodes:
    def test_missing_file(self):
        status, _, err = run("sdp", "show", d("nope.sdp"))
        assert status == 1 and err[0].startswith("error:")

    def test_parse_error_has_position(self, tmp_path):
        bad = tmp_path / "bad.sdp"
        bad.write_text("ranks: 2 2\nclause: kernel\nrow: 1 1 1\n")
        status, _, err = run("sdp", "show", bad)
        assert status == 1
        assert err[0].startswith("parse error:") and "bad.sdp:3:6" in err[0]

    def test_usage(self):
        assert run("sdp")[0] == 1
        assert run("nonsense")[0] == 1
        assert run("witness", "bound", "--n", "x", "--k", "2")[0] == 1

    def test_precondition(self):
        status, _, err = run("witness", "bound", "--n", "4", "--k", "1")
        assert status == 1

    def test_inconsistency(self, monkeypatch):
        def broken(P, I, J):
            raise InconsistencyError("sides differ")

        monkeypatch.setattr(cli, "exchange", broken)
        status, _, err = run("sdp", "exchange", d("stallings3.sdp"), "--I", "1,2", "--J", "2,3")
        assert status == 2 and err[0].startswith("inconsistency:")

    def test_contradictory_facts(self, tmp_path):
        f = tmp_path / "x.facts"
        f.write_text("flag G F 2 true\nflag G FP 1 false\n")
        assert run("flags", "derive", "--facts", f)[0] == 2

    def test_factor_cap(self, monkeypatch):
        monkeypatch.setenv("SDP_MAX_FACTORS", "2")
        status, _, err = run("sdp", "check-vs", "--k", "2", d("stallings3.sdp"))
        assert status == 1 and "cap 2" in err[0]


def test_deterministic_output():
    cmds = [
        ("reproduce", "exchange-fuzz", "--seed", "7"),
        ("reproduce", "witness-fuzz", "--seed", "11"),
        ("flags", "derive", "--facts", d("lhs.facts")),
        ("sdp", "generators", "--q1", d("f2_to_s3.map"), "--q2", d("f2_to_s3.map")),
    ]
    for cmd in cmds:
        first, second = run(*cmd), run(*cmd)
        assert first == second and first[0] == 0


def test_console_entry_point():
    args = [sys.executable, "-m", "subdirect.cli", "sigma", "length", d("bieri4.kernel")]
    a = subprocess.run(args, capture_output=True)
    b = subprocess.run(args, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout
    assert a.stdout.decode().splitlines()[-1] == "finiteness length: 3"
