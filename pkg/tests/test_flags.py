import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subdirect.errors import INFINITE, InconsistencyError, PreconditionError
from subdirect.flags import (
    FINITE_INDEX,
    KINDS,
    LHS_FG,
    VS_FACTORS,
    WEAK_VS,
    FinitenessProfile,
    KnowledgeBase,
    Truth,
    lhs_converse,
    lhs_propagate,
    weak_n12,
    weak_vsc,
)
from subdirect.formats import answer, parse_facts
from subdirect.product import abelian_kernel, virtually_surjects
from subdirect.reproduce import FLAG_TABLE, run_flag_row
from subdirect.sigma import KernelSpec, finiteness_length

TRUE, FALSE, UNKNOWN = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN
P = FinitenessProfile.of


class TestProfile:
    def test_degree_zero_is_free(self):
        p = FinitenessProfile("G")
        assert all(p.flag(k, 0) is TRUE for k in KINDS)
        assert p.flag("F", 1) is UNKNOWN

    def test_chain(self):
        p = P("G", F=3)
        assert p.flag("FP", 3) is TRUE and p.flag("wFP", 3) is TRUE and p.flag("H", 3) is TRUE
        assert p.flag("F", 4) is UNKNOWN
        assert p.provenance("FP", 2) == "F => FP"

    def test_downward(self):
        p = P("G", wFP=INFINITE)
        assert all(p.flag("wFP", k) is TRUE for k in range(10))
        assert p.flag("FP", 1) is UNKNOWN

    def test_false_propagates_down_the_chain(self):
        p = FinitenessProfile("G")
        p.mark_false("wFP", 2, "given")
        p.close()
        assert p.flag("FP", 2) is FALSE and p.flag("F", 5) is FALSE
        assert p.flag("wFP", 1) is UNKNOWN

    def test_conflict(self):
        p = P("G", F=2)
        with pytest.raises(InconsistencyError):
            p.mark_false("F", 1, "given")
        q = FinitenessProfile("G")
        q.mark_false("FP", 2, "given")
        with pytest.raises(InconsistencyError):
            q.mark_true("FP", 3, "given")

    def test_false_needs_finite_degree(self):
        with pytest.raises(PreconditionError):
            FinitenessProfile("G").mark_false("F", INFINITE, "given")

    def test_unknown_kind(self):
        with pytest.raises(PreconditionError):
            FinitenessProfile("G").flag("FQ", 1)


class TestRules:
    def test_lhs_n3(self):
        assert lhs_propagate(P("N", wFP=2), P("Q", FP=3), TRUE, 3) == 3

    def test_lhs_h0_unknown(self):
        assert lhs_propagate(P("N", wFP=2), P("Q", FP=3), UNKNOWN, 3) is None

    def test_lhs_all_degrees(self):
        inf = INFINITE
        assert lhs_propagate(P("N", wFP=inf), P("Q", FP=inf), TRUE, inf) is inf

    def test_lhs_weak_hypothesis(self):
        assert lhs_propagate(P("N", wFP=1), P("Q", FP=3), TRUE, 3) is None
        assert lhs_propagate(P("N", wFP=2), P("Q", FP=2), TRUE, 3) is None

    def test_converse_forward(self):
        h0, hQ = lhs_converse(P("N", wFP=1), P("G", wFP=2), P("Q", FP=2), 2, TRUE, UNKNOWN)
        assert (h0, hQ) == (TRUE, UNKNOWN)

    def test_converse_backward(self):
        h0, hQ = lhs_converse(P("N", wFP=1), P("G", wFP=3), P("Q", FP=2), 2, UNKNOWN, TRUE)
        assert (h0, hQ) == (UNKNOWN, TRUE)

    def test_converse_needs_wfp_n_plus_one(self):
        assert lhs_converse(P("N", wFP=1), P("G", wFP=2), P("Q", FP=2), 2, UNKNOWN, TRUE) == (UNKNOWN, UNKNOWN)

    def test_converse_missing_hypotheses(self):
        assert lhs_converse(P("N"), P("G", wFP=2), P("Q", FP=2), 2, TRUE, TRUE) == (UNKNOWN, UNKNOWN)

    def test_weak_n12(self):
        assert weak_n12(P("N1", wFP=1), P("G1", wFP=2), P("G2", FP=2), P("Q", FP=3)) == 2

    def test_weak_n12_missing_q(self):
        assert weak_n12(P("N1", wFP=1), P("G1", wFP=2), P("G2", FP=2), P("Q", FP=2)) is None

    def test_weak_n12_needs_n_at_least_one(self):
        assert weak_n12(P("N1"), P("G1", wFP=1), P("G2", FP=1), P("Q", FP=2)) is None

    def test_weak_n12_infinite(self):
        inf = INFINITE
        assert weak_n12(P("N1", wFP=inf), P("G1", F=inf), P("G2", F=inf), P("Q", F=inf)) is inf

    def test_weak_vsc(self):
        free = [P(f"F{i}", F=INFINITE) for i in range(4)]
        level, trace = weak_vsc(free, 2, True)
        assert level == 2 and trace[0].startswith("claim at level k=2")
        assert any("weak n-(n+1)-(n+2) theorem" in t for t in trace)

    def test_weak_vsc_false_certificate(self):
        assert weak_vsc([P("F", F=INFINITE)] * 3, 2, False) is None

    def test_weak_vsc_factors_too_weak(self):
        assert weak_vsc([P("F", FP=1)] * 3, 2, True) is None

    def test_weak_vsc_k1(self):
        with pytest.raises(PreconditionError):
            weak_vsc([P("F", F=INFINITE)] * 3, 1, True)


@pytest.mark.parametrize("label,facts,query,want,prov", FLAG_TABLE, ids=[r[0] for r in FLAG_TABLE])
def test_flag_table(label, facts, query, want, prov):
    assert run_flag_row(facts, query) == (want, prov)


def derive(text):
    kb, queries = parse_facts(text)
    kb.derive()
    return kb, [answer(kb, q) for q in queries]


class TestEngine:
    def test_chained_four_factor(self):
        kb, [(v, prov)] = derive(
            "flag F1 F inf true\nflag F2 F inf true\nflag F3 F inf true\nflag F4 F inf true\n"
            "product P F1 F2 F3 F4\nvs P 2 true\nquery P wFP 2"
        )
        assert (v, prov) == (TRUE, WEAK_VS)
        assert kb.query("P", "Hk", 2)[0] is TRUE
        assert kb.query("P", "wFP", 3)[0] is UNKNOWN

    def test_fibre_then_lhs(self):
        kb, answers = derive(
            "flag N1 wFP 1 true\nflag G1 F inf true\nflag G2 F inf true\nflag Q F inf true\n"
            "fibre P N1 G1 N2 G2 Q\nquery P wFP 2\nquery G1 H 5"
        )
        assert answers[0][0] is TRUE and answers[1][0] is TRUE

    def test_finite_index_directions(self):
        kb, answers = derive("flag G wFP 3 true\nflag H FP 2 true\nfinite-index H G\nquery H wFP 3\nquery G FP 2")
        assert answers[0] == (TRUE, FINITE_INDEX)
        assert answers[1] == (TRUE, FINITE_INDEX)
        kb, answers = derive("flag H wFP 3 true\nfinite-index H G\nquery G wFP 3")
        assert answers[0][0] is UNKNOWN

    def test_nilpotent_quotients(self):
        kb, [(v, prov)] = derive(
            "flag A F 1 true\nflag B F 1 true\nproduct P A B\nvs P 1 true\nnilpotent-quotients P\nquery P F 1"
        )
        assert (v, prov) == (TRUE, VS_FACTORS)

    def test_lhs_infinite(self):
        kb, [(v, prov)] = derive("flag N wFP inf true\nflag Q FP inf true\nseq N G Q\nh0 N Q inf true\nquery G H inf")
        assert (v, prov) == (TRUE, LHS_FG)

    def test_contradiction(self):
        with pytest.raises(InconsistencyError):
            derive("flag G F 2 true\nflag G wFP 1 false")

    def test_contradiction_through_finite_index(self):
        with pytest.raises(InconsistencyError):
            derive("flag G F 2 true\nflag H FP 2 false\nfinite-index H G")

    def test_vs_conflict(self):
        kb = KnowledgeBase()
        kb.assert_vs("P", 2, True)
        with pytest.raises(InconsistencyError):
            kb.assert_vs("P", 2, False)

    def test_trace_names(self):
        kb, _ = derive("flag N wFP 2 true\nflag Q FP 3 true\nseq N G Q\nh0 N Q 3 true")
        rules = {f.rule for f in kb.trace}
        assert LHS_FG in rules
        assert all(not any(ch.isdigit() for ch in r.split()[0]) for r in rules)


def test_stallings_consistency():
    """n = 3, pairs: the flag engine gives wFP_2 and the sigma criterion gives length 2."""
    Pk = abelian_kernel([2, 2, 2], [[1] * 6])
    assert virtually_surjects(Pk, 2).verdict
    assert not virtually_surjects(Pk, 3).verdict
    length = finiteness_length(KernelSpec([2, 2, 2], [[1] * 6]))
    assert length == 2
    kb, [(v, _)] = derive(
        "flag F1 F inf true\nflag F2 F inf true\nflag F3 F inf true\nproduct P F1 F2 F3\nvs P 2 true\n"
        f"flag P F {length} true\nquery P wFP 2"
    )
    assert v is TRUE


NAMES = ["A", "B", "C", "D", "E"]
degrees = st.one_of(st.integers(0, 4), st.just(INFINITE))


@st.composite
def true_facts(draw):
    lines = []
    for _ in range(draw(st.integers(0, 8))):
        kind = draw(st.sampled_from(["flag", "flag", "flag", "h0", "homology", "vs"]))
        if kind == "flag":
            d = draw(degrees)
            lines.append(f"flag {draw(st.sampled_from(NAMES))} {draw(st.sampled_from(KINDS))} {'inf' if d is INFINITE else d} true")
        elif kind == "h0":
            lines.append(f"h0 A C {draw(st.integers(1, 4))} true")
        elif kind == "homology":
            lines.append(f"homology {draw(st.sampled_from(NAMES))} {draw(st.integers(1, 5))} true")
        else:
            lines.append(f"vs D {draw(st.integers(1, 4))} true")
    return lines


STRUCTURE = ["seq A B C", "fibre D A B E B C", "product D A B C", "finite-index E B", "nilpotent-quotients D"]


def all_true(kb):
    out = set()
    for name, p in kb.profiles.items():
        for kind in KINDS:
            out.add((name, kind, p.true_through(kind)))
    return out


def dominates(new, old):
    for name, kind, d in old:
        cur = max((x for n, k, x in new if n == name and k == kind), key=lambda x: float("inf") if x is INFINITE else x)
        if d is INFINITE:
            if cur is not INFINITE:
                return False
        elif cur is not INFINITE and cur < d:
            return False
    return True


@settings(max_examples=80)
@given(true_facts(), true_facts(), st.lists(st.sampled_from(STRUCTURE), unique=True))
def test_monotone_idempotent_closed(base, extra, structure):
    kb1, _ = parse_facts("\n".join(structure + base))
    kb1.derive()
    assert kb1.derive() == []
    kb2, _ = parse_facts("\n".join(structure + base + extra))
    kb2.derive()
    assert dominates(all_true(kb2), all_true(kb1))
    for (key, (v, _)) in kb1.homology.items():
        assert kb2.homology_flag(*key) is TRUE
    for p in kb2.profiles.values():
        for kind in KINDS:
            d = p.true_through(kind)
            top = 6 if d is INFINITE else d
            assert all(p.flag(kind, j) is TRUE for j in range(top + 1))
        for lo, hi in [("F", "FP"), ("FP", "wFP"), ("wFP", "H")]:
            for j in range(6):
                if p.flag(lo, j) is TRUE:
                    assert p.flag(hi, j) is TRUE


def test_infinite_sequence_reaches_fixed_point():
    # derived H_0 and homology degrees must not widen the degree horizon
    kb, _ = parse_facts("flag A wFP inf true\nflag B wFP inf true\nflag C FP inf true\nseq A B C")
    assert kb.derive()
    assert kb.derive() == []
    assert kb.query_h0("A", "C", 3)[0] is TRUE
