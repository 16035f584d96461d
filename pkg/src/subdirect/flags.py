"""Forward-chaining inference of homological finiteness flags.

Each group carries a :class:`FinitenessProfile`: for every kind (F, FP, wFP
and H, the last meaning "H_k finitely generated for all k up to the
degree") it records the largest degree known TRUE and the smallest degree
known FALSE.  Thresholds make downward closure automatic.  Rules combine
profiles through short exact sequences, fibre products, virtual surjection
certificates and finite-index inclusions; every conclusion carries the name
of the statement that produced it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from .errors import INFINITE, InconsistencyError, Infinity, PreconditionError

Degree = Union[int, Infinity]

KINDS = ("F", "FP", "wFP", "H")
CHAIN = (("F", "FP"), ("FP", "wFP"), ("wFP", "H"))

AXIOM = {("F", "FP"): "F => FP", ("FP", "wFP"): "FP => wFP", ("wFP", "H"): "wFP => H f.g."}
LHS_FG = "LHS finite generation"
LHS_TRANSFER = "LHS coinvariant transfer"
LHS_CONVERSE = "LHS coinvariant converse"
WEAK_N12 = "weak n-(n+1)-(n+2) theorem"
WEAK_VS = "weak virtual surjections theorem"
VS_FACTORS = "virtual surjection to factors (nilpotent quotients)"
FINITE_INDEX = "finite-index transfer"
GIVEN = "given"


class Truth(enum.Enum):
    TRUE = "TRUE"
    FALSE = "FALSE"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


TRUE, FALSE, UNKNOWN = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN


def _le(a: Degree, b: Degree) -> bool:
    if b is INFINITE:
        return True
    if a is INFINITE:
        return False
    return a <= b


def _min(*xs: Degree) -> Degree:
    out: Degree = INFINITE
    for x in xs:
        if not _le(out, x):
            out = x
    return out


def _minus(a: Degree, k: int) -> Degree:
    return a if a is INFINITE else a - k


def _plus(a: Degree, k: int) -> Degree:
    return a if a is INFINITE else a + k


def fmt_degree(d: Degree) -> str:
    return "inf" if d is INFINITE else str(d)


@dataclass
class Bound:
    degree: Degree
    provenance: str


class FinitenessProfile:
    """Per-kind TRUE-through and FALSE-from thresholds with provenance."""

    def __init__(self, name: str = "G"):
        self.name = name
        # every group is of type F_0
        self.true: Dict[str, Bound] = {k: Bound(0, "trivial in degree 0") for k in KINDS}
        self.false: Dict[str, Optional[Bound]] = {k: None for k in KINDS}

    def flag(self, kind: str, k: Degree) -> Truth:
        _kind(kind)
        if _le(k, self.true[kind].degree):
            return TRUE
        f = self.false[kind]
        if f is not None and _le(f.degree, k):
            return FALSE
        return UNKNOWN

    def provenance(self, kind: str, k: Degree) -> Optional[str]:
        v = self.flag(kind, k)
        if v is TRUE:
            return self.true[kind].provenance
        if v is FALSE:
            return self.false[kind].provenance
        return None

    def true_through(self, kind: str) -> Degree:
        return self.true[_kind(kind)].degree

    def mark_true(self, kind: str, k: Degree, provenance: str) -> bool:
        """Record TRUE through degree k; returns whether anything changed."""
        _kind(kind)
        if _le(k, self.true[kind].degree):
            return False
        f = self.false[kind]
        if f is not None and _le(f.degree, k):
            raise InconsistencyError(
                f"{self.name}: {kind}_{fmt_degree(k)} derived by {provenance}, "
                f"but {kind}_{fmt_degree(f.degree)} is false ({f.provenance})"
            )
        self.true[kind] = Bound(k, provenance)
        return True

    def mark_false(self, kind: str, k: int, provenance: str) -> bool:
        _kind(kind)
        if k is INFINITE:
            raise PreconditionError("a FALSE flag needs a finite degree")
        f = self.false[kind]
        if f is not None and f.degree <= k:
            return False
        if _le(k, self.true[kind].degree):
            t = self.true[kind]
            raise InconsistencyError(
                f"{self.name}: {kind}_{k} false ({provenance}), but true through {fmt_degree(t.degree)} ({t.provenance})"
            )
        self.false[kind] = Bound(k, provenance)
        return True

    def close(self) -> List[Tuple[str, str, Degree, Truth]]:
        """Apply the F => FP => wFP => H chain and its contrapositive."""
        changes = []
        for lo, hi in CHAIN:
            d = self.true[lo].degree
            if self.mark_true(hi, d, AXIOM[(lo, hi)]):
                changes.append((AXIOM[(lo, hi)], hi, d, TRUE))
        for lo, hi in reversed(CHAIN):
            f = self.false[hi]
            if f is not None:
                rule = AXIOM[(lo, hi)] + " (contrapositive)"
                if self.mark_false(lo, f.degree, rule):
                    changes.append((rule, lo, f.degree, FALSE))
        return changes

    def copy(self) -> "FinitenessProfile":
        p = FinitenessProfile(self.name)
        p.true = dict(self.true)
        p.false = dict(self.false)
        return p

    def lines(self) -> List[str]:
        out = []
        for k in KINDS:
            t = self.true[k]
            line = f"{self.name} {k}: true through {fmt_degree(t.degree)}"
            if t.degree != 0:
                line += f" ({t.provenance})"
            f = self.false[k]
            if f is not None:
                line += f"; false from {f.degree} ({f.provenance})"
            out.append(line)
        return out

    @classmethod
    def of(cls, name: str = "G", **through: Degree) -> "FinitenessProfile":
        """Profile with the given kinds TRUE through the given degrees, closed."""
        p = cls(name)
        for kind, d in through.items():
            p.mark_true(kind, d, GIVEN)
        p.close()
        return p


def _kind(kind: str) -> str:
    if kind not in KINDS:
        raise PreconditionError(f"unknown finiteness kind {kind!r}; expected one of {', '.join(KINDS)}")
    return kind


# the numbered statements as pure functions on profiles


def lhs_propagate(N: FinitenessProfile, Q: FinitenessProfile, h0: Truth, n: Degree) -> Optional[Degree]:
    """N -> Gamma -> Q with Q FP_n, N wFP_{n-1} and H_0(Q, H_n(N)) f.g.:
    H_k(Gamma) is f.g. for k <= n.  Returns n when the rule fires."""
    if h0 is not TRUE:
        return None
    if _le(n, Q.true_through("FP")) and _le(_minus(n, 1), N.true_through("wFP")):
        return n
    return None


def lhs_converse(
    N: FinitenessProfile, G: FinitenessProfile, Q: FinitenessProfile, n: int, hQ: Truth, h0: Truth
) -> Tuple[Truth, Truth]:
    """Under N wFP_{n-1}, Gamma wFP_n, Q FP_n: H_{n+1}(Q) f.g. gives
    H_0(Q, H_n(N)) f.g., and with Gamma wFP_{n+1} the converse.  Returns the
    (h0, hQ) conclusions, UNKNOWN where nothing follows."""
    if not (_le(n - 1, N.true_through("wFP")) and _le(n, G.true_through("wFP")) and _le(n, Q.true_through("FP"))):
        return UNKNOWN, UNKNOWN
    new_h0 = TRUE if hQ is TRUE else UNKNOWN
    new_hQ = TRUE if h0 is TRUE and _le(n + 1, G.true_through("wFP")) else UNKNOWN
    return new_h0, new_hQ


def weak_n12(
    N1: FinitenessProfile, G1: FinitenessProfile, G2: FinitenessProfile, Q: FinitenessProfile
) -> Optional[Degree]:
    """Largest n >= 1 with N1 wFP_n, Gamma_1 wFP_{n+1}, Gamma_2 FP_{n+1} and
    Q FP_{n+2}; the fibre product is then wFP_{n+1}.  Returns n + 1."""
    n = _min(
        N1.true_through("wFP"),
        _minus(G1.true_through("wFP"), 1),
        _minus(G2.true_through("FP"), 1),
        _minus(Q.true_through("FP"), 2),
    )
    if n is not INFINITE and n < 1:
        return None
    return _plus(n, 1)


def weak_vsc(factors: Sequence[FinitenessProfile], k: int, vs: bool, n: Optional[int] = None) -> Optional[Tuple[int, List[str]]]:
    """Factors FP_k and a subgroup virtually surjecting to k-tuples: the
    subgroup is wFP_k.  Returns the level reached and the induction trace."""
    if k < 2:
        raise PreconditionError("the weak virtual surjection rule needs k >= 2; k = 1 is the nilpotent-quotient rule")
    if not vs:
        return None
    if not all(_le(k, f.true_through("FP")) for f in factors):
        return None
    return k, induction_trace(len(factors) if n is None else n, k)


def induction_trace(n: int, k: int) -> List[str]:
    """The double induction (on k, then on the number of factors) that
    reduces the weak virtual surjection statement to the weak
    n-(n+1)-(n+2) theorem."""
    out = [f"claim at level k={k} for n={n} factors"]
    for level in range(k, 1, -1):
        if n <= level:
            out.append(f"k={level}, n={n}: finite index in the product, so FP_{level}")
            continue
        out.append(f"k={level}, n<={level}: finite index in the product, so FP_{level}")
        for m in range(level + 1, n + 1):
            out.append(
                f"k={level}, n={m}: fibre product of T = p_{{1..{m - 1}}} (wFP_{level}, induction on n) "
                f"and Gamma_{m} over Q; N_{{1..{m - 1}}} virtually surjects to {level - 1}-tuples "
                f"(wFP_{level - 1}, induction on k); Q virtually nilpotent, so FP_inf; "
                f"{WEAK_N12} with n={level - 1} gives wFP_{level}"
            )
    out.append("k=1: finitely generated by " + VS_FACTORS)
    return out


# knowledge base


@dataclass
class Firing:
    rule: str
    conclusion: str
    premises: str
    details: List[str] = field(default_factory=list)

    def lines(self) -> List[str]:
        return [f"fire {self.rule}: {self.conclusion} <= {self.premises}"] + [f"  {d}" for d in self.details]

    def __str__(self) -> str:
        return "\n".join(self.lines())


@dataclass
class KnowledgeBase:
    profiles: Dict[str, FinitenessProfile] = field(default_factory=dict)
    homology: Dict[Tuple[str, int], Tuple[Truth, str]] = field(default_factory=dict)
    h0: Dict[Tuple[str, str, Degree], Tuple[Truth, str]] = field(default_factory=dict)
    seqs: List[Tuple[str, str, str]] = field(default_factory=list)
    fibres: List[Tuple[str, str, str, str, str, str]] = field(default_factory=list)
    products: Dict[str, List[str]] = field(default_factory=dict)
    vs: Dict[str, Tuple[int, Optional[int]]] = field(default_factory=dict)  # (true through, false from)
    finite_index: List[Tuple[str, str]] = field(default_factory=list)
    nilpotent_quotients: set = field(default_factory=set)
    trace: List[Firing] = field(default_factory=list)
    # finite degrees named by assertions; derived degrees must not widen the horizon
    given_degrees: set = field(default_factory=set)

    def profile(self, name: str) -> FinitenessProfile:
        if name not in self.profiles:
            self.profiles[name] = FinitenessProfile(name)
        return self.profiles[name]

    # assertions

    def _note(self, k: Optional[Degree]) -> None:
        if k is not None and k is not INFINITE:
            self.given_degrees.add(k)

    def assert_flag(self, name: str, kind: str, k: Degree, value: bool) -> None:
        self._note(k)
        p = self.profile(name)
        if value:
            p.mark_true(kind, k, GIVEN)
        else:
            p.mark_false(kind, k, GIVEN)

    def assert_homology(self, name: str, k: int, value: bool) -> None:
        self._note(k)
        self._set(self.homology, (name, k), TRUE if value else FALSE, GIVEN)
        self.profile(name)

    def assert_h0(self, N: str, Q: str, n: Degree, value: bool) -> None:
        self._note(n)
        self._set(self.h0, (N, Q, n), TRUE if value else FALSE, GIVEN)

    def add_seq(self, N: str, G: str, Q: str) -> None:
        for x in (N, G, Q):
            self.profile(x)
        if (N, G, Q) not in self.seqs:
            self.seqs.append((N, G, Q))

    def add_fibre(self, P: str, N1: str, G1: str, N2: str, G2: str, Q: str) -> None:
        self.profile(P)
        self.add_seq(N1, G1, Q)
        self.add_seq(N2, G2, Q)
        self.fibres.append((P, N1, G1, N2, G2, Q))

    def add_product(self, P: str, factors: Sequence[str]) -> None:
        self.profile(P)
        for f in factors:
            self.profile(f)
        self.products[P] = list(factors)

    def assert_vs(self, P: str, k: int, value: bool) -> None:
        self._note(k)
        lo, hi = self.vs.get(P, (0, None))
        if value:
            lo = max(lo, k)
        else:
            hi = k if hi is None else min(hi, k)
        if hi is not None and lo >= hi:
            raise InconsistencyError(f"{P}: virtual surjection to {lo}-tuples asserted both true and false")
        self.vs[P] = (lo, hi)

    def add_finite_index(self, H: str, G: str) -> None:
        self.profile(H)
        self.profile(G)
        self.finite_index.append((H, G))

    def _set(self, table, key, value: Truth, provenance: str) -> bool:
        old = table.get(key)
        if old is not None:
            if old[0] is not value:
                raise InconsistencyError(f"{key} derived {value} by {provenance}, but {old[0]} ({old[1]})")
            return False
        table[key] = (value, provenance)
        return True

    # queries

    def homology_flag(self, name: str, k: int) -> Truth:
        if self.profile(name).flag("H", k) is TRUE:
            return TRUE
        v = self.homology.get((name, k))
        return v[0] if v else UNKNOWN

    def h0_flag(self, N: str, Q: str, n: int) -> Truth:
        for key in ((N, Q, n), (N, Q, INFINITE)):
            if key in self.h0:
                return self.h0[key][0]
        return UNKNOWN

    def query(self, name: str, kind: str, k: Degree) -> Tuple[Truth, Optional[str]]:
        if kind == "Hk":
            if self.profile(name).flag("H", k) is TRUE:
                return TRUE, self.profile(name).provenance("H", k)
            v = self.homology.get((name, k))
            return (v[0], v[1]) if v else (UNKNOWN, None)
        p = self.profile(name)
        return p.flag(kind, k), p.provenance(kind, k)

    def query_h0(self, N: str, Q: str, n: int) -> Tuple[Truth, Optional[str]]:
        for key in ((N, Q, n), (N, Q, INFINITE)):
            if key in self.h0:
                return self.h0[key]
        return UNKNOWN, None

    # engine

    def _horizon(self) -> int:
        return max([2, *self.given_degrees]) + 2

    def _fire(self, rule: str, conclusion: str, premises: str) -> None:
        self.trace.append(Firing(rule, conclusion, premises))

    def _mark(self, name: str, kind: str, k: Degree, rule: str, premises: str) -> bool:
        if self.profile(name).mark_true(kind, k, rule):
            self._fire(rule, f"{name} {kind}_{fmt_degree(k)}" if kind != "H" else f"H_k({name}) f.g. for k <= {fmt_degree(k)}", premises)
            return True
        return False

    def _step(self) -> bool:
        changed = False
        for name in sorted(self.profiles):
            for rule, kind, d, v in self.profiles[name].close():
                changed = True
                self._fire(rule, f"{name} {kind}_{fmt_degree(d)} {v}", "chain of finiteness properties")
        horizon = self._horizon()
        changed |= self._finite_index()
        for N, G, Q in self.seqs:
            changed |= self._lhs(N, G, Q, horizon)
        for fib in self.fibres:
            changed |= self._weak_n12(*fib)
        for P in sorted(self.products):
            changed |= self._vs(P)
        return changed

    def _finite_index(self) -> bool:
        changed = False
        for H, G in self.finite_index:
            ph, pg = self.profile(H), self.profile(G)
            for kind in ("F", "FP"):
                for a, pa, b in ((H, ph, G), (G, pg, H)):
                    d = pa.true_through(kind)
                    if d != 0:
                        changed |= self._mark(b, kind, d, FINITE_INDEX, f"{a} {kind}_{fmt_degree(d)}, [{G}:{H}] finite")
                    f = pa.false[kind]
                    if f is not None and self.profile(b).mark_false(kind, f.degree, FINITE_INDEX):
                        changed = True
                        self._fire(FINITE_INDEX, f"{b} {kind}_{f.degree} FALSE", f"{a} {kind}_{f.degree} FALSE, [{G}:{H}] finite")
            # weak FP passes from a group to its finite-index subgroups only
            d = pg.true_through("wFP")
            if d != 0:
                changed |= self._mark(H, "wFP", d, FINITE_INDEX, f"{G} wFP_{fmt_degree(d)}, [{G}:{H}] finite")
            f = ph.false["wFP"]
            if f is not None and pg.mark_false("wFP", f.degree, FINITE_INDEX):
                changed = True
                self._fire(FINITE_INDEX, f"{G} wFP_{f.degree} FALSE", f"{H} wFP_{f.degree} FALSE, [{G}:{H}] finite")
        return changed

    def _lhs(self, N: str, G: str, Q: str, horizon: int) -> bool:
        changed = False
        pN, pG, pQ = self.profile(N), self.profile(G), self.profile(Q)
        # finite generation of H_k(Gamma)
        for (n0, q0, n), (v, _) in sorted(self.h0.items(), key=lambda kv: str(kv[0])):
            if (n0, q0) != (N, Q) or v is not TRUE:
                continue
            if n is INFINITE:
                # h0 holds in every degree: take the largest n the other hypotheses allow
                n = _min(pQ.true_through("FP"), _plus(pN.true_through("wFP"), 1))
            got = lhs_propagate(pN, pQ, TRUE, n)
            if got is not None and got != 0:
                changed |= self._mark(
                    G, "H", got, LHS_FG,
                    f"{Q} FP_{fmt_degree(got)}, {N} wFP_{fmt_degree(_minus(got, 1))}, H_0({Q}, H_{fmt_degree(got)}({N})) f.g.",
                )
        # coinvariants against H_{n+1}(Q)
        for n in range(1, horizon + 1):
            h0, hQ = lhs_converse(pN, pG, pQ, n, self.homology_flag(Q, n + 1), self.h0_flag(N, Q, n))
            hyp = f"{N} wFP_{n - 1}, {G} wFP_{n}, {Q} FP_{n}"
            if h0 is TRUE and self._set(self.h0, (N, Q, n), TRUE, LHS_TRANSFER):
                changed = True
                self._fire(LHS_TRANSFER, f"H_0({Q}, H_{n}({N})) f.g.", f"{hyp}, H_{n + 1}({Q}) f.g.")
            if hQ is TRUE and self.homology_flag(Q, n + 1) is not TRUE:
                self._set(self.homology, (Q, n + 1), TRUE, LHS_CONVERSE)
                changed = True
                self._fire(LHS_CONVERSE, f"H_{n + 1}({Q}) f.g.", f"{hyp}, {G} wFP_{n + 1}, H_0({Q}, H_{n}({N})) f.g.")
        return changed

    def _weak_n12(self, P: str, N1: str, G1: str, N2: str, G2: str, Q: str) -> bool:
        changed = False
        for a, b, c in ((N1, G1, G2), (N2, G2, G1)):
            got = weak_n12(self.profile(a), self.profile(b), self.profile(c), self.profile(Q))
            if got is None:
                continue
            n = _minus(got, 1)
            premises = (
                f"{a} wFP_{fmt_degree(n)}, {b} wFP_{fmt_degree(got)}, {c} FP_{fmt_degree(got)}, "
                f"{Q} FP_{fmt_degree(_plus(got, 1))}"
            )
            changed |= self._mark(P, "wFP", got, WEAK_N12, premises)
        return changed

    def _vs(self, P: str) -> bool:
        factors = self.products[P]
        profs = [self.profile(f) for f in factors]
        lo, _ = self.vs.get(P, (0, None))
        changed = False
        k = _min(lo, *[p.true_through("FP") for p in profs])
        if k is not INFINITE and k >= 2:
            res = weak_vsc(profs, k, True)
            premises = f"factors {', '.join(factors)} FP_{k}, {P} virtually surjects to {k}-tuples"
            if res is not None and self.profile(P).mark_true("wFP", k, WEAK_VS):
                changed = True
                self.trace.append(Firing(WEAK_VS, f"{P} wFP_{k}", premises, res[1]))
        if lo >= 1 and P in self.nilpotent_quotients and all(_le(1, p.true_through("FP")) for p in profs):
            changed |= self._mark(
                P, "F", 1, VS_FACTORS,
                f"factors {', '.join(factors)} finitely generated, {P} virtually surjects to factors, "
                "quotients by the factor intersections virtually nilpotent",
            )
        return changed

    def derive(self, max_rounds: int = 1000) -> List[Firing]:
        start = len(self.trace)
        for _ in range(max_rounds):
            if not self._step():
                return self.trace[start:]
        raise InconsistencyError("rule engine did not reach a fixed point")

    def summary(self) -> List[str]:
        out = []
        for name in sorted(self.profiles):
            out += self.profiles[name].lines()
        for (name, k), (v, prov) in sorted(self.homology.items()):
            out.append(f"{name} H_{k} f.g.: {v} ({prov})")
        for (N, Q, n), (v, prov) in sorted(self.h0.items(), key=lambda kv: str(kv[0])):
            out.append(f"H_0({Q}, H_{fmt_degree(n)}({N})) f.g.: {v} ({prov})")
        return out
