"""Batch command-line interface: ``subdirect <area> <command> ...``.

Reports are ``key: value`` lines on stdout.  Exit status is 0 on success,
1 when an input or precondition is rejected (including usage errors), and 2
when an identity that must hold fails.
"""

from __future__ import annotations

import argparse
import sys
from typing import Callable, List, Optional, Sequence

from .errors import InconsistencyError, ParseError, PreconditionError, SubdirectError
from .formats import answer, load_facts, load_kernel, load_map, load_sdp, load_words
from .generators import fibre_generators
from .homology import coinvariants, format_invariants, h1, rs_presentation
from .product import ProductSubgroup, decompose, exchange, fibre_product, kernel_vs_step, split_section, virtually_surjects
from .quotients import AbelianGroup
from .reproduce import DEFAULT_SEED, SUITES, run_suite
from .sigma import Character, finiteness_length, s_gamma_p, sigma_member
from .stallings import SubgroupGraph
from .witness import class_bound, commutator_witness, partition_indices, quotient_class, stallings_bieri_form
from .words import FreeGroup, abelianize, commutator, iterated_commutator

Out = Callable[[str], None]


class UsageError(PreconditionError):
    pass


class _Parser(argparse.ArgumentParser):
    """Usage errors are precondition failures (exit 1), not argparse's 2."""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _fmt_set(J: Sequence[int]) -> str:
    return "{" + ",".join(str(j + 1) for j in J) + "}"


def _subset(text: str, n: int, what: str = "subset") -> List[int]:
    """'1,3' -> [0, 2]; indices are 1-based on the command line."""
    try:
        J = [int(t) - 1 for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"{what} must be comma-separated factor numbers, got {text!r}") from None
    if not J or any(not 0 <= j < n for j in J):
        raise UsageError(f"{what} {text!r} must name factors among 1..{n}")
    return sorted(set(J))


def _bool(b: bool) -> str:
    return "true" if b else "false"


def _free_group(args) -> FreeGroup:
    if args.labels:
        return FreeGroup(len(args.labels.split(",")), [t.strip() for t in args.labels.split(",")])
    return FreeGroup(args.rank)


# fg


def cmd_fg(args, out: Out) -> None:
    F = _free_group(args)
    ws = [F.parse(t, source=f"argument {i}") for i, t in enumerate(args.words, 1)]
    op = args.op
    if op == "reduce":
        for w in ws:
            out(f"word: {w}")
    elif op == "multiply":
        acc = F.identity
        for w in ws:
            acc = acc * w
        out(f"product: {acc}")
    elif op == "invert":
        for w in ws:
            out(f"inverse: {w.inverse()}")
    elif op == "commutator":
        if len(ws) < 2:
            raise UsageError("commutator needs at least two words")
        out(f"commutator: {iterated_commutator(ws) if len(ws) > 2 else commutator(*ws)}")
    elif op == "abelianize":
        for w in ws:
            out("vector: " + " ".join(str(x) for x in abelianize(w)))


# subgroup


def cmd_subgroup(args, out: Out) -> None:
    F, gens = load_words(args.file)
    H = SubgroupGraph.fold(F, gens)
    op = args.op
    if op == "show":
        for line in H.dump().splitlines():
            out(line)
    elif op == "contains":
        for t in args.word:
            w = F.parse(t, source="argument")
            out(f"contains {w}: {_bool(H.contains(w))}")
    elif op == "index":
        out(f"index: {H.index()}")
    elif op == "basis":
        basis = H.basis()
        out(f"rank: {len(basis)}")
        for w in basis:
            out(f"basis: {w}")
    elif op == "cosets":
        table = H.coset_table()
        out(f"cosets: {len(table)}")
        out("columns: " + " ".join(F.labels))
        for c, row in enumerate(table):
            out(f"coset {c}: " + " ".join(str(x) for x in row))


# sdp


def _report_subgroup(P: ProductSubgroup, out: Out) -> None:
    out(f"subgroup: {P.describe()}")
    out(f"index: {P.index()}")
    out(f"subdirect: {_bool(P.is_subdirect())}")


def cmd_sdp(args, out: Out) -> None:
    op = args.op
    if op in ("fibre", "generators", "section"):
        q1, q2 = load_map(args.q1), load_map(args.q2)
        if op == "fibre":
            out("statement: a subdirect product of two groups is a fibre product")
            _report_subgroup(fibre_product(q1, q2), out)
        elif op == "generators":
            for line in fibre_generators(q1, q2).lines():
                out(line)
        else:
            sigma = [q2.domain.parse(t, source="--sigma") for t in args.sigma.split(";")] if args.sigma.strip() else []
            s = split_section(q1, q2, sigma)
            out("statement: a section of the second map splits the fibre product over the first factor")
            for g in q1.domain.gens():
                img = s(g)
                out(f"section {g}: {s.fibre.ambient.format(img)} in P: {_bool(s.fibre.contains(img))}")
        return
    P = load_sdp(args.file)
    n = P.n
    if op == "show":
        _report_subgroup(P, out)
    elif op == "project":
        J = _subset(args.subset, n)
        Q = P.projection(J)
        out(f"projection: p_{_fmt_set(J)}")
        out(f"subgroup: {Q.describe()}")
        out(f"index: {Q.index()}")
    elif op == "intersect":
        J = _subset(args.subset, n)
        Q = P.intersection_with(J)
        out(f"intersection: P meet Gamma_{_fmt_set(J)}")
        out(f"subgroup: {Q.describe()}")
        out(f"index: {Q.index()}")
    elif op == "check-vs":
        for line in virtually_surjects(P, args.k).lines():
            out(line)
    elif op == "kernel-step":
        out(f"statement: N_{_fmt_set(range(n - 1))} virtually surjects to {args.k - 1}-tuples")
        for line in kernel_vs_step(P, args.k).lines():
            out(line)
    elif op == "decompose":
        D = decompose(P)
        out("statement: P is the fibre product of T = p_{1..n-1}(P) and the last factor")
        out(f"T: {D.T.describe()}")
        out(f"seq1: {D.seq1.describe()}")
        out(f"seq2: {D.seq2.describe()}")
    elif op == "contains":
        for t in args.element:
            g = P.ambient.parse(t, source="argument")
            out(f"contains {P.ambient.format(g)}: {_bool(P.contains(g))}")
    elif op == "exchange":
        I, J = _subset(args.I, n, "I"), _subset(args.J, n, "J")
        res = exchange(P, I, J)
        out("statement: p_{I meet J}(P meet Gamma_I) = p_J(P) meet Gamma_{I meet J}")
        out(f"I: {_fmt_set(I)}")
        out(f"J: {_fmt_set(J)}")
        out(f"lhs: {res.lhs.constraint.describe()}")
        out(f"rhs: {res.rhs.constraint.describe()}")
        out(f"equal: {_bool(res.equal)}")


# sigma


def _character(text: str) -> Character:
    blocks = []
    for part in text.split("|"):
        try:
            blocks.append([int(t) for t in part.split()])
        except ValueError:
            raise UsageError(f"character blocks must be integers, got {part.strip()!r}") from None
    return Character([len(b) for b in blocks], blocks)


def cmd_sigma(args, out: Out) -> None:
    op = args.op
    if op == "member":
        chi = _character(args.chi)
        out(f"character: {chi}")
        out(f"k: {args.k}")
        out(f"membership: {sigma_member(chi, args.k)}")
        return
    spec = load_kernel(args.file)
    if op == "length":
        out(f"ranks: {' '.join(str(r) for r in spec.ranks)}")
        out(f"finiteness length: {finiteness_length(spec)}")
    elif op == "family":
        for line in s_gamma_p(spec).lines():
            out(line)


# witness


def cmd_witness(args, out: Out) -> None:
    op = args.op
    if op == "bound":
        out(f"class bound: {class_bound(args.n, args.k)}")
        return
    path = args.p or args.file
    if not path:
        raise UsageError(f"witness {op} needs a subgroup file")
    P = load_sdp(path)
    if op == "commutator":
        F = P.ambient.factors[0]
        gammas = [F.parse(t, source="--gammas") for t in args.gammas.split(";")]
        report = commutator_witness(P, args.k, gammas)
        for line in report.lines():
            out(line)
    elif op == "class":
        parts = partition_indices(P.n, args.k)
        out("statement: Gamma_1' / (Gamma_1' meet N_1) is nilpotent of bounded class")
        out("partition: " + " ".join(_fmt_set(b) for b in parts))
        out(f"class: {quotient_class(P, parts)}")
        out(f"class bound: {class_bound(P.n, args.k)}")
    elif op == "stallings-bieri":
        form = stallings_bieri_form(P, args.k)
        out("statement: P is virtually the kernel of a map to an abelian group")
        out(f"form: {form.description}")
        for i, H in enumerate(form.subgroups, 1):
            out(f"subgroup {i}: index {H.index()}, rank {H.rank()}")


# hom


def _matrix(text: str, what: str) -> List[List[int]]:
    try:
        return [[int(t) for t in row.split()] for row in text.split(";")]
    except ValueError:
        raise UsageError(f"{what} must be integer rows separated by ';', got {text!r}") from None


def cmd_hom(args, out: Out) -> None:
    op = args.op
    if op == "coinvariants":
        A = AbelianGroup(args.rank, [r for t in args.relation for r in _matrix(t, "--relation")])
        action = [_matrix(t, "--action") for t in args.action]
        free, tors = coinvariants(A, action)
        out(f"module: {A.describe()}")
        out(f"action matrices: {len(action)}")
        out(f"coinvariants: {format_invariants(free, tors)}")
        out(f"free rank: {free}")
        out("torsion: " + (" ".join(str(t) for t in tors) or "none"))
        return
    if args.fibre:
        P = load_sdp(args.fibre)
    elif args.q1 and args.q2:
        P = fibre_product(load_map(args.q1), load_map(args.q2))
    else:
        raise UsageError(f"hom {op} needs --fibre FILE or --q1 and --q2")
    pres = rs_presentation(P, simplify_result=not args.raw)
    out(f"index: {pres.index}")
    if op == "presentation":
        for line in pres.lines():
            out(line)
        if pres.elements is not None:
            for label, g in zip(pres.labels, pres.elements):
                out(f"element {label}: {P.ambient.format(g)}")
    elif op == "h1":
        free, tors = h1(pres)
        out(f"presentation: {pres.ngens} generators, {len(pres.relators)} relators")
        out(f"H_1: {format_invariants(free, tors)}")
        out(f"free rank: {free}")
        out("torsion: " + (" ".join(str(t) for t in tors) or "none"))


# flags


def cmd_flags(args, out: Out) -> None:
    kb, queries = load_facts(args.facts)
    firings = kb.derive()
    out(f"firings: {len(firings)}")
    for f in firings:
        for line in f.lines():
            out(line)
    for q in queries:
        value, prov = answer(kb, q)
        out(f"query {q.describe()}: {value} ({prov or '-'})")
    if args.summary:
        for line in kb.summary():
            out(line)


# reproduce


def cmd_reproduce(args, out: Out) -> int:
    names = list(SUITES) if args.suite == "all" else [args.suite]
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all")
    failed = 0
    for name in names:
        res = run_suite(name, args.seed)
        for line in res.lines:
            out(line)
        out(f"summary: {res.summary()}")
        failed += not res.ok
    return 1 if failed else 0


def _ops(sub, area: str, help: str):
    parser = sub.add_parser(area, help=help)
    return parser.add_subparsers(dest="op", parser_class=_Parser, required=True)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="subdirect", description="Subgroups of direct products of free groups.")
    sub = p.add_subparsers(dest="area", parser_class=_Parser, required=True)

    ops = _ops(sub, "fg", "free group word operations")
    for op in ("reduce", "multiply", "invert", "commutator", "abelianize"):
        c = ops.add_parser(op)
        c.add_argument("words", nargs="+")
        c.add_argument("--rank", type=int, default=2)
        c.add_argument("--labels", help="comma-separated generator labels")

    ops = _ops(sub, "subgroup", "finitely generated subgroups of a free group (.word files)")
    for op in ("show", "contains", "index", "basis", "cosets"):
        c = ops.add_parser(op)
        c.add_argument("file")
        if op == "contains":
            c.add_argument("word", nargs="+")

    ops = _ops(sub, "sdp", "subgroups of products (.sdp and .map files)")
    for op in ("show", "decompose"):
        ops.add_parser(op).add_argument("file")
    for op in ("project", "intersect"):
        c = ops.add_parser(op)
        c.add_argument("file")
        c.add_argument("--subset", required=True, help="comma-separated factor numbers")
    for op in ("check-vs", "kernel-step"):
        c = ops.add_parser(op)
        c.add_argument("file")
        c.add_argument("--k", type=int, required=True)
    c = ops.add_parser("contains")
    c.add_argument("file")
    c.add_argument("element", nargs="+", help="coordinates separated by ';'")
    c = ops.add_parser("exchange")
    c.add_argument("file")
    c.add_argument("--I", required=True)
    c.add_argument("--J", required=True)
    for op in ("fibre", "generators", "section"):
        c = ops.add_parser(op)
        c.add_argument("--q1", required=True)
        c.add_argument("--q2", required=True)
        if op == "section":
            c.add_argument("--sigma", required=True, help="';'-separated section images in the second factor")

    ops = _ops(sub, "sigma", "finiteness length of kernels to free abelian groups (.kernel files)")
    ops.add_parser("length").add_argument("file")
    ops.add_parser("family").add_argument("file")
    c = ops.add_parser("member")
    c.add_argument("--chi", required=True, help='character blocks, e.g. "1 1 | 0 0"')
    c.add_argument("--k", type=int, required=True)

    ops = _ops(sub, "witness", "nilpotency witnesses")
    for op in ("commutator", "class", "stallings-bieri"):
        c = ops.add_parser(op)
        c.add_argument("file", nargs="?")
        c.add_argument("--p", help="subgroup file (alternative to the positional file)")
        c.add_argument("--k", type=int, required=True)
        if op == "commutator":
            c.add_argument("--gammas", required=True, help="';'-separated words in the first factor")
    c = ops.add_parser("bound")
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--k", type=int, required=True)

    ops = _ops(sub, "hom", "presentations and homology")
    for op in ("h1", "presentation"):
        c = ops.add_parser(op)
        c.add_argument("--fibre", help="subgroup file")
        c.add_argument("--q1")
        c.add_argument("--q2")
        c.add_argument("--raw", action="store_true", help="skip Tietze simplification")
    c = ops.add_parser("coinvariants")
    c.add_argument("--rank", type=int, required=True)
    c.add_argument("--action", action="append", default=[], help="matrix rows separated by ';'")
    c.add_argument("--relation", action="append", default=[], help="relation rows separated by ';'")

    ops = _ops(sub, "flags", "finiteness flag propagation (.facts files)")
    c = ops.add_parser("derive")
    c.add_argument("--facts", required=True)
    c.add_argument("--summary", action="store_true", help="print every profile after derivation")

    rp = sub.add_parser("reproduce", help="run an acceptance suite")
    rp.add_argument("suite", help=f"one of {', '.join(SUITES)}, or all")
    rp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return p


HANDLERS = {
    "fg": cmd_fg,
    "subgroup": cmd_subgroup,
    "sdp": cmd_sdp,
    "sigma": cmd_sigma,
    "witness": cmd_witness,
    "hom": cmd_hom,
    "flags": cmd_flags,
    "reproduce": cmd_reproduce,
}


def run(argv: Sequence[str], out: Optional[Out] = None, err: Optional[Out] = None) -> int:
    """Execute one command line; returns the exit status."""
    out = out or (lambda s: print(s))
    err = err or (lambda s: print(s, file=sys.stderr))
    try:
        args = build_parser().parse_args(list(argv))
        status = HANDLERS[args.area](args, out)
        return status or 0
    except InconsistencyError as exc:
        err(f"inconsistency: {exc}")
        return 2
    except ParseError as exc:
        err(f"parse error: {exc}")
        return 1
    except (SubdirectError, OSError) as exc:
        # preconditions, unsupported representations and exhausted search caps
        err(f"error: {exc}")
        return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    # argparse's own --help exits via SystemExit(0), which is left alone
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
