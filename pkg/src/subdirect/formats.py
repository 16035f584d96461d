"""Line-based input formats: .word, .map, .sdp, .kernel and .facts.

Blank lines and ``#`` comments are ignored.  Directives are ``key: value``
(``.facts`` uses bare space-separated statements).  Every error carries the
source name, line and column of the offending token.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .errors import INFINITE, ParseError, PreconditionError
from .flags import KINDS, KnowledgeBase, fmt_degree
from .product import (
    AbelianCoordinates,
    FiniteConstraint,
    LatticeConstraint,
    NilpotentCoordinates,
    ProductSubgroup,
    combine_clauses,
)
from .quotients import AbelianGroup, FiniteGroup, Nilpotent2Group, QuotientMap
from .sigma import KernelSpec
from .words import FreeGroup, ProductGroup, Word


@dataclass
class Line:
    number: int
    text: str
    offset: int  # column of text[0], 1-based

    def col(self, token_start: int = 0) -> int:
        return self.offset + token_start


class Reader:
    def __init__(self, text: str, source: str = ""):
        self.source = source
        self.lines: List[Line] = []
        for i, raw in enumerate(text.splitlines(), start=1):
            body = raw.split("#", 1)[0]
            stripped = body.strip()
            if stripped:
                self.lines.append(Line(i, stripped, body.index(stripped) + 1))
        self.pos = 0

    def error(self, msg: str, line: Optional[Line] = None, col: int = 0) -> ParseError:
        if line is None:
            return ParseError(msg, 0, 0, self.source)
        return ParseError(msg, line.number, col or line.offset, self.source)

    def peek(self) -> Optional[Line]:
        return self.lines[self.pos] if self.pos < len(self.lines) else None

    def next(self) -> Line:
        line = self.peek()
        if line is None:
            raise self.error("unexpected end of input")
        self.pos += 1
        return line

    def directive(self, line: Line) -> Tuple[str, str, int]:
        """(key, value, column of value) for ``key: value``."""
        key, sep, value = line.text.partition(":")
        if not sep:
            raise self.error(f"expected 'key: value', got {line.text!r}", line)
        stripped = value.strip()
        vcol = line.offset + len(key) + 1 + (value.index(stripped) if stripped else 0)
        return key.strip(), stripped, vcol


def _ints(reader: Reader, line: Line, text: str, col: int) -> List[int]:
    out = []
    for m in re.finditer(r"\S+", text):
        try:
            out.append(int(m.group()))
        except ValueError:
            raise reader.error(f"expected an integer, got {m.group()!r}", line, col + m.start()) from None
    return out


def _read(path) -> Tuple[str, str]:
    p = Path(path)
    try:
        return p.read_text(), str(p)
    except OSError as exc:
        raise PreconditionError(f"cannot read {p}: {exc.strerror}") from None


def _group_header(reader: Reader, line: Line, key: str, value: str, vcol: int) -> FreeGroup:
    if key == "rank":
        v = _ints(reader, line, value, vcol)
        if len(v) != 1 or v[0] < 1:
            raise reader.error("rank must be one positive integer", line, vcol)
        return FreeGroup(v[0])
    labels = value.split()
    try:
        return FreeGroup(len(labels), labels)
    except PreconditionError as exc:
        raise reader.error(str(exc), line, vcol) from None


# .word


def parse_words(text: str, source: str = "") -> Tuple[FreeGroup, List[Word]]:
    """``rank: m`` or ``labels: a b ...``, then one word per line."""
    reader = Reader(text, source)
    first = reader.next()
    key, value, vcol = reader.directive(first)
    if key not in ("rank", "labels"):
        raise reader.error("a word file starts with 'rank:' or 'labels:'", first)
    F = _group_header(reader, first, key, value, vcol)
    words = []
    while reader.peek() is not None:
        line = reader.next()
        words.append(_parse_word(reader, F, line, line.text, line.offset))
    return F, words


def _parse_word(reader: Reader, F: FreeGroup, line: Line, text: str, col: int) -> Word:
    try:
        return F.parse(text)
    except ParseError as exc:
        # the word parser reports columns relative to the word itself
        raise reader.error(str(exc), line, col + max(exc.column, 1) - 1) from None


def load_words(path) -> Tuple[FreeGroup, List[Word]]:
    return parse_words(*_read(path))


# targets and images (shared by .map and .sdp)


@dataclass
class TargetSpec:
    kind: str
    group: object
    parse_element: Callable[[Reader, Line, str, int], object]


def _target(reader: Reader, line: Line, value: str, vcol: int, extra: Dict[str, List[Tuple[Line, str, int]]]) -> TargetSpec:
    parts = value.split()
    if not parts:
        raise reader.error("empty target", line, vcol)
    kind, args = parts[0], parts[1:]
    nums = _ints(reader, line, " ".join(args), vcol + len(kind) + 1)

    def need(k: int) -> List[int]:
        if len(nums) != k:
            raise reader.error(f"target '{kind}' takes {k} integer argument(s)", line, vcol)
        return nums

    if kind == "cyclic":
        (n,) = need(1)
        G = FiniteGroup.cyclic(n)
        return TargetSpec("finite", G, lambda r, l, t, c: _element_index(r, l, t, c, G.order))
    if kind == "table":
        need(0)
        rows = [_ints(reader, l, t, c) for l, t, c in extra.get("row", [])]
        try:
            G = FiniteGroup(rows)
        except PreconditionError as exc:
            raise reader.error(str(exc), line, vcol) from None
        return TargetSpec("finite", G, lambda r, l, t, c: _element_index(r, l, t, c, G.order))
    if kind in ("symmetric", "permutations"):
        (d,) = need(1)
        if kind == "symmetric":
            G = FiniteGroup.symmetric(d) if d > 1 else FiniteGroup.from_permutations([tuple(range(d))])
            return TargetSpec("finite", G, lambda r, l, t, c: _permutation(r, l, t, c, d, G))
        return TargetSpec("permutations", d, lambda r, l, t, c: _perm_tuple(r, l, t, c, d))
    if kind == "abelian":
        (g,) = need(1)
        rels = [_ints(reader, l, t, c) for l, t, c in extra.get("relation", [])]
        for (l, t, c), r in zip(extra.get("relation", []), rels):
            if len(r) != g:
                raise reader.error(f"relation needs {g} entries", l, c)
        A = AbelianGroup(g, rels)
        return TargetSpec("abelian", A, lambda r, l, t, c: _vector(r, l, t, c, g))
    if kind == "nilpotent":
        (m,) = need(1)
        T = Nilpotent2Group(m)
        return TargetSpec("nilpotent", T, lambda r, l, t, c: _nilpotent(r, l, t, c, T))
    raise reader.error(f"unknown target type {kind!r}", line, vcol)


def _element_index(reader, line, text, col, order):
    vals = _ints(reader, line, text, col)
    if len(vals) != 1 or not 0 <= vals[0] < order:
        raise reader.error(f"expected an element index in 0..{order - 1}", line, col)
    return vals[0]


def _perm_tuple(reader, line, text, col, d):
    p = tuple(_ints(reader, line, text, col))
    if sorted(p) != list(range(d)):
        raise reader.error(f"expected a permutation of 0..{d - 1}", line, col)
    return p


def _permutation(reader, line, text, col, d, G):
    p = _perm_tuple(reader, line, text, col, d)
    return G.permutations.index(p)


def _vector(reader, line, text, col, g):
    v = _ints(reader, line, text, col)
    if len(v) != g:
        raise reader.error(f"expected {g} integers", line, col)
    return tuple(v)


def _nilpotent(reader, line, text, col, T: Nilpotent2Group):
    a_text, bar, b_text = text.partition("|")
    a = _vector(reader, line, a_text, col, T.m)
    b = _vector(reader, line, b_text, col + len(a_text) + 1, T.npairs) if bar else (0,) * T.npairs
    return T.element((a, b))


def _split_images(text: str, col: int) -> List[Tuple[str, int]]:
    out = []
    start = 0
    for piece in text.split(","):
        lead = len(piece) - len(piece.lstrip())
        out.append((piece.strip(), col + start + lead))
        start += len(piece) + 1
    return out


def _finish_target(spec: TargetSpec, images: List[object]) -> Tuple[object, List[object]]:
    """Permutation targets become the closure of the images."""
    if spec.kind != "permutations":
        return spec.group, images
    G = FiniteGroup.from_permutations(images)
    return G, list(G.generator_indices)


# .map


def parse_map(text: str, source: str = "") -> QuotientMap:
    """``domain:`` (labels) or ``rank:``, ``target:``, then ``image <label>: <element>``."""
    reader = Reader(text, source)
    F = None
    target_line = None
    extra: Dict[str, List[Tuple[Line, str, int]]] = {}
    image_lines: List[Tuple[Line, str, str, int]] = []
    while reader.peek() is not None:
        line = reader.next()
        key, value, vcol = reader.directive(line)
        if key in ("domain", "labels", "rank"):
            F = _group_header(reader, line, "rank" if key == "rank" else "labels", value, vcol)
        elif key == "target":
            target_line = (line, value, vcol)
        elif key in ("relation", "row"):
            extra.setdefault(key, []).append((line, value, vcol))
        elif key.startswith("image"):
            image_lines.append((line, key[5:].strip(), value, vcol))
        else:
            raise reader.error(f"unknown directive {key!r}", line)
    if F is None or target_line is None:
        raise reader.error("a map file needs 'domain:' and 'target:'")
    spec = _target(reader, *target_line, extra)
    images: List[object] = [None] * F.rank
    for line, label, value, vcol in image_lines:
        if label not in F.labels:
            raise reader.error(f"unknown generator {label!r}", line)
        images[F.label_index(label)] = spec.parse_element(reader, line, value, vcol)
    missing = [F.labels[i] for i, x in enumerate(images) if x is None]
    if missing:
        raise reader.error(f"no image for generator(s) {', '.join(missing)}")
    group, images = _finish_target(spec, images)
    return QuotientMap(F, group, images)


def load_map(path) -> QuotientMap:
    return parse_map(*_read(path))


# .sdp


@dataclass
class _Clause:
    line: Line
    kind: str
    items: List[Tuple[Line, str, str, int]] = field(default_factory=list)


def parse_sdp(text: str, source: str = "") -> ProductSubgroup:
    """``ranks:`` then one or more ``clause: kernel|finite|nilpotent`` blocks.

    kernel:    ``row:`` lines of M (sum of ranks columns), optional ``relation:``
    finite:    ``target:``, ``images <i>:`` per factor (comma-separated),
               ``subgroup: diagonal|kernel|tuples`` and ``tuple:`` lines
    nilpotent: ``m:``, ``images <i>:`` per factor, and ``kernel-row:`` or
               ``basis-row:`` lines in concatenated Mal'cev coordinates
    """
    reader = Reader(text, source)
    first = reader.next()
    key, value, vcol = reader.directive(first)
    if key != "ranks":
        raise reader.error("an sdp file starts with 'ranks:'", first)
    ranks = _ints(reader, first, value, vcol)
    if not ranks or any(r < 1 for r in ranks):
        raise reader.error("ranks must be positive integers", first, vcol)
    ambient = ProductGroup.of_ranks(ranks)
    label = "P"
    clauses: List[_Clause] = []
    while reader.peek() is not None:
        line = reader.next()
        key, value, vcol = reader.directive(line)
        if key == "clause":
            clauses.append(_Clause(line, value))
        elif key == "label":
            label = value
        elif not clauses:
            raise reader.error("directive before the first 'clause:'", line)
        else:
            clauses[-1].items.append((line, key, value, vcol))
    if not clauses:
        raise reader.error("no clauses")
    built = []
    kernel_rows = None
    for cl in clauses:
        if cl.kind == "kernel":
            c, kernel_rows = _kernel_clause(reader, cl, ambient)
        elif cl.kind == "finite":
            c = _finite_clause(reader, cl, ambient)
        elif cl.kind == "nilpotent":
            c = _nilpotent_clause(reader, cl, ambient)
        else:
            raise reader.error(f"unknown clause type {cl.kind!r}", cl.line)
        built.append(c)
    P = ProductSubgroup(ambient, combine_clauses(built), label)
    if len(clauses) == 1 and kernel_rows is not None:
        P.kernel_matrix = kernel_rows
    return P


def _kernel_clause(reader: Reader, cl: _Clause, ambient: ProductGroup):
    total = sum(ambient.ranks)
    rows, rels = [], []
    for line, key, value, vcol in cl.items:
        if key not in ("row", "relation"):
            raise reader.error(f"unknown kernel directive {key!r}", line)
        v = _ints(reader, line, value, vcol)
        if key == "row":
            if len(v) != total:
                raise reader.error(f"row needs {total} entries, got {len(v)}", line, vcol)
            rows.append(v)
        else:
            rels.append(v)
    if not rows:
        raise reader.error("kernel clause has no rows", cl.line)
    for line, key, value, vcol in cl.items:
        if key == "relation" and len(_ints(reader, line, value, vcol)) != len(rows):
            raise reader.error(f"relation needs {len(rows)} entries", line, vcol)
    coords = [AbelianCoordinates(F) for F in ambient.factors]
    return LatticeConstraint.from_kernel(coords, rows, rels), rows


def _factor_images(reader: Reader, cl: _Clause, ambient: ProductGroup, parse) -> List[List[object]]:
    per: List[Optional[List[object]]] = [None] * ambient.n
    for line, key, value, vcol in cl.items:
        if not key.startswith("images"):
            continue
        idx = key[6:].strip()
        if not idx.isdigit() or not 1 <= int(idx) <= ambient.n:
            raise reader.error(f"'images <i>:' needs a factor number in 1..{ambient.n}", line)
        i = int(idx) - 1
        pieces = _split_images(value, vcol)
        if len(pieces) != ambient.ranks[i]:
            raise reader.error(f"factor {i + 1} has rank {ambient.ranks[i]}, got {len(pieces)} images", line, vcol)
        per[i] = [parse(reader, line, t, c) for t, c in pieces]
    missing = [i + 1 for i, x in enumerate(per) if x is None]
    if missing:
        raise reader.error(f"no images for factor(s) {missing}", cl.line)
    return per


def _finite_clause(reader: Reader, cl: _Clause, ambient: ProductGroup):
    target = None
    extra: Dict[str, List[Tuple[Line, str, int]]] = {}
    mode, tuples = "diagonal", []
    for line, key, value, vcol in cl.items:
        if key == "target":
            target = (line, value, vcol)
        elif key in ("row", "relation"):
            extra.setdefault(key, []).append((line, value, vcol))
        elif key == "subgroup":
            if value not in ("diagonal", "kernel", "tuples"):
                raise reader.error("subgroup must be diagonal, kernel or tuples", line, vcol)
            mode = value
        elif key == "tuple":
            tuples.append((line, value, vcol))
        elif not key.startswith("images"):
            raise reader.error(f"unknown finite-clause directive {key!r}", line)
    if target is None:
        raise reader.error("finite clause needs 'target:'", cl.line)
    spec = _target(reader, *target, extra)
    if spec.kind not in ("finite", "permutations"):
        raise reader.error("finite clause needs a finite target", target[0], target[2])
    per = _factor_images(reader, cl, ambient, spec.parse_element)
    if spec.kind == "permutations":
        G = FiniteGroup.from_permutations([p for imgs in per for p in imgs])
        per = [[G.permutations.index(p) for p in imgs] for imgs in per]
    else:
        G = spec.group
    maps = [QuotientMap(F, G, imgs) for F, imgs in zip(ambient.factors, per)]
    for i, q in enumerate(maps):
        if not q.is_surjective():
            raise reader.error(f"map on factor {i + 1} is not onto the target", cl.line)
    n = ambient.n
    if mode == "diagonal":
        S = {(x,) * n for x in G.elements()}
    elif mode == "kernel":
        S = set()
        _product_kernel(G, n, [], G.identity, S)
    else:
        S = set()
        for line, value, vcol in tuples:
            t = tuple(_ints(reader, line, value, vcol))
            if len(t) != n or any(not 0 <= x < G.order for x in t):
                raise reader.error(f"tuple needs {n} element indices in 0..{G.order - 1}", line, vcol)
            S.add(t)
    try:
        return FiniteConstraint(maps, S)
    except PreconditionError as exc:
        raise reader.error(str(exc), cl.line) from None


def _product_kernel(G: FiniteGroup, n: int, prefix: List[int], acc: int, out: set) -> None:
    """All n-tuples with ordered product the identity."""
    if len(prefix) == n - 1:
        out.add(tuple(prefix) + (G.inv(acc),))
        return
    for x in G.elements():
        _product_kernel(G, n, prefix + [x], G.mul(acc, x), out)


def _nilpotent_clause(reader: Reader, cl: _Clause, ambient: ProductGroup):
    m = None
    kernel_rows, basis_rows = [], []
    for line, key, value, vcol in cl.items:
        if key == "m":
            v = _ints(reader, line, value, vcol)
            m = v[0] if len(v) == 1 else None
    if not m or m < 1:
        raise reader.error("nilpotent clause needs 'm:' with a positive rank", cl.line)
    T = Nilpotent2Group(m)
    per = _factor_images(reader, cl, ambient, lambda r, l, t, c: _nilpotent(r, l, t, c, T))
    maps = [QuotientMap(F, T, imgs) for F, imgs in zip(ambient.factors, per)]
    coords = [NilpotentCoordinates(q) for q in maps]
    total = sum(c.dim for c in coords)
    for line, key, value, vcol in cl.items:
        if key in ("kernel-row", "basis-row"):
            v = _ints(reader, line, value, vcol)
            if len(v) != total:
                raise reader.error(f"row needs {total} entries (Mal'cev coordinates), got {len(v)}", line, vcol)
            (kernel_rows if key == "kernel-row" else basis_rows).append(v)
        elif key != "m" and not key.startswith("images"):
            raise reader.error(f"unknown nilpotent-clause directive {key!r}", line)
    if bool(kernel_rows) == bool(basis_rows):
        raise reader.error("nilpotent clause needs either kernel-row or basis-row lines", cl.line)
    try:
        if kernel_rows:
            return LatticeConstraint.from_kernel(coords, kernel_rows)
        return LatticeConstraint(coords, basis_rows)
    except PreconditionError as exc:
        raise reader.error(str(exc), cl.line) from None


def load_sdp(path) -> ProductSubgroup:
    return parse_sdp(*_read(path))


# .kernel


def parse_kernel(text: str, source: str = "") -> KernelSpec:
    """First line: factor ranks; then one row of the block matrix per line.
    The prefixes ``ranks:`` and ``row:`` are optional."""
    reader = Reader(text, source)
    rows = []
    ranks = None
    while reader.peek() is not None:
        line = reader.next()
        body, start = line.text, line.offset
        for prefix in ("ranks:", "row:"):
            if body.startswith(prefix):
                rest = body[len(prefix):]
                start += len(prefix) + len(rest) - len(rest.lstrip())
                body = rest.strip()
        v = _ints(reader, line, body, start)
        if ranks is None:
            ranks = v
            if not ranks or any(r < 1 for r in ranks):
                raise reader.error("factor ranks must be positive", line, start)
        else:
            if len(v) != sum(ranks):
                raise reader.error(f"row needs {sum(ranks)} entries, got {len(v)}", line, start)
            rows.append(v)
    if ranks is None:
        raise reader.error("empty kernel file")
    return KernelSpec(ranks, rows)


def load_kernel(path) -> KernelSpec:
    return parse_kernel(*_read(path))


# .facts


@dataclass
class Query:
    kind: str  # "flag", "homology" or "h0"
    args: Tuple

    def describe(self) -> str:
        if self.kind == "flag":
            name, k, d = self.args
            return f"{name} {k}_{fmt_degree(d)}"
        if self.kind == "homology":
            return f"H_{self.args[1]}({self.args[0]}) f.g."
        N, Q, n = self.args
        return f"H_0({Q}, H_{n}({N})) f.g."


def _degree(reader: Reader, line: Line, tok: str, col: int, allow_inf: bool = True):
    if tok in ("inf", "infinity") and allow_inf:
        return INFINITE
    try:
        d = int(tok)
    except ValueError:
        raise reader.error(f"expected a degree, got {tok!r}", line, col) from None
    if d < 0:
        raise reader.error("degrees are non-negative", line, col)
    return d


def _bool(reader: Reader, line: Line, tok: str, col: int) -> bool:
    if tok.lower() in ("true", "yes"):
        return True
    if tok.lower() in ("false", "no"):
        return False
    raise reader.error(f"expected true or false, got {tok!r}", line, col)


FACT_ARITY = {
    "flag": 4,
    "homology": 3,
    "h0": 4,
    "seq": 3,
    "fibre": 6,
    "vs": 3,
    "finite-index": 2,
    "nilpotent-quotients": 1,
    "query": 3,
    "query-homology": 2,
    "query-h0": 3,
}


def parse_facts(text: str, source: str = "") -> Tuple[KnowledgeBase, List[Query]]:
    reader = Reader(text, source)
    kb = KnowledgeBase()
    queries: List[Query] = []
    while reader.peek() is not None:
        line = reader.next()
        toks = [(m.group(), line.col(m.start())) for m in re.finditer(r"\S+", line.text)]
        head, args = toks[0][0], toks[1:]
        if head == "product":
            if len(args) < 2:
                raise reader.error("product needs a name and at least one factor", line)
            kb.add_product(args[0][0], [a for a, _ in args[1:]])
            continue
        if head not in FACT_ARITY:
            raise reader.error(f"unknown statement {head!r}", line, toks[0][1])
        if len(args) != FACT_ARITY[head]:
            raise reader.error(f"{head} takes {FACT_ARITY[head]} arguments, got {len(args)}", line, toks[0][1])
        a = [t for t, _ in args]
        c = [col for _, col in args]
        try:
            if head in ("flag", "query"):
                if a[1] not in KINDS:
                    raise reader.error(f"unknown kind {a[1]!r}; expected one of {', '.join(KINDS)}", line, c[1])
                d = _degree(reader, line, a[2], c[2], allow_inf=True)
                if head == "query":
                    queries.append(Query("flag", (a[0], a[1], d)))
                else:
                    kb.assert_flag(a[0], a[1], d, _bool(reader, line, a[3], c[3]))
            elif head == "homology":
                kb.assert_homology(a[0], _degree(reader, line, a[1], c[1], False), _bool(reader, line, a[2], c[2]))
            elif head == "query-homology":
                queries.append(Query("homology", (a[0], _degree(reader, line, a[1], c[1], False))))
            elif head == "h0":
                kb.assert_h0(a[0], a[1], _degree(reader, line, a[2], c[2]), _bool(reader, line, a[3], c[3]))
            elif head == "query-h0":
                queries.append(Query("h0", (a[0], a[1], _degree(reader, line, a[2], c[2], False))))
            elif head == "seq":
                kb.add_seq(*a)
            elif head == "fibre":
                kb.add_fibre(*a)
            elif head == "vs":
                k = _degree(reader, line, a[1], c[1], False)
                if k < 1:
                    raise reader.error("virtual surjection level must be at least 1", line, c[1])
                kb.assert_vs(a[0], k, _bool(reader, line, a[2], c[2]))
            elif head == "finite-index":
                kb.add_finite_index(a[0], a[1])
            elif head == "nilpotent-quotients":
                kb.nilpotent_quotients.add(a[0])
                kb.profile(a[0])
        except PreconditionError as exc:
            if isinstance(exc, ParseError):
                raise
            raise reader.error(str(exc), line) from None
    return kb, queries


def load_facts(path) -> Tuple[KnowledgeBase, List[Query]]:
    return parse_facts(*_read(path))


def answer(kb: KnowledgeBase, q: Query) -> Tuple[object, Optional[str]]:
    if q.kind == "flag":
        return kb.query(*q.args)
    if q.kind == "homology":
        return kb.query(q.args[0], "Hk", q.args[1])
    return kb.query_h0(*q.args)
