"""First homology of finite-index subgroups of products of free groups, and
coinvariants of explicit integral actions.

A finite-index P <= F_{m_1} x ... x F_{m_n} is presented by
Reidemeister-Schreier: the ambient group is <all generators | [x, y] for x, y
in different factors>, P acts on its right cosets, and each relator is
rewritten from every coset.  H_1 is then the Smith form of the exponent-sum
matrix.  Higher homology is not computed here; it enters only as flags.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import intmat
from .errors import INFINITE, PreconditionError, UnsupportedError
from .product import FiniteConstraint, LatticeConstraint, ProductSubgroup, fibre_product
from .quotients import AbelianGroup, QuotientMap
from .words import ProductGroup, Word, free_reduce

Relator = Tuple[int, ...]

# keeps substitution from blowing up relator lengths on adversarial inputs
LENGTH_GROWTH_CAP = 8


@dataclass
class Presentation:
    """<x_1..x_g | relators>; letters are signed 1-based generator indices.

    ``elements`` optionally records, per generator, the ambient element it
    stands for, so a presentation of a subgroup can be checked against the
    subgroup's own membership test.
    """

    ngens: int
    relators: List[Relator]
    labels: List[str] = field(default_factory=list)
    elements: Optional[List[Tuple[Word, ...]]] = None
    index: Optional[int] = None

    def __post_init__(self) -> None:
        rels = []
        for r in self.relators:
            if any(x == 0 or abs(x) > self.ngens for x in r):
                raise PreconditionError(f"relator {r} uses a generator outside 1..{self.ngens}")
            rels.append(free_reduce(r))
        self.relators = rels
        if not self.labels:
            self.labels = [f"x{i + 1}" for i in range(self.ngens)]

    def exponent_matrix(self) -> List[List[int]]:
        rows = []
        for r in self.relators:
            row = [0] * self.ngens
            for x in r:
                row[abs(x) - 1] += 1 if x > 0 else -1
            rows.append(row)
        return rows

    def total_length(self) -> int:
        return sum(len(r) for r in self.relators)

    def format_relator(self, r: Relator) -> str:
        if not r:
            return "1"
        return " ".join(self.labels[abs(x) - 1] + ("" if x > 0 else "^-1") for x in r)

    def lines(self) -> List[str]:
        out = [f"generators: {self.ngens}", f"relators: {len(self.relators)}"]
        out += [f"relator: {self.format_relator(r)}" for r in self.relators]
        return out


def _cyclic_reduce(r: Relator) -> Relator:
    r = free_reduce(r)
    while len(r) >= 2 and r[0] == -r[-1]:
        r = r[1:-1]
    return r


def _canonical(r: Relator) -> Relator:
    """Least rotation of r or r^-1, identifying relators with the same normal closure."""
    inv = tuple(-x for x in reversed(r))
    return min(min(w[i:] + w[:i] for i in range(len(w))) for w in (r, inv))


def _tidy(relators: Sequence[Relator]) -> List[Relator]:
    seen = set()
    out = []
    for r in relators:
        r = _cyclic_reduce(r)
        if not r:
            continue
        c = _canonical(r)
        if c not in seen:
            seen.add(c)
            out.append(r)
    return out


def _eliminable(r: Relator) -> Optional[int]:
    """Smallest generator occurring exactly once in r, if any."""
    counts: Dict[int, int] = {}
    for x in r:
        counts[abs(x)] = counts.get(abs(x), 0) + 1
    once = [g for g, c in counts.items() if c == 1]
    return min(once) if once else None


def simplify(pres: Presentation) -> Presentation:
    """Deterministic Tietze reduction.

    Repeatedly takes the shortest relator in which some generator occurs
    exactly once, solves it for that generator and substitutes.  Generators
    absent from every relator are free and are kept.
    """
    rels = _tidy(pres.relators)
    gens = list(range(1, pres.ngens + 1))  # surviving original indices
    cap = LENGTH_GROWTH_CAP * max(1, sum(len(r) for r in rels))
    blocked = set()
    while True:
        cands = []
        for idx, r in enumerate(rels):
            g = _eliminable(r)
            if g is not None and (g, _canonical(r)) not in blocked:
                cands.append((len(r), _canonical(r), idx, g))
        if not cands:
            break
        _, canon, idx, g = min(cands)
        r = rels[idx]
        pos = next(i for i, x in enumerate(r) if abs(x) == g)
        rot = r[pos:] + r[:pos]
        rest = rot[1:]
        # g^e * rest = 1, so g = rest^-1 when e = 1 and g = rest when e = -1
        value = tuple(-x for x in reversed(rest)) if rot[0] > 0 else rest
        inv_value = tuple(-x for x in reversed(value))

        def sub(w: Relator) -> Relator:
            out: List[int] = []
            for x in w:
                if x == g:
                    out.extend(value)
                elif x == -g:
                    out.extend(inv_value)
                else:
                    out.append(x)
            return tuple(out)

        new_rels = _tidy([sub(w) for j, w in enumerate(rels) if j != idx])
        if sum(len(w) for w in new_rels) > cap:
            blocked.add((g, canon))
            continue
        rels = new_rels
        gens.remove(g)
        blocked = set()
    number = {g: i + 1 for i, g in enumerate(gens)}
    renum = [tuple((1 if x > 0 else -1) * number[abs(x)] for x in r) for r in rels]
    labels = [pres.labels[g - 1] for g in gens]
    elements = [pres.elements[g - 1] for g in gens] if pres.elements is not None else None
    return Presentation(len(gens), renum, labels, elements, pres.index)


# Reidemeister-Schreier


@dataclass
class SchreierData:
    index: int
    table: List[List[int]]  # coset x positive letter -> coset
    transversal: List[Tuple[int, ...]]
    generator_edges: List[Tuple[int, int]]  # (coset, letter) of each Schreier generator


def schreier_data(table: Sequence[Sequence[int]]) -> SchreierData:
    """BFS Schreier transversal of a transitive coset table (coset 0 = subgroup).

    Positive letters suffice: on a finite set each letter acts by a
    permutation, so its inverse is a positive power.
    """
    q = len(table)
    m = len(table[0]) if q else 0
    rep: List[Optional[Tuple[int, ...]]] = [None] * q
    rep[0] = ()
    tree = set()
    queue = deque([0])
    while queue:
        c = queue.popleft()
        for x in range(1, m + 1):
            d = table[c][x - 1]
            if rep[d] is None:
                rep[d] = rep[c] + (x,)
                tree.add((c, x))
                queue.append(d)
    if any(r is None for r in rep):
        raise PreconditionError("coset action is not transitive")
    gens = [(c, x) for c in range(q) for x in range(1, m + 1) if (c, x) not in tree]
    return SchreierData(q, [list(r) for r in table], rep, gens)


def reidemeister_schreier(
    ngens: int,
    relators: Sequence[Relator],
    table: Sequence[Sequence[int]],
    simplify_result: bool = True,
) -> Tuple[Presentation, SchreierData]:
    """Presentation of the stabiliser of coset 0 in <ngens | relators>."""
    data = schreier_data(table)
    number = {e: i + 1 for i, e in enumerate(data.generator_edges)}
    inverse_table = [[0] * ngens for _ in range(data.index)]
    for c in range(data.index):
        for x in range(1, ngens + 1):
            inverse_table[data.table[c][x - 1]][x - 1] = c

    def rewrite(c: int, w: Sequence[int]) -> Tuple[Relator, int]:
        out: List[int] = []
        for x in w:
            if x > 0:
                s = number.get((c, x))
                if s:
                    out.append(s)
                c = data.table[c][x - 1]
            else:
                d = inverse_table[c][-x - 1]
                s = number.get((d, -x))
                if s:
                    out.append(-s)
                c = d
        return tuple(out), c

    rels = []
    for c in range(data.index):
        for r in relators:
            w, end = rewrite(c, r)
            if end != c:
                raise PreconditionError("relator does not act trivially on cosets")
            rels.append(w)
    labels = [f"s{c}_{x}" for c, x in data.generator_edges]
    pres = Presentation(len(data.generator_edges), rels, labels)
    return (simplify(pres) if simplify_result else pres), data


def _product_relators(ambient: ProductGroup) -> Tuple[List[int], List[Relator]]:
    offs = []
    o = 0
    for r in ambient.ranks:
        offs.append(o)
        o += r
    rels = []
    for i in range(ambient.n):
        for j in range(i + 1, ambient.n):
            for a in range(ambient.ranks[i]):
                for b in range(ambient.ranks[j]):
                    x, y = offs[i] + a + 1, offs[j] + b + 1
                    rels.append((x, y, -x, -y))
    return offs, rels


def _coset_table(P: ProductSubgroup, offs: Sequence[int]) -> List[List[int]]:
    c = P.constraint
    ambient = P.ambient
    total = sum(ambient.ranks)
    if isinstance(c, FiniteConstraint):
        groups = c.groups
        S = sorted(c.S)

        def key(g):
            return min(tuple(G.mul(s[i], g[i]) for i, G in enumerate(groups)) for s in S)

        def step(g, i, a):
            img = c.maps[i].images[a]
            return tuple(G.mul(x, img) if k == i else x for k, (G, x) in enumerate(zip(groups, g)))

        start = tuple(G.identity for G in groups)
    elif isinstance(c, LatticeConstraint) and all(x.kind == "abelian" for x in c.coords):
        if c.index() is INFINITE:
            raise PreconditionError("subgroup has infinite index; Reidemeister-Schreier needs finite index")
        H = c.basis

        def key(v):
            v = list(v)
            for i, row in enumerate(H):
                q = v[i] // row[i]
                if q:
                    v = [a - q * b for a, b in zip(v, row)]
            return tuple(v)

        def step(v, i, a):
            v = list(v)
            v[offs[i] + a] += 1
            return tuple(v)

        start = tuple([0] * total)
    else:
        raise UnsupportedError("Reidemeister-Schreier needs a finite or abelian constraint")
    letters = [(i, a) for i in range(ambient.n) for a in range(ambient.ranks[i])]
    number = {key(start): 0}
    reps = [start]
    table: List[List[int]] = []
    k = 0
    while k < len(reps):
        row = []
        for i, a in letters:
            h = step(reps[k], i, a)
            kh = key(h)
            if kh not in number:
                number[kh] = len(reps)
                reps.append(kh)
            row.append(number[kh])
        table.append(row)
        k += 1
    return table


def _split_letters(ambient: ProductGroup, offs: Sequence[int], letters: Sequence[int]) -> Tuple[Word, ...]:
    per: List[List[int]] = [[] for _ in range(ambient.n)]
    for x in letters:
        g = abs(x) - 1
        i = max(k for k in range(ambient.n) if offs[k] <= g)
        local = g - offs[i] + 1
        per[i].append(local if x > 0 else -local)
    return tuple(F.word(p) for F, p in zip(ambient.factors, per))


def rs_presentation(P, q2: Optional[QuotientMap] = None, simplify_result: bool = True) -> Presentation:
    """Presentation of a finite-index P <= product of free groups.

    Accepts a :class:`ProductSubgroup` or a pair of quotient maps, in which
    case P is their fibre product.
    """
    if isinstance(P, QuotientMap):
        if q2 is None:
            raise PreconditionError("a fibre product needs two quotient maps")
        P = fibre_product(P, q2)
    idx = P.index()
    if idx is INFINITE:
        raise PreconditionError("subgroup has infinite index (infinite quotient); Reidemeister-Schreier needs finite index")
    offs, rels = _product_relators(P.ambient)
    table = _coset_table(P, offs)
    pres, data = reidemeister_schreier(sum(P.ambient.ranks), rels, table, simplify_result=False)
    pres.elements = []
    for c, x in data.generator_edges:
        d = data.table[c][x - 1]
        w = data.transversal[c] + (x,) + tuple(-y for y in reversed(data.transversal[d]))
        pres.elements.append(_split_letters(P.ambient, offs, w))
    pres.index = data.index
    if simplify_result:
        pres = simplify(pres)
    return pres


def h1(p: Presentation) -> Tuple[int, List[int]]:
    """(free rank, torsion invariants) of the abelianisation."""
    return intmat.abelian_invariants(p.exponent_matrix(), p.ngens)


def format_invariants(free: int, torsion: Sequence[int]) -> str:
    parts = ["Z" if free == 1 else f"Z^{free}"] if free else []
    parts += [f"Z/{t}" for t in torsion]
    return " + ".join(parts) if parts else "0"


# coinvariants


def coinvariants(A, action: Sequence[Sequence[Sequence[int]]]) -> Tuple[int, List[int]]:
    """Invariants of A / <a - q a> for an action given by matrices.

    ``A`` is an :class:`AbelianGroup` or a rank (free module).  Each matrix
    acts on column vectors: generator e_j goes to column j.  Every matrix
    must induce an automorphism of A.
    """
    if isinstance(A, int):
        A = AbelianGroup.free(A)
    g = A.ngens
    R = intmat.hermite_rows(A.relations, g)
    rows = list(R)
    for rho in action:
        if len(rho) != g or any(len(r) != g for r in rho):
            raise PreconditionError(f"action matrix must be {g} x {g}")
        rt = intmat.transpose(rho, g)
        # a relation x (row) maps to x * rho^T, which must stay a relation
        for rel in R:
            img = intmat.vecmat(rel, rt, g)
            if not intmat.in_row_lattice(R, img):
                raise PreconditionError("action matrix does not preserve the relations")
        if intmat.lattice_index(rt + R, g) != 1:
            raise PreconditionError("action matrix is not an automorphism of the module")
        for j in range(g):
            rows.append([int(j == i) - rt[j][i] for i in range(g)])
    return intmat.abelian_invariants(rows, g)
