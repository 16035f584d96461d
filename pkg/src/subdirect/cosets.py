"""Todd-Coxeter coset enumeration (HLT strategy with coincidence handling).

Used as an independent check on indices computed elsewhere: it knows only
a finite presentation and subgroup generators, never the quotient data the
rest of the package builds subgroups from.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

from .errors import CapExceeded

DEFAULT_MAX_COSETS = 200_000


def _col(x: int) -> int:
    return 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1


class CosetTable:
    def __init__(self, ngens: int, max_cosets: int):
        self.ncols = 2 * ngens
        self.max_cosets = max_cosets
        self.table: List[List[Optional[int]]] = [[None] * self.ncols]
        self.parent = [0]

    def live(self, c: int) -> bool:
        return self.parent[c] == c

    def rep(self, c: int) -> int:
        root = c
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[c] != root:
            self.parent[c], c = root, self.parent[c]
        return root

    def define(self, c: int, col: int) -> None:
        if len(self.table) >= self.max_cosets:
            raise CapExceeded(f"coset enumeration exceeded {self.max_cosets} cosets")
        d = len(self.table)
        self.table.append([None] * self.ncols)
        self.parent.append(d)
        self.table[c][col] = d
        self.table[d][col ^ 1] = c

    def _merge(self, k: int, l: int, queue: List[int]) -> None:
        a, b = self.rep(k), self.rep(l)
        if a == b:
            return
        lo, hi = min(a, b), max(a, b)
        self.parent[hi] = lo
        queue.append(hi)

    def coincidence(self, a: int, b: int) -> None:
        queue: List[int] = []
        self._merge(a, b, queue)
        i = 0
        while i < len(queue):
            g = queue[i]
            i += 1
            row = self.table[g]
            for x in range(self.ncols):
                h = row[x]
                if h is None:
                    continue
                xi = x ^ 1
                self.table[h][xi] = None
                mu, nu = self.rep(g), self.rep(h)
                if self.table[mu][x] is not None:
                    self._merge(nu, self.table[mu][x], queue)
                elif self.table[nu][xi] is not None:
                    self._merge(mu, self.table[nu][xi], queue)
                else:
                    self.table[mu][x] = nu
                    self.table[nu][xi] = mu

    def scan_and_fill(self, c: int, word: Sequence[int]) -> None:
        t = self.table
        f = b = c
        i, j = 0, len(word) - 1
        while True:
            while i <= j and t[f][_col(word[i])] is not None:
                f = t[f][_col(word[i])]
                i += 1
            if i > j:
                if f != b:
                    self.coincidence(f, b)
                return
            while j >= i and t[b][_col(-word[j])] is not None:
                b = t[b][_col(-word[j])]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                t[f][_col(word[i])] = b
                t[b][_col(-word[i])] = f
                return
            self.define(f, _col(word[i]))


def enumerate_cosets(
    ngens: int,
    relators: Sequence[Sequence[int]],
    subgroup: Sequence[Sequence[int]],
    max_cosets: int = DEFAULT_MAX_COSETS,
) -> List[List[int]]:
    """Right coset table of <subgroup> in <gens | relators>.

    Words are sequences of signed letters (1-based).  Returns rows indexed
    by live cosets (coset 0 is the subgroup), one column per generator.
    Raises CapExceeded if the index is infinite or too large.
    """
    ct = CosetTable(ngens, max_cosets)
    for w in subgroup:
        if w:
            ct.scan_and_fill(0, list(w))
    c = 0
    while c < len(ct.table):
        for r in relators:
            if not ct.live(c):
                break
            if r:
                ct.scan_and_fill(c, list(r))
        if ct.live(c):
            for x in range(ct.ncols):
                if ct.table[c][x] is None:
                    ct.define(c, x)
        c += 1
    live = [c for c in range(len(ct.table)) if ct.live(c)]
    number = {c: i for i, c in enumerate(live)}
    return [[number[ct.rep(ct.table[c][2 * g])] for g in range(ngens)] for c in live]


def coset_index(ngens, relators, subgroup, max_cosets: int = DEFAULT_MAX_COSETS) -> int:
    return len(enumerate_cosets(ngens, relators, subgroup, max_cosets))
