"""Folded subgroup graphs of finitely generated subgroups of free groups."""

from __future__ import annotations

from collections import deque
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import INFINITE, PreconditionError
from .words import FreeGroup, Word


def _label_order(rank: int) -> List[int]:
    out = []
    for i in range(1, rank + 1):
        out += [i, -i]
    return out


class _Folder:
    """Union-find folding: adding an edge that clashes with an existing one
    merges the two targets, and merges cascade through a work queue."""

    def __init__(self):
        self.parent: List[int] = []
        self.out: List[Dict[int, int]] = []

    def new_vertex(self) -> int:
        self.parent.append(len(self.parent))
        self.out.append({})
        return len(self.parent) - 1

    def find(self, v: int) -> int:
        root = v
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[v] != root:
            self.parent[v], v = root, self.parent[v]
        return root

    def _attach(self, u: int, x: int, v: int, pending: list) -> None:
        if x in self.out[u]:
            pending.append((self.out[u][x], v))
        else:
            self.out[u][x] = v

    def add_edge(self, u: int, x: int, v: int) -> None:
        pending: list = []
        u, v = self.find(u), self.find(v)
        self._attach(u, x, v, pending)
        self._attach(v, -x, u, pending)
        while pending:
            a, b = pending.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if a > b:
                a, b = b, a
            # the lower index survives, so the basepoint 0 is never absorbed
            self.parent[b] = a
            moved, self.out[b] = self.out[b], {}
            for x, t in moved.items():
                self._attach(a, x, t, pending)


class SubgroupGraph:
    """Core Stallings graph with vertices 0..V-1 and basepoint 0.

    ``edges[v]`` maps a signed letter to the target vertex; both directions
    of every edge are stored.  Vertices are numbered in breadth-first order
    from the basepoint (labels tried as a, a^-1, b, b^-1, ...), so two
    graphs describe the same subgroup iff their edge maps are equal.
    """

    def __init__(self, ambient: FreeGroup, edges: List[Dict[int, int]]):
        self.ambient = ambient
        self.edges = edges

    # construction

    @classmethod
    def fold(cls, ambient: FreeGroup, generators: Sequence[Word]) -> "SubgroupGraph":
        f = _Folder()
        base = f.new_vertex()
        for g in generators:
            if g.group != ambient:
                raise PreconditionError("generator from a different free group")
            if g.is_identity():
                continue
            cur = base
            for pos, x in enumerate(g.letters):
                nxt = base if pos == len(g.letters) - 1 else f.new_vertex()
                f.add_edge(cur, x, nxt)
                cur = nxt
        raw: Dict[int, Dict[int, int]] = {}
        for v in range(len(f.parent)):
            if f.find(v) == v:
                raw[v] = {x: f.find(t) for x, t in f.out[v].items()}
        return cls._canonical(ambient, raw, f.find(base))

    @classmethod
    def from_action(cls, ambient: FreeGroup, perms: Sequence[Sequence[int]], point: int = 0) -> "SubgroupGraph":
        """Stabiliser of ``point`` under the action where generator i sends
        p to perms[i][p]."""
        if len(perms) != ambient.rank:
            raise PreconditionError("one permutation per generator required")
        raw: Dict[int, Dict[int, int]] = {}
        todo = [point]
        seen = {point}
        while todo:
            p = todo.pop()
            raw[p] = {}
            for i, perm in enumerate(perms):
                q = perm[p]
                raw[p][i + 1] = q
                if q not in seen:
                    seen.add(q)
                    todo.append(q)
        for p in list(raw):
            for x, q in list(raw[p].items()):
                raw[q][-x] = p
        return cls._canonical(ambient, raw, point)

    @classmethod
    def _canonical(cls, ambient: FreeGroup, raw: Dict[int, Dict[int, int]], base: int) -> "SubgroupGraph":
        # prune hanging trees down to the core
        alive = set(raw)
        degree = {v: len(raw[v]) for v in raw}
        stack = [v for v in raw if v != base and degree[v] <= 1]
        while stack:
            v = stack.pop()
            if v not in alive:
                continue
            alive.discard(v)
            for t in raw[v].values():
                if t in alive:
                    degree[t] -= 1
                    if t != base and degree[t] <= 1:
                        stack.append(t)
        order = _label_order(ambient.rank)
        number = {base: 0}
        queue = deque([base])
        while queue:
            v = queue.popleft()
            for x in order:
                t = raw[v].get(x)
                if t is not None and t in alive and t not in number:
                    number[t] = len(number)
                    queue.append(t)
        edges: List[Dict[int, int]] = [dict() for _ in number]
        for v, i in number.items():
            for x in order:
                t = raw[v].get(x)
                if t is not None and t in number:
                    edges[i][x] = number[t]
        return cls(ambient, edges)

    # queries

    @property
    def num_vertices(self) -> int:
        return len(self.edges)

    def contains(self, w: Word) -> bool:
        if w.group != self.ambient:
            raise PreconditionError("word from a different free group")
        v = 0
        for x in w.letters:
            v = self.edges[v].get(x)
            if v is None:
                return False
        return v == 0

    def is_complete(self) -> bool:
        full = 2 * self.ambient.rank
        return all(len(e) == full for e in self.edges)

    def index(self):
        return self.num_vertices if self.is_complete() else INFINITE

    def spanning_tree(self) -> List[Optional[Word]]:
        """Tree path word from the basepoint to each vertex (breadth-first)."""
        paths: List[Optional[Word]] = [None] * self.num_vertices
        paths[0] = self.ambient.identity
        queue = deque([0])
        order = _label_order(self.ambient.rank)
        while queue:
            v = queue.popleft()
            for x in order:
                t = self.edges[v].get(x)
                if t is not None and paths[t] is None:
                    paths[t] = paths[v] * self.ambient.word((x,))
                    queue.append(t)
        return paths

    def basis(self) -> List[Word]:
        """Free basis read off the edges outside the breadth-first tree."""
        paths = self.spanning_tree()
        tree = set()
        for v in range(1, self.num_vertices):
            # edge that first reached v: its tree path's last letter
            x = paths[v].letters[-1]
            u = self.edges[v][-x]
            tree.add((u, x))
            tree.add((v, -x))
        out = []
        for u in range(self.num_vertices):
            for i in range(1, self.ambient.rank + 1):
                t = self.edges[u].get(i)
                if t is None or (u, i) in tree:
                    continue
                out.append(paths[u] * self.ambient.word((i,)) * paths[t].inverse())
        return out

    def rank(self) -> int:
        e = sum(1 for v in self.edges for x in v if x > 0)
        return e - self.num_vertices + 1 if self.num_vertices else 0

    def coset_table(self) -> List[List[int]]:
        """table[c][i] = coset reached from c by generator i (right action)."""
        if not self.is_complete():
            raise PreconditionError("coset table requested for an infinite-index subgroup")
        return [[self.edges[v][i + 1] for i in range(self.ambient.rank)] for v in range(self.num_vertices)]

    def edge_triples(self) -> List[Tuple[int, str, int]]:
        labels = self.ambient.labels
        return [
            (v, labels[x - 1], t)
            for v in range(self.num_vertices)
            for x, t in sorted(self.edges[v].items())
            if x > 0
        ]

    def dump(self) -> str:
        lines = [f"vertices: {self.num_vertices}", "basepoint: 0"]
        lines += [f"edge: {u} {lab} {t}" for u, lab, t in self.edge_triples()]
        return "\n".join(lines)

    def __eq__(self, other) -> bool:
        return isinstance(other, SubgroupGraph) and self.ambient == other.ambient and self.edges == other.edges

    def __hash__(self) -> int:
        return hash(tuple(tuple(sorted(e.items())) for e in self.edges))

    def __repr__(self) -> str:
        return f"<SubgroupGraph V={self.num_vertices} rank={self.rank()} index={self.index()}>"


def fold(ambient: FreeGroup, generators: Sequence[Word]) -> SubgroupGraph:
    return SubgroupGraph.fold(ambient, generators)
