"""Computable quotient targets and epimorphisms onto them.

Three target types share a small protocol (``identity``, ``mul``, ``inv``,
``key``): finite groups given by a multiplication table, finitely
generated abelian groups Z^g / rowspace(R), and the free nilpotent group of
class 2 in Mal'cev coordinates.  ``key`` is a hashable normal form, so two
elements are equal iff their keys are.
"""

from __future__ import annotations

import enum
from collections import deque
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple, Union

from . import intmat
from .errors import INFINITE, CapExceeded, PreconditionError
from .words import FreeGroup, ProductGroup, Word, word_from_vector

MAX_FINITE_ORDER = 2000
DEFAULT_LIFT_CAP = 12


class Nilpotency(enum.Enum):
    NOT_NILPOTENT = "NOT_NILPOTENT"

    def __str__(self) -> str:
        return self.value


NOT_NILPOTENT = Nilpotency.NOT_NILPOTENT


class FiniteGroup:
    """Group on elements 0..order-1 given by a multiplication table."""

    kind = "finite"

    def __init__(self, table: Sequence[Sequence[int]], labels: Optional[Sequence[str]] = None, check: bool = True):
        order = len(table)
        if order == 0:
            raise PreconditionError("empty multiplication table")
        if order > MAX_FINITE_ORDER:
            raise PreconditionError(f"finite groups are capped at order {MAX_FINITE_ORDER}")
        self.table = [list(r) for r in table]
        self.order = order
        self.labels = list(labels) if labels is not None else [str(i) for i in range(order)]
        e = next((i for i in range(order) if self.table[i] == list(range(order))), None)
        if e is None:
            raise PreconditionError("multiplication table has no identity")
        self.identity = e
        self.inverse = [0] * order
        for a in range(order):
            row = self.table[a]
            if len(row) != order or sorted(row) != list(range(order)):
                raise PreconditionError("multiplication table rows must be permutations")
            self.inverse[a] = row.index(e)
        if check:
            self._check_associative()

    def _check_associative(self) -> None:
        t = self.table
        n = self.order
        # exhaustive below 64 elements, generator-free spot checks above
        rng = range(n) if n <= 64 else range(0, n, max(1, n // 64))
        for a in rng:
            for b in rng:
                ab = t[a][b]
                for c in rng:
                    if t[ab][c] != t[a][t[b][c]]:
                        raise PreconditionError("multiplication table is not associative")

    @classmethod
    def from_permutations(cls, gens: Sequence[Sequence[int]]) -> "FiniteGroup":
        """Closure of the given permutations of {0..d-1}."""
        if not gens:
            return cls([[0]], ["()"])
        degree = len(gens[0])
        ident = tuple(range(degree))
        gens = [tuple(g) for g in gens]
        for g in gens:
            if len(g) != degree or sorted(g) != list(ident):
                raise PreconditionError(f"not a permutation of 0..{degree - 1}: {g}")
        elements = [ident]
        index = {ident: 0}
        queue = deque([ident])
        while queue:
            p = queue.popleft()
            for g in gens:
                q = tuple(g[p[i]] for i in range(degree))  # apply p then g
                if q not in index:
                    if len(elements) >= MAX_FINITE_ORDER:
                        raise PreconditionError(f"permutation group exceeds order {MAX_FINITE_ORDER}")
                    index[q] = len(elements)
                    elements.append(q)
                    queue.append(q)
        table = [[index[tuple(q[p[i]] for i in range(degree))] for q in elements] for p in elements]
        grp = cls(table, [str(list(p)) for p in elements], check=False)
        grp.permutations = elements
        grp.generator_indices = [index[g] for g in gens]
        return grp

    @classmethod
    def cyclic(cls, n: int) -> "FiniteGroup":
        return cls([[(a + b) % n for b in range(n)] for a in range(n)], check=False)

    @classmethod
    def symmetric(cls, d: int) -> "FiniteGroup":
        if d == 1:
            return cls([[0]], check=False)
        cycle = tuple(list(range(1, d)) + [0])
        swap = tuple([1, 0] + list(range(2, d)))
        return cls.from_permutations([swap, cycle])

    def element(self, x) -> int:
        if not isinstance(x, int) or not 0 <= x < self.order:
            raise PreconditionError(f"{x!r} is not an element of a group of order {self.order}")
        return x

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self.inverse[a]

    def key(self, a: int) -> int:
        return a

    def power(self, a: int, k: int) -> int:
        base = a if k >= 0 else self.inverse[a]
        out = self.identity
        for _ in range(abs(k)):
            out = self.table[out][base]
        return out

    def commutator(self, a: int, b: int) -> int:
        t = self.table
        return t[t[t[a][b]][self.inverse[a]]][self.inverse[b]]

    def closure(self, gens: Sequence[int]) -> frozenset:
        seen = {self.identity}
        queue = deque([self.identity])
        gens = list(set(gens))
        while queue:
            x = queue.popleft()
            for g in gens:
                y = self.table[x][g]
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return frozenset(seen)

    def elements(self) -> range:
        return range(self.order)

    def fmt(self, a: int) -> str:
        return self.labels[a]

    def __len__(self) -> int:
        return self.order

    def __repr__(self) -> str:
        return f"<FiniteGroup order={self.order}>"


def _snf_coordinates(R: Sequence[Sequence[int]], g: int):
    D, U, V = intmat.smith_normal_form(R, g)
    diag = intmat.diagonal(D) if R else []
    moduli = [diag[i] if i < len(diag) else 0 for i in range(g)]
    return D, U, V, moduli


class AbelianGroup:
    """Z^g modulo the row lattice of ``relations``.

    Elements are integer vectors of length g.  Their normal form is the
    vector x*V reduced modulo the invariant factors, with V the right
    transform of the Smith form D = U*R*V.
    """

    kind = "abelian"

    def __init__(self, ngens: int, relations: Sequence[Sequence[int]] = ()):
        if ngens < 0:
            raise PreconditionError("negative generator count")
        rel = [list(r) for r in relations if any(r)]
        for r in rel:
            if len(r) != ngens:
                raise PreconditionError(f"relation {r} has length {len(r)}, expected {ngens}")
        self.ngens = ngens
        self.relations = rel
        self.D, self.U, self.V, self.moduli = _snf_coordinates(rel, ngens)
        self.free_rank = sum(1 for d in self.moduli if d == 0)
        self.torsion = [d for d in self.moduli if d > 1]
        self.identity = tuple([0] * ngens)

    @classmethod
    def free(cls, rank: int) -> "AbelianGroup":
        return cls(rank)

    @classmethod
    def cyclic(cls, n: int) -> "AbelianGroup":
        return cls(1, [[n]] if n else [])

    def element(self, x) -> Tuple[int, ...]:
        x = tuple(int(v) for v in x)
        if len(x) != self.ngens:
            raise PreconditionError(f"expected a vector of length {self.ngens}")
        return x

    def mul(self, a, b) -> Tuple[int, ...]:
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a) -> Tuple[int, ...]:
        return tuple(-x for x in a)

    def power(self, a, k: int) -> Tuple[int, ...]:
        return tuple(k * x for x in a)

    def key(self, a) -> Tuple[int, ...]:
        y = intmat.vecmat(a, self.V, self.ngens)
        return tuple(v % d if d else v for v, d in zip(y, self.moduli))

    def is_trivial(self) -> bool:
        return self.free_rank == 0 and not self.torsion

    def is_finite(self) -> bool:
        return self.free_rank == 0

    @property
    def order(self):
        if self.free_rank:
            return INFINITE
        out = 1
        for d in self.torsion:
            out *= d
        return out

    def invariants(self) -> Tuple[int, List[int]]:
        return self.free_rank, list(self.torsion)

    def elements(self) -> List[Tuple[int, ...]]:
        """All elements for finite groups, as canonical representatives."""
        if self.free_rank:
            raise PreconditionError("infinite abelian group has no element list")
        if self.order > MAX_FINITE_ORDER:
            raise PreconditionError(f"abelian group exceeds order {MAX_FINITE_ORDER}")
        Vinv = _unimodular_inverse(self.V)
        reps = [()]
        for d in self.moduli:
            reps = [r + (k,) for r in reps for k in range(max(d, 1))]
        return [tuple(intmat.vecmat(r, Vinv, self.ngens)) for r in reps]

    def fmt(self, a) -> str:
        return "(" + ",".join(str(v) for v in a) + ")"

    def describe(self) -> str:
        parts = ["Z"] * self.free_rank + [f"Z/{d}" for d in self.torsion]
        return " x ".join(parts) if parts else "1"

    def __repr__(self) -> str:
        return f"<AbelianGroup {self.describe()}>"


def _unimodular_inverse(V: Sequence[Sequence[int]]) -> intmat.Matrix:
    n = len(V)
    rows = []
    for i in range(n):
        e = [1 if j == i else 0 for j in range(n)]
        x = intmat.solve_left(V, e)
        if x is None:
            raise PreconditionError("matrix is not unimodular")
        rows.append(x)
    return rows


def pair_index(m: int) -> Dict[Tuple[int, int], int]:
    return {p: k for k, p in enumerate(combinations(range(m), 2))}


class Nilpotent2Group:
    """Free nilpotent group of class 2 on m generators.

    An element is (a, b) with a in Z^m and b indexed by pairs i<j, and
    (a,b)(a',b') = (a+a', b+b'+beta(a,a')) with beta_ij = a_i*a'_j.  Under
    x_i -> (e_i, 0) the commutator [x_i, x_j] is (0, e_ij) and the ordered
    product x_1^{a_1}...x_m^{a_m} is (a, (a_i*a_j)_{i<j}).
    """

    kind = "nilpotent2"

    def __init__(self, m: int):
        if m < 1:
            raise PreconditionError("nilpotent group needs at least one generator")
        self.m = m
        self.pairs = list(combinations(range(m), 2))
        self.npairs = len(self.pairs)
        self.identity = (tuple([0] * m), tuple([0] * self.npairs))

    def beta(self, a, a2) -> List[int]:
        return [a[i] * a2[j] for i, j in self.pairs]

    def element(self, x):
        a, b = x
        a, b = tuple(int(v) for v in a), tuple(int(v) for v in b)
        if len(a) != self.m or len(b) != self.npairs:
            raise PreconditionError("nilpotent element has the wrong shape")
        return (a, b)

    def gen(self, i: int):
        a = [0] * self.m
        a[i] = 1
        return (tuple(a), tuple([0] * self.npairs))

    def mul(self, x, y):
        a, b = x
        a2, b2 = y
        beta = self.beta(a, a2)
        return (
            tuple(p + q for p, q in zip(a, a2)),
            tuple(p + q + r for p, q, r in zip(b, b2, beta)),
        )

    def inv(self, x):
        a, b = x
        na = tuple(-v for v in a)
        beta = self.beta(a, a)
        return (na, tuple(-p + r for p, r in zip(b, beta)))

    def power(self, x, k: int):
        base = x if k >= 0 else self.inv(x)
        out = self.identity
        for _ in range(abs(k)):
            out = self.mul(out, base)
        return out

    def key(self, x):
        return x

    def commutator(self, x, y):
        return self.mul(self.mul(self.mul(x, y), self.inv(x)), self.inv(y))

    def wedge(self, a, a2) -> Tuple[int, ...]:
        """b-part of the commutator of elements with a-parts a and a2."""
        return tuple(a[i] * a2[j] - a[j] * a2[i] for i, j in self.pairs)

    def malcev_word(self, group: FreeGroup, x) -> Word:
        """Word in ``group`` (whose first m generators play x_1..x_m) mapping to x
        under the standard map."""
        a, b = x
        w = word_from_vector(group, list(a) + [0] * (group.rank - self.m))
        for (i, j), e in zip(self.pairs, b):
            c = group.gen(i) * group.gen(j) * group.gen(i).inverse() * group.gen(j).inverse()
            w = w * (c ** (e - a[i] * a[j]))
        return w

    def fmt(self, x) -> str:
        a, b = x
        return "(" + ",".join(map(str, a)) + " | " + ",".join(map(str, b)) + ")"

    def __repr__(self) -> str:
        return f"<Nilpotent2Group m={self.m}>"


Target = Union[FiniteGroup, AbelianGroup, Nilpotent2Group]
Domain = Union[FreeGroup, ProductGroup]


def finite_closure(G: FiniteGroup, gens: Sequence[int]) -> frozenset:
    return G.closure(gens)


def lower_central_class(G: Target):
    """Nilpotency class: 0 for the trivial group, NOT_NILPOTENT if the lower
    central series stabilises at a nontrivial subgroup."""
    if isinstance(G, AbelianGroup):
        return 0 if G.is_trivial() else 1
    if isinstance(G, Nilpotent2Group):
        return 2 if G.m >= 2 else 1
    if G.order == 1:
        return 0
    current = frozenset(G.elements())
    c = 0
    while True:
        c += 1
        comms = {G.commutator(g, h) for g in G.elements() for h in current}
        nxt = G.closure(comms)
        if len(nxt) == 1:
            return c
        if nxt == current:
            return NOT_NILPOTENT
        current = nxt


class QuotientMap:
    """Homomorphism from a free group or a product of free groups to a target,
    determined by one target element per domain generator (factors in order)."""

    def __init__(self, domain: Domain, target: Target, images: Sequence):
        self.domain = domain
        self.target = target
        self.images = [target.element(x) for x in images]
        factors = domain.factors if isinstance(domain, ProductGroup) else (domain,)
        need = sum(f.rank for f in factors)
        if len(self.images) != need:
            raise PreconditionError(f"expected {need} generator images, got {len(self.images)}")
        self._offsets = []
        off = 0
        for f in factors:
            self._offsets.append(off)
            off += f.rank
        self._factors = factors

    @property
    def is_product(self) -> bool:
        return isinstance(self.domain, ProductGroup)

    def factor_map(self, i: int) -> "QuotientMap":
        f = self._factors[i]
        off = self._offsets[i]
        return QuotientMap(f, self.target, self.images[off : off + f.rank])

    def _image_of_word(self, w: Word, off: int):
        T = self.target
        if isinstance(T, AbelianGroup):
            out = [0] * T.ngens
            for x in w.letters:
                img = self.images[off + abs(x) - 1]
                s = 1 if x > 0 else -1
                for k, v in enumerate(img):
                    out[k] += s * v
            return tuple(out)
        out = T.identity
        invs: Dict[int, object] = {}
        for x in w.letters:
            if x > 0:
                out = T.mul(out, self.images[off + x - 1])
            else:
                g = invs.get(x)
                if g is None:
                    g = invs[x] = T.inv(self.images[off - x - 1])
                out = T.mul(out, g)
        return out

    def word_image(self, w):
        if isinstance(w, Word):
            if self.is_product:
                raise PreconditionError("a product-domain map needs a tuple of words")
            if w.group != self.domain:
                raise PreconditionError("word is not in the map's domain")
            return self._image_of_word(w, 0)
        g = tuple(w)
        if not self.is_product:
            raise PreconditionError("a free-domain map takes a single word")
        self.domain.check(g)
        out = self.target.identity
        for i, word in enumerate(g):
            out = self.target.mul(out, self._image_of_word(word, self._offsets[i]))
        return out

    def equal(self, x, y) -> bool:
        return self.target.key(x) == self.target.key(y)

    # surjectivity and images

    def _image_index_of(self, elems: Sequence):
        T = self.target
        if isinstance(T, FiniteGroup):
            return T.order // len(T.closure(elems))
        if isinstance(T, AbelianGroup):
            return intmat.lattice_index([list(e) for e in elems] + T.relations, T.ngens)
        return _nilpotent_subgroup_index(T, elems)

    def image_index(self, elements: Optional[Sequence] = None):
        """Index in the target of the image of the subgroup generated by
        ``elements`` (domain elements); the whole domain by default."""
        if elements is None:
            return self._image_index_of(self.images)
        return self._image_index_of([self.word_image(e) for e in elements])

    def is_surjective(self) -> bool:
        return self.image_index() == 1

    def require_surjective(self) -> None:
        if not self.is_surjective():
            raise PreconditionError("quotient map is not surjective")

    def lift(self, x, cap: int = DEFAULT_LIFT_CAP) -> Word:
        """A domain word mapping to ``x`` (free domains only)."""
        if self.is_product:
            raise PreconditionError("lift is defined for free-domain maps")
        T = self.target
        x = T.element(x)
        if isinstance(T, FiniteGroup):
            return _finite_lift(self, x, cap)
        if isinstance(T, AbelianGroup):
            rows = [list(v) for v in self.images] + T.relations
            sol = intmat.solve_left(rows, list(x), T.ngens)
            if sol is None:
                raise PreconditionError(f"{T.fmt(x)} is not in the image")
            return word_from_vector(self.domain, sol[: self.domain.rank])
        return _nilpotent_lift(self, x)

    def __repr__(self) -> str:
        return f"<QuotientMap {self.domain!r} -> {self.target!r}>"


def _finite_lift(q: QuotientMap, x: int, cap: int) -> Word:
    T = q.target
    F = q.domain
    best: Dict[int, Word] = {T.identity: F.identity}
    frontier = [T.identity]
    letters = []
    for i in range(F.rank):
        letters += [(i + 1, q.images[i]), (-(i + 1), T.inv(q.images[i]))]
    length = 0
    while x not in best:
        if not frontier:
            raise PreconditionError(f"element {T.fmt(x)} is not in the image")
        if length >= cap:
            raise CapExceeded(f"no preimage of length <= {cap} found")
        length += 1
        nxt = []
        for g in frontier:
            for letter, img in letters:
                h = T.mul(g, img)
                if h not in best:
                    best[h] = best[g] * F.word((letter,))
                    nxt.append(h)
        frontier = nxt
    return best[x]


def _nilpotent_central_data(T: Nilpotent2Group, elems: Sequence):
    """Lattice of b-parts of H cap centre, for H generated by ``elems``."""
    a_rows = [list(e[0]) for e in elems]
    central = [list(T.wedge(e[0], f[0])) for e, f in combinations(elems, 2)]
    for rel in intmat.left_kernel(a_rows, T.m) if a_rows else []:
        z = T.identity
        for e, c in zip(elems, rel):
            z = T.mul(z, T.power(e, c))
        central.append(list(z[1]))
    return a_rows, [r for r in central if any(r)]


def _nilpotent_subgroup_index(T: Nilpotent2Group, elems: Sequence):
    """[N : H] = [Z^m : a(H)] * [Z : H cap Z] for the centre Z = gamma_2."""
    a_rows, central = _nilpotent_central_data(T, elems)
    ia = intmat.lattice_index(a_rows, T.m)
    if ia is INFINITE:
        return INFINITE
    ib = intmat.lattice_index(central, T.npairs)
    if ib is INFINITE:
        return INFINITE
    return ia * ib


def _nilpotent_lift(q: QuotientMap, x) -> Word:
    T: Nilpotent2Group = q.target
    F: FreeGroup = q.domain
    imgs = q.images
    sol = intmat.solve_left([list(e[0]) for e in imgs], list(x[0]), T.m)
    if sol is None:
        raise PreconditionError(f"{T.fmt(x)} is not in the image")
    w = F.identity
    for i, c in enumerate(sol):
        w = w * (F.gen(i) ** c)
    rest = T.mul(T.inv(q.word_image(w)), x)  # central
    # central words: commutators of generators, and relation products
    words: List[Word] = []
    vecs: List[List[int]] = []
    for i, j in combinations(range(F.rank), 2):
        vecs.append(list(T.wedge(imgs[i][0], imgs[j][0])))
        words.append(F.gen(i) * F.gen(j) * F.gen(i).inverse() * F.gen(j).inverse())
    for rel in intmat.left_kernel([list(e[0]) for e in imgs], T.m):
        u = F.identity
        for i, c in enumerate(rel):
            u = u * (F.gen(i) ** c)
        vecs.append(list(q.word_image(u)[1]))
        words.append(u)
    coeffs = intmat.solve_left(vecs, list(rest[1]), T.npairs) if vecs else None
    if coeffs is None:
        if not any(rest[1]):
            return w
        raise PreconditionError(f"{T.fmt(x)} is not in the image")
    for u, c in zip(words, coeffs):
        w = w * (u ** c)
    return w
