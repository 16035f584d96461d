"""Subgroups of direct products of free groups, held as preimages.

A :class:`ProductSubgroup` P of Gamma = Gamma_1 x ... x Gamma_n is stored as
the preimage of a subgroup S of a computable group G_1 x ... x G_n under
factor-wise surjections Gamma_i -> G_i.  Two kinds of constraint exist:

* :class:`LatticeConstraint`: each G_i is free abelian (exponent sums) or
  free nilpotent of class 2 (Mal'cev coordinates), and S is cut out by a
  lattice L of coordinate vectors.  Projections and intersections with
  coordinate subgroups stay lattices.
* :class:`FiniteConstraint`: each G_i is a finite group and S is an explicit
  set of tuples.

Because every map Gamma_i -> G_i is onto, p_J(P) is the preimage of the
projection of S and N_J is the preimage of S meet G_J.  Both reduce to
finite computations.  Raw generating sets are never accepted as input,
since membership in finitely generated subgroups of F x F is undecidable.
"""

from __future__ import annotations

import os
import random
from dataclasses import dataclass, field
from itertools import combinations, product as iproduct
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from . import intmat
from .errors import INFINITE, InconsistencyError, PreconditionError, Unknown, UnsupportedError, is_finite
from .quotients import AbelianGroup, FiniteGroup, Nilpotent2Group, QuotientMap, lower_central_class
from .words import FreeGroup, ProductGroup, Word, abelianize, commutator, word_from_vector

DEFAULT_MAX_FACTORS = 12


def max_factors() -> int:
    raw = os.environ.get("SDP_MAX_FACTORS", "")
    try:
        return int(raw) if raw else DEFAULT_MAX_FACTORS
    except ValueError:
        raise PreconditionError(f"SDP_MAX_FACTORS must be an integer, got {raw!r}") from None


def _subset(J: Sequence[int], n: int) -> Tuple[int, ...]:
    J = tuple(sorted(set(J)))
    if not J:
        raise PreconditionError("index subset must be non-empty")
    if J[0] < 0 or J[-1] >= n:
        raise PreconditionError(f"index subset {[j + 1 for j in J]} out of range 1..{n}")
    return J


# coordinate maps Gamma_i -> Z^c (a bijection G_i -> Z^c after the quotient)


class AbelianCoordinates:
    """Gamma_i -> Z^rank by exponent sums."""

    kind = "abelian"

    def __init__(self, group: FreeGroup):
        self.group = group
        self.dim = group.rank

    def value(self, w: Word) -> List[int]:
        return abelianize(w)

    def lift(self, vec: Sequence[int]) -> Word:
        return word_from_vector(self.group, vec)

    def cocycle(self, u: Sequence[int], v: Sequence[int]) -> List[int]:
        return [0] * self.dim

    def central_mask(self) -> List[bool]:
        return [False] * self.dim

    def __eq__(self, other) -> bool:
        return isinstance(other, AbelianCoordinates) and other.group == self.group

    def __hash__(self) -> int:
        return hash(("ab", self.group))

    def describe(self) -> str:
        return f"Z^{self.dim}"


class NilpotentCoordinates:
    """Gamma_i -> N -> Z^(m + m(m-1)/2), reading Mal'cev coordinates of the
    image in the free class-2 nilpotent group N."""

    kind = "nilpotent2"

    def __init__(self, qmap: QuotientMap):
        if not isinstance(qmap.target, Nilpotent2Group) or qmap.is_product:
            raise PreconditionError("nilpotent coordinates need a free-domain map onto a class-2 group")
        qmap.require_surjective()
        self.qmap = qmap
        self.group = qmap.domain
        self.N = qmap.target
        self.dim = self.N.m + self.N.npairs

    def value(self, w: Word) -> List[int]:
        a, b = self.qmap.word_image(w)
        return list(a) + list(b)

    def element(self, vec: Sequence[int]):
        m = self.N.m
        return (tuple(vec[:m]), tuple(vec[m:]))

    def lift(self, vec: Sequence[int]) -> Word:
        return self.qmap.lift(self.element(vec))

    def cocycle(self, u: Sequence[int], v: Sequence[int]) -> List[int]:
        """coords(x*y) - coords(x) - coords(y)."""
        m = self.N.m
        return [0] * m + self.N.beta(u[:m], v[:m])

    def central_mask(self) -> List[bool]:
        return [False] * self.N.m + [True] * self.N.npairs

    def __eq__(self, other) -> bool:
        return isinstance(other, NilpotentCoordinates) and other.qmap is self.qmap

    def __hash__(self) -> int:
        return id(self.qmap)

    def describe(self) -> str:
        return f"N2({self.N.m})"


def _offsets(dims: Sequence[int]) -> List[int]:
    out, off = [], 0
    for d in dims:
        out.append(off)
        off += d
    return out


class LatticeConstraint:
    """S = {x : x in rowspace(basis)} in concatenated factor coordinates."""

    def __init__(self, coords: Sequence, basis: Sequence[Sequence[int]], check: bool = True):
        self.coords = list(coords)
        self.dims = [c.dim for c in self.coords]
        self.offs = _offsets(self.dims)
        self.total = sum(self.dims)
        self.basis = intmat.hermite_rows(basis, self.total)
        if check:
            self._check_subgroup()

    def _check_subgroup(self) -> None:
        if all(c.kind == "abelian" for c in self.coords):
            return
        # the cocycle is bilinear, so checking basis pairs suffices
        for u in self.basis:
            for v in self.basis:
                if not intmat.in_row_lattice(self.basis, self._cocycle(u, v)):
                    raise PreconditionError("coordinate lattice is not closed under the group law")

    def _cocycle(self, u, v) -> List[int]:
        out: List[int] = []
        for c, o, d in zip(self.coords, self.offs, self.dims):
            out += c.cocycle(u[o : o + d], v[o : o + d])
        return out

    @classmethod
    def from_kernel(cls, coords: Sequence, M: Sequence[Sequence[int]], relations: Sequence[Sequence[int]] = ()) -> "LatticeConstraint":
        """S = {x : M*x in rowspace(relations)}; ``M`` has one row per target coordinate."""
        total = sum(c.dim for c in coords)
        return cls(coords, intmat.preimage_lattice(M, relations, total))

    def vector(self, g: Sequence[Word]) -> List[int]:
        out: List[int] = []
        for c, w in zip(self.coords, g):
            out += c.value(w)
        return out

    def member(self, g: Sequence[Word]) -> bool:
        v = self.vector(g)
        if not self.basis:
            return not any(v)
        return intmat.in_row_lattice(self.basis, v)

    def _columns(self, J: Sequence[int]) -> List[int]:
        cols: List[int] = []
        for j in J:
            cols += range(self.offs[j], self.offs[j] + self.dims[j])
        return cols

    def project(self, J: Sequence[int]) -> "LatticeConstraint":
        cols = self._columns(J)
        return LatticeConstraint([self.coords[j] for j in J], [[r[c] for c in cols] for r in self.basis], check=False)

    def intersect(self, J: Sequence[int]) -> "LatticeConstraint":
        cols = self._columns(J)
        chosen = set(cols)
        rest = [c for c in range(self.total) if c not in chosen]
        if not self.basis:
            return LatticeConstraint([self.coords[j] for j in J], [], check=False)
        if rest:
            ker = intmat.left_kernel([[r[c] for c in rest] for r in self.basis], len(rest))
            rows = [intmat.vecmat(y, self.basis, self.total) for y in ker]
        else:
            rows = self.basis
        return LatticeConstraint([self.coords[j] for j in J], [[r[c] for c in cols] for r in rows], check=False)

    def index(self):
        return intmat.lattice_index(self.basis, self.total)

    def cokernel_free_rank(self) -> int:
        return self.total - intmat.rank(self.basis, self.total) if self.basis else self.total

    def same(self, other) -> bool:
        return isinstance(other, LatticeConstraint) and self.coords == other.coords and self.basis == other.basis

    def meet(self, other: "LatticeConstraint") -> "LatticeConstraint":
        if self.coords != other.coords:
            raise UnsupportedError("lattice clauses over different coordinate maps")
        # intersection of row lattices: x = y*B1 = z*B2
        B1, B2 = self.basis, other.basis
        if not B1 or not B2:
            return LatticeConstraint(self.coords, [], check=False)
        stacked = B1 + [[-v for v in r] for r in B2]
        ker = intmat.left_kernel(stacked, self.total)
        rows = [intmat.vecmat(k[: len(B1)], B1, self.total) for k in ker]
        return LatticeConstraint(self.coords, rows, check=False)

    def describe(self) -> str:
        kinds = " x ".join(c.describe() for c in self.coords)
        return f"lattice constraint in {kinds}, basis rank {len(self.basis)}"


def _finite_tuple_closure(groups: Sequence[FiniteGroup], elems) -> frozenset:
    ident = tuple(G.identity for G in groups)
    seen = {ident}
    gens: List[tuple] = []
    for s in elems:
        if s in seen:
            continue
        gens.append(s)
        queue = list(seen)
        while queue:
            x = queue.pop()
            for g in gens:
                y = tuple(G.table[a][b] for G, a, b in zip(groups, x, g))
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
    return frozenset(seen)


class FiniteConstraint:
    """S given as an explicit set of tuples over finite groups G_i."""

    def __init__(self, maps: Sequence[QuotientMap], S, check: bool = True):
        self.maps = list(maps)
        self.groups: List[FiniteGroup] = [q.target for q in self.maps]
        for q in self.maps:
            if not isinstance(q.target, FiniteGroup) or q.is_product:
                raise PreconditionError("finite constraints need free-domain maps onto finite groups")
        self.S = frozenset(tuple(s) for s in S)
        if check:
            for q in self.maps:
                q.require_surjective()
            if len(self.S) == 0 or _finite_tuple_closure(self.groups, self.S) != self.S:
                raise PreconditionError("tuple set is not a subgroup of the product")

    def image(self, g: Sequence[Word]) -> tuple:
        return tuple(q.word_image(w) for q, w in zip(self.maps, g))

    def member(self, g: Sequence[Word]) -> bool:
        return self.image(g) in self.S

    def project(self, J: Sequence[int]) -> "FiniteConstraint":
        return FiniteConstraint([self.maps[j] for j in J], {tuple(s[j] for j in J) for s in self.S}, check=False)

    def intersect(self, J: Sequence[int]) -> "FiniteConstraint":
        Jset = set(J)
        ident = [G.identity for G in self.groups]
        keep = {
            tuple(s[j] for j in J)
            for s in self.S
            if all(s[i] == ident[i] for i in range(len(s)) if i not in Jset)
        }
        return FiniteConstraint([self.maps[j] for j in J], keep, check=False)

    def index(self) -> int:
        total = 1
        for G in self.groups:
            total *= G.order
        return total // len(self.S)

    def same(self, other) -> bool:
        return (
            isinstance(other, FiniteConstraint)
            and all(a is b for a, b in zip(self.maps, other.maps))
            and self.S == other.S
        )

    def describe(self) -> str:
        orders = " x ".join(str(G.order) for G in self.groups)
        return f"finite constraint in groups of orders {orders}, |S| = {len(self.S)}"


class ConjunctionConstraint:
    """Several clauses of incompatible kinds; only membership is exact."""

    def __init__(self, clauses: Sequence):
        self.clauses = list(clauses)

    def member(self, g) -> bool:
        return all(c.member(g) for c in self.clauses)

    def project(self, J):
        raise UnsupportedError("projection of a mixed clause system is not normalised")

    def intersect(self, J):
        return ConjunctionConstraint([c.intersect(J) for c in self.clauses])

    def index(self):
        return Unknown("mixed finite and lattice clauses cannot be normalised together")

    def same(self, other) -> bool:
        return (
            isinstance(other, ConjunctionConstraint)
            and len(self.clauses) == len(other.clauses)
            and all(a.same(b) for a, b in zip(self.clauses, other.clauses))
        )

    def describe(self) -> str:
        return "conjunction of " + "; ".join(c.describe() for c in self.clauses)


def combine_clauses(clauses: Sequence):
    """Merge clauses where an exact normal form exists."""
    clauses = list(clauses)
    if len(clauses) == 1:
        return clauses[0]
    lattices = [c for c in clauses if isinstance(c, LatticeConstraint)]
    others = [c for c in clauses if not isinstance(c, LatticeConstraint)]
    merged: List = []
    while lattices:
        base = lattices.pop(0)
        rest = []
        for c in lattices:
            if c.coords == base.coords:
                base = base.meet(c)
            else:
                rest.append(c)
        lattices = rest
        merged.append(base)
    merged += others
    return merged[0] if len(merged) == 1 else ConjunctionConstraint(merged)


# subgroups


class ProductSubgroup:
    """P <= Gamma_1 x ... x Gamma_n as the preimage of a constraint."""

    def __init__(self, ambient: ProductGroup, constraint, label: str = "P"):
        self.ambient = ambient
        self.constraint = constraint
        self.label = label
        if isinstance(constraint, (LatticeConstraint, FiniteConstraint)):
            doms = [c.group for c in constraint.coords] if isinstance(constraint, LatticeConstraint) else [q.domain for q in constraint.maps]
            if list(doms) != list(ambient.factors):
                raise PreconditionError("constraint factors do not match the ambient product")
        # set by fibre_product so homology can see the defining maps
        self.defining_maps: Optional[Tuple[QuotientMap, QuotientMap]] = None

    @property
    def n(self) -> int:
        return self.ambient.n

    def contains(self, g: Sequence[Word]) -> bool:
        return self.constraint.member(self.ambient.check(g))

    membership = contains

    def projection(self, J: Sequence[int]) -> "ProductSubgroup":
        """p_J(P) for 0-based positions J."""
        J = _subset(J, self.n)
        if J == tuple(range(self.n)):
            return self
        return ProductSubgroup(self.ambient.sub(J), self.constraint.project(J), f"p_{_fmt_set(J)}({self.label})")

    def intersection_with(self, J: Sequence[int]) -> "ProductSubgroup":
        """N_J = P meet Gamma_J, as a subgroup of Gamma_J."""
        J = _subset(J, self.n)
        if J == tuple(range(self.n)):
            return self
        return ProductSubgroup(self.ambient.sub(J), self.constraint.intersect(J), f"N_{_fmt_set(J)}({self.label})")

    def index(self):
        """[Gamma : P] as an int, INFINITE or Unknown."""
        return self.constraint.index()

    def projection_index(self, J: Sequence[int]):
        J = _subset(J, self.n)
        if isinstance(self.constraint, ConjunctionConstraint):
            return Unknown("mixed finite and lattice clauses cannot be projected exactly")
        return self.projection(J).index()

    def is_subdirect(self) -> bool:
        return all(self.projection_index([i]) == 1 for i in range(self.n))

    def require_subdirect(self) -> None:
        if not self.is_subdirect():
            bad = [i + 1 for i in range(self.n) if self.projection_index([i]) != 1]
            raise PreconditionError(f"not a subdirect product: projection to factor(s) {bad} is proper")

    def equals(self, other: "ProductSubgroup") -> bool:
        if self.ambient != other.ambient:
            return False
        return self.constraint.same(other.constraint)

    def sample(self, rng: random.Random, max_length: int = 4) -> Tuple[Word, ...]:
        """A random element of P (used by property tests)."""
        c = self.constraint
        if isinstance(c, LatticeConstraint):
            y = [rng.randint(-2, 2) for _ in c.basis]
            x = intmat.vecmat(y, c.basis, c.total) if c.basis else [0] * c.total
            out = []
            for coord, o, d, F in zip(c.coords, c.offs, c.dims, self.ambient.factors):
                w = coord.lift(x[o : o + d])
                u, v = F.random_word(rng, max_length), F.random_word(rng, max_length)
                z = F.random_word(rng, max_length)
                k = commutator(u, v) if coord.kind == "abelian" else commutator(z, commutator(u, v))
                out.append(w * k)
            return tuple(out)
        if isinstance(c, FiniteConstraint):
            s = rng.choice(sorted(c.S))
            out = []
            for q, x in zip(c.maps, s):
                w = q.domain.random_word(rng, max_length)
                k = q.lift(q.word_image(w)).inverse() * w
                out.append(q.lift(x) * k)
            return tuple(out)
        raise UnsupportedError("sampling a mixed clause system")

    def describe(self) -> str:
        return f"{self.label} <= product of free groups of ranks {self.ambient.ranks}: {self.constraint.describe()}"

    def __repr__(self) -> str:
        return f"<ProductSubgroup {self.label} ranks={self.ambient.ranks}>"


def _fmt_set(J: Sequence[int]) -> str:
    return "{" + ",".join(str(j + 1) for j in J) + "}"


def abelian_kernel(ranks: Sequence[int], M: Sequence[Sequence[int]], relations: Sequence[Sequence[int]] = (), label: str = "P") -> ProductSubgroup:
    """Kernel of Gamma -> Z^d / rowspace(relations), gamma -> sum M_i * ab(gamma_i).

    ``M`` has d rows and sum(ranks) columns (blocks in factor order).
    """
    ambient = ProductGroup.of_ranks(ranks)
    total = sum(ranks)
    for row in M:
        if len(row) != total:
            raise PreconditionError(f"kernel matrix row has {len(row)} entries, expected {total}")
    coords = [AbelianCoordinates(F) for F in ambient.factors]
    P = ProductSubgroup(ambient, LatticeConstraint.from_kernel(coords, M, relations), label)
    P.kernel_matrix = [list(r) for r in M]
    P.kernel_relations = [list(r) for r in relations]
    return P


def preimage_subgroup(maps: Sequence[QuotientMap], S, label: str = "P") -> ProductSubgroup:
    """P = preimage of the subgroup S <= G_1 x ... x G_n of finite groups."""
    ambient = ProductGroup([q.domain for q in maps])
    return ProductSubgroup(ambient, FiniteConstraint(maps, S), label)


def nilpotent_lattice_subgroup(maps: Sequence[QuotientMap], basis: Sequence[Sequence[int]], label: str = "P") -> ProductSubgroup:
    """P = preimage of the subgroup of prod N2(m_i) whose Mal'cev coordinate
    vectors form the lattice spanned by ``basis``."""
    coords = [NilpotentCoordinates(q) for q in maps]
    ambient = ProductGroup([q.domain for q in maps])
    return ProductSubgroup(ambient, LatticeConstraint(coords, basis), label)


# fibre products


def _same_target(q1: QuotientMap, q2: QuotientMap) -> bool:
    T1, T2 = q1.target, q2.target
    if T1 is T2:
        return True
    if type(T1) is not type(T2):
        return False
    if isinstance(T1, FiniteGroup):
        return T1.table == T2.table
    if isinstance(T1, AbelianGroup):
        return T1.ngens == T2.ngens and intmat.hermite_rows(T1.relations, T1.ngens) == intmat.hermite_rows(T2.relations, T2.ngens)
    return T1.m == T2.m


def fibre_product(q1: QuotientMap, q2: QuotientMap, label: str = "P") -> ProductSubgroup:
    """{(g1, g2) : q1(g1) = q2(g2)} in Gamma_1 x Gamma_2."""
    if q1.is_product or q2.is_product:
        raise PreconditionError("fibre products take maps out of free groups")
    if not _same_target(q1, q2):
        raise PreconditionError("fibre product maps must share a target")
    q1.require_surjective()
    q2.require_surjective()
    T = q1.target
    ambient = ProductGroup([q1.domain, q2.domain])
    if isinstance(T, FiniteGroup):
        q2 = QuotientMap(q2.domain, T, q2.images)
        S = {(x, x) for x in T.elements()}
        P = ProductSubgroup(ambient, FiniteConstraint([q1, q2], S, check=False), label)
    elif isinstance(T, AbelianGroup):
        m1, m2 = q1.domain.rank, q2.domain.rank
        M = [[q1.images[j][r] for j in range(m1)] + [-q2.images[j][r] for j in range(m2)] for r in range(T.ngens)]
        coords = [AbelianCoordinates(q1.domain), AbelianCoordinates(q2.domain)]
        P = ProductSubgroup(ambient, LatticeConstraint.from_kernel(coords, M, T.relations), label)
    else:
        q2 = QuotientMap(q2.domain, T, q2.images)
        c1, c2 = NilpotentCoordinates(q1), NilpotentCoordinates(q2)
        d = c1.dim
        basis = [[int(i == j) for j in range(d)] + [int(i == j) for j in range(d)] for i in range(d)]
        P = ProductSubgroup(ambient, LatticeConstraint([c1, c2], basis), label)
    P.defining_maps = (q1, q2)
    return P


# short exact sequences


class CosetQuotient:
    """H / K for a subgroup K of a middle group, with an equality test."""

    def __init__(self, equal: Callable, description: str, order, group=None):
        self.equal = equal
        self.description = description
        self.order = order
        self.group = group

    def __str__(self) -> str:
        return self.description


@dataclass
class ShortExactData:
    """kernel >-> middle ->> quotient, with the projection as a function."""

    kernel: object
    middle: object
    quotient: CosetQuotient
    project: Callable

    def describe(self) -> str:
        return f"{_name(self.kernel)} -> {_name(self.middle)} -> {self.quotient}"


def _name(x) -> str:
    if isinstance(x, ProductSubgroup):
        return x.label
    if isinstance(x, FreeGroup):
        return f"F{x.rank}"
    return str(x)


def _prime_factors(n: int) -> List[int]:
    out, p = [], 2
    while n > 1:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    return out


def finite_abelian_invariants(G: FiniteGroup) -> Optional[List[int]]:
    """Invariant factors d1 | d2 | ... of a finite abelian group, None if
    the group is not abelian.

    Uses #{x : x^(p^k) = 1} = p^(r_1 + ... + r_k), where r_k counts the
    cyclic p-primary summands of order at least p^k.
    """
    t = G.table
    if any(t[a][b] != t[b][a] for a in range(G.order) for b in range(a)):
        return None
    parts: Dict[int, List[int]] = {}
    for p in _prime_factors(G.order):
        prev, k, sizes = 1, 1, []
        while True:
            c = sum(1 for a in range(G.order) if G.power(a, p ** k) == G.identity)
            r, ratio = 0, c // prev
            while ratio > 1:
                ratio //= p
                r += 1
            if r == 0:
                break
            sizes.append(r)
            prev, k = c, k + 1
        sizes.append(0)
        parts[p] = sorted(
            (p ** (k + 1) for k in range(len(sizes) - 1) for _ in range(sizes[k] - sizes[k + 1])),
            reverse=True,
        )
    depth = max((len(v) for v in parts.values()), default=0)
    factors = []
    for i in range(depth):
        f = 1
        for lst in parts.values():
            if i < len(lst):
                f *= lst[i]
        factors.append(f)
    return sorted(factors)


def quotient_group(G: FiniteGroup, H: frozenset, K: frozenset) -> Tuple[FiniteGroup, Dict[int, int]]:
    """H/K as a FiniteGroup, K normal in H; returns the group and the map H -> H/K."""
    cosets: Dict[int, int] = {}
    reps: List[int] = []
    for h in sorted(H):
        if h in cosets:
            continue
        idx = len(reps)
        reps.append(h)
        for k in K:
            cosets[G.mul(h, k)] = idx
    table = [[cosets[G.mul(a, b)] for b in reps] for a in reps]
    return FiniteGroup(table, check=False), cosets


def describe_finite(G: FiniteGroup) -> str:
    inv = finite_abelian_invariants(G)
    if inv is not None:
        parts = [f"Z/{d}" for d in inv]
        return " x ".join(parts) if parts else "1"
    return f"non-abelian group of order {G.order}"


def _coset_quotient_for_last(P: ProductSubgroup) -> Tuple[CosetQuotient, Callable, Callable]:
    """Quotient Gamma_n / N_n with maps from T = p_{1..n-1}(P) and from Gamma_n."""
    n = P.n
    c = P.constraint
    if isinstance(c, LatticeConstraint):
        Nn = c.intersect([n - 1])
        coord = c.coords[n - 1]
        o, d = c.offs[n - 1], c.dims[n - 1]

        def diff_in_kernel(x, y):
            # x^-1 y in N_n, computed in coordinates of the quotient group
            if coord.kind == "abelian":
                v = [b - a for a, b in zip(x, y)]
            else:
                N = coord.N
                z = N.mul(N.inv(coord.element(x)), coord.element(y))
                v = list(z[0]) + list(z[1])
            return intmat.in_row_lattice(Nn.basis, v) if Nn.basis else not any(v)

        def from_head(t):
            v = c.vector(list(t) + [coord.group.identity])
            head_cols = list(range(o))
            B = c.basis
            if not B:
                if any(v):
                    raise PreconditionError("element is not in the projection")
                return [0] * d
            sol = intmat.solve_left([[r[k] for k in head_cols] for r in B], v[:o], o)
            if sol is None:
                raise PreconditionError("element is not in the projection")
            # tail of a lattice point agreeing with t on the head
            return intmat.vecmat(sol, B, c.total)[o : o + d]

        def from_last(w):
            return coord.value(w)

        if coord.kind == "abelian":
            A = AbelianGroup(d, Nn.basis)
            desc = A.describe()
            order = A.order
        else:
            idx = intmat.lattice_index(Nn.basis, d) if Nn.basis else INFINITE
            desc = f"{coord.describe()} modulo a coordinate sublattice of index {idx}"
            order = idx
        return CosetQuotient(diff_in_kernel, desc, order), from_head, from_last
    if isinstance(c, FiniteConstraint):
        G = c.groups[n - 1]
        e_head = tuple(Gi.identity for Gi in c.groups[:-1])
        K = frozenset(s[-1] for s in c.S if s[:-1] == e_head)
        H = frozenset(s[-1] for s in c.S)
        Qg, cosets = quotient_group(G, H, K)

        def equal(x, y):
            return cosets[x] == cosets[y]

        def from_head(t):
            img = tuple(q.word_image(w) for q, w in zip(c.maps[:-1], t))
            for s in c.S:
                if s[:-1] == img:
                    return s[-1]
            raise PreconditionError("element is not in the projection")

        def from_last(w):
            return c.maps[-1].word_image(w)

        return CosetQuotient(equal, describe_finite(Qg), Qg.order, Qg), from_head, from_last
    raise UnsupportedError("decomposition of a mixed clause system")


@dataclass
class Decomposition:
    T: ProductSubgroup
    seq1: ShortExactData
    seq2: ShortExactData

    def reconstruct_contains(self, g: Sequence[Word]) -> bool:
        """Membership in the fibre product of seq1 and seq2."""
        t, last = tuple(g[:-1]), g[-1]
        if not self.T.contains(t):
            return False
        return self.seq1.quotient.equal(self.seq1.project(t), self.seq2.project(last))


def decompose(P: ProductSubgroup) -> Decomposition:
    """Split P as the fibre product of T = p_{1..n-1}(P) and Gamma_n over
    Q = P / (N_{1..n-1} x N_n)."""
    n = P.n
    if n < 2:
        raise PreconditionError("decompose needs at least two factors")
    P.require_subdirect()
    head = list(range(n - 1))
    T = P.projection(head)
    N_head = P.intersection_with(head)
    N_last = P.intersection_with([n - 1])
    quotient, from_head, from_last = _coset_quotient_for_last(P)
    seq1 = ShortExactData(N_head, T, quotient, from_head)
    seq2 = ShortExactData(N_last, P.ambient.factors[-1], quotient, from_last)
    return Decomposition(T, seq1, seq2)


def diagram_sequences(P: ProductSubgroup) -> Tuple[ShortExactData, ShortExactData]:
    """N_1 >-> P ->> Gamma_2 and N_2 >-> P ->> Gamma_1 for a two-factor P."""
    if P.n != 2:
        raise PreconditionError("the diagram sequences are defined for two factors")
    P.require_subdirect()
    F1, F2 = P.ambient.factors
    s1 = ShortExactData(P.intersection_with([0]), P, CosetQuotient(lambda x, y: x == y, f"F{F2.rank}", INFINITE), lambda g: g[1])
    s2 = ShortExactData(P.intersection_with([1]), P, CosetQuotient(lambda x, y: x == y, f"F{F1.rank}", INFINITE), lambda g: g[0])
    return s1, s2


# virtual surjection


@dataclass
class VSReport:
    k: int
    verdict: bool
    table: Dict[Tuple[int, ...], object]
    violation: Optional[Tuple[int, ...]] = None
    certificate: str = ""

    def lines(self) -> List[str]:
        out = [f"virtually surjects to {self.k}-tuples: {'true' if self.verdict else 'false'}"]
        for J, idx in self.table.items():
            out.append(f"  index of p_{_fmt_set(J)}: {idx}")
        if self.violation is not None:
            out.append(f"violation: {_fmt_set(self.violation)} ({self.certificate})")
        return out


def virtually_surjects(P: ProductSubgroup, k: int) -> VSReport:
    n = P.n
    if not 1 <= k <= n:
        raise PreconditionError(f"k must lie in 1..{n}")
    if n > max_factors():
        raise PreconditionError(f"{n} factors exceeds the subset-enumeration cap {max_factors()}")
    table: Dict[Tuple[int, ...], object] = {}
    violation = None
    cert = ""
    for J in combinations(range(n), k):
        idx = P.projection_index(J)
        table[J] = idx
        if violation is None and not is_finite(idx):
            violation = J
            if idx is INFINITE and isinstance(P.constraint, LatticeConstraint):
                free = P.constraint.project(J).cokernel_free_rank()
                cert = f"quotient has free rank {free}"
            else:
                cert = str(idx)
    return VSReport(k, violation is None, table, violation, cert)


def kernel_vs_step(P: ProductSubgroup, k: int) -> VSReport:
    """If P virtually surjects to k-tuples, check N_{1..n-1} does so to (k-1)-tuples."""
    if k < 2:
        raise PreconditionError("the step needs k >= 2")
    if not virtually_surjects(P, k).verdict:
        raise PreconditionError(f"P does not virtually surject to {k}-tuples")
    N = P.intersection_with(range(P.n - 1))
    report = virtually_surjects(N, k - 1)
    if not report.verdict:
        raise InconsistencyError("N_{1..n-1} fails to virtually surject to (k-1)-tuples")
    return report


# exchange identity


@dataclass
class ExchangeResult:
    lhs: ProductSubgroup
    rhs: ProductSubgroup
    equal: bool


def exchange(P: ProductSubgroup, I: Sequence[int], J: Sequence[int]) -> ExchangeResult:
    """Compare p_{I meet J}(P meet Gamma_I) with p_J(P) meet Gamma_{I meet J}."""
    n = P.n
    I, J = _subset(I, n), _subset(J, n)
    if set(I) | set(J) != set(range(n)):
        raise PreconditionError("I and J must cover all factors")
    K = tuple(sorted(set(I) & set(J)))
    if not K:
        raise PreconditionError("I and J must intersect")
    lhs = P.intersection_with(I).projection([I.index(x) for x in K])
    rhs = P.projection(J).intersection_with([J.index(x) for x in K])
    equal = lhs.equals(rhs)
    if not equal:
        raise InconsistencyError(f"exchange identity failed for I={_fmt_set(I)}, J={_fmt_set(J)}")
    return ExchangeResult(lhs, rhs, equal)


# sections


class SplitSection:
    """gamma_1 -> (gamma_1, sigma(pi_1(gamma_1))) into the fibre product."""

    def __init__(self, q1: QuotientMap, q2: QuotientMap, sigma: Sequence[Word]):
        if not _same_target(q1, q2):
            raise PreconditionError("section maps must share a target")
        T = q1.target
        self.q1, self.q2 = q1, q2
        self.sigma = list(sigma)
        F2 = q2.domain
        for w in self.sigma:
            if w.group != F2:
                raise PreconditionError("section images must lie in the second factor")
        if isinstance(T, AbelianGroup):
            gens = [tuple(int(i == j) for j in range(T.ngens)) for i in range(T.ngens)]
        elif isinstance(T, FiniteGroup):
            if T.order != 1:
                raise PreconditionError("a nontrivial finite group has no section into a free group")
            gens = []
        else:
            gens = [T.gen(i) for i in range(T.m)]
        if len(self.sigma) != len(gens):
            raise PreconditionError(f"section needs {len(gens)} generator images, got {len(self.sigma)}")
        for x, w in zip(gens, self.sigma):
            if not T.key(q2.word_image(w)) == T.key(x):
                raise PreconditionError(f"sigma is not a section: pi_2(sigma({T.fmt(x)})) != {T.fmt(x)}")
        if isinstance(T, AbelianGroup):
            for u, v in combinations(self.sigma, 2):
                if not commutator(u, v).is_identity():
                    raise PreconditionError("section images do not commute, so sigma is not a homomorphism")
            for r in T.relations:
                if not self._evaluate(r).is_identity():
                    raise PreconditionError("section images violate a relation of the target")
        elif isinstance(T, Nilpotent2Group) and T.m >= 2:
            raise PreconditionError("a nonabelian nilpotent group has no section into a free group")
        self.fibre = fibre_product(q1, q2)

    def _evaluate(self, vec: Sequence[int]) -> Word:
        w = self.q2.domain.identity
        for s, e in zip(self.sigma, vec):
            w = w * (s ** e)
        return w

    def __call__(self, g: Word) -> Tuple[Word, Word]:
        T = self.q1.target
        img = self.q1.word_image(g)
        if isinstance(T, AbelianGroup):
            return (g, self._evaluate(img))
        if isinstance(T, FiniteGroup):
            return (g, self.q2.domain.identity)
        return (g, self._evaluate(img[0]))


def split_section(q1: QuotientMap, q2: QuotientMap, sigma: Sequence[Word]) -> SplitSection:
    return SplitSection(q1, q2, sigma)
