"""Iterated-commutator witnesses for nilpotent quotients of subdirect products.

If P virtually surjects to k-tuples, split {2..n} into s blocks of size at
most k-1.  For gamma_m in the finite-index subgroup Gamma_1' each block
admits a lift g_m in P with first coordinate gamma_m and identity on the
block.  The right-nested commutator of the lifts is trivial on every
coordinate except the first, so the commutator of the gammas lies in N_1.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, List, Optional, Sequence, Tuple

from . import intmat
from .errors import CapExceeded, PreconditionError, UnsupportedError
from .product import (
    FiniteConstraint,
    LatticeConstraint,
    ProductSubgroup,
    finite_abelian_invariants,
    quotient_group,
    virtually_surjects,
)
from .quotients import AbelianGroup, FiniteGroup, lower_central_class
from .stallings import SubgroupGraph
from .words import Word, iterated_commutator


class NotVirtuallySurjective(PreconditionError):
    pass


class OutsideFiniteIndexSubgroup(PreconditionError):
    pass


def class_bound(n: int, k: int) -> int:
    """ceil((n-1)/(k-1)) - 1."""
    if n < 2:
        raise PreconditionError("class bound needs n >= 2")
    if k < 2 or k > n:
        raise PreconditionError("class bound needs 2 <= k <= n")
    return -(-(n - 1) // (k - 1)) - 1


def partition_indices(n: int, k: int) -> List[Tuple[int, ...]]:
    """Consecutive blocks of size k-1 covering factors 2..n (0-based: 1..n-1)."""
    if n < 2 or k < 2:
        raise PreconditionError("partition needs n >= 2 and k >= 2")
    rest = list(range(1, n))
    return [tuple(rest[i : i + k - 1]) for i in range(0, len(rest), k - 1)]


def random_partition(n: int, k: int, rng: random.Random) -> List[Tuple[int, ...]]:
    """A random partition of 1..n-1 into ceil((n-1)/(k-1)) blocks of size <= k-1."""
    rest = list(range(1, n))
    rng.shuffle(rest)
    s = -(-(n - 1) // (k - 1))
    blocks: List[List[int]] = [[] for _ in range(s)]
    # deal round-robin so no block exceeds k-1
    for i, j in enumerate(rest):
        blocks[i % s].append(j)
    return [tuple(sorted(b)) for b in blocks]


def _check_partition(n: int, k: int, partition: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
    parts = [tuple(sorted(b)) for b in partition]
    flat = sorted(j for b in parts for j in b)
    if flat != list(range(1, n)):
        raise PreconditionError("partition blocks must cover factors 2..n exactly once")
    if any(len(b) > k - 1 or not b for b in parts):
        raise PreconditionError(f"partition blocks must have between 1 and {k - 1} elements")
    return parts


def in_gamma1_prime(P: ProductSubgroup, partition: Sequence[Sequence[int]], gamma: Word) -> bool:
    """gamma lies in p_{{1} u I_m}(P) meet Gamma_1 for every block I_m."""
    for block in partition:
        J = (0,) + tuple(block)
        proj = P.projection(J)
        g = (gamma,) + tuple(P.ambient.factors[j].identity for j in block)
        if not proj.contains(g):
            return False
    return True


def gamma1_prime_index(P: ProductSubgroup, partition: Sequence[Sequence[int]]) -> List[object]:
    """Index in Gamma_1 of each subgroup p_1(N_{complement of I_m})."""
    out = []
    for block in partition:
        keep = [j for j in range(P.n) if j not in block]
        out.append(P.intersection_with(keep).projection([0]).index())
    return out


def power_into_gamma1_prime(P: ProductSubgroup, partition, w: Word, limit: int = 5000) -> Word:
    """Smallest positive power of w lying in Gamma_1'."""
    acc = w
    for _ in range(limit):
        if in_gamma1_prime(P, partition, acc):
            return acc
        acc = acc * w
    raise CapExceeded(f"no power of {w} below {limit} lies in Gamma_1'")


def find_lift(P: ProductSubgroup, gamma: Word, block: Sequence[int], cap: int = 12) -> Optional[Tuple[Word, ...]]:
    """g in P with first coordinate gamma and identity on ``block``, or None."""
    c = P.constraint
    F = P.ambient.factors
    block = tuple(block)
    if isinstance(c, LatticeConstraint):
        fixed = [0] + list(block)
        cols: List[int] = []
        target: List[int] = []
        for j in fixed:
            cols += range(c.offs[j], c.offs[j] + c.dims[j])
            target += c.coords[j].value(gamma) if j == 0 else [0] * c.dims[j]
        B = c.basis
        if not B:
            sol = [] if not any(target) else None
        else:
            sol = intmat.solve_left([[r[k] for k in cols] for r in B], target, len(cols))
        if sol is None:
            return None
        x = intmat.vecmat(sol, B, c.total) if B else [0] * c.total
        out = []
        for j in range(P.n):
            if j == 0:
                out.append(gamma)
            elif j in block:
                out.append(F[j].identity)
            else:
                out.append(c.coords[j].lift(x[c.offs[j] : c.offs[j] + c.dims[j]]))
        g = tuple(out)
    elif isinstance(c, FiniteConstraint):
        first = c.maps[0].word_image(gamma)
        e = [G.identity for G in c.groups]
        hit = next(
            (s for s in sorted(c.S) if s[0] == first and all(s[j] == e[j] for j in block)),
            None,
        )
        if hit is None:
            return None
        out = []
        for j in range(P.n):
            if j == 0:
                out.append(gamma)
            elif j in block:
                out.append(F[j].identity)
            else:
                out.append(c.maps[j].lift(hit[j], cap))
        g = tuple(out)
    else:
        raise UnsupportedError("lifts through a mixed clause system")
    if not P.contains(g):
        raise PreconditionError("constructed lift is not in P")
    return g


@dataclass
class WitnessReport:
    partition: List[Tuple[int, ...]]
    gammas: List[Word]
    lifts: List[Tuple[Word, ...]]
    commutator: Tuple[Word, ...]
    c: Word
    trivial_outside_first: bool
    in_P: bool
    in_N1: bool

    @property
    def verdict(self) -> bool:
        return self.trivial_outside_first and self.in_P and self.in_N1

    def lines(self) -> List[str]:
        fmt = lambda b: "{" + ",".join(str(j + 1) for j in b) + "}"
        out = [
            "statement: iterated commutator of lifts lies in N_1",
            "partition: " + " ".join(fmt(b) for b in self.partition),
        ]
        for i, (gm, g) in enumerate(zip(self.gammas, self.lifts), 1):
            out.append(f"gamma_{i}: {gm}")
            out.append(f"lift_{i}: " + " ; ".join(str(w) for w in g))
        out.append("commutator: " + " ; ".join(str(w) for w in self.commutator))
        out.append(f"c: {self.c}")
        out.append(f"trivial outside factor 1: {str(self.trivial_outside_first).lower()}")
        out.append(f"commutator in P: {str(self.in_P).lower()}")
        out.append(f"c in N_1: {str(self.in_N1).lower()}")
        out.append(f"verdict: {str(self.verdict).lower()}")
        return out


def commutator_witness(
    P: ProductSubgroup,
    k: int,
    gammas: Sequence[Word],
    partition: Optional[Sequence[Sequence[int]]] = None,
    cap: int = 12,
) -> WitnessReport:
    n = P.n
    if n < 2:
        raise PreconditionError("witness needs at least two factors")
    P.require_subdirect()
    if not virtually_surjects(P, k).verdict:
        raise NotVirtuallySurjective(f"P does not virtually surject to {k}-tuples")
    parts = _check_partition(n, k, partition if partition is not None else partition_indices(n, k))
    if len(gammas) != len(parts):
        raise PreconditionError(f"expected {len(parts)} elements gamma, got {len(gammas)}")
    lifts = []
    for gm, block in zip(gammas, parts):
        if not in_gamma1_prime(P, parts, gm):
            raise OutsideFiniteIndexSubgroup(f"gamma = {gm} is outside Gamma_1'")
        g = find_lift(P, gm, block, cap)
        if g is None:
            raise OutsideFiniteIndexSubgroup(f"no lift of {gm} trivial on the block")
        lifts.append(g)
    comm = tuple(iterated_commutator([g[i] for g in lifts]) for i in range(n))
    N1 = P.intersection_with([0])
    return WitnessReport(
        partition=parts,
        gammas=list(gammas),
        lifts=lifts,
        commutator=comm,
        c=comm[0],
        trivial_outside_first=all(w.is_identity() for w in comm[1:]),
        in_P=P.contains(comm),
        in_N1=N1.contains((comm[0],)),
    )


def quotient_class(P: ProductSubgroup, partition: Optional[Sequence[Sequence[int]]] = None, k: Optional[int] = None):
    """Nilpotency class of Gamma_1' / (Gamma_1' meet N_1)."""
    if partition is None:
        if k is None:
            raise PreconditionError("give a partition or k")
        partition = partition_indices(P.n, k)
    c = P.constraint
    blocks = [[j for j in range(P.n) if j not in b] for b in partition]
    pieces = [P.intersection_with(keep).projection([0]).constraint for keep in blocks]
    K = P.intersection_with([0]).constraint
    if isinstance(c, LatticeConstraint):
        H = pieces[0]
        for other in pieces[1:]:
            H = H.meet(other)
        if all(_in_lattice(K.basis, row) for row in H.basis):
            return 0
        coord = c.coords[0]
        if coord.kind == "abelian":
            return 1
        N = coord.N
        m = N.m
        for u, v in combinations(H.basis, 2):
            z = [0] * m + list(N.wedge(u[:m], v[:m]))
            if not _in_lattice(K.basis, z):
                return 2
        return 1
    if isinstance(c, FiniteConstraint):
        G = c.groups[0]
        H = frozenset.intersection(*[frozenset(s[0] for s in p.S) for p in pieces])
        Kset = frozenset(s[0] for s in K.S)
        Qg, _ = quotient_group(G, H, Kset)
        return lower_central_class(Qg)
    raise UnsupportedError("quotient class of a mixed clause system")


def _in_lattice(B, v) -> bool:
    return intmat.in_row_lattice(B, v) if B else not any(v)


# finite-index normal form with an abelian quotient


@dataclass
class StallingsBieriForm:
    subgroups: List[SubgroupGraph]
    A: object
    phi: object
    description: str

    def kernel_contains(self, g: Sequence[Word]) -> bool:
        x = self.phi(g)
        return self.A.key(x) == self.A.key(self.A.identity)

    def in_domain(self, g: Sequence[Word]) -> bool:
        return all(H.contains(w) for H, w in zip(self.subgroups, g))


def _best_abelian_section(G: FiniteGroup, K: frozenset) -> frozenset:
    """Largest subgroup B <= G with [B, B] <= K; ties prefer normal subgroups,
    then the lexicographically smallest element list."""
    elems = list(G.elements())
    seeds: List[Tuple[int, ...]] = [(g,) for g in elems]
    if G.order <= 200:
        seeds += list(combinations(elems, 2))
    seen = set()
    best, best_key = frozenset([G.identity]), None
    for seed in seeds:
        B = G.closure(seed)
        if B in seen:
            continue
        seen.add(B)
        if any(G.commutator(a, b) not in K for a in B for b in B):
            continue
        normal = all(G.mul(G.mul(G.inv(g), b), g) in B for g in elems for b in B)
        key = (-len(B), not normal, tuple(sorted(B)))
        if best_key is None or key < best_key:
            best, best_key = B, key
    return best


def stallings_bieri_form(P: ProductSubgroup, k: int) -> StallingsBieriForm:
    n = P.n
    if 2 * k <= n:
        raise PreconditionError("the abelian normal form needs 2k > n")
    if not virtually_surjects(P, k).verdict:
        raise NotVirtuallySurjective(f"P does not virtually surject to {k}-tuples")
    c = P.constraint
    F = P.ambient.factors
    if isinstance(c, LatticeConstraint):
        if any(co.kind != "abelian" for co in c.coords):
            raise UnsupportedError("normal form for nilpotent coordinate constraints is not implemented")
        A = AbelianGroup(c.total, c.basis)
        subgroups = [SubgroupGraph.fold(f, f.gens()) for f in F]
        return StallingsBieriForm(subgroups, A, lambda g: tuple(c.vector(g)), f"A = {A.describe()}, finite-index subgroups are the factors")
    if not isinstance(c, FiniteConstraint):
        raise UnsupportedError("normal form of a mixed clause system")
    groups = c.groups
    Bs = []
    for i, G in enumerate(groups):
        e = [H.identity for H in groups]
        Ki = frozenset(s[i] for s in c.S if all(s[j] == e[j] for j in range(n) if j != i))
        Bs.append(_best_abelian_section(G, Ki))
    subgroups = []
    for q, G, B in zip(c.maps, groups, Bs):
        cosets = {}
        reps = []
        for g in sorted(G.elements()):
            if g in cosets:
                continue
            reps.append(g)
            for b in B:
                cosets[G.mul(b, g)] = len(reps) - 1
        perms = [[cosets[G.mul(r, img)] for r in reps] for img in q.images]
        subgroups.append(SubgroupGraph.from_action(q.domain, perms, cosets[G.identity]))
    # A = prod B_i / (S meet prod B_i), abelian because [B_i, B_i] <= S
    box = [tuple(t) for t in _product_sets(Bs)]
    S_box = frozenset(t for t in box if t in c.S)
    index = {t: None for t in box}
    reps: List[tuple] = []
    for t in box:
        if index[t] is not None:
            continue
        reps.append(t)
        for s in S_box:
            u = tuple(G.mul(a, b) for G, a, b in zip(groups, t, s))
            index[u] = len(reps) - 1
    table = [[index[tuple(G.mul(a, b) for G, a, b in zip(groups, x, y))] for y in reps] for x in reps]
    A = FiniteGroup(table, check=False)
    inv = finite_abelian_invariants(A)
    if inv is None:
        raise PreconditionError("chosen finite-index subgroups do not give an abelian quotient")

    def phi(g):
        img = tuple(q.word_image(w) for q, w in zip(c.maps, g))
        if img not in index:
            raise PreconditionError("element is outside the finite-index subgroup")
        return index[img]

    desc = "A = " + (" x ".join(f"Z/{d}" for d in inv) if inv else "1")
    desc += ", subgroup indices " + ",".join(str(len(G.elements()) // len(B)) for G, B in zip(groups, Bs))
    return StallingsBieriForm(subgroups, A, phi, desc)


def _product_sets(sets: Sequence[Iterable[int]]):
    out: List[tuple] = [()]
    for s in sets:
        out = [t + (x,) for t in out for x in sorted(s)]
    return out
