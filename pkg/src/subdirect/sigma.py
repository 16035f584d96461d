"""Characters on products of free groups and the finiteness length of
kernels of maps onto free abelian groups.

Membership of a character in Sigma^k depends only on which factor blocks
it vanishes on.  Let t count the live blocks on free factors of rank at
least 2 and z the live blocks on rank-1 factors.  Each live rank-2+ block
sits in Sigma^0 and each live Z block in Sigma^infinity; the product
inequality adds one level per merge, giving Sigma^(t-1), or Sigma^infinity
when z > 0.  Failure of membership (t <= k) is asserted only when every
vanishing block sits on a factor of rank at least 2; elsewhere the answer
is UNKNOWN.  This is the calibrated oracle: it reproduces the classical
kernels of products of free groups onto Z but is not derived from a
general converse.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import List, Optional, Sequence, Tuple, Union

from . import intmat
from .errors import INFINITE, Infinity, PreconditionError


class Membership(enum.Enum):
    MEMBER = "MEMBER"
    NON_MEMBER = "NON_MEMBER"
    UNKNOWN = "UNKNOWN"

    def __str__(self) -> str:
        return self.value


MEMBER, NON_MEMBER, UNKNOWN = Membership.MEMBER, Membership.NON_MEMBER, Membership.UNKNOWN

Length = Union[int, Infinity]


@dataclass(frozen=True)
class Interval:
    """Finiteness length known only to lie in [lo, hi]."""

    lo: int
    hi: Length

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def _le(a: Length, b: Length) -> bool:
    if b is INFINITE:
        return True
    if a is INFINITE:
        return False
    return a <= b


def _min(a: Length, b: Length) -> Length:
    return a if _le(a, b) else b


class Character:
    """chi on F_{r_1} x ... x F_{r_n}, stored up to positive scaling.

    The representative has its first nonzero coordinate equal to +1 or -1.
    """

    def __init__(self, ranks: Sequence[int], blocks: Sequence[Sequence]):
        if len(ranks) != len(blocks):
            raise PreconditionError("one block per factor required")
        vals = []
        for r, b in zip(ranks, blocks):
            if r < 1:
                raise PreconditionError("factor ranks must be positive")
            if len(b) != r:
                raise PreconditionError(f"block {list(b)} does not match rank {r}")
            vals.append([Fraction(x) for x in b])
        first = next((x for b in vals for x in b if x != 0), None)
        if first is None:
            raise PreconditionError("the trivial character is not on the character sphere")
        scale = abs(first)
        self.ranks = list(ranks)
        self.blocks: List[Tuple[Fraction, ...]] = [tuple(x / scale for x in b) for b in vals]

    def restrict(self, i: int) -> Tuple[Tuple[Fraction, ...], bool]:
        """Block i and whether it is identically zero."""
        if not 0 <= i < len(self.blocks):
            raise PreconditionError(f"factor index {i + 1} out of range")
        b = self.blocks[i]
        return b, not any(b)

    def pattern(self) -> Tuple[bool, ...]:
        return tuple(any(b) for b in self.blocks)

    def counts(self) -> Tuple[int, int, bool]:
        """(t, z, some vanishing block sits on a rank-1 factor)."""
        t = z = 0
        zero_rank1 = False
        for r, live in zip(self.ranks, self.pattern()):
            if live:
                if r >= 2:
                    t += 1
                else:
                    z += 1
            elif r == 1:
                zero_rank1 = True
        return t, z, zero_rank1

    def __eq__(self, other) -> bool:
        return isinstance(other, Character) and self.ranks == other.ranks and self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash((tuple(self.ranks), tuple(self.blocks)))

    def __str__(self) -> str:
        return " | ".join(" ".join(str(x) for x in b) for b in self.blocks)


def _pattern_level(ranks: Sequence[int], live: Sequence[bool]) -> Tuple[Length, bool]:
    """(lower bound on the Sigma level, whether the bound is exact)."""
    t = sum(1 for r, l in zip(ranks, live) if l and r >= 2)
    z = sum(1 for r, l in zip(ranks, live) if l and r == 1)
    zero_rank1 = any(not l and r == 1 for r, l in zip(ranks, live))
    if z > 0:
        return INFINITE, True
    return t - 1, not zero_rank1


def sigma_member(chi: Character, k: int) -> Membership:
    if k < 0:
        raise PreconditionError("Sigma levels are non-negative")
    if k == 0:
        return MEMBER
    level, exact = _pattern_level(chi.ranks, chi.pattern())
    if _le(k, level):
        return MEMBER
    return NON_MEMBER if exact else UNKNOWN


class KernelSpec:
    """phi: F_{r_1} x ... x F_{r_n} -> Z^d given by the block matrix M (d rows)."""

    def __init__(self, ranks: Sequence[int], M: Sequence[Sequence[int]]):
        self.ranks = list(ranks)
        if any(r < 1 for r in self.ranks):
            raise PreconditionError("factor ranks must be positive")
        total = sum(self.ranks)
        self.M = [list(map(int, row)) for row in M]
        for row in self.M:
            if len(row) != total:
                raise PreconditionError(f"row {row} has {len(row)} entries, expected {total}")
        self.d = len(self.M)
        self.offs = []
        off = 0
        for r in self.ranks:
            self.offs.append(off)
            off += r

    @property
    def n(self) -> int:
        return len(self.ranks)

    def block(self, i: int) -> List[List[int]]:
        o, r = self.offs[i], self.ranks[i]
        return [row[o : o + r] for row in self.M]

    def is_surjective(self) -> bool:
        if self.d == 0:
            return True
        cols = intmat.transpose(self.M)
        return intmat.lattice_index(cols, self.d) == 1

    def require_surjective(self) -> None:
        if not self.is_surjective():
            raise PreconditionError("phi is not surjective onto Z^d")

    def stacked(self, Z: Sequence[int]) -> List[List[int]]:
        """d x (sum of ranks in Z) matrix of the chosen blocks side by side."""
        rows = [[] for _ in range(self.d)]
        for i in Z:
            for r, brow in zip(rows, self.block(i)):
                r.extend(brow)
        return rows

    def transformed(self, U: Sequence[Sequence[int]]) -> "KernelSpec":
        return KernelSpec(self.ranks, intmat.matmul(U, self.M))

    def permuted(self, perm: Sequence[int]) -> "KernelSpec":
        ranks = [self.ranks[p] for p in perm]
        rows = []
        for row in self.M:
            new = []
            for p in perm:
                new += row[self.offs[p] : self.offs[p] + self.ranks[p]]
            rows.append(new)
        return KernelSpec(ranks, rows)


def realizable_patterns(spec: KernelSpec) -> List[Tuple[bool, ...]]:
    """All live/vanishing block patterns of characters lambda*M, lambda != 0.

    For a vanishing set Z, the admissible lambda form the subspace K_Z, the
    left kernel of the blocks in Z.  The pattern is realised iff K_Z != 0
    and K_Z is not inside the left kernel of any other block, since a
    nonzero space is never a finite union of proper subspaces over Q.
    """
    n, d = spec.n, spec.d
    if d == 0:
        return []
    out = []
    for size in range(n + 1):
        for Z in combinations(range(n), size):
            if Z:
                K = intmat.left_kernel(spec.stacked(Z), sum(spec.ranks[i] for i in Z))
            else:
                K = intmat.identity(d)
            if not K:
                continue
            ok = True
            for j in range(n):
                if j in Z:
                    continue
                if not any(any(v) for v in intmat.matmul(K, spec.block(j))):
                    ok = False
                    break
            if ok:
                out.append(tuple(i not in Z for i in range(n)))
    return out


def finiteness_length(spec: KernelSpec):
    """Largest m with ker(phi) of type F_m: an int, INFINITE, or an Interval."""
    spec.require_surjective()
    if spec.d == 0:
        return INFINITE
    lo: Length = INFINITE
    hi: Length = INFINITE
    for live in realizable_patterns(spec):
        level, exact = _pattern_level(spec.ranks, live)
        lo = _min(lo, level)
        if exact:
            hi = _min(hi, level)
    if lo == hi:
        return lo
    return Interval(lo, hi)


@dataclass
class SigmaFamily:
    d: int
    patterns: List[Tuple[bool, ...]]

    def lines(self) -> List[str]:
        out = [f"characters: lambda * M for nonzero lambda in Q^{self.d}"]
        for p in self.patterns:
            live = [str(i + 1) for i, l in enumerate(p) if l]
            out.append("  live blocks: {" + ",".join(live) + "}")
        return out


def s_gamma_p(spec: KernelSpec) -> SigmaFamily:
    """Characters of the product vanishing on ker(phi), by zero pattern."""
    spec.require_surjective()
    return SigmaFamily(spec.d, realizable_patterns(spec))


def abelian_n12(k: int, l: int, n: int) -> Optional[str]:
    """Fibre-product finiteness over a virtually abelian quotient: type
    F_{n+1} when the kernels are of types F_k, F_l with k + l >= n."""
    if min(k, l, n) < 0:
        raise PreconditionError("levels are non-negative")
    return f"F_{n + 1}" if k + l >= n else None
