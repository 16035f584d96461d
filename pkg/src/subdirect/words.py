"""Free groups and freely reduced words.

A letter is a nonzero int: ``i + 1`` is the i-th generator and ``-(i + 1)``
its inverse.  Words are immutable and always stored freely reduced.
"""

from __future__ import annotations

import random
import re
import string
from typing import Iterable, List, Optional, Sequence, Tuple

from .errors import ParseError, PreconditionError


def _default_labels(rank: int) -> Tuple[str, ...]:
    if rank <= 26:
        return tuple(string.ascii_lowercase[:rank])
    return tuple(f"x{i + 1}" for i in range(rank))


def free_reduce(letters: Iterable[int]) -> Tuple[int, ...]:
    """Cancel adjacent inverse pairs with a stack (single left-to-right pass)."""
    out: List[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


class FreeGroup:
    """Free group on ``rank`` labelled generators."""

    def __init__(self, rank: int, labels: Optional[Sequence[str]] = None):
        if rank < 1:
            raise PreconditionError("free group rank must be at least 1")
        labels = tuple(labels) if labels is not None else _default_labels(rank)
        if len(labels) != rank:
            raise PreconditionError(f"expected {rank} labels, got {len(labels)}")
        if len(set(labels)) != rank:
            raise PreconditionError("generator labels must be distinct")
        for lab in labels:
            if not lab or any(c.isspace() for c in lab) or "^" in lab or lab == "1":
                raise PreconditionError(f"invalid generator label {lab!r}")
        self.rank = rank
        self.labels = labels
        self._index = {lab: i for i, lab in enumerate(labels)}

    def __repr__(self) -> str:
        return f"FreeGroup({self.rank}, {list(self.labels)!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, FreeGroup) and self.labels == other.labels

    def __hash__(self) -> int:
        return hash(self.labels)

    @property
    def identity(self) -> "Word":
        return Word(self, ())

    def gen(self, i: int) -> "Word":
        if not 0 <= i < self.rank:
            raise PreconditionError(f"generator index {i} out of range")
        return Word(self, (i + 1,))

    def gens(self) -> List["Word"]:
        return [self.gen(i) for i in range(self.rank)]

    def label_index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise PreconditionError(f"unknown generator label {label!r}") from None

    def word(self, letters: Iterable[int]) -> "Word":
        letters = tuple(letters)
        for x in letters:
            if x == 0 or abs(x) > self.rank:
                raise PreconditionError(f"letter {x} not in a rank-{self.rank} free group")
        return Word(self, free_reduce(letters))

    def parse(self, text: str, line: int = 0, source: str = "") -> "Word":
        """Parse ``"a b^-1 a^3"``; ``"1"`` (or the empty string) is the identity."""
        letters: List[int] = []
        for m in re.finditer(r"\S+", text):
            token, col = m.group(), m.start() + 1
            if token == "1":
                continue
            base, _, exp = token.partition("^")
            if base not in self._index:
                raise ParseError(f"unknown generator {base!r}", line, col, source)
            power = 1
            if exp:
                try:
                    power = int(exp)
                except ValueError:
                    raise ParseError(f"bad exponent in {token!r}", line, col, source) from None
            x = self._index[base] + 1
            letters.extend([x if power > 0 else -x] * abs(power))
        return Word(self, free_reduce(letters))

    def random_word(self, rng: random.Random, max_length: int) -> "Word":
        n = rng.randint(0, max_length)
        letters = [rng.choice((1, -1)) * rng.randint(1, self.rank) for _ in range(n)]
        return Word(self, free_reduce(letters))


class Word:
    """A freely reduced element of a :class:`FreeGroup`.

    Build words through :meth:`FreeGroup.word` or :meth:`FreeGroup.parse`;
    the constructor trusts that ``letters`` are already reduced.
    """

    __slots__ = ("group", "letters")

    def __init__(self, group: FreeGroup, letters: Tuple[int, ...]):
        self.group = group
        self.letters = letters

    def _check(self, other: "Word") -> None:
        if not isinstance(other, Word):
            raise TypeError(f"expected a Word, got {type(other).__name__}")
        if other.group != self.group:
            raise PreconditionError("words live in different free groups")

    def __mul__(self, other: "Word") -> "Word":
        self._check(other)
        a, b = self.letters, other.letters
        k = 0
        while k < len(a) and k < len(b) and a[-1 - k] == -b[k]:
            k += 1
        return Word(self.group, a[: len(a) - k] + b[k:])

    def inverse(self) -> "Word":
        return Word(self.group, tuple(-x for x in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        out = self.group.identity
        for _ in range(abs(n)):
            out = out * base
        return out

    def is_identity(self) -> bool:
        return not self.letters

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other) -> bool:
        return isinstance(other, Word) and self.group == other.group and self.letters == other.letters

    def __hash__(self) -> int:
        return hash(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        labels = self.group.labels
        return " ".join(labels[x - 1] if x > 0 else labels[-x - 1] + "^-1" for x in self.letters)

    def __repr__(self) -> str:
        return f"Word({str(self)!r})"


def reduce(group: FreeGroup, raw: Iterable[int]) -> Word:
    return group.word(raw)


def multiply(u: Word, v: Word) -> Word:
    return u * v


def invert(u: Word) -> Word:
    return u.inverse()


def commutator(u: Word, v: Word) -> Word:
    """[u, v] = u v u^-1 v^-1."""
    return u * v * u.inverse() * v.inverse()


def iterated_commutator(gs: Sequence[Word]) -> Word:
    """Right-nested bracket [g1, [g2, ..., [g_{s-1}, g_s]...]]."""
    if not gs:
        raise PreconditionError("iterated commutator of an empty list")
    acc = gs[-1]
    for g in reversed(gs[:-1]):
        acc = commutator(g, acc)
    return acc


def abelianize(u: Word) -> List[int]:
    vec = [0] * u.group.rank
    for x in u.letters:
        if x > 0:
            vec[x - 1] += 1
        else:
            vec[-x - 1] -= 1
    return vec


def word_from_vector(group: FreeGroup, vec: Sequence[int]) -> Word:
    """x1^v1 x2^v2 ... as a word: a canonical lift of an exponent vector."""
    letters: List[int] = []
    for i, e in enumerate(vec):
        letters.extend([i + 1 if e > 0 else -(i + 1)] * abs(e))
    return Word(group, tuple(letters))


class ProductGroup:
    """Direct product of free groups; elements are tuples of words."""

    def __init__(self, factors: Sequence[FreeGroup]):
        factors = tuple(factors)
        if not factors:
            raise PreconditionError("a direct product needs at least one factor")
        self.factors = factors

    @classmethod
    def of_ranks(cls, ranks: Sequence[int]) -> "ProductGroup":
        return cls([FreeGroup(r) for r in ranks])

    @property
    def n(self) -> int:
        return len(self.factors)

    @property
    def ranks(self) -> List[int]:
        return [f.rank for f in self.factors]

    def identity(self) -> Tuple[Word, ...]:
        return tuple(f.identity for f in self.factors)

    def check(self, g: Sequence[Word]) -> Tuple[Word, ...]:
        g = tuple(g)
        if len(g) != self.n:
            raise PreconditionError(f"expected a {self.n}-tuple, got {len(g)} coordinates")
        for w, f in zip(g, self.factors):
            if w.group != f:
                raise PreconditionError("coordinate word from the wrong factor")
        return g

    def multiply(self, g: Sequence[Word], h: Sequence[Word]) -> Tuple[Word, ...]:
        return tuple(u * v for u, v in zip(g, h))

    def inverse(self, g: Sequence[Word]) -> Tuple[Word, ...]:
        return tuple(u.inverse() for u in g)

    def parse(self, text: str, line: int = 0, source: str = "") -> Tuple[Word, ...]:
        """Coordinates separated by ';', e.g. ``"a b ; 1 ; b^-1"``."""
        parts = text.split(";")
        if len(parts) != self.n:
            raise ParseError(f"expected {self.n} coordinates separated by ';'", line, 1, source)
        return tuple(f.parse(p, line, source) for f, p in zip(self.factors, parts))

    def format(self, g: Sequence[Word]) -> str:
        return " ; ".join(str(w) for w in g)

    def random_element(self, rng: random.Random, max_length: int) -> Tuple[Word, ...]:
        return tuple(f.random_word(rng, max_length) for f in self.factors)

    def embed(self, J: Sequence[int], g: Sequence[Word]) -> Tuple[Word, ...]:
        """Place the coordinates ``g`` at positions ``J`` (0-based), identity elsewhere."""
        out = list(self.identity())
        for j, w in zip(J, g):
            out[j] = w
        return tuple(out)

    def sub(self, J: Sequence[int]) -> "ProductGroup":
        return ProductGroup([self.factors[j] for j in J])

    def __eq__(self, other) -> bool:
        return isinstance(other, ProductGroup) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(self.factors)

    def __repr__(self) -> str:
        return f"ProductGroup(ranks={self.ranks})"
