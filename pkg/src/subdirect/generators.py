"""Explicit generating tuples for fibre products of free groups.

Subgroups are never built from generators, but generators are a useful
output: over a finite quotient they are Schreier generators, certified by
independent coset enumeration; over an abelian quotient they follow the
construction behind finite generation and are only checked for membership.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import List, Tuple

from . import intmat
from .cosets import coset_index
from .errors import PreconditionError, UnsupportedError
from .homology import rs_presentation
from .product import ProductSubgroup, fibre_product
from .quotients import AbelianGroup, FiniteGroup, QuotientMap
from .words import Word, abelianize, commutator, word_from_vector

CERTIFIED = "CERTIFIED"
CONSTRUCTED = "CONSTRUCTED-NOT-CERTIFIED"


@dataclass
class FibreGenerators:
    P: ProductSubgroup
    tuples: List[Tuple[Word, Word]]
    status: str
    certificate: List[str]

    def lines(self) -> List[str]:
        out = [f"generators: {len(self.tuples)}", f"status: {self.status}"]
        out += [f"generator: {self.P.ambient.format(g)}" for g in self.tuples]
        out += [f"certificate: {c}" for c in self.certificate]
        return out


def _global_word(P: ProductSubgroup, g) -> List[int]:
    out: List[int] = []
    off = 0
    for F, w in zip(P.ambient.factors, g):
        out += [x + off if x > 0 else x - off for x in w.letters]
        off += F.rank
    return out


def enumeration_index(P: ProductSubgroup, tuples) -> int:
    """Index of <tuples> in F_{m_1} x F_{m_2}, by Todd-Coxeter alone."""
    m1, m2 = P.ambient.ranks
    rels = [(i, m1 + j, -i, -(m1 + j)) for i in range(1, m1 + 1) for j in range(1, m2 + 1)]
    return coset_index(m1 + m2, rels, [_global_word(P, g) for g in tuples])


def fibre_generators(q1: QuotientMap, q2: QuotientMap) -> FibreGenerators:
    P = fibre_product(q1, q2)
    T = P.defining_maps[0].target
    if isinstance(T, FiniteGroup) or (isinstance(T, AbelianGroup) and T.is_finite()):
        pres = rs_presentation(P)
        tuples = list(pres.elements)
        cert = []
        for g in tuples:
            if not P.contains(g):
                raise PreconditionError(f"Schreier generator {P.ambient.format(g)} is not in the fibre product")
        order = T.order
        idx = enumeration_index(P, tuples)
        cert.append(f"coset enumeration: {idx} cosets, |Q| = {order}")
        if idx != order:
            raise PreconditionError(f"generators span a subgroup of index {idx}, expected {order}")
        if P.ambient.ranks == [1, 1]:
            vecs = [abelianize(g[0]) + abelianize(g[1]) for g in tuples]
            cert.append(f"lattice index by Smith form: {intmat.lattice_index(vecs, 2)}")
        return FibreGenerators(P, tuples, CERTIFIED, cert)
    if isinstance(T, AbelianGroup):
        F1, F2 = q1.domain, q2.domain
        tuples = []
        for x in F1.gens():
            tuples.append((x, q2.lift(q1.word_image(x))))
        for y in F2.gens():
            tuples.append((q1.lift(q2.word_image(y)), y))
        for u, v in combinations(F2.gens(), 2):
            tuples.append((F1.identity, commutator(u, v)))
        # N_2 modulo commutators: exponent vectors v with v * images in the relations
        rows = [list(r) for r in q2.images] + T.relations
        ker = intmat.left_kernel(rows, T.ngens)
        for v in intmat.hermite_rows([k[: F2.rank] for k in ker], F2.rank):
            tuples.append((F1.identity, word_from_vector(F2, v)))
        tuples = [g for g in dict.fromkeys(tuples) if not (g[0].is_identity() and g[1].is_identity())]
        for g in tuples:
            if not P.contains(g):
                raise PreconditionError(f"constructed tuple {P.ambient.format(g)} is not in the fibre product")
        return FibreGenerators(P, tuples, CONSTRUCTED, ["every tuple passes the membership test"])
    raise UnsupportedError("fibre generators need a finite or abelian quotient")
