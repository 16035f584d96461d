import random
from itertools import product as cartesian

import pytest
from hypothesis import given
from hypothesis import strategies as st

from subdirect import intmat
from subdirect.cosets import coset_index
from subdirect.errors import INFINITE, InconsistencyError, PreconditionError, Unknown, UnsupportedError
from subdirect.generators import CERTIFIED, CONSTRUCTED, enumeration_index, fibre_generators
from subdirect.product import (
    ConjunctionConstraint,
    ProductSubgroup,
    abelian_kernel,
    decompose,
    diagram_sequences,
    exchange,
    fibre_product,
    kernel_vs_step,
    preimage_subgroup,
    split_section,
    virtually_surjects,
)
from subdirect.quotients import AbelianGroup, FiniteGroup, Nilpotent2Group, QuotientMap
from subdirect.reproduce import random_cover, random_kernel_subgroup
from subdirect.words import FreeGroup, ProductGroup, abelianize, commutator

F1x, F1y = FreeGroup(1, ["x"]), FreeGroup(1, ["y"])
F2 = FreeGroup(2)
Z2 = FiniteGroup.cyclic(2)


def stallings(n=3):
    return abelian_kernel([2] * n, [[1] * (2 * n)])


def kernel_oracle(M, g):
    """Direct evaluation of sum M_i * ab(g_i)."""
    v = [x for w in g for x in abelianize(w)]
    return [sum(a * b for a, b in zip(row, v)) for row in M]


def zz_over_z2():
    return fibre_product(QuotientMap(F1x, Z2, [1]), QuotientMap(F1y, Z2, [1]))


def f2_over_z2():
    q = QuotientMap(F2, Z2, [1, 0])
    return fibre_product(q, q)


def tup(P, text):
    return P.ambient.parse(text)


class TestFibreProduct:
    def test_trivial_quotient(self):
        T = FiniteGroup.cyclic(1)
        P = fibre_product(QuotientMap(F2, T, [0, 0]), QuotientMap(F2, T, [0, 0]))
        assert P.index() == 1

    def test_integers_mod_two(self):
        P = zz_over_z2()
        assert P.index() == 2
        # residues enumerated directly
        for x, y in cartesian(range(-3, 4), repeat=2):
            g = (F1x.word([1] * x if x >= 0 else [-1] * -x), F1y.word([1] * y if y >= 0 else [-1] * -y))
            assert P.contains(g) == ((x - y) % 2 == 0)

    def test_image_equality(self):
        P = f2_over_z2()
        assert P.contains(tup(P, "a ; a"))
        assert not P.contains(tup(P, "a ; b"))
        assert P.contains(tup(P, "a b ; b a"))

    def test_target_mismatch(self):
        with pytest.raises(PreconditionError):
            fibre_product(QuotientMap(F2, Z2, [1, 0]), QuotientMap(F2, FiniteGroup.cyclic(3), [1, 0]))

    def test_non_surjective(self):
        with pytest.raises(PreconditionError):
            fibre_product(QuotientMap(F2, Z2, [0, 0]), QuotientMap(F2, Z2, [1, 0]))

    def test_index_is_order_of_finite_quotient(self):
        for G, imgs in ((FiniteGroup.cyclic(3), [1, 2]), (FiniteGroup.symmetric(3), [1, 2]), (FiniteGroup.cyclic(4), [1, 0])):
            q = QuotientMap(F2, G, imgs)
            P = fibre_product(q, q)
            assert P.index() == G.order
            # independent check by Todd-Coxeter on <a, b, c, d | [a|b, c|d]>
            gens = fibre_generators(q, q).tuples
            assert enumeration_index(P, gens) == G.order

    def test_diagram_sequences(self):
        s1, s2 = diagram_sequences(f2_over_z2())
        assert s1.kernel.contains((F2.parse("b"),))
        assert not s1.kernel.contains((F2.parse("a"),))
        g = tup(f2_over_z2(), "a b ; a")
        assert s1.project(g) == F2.parse("a")
        assert s2.project(g) == F2.parse("a b")

    def test_nilpotent_target(self):
        H = Nilpotent2Group(2)
        q = QuotientMap(F2, H, [H.gen(0), H.gen(1)])
        P = fibre_product(q, q)
        assert P.contains(tup(P, "a b ; a b"))
        assert P.contains(tup(P, "a b a^-1 b^-1 ; b a b^-1 a^-1")) is False
        a, b = F2.gens()
        # a class-3 commutator dies in the class-2 quotient
        assert P.contains((a * b, a * b * commutator(commutator(a, b), a)))
        assert not P.contains((a * b, a * b * commutator(a, b)))


class TestMembership:
    def test_identity(self):
        for P in (stallings(), zz_over_z2(), f2_over_z2()):
            assert P.contains(P.ambient.identity())

    def test_stallings(self):
        P = stallings()
        assert P.contains(tup(P, "a ; a^-1 ; 1"))
        assert not P.contains(tup(P, "a ; 1 ; 1"))

    def test_arity(self):
        with pytest.raises(PreconditionError):
            stallings().contains((F2.parse("a"),))

    @given(st.randoms(use_true_random=False))
    def test_subgroup_closure(self, rng):
        r = random.Random(rng.random())
        P = random_kernel_subgroup(r)
        g, h = P.sample(r), P.sample(r)
        assert P.contains(g) and P.contains(h)
        assert P.contains(P.ambient.multiply(g, h))
        assert P.contains(P.ambient.inverse(g))

    @given(st.randoms(use_true_random=False))
    def test_matches_direct_evaluation(self, rng):
        r = random.Random(rng.random())
        P = random_kernel_subgroup(r)
        for _ in range(10):
            g = P.ambient.random_element(r, 4)
            assert P.contains(g) == (not any(kernel_oracle(P.kernel_matrix, g)))
            s = P.sample(r)
            assert not any(kernel_oracle(P.kernel_matrix, s))


class TestProjection:
    def test_full_subset(self):
        P = random_kernel_subgroup(random.Random(1))
        Q = P.projection(range(P.n))
        rng = random.Random(2)
        for _ in range(100):
            g = P.ambient.random_element(rng, 3)
            assert Q.contains(g) == P.contains(g)

    def test_stallings_pair(self):
        assert stallings().projection([0, 1]).index() == 1

    def test_symmetric_over_integers(self):
        q = QuotientMap(F2, AbelianGroup.free(1), [[1], [0]])
        P = fibre_product(q, q)
        assert P.projection_index([0]) == 1
        assert P.index() is INFINITE

    def test_empty_subset(self):
        with pytest.raises(PreconditionError):
            stallings().projection([])

    def test_completion_oracle(self):
        """g_J lies in p_J(P) when a bounded search finds a completion."""
        rng = random.Random(9)
        for _ in range(30):
            P = random_kernel_subgroup(rng, max_n=3, max_d=2, bound=2)
            J = sorted(rng.sample(range(P.n), rng.randint(1, P.n - 1))) if P.n > 1 else [0]
            rest = [i for i in range(P.n) if i not in J]
            Q = P.projection(J)
            for _ in range(5):
                gJ = tuple(P.ambient.factors[j].random_word(rng, 3) for j in J)
                dims = [P.ambient.ranks[i] for i in rest]
                found = False
                for vec in cartesian(range(-2, 3), repeat=sum(dims)):
                    full, k = [None] * P.n, 0
                    for j, w in zip(J, gJ):
                        full[j] = w
                    for i, d in zip(rest, dims):
                        F = P.ambient.factors[i]
                        full[i] = F.word([x for e in range(d) for x in [e + 1 if vec[k + e] > 0 else -(e + 1)] * abs(vec[k + e])])
                        k += d
                    if P.contains(tuple(full)):
                        found = True
                        break
                if found:
                    assert Q.contains(gJ)
                if not Q.contains(gJ):
                    assert not found


class TestIntersection:
    def test_full_subset(self):
        P = stallings()
        assert P.intersection_with([0, 1, 2]) is P

    def test_stallings_factor(self):
        N1 = stallings().intersection_with([0])
        assert N1.contains((F2.parse("a b^-1"),))
        assert not N1.contains((F2.parse("a"),))

    def test_even_integers(self):
        N2 = zz_over_z2().intersection_with([1])
        assert N2.contains((F1y.parse("y^2"),))
        assert not N2.contains((F1y.parse("y"),))
        assert N2.index() == 2

    @given(st.randoms(use_true_random=False))
    def test_agrees_with_embedding(self, rng):
        r = random.Random(rng.random())
        P = random_kernel_subgroup(r)
        J = sorted(r.sample(range(P.n), r.randint(1, P.n)))
        N = P.intersection_with(J)
        for _ in range(5):
            gJ = tuple(P.ambient.factors[j].random_word(r, 4) for j in J)
            assert N.contains(gJ) == P.contains(P.ambient.embed(J, gJ))
        # N_J lies inside p_J(P)
        s = N.sample(r) if N.constraint.basis else N.ambient.identity()
        assert P.projection(J).contains(s)


class TestDecompose:
    def test_two_factor_round_trip(self):
        P = zz_over_z2()
        D = decompose(P)
        assert D.seq1.quotient.order == 2
        rng = random.Random(0)
        for _ in range(50):
            g = P.ambient.random_element(rng, 5)
            assert D.reconstruct_contains(g) == P.contains(g)

    def test_stallings(self):
        D = decompose(stallings())
        assert D.T.index() == 1
        assert str(D.seq2.quotient) == "Z"
        assert D.seq2.kernel.contains((F2.parse("a b^-1"),))

    @pytest.mark.parametrize("seed", range(5))
    def test_random_round_trip(self, seed):
        rng = random.Random(seed)
        while True:
            P = abelian_kernel([2, 1, 2], [[rng.randint(-2, 2) for _ in range(5)] for _ in range(rng.randint(1, 2))])
            if P.is_subdirect():
                break
        D = decompose(P)
        for _ in range(100):
            g = P.ambient.random_element(rng, 6) if rng.random() < 0.5 else P.sample(rng)
            assert D.reconstruct_contains(g) == P.contains(g)

    def test_finite_round_trip(self):
        S3 = FiniteGroup.symmetric(3)
        maps = [QuotientMap(F2, S3, [1, 2]) for _ in range(3)]
        P = preimage_subgroup(maps, {(x, x, x) for x in S3.elements()})
        D = decompose(P)
        rng = random.Random(3)
        for _ in range(50):
            g = P.sample(rng) if rng.random() < 0.5 else P.ambient.random_element(rng, 4)
            assert D.reconstruct_contains(g) == P.contains(g)

    def test_single_factor(self):
        with pytest.raises(PreconditionError):
            decompose(abelian_kernel([2], [[1, 1]]))


class TestVirtualSurjection:
    def test_stallings_pairs(self):
        r = virtually_surjects(stallings(), 2)
        assert r.verdict and all(v == 1 for v in r.table.values())

    def test_stallings_triples(self):
        r = virtually_surjects(stallings(), 3)
        assert not r.verdict
        assert r.violation == (0, 1, 2)
        assert "free rank 1" in r.certificate

    @given(st.randoms(use_true_random=False))
    def test_subdirect_is_one_surjective(self, rng):
        r = random.Random(rng.random())
        P = random_kernel_subgroup(r)
        if P.is_subdirect():
            assert virtually_surjects(P, 1).verdict

    def test_k_range(self):
        with pytest.raises(PreconditionError):
            virtually_surjects(stallings(), 4)

    def test_factor_cap(self, monkeypatch):
        monkeypatch.setenv("SDP_MAX_FACTORS", "2")
        with pytest.raises(PreconditionError):
            virtually_surjects(stallings(), 2)


class TestExchange:
    def test_full(self):
        P = stallings()
        r = exchange(P, [0, 1, 2], [0, 1, 2])
        assert r.equal and r.lhs.equals(P) and r.rhs.equals(P)

    def test_stallings(self):
        # P meet Gamma_{1,2} still projects onto Gamma_2, and p_{2,3}(P) is everything
        r = exchange(stallings(), [0, 1], [1, 2])
        assert r.equal
        assert r.lhs.index() == 1 == r.rhs.index()

    def test_random(self):
        rng = random.Random(21)
        for _ in range(100):
            P = random_kernel_subgroup(rng)
            I, J = random_cover(rng, P.n)
            assert exchange(P, I, J).equal

    def test_finite(self):
        S3 = FiniteGroup.symmetric(3)
        maps = [QuotientMap(F2, S3, [1, 2]) for _ in range(3)]
        P = preimage_subgroup(maps, {(x, x, x) for x in S3.elements()})
        assert exchange(P, [0, 1], [1, 2]).equal

    def test_preconditions(self):
        with pytest.raises(PreconditionError):
            exchange(stallings(), [0], [1])
        with pytest.raises(PreconditionError):
            exchange(stallings(), [0, 1], [2])

    def test_inequality_is_an_inconsistency(self, monkeypatch):
        from subdirect import product

        monkeypatch.setattr(product.ProductSubgroup, "equals", lambda self, other: False)
        with pytest.raises(InconsistencyError):
            exchange(stallings(), [0, 1], [1, 2])


class TestKernelStep:
    def test_stallings(self):
        r = kernel_vs_step(stallings(), 2)
        assert r.verdict and set(r.table.values()) == {1}

    def test_finite_two_factor(self):
        r = kernel_vs_step(f2_over_z2(), 2)
        assert r.verdict and r.table[(0,)] == 2

    def test_zero_block(self):
        P = abelian_kernel([2, 2, 2, 2], [[1, 1, 0, 0, 1, -1, 1, 0]])
        assert virtually_surjects(P, 2).verdict
        assert kernel_vs_step(P, 2).verdict

    def test_precondition(self):
        with pytest.raises(PreconditionError):
            kernel_vs_step(stallings(), 3)


class TestSplitSection:
    def test_trivial_quotient(self):
        T = FiniteGroup.cyclic(1)
        s = split_section(QuotientMap(F2, T, [0, 0]), QuotientMap(F2, T, [0, 0]), [])
        assert s(F2.parse("a b")) == (F2.parse("a b"), F2.identity)

    def test_integers(self):
        Ft = FreeGroup(1, ["t"])
        Z = AbelianGroup.free(1)
        q1 = QuotientMap(F2, Z, [[1], [2]])
        s = split_section(q1, QuotientMap(Ft, Z, [[1]]), [Ft.parse("t")])
        g = F2.parse("a b^-1 b^-1")
        assert s(g) == (g, Ft.parse("t^-3"))
        rng = random.Random(8)
        for _ in range(100):
            g = F2.random_word(rng, 8)
            assert s.fibre.contains(s(g))
            if abelianize(g)[0] + 2 * abelianize(g)[1] == 0:
                assert s(g) == (g, Ft.identity)

    def test_not_a_section(self):
        Ft = FreeGroup(1, ["t"])
        Z = AbelianGroup.free(1)
        with pytest.raises(PreconditionError):
            split_section(QuotientMap(F2, Z, [[1], [0]]), QuotientMap(Ft, Z, [[1]]), [Ft.parse("t^2")])

    def test_finite_quotient_has_no_section(self):
        q = QuotientMap(F2, Z2, [1, 0])
        with pytest.raises(PreconditionError):
            split_section(q, q, [])


class TestFibreGenerators:
    def test_trivial(self):
        T = FiniteGroup.cyclic(1)
        q = QuotientMap(F2, T, [0, 0])
        fg = fibre_generators(q, q)
        assert fg.status == CERTIFIED
        assert enumeration_index(fg.P, fg.tuples) == 1

    def test_integers_mod_two(self):
        fg = fibre_generators(QuotientMap(F1x, Z2, [1]), QuotientMap(F1y, Z2, [1]))
        vecs = sorted(tuple(abelianize(g[0]) + abelianize(g[1])) for g in fg.tuples)
        assert intmat.lattice_index([list(v) for v in vecs], 2) == 2
        assert fg.status == CERTIFIED

    def test_free_over_z2(self):
        q = QuotientMap(F2, Z2, [1, 0])
        fg = fibre_generators(q, q)
        assert enumeration_index(fg.P, fg.tuples) == 2
        assert all(fg.P.contains(g) for g in fg.tuples)

    def test_abelian_constructed(self):
        q = QuotientMap(F2, AbelianGroup.free(1), [[1], [0]])
        fg = fibre_generators(q, q)
        assert fg.status == CONSTRUCTED
        assert all(fg.P.contains(g) for g in fg.tuples)

    def test_unsupported(self):
        H = Nilpotent2Group(2)
        q = QuotientMap(F2, H, [H.gen(0), H.gen(1)])
        with pytest.raises(UnsupportedError):
            fibre_generators(q, q)


class TestMixedClauses:
    def test_unknown_index_carries_reason(self):
        S3 = FiniteGroup.symmetric(3)
        ambient = ProductGroup([F2, F2])
        fin = preimage_subgroup([QuotientMap(F2, S3, [1, 2])] * 2, {(x, x) for x in S3.elements()}).constraint
        lat = abelian_kernel([2, 2], [[1, 0, -1, 0]]).constraint
        P = ProductSubgroup(ambient, ConjunctionConstraint([fin, lat]))
        idx = P.index()
        assert isinstance(idx, Unknown) and idx.reason
        assert P.contains(P.ambient.parse("a ; a"))
        assert not P.contains(P.ambient.parse("a ; b"))
