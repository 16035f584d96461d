import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import all_reduced_words, words
from subdirect.cosets import coset_index
from subdirect.errors import INFINITE, PreconditionError
from subdirect.reproduce import random_transitive_action, stabiliser_generators
from subdirect.stallings import SubgroupGraph, fold
from subdirect.words import FreeGroup, abelianize

F2 = FreeGroup(2)
SHORT = all_reduced_words(F2, 6)


def ws(*texts, F=F2):
    return [F.parse(t) for t in texts]


def even_a():
    return fold(F2, ws("a^2", "b", "a b a^-1"))


def enumeration_index(F, gens):
    """Oracle: Todd-Coxeter on the free group with no relators."""
    return coset_index(F.rank, [], [g.letters for g in gens])


def accepted(H, pool=SHORT):
    return frozenset(w for w in pool if H.contains(w))


def bounded_closure(gens, max_factors: int, max_len: int):
    """Naive membership oracle: products of at most max_factors generators."""
    alphabet = [g for g in gens if not g.is_identity()] + [g.inverse() for g in gens if not g.is_identity()]
    seen = {F2.identity}
    frontier = {F2.identity}
    for _ in range(max_factors):
        nxt = set()
        for u in frontier:
            for g in alphabet:
                v = u * g
                if len(v) <= max_len and v not in seen:
                    nxt.add(v)
        seen |= nxt
        frontier = nxt
    return seen


class TestFold:
    def test_cyclic(self):
        H = fold(F2, ws("a"))
        assert H.contains(F2.parse("a^5"))
        assert not H.contains(F2.parse("b"))

    def test_trivial_subgroup(self):
        H = fold(F2, [])
        assert accepted(H) == {F2.identity}

    def test_even_exponent_sum_oracle(self):
        H = even_a()
        for u in SHORT:
            assert H.contains(u) == (abelianize(u)[0] % 2 == 0)

    def test_order_and_redundancy_independent(self):
        gens = ws("a^2", "b", "a b a^-1")
        base = fold(F2, gens)
        extra = fold(F2, [gens[2], gens[0] * gens[1], gens[1], gens[0]])
        assert base == extra
        assert accepted(base) == accepted(extra)

    @given(st.lists(words(F2, 5), max_size=3), st.randoms(use_true_random=False))
    def test_confluence(self, gens, rng):
        H = fold(F2, gens)
        more = list(gens) + [u * v for u in gens for v in gens][:4]
        rng.shuffle(more)
        K = fold(F2, more)
        assert H == K
        pool = all_reduced_words(F2, 4)
        assert accepted(H, pool) == accepted(K, pool)

    @given(st.lists(words(F2, 4), min_size=1, max_size=2))
    def test_agrees_with_bounded_search(self, gens):
        H = fold(F2, gens)
        for u in bounded_closure(gens, 3, 10):
            assert H.contains(u)

    def test_folded_invariant(self):
        H = fold(F2, ws("a b a^-1", "a b^2 a^-1 b", "b a"))
        for v in range(H.num_vertices):
            labels = list(H.edges[v].keys())
            assert len(labels) == len(set(labels))
        # co-determinism: every (label, target) pair is hit at most once
        incoming = {}
        for v in range(H.num_vertices):
            for x, t in H.edges[v].items():
                assert (x, t) not in incoming
                incoming[(x, t)] = v


class TestContains:
    def test_commutator_in_even_subgroup(self):
        H = even_a()
        c = F2.parse("a b a^-1 b^-1")
        assert H.contains(c)
        assert c == F2.parse("a b a^-1") * F2.parse("b^-1")

    def test_identity_always(self):
        for gens in ([], ws("a"), ws("a b", "b a^3")):
            assert fold(F2, gens).contains(F2.identity)

    def test_generators_and_products(self):
        gens = ws("a b a^-1", "b^2 a")
        H = fold(F2, gens)
        rng = random.Random(5)
        for _ in range(50):
            u = F2.identity
            for _ in range(rng.randint(0, 6)):
                g = rng.choice(gens)
                u = u * (g if rng.random() < 0.5 else g.inverse())
            assert H.contains(u)


class TestIndex:
    def test_whole_group(self):
        assert fold(F2, F2.gens()).index() == 1

    def test_even_subgroup(self):
        assert even_a().index() == 2
        assert enumeration_index(F2, ws("a^2", "b", "a b a^-1")) == 2

    def test_cyclic_infinite(self):
        assert fold(F2, ws("a")).index() is INFINITE

    @given(st.integers(1, 6), st.randoms(use_true_random=False))
    def test_matches_coset_enumeration(self, degree, rng):
        perms = random_transitive_action(random.Random(rng.random()), 2, degree)
        gens = stabiliser_generators(F2, perms)
        H = fold(F2, gens)
        assert H.index() == degree == enumeration_index(F2, gens)


class TestBasis:
    def test_even_subgroup_rank(self):
        assert len(even_a().basis()) == 3

    def test_trivial(self):
        assert fold(F2, []).basis() == []

    def test_round_trip(self):
        for gens in (ws("a^2", "b", "a b a^-1"), ws("a b a b^-1", "b^3"), ws("a^2 b^-1 a", "b a b")):
            H = fold(F2, gens)
            K = fold(F2, H.basis())
            assert K == H
            assert accepted(K) == accepted(H)

    def test_basis_is_deterministic(self):
        assert even_a().basis() == even_a().basis()

    def test_rank_edge_count(self):
        H = fold(F2, ws("a b a^-1 b", "b^3", "a^2"))
        assert H.rank() == len(H.basis())

    @given(st.sampled_from([2, 3]), st.integers(1, 6), st.randoms(use_true_random=False))
    def test_nielsen_schreier(self, rank, degree, rng):
        F = FreeGroup(rank)
        perms = random_transitive_action(random.Random(rng.random()), rank, degree)
        H = fold(F, stabiliser_generators(F, perms))
        assert H.index() == degree
        assert len(H.basis()) - 1 == degree * (rank - 1)


class TestCosetTable:
    def test_index_one(self):
        assert fold(F2, F2.gens()).coset_table() == [[0, 0]]

    def test_even_subgroup(self):
        t = even_a().coset_table()
        assert len(t) == 2
        assert t[0][0] == 1 and t[1][0] == 0
        assert t[0][1] == 0 and t[1][1] == 1

    def test_infinite_index(self):
        with pytest.raises(PreconditionError):
            fold(F2, ws("a")).coset_table()

    def test_rows_are_permutations(self):
        rng = random.Random(2)
        for degree in range(1, 7):
            perms = random_transitive_action(rng, 2, degree)
            H = fold(F2, stabiliser_generators(F2, perms))
            t = H.coset_table()
            assert len(t) == H.index() == degree
            for i in range(2):
                assert sorted(row[i] for row in t) == list(range(degree))

    def test_from_action_matches_fold(self):
        perms = [[1, 2, 0], [0, 2, 1]]
        assert SubgroupGraph.from_action(F2, perms) == fold(F2, stabiliser_generators(F2, perms))


def test_dump_format():
    text = even_a().dump().splitlines()
    assert text[0] == "vertices: 2"
    assert text[1] == "basepoint: 0"
    assert all(line.startswith("edge: ") for line in text[2:])
