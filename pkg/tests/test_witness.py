import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from subdirect.errors import PreconditionError
from subdirect.product import abelian_kernel, fibre_product, preimage_subgroup
from subdirect.quotients import FiniteGroup, Nilpotent2Group, QuotientMap, lower_central_class
from subdirect.reproduce import _heisenberg_instance, random_witness_instance
from subdirect.witness import (
    NotVirtuallySurjective,
    OutsideFiniteIndexSubgroup,
    class_bound,
    commutator_witness,
    find_lift,
    in_gamma1_prime,
    partition_indices,
    power_into_gamma1_prime,
    quotient_class,
    random_partition,
    stallings_bieri_form,
)
from subdirect.words import FreeGroup, abelianize, commutator, iterated_commutator


def stallings(n=3):
    return abelian_kernel([2] * n, [[1] * (2 * n)])


def bound_oracle(n, k):
    """Smallest s with s blocks of size k-1 covering n-1 indices, minus one."""
    s = 0
    while s * (k - 1) < n - 1:
        s += 1
    return s - 1


class TestClassBound:
    def test_examples(self):
        assert class_bound(3, 2) == 1
        assert class_bound(4, 2) == 2

    @pytest.mark.parametrize("n", range(2, 12))
    def test_half_regime_is_abelian(self, n):
        for k in range(n // 2 + 1, n + 1):
            assert class_bound(n, k) <= 1

    @pytest.mark.parametrize("n,k", [(n, k) for n in range(2, 15) for k in range(2, n + 1)])
    def test_matches_block_count(self, n, k):
        assert class_bound(n, k) == bound_oracle(n, k)

    @pytest.mark.parametrize("n,k", [(3, 1), (3, 0), (3, 4), (1, 1)])
    def test_errors(self, n, k):
        with pytest.raises(PreconditionError):
            class_bound(n, k)


class TestPartition:
    def test_examples(self):
        # 0-based factor indices; {2},{3} in 1-based terms
        assert partition_indices(3, 2) == [(1,), (2,)]
        assert partition_indices(5, 3) == [(1, 2), (3, 4)]
        assert partition_indices(4, 2) == [(1,), (2,), (3,)]

    @given(st.integers(2, 20), st.integers(2, 20))
    def test_cover(self, n, k):
        parts = partition_indices(n, k)
        assert sum(len(b) for b in parts) == n - 1
        assert sorted(j for b in parts for j in b) == list(range(1, n))
        assert all(1 <= len(b) <= k - 1 for b in parts)
        assert len(parts) == bound_oracle(n, k) + 1 or (n == 1)

    @given(st.integers(2, 20), st.integers(2, 20), st.randoms(use_true_random=False))
    def test_random_partition(self, n, k, rng):
        parts = random_partition(n, k, rng)
        assert sorted(j for b in parts for j in b) == list(range(1, n))
        assert all(1 <= len(b) <= k - 1 for b in parts)
        assert len(parts) == len(partition_indices(n, k))


class TestFindLift:
    def test_balanced_word(self):
        P = stallings()
        F = P.ambient.factors[0]
        g = find_lift(P, F.parse("a b^-1"), (1,))
        assert g is not None
        assert str(g[0]) == "a b^-1"
        assert g[1].is_identity() and g[2].is_identity()

    def test_generator_needs_compensation(self):
        P = stallings()
        F = P.ambient.factors[0]
        g = find_lift(P, F.parse("a"), (1,))
        assert g is not None and P.contains(g)
        assert g[1].is_identity()
        assert sum(abelianize(g[2])) == -1

    def test_outside_returns_none(self):
        # kernel of Z^2 -> Z from two factors: every coordinate is pinned by the other
        P = abelian_kernel([1, 1], [[1, 1]])
        F = P.ambient.factors[0]
        assert find_lift(P, F.gen(0), (1,)) is None

    def test_finite_constraint(self):
        Z3 = FiniteGroup.cyclic(3)
        maps = [QuotientMap(FreeGroup(2), Z3, [1, 0]) for _ in range(3)]
        S = {(x, y, (-x - y) % 3) for x in range(3) for y in range(3)}
        P = preimage_subgroup(maps, S)
        a = P.ambient.factors[0].gen(0)
        g = find_lift(P, a, (1,))
        assert g is not None and P.contains(g)
        assert g[1].is_identity()
        assert find_lift(P, a, (1, 2)) is None


class TestCommutatorWitness:
    def test_stallings(self):
        P = stallings()
        F = P.ambient.factors[0]
        report = commutator_witness(P, 2, [F.parse("a"), F.parse("b")])
        assert report.verdict
        assert report.c == commutator(F.parse("a"), F.parse("b"))
        assert report.partition == [(1,), (2,)]

    def test_identity_gamma(self):
        P = stallings()
        F = P.ambient.factors[0]
        report = commutator_witness(P, 2, [F.identity, F.parse("a b a")])
        assert report.verdict and report.c.is_identity()

    def test_heisenberg_depth(self):
        """Class 2 quotient: depth-3 commutators die, some depth-2 ones survive."""
        P = _heisenberg_instance()
        F = P.ambient.factors[0]
        a, b = F.gens()
        parts = partition_indices(4, 2)
        gs = [power_into_gamma1_prime(P, parts, w) for w in (a, b, a)]
        report = commutator_witness(P, 2, gs)
        assert report.verdict
        H = Nilpotent2Group(2)
        q = QuotientMap(F, H, [H.gen(0), H.gen(1)])
        assert H.key(q.word_image(iterated_commutator(gs))) == H.key(H.identity)
        N1 = P.intersection_with([0])
        assert not N1.contains((commutator(gs[0], gs[1]),))
        assert quotient_class(P, parts) == 2 == class_bound(4, 2)

    def test_random_partition_also_works(self):
        rng = random.Random(5)
        P = stallings(5)
        F = P.ambient.factors[0]
        for _ in range(5):
            parts = random_partition(5, 3, rng)
            gs = [power_into_gamma1_prime(P, parts, F.random_word(rng, 4)) for _ in parts]
            assert commutator_witness(P, 3, gs, parts).verdict

    def test_not_virtually_surjective(self):
        # diagonal Z in Z^3: pair projections have infinite index
        P = abelian_kernel([1, 1, 1], [[1, -1, 0], [0, 1, -1]])
        F = P.ambient.factors[0]
        with pytest.raises(NotVirtuallySurjective):
            commutator_witness(P, 2, [F.gen(0), F.gen(0)])

    def test_gamma_outside(self):
        Z2 = FiniteGroup.cyclic(2)
        maps = [QuotientMap(FreeGroup(1), Z2, [1]) for _ in range(3)]
        P = preimage_subgroup(maps, {(x, x, x) for x in range(2)})
        F = P.ambient.factors[0]
        assert in_gamma1_prime(P, partition_indices(3, 2), F.gen(0) ** 2)
        assert not in_gamma1_prime(P, partition_indices(3, 2), F.gen(0))
        with pytest.raises(OutsideFiniteIndexSubgroup):
            commutator_witness(P, 2, [F.gen(0), F.gen(0) ** 2])

    def test_wrong_gamma_count(self):
        P = stallings()
        with pytest.raises(PreconditionError):
            commutator_witness(P, 2, [P.ambient.factors[0].gen(0)])

    def test_bad_partition(self):
        P = stallings(4)
        F = P.ambient.factors[0]
        with pytest.raises(PreconditionError):
            commutator_witness(P, 2, [F.gen(0), F.gen(1)], [(1, 2), (3,)])

    def test_report_lines(self):
        P = stallings()
        F = P.ambient.factors[0]
        lines = commutator_witness(P, 2, F.gens()).lines()
        assert "partition: {2} {3}" in lines
        assert lines[-1] == "verdict: true"


@settings(max_examples=40)
@given(st.randoms(use_true_random=False))
def test_witness_invariants(rng):
    r = random.Random(rng.random())
    P, k = random_witness_instance(r)
    parts = partition_indices(P.n, k) if r.random() < 0.5 else random_partition(P.n, k, r)
    F = P.ambient.factors[0]
    gs = [power_into_gamma1_prime(P, parts, F.random_word(r, 4)) for _ in parts]
    report = commutator_witness(P, k, gs, parts)
    assert report.commutator[0] == report.c
    assert all(w.is_identity() for w in report.commutator[1:])
    assert P.contains(report.commutator)
    assert P.intersection_with([0]).contains((report.c,))
    for g, block in zip(report.lifts, parts):
        assert P.contains(g) and g[0] in gs
        assert all(g[j].is_identity() for j in block)
    cls = quotient_class(P, parts)
    assert isinstance(cls, int) and cls <= class_bound(P.n, k)


class TestStallingsBieri:
    def test_abelian_is_itself(self):
        P = stallings()
        form = stallings_bieri_form(P, 2)
        assert all(H.index() == 1 for H in form.subgroups)
        rng = random.Random(1)
        for _ in range(50):
            g = P.ambient.random_element(rng, 5)
            assert form.in_domain(g)
            assert form.kernel_contains(g) == P.contains(g)

    def test_z2_fibre(self):
        Z2 = FiniteGroup.cyclic(2)
        P = fibre_product(QuotientMap(FreeGroup(2), Z2, [1, 1]), QuotientMap(FreeGroup(2), Z2, [1, 0]))
        form = stallings_bieri_form(P, 2)
        assert form.description.startswith("A = Z/2")
        assert all(H.index() == 1 for H in form.subgroups)
        self._agrees(P, form)

    def test_s3_fibre(self):
        S3 = FiniteGroup.symmetric(3)
        gens = sorted(g for g in S3.elements() if g != S3.identity)
        q1 = QuotientMap(FreeGroup(2), S3, [gens[0], gens[1]])
        q2 = QuotientMap(FreeGroup(2), S3, [gens[0], gens[1]])
        assert q1.is_surjective()
        P = fibre_product(q1, q2)
        form = stallings_bieri_form(P, 2)
        assert "Z/3" in form.description
        assert lower_central_class(S3) is not None
        assert all(H.index() == 2 for H in form.subgroups)
        self._agrees(P, form)

    def _agrees(self, P, form):
        rng = random.Random(2)
        hits = 0
        for _ in range(300):
            g = P.ambient.random_element(rng, 6)
            if form.in_domain(g):
                hits += 1
                assert form.kernel_contains(g) == P.contains(g)
        assert hits > 0

    def test_needs_half(self):
        with pytest.raises(PreconditionError):
            stallings_bieri_form(stallings(4), 2)
