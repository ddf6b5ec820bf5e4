#!/usr/bin/env python3
"""
Tests for Frequency Sets

Pruned enumeration against naive filtering, membership, the implicit union
and interval restriction.
"""

import itertools
import unittest
from fractions import Fraction

import numpy as np
import pytest

from dimension import reference_frequencies
from errors import InputError, ResourceError
from expansions import base, enumerate_admissible, golden
from freqsets import (
    CylinderUnion,
    FreqSetSpec,
    FreqSetUnion,
    build_freqset,
    frequencies_within,
    membership,
    multinomial_count,
    random_union,
    union_restrict,
)
from symbolic import FrequencyVector


def vector(values, m, g):
    return FrequencyVector.from_values(values, m, g)


def naive_members(spec):
    """Filter every admissible word by a direct window recount"""
    members = []
    for word in enumerate_admissible(spec.system, spec.n):
        windows = [word[i:i + spec.m] for i in range(spec.n - spec.m)]
        ok = True
        for target_word in spec.p.words():
            ratio = Fraction(sum(1 for w in windows if w == target_word), len(windows))
            if not abs(ratio - spec.p[target_word]) < spec.eps:
                ok = False
                break
        if ok:
            members.append(word)
    return members


class TestFreqSetSpec(unittest.TestCase):
    """Test parameter validation"""

    def setUp(self):
        """Set up base-2"""
        self.system = base(2)
        self.half = vector(['1/2', '1/2'], 1, 2)

    def test_generation_exceeds_m(self):
        """Test n > m"""
        with self.assertRaises(InputError):
            FreqSetSpec(self.system, 1, self.half, 1, Fraction(1, 10))

    def test_eps_range(self):
        """Test 0 < eps < 1"""
        with self.assertRaises(InputError):
            FreqSetSpec(self.system, 1, self.half, 10, Fraction(0))
        with self.assertRaises(InputError):
            FreqSetSpec(self.system, 1, self.half, 10, Fraction(1))

    def test_vector_shape(self):
        """Test that p must match m and the alphabet"""
        with self.assertRaises(InputError):
            FreqSetSpec(base(3), 1, self.half, 10, Fraction(1, 10))

    def test_strict_count_bounds(self):
        """Test the integer count range from strict inequalities"""
        spec = FreqSetSpec(self.system, 1, vector(['1', '0'], 1, 2), 10, Fraction(1, 10))
        self.assertEqual(spec.count_bounds(), [(9, 9), (0, 0)])


class TestBuildFreqSet(unittest.TestCase):
    """Test explicit enumeration"""

    def test_point_mass(self):
        """Test p = (1, 0), eps = 0.1, n = 10: the last digit is never counted"""
        spec = FreqSetSpec(base(2), 1, vector(['1', '0'], 1, 2), 10, Fraction(1, 10))
        union = build_freqset(spec)
        self.assertEqual(list(union), [(0,) * 10, (0,) * 9 + (1,)])

    def test_vacuous_bound(self):
        """Test that eps = 0.6 keeps every word"""
        spec = FreqSetSpec(base(2), 1, vector(['1/2', '1/2'], 1, 2), 5, Fraction(3, 5))
        self.assertEqual(build_freqset(spec).count(), 32)

    def test_golden_members(self):
        """Test golden m=1 members against brute force over the 55 words"""
        spec = FreqSetSpec(golden(), 1, vector(['1/2', '1/2'], 1, 2), 8, Fraction(1, 5))
        union = build_freqset(spec)
        self.assertEqual(list(union), naive_members(spec))
        self.assertGreater(union.count(), 0)

    def test_last_digit_free(self):
        """Test that members come in full sibling groups at the last digit"""
        spec = FreqSetSpec(base(3), 1, vector(['1/3', '1/3', '1/3'], 1, 3), 7, Fraction(1, 5))
        union = build_freqset(spec)
        for word in union:
            for digit in range(3):
                self.assertTrue(union.contains(word[:-1] + (digit,)))

    def test_budget(self):
        """Test that the node budget raises with diagnostics"""
        spec = FreqSetSpec(base(2), 1, vector(['1/2', '1/2'], 1, 2), 16, Fraction(1, 2))
        with self.assertRaises(ResourceError) as ctx:
            build_freqset(spec, budget=50)
        diagnostics = ctx.exception.diagnostics
        self.assertEqual(diagnostics['nodes_explored'], 50)
        self.assertIn('members_found', diagnostics)
        self.assertIn('deepest_prefix', diagnostics)

    def test_multinomial_count(self):
        """Test the closed-form count for base-g, m=1"""
        for g, values in ((2, ['3/10', '7/10']), (3, ['1/3', '1/3', '1/3'])):
            spec = FreqSetSpec(base(g), 1, vector(values, 1, g), 9, Fraction(3, 20))
            self.assertEqual(build_freqset(spec).count(), multinomial_count(g, 9, spec.count_bounds()))


@pytest.mark.parametrize('g,m,n', [(2, 1, 10), (2, 2, 9), (3, 1, 6), (3, 2, 6), (2, 3, 10)])
@pytest.mark.parametrize('eps', ['1/20', '1/8', '3/10'])
def test_pruning_matches_naive(g, m, n, eps):
    """Branch-and-bound enumeration equals naive filtering"""
    spec = FreqSetSpec(base(g), m, reference_frequencies(base(g), m), n, Fraction(eps))
    assert list(build_freqset(spec)) == naive_members(spec)


class TestSkewedPruning(unittest.TestCase):
    """Test pruning on skewed targets"""

    def test_matches_naive(self):
        """Test skewed targets, including the golden system, against naive filtering"""
        cases = [
            FreqSetSpec(base(2), 1, vector(['1/10', '9/10'], 1, 2), 11, Fraction(1, 7)),
            FreqSetSpec(base(3), 1, vector(['1/2', '1/4', '1/4'], 1, 3), 7, Fraction(1, 6)),
            FreqSetSpec(golden(), 2, vector(['1/2', '1/4', '1/4', '0'], 2, 2), 10, Fraction(1, 5)),
        ]
        for spec in cases:
            self.assertEqual(list(build_freqset(spec)), naive_members(spec))


class TestMembership(unittest.TestCase):
    """Test single-word and single-point membership"""

    def setUp(self):
        """Set up base-2 specs"""
        self.system = base(2)

    def test_zero_point(self):
        """Test that x = 0 always belongs to the zero point mass set"""
        for n in (3, 10, 25):
            spec = FreqSetSpec(self.system, 1, vector(['1', '0'], 1, 2), n, Fraction(1, 100))
            self.assertTrue(membership(Fraction(0), spec))

    def test_alternating_word(self):
        """Test (01)^5 with eps = 0.01: 5/9 is not within 0.01 of 1/2"""
        spec = FreqSetSpec(self.system, 1, vector(['1/2', '1/2'], 1, 2), 10, Fraction(1, 100))
        self.assertFalse(membership((0, 1) * 5, spec))

    def test_length_checked(self):
        """Test that words must have length n"""
        spec = FreqSetSpec(self.system, 1, vector(['1/2', '1/2'], 1, 2), 10, Fraction(1, 10))
        with self.assertRaises(InputError):
            membership((0, 1), spec)

    def test_random_words_against_recount(self):
        """Test membership against an independent recount"""
        rng = np.random.default_rng(9)
        spec = FreqSetSpec(base(3), 2, reference_frequencies(base(3), 2), 30, Fraction(1, 12))
        for _ in range(500):
            word = tuple(rng.integers(0, 3, size=30).tolist())
            windows = [word[i:i + 2] for i in range(28)]
            expected = all(
                abs(Fraction(windows.count(w), 28) - Fraction(1, 9)) < Fraction(1, 12)
                for w in itertools.product(range(3), repeat=2)
            )
            self.assertEqual(membership(word, spec), expected)
            self.assertEqual(frequencies_within(spec, word), expected)


class TestFreqSetUnion(unittest.TestCase):
    """Test the implicit representation against the explicit one"""

    def setUp(self):
        """Set up matching implicit and explicit unions"""
        self.specs = [
            FreqSetSpec(base(3), 1, vector(['1/3', '1/3', '1/3'], 1, 3), 8, Fraction(1, 6)),
            FreqSetSpec(base(2), 2, vector(['1/4', '1/4', '1/4', '1/4'], 2, 2), 11, Fraction(1, 8)),
            FreqSetSpec(golden(), 1, vector(['1/2', '1/2'], 1, 2), 10, Fraction(1, 4)),
        ]

    def test_count_and_order(self):
        """Test counts and lexicographic member order"""
        for spec in self.specs:
            implicit = FreqSetUnion(spec)
            explicit = build_freqset(spec)
            self.assertEqual(implicit.count(), explicit.count())
            self.assertEqual(list(implicit.iter_members()), list(explicit))

    def test_contains(self):
        """Test predicate agreement on every admissible word"""
        spec = self.specs[0]
        implicit = FreqSetUnion(spec)
        explicit = build_freqset(spec)
        for word in enumerate_admissible(spec.system, spec.n):
            self.assertEqual(implicit.contains(word), explicit.contains(word))

    def test_lebesgue(self):
        """Test exact Lebesgue measure agreement"""
        for spec in self.specs:
            self.assertEqual(FreqSetUnion(spec).lebesgue(), build_freqset(spec).lebesgue())

    def test_overlap(self):
        """Test Lebesgue measure inside subintervals"""
        spec = self.specs[0]
        implicit = FreqSetUnion(spec)
        explicit = build_freqset(spec)
        for a, b in ((Fraction(0), Fraction(1)), (Fraction(1, 5), Fraction(3, 7)), (Fraction(1, 2), Fraction(1))):
            self.assertEqual(implicit.overlap(a, b), explicit.overlap(a, b))

    def test_golden_overlap(self):
        """Test overlap in Q[beta] for the golden system"""
        spec = self.specs[2]
        implicit = FreqSetUnion(spec)
        explicit = build_freqset(spec)
        self.assertEqual(implicit.overlap(Fraction(1, 3), Fraction(4, 5)), explicit.overlap(Fraction(1, 3), Fraction(4, 5)))

    def test_empty_set(self):
        """Test an infeasible spec"""
        spec = FreqSetSpec(base(2), 1, vector(['1/2', '1/2'], 1, 2), 4, Fraction(1, 10))
        union = FreqSetUnion(spec)
        self.assertEqual(union.count(), 0)
        self.assertEqual(list(union.iter_members()), [])
        self.assertEqual(build_freqset(spec).count(), 0)


class TestUnionRestrict(unittest.TestCase):
    """Test restriction to half-open intervals"""

    def test_whole_interval(self):
        """Test that [0, 1) keeps every member"""
        union = CylinderUnion.full(base(2), 3)
        restricted = union_restrict(union, 0, 1)
        self.assertEqual(list(restricted.inside), list(union))
        self.assertEqual(restricted.clipped, [])

    def test_dyadic_alignment(self):
        """Test [1/4, 3/4) on all binary generation-3 cylinders"""
        restricted = union_restrict(CylinderUnion.full(base(2), 3), Fraction(1, 4), Fraction(3, 4))
        self.assertEqual(list(restricted.inside), [(0, 1, 0), (0, 1, 1), (1, 0, 0), (1, 0, 1)])
        self.assertEqual(restricted.clipped, [])

    def test_clipped_member(self):
        """Test [1/2, 1) on all ternary generation-2 cylinders"""
        restricted = union_restrict(CylinderUnion.full(base(3), 2), Fraction(1, 2), Fraction(1))
        self.assertEqual(list(restricted.inside), [(1, 2), (2, 0), (2, 1), (2, 2)])
        self.assertEqual(len(restricted.clipped), 1)
        part = restricted.clipped[0]
        self.assertEqual(part.word, (1, 1))
        self.assertEqual((part.low, part.high), (Fraction(1, 2), Fraction(5, 9)))
        self.assertEqual(restricted.lebesgue(), Fraction(1, 2))

    def test_bad_interval(self):
        """Test that the interval must lie in [0, 1)"""
        with self.assertRaises(InputError):
            union_restrict(CylinderUnion.full(base(2), 2), Fraction(1, 2), Fraction(1, 4))


class TestRandomUnion(unittest.TestCase):
    """Test seeded random unions"""

    def test_deterministic(self):
        """Test that a seed fixes the union"""
        first = random_union(golden(), 8, np.random.default_rng(4))
        second = random_union(golden(), 8, np.random.default_rng(4))
        self.assertEqual(list(first), list(second))
        self.assertGreater(first.count(), 0)

    def test_generation_checked(self):
        """Test that explicit members must share the generation"""
        with self.assertRaises(InputError):
            CylinderUnion(base(2), 3, [(0, 1)])
