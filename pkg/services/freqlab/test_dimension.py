#!/usr/bin/env python3
"""
Tests for Dimension Experiments

Entropy oracle, Q constant, critical-exponent estimation, oscillation witness,
intersection experiment and the continuity scan.
"""

import unittest
from fractions import Fraction

import mpmath
import pytest

from dimension import (
    IntersectionSpec,
    classify_tail,
    condition_ii_scan,
    consistency_residual,
    cylinder_scaling_check,
    entropy_dimension_oracle,
    estimate_critical_exponent,
    intersection_experiment,
    lower_threshold,
    oscillation_witness,
    periodic_frequencies,
    q_constant,
    q_partial_sum,
    reference_frequencies,
)
from errors import CheckStatus, InputError
from expansions import base, golden, tribonacci
from symbolic import FrequencyVector


def vector(values, m=1, g=2):
    return FrequencyVector.from_values(values, m, g)


def binary_entropy_dimension(p):
    p = mpmath.mpf(p)
    return -(p * mpmath.log(p) + (1 - p) * mpmath.log(1 - p)) / mpmath.log(2)


class TestEntropyOracle(unittest.TestCase):
    """Test the dimension oracle"""

    def test_eggleston_values(self):
        """Test H(p) / log 2 in base 2"""
        binary = base(2)
        self.assertAlmostEqual(float(entropy_dimension_oracle(binary, 1, vector(['1/2', '1/2'])).s_star), 1.0, places=12)
        self.assertEqual(entropy_dimension_oracle(binary, 1, vector(['1', '0'])).s_star, 0)
        for p in ('0.3', '0.1'):
            result = entropy_dimension_oracle(binary, 1, vector([p, str(1 - Fraction(p))]))
            self.assertEqual(result.formula_id, 'eggleston')
            self.assertAlmostEqual(float(result.s_star), float(binary_entropy_dimension(p)), places=12)
        self.assertAlmostEqual(float(entropy_dimension_oracle(binary, 1, vector(['0.3', '0.7'])).s_star), 0.8813, places=4)
        self.assertAlmostEqual(float(entropy_dimension_oracle(binary, 1, vector(['0.1', '0.9'])).s_star), 0.4690, places=4)

    def test_uniform_ternary(self):
        """Test that uniform ternary frequencies give dimension 1"""
        result = entropy_dimension_oracle(base(3), 1, vector(['1/3'] * 3, 1, 3))
        self.assertAlmostEqual(float(result.s_star), 1.0, places=12)

    def test_two_word_frequencies(self):
        """Test the conditional-entropy formula for uniform 2-words"""
        result = entropy_dimension_oracle(base(2), 2, vector(['1/4'] * 4, 2))
        self.assertEqual(result.formula_id, 'conditional-entropy')
        self.assertAlmostEqual(float(result.s_star), 1.0, places=12)

    def test_inconsistent_marginals(self):
        """Test that non-shift-invariant 2-word vectors are refused"""
        p = vector(['1/2', '1/2', '0', '0'], 2)
        self.assertEqual(consistency_residual(p), Fraction(1, 2))
        result = entropy_dimension_oracle(base(2), 2, p)
        self.assertFalse(result.available)
        self.assertIsNone(result.s_star)

    def test_golden_forbidden_support(self):
        """Test that charging '11' in the golden system is refused"""
        result = entropy_dimension_oracle(golden(), 2, vector(['1/4'] * 4, 2))
        self.assertFalse(result.available)
        self.assertEqual(result.consistency_report['forbidden_support'], ['11'])

    def test_golden_unrealizable(self):
        """Test that more ones than zeros cannot occur without '11'"""
        result = entropy_dimension_oracle(golden(), 1, vector(['1/5', '4/5']))
        self.assertFalse(result.available)

    def test_golden_alternating(self):
        """Test that (1/2, 1/2) forces the periodic sequence 0101..."""
        result = entropy_dimension_oracle(golden(), 1, vector(['1/2', '1/2']))
        self.assertTrue(result.available)
        self.assertEqual(result.formula_id, 'beta-closed-form')
        self.assertLess(abs(float(result.s_star)), 1e-9)

    def test_golden_parry(self):
        """Test the Parry frequencies and their full dimension"""
        system = golden()
        reference = reference_frequencies(system, 1)
        beta = (1 + mpmath.sqrt(5)) / 2
        self.assertAlmostEqual(float(reference[(1,)]), float(1 / (beta ** 2 + 1)), places=10)
        self.assertAlmostEqual(float(reference[(1,)]), 0.2764, places=4)
        result = entropy_dimension_oracle(system, 1, reference)
        self.assertAlmostEqual(float(result.s_star), 1.0, places=6)

    def test_reference_lengths(self):
        """Test that linear reference frequencies are products of branch lengths"""
        reference = reference_frequencies(base(3), 2)
        self.assertEqual(reference[(2, 1)], Fraction(1, 9))
        with self.assertRaises(InputError):
            reference_frequencies(base(2), 0)


class TestQConstant(unittest.TestCase):
    """Test the Q(s, beta) constant"""

    def test_unit_exponent(self):
        """Test Q(1, beta) = 1"""
        for beta in (golden(), tribonacci(), '1.5'):
            self.assertEqual(q_constant(1, beta), 1)

    def test_closed_form_matches_series(self):
        """Test the closed form against 10^4-term partial sums"""
        for beta in (golden(), tribonacci(), '1.5', '1.9'):
            for s in (Fraction(1, 10), Fraction(1, 2), Fraction(9, 10), Fraction(1)):
                difference = abs(q_constant(s, beta) - q_partial_sum(s, beta, 10 ** 4))
                self.assertLess(difference, mpmath.mpf(10) ** -12)

    def test_invalid_arguments(self):
        """Test exponent and base ranges"""
        with self.assertRaises(InputError):
            q_constant(0, '1.5')
        with self.assertRaises(InputError):
            q_constant(Fraction(1, 2), '2.5')
        with self.assertRaises(InputError):
            q_partial_sum(Fraction(1, 2), '1.5', 0)

    def test_lower_threshold(self):
        """Test thresholds of linear and beta systems"""
        self.assertEqual(lower_threshold(base(2), Fraction(1, 2)), 1)
        self.assertEqual(lower_threshold(golden(), Fraction(1)), mpmath.mpf(1) / 2)


class TestClassifyTail(unittest.TestCase):
    """Test tail classification"""

    def test_labels(self):
        """Test each label"""
        self.assertEqual(classify_tail([1, 1, 1], 1), 'sub-critical')
        self.assertEqual(classify_tail([Fraction(1, 2), Fraction(1, 20), Fraction(1, 100)], 1), 'super-critical')
        self.assertEqual(classify_tail([Fraction(1, 2), Fraction(3, 5), Fraction(7, 10)], 1), 'inconclusive')
        self.assertEqual(classify_tail([1, Fraction(1, 2), 1], 1), 'inconclusive')

    def test_envelope_ignores_single_steps(self):
        """Test that a dip followed by a partial recovery still counts as decay"""
        values = [Fraction(3, 5), Fraction(1, 5), Fraction(1, 2)]
        self.assertEqual(classify_tail(values, 1), 'super-critical')
        self.assertEqual(classify_tail(values, 1, rule='cutoff'), 'inconclusive')

    def test_cutoff_rule(self):
        """Test that the cutoff rule needs a decreasing tail below a tenth of the threshold"""
        self.assertEqual(classify_tail([Fraction(1, 2), Fraction(1, 20), Fraction(1, 100)], 1, rule='cutoff'), 'super-critical')
        self.assertEqual(classify_tail([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)], 1, rule='cutoff'), 'inconclusive')
        self.assertEqual(classify_tail([Fraction(1, 2), Fraction(3, 10), Fraction(1, 5)], 1), 'super-critical')

    def test_vanished_set(self):
        """Test that an empty set at the last generation is super-critical"""
        self.assertEqual(classify_tail([0, 0, 0], 1), 'super-critical')
        self.assertEqual(classify_tail([1, 0], 1), 'super-critical')

    def test_only_tail_counts(self):
        """Test that early values do not affect the label"""
        self.assertEqual(classify_tail([0, 0, 1, 1, 1], 1), 'sub-critical')

    def test_empty(self):
        """Test that an empty sequence is refused"""
        with self.assertRaises(InputError):
            classify_tail([], 1)

    def test_unknown_rule(self):
        """Test that only the known rules are accepted"""
        with self.assertRaises(InputError):
            classify_tail([1, 1, 1], 1, rule='median')


class TestCriticalExponent(unittest.TestCase):
    """Test the critical-exponent bracket"""

    def test_point_mass_super_critical(self):
        """Test that p = (1, 0) decays at every exponent"""
        estimate = estimate_critical_exponent(
            base(2), 1, vector(['1', '0']), Fraction(1, 100),
            [12, 16, 20], [Fraction(1, 5), Fraction(1, 2), Fraction(4, 5)],
        )
        self.assertEqual(set(estimate.classes.values()), {'super-critical'})
        self.assertEqual((estimate.s_lo, estimate.s_hi), (0, Fraction(1, 5)))
        self.assertTrue(estimate.contains(0))
        self.assertEqual(len(estimate.csv_rows()), 9)

    def test_point_mass_values(self):
        """Test N^s = 2^(-(n-1) s) for the single surviving cylinder"""
        estimate = estimate_critical_exponent(
            base(2), 1, vector(['1', '0']), Fraction(1, 100), [12], [Fraction(1, 2)],
        )
        self.assertAlmostEqual(float(estimate.row(Fraction(1, 2))[0]), 2 ** -5.5, places=12)

    def test_window_dip_closes_bracket(self):
        """Test that a non-monotone tail at s = 1 is still read as decay"""
        args = (base(2), 1, vector(['0.1', '0.9']), Fraction(1, 20), [16, 20, 22], [Fraction(1)])
        estimate = estimate_critical_exponent(*args)
        expected = [Fraction(15, 4096), Fraction(95, 262144), Fraction(385, 524288)]
        for value, exact in zip(estimate.row(1), expected):
            self.assertAlmostEqual(float(value) / float(exact), 1.0, places=12)
        self.assertEqual(estimate.classes[Fraction(1)], 'super-critical')
        self.assertEqual(estimate_critical_exponent(*args, rule='cutoff').classes[Fraction(1)], 'inconclusive')

    def test_unknown_rule(self):
        """Test that the estimator refuses an unknown tail rule"""
        with self.assertRaises(InputError):
            estimate_critical_exponent(base(2), 1, vector(['1/2', '1/2']), Fraction(1, 10), [8, 9, 10], [Fraction(1, 2)], rule='x')

    def test_fair_coin_stays_sub_critical(self):
        """Test that s below 1 never decays for the fair coin"""
        estimate = estimate_critical_exponent(
            base(2), 1, vector(['1/2', '1/2']), Fraction(1, 10), [8, 9, 10], [Fraction(1, 2)],
        )
        self.assertEqual(estimate.classes[Fraction(1, 2)], 'sub-critical')
        self.assertEqual(estimate.s_hi, 1)

    def test_threads_agree(self):
        """Test that the pool gives the same table"""
        args = (base(3), 1, vector(['1/3'] * 3, 1, 3), Fraction(1, 10), [6, 8], [Fraction(1, 2), Fraction(9, 10)])
        self.assertEqual(estimate_critical_exponent(*args).table, estimate_critical_exponent(*args, threads=2).table)

    def test_schedule_checked(self):
        """Test that the schedule must increase"""
        with self.assertRaises(InputError):
            estimate_critical_exponent(base(2), 1, vector(['1/2', '1/2']), Fraction(1, 10), [10, 8], [Fraction(1, 2)])
        with self.assertRaises(InputError):
            estimate_critical_exponent(base(2), 1, vector(['1/2', '1/2']), Fraction(1, 10), [], [Fraction(1, 2)])


class TestCylinderScaling(unittest.TestCase):
    """Test N^s(C ∩ G) / |C|^s sampling"""

    def setUp(self):
        """Set up the fair-coin set"""
        self.system = base(2)
        self.p = vector(['1/2', '1/2'])

    def test_ratios_recorded(self):
        """Test that every sampled cylinder gets a ratio in [0, 1]"""
        report = cylinder_scaling_check(self.system, 1, self.p, Fraction(1, 10), Fraction(4, 5), [(0,), (1, 0), (0, 1, 1)], 12)
        self.assertEqual(set(report.values['ratios']), {'0', '10', '011'})
        for ratio in report.values['ratios'].values():
            self.assertTrue(0 <= ratio <= 1)

    def test_disjoint_cylinder(self):
        """Test that a cylinder missing the set fails the check"""
        report = cylinder_scaling_check(self.system, 1, self.p, Fraction(1, 10), Fraction(4, 5), [(1,) * 12], 16)
        self.assertEqual(report.status, CheckStatus.FAIL)
        self.assertTrue(report.is_violation)
        self.assertEqual(report.values['ratios']['1' * 12], 0)
        self.assertEqual(len(report.errors), 1)
        self.assertEqual(len(report.warnings), 1)

    def test_generation_three_cylinders_pass(self):
        """Test that every generation-3 cylinder keeps ratio 1 at n = 18"""
        words = [tuple(int(bit) for bit in format(i, '03b')) for i in range(8)]
        report = cylinder_scaling_check(self.system, 1, self.p, Fraction(1, 10), Fraction(4, 5), words, 18)
        self.assertEqual(report.status, CheckStatus.PASS)
        self.assertEqual(report.values['constant'], 1)
        for ratio in report.values['ratios'].values():
            self.assertEqual(ratio, 1)

    def test_ratio_below_constant_fails(self):
        """Test that a meeting cylinder with ratio below the constant fails at n = 12"""
        report = cylinder_scaling_check(self.system, 1, self.p, Fraction(1, 10), Fraction(4, 5), [(0, 0, 0), (0, 1, 1)], 12)
        self.assertEqual(report.status, CheckStatus.FAIL)
        self.assertAlmostEqual(float(report.values['ratios']['000']), 0.871553, places=5)
        self.assertEqual(report.values['ratios']['011'], 1)
        self.assertIn('000', report.errors[0])
        self.assertEqual(report.warnings, [])

    def test_too_fine(self):
        """Test that cylinders must be coarser than the generation"""
        with self.assertRaises(InputError):
            cylinder_scaling_check(self.system, 1, self.p, Fraction(1, 10), Fraction(4, 5), [(0,) * 10], 10)


class TestOscillationWitness(unittest.TestCase):
    """Test the oscillating digit sequence"""

    def test_binary_visits(self):
        """Test repeated visits to both targets in base 2"""
        a, b = vector(['0.2', '0.8']), vector(['0.8', '0.2'])
        witness = oscillation_witness(base(2), 1, [a, b], 2 ** 12)
        self.assertEqual(len(witness.digits), 2 ** 12)
        self.assertGreaterEqual(witness.report.visits_near(['0.2', '0.8'], '0.02'), 3)
        self.assertGreaterEqual(witness.report.visits_near(['0.8', '0.2'], '0.02'), 2)
        self.assertEqual(witness.block_targets[:4], [0, 1, 0, 1])

    def test_golden_admissible(self):
        """Test that the golden witness never writes '11' and visits the Parry frequencies and (1,0)"""
        system = golden()
        parry = reference_frequencies(system, 1)
        witness = oscillation_witness(system, 1, [parry, vector(['1', '0'])], 2 ** 14, radius='0.05')
        text = ''.join(map(str, witness.digits))
        self.assertNotIn('11', text)
        self.assertGreaterEqual(witness.report.visits_near(list(parry.entries.values()), '0.05'), 2)
        self.assertGreaterEqual(witness.report.visits_near(['1', '0'], '0.05'), 2)

    def test_deterministic(self):
        """Test that two runs agree"""
        targets = [vector(['1/4', '3/4']), vector(['3/4', '1/4'])]
        self.assertEqual(
            oscillation_witness(base(2), 1, targets, 1024).digits,
            oscillation_witness(base(2), 1, targets, 1024).digits,
        )

    def test_unrealizable_target(self):
        """Test that golden targets with too many ones are refused"""
        with self.assertRaises(InputError):
            oscillation_witness(golden(), 1, [vector(['1/5', '4/5'])], 1024)

    def test_short_horizon(self):
        """Test the horizon floor"""
        with self.assertRaises(InputError):
            oscillation_witness(base(2), 1, [vector(['1/2', '1/2'])], 8)


class TestIntersection(unittest.TestCase):
    """Test the intersection experiment"""

    def test_positive_scans(self):
        """Test s = min dimension - margin and positive c_min for every factor"""
        specs = [
            IntersectionSpec(base(2), 1, vector(['0.3', '0.7']), Fraction(1, 10), 16),
            IntersectionSpec(base(3), 1, vector(['1/3'] * 3, 1, 3), Fraction(1, 10), 12),
        ]
        report = intersection_experiment(specs, depth=4, depth_cap=8)
        self.assertEqual(report.s, Fraction(781, 1000))
        self.assertEqual(report.status, CheckStatus.PASS)
        self.assertEqual(len(report.scans), 2)
        self.assertEqual(report.dimension_lower_bound, Fraction(781, 1000))

    def test_required_floor(self):
        """Test that a floor at or above c_min fails every factor"""
        specs = [
            IntersectionSpec(base(2), 1, vector(['0.3', '0.7']), Fraction(1, 10), 16),
            IntersectionSpec(base(3), 1, vector(['1/3'] * 3, 1, 3), Fraction(1, 10), 12),
        ]
        report = intersection_experiment(specs, depth=4, depth_cap=8, c_required=1)
        self.assertEqual(report.status, CheckStatus.FAIL)
        check = report.check()
        self.assertTrue(check.is_violation)
        self.assertEqual([message.split(':')[0] for message in check.errors], ['factor 0', 'factor 1'])
        self.assertEqual(report.to_dict()['c_required'], '1')

    def test_point_mass_short_circuit(self):
        """Test that a point mass on the zero word gives bound 0 without scans"""
        specs = [
            IntersectionSpec(base(2), 1, vector(['1', '0']), Fraction(1, 10), 16),
            IntersectionSpec(base(2), 1, vector(['1/2', '1/2']), Fraction(1, 10), 16),
        ]
        report = intersection_experiment(specs)
        self.assertTrue(report.short_circuit)
        self.assertEqual(report.dimension_lower_bound, 0)
        self.assertEqual(report.scans, [])

    def test_empty(self):
        """Test that at least one factor is required"""
        with self.assertRaises(InputError):
            intersection_experiment([])


class TestConditionII(unittest.TestCase):
    """Test the perturbation scan toward periodic measures"""

    def test_periodic_frequencies(self):
        """Test the 2-word frequencies of 0101..."""
        p = periodic_frequencies((0, 1), 2)
        self.assertEqual(p[(0, 1)], Fraction(1, 2))
        self.assertEqual(p[(1, 0)], Fraction(1, 2))
        self.assertEqual(p[(0, 0)], 0)

    def test_gap_shrinks(self):
        """Test that the dimension gap shrinks with delta"""
        rows = condition_ii_scan(base(2), 1, vector(['1/2', '1/2']), [Fraction(1, 10), Fraction(1, 100)])
        self.assertEqual(len(rows), 4)
        first = rows[0]
        self.assertEqual((first.word, first.delta, first.p_w, first.q_w), ((0,), Fraction(1, 10), Fraction(1, 2), Fraction(11, 20)))
        self.assertLess(rows[1].gap, rows[0].gap)
        self.assertLess(rows[3].gap, rows[2].gap)

    def test_invalid_delta(self):
        """Test that delta must lie in (0, 1)"""
        with self.assertRaises(InputError):
            condition_ii_scan(base(2), 1, vector(['1/2', '1/2']), [Fraction(1)])


@pytest.mark.slow
@pytest.mark.parametrize("p, bracket", [
    ('0.5', (Fraction(9, 10), Fraction(1))),
    ('0.3', (Fraction(3, 4), Fraction(9, 10))),
    ('0.1', (Fraction(3, 10), Fraction(3, 5))),
])
def test_eggleston_bracket_contains_oracle(p, bracket):
    """Brackets from n in {12, 16, 20, 22} contain H(p) / log 2"""
    system = base(2)
    target = vector([p, str(1 - Fraction(p))])
    grid = [Fraction(i, 20) for i in range(1, 21)]
    estimate = estimate_critical_exponent(system, 1, target, Fraction(1, 20), [12, 16, 20, 22], grid)
    assert (estimate.s_lo, estimate.s_hi) == bracket
    assert estimate.contains(entropy_dimension_oracle(system, 1, target).s_star)
    assert estimate.classes[estimate.s_hi] == 'super-critical'


@pytest.mark.slow
@pytest.mark.parametrize("p, s_hi", [('0.5', Fraction(1)), ('0.3', Fraction(9, 10))])
def test_eggleston_bracket_width(p, s_hi):
    """Brackets for p = 0.5 and p = 0.3 close from above within 0.15"""
    target = vector([p, str(1 - Fraction(p))])
    grid = [Fraction(i, 20) for i in range(1, 21)]
    estimate = estimate_critical_exponent(base(2), 1, target, Fraction(1, 20), [12, 16, 20, 22], grid)
    assert estimate.s_hi == s_hi
    assert estimate.classes[s_hi] == 'super-critical'
    assert estimate.width <= Fraction(3, 20)
    assert not any('widened' in line for line in estimate.diagnostics)


class TestLongRuns(unittest.TestCase):
    """Test acceptance-scale estimator and witness runs"""

    @pytest.mark.slow
    def test_cutoff_rule_stays_open(self):
        """Test that the cutoff rule never closes the p = 0.3 bracket below 1"""
        target = vector(['0.3', '0.7'])
        grid = [Fraction(i, 20) for i in range(1, 21)]
        estimate = estimate_critical_exponent(base(2), 1, target, Fraction(1, 20), [12, 16, 20, 22], grid, rule='cutoff')
        self.assertEqual((estimate.s_lo, estimate.s_hi), (Fraction(3, 4), Fraction(1)))
        self.assertEqual(estimate.rule, 'cutoff')

    @pytest.mark.slow
    def test_binary_witness_long_horizon(self):
        """Test at least three visits to each target within 2^16 digits"""
        a, b = vector(['0.2', '0.8']), vector(['0.8', '0.2'])
        witness = oscillation_witness(base(2), 1, [a, b], 2 ** 16)
        self.assertGreaterEqual(witness.report.visits_near(['0.2', '0.8'], '0.02'), 3)
        self.assertGreaterEqual(witness.report.visits_near(['0.8', '0.2'], '0.02'), 3)
