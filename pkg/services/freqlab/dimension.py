#!/usr/bin/env python3
"""
Dimension Experiments

Entropy oracles for the dimension of the set of points with prescribed
m-word frequencies, the finite-n estimator of the critical exponent built on
the cover measures, the Q(s, beta) constant, oscillation witnesses and the
intersection experiment.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from multiprocessing.pool import ThreadPool
from typing import Any, Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np
from scipy.optimize import Bounds, LinearConstraint, minimize

from errors import CheckReport, CheckStatus, InputError
from expansions import BetaSystem, Digits, ExpansionSystem, PiecewiseLinearMap, enumerate_admissible
from freqsets import FreqSetSpec, FreqSetUnion
from netmeasure import FalconerScan, StateCoverValues, falconer_condition_scan
from numeric import as_fraction, format_number, to_mpf, validate_exponent
from symbolic import AccumulationReport, FrequencyVector, accumulation_estimate, all_words, word_text

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-9
DECAY_FACTOR = Fraction(1, 10)
TAIL_POINTS = 3
TAIL_RULES = ('envelope', 'cutoff')
WITNESS_BASE_BLOCK = 16


@dataclass
class DimensionOracleResult:
    """Dimension value from an entropy formula, or the reason none applies"""
    s_star: Optional[mpmath.mpf]
    formula_id: str
    consistency_report: Dict[str, Any] = field(default_factory=dict)
    available: bool = True
    reason: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            's_star': format_number(self.s_star) if self.s_star is not None else None,
            'formula_id': self.formula_id,
            'available': self.available,
            'reason': self.reason,
            'consistency_report': {key: format_number(value) if not isinstance(value, (str, list)) else value
                                   for key, value in self.consistency_report.items()},
        }


def _entropy(values: Sequence[Any]) -> mpmath.mpf:
    total = mpmath.mpf(0)
    for value in values:
        value = to_mpf(value)
        if value > 0:
            total -= value * mpmath.log(value)
    return total


def marginal(p: FrequencyVector, side: str) -> Dict[Digits, Fraction]:
    """(m-1)-word marginal dropping the last ('left') or first ('right') digit"""
    result: Dict[Digits, Fraction] = {}
    for word, value in p.entries.items():
        key = word[:-1] if side == 'left' else word[1:]
        result[key] = result.get(key, Fraction(0)) + value
    return result


def consistency_residual(p: FrequencyVector) -> Fraction:
    """Largest gap between the left and right (m-1)-marginals"""
    if p.m < 2:
        return Fraction(0)
    left, right = marginal(p, 'left'), marginal(p, 'right')
    return max(abs(left[u] - right[u]) for u in left)


def _check_vector(system: ExpansionSystem, m: int, p: FrequencyVector) -> None:
    if p.m != m or p.g != system.alphabet_size:
        raise InputError(f"frequency vector does not describe {m}-words on {system.alphabet_size} symbols")


def reference_frequencies(system: ExpansionSystem, m: int) -> FrequencyVector:
    """m-word frequencies of the natural invariant measure (Lebesgue lengths, or the Parry measure)"""
    if m < 1:
        raise InputError("m must be positive")
    words = all_words(m, system.alphabet_size)
    if isinstance(system, PiecewiseLinearMap):
        entries = {}
        for word in words:
            value = Fraction(1)
            for digit in word:
                value *= system.branch_lengths[digit]
            entries[word] = value
        return FrequencyVector(m=m, g=system.alphabet_size, entries=entries)

    states = system.states()
    adjacency = np.zeros((len(states), len(states)))
    for state in states:
        for digit in range(system.alphabet_size):
            target = system.step(state, digit)
            if target is not None:
                adjacency[state, target] += 1
    eigenvalues, right_vectors = np.linalg.eig(adjacency)
    lead = int(np.argmax(eigenvalues.real))
    perron = eigenvalues[lead].real
    right = np.abs(right_vectors[:, lead].real)
    eigenvalues_t, left_vectors = np.linalg.eig(adjacency.T)
    left = np.abs(left_vectors[:, int(np.argmax(eigenvalues_t.real))].real)
    norm = float(left @ right)

    masses = []
    for word in words:
        mass = 0.0
        for start in states:
            end = start
            for digit in word:
                end = system.step(end, digit)
                if end is None:
                    break
            if end is not None:
                mass += left[start] * right[end]
        masses.append(mass / (norm * perron ** m))
    masses = np.array(masses)
    masses = masses / masses.sum()
    entries = {word: Fraction(repr(float(value))) for word, value in zip(words, masses)}
    drift = sum(entries.values(), Fraction(0)) - 1
    heaviest = max(entries, key=lambda w: entries[w])
    entries[heaviest] -= drift
    return FrequencyVector(m=m, g=system.alphabet_size, entries=entries, exact=False)


def _lifted_entropy(system: BetaSystem, m: int, p: FrequencyVector) -> Tuple[Optional[float], str, Dict[str, Any]]:
    """Maximal entropy (nats) of a shift-invariant measure on the subshift with m-marginal p"""
    length = max(m, system.k)
    words = list(enumerate_admissible(system, length))
    index = {word: i for i, word in enumerate(words)}
    rows, rhs = [], []
    # shift invariance of the lifted block distribution
    for middle in itertools.product(range(2), repeat=length - 1):
        row = np.zeros(len(words))
        for digit in range(2):
            if middle + (digit,) in index:
                row[index[middle + (digit,)]] += 1
            if (digit,) + middle in index:
                row[index[(digit,) + middle]] -= 1
        if row.any():
            rows.append(row)
            rhs.append(0.0)
    for word in all_words(m, 2):
        row = np.zeros(len(words))
        for lifted, i in index.items():
            if lifted[:m] == word:
                row[i] = 1
        rows.append(row)
        rhs.append(float(p[word]))
    matrix, target = np.array(rows), np.array(rhs)
    prefixes = sorted({word[:-1] for word in words})
    prefix_index = np.array([prefixes.index(word[:-1]) for word in words])

    def entropy(q: np.ndarray) -> float:
        q = np.clip(q, 0.0, None)
        block = -np.sum(q[q > 0] * np.log(q[q > 0]))
        marg = np.bincount(prefix_index, weights=q, minlength=len(prefixes))
        short = -np.sum(marg[marg > 0] * np.log(marg[marg > 0]))
        return float(block - short)

    def negative_entropy(q: np.ndarray) -> float:
        return -entropy(q)

    def gradient(q: np.ndarray) -> np.ndarray:
        q = np.clip(q, 1e-300, None)
        marg = np.bincount(prefix_index, weights=q, minlength=len(prefixes))
        return np.log(q) - np.log(np.clip(marg[prefix_index], 1e-300, None))

    rank = np.linalg.matrix_rank(matrix)
    details = {'lift_length': length, 'variables': len(words), 'rank': int(rank)}
    if rank == len(words):
        solution, *_ = np.linalg.lstsq(matrix, target, rcond=None)
        formula = 'beta-closed-form'
    else:
        start, *_ = np.linalg.lstsq(matrix, target, rcond=None)
        start = np.clip(start, 1e-6, None)
        result = minimize(
            negative_entropy, start, jac=gradient, method='SLSQP',
            bounds=Bounds(np.zeros(len(words)), np.ones(len(words))),
            constraints=[LinearConstraint(matrix, target, target)],
            options={'maxiter': 500, 'ftol': 1e-12},
        )
        solution = result.x
        formula = 'beta-max-entropy'
        details['optimizer'] = str(result.message)
    residual = float(np.max(np.abs(matrix @ solution - target)))
    details['lift_residual'] = residual
    if residual > 1e-7 or solution.min() < -1e-9:
        return None, formula, details
    return entropy(solution), formula, details


def entropy_dimension_oracle(system: ExpansionSystem, m: int, p: FrequencyVector) -> DimensionOracleResult:
    """Dimension of the points whose m-word frequencies are p, from the entropy/Lyapunov ratio"""
    _check_vector(system, m, p)
    residual = consistency_residual(p)
    report: Dict[str, Any] = {'shift_residual': residual}
    if residual > Fraction(CONSISTENCY_TOLERANCE):
        return DimensionOracleResult(
            None, 'unavailable', report, available=False,
            reason=f"marginals disagree by {float(residual):.3g}",
        )

    if isinstance(system, BetaSystem):
        forbidden = [word for word in p.support() if not system.is_admissible(word)]
        if forbidden:
            report['forbidden_support'] = [word_text(word, 2) for word in forbidden]
            return DimensionOracleResult(
                None, 'unavailable', report, available=False,
                reason='frequency vector charges a forbidden word',
            )
        entropy, formula, details = _lifted_entropy(system, m, p)
        report.update(details)
        if entropy is None:
            return DimensionOracleResult(
                None, formula, report, available=False,
                reason='no invariant measure on the subshift has these frequencies',
            )
        s_star = to_mpf(max(entropy, 0.0)) / mpmath.log(system.beta_value)
        return DimensionOracleResult(min(max(s_star, mpmath.mpf(0)), mpmath.mpf(1)), formula, report)

    lengths = system.branch_lengths
    if m == 1:
        entropy = _entropy(p.values())
        lyapunov = sum((to_mpf(p[(d,)]) * -mpmath.log(to_mpf(lengths[d])) for d in range(p.g)), mpmath.mpf(0))
        formula = 'eggleston'
    else:
        entropy = _entropy(p.values()) - _entropy(marginal(p, 'left').values())
        digit_mass = {d: Fraction(0) for d in range(p.g)}
        for word, value in p.entries.items():
            digit_mass[word[0]] += value
        lyapunov = sum((to_mpf(mass) * -mpmath.log(to_mpf(lengths[d])) for d, mass in digit_mass.items()),
                       mpmath.mpf(0))
        formula = 'conditional-entropy'
    s_star = entropy / lyapunov
    return DimensionOracleResult(min(max(s_star, mpmath.mpf(0)), mpmath.mpf(1)), formula, report)


def q_constant(s: Any, beta: Any) -> mpmath.mpf:
    """beta^-s / (1 - (1 - 1/beta)^s)"""
    s = validate_exponent(s)
    beta = _beta_value(beta)
    if s == 1:
        return mpmath.mpf(1)
    exponent = to_mpf(s)
    return beta ** -exponent / (1 - (1 - 1 / beta) ** exponent)


def q_partial_sum(s: Any, beta: Any, terms: int) -> mpmath.mpf:
    """beta^-s * sum_{i < terms} (1 - 1/beta)^(i s)"""
    s = validate_exponent(s)
    if terms < 1:
        raise InputError("terms must be positive")
    beta = _beta_value(beta)
    exponent = to_mpf(s)
    ratio = (1 - 1 / beta) ** exponent
    return beta ** -exponent * mpmath.fsum(ratio ** i for i in range(terms))


def _beta_value(beta: Any) -> mpmath.mpf:
    if isinstance(beta, BetaSystem):
        value = beta.beta_value
    elif hasattr(beta, 'value') and callable(beta.value):
        value = beta.value()
    elif isinstance(beta, mpmath.mpf):
        value = beta
    else:
        value = to_mpf(as_fraction(beta))
    if not 1 < value < 2:
        raise InputError(f"beta must lie strictly between 1 and 2, got {mpmath.nstr(value, 12)}")
    return value


def lower_threshold(system: ExpansionSystem, s: Fraction) -> Any:
    """Level that cover values stay above below the critical exponent"""
    if isinstance(system, BetaSystem):
        return 1 / (2 * q_constant(s, system))
    return to_mpf(1) / to_mpf(system.distortion_bound) ** to_mpf(s)


def classify_tail(values: Sequence[Any], threshold: Any, rule: str = 'envelope') -> str:
    """'sub-critical', 'super-critical' or 'inconclusive' from the tail of a value sequence

    Sub-critical when every tail value stays at or above the threshold. Under the
    'envelope' rule a tail is super-critical when its last value is below the threshold
    and under the largest earlier tail value; single steps are not monotone in n because
    the count window holds a varying number of integers. The 'cutoff' rule instead needs
    a strictly decreasing tail ending below DECAY_FACTOR times the threshold.
    """
    if rule not in TAIL_RULES:
        raise InputError(f"unknown tail rule {rule!r}; choose from {list(TAIL_RULES)}")
    if not values:
        raise InputError("no values to classify")
    tail = [to_mpf(value) for value in values[-TAIL_POINTS:]]
    threshold = to_mpf(threshold)
    if all(value >= threshold for value in tail):
        return 'sub-critical'
    last = tail[-1]
    if last == 0:
        return 'super-critical'
    if len(tail) < TAIL_POINTS:
        return 'inconclusive'
    if rule == 'envelope':
        decayed = last < threshold and last < max(tail[:-1])
    else:
        decayed = all(b < a for a, b in zip(tail, tail[1:])) and last < to_mpf(DECAY_FACTOR) * threshold
    return 'super-critical' if decayed else 'inconclusive'


@dataclass
class CriticalExponentEstimate:
    """Bracket of the critical exponent and the cover values behind it"""
    s_lo: Fraction
    s_hi: Fraction
    eps: Fraction
    n_schedule: List[int]
    s_grid: List[Fraction]
    table: Dict[Tuple[Fraction, int], Any]
    classes: Dict[Fraction, str]
    rule: str = 'envelope'
    diagnostics: List[str] = field(default_factory=list)

    @property
    def width(self) -> Fraction:
        return self.s_hi - self.s_lo

    def contains(self, value: Any) -> bool:
        return to_mpf(self.s_lo) <= to_mpf(value) <= to_mpf(self.s_hi)

    def row(self, s: Any) -> List[Any]:
        s = as_fraction(s)
        return [self.table[(s, n)] for n in self.n_schedule]

    def to_dict(self) -> Dict[str, Any]:
        return {
            's_lo': format_number(self.s_lo),
            's_hi': format_number(self.s_hi),
            'eps': format_number(self.eps),
            'n_schedule': list(self.n_schedule),
            'classes': {format_number(s): label for s, label in self.classes.items()},
            'rule': self.rule,
            'diagnostics': list(self.diagnostics),
        }

    def csv_rows(self) -> List[Dict[str, Any]]:
        return [
            {'s': format_number(s), 'n': n, 'value': format_number(self.table[(s, n)])}
            for s in self.s_grid for n in self.n_schedule
        ]


def estimate_critical_exponent(
    system: ExpansionSystem,
    m: int,
    p: FrequencyVector,
    eps: Any,
    n_schedule: Sequence[int],
    s_grid: Sequence[Any],
    threads: int = 1,
    rule: str = 'envelope',
) -> CriticalExponentEstimate:
    """Classify each s by the behaviour of N^s(G_p(n, eps)) along the schedule and bracket the transition"""
    _check_vector(system, m, p)
    if rule not in TAIL_RULES:
        raise InputError(f"unknown tail rule {rule!r}; choose from {list(TAIL_RULES)}")
    eps = as_fraction(eps)
    n_schedule = list(n_schedule)
    if not n_schedule or any(b <= a for a, b in zip(n_schedule, n_schedule[1:])):
        raise InputError("n_schedule must be non-empty and strictly increasing")
    s_grid = sorted({validate_exponent(s) for s in s_grid})
    if not s_grid:
        raise InputError("s_grid must not be empty")

    unions = {n: FreqSetUnion(FreqSetSpec(system, m, p, n, eps)) for n in n_schedule}

    def cell(job: Tuple[Fraction, int]) -> Any:
        s, n = job
        return StateCoverValues(unions[n], s).root_value()

    jobs = [(s, n) for s in s_grid for n in n_schedule]
    # mpmath interval state is global, so beta ratios are computed before the pool starts
    if threads > 1:
        with ThreadPool(threads) as pool:
            results = pool.map(cell, jobs)
    else:
        results = [cell(job) for job in jobs]
    table = dict(zip(jobs, results))

    classes: Dict[Fraction, str] = {}
    for s in s_grid:
        classes[s] = classify_tail([table[(s, n)] for n in n_schedule], lower_threshold(system, s), rule)

    diagnostics = []
    sub = [s for s in s_grid if classes[s] == 'sub-critical']
    s_lo = max(sub) if sub else Fraction(0)
    sup = [s for s in s_grid if classes[s] == 'super-critical' and s > s_lo]
    s_hi = min(sup) if sup else Fraction(1)
    for s in s_grid:
        if classes[s] == 'inconclusive':
            diagnostics.append(f"s={format_number(s)} inconclusive on the schedule tail")
        elif classes[s] == 'super-critical' and s < s_lo:
            diagnostics.append(f"s={format_number(s)} super-critical below a sub-critical exponent")
    if not sup:
        diagnostics.append("no super-critical exponent above the bracket floor; upper end widened to 1")
    logger.info(
        f"critical exponent bracket [{format_number(s_lo)}, {format_number(s_hi)}] "
        f"from n={n_schedule} and {len(s_grid)} exponents"
    )
    return CriticalExponentEstimate(
        s_lo=s_lo, s_hi=s_hi, eps=eps, n_schedule=n_schedule, s_grid=s_grid,
        table=table, classes=classes, rule=rule, diagnostics=diagnostics,
    )


def scaling_constant(system: ExpansionSystem, s: Fraction) -> Any:
    """Lower constant for N^s(C ∩ G) / |C|^s"""
    if isinstance(system, BetaSystem):
        beta = system.beta_value
        return 1 / (2 * beta ** to_mpf(s) * q_constant(s, system))
    return to_mpf(1) / to_mpf(system.distortion_bound) ** (2 * to_mpf(s))


def cylinder_scaling_check(
    system: ExpansionSystem,
    m: int,
    p: FrequencyVector,
    eps: Any,
    s: Any,
    words: Sequence[Sequence[int]],
    n: int,
) -> CheckReport:
    """Ratio N^s(C ∩ G_p(n, eps)) / |C|^s for sampled cylinders C against the scaling constant"""
    _check_vector(system, m, p)
    s = validate_exponent(s)
    union = FreqSetUnion(FreqSetSpec(system, m, p, n, eps))
    values = StateCoverValues(union, s)
    constant = scaling_constant(system, s)
    ratios = {}
    below = []
    for word in words:
        word = system.require_admissible(word)
        if len(word) >= n:
            raise InputError(f"cylinder {word_text(word, system.alphabet_size)} is not coarser than generation {n}")
        key = union.walker.key_of(word)
        ratio = to_mpf(values.value(key)) if key is not None else mpmath.mpf(0)
        ratios[word_text(word, system.alphabet_size)] = ratio
        if ratio < constant:
            below.append(word_text(word, system.alphabet_size))
    report = CheckReport(
        name='cylinder_scaling',
        status=CheckStatus.PASS if not below else CheckStatus.FAIL,
        values={'s': s, 'n': n, 'constant': constant, 'ratios': ratios},
    )
    if below:
        report.errors.append(f"ratio below the constant at n={n} for {', '.join(below)}")
    empty = [word for word, ratio in ratios.items() if ratio == 0]
    if empty:
        report.warnings.append(f"cylinders missing the set at n={n}: {', '.join(empty)}")
    return report


@dataclass
class WitnessResult:
    """Digit sequence whose frequencies oscillate between targets, with its measured trajectory"""
    digits: Tuple[int, ...]
    report: AccumulationReport
    block_ends: List[int]
    block_targets: List[int]
    deviations: List[float]
    slack: List[float]

    def to_dict(self) -> Dict[str, Any]:
        payload = self.report.to_dict()
        payload.update({
            'length': len(self.digits),
            'block_ends': list(self.block_ends),
            'block_targets': list(self.block_targets),
            'deviations': [format(value, '.6g') for value in self.deviations],
            'slack': [format(value, '.6g') for value in self.slack],
        })
        return payload


def _check_realizable(system: ExpansionSystem, m: int, target: FrequencyVector) -> None:
    oracle = entropy_dimension_oracle(system, m, target)
    if not oracle.available:
        raise InputError(f"target {target.to_list()} is not realizable: {oracle.reason}")


def oscillation_witness(
    system: ExpansionSystem,
    m: int,
    targets: Sequence[FrequencyVector],
    horizon: int,
    radius: Any = Fraction(1, 50),
    base_block: int = WITNESS_BASE_BLOCK,
) -> WitnessResult:
    """Greedy digit sequence cycling its m-word frequencies through the targets in blocks of doubling minimum length

    A block closes once it has reached its minimum length and the running frequencies sit within
    radius of its target. The radius is one fixed value for every block rather than a bound
    shrinking with the block length; pass a smaller radius for tighter visits at long horizons.
    """
    if not targets:
        raise InputError("at least one target is required")
    if horizon <= max(m, base_block):
        raise InputError(f"horizon must exceed {max(m, base_block)}")
    for target in targets:
        _check_vector(system, m, target)
        _check_realizable(system, m, target)
    radius_value = float(as_fraction(radius))
    g = system.alphabet_size
    codes = {word: i for i, word in enumerate(all_words(m, g))}
    target_arrays = [target.as_array() for target in targets]

    counts = np.zeros(len(codes), dtype=np.int64)
    windows = 0
    digits: List[int] = []
    state = system.initial_state
    block, block_start = 0, 0
    block_ends, block_targets, deviations, slack = [], [], [], []

    def deviation_with(code: Optional[int], aim: np.ndarray) -> float:
        total = windows + (1 if code is not None else 0)
        if total == 0:
            return 0.0
        freq = counts.astype(float)
        if code is not None:
            freq[code] += 1
        return float(np.max(np.abs(freq / total - aim)))

    while len(digits) < horizon:
        aim = target_arrays[block % len(targets)]
        best = None
        for digit in range(g):
            next_state = system.step(state, digit)
            if next_state is None:
                continue
            window = tuple(digits[-(m - 1):] + [digit]) if m > 1 else (digit,)
            code = codes[window] if len(digits) + 1 >= m else None
            score = deviation_with(code, aim)
            if best is None or score < best[0]:
                best = (score, digit, next_state, code)
        _, digit, state, code = best
        digits.append(digit)
        if code is not None:
            counts[code] += 1
            windows += 1
        length = len(digits) - block_start
        if windows and length >= base_block * 2 ** block and len(digits) + 1 < horizon:
            current = deviation_with(None, aim)
            if current <= radius_value:
                block_ends.append(len(digits))
                block_targets.append(block % len(targets))
                deviations.append(current)
                slack.append(current * length)
                block += 1
                block_start = len(digits)

    checkpoints = [end + 1 for end in block_ends if end + 1 > m] + [horizon]
    checkpoints = sorted(set(checkpoints))
    report = accumulation_estimate(digits, m, checkpoints, radius, g)
    logger.info(f"oscillation witness: {len(block_ends)} completed blocks over {horizon} digits")
    return WitnessResult(
        digits=tuple(digits), report=report, block_ends=block_ends,
        block_targets=block_targets, deviations=deviations, slack=slack,
    )


@dataclass
class IntersectionSpec:
    """One factor of an intersection experiment"""
    system: ExpansionSystem
    m: int
    p: FrequencyVector
    eps: Fraction
    n: int

    def freqset(self) -> FreqSetUnion:
        return FreqSetUnion(FreqSetSpec(self.system, self.m, self.p, self.n, self.eps))


@dataclass
class IntersectionReport:
    """Exponent chosen below every factor's dimension and the Falconer scan of each factor"""
    s: Optional[Fraction]
    oracles: List[DimensionOracleResult]
    scans: List[FalconerScan]
    short_circuit: bool = False
    flags: List[str] = field(default_factory=list)
    status: CheckStatus = CheckStatus.PASS
    c_required: Fraction = Fraction(0)

    @property
    def dimension_lower_bound(self) -> Any:
        return Fraction(0) if self.short_circuit else self.s

    def to_dict(self) -> Dict[str, Any]:
        return {
            's': format_number(self.s) if self.s is not None else None,
            'short_circuit': self.short_circuit,
            'dimension_lower_bound': format_number(self.dimension_lower_bound) if self.dimension_lower_bound is not None else None,
            'oracles': [oracle.to_dict() for oracle in self.oracles],
            'scans': [scan.to_dict() for scan in self.scans],
            'flags': list(self.flags),
            'status': self.status.value,
            'c_required': format_number(self.c_required),
        }

    def check(self) -> CheckReport:
        report = CheckReport(
            name='intersection',
            status=self.status,
            values={
                's': self.s,
                'dimension_lower_bound': self.dimension_lower_bound,
                'c_min': [scan.c_min for scan in self.scans],
            },
            warnings=list(self.flags),
        )
        for index, scan in enumerate(self.scans):
            report.errors.extend(f"factor {index}: {message}" for message in scan.check(self.c_required).errors)
        return report


def _grid_exponent(value: Any, step: Fraction = Fraction(1, 1000)) -> Fraction:
    """Largest multiple of step not above value"""
    scaled = to_mpf(value) / to_mpf(step) + mpmath.mpf(10) ** -20
    return Fraction(int(mpmath.floor(scaled))) * step


def intersection_experiment(
    specs: Sequence[IntersectionSpec],
    s_margin: Any = Fraction(1, 10),
    depth: int = 6,
    depth_cap: Optional[int] = None,
    c_required: Any = 0,
) -> IntersectionReport:
    """Falconer scans of every factor at s = min oracle dimension - margin"""
    if not specs:
        raise InputError("at least one spec is required")
    margin = as_fraction(s_margin)
    c_required = as_fraction(c_required)
    oracles, flags = [], []
    dimensions = []
    for spec in specs:
        if spec.p.is_point_mass_on_zeros():
            logger.info("point mass on the zero word: intersection dimension bound is 0")
            return IntersectionReport(s=None, oracles=oracles, scans=[], short_circuit=True,
                                      flags=['point mass on the zero word'])
        oracle = entropy_dimension_oracle(spec.system, spec.m, spec.p)
        oracles.append(oracle)
        if oracle.available:
            dimensions.append(to_mpf(oracle.s_star))
            continue
        schedule = [n for n in (spec.n - 6, spec.n - 4, spec.n - 2, spec.n) if n > spec.m]
        grid = [Fraction(i, 20) for i in range(1, 21)]
        estimate = estimate_critical_exponent(spec.system, spec.m, spec.p, spec.eps, schedule, grid)
        dimensions.append(to_mpf(estimate.s_lo))
        margin = max(margin, 2 * as_fraction(s_margin))
        flags.append(f"oracle unavailable ({oracle.reason}); estimator floor {format_number(estimate.s_lo)} used")

    s = _grid_exponent(min(dimensions) - to_mpf(margin))
    if s <= 0:
        return IntersectionReport(s=None, oracles=oracles, scans=[], short_circuit=True,
                                  flags=flags + ['exponent after margin is not positive'])
    s = min(s, Fraction(1))
    scans = [falconer_condition_scan(spec.freqset(), s, depth, depth_cap) for spec in specs]
    statuses = [scan.check(c_required).status for scan in scans]
    if CheckStatus.FAIL in statuses:
        status = CheckStatus.FAIL
    elif CheckStatus.INCONCLUSIVE in statuses:
        status = CheckStatus.INCONCLUSIVE
    else:
        status = CheckStatus.PASS
    logger.info(f"intersection experiment at s={format_number(s)}: {len(scans)} scans, status {status.value}")
    return IntersectionReport(
        s=s, oracles=oracles, scans=scans, flags=flags, status=status, c_required=c_required,
    )


@dataclass
class ContinuityRow:
    word: Digits
    delta: Fraction
    p_w: Fraction
    q_w: Fraction
    s_q: Optional[mpmath.mpf]
    gap: Optional[mpmath.mpf]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'word': ''.join(map(str, self.word)),
            'delta': format_number(self.delta),
            'p_w': format_number(self.p_w),
            'q_w': format_number(self.q_w),
            's_q': format_number(self.s_q) if self.s_q is not None else '',
            'gap': format_number(self.gap) if self.gap is not None else '',
        }


def periodic_frequencies(word: Sequence[int], g: int) -> FrequencyVector:
    """m-word frequencies of the periodic sequence word word word ..."""
    word = tuple(word)
    m = len(word)
    entries: Dict[Digits, Fraction] = {}
    doubled = word + word
    for shift in range(m):
        window = doubled[shift:shift + m]
        entries[window] = entries.get(window, Fraction(0)) + Fraction(1, m)
    return FrequencyVector(m=m, g=g, entries=entries)


def condition_ii_scan(
    system: ExpansionSystem,
    m: int,
    p: FrequencyVector,
    deltas: Sequence[Any],
    words: Optional[Sequence[Sequence[int]]] = None,
) -> List[ContinuityRow]:
    """Perturb p toward the periodic measure of each word w and record the oracle dimension"""
    _check_vector(system, m, p)
    base = entropy_dimension_oracle(system, m, p)
    if not base.available:
        raise InputError(f"base vector has no oracle dimension: {base.reason}")
    candidates = [tuple(word) for word in words] if words is not None else all_words(m, system.alphabet_size)
    rows = []
    for word in candidates:
        if not system.is_admissible(word * (m + getattr(system, 'k', 1))):
            continue
        periodic = periodic_frequencies(word, system.alphabet_size)
        for delta in deltas:
            delta = as_fraction(delta)
            if not 0 < delta < 1:
                raise InputError("deltas must lie in (0, 1)")
            entries = {w: (1 - delta) * p[w] + delta * periodic[w] for w in p.words()}
            q = FrequencyVector(m=m, g=system.alphabet_size, entries=entries, exact=p.exact)
            oracle = entropy_dimension_oracle(system, m, q)
            gap = abs(oracle.s_star - base.s_star) if oracle.available else None
            rows.append(ContinuityRow(word, delta, p[word], q[word], oracle.s_star, gap))
    return rows
