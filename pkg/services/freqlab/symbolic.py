#!/usr/bin/env python3
"""
Symbolic Core

Digit words, frequency vectors and sliding-window statistics of digit streams.

Windows follow the n - m convention: at horizon n the windows start at
positions 1..n-m, so the n-th digit never completes a counted window.
"""

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import InputError
from numeric import as_fraction, format_number

logger = logging.getLogger(__name__)

SUM_TOLERANCE = Fraction(1, 10 ** 12)
MAX_WORD_CODES = 2 ** 40


@dataclass(frozen=True)
class Word:
    """A finite digit word over {0, ..., g-1}"""
    digits: Tuple[int, ...]
    alphabet_size: int

    def __post_init__(self):
        if self.alphabet_size < 1:
            raise InputError(f"alphabet size must be positive, got {self.alphabet_size}")
        if len(self.digits) < 1:
            raise InputError("a word needs at least one digit")
        for digit in self.digits:
            if not 0 <= digit < self.alphabet_size:
                raise InputError(f"digit {digit} outside alphabet of size {self.alphabet_size}")

    @classmethod
    def parse(cls, text: str, alphabet_size: int) -> 'Word':
        """Parse '0110' or '0.11.2' (dot separated for alphabets above 10)"""
        text = text.strip()
        if '.' in text or ',' in text:
            parts = text.replace(',', '.').split('.')
            digits = tuple(int(part) for part in parts if part)
        else:
            digits = tuple(int(ch) for ch in text)
        return cls(digits, alphabet_size)

    def __len__(self) -> int:
        return len(self.digits)

    def __str__(self) -> str:
        return word_text(self.digits, self.alphabet_size)


def word_text(digits: Sequence[int], alphabet_size: int) -> str:
    """Render a digit tuple compactly"""
    if alphabet_size <= 10:
        return ''.join(str(d) for d in digits)
    return '.'.join(str(d) for d in digits)


def all_words(m: int, g: int) -> List[Tuple[int, ...]]:
    """All g^m words of length m in lexicographic order"""
    return list(itertools.product(range(g), repeat=m))


@dataclass
class FrequencyVector:
    """Target or empirical frequencies of the g^m words of length m"""
    m: int
    g: int
    entries: Dict[Tuple[int, ...], Fraction]
    exact: bool = True

    def __post_init__(self):
        if self.m < 1 or self.g < 1:
            raise InputError(f"invalid word length {self.m} or alphabet size {self.g}")
        words = all_words(self.m, self.g)
        normalized = {}
        for word in words:
            value = self.entries.get(word, Fraction(0))
            if not 0 <= value <= 1:
                raise InputError(f"frequency of {word_text(word, self.g)} outside [0,1]: {value}")
            normalized[word] = value
        extra = set(self.entries) - set(normalized)
        if extra:
            raise InputError(f"frequency vector has entries for foreign words: {sorted(extra)[:3]}")
        total = sum(normalized.values(), Fraction(0))
        if self.exact and total != 1:
            raise InputError(f"frequencies must sum to exactly 1, got {total}")
        if not self.exact and abs(total - 1) > SUM_TOLERANCE:
            raise InputError(f"frequencies must sum to 1 within 1e-12, got {float(total)}")
        self.entries = normalized

    @classmethod
    def from_values(cls, values: Sequence[Any], m: int, g: int) -> 'FrequencyVector':
        """Build from g^m values listed in lexicographic word order"""
        words = all_words(m, g)
        if len(values) != len(words):
            raise InputError(f"expected {len(words)} frequencies for m={m}, g={g}, got {len(values)}")
        exact = not any(isinstance(value, float) for value in values)
        entries = {word: as_fraction(value) for word, value in zip(words, values)}
        return cls(m=m, g=g, entries=entries, exact=exact)

    @classmethod
    def point_mass(cls, word: Sequence[int], g: int) -> 'FrequencyVector':
        word = tuple(word)
        return cls(m=len(word), g=g, entries={word: Fraction(1)})

    def __getitem__(self, word: Sequence[int]) -> Fraction:
        return self.entries[tuple(word)]

    def words(self) -> List[Tuple[int, ...]]:
        return list(self.entries)

    def values(self) -> List[Fraction]:
        return list(self.entries.values())

    def support(self) -> List[Tuple[int, ...]]:
        return [word for word, value in self.entries.items() if value > 0]

    def as_array(self) -> np.ndarray:
        return np.array([float(value) for value in self.entries.values()], dtype=float)

    def distance(self, other: 'FrequencyVector') -> Fraction:
        """Sup-norm distance between two vectors over the same words"""
        if (self.m, self.g) != (other.m, other.g):
            raise InputError("frequency vectors over different word sets")
        return max(abs(self.entries[w] - other.entries[w]) for w in self.entries)

    def is_point_mass_on_zeros(self) -> bool:
        return self.entries[(0,) * self.m] == 1

    def to_list(self) -> List[str]:
        return [format_number(value) for value in self.entries.values()]


@dataclass
class EmpiricalFrequencies:
    """Window counts of every length-m word up to horizon n"""
    m: int
    n: int
    g: int
    counts: Dict[Tuple[int, ...], int]

    def __post_init__(self):
        if sum(self.counts.values()) != self.denominator:
            raise InputError("window counts do not add up to n - m")

    @property
    def denominator(self) -> int:
        return self.n - self.m

    def ratio(self, word: Sequence[int]) -> Fraction:
        return Fraction(self.counts[tuple(word)], self.denominator)

    def ratios(self) -> FrequencyVector:
        entries = {word: Fraction(count, self.denominator) for word, count in self.counts.items()}
        return FrequencyVector(m=self.m, g=self.g, entries=entries)


def _as_digit_array(seq: Any, g: int) -> np.ndarray:
    digits = seq.digits if isinstance(seq, Word) else seq
    array = np.asarray(digits, dtype=np.int64)
    if array.ndim != 1:
        raise InputError("digit sequence must be one-dimensional")
    if array.size and (array.min() < 0 or array.max() >= g):
        raise InputError(f"digit sequence does not use the alphabet of size {g}")
    return array


def window_codes(digits: np.ndarray, m: int, g: int) -> np.ndarray:
    """Base-g codes of every complete length-m window of digits"""
    if g ** m > MAX_WORD_CODES:
        raise InputError(f"g^m = {g}^{m} words is too many to count")
    count = len(digits) - m + 1
    if count <= 0:
        return np.zeros(0, dtype=np.int64)
    codes = np.zeros(count, dtype=np.int64)
    for offset in range(m):
        codes = codes * g + digits[offset:offset + count]
    return codes


def _check_horizon(available: int, n: int, m: int) -> None:
    if n <= m:
        raise InputError(f"horizon n={n} must exceed word length m={m}")
    if available < n:
        raise InputError(f"horizon n={n} exceeds the {available} available digits")


def count_word_occurrences(seq: Any, w: Word, n: int) -> int:
    """Number of windows i in 1..n-m at which w occurs"""
    if isinstance(seq, Word) and seq.alphabet_size != w.alphabet_size:
        raise InputError(
            f"alphabet mismatch: sequence uses {seq.alphabet_size}, word uses {w.alphabet_size}"
        )
    digits = _as_digit_array(seq, w.alphabet_size)
    m = len(w)
    _check_horizon(len(digits), n, m)
    pattern = np.asarray(w.digits, dtype=np.int64)
    windows = np.lib.stride_tricks.sliding_window_view(digits[:n - 1], m)
    return int(np.count_nonzero(np.all(windows == pattern, axis=1)))


def empirical_frequencies(seq: Any, m: int, n: int, g: Optional[int] = None) -> EmpiricalFrequencies:
    """Counts of all g^m words over the n - m windows of the horizon-n prefix"""
    if g is None:
        if not isinstance(seq, Word):
            raise InputError("alphabet size required for a bare digit sequence")
        g = seq.alphabet_size
    elif isinstance(seq, Word) and seq.alphabet_size != g:
        raise InputError(f"alphabet mismatch: sequence uses {seq.alphabet_size}, requested {g}")
    digits = _as_digit_array(seq, g)
    _check_horizon(len(digits), n, m)
    codes = window_codes(digits[:n - 1], m, g)
    tally = np.bincount(codes, minlength=g ** m)
    counts = {word: int(tally[index]) for index, word in enumerate(all_words(m, g))}
    return EmpiricalFrequencies(m=m, n=n, g=g, counts=counts)


@dataclass
class Cluster:
    """A candidate accumulation vector and the trajectory points assigned to it"""
    center: Tuple[Fraction, ...]
    visits: int = 0
    radius: Fraction = Fraction(0)
    checkpoints: List[int] = field(default_factory=list)


@dataclass
class AccumulationReport:
    """Finite-horizon picture of the accumulation set of empirical frequencies"""
    m: int
    g: int
    checkpoints: List[int]
    trajectory: List[Tuple[Fraction, ...]]
    clusters: List[Cluster]

    def visits_near(self, target: Sequence[Any], radius: Any) -> int:
        """Trajectory points within the sup-norm radius of target"""
        target = tuple(as_fraction(value) for value in target)
        radius = as_fraction(radius)
        return sum(1 for point in self.trajectory if _sup_distance(point, target) <= radius)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'checkpoints': list(self.checkpoints),
            'trajectory': [[format_number(v) for v in point] for point in self.trajectory],
            'clusters': [
                {
                    'center': [format_number(v) for v in cluster.center],
                    'visits': cluster.visits,
                    'radius': format_number(cluster.radius),
                }
                for cluster in self.clusters
            ],
        }


def _sup_distance(a: Sequence[Fraction], b: Sequence[Fraction]) -> Fraction:
    return max(abs(x - y) for x, y in zip(a, b))


def accumulation_estimate(
    seq: Iterable[int],
    m: int,
    checkpoints: Sequence[int],
    cluster_radius: Any,
    g: int,
) -> AccumulationReport:
    """Empirical frequency trajectory at the checkpoints, greedily clustered"""
    checkpoints = list(checkpoints)
    if not checkpoints:
        raise InputError("at least one checkpoint is required")
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])):
        raise InputError("checkpoints must be strictly increasing")
    if checkpoints[0] <= m:
        raise InputError(f"checkpoints must exceed the word length m={m}")
    radius = as_fraction(cluster_radius)
    if radius <= 0:
        raise InputError("cluster radius must be positive")

    last = checkpoints[-1]
    if isinstance(seq, Word):
        seq = seq.digits
    prefix = list(itertools.islice(iter(seq), last))
    digits = _as_digit_array(prefix, g)
    _check_horizon(len(digits), last, m)

    codes = window_codes(digits[:last - 1], m, g)
    tally = np.zeros(g ** m, dtype=np.int64)
    consumed = 0
    trajectory = []
    for n in checkpoints:
        upto = n - m
        tally += np.bincount(codes[consumed:upto], minlength=g ** m)
        consumed = upto
        trajectory.append(tuple(Fraction(int(count), upto) for count in tally))

    clusters: List[Cluster] = []
    for n, point in zip(checkpoints, trajectory):
        for cluster in clusters:
            distance = _sup_distance(cluster.center, point)
            if distance <= radius:
                cluster.visits += 1
                cluster.radius = max(cluster.radius, distance)
                cluster.checkpoints.append(n)
                break
        else:
            clusters.append(Cluster(center=point, visits=1, checkpoints=[n]))
    clusters.sort(key=lambda cluster: -cluster.visits)

    logger.debug(f"accumulation estimate: {len(checkpoints)} checkpoints, {len(clusters)} clusters")
    return AccumulationReport(m=m, g=g, checkpoints=checkpoints, trajectory=trajectory, clusters=clusters)
