#!/usr/bin/env python3
"""
Frequency Sets

Generation-n approximations G_p(n, eps): the union of admissible cylinders
whose m-word window frequencies at horizon n lie strictly within eps of a
target vector.

Two representations are provided. CylinderUnion is explicit (a sorted list
of member words with exact endpoints). FreqSetUnion is implicit: it walks
the cylinder tree with a compact key (depth, automaton state, last m-1
digits, window counts) so that counts, Lebesgue measure and cover values can
be computed without listing every member.
"""

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

import settings
from errors import InputError, ResourceError
from expansions import Cylinder, Digits, ExpansionSystem, enumerate_admissible
from numeric import as_fraction, format_number, power, to_mpf
from symbolic import FrequencyVector, Word, all_words, empirical_frequencies, word_text

logger = logging.getLogger(__name__)

Key = Tuple[int, int, Digits, Tuple[int, ...]]


@dataclass
class FreqSetSpec:
    """Parameters of G_p(n, eps) for one expansion system"""
    system: ExpansionSystem
    m: int
    p: FrequencyVector
    n: int
    eps: Fraction

    def __post_init__(self):
        self.eps = as_fraction(self.eps)
        if self.m < 1:
            raise InputError(f"word length m must be positive, got {self.m}")
        if self.n <= self.m:
            raise InputError(f"generation n={self.n} must exceed m={self.m}")
        if not 0 < self.eps < 1:
            raise InputError(f"eps must lie in (0, 1), got {self.eps}")
        if self.p.m != self.m or self.p.g != self.system.alphabet_size:
            raise InputError(
                f"frequency vector is over words of length {self.p.m} on {self.p.g} symbols, "
                f"expected length {self.m} on {self.system.alphabet_size}"
            )

    @property
    def windows(self) -> int:
        return self.n - self.m

    def count_bounds(self) -> List[Tuple[int, int]]:
        """Integer window-count range (lo, hi) per word code satisfying the strict bounds"""
        bounds = []
        for target in self.p.values():
            lower = (target - self.eps) * self.windows
            upper = (target + self.eps) * self.windows
            lo = max(0, math.floor(lower) + 1)
            hi = min(self.windows, math.ceil(upper) - 1)
            bounds.append((lo, hi))
        return bounds

    def with_eps(self, eps: Any) -> 'FreqSetSpec':
        return FreqSetSpec(self.system, self.m, self.p, self.n, eps)

    def with_generation(self, n: int) -> 'FreqSetSpec':
        return FreqSetSpec(self.system, self.m, self.p, n, self.eps)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'system': self.system.name,
            'm': self.m,
            'p': self.p.to_list(),
            'n': self.n,
            'eps': format_number(self.eps),
        }


def frequencies_within(spec: FreqSetSpec, digits: Sequence[int]) -> bool:
    """Strict two-sided test of the window frequencies of a length-n word"""
    counts = empirical_frequencies(list(digits), spec.m, spec.n, spec.system.alphabet_size)
    for word in all_words(spec.m, spec.system.alphabet_size):
        ratio = counts.ratio(word)
        if not spec.p[word] - spec.eps < ratio < spec.p[word] + spec.eps:
            return False
    return True


class WindowWalker:
    """Branch-and-bound walk of the cylinder tree tracking window counts"""

    def __init__(self, spec: FreqSetSpec):
        self.spec = spec
        self.system = spec.system
        self.g = spec.system.alphabet_size
        self.m = spec.m
        self.n = spec.n
        self.windows = spec.windows
        self.bounds = spec.count_bounds()
        self._lo = tuple(lo for lo, _ in self.bounds)
        self._hi = tuple(hi for _, hi in self.bounds)
        self.empty = any(lo > hi for lo, hi in self.bounds) or sum(self._lo) > self.windows \
            or sum(self._hi) < self.windows

    def root(self) -> Optional[Key]:
        if self.empty:
            return None
        return (0, self.system.initial_state, (), (0,) * len(self.bounds))

    def child(self, key: Key, digit: int) -> Optional[Key]:
        depth, state, tail, counts = key
        next_state = self.system.step(state, digit)
        if next_state is None:
            return None
        position = depth + 1
        window = tail + (digit,)
        if self.m <= position <= self.n - 1:
            code = 0
            for d in window[-self.m:]:
                code = code * self.g + d
            if counts[code] + 1 > self._hi[code]:
                return None
            counts = counts[:code] + (counts[code] + 1,) + counts[code + 1:]
        done = max(0, min(position, self.n - 1) - self.m + 1)
        remaining = self.windows - done
        needed = sum(max(0, lo - c) for lo, c in zip(self._lo, counts))
        room = sum(hi - c for hi, c in zip(self._hi, counts))
        if needed > remaining or room < remaining:
            return None
        next_tail = window[-(self.m - 1):] if self.m > 1 else ()
        return (position, next_state, next_tail, counts)

    def children(self, key: Key) -> List[Tuple[int, Key]]:
        result = []
        for digit in range(self.g):
            nxt = self.child(key, digit)
            if nxt is not None:
                result.append((digit, nxt))
        return result

    def is_leaf(self, key: Key) -> bool:
        return key[0] == self.n

    def key_of(self, word: Sequence[int]) -> Optional[Key]:
        key = self.root()
        for digit in word:
            if key is None:
                return None
            key = self.child(key, digit)
        return key


class CylinderUnion:
    """Explicit union of generation-n cylinders"""

    def __init__(self, system: ExpansionSystem, generation: int, members: Iterable[Any], check: bool = True):
        if generation < 1:
            raise InputError("generation must be at least 1")
        self.system = system
        self.generation = generation
        words = sorted({tuple(int(d) for d in word) for word in members})
        if check:
            for word in words:
                if len(word) != generation:
                    raise InputError(
                        f"member {word_text(word, system.alphabet_size)} is not of generation {generation}"
                    )
                system.require_admissible(word)
        self.members: Tuple[Digits, ...] = tuple(words)
        self._geometry: Optional[Tuple[list, list, list]] = None
        self._member_set = None

    @classmethod
    def full(cls, system: ExpansionSystem, generation: int) -> 'CylinderUnion':
        return cls(system, generation, enumerate_admissible(system, generation), check=False)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Digits]:
        return iter(self.members)

    def count(self) -> int:
        return len(self.members)

    def iter_members(self) -> Iterator[Digits]:
        return iter(self.members)

    def contains(self, word: Any) -> bool:
        if self._member_set is None:
            self._member_set = set(self.members)
        return tuple(word) in self._member_set

    def cylinders(self) -> List[Cylinder]:
        return [self.system.cylinder(word) for word in self.members]

    def _ensure_geometry(self) -> Tuple[list, list, list]:
        if self._geometry is None:
            lefts, rights, prefix = [], [], [self.system.zero_length()]
            for cylinder in self.cylinders():
                lefts.append(cylinder.left)
                rights.append(cylinder.right)
                prefix.append(prefix[-1] + cylinder.length)
            self._geometry = (lefts, rights, prefix)
        return self._geometry

    def _first(self, values: list, predicate: Callable[[Any], bool]) -> int:
        lo, hi = 0, len(values)
        while lo < hi:
            mid = (lo + hi) // 2
            if predicate(values[mid]):
                hi = mid
            else:
                lo = mid + 1
        return lo

    def _span(self, a: Any, b: Any) -> Tuple[int, int]:
        """Index range of members meeting [a, b)"""
        lefts, rights, _ = self._ensure_geometry()
        compare = self.system.compare
        i = self._first(rights, lambda right: compare(right, a) > 0)
        j = self._first(lefts, lambda left: compare(left, b) >= 0)
        return i, max(i, j)

    def lebesgue(self) -> Any:
        return self._ensure_geometry()[2][-1]

    def overlap(self, a: Any, b: Any) -> Any:
        """Lebesgue measure of the union inside [a, b)"""
        lefts, rights, prefix = self._ensure_geometry()
        i, j = self._span(a, b)
        if i >= j:
            return self.system.zero_length()
        compare = self.system.compare
        total = prefix[j] - prefix[i]
        if compare(lefts[i], a) < 0:
            total = total - (a - lefts[i])
        if compare(rights[j - 1], b) > 0:
            total = total - (rights[j - 1] - b)
        return total

    def length_sum(self, s: Fraction) -> Any:
        """Sum of |C|^s over the members"""
        values = [power(cylinder.length if cylinder.exact else to_mpf(cylinder.length), s)
                  for cylinder in self.cylinders()]
        if all(isinstance(value, Fraction) for value in values):
            return sum(values, Fraction(0))
        return sum((to_mpf(value) for value in values), to_mpf(0))

    def materialize(self) -> 'CylinderUnion':
        return self

    def rows(self) -> List[Dict[str, str]]:
        """CSV rows: word, left, right, length"""
        rows = []
        for cylinder in self.cylinders():
            payload = cylinder.to_dict()
            rows.append({key: payload[key] for key in ('word', 'left', 'right', 'length')})
        return rows


class FreqSetUnion:
    """G_p(n, eps) represented by its branch-and-bound walk"""

    def __init__(self, spec: FreqSetSpec):
        self.spec = spec
        self.system = spec.system
        self.generation = spec.n
        self.walker = WindowWalker(spec)
        self._counts: Dict[Key, int] = {}
        self._image_measure: Dict[Key, Any] = {}

    def root(self) -> Optional[Key]:
        return self.walker.root()

    def children(self, key: Key) -> List[Tuple[int, Key]]:
        return self.walker.children(key)

    def contains(self, word: Any) -> bool:
        word = tuple(word)
        if len(word) != self.generation or not self.system.is_admissible(word):
            return False
        key = self.walker.key_of(word)
        return key is not None and self.walker.is_leaf(key)

    def _count(self, key: Key) -> int:
        if key in self._counts:
            return self._counts[key]
        if self.walker.is_leaf(key):
            total = 1
        else:
            total = sum(self._count(child) for _, child in self.children(key))
        self._counts[key] = total
        return total

    def count(self) -> int:
        root = self.root()
        return 0 if root is None else self._count(root)

    def iter_members(self) -> Iterator[Digits]:
        root = self.root()
        if root is None:
            return
        stack = [((), root)]
        while stack:
            prefix, key = stack.pop()
            if self.walker.is_leaf(key):
                yield prefix
                continue
            # reversed so the smallest digit is popped first
            for digit, child in reversed(self.children(key)):
                stack.append((prefix + (digit,), child))

    def __iter__(self) -> Iterator[Digits]:
        return self.iter_members()

    def image_measure(self, key: Key) -> Any:
        """Measure of the set inside the cylinder of key, in that cylinder's image coordinates"""
        if key in self._image_measure:
            return self._image_measure[key]
        depth, state, _, _ = key
        if self.walker.is_leaf(key):
            total = self.system.image_length(state)
        else:
            total = self.system.zero_length()
            for digit, child in self.children(key):
                total = total + self.system.pull_back(self.image_measure(child), state, digit)
        self._image_measure[key] = total
        return total

    def lebesgue(self) -> Any:
        root = self.root()
        if root is None:
            return self.system.zero_length()
        return self.image_measure(root)

    def overlap(self, a: Any, b: Any) -> Any:
        """Lebesgue measure of the set inside [a, b), by cylinder descent"""
        root = self.root()
        total = self.system.zero_length()
        if root is None:
            return total
        compare = self.system.compare
        stack = [((), root)]
        while stack:
            prefix, key = stack.pop()
            cylinder = self.system.cylinder(prefix) if prefix else None
            if cylinder is None:
                left, right = self.system.zero_length(), self.system.unit_length()
            else:
                left, right = cylinder.left, cylinder.right
            if compare(right, a) <= 0 or compare(left, b) >= 0:
                continue
            if compare(left, a) >= 0 and compare(right, b) <= 0:
                measure = self.image_measure(key)
                if cylinder is not None:
                    measure = self.system.image_to_absolute(measure, cylinder)
                total = total + measure
                continue
            if self.walker.is_leaf(key):
                low = left if compare(left, a) >= 0 else a
                high = right if compare(right, b) <= 0 else b
                total = total + (high - low)
                continue
            for digit, child in self.children(key):
                stack.append((prefix + (digit,), child))
        return total

    def materialize(self, budget: int = settings.ENUMERATION_BUDGET) -> CylinderUnion:
        return build_freqset(self.spec, budget=budget)


def build_freqset(spec: FreqSetSpec, budget: int = settings.ENUMERATION_BUDGET) -> CylinderUnion:
    """Enumerate G_p(n, eps) explicitly, pruning prefixes whose counts cannot recover"""
    walker = WindowWalker(spec)
    root = walker.root()
    members: List[Digits] = []
    explored = 0
    if root is not None:
        stack = [((), root)]
        while stack:
            prefix, key = stack.pop()
            explored += 1
            if explored > budget:
                raise ResourceError(
                    f"freqset enumeration exceeded {budget} nodes",
                    diagnostics={
                        'nodes_explored': explored - 1,
                        'members_found': len(members),
                        'deepest_prefix': word_text(prefix, spec.system.alphabet_size),
                    },
                )
            if walker.is_leaf(key):
                members.append(prefix)
                continue
            for digit, child in reversed(walker.children(key)):
                stack.append((prefix + (digit,), child))
    logger.info(
        f"freqset n={spec.n} m={spec.m} eps={format_number(spec.eps)} on {spec.system.name}: "
        f"{len(members)} members, {explored} nodes explored"
    )
    return CylinderUnion(spec.system, spec.n, members, check=False)


def membership(item: Any, spec: FreqSetSpec) -> bool:
    """Whether a generation-n word, or the generation-n prefix of x, belongs to G_p(n, eps)"""
    if isinstance(item, (Word, tuple, list)):
        digits = item.digits if isinstance(item, Word) else tuple(int(d) for d in item)
        if len(digits) != spec.n:
            raise InputError(f"word has length {len(digits)}, expected n={spec.n}")
        spec.system.require_admissible(digits)
    else:
        digits = spec.system.expand(item, spec.n)
    return frequencies_within(spec, digits)


@dataclass
class ClippedPart:
    """A boundary member cut down to its part inside the window"""
    word: Digits
    low: Any
    high: Any

    @property
    def length(self) -> Any:
        return self.high - self.low


@dataclass
class RestrictedUnion:
    """U restricted to [a, b): whole members inside plus at most two clipped ones"""
    system: ExpansionSystem
    a: Any
    b: Any
    inside: CylinderUnion
    clipped: List[ClippedPart] = field(default_factory=list)

    def overlap(self, c: Any, d: Any) -> Any:
        compare = self.system.compare
        total = self.inside.overlap(c, d)
        for part in self.clipped:
            low = part.low if compare(part.low, c) >= 0 else c
            high = part.high if compare(part.high, d) <= 0 else d
            if compare(high, low) > 0:
                total = total + (high - low)
        return total

    def lebesgue(self) -> Any:
        total = self.inside.lebesgue()
        for part in self.clipped:
            total = total + part.length
        return total


def union_restrict(union: CylinderUnion, a: Any, b: Any) -> RestrictedUnion:
    """Partition union ∩ [a, b) into whole members and clipped boundary members"""
    a, b = as_fraction(a), as_fraction(b)
    if not 0 <= a < b <= 1:
        raise InputError(f"[{a}, {b}) is not a subinterval of [0, 1)")
    compare = union.system.compare
    lefts, rights, _ = union._ensure_geometry()
    i, j = union._span(a, b)
    inside, clipped = [], []
    for index in range(i, j):
        left, right = lefts[index], rights[index]
        if compare(left, a) >= 0 and compare(right, b) <= 0:
            inside.append(union.members[index])
        else:
            low = left if compare(left, a) >= 0 else a
            high = right if compare(right, b) <= 0 else b
            clipped.append(ClippedPart(union.members[index], low, high))
    return RestrictedUnion(
        system=union.system, a=a, b=b,
        inside=CylinderUnion(union.system, union.generation, inside, check=False),
        clipped=clipped,
    )


def random_union(system: ExpansionSystem, n: int, rng: np.random.Generator, density: float = 0.5) -> CylinderUnion:
    """A random non-empty subset of the admissible generation-n words"""
    if not 0 < density <= 1:
        raise InputError("density must lie in (0, 1]")
    words = list(enumerate_admissible(system, n))
    keep = rng.random(len(words)) < density
    if not keep.any():
        keep[int(rng.integers(len(words)))] = True
    return CylinderUnion(system, n, [word for word, flag in zip(words, keep) if flag], check=False)


def multinomial_count(g: int, n: int, bounds: Sequence[Tuple[int, int]]) -> int:
    """Base-g, m=1 member count: sum of multinomial coefficients over the count window, times g for the free last digit"""
    windows = n - 1

    @lru_cache(maxsize=None)
    def ways(symbol: int, remaining: int) -> int:
        if symbol == g:
            return 1 if remaining == 0 else 0
        lo, hi = bounds[symbol]
        total = 0
        for c in range(lo, min(hi, remaining) + 1):
            total += math.comb(remaining, c) * ways(symbol + 1, remaining - c)
        return total

    return ways(0, windows) * g
