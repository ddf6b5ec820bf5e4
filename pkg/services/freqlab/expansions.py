#!/usr/bin/env python3
"""
Expansion Systems

Full-branch piecewise-linear maps and terminating beta-systems: digit
extraction, admissibility and exact cylinder geometry.

Both kinds of system expose the same small interface used by the frequency
sets and the cover measures: an automaton over digits (``initial_state``,
``step``), the length ratio of a child cylinder to its parent, and the
cylinder of a word. A piecewise-linear map has a single state; a beta-system
tracks which image [0, T_i) the current cylinder has under f_beta^n.
"""

import bisect
import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, Iterator, List, Optional, Sequence, Set, Tuple

import mpmath

import settings
from algebraic import AlgebraicBeta, ApproximateBeta, BetaField, BetaNumber
from errors import AdmissibilityError, InputError, NonTerminatingError, PrecisionError, ResourceError
from numeric import as_fraction, format_number, power, to_mpf
from symbolic import Word, word_text

logger = logging.getLogger(__name__)

Digits = Tuple[int, ...]


def _digits(word: Any) -> Digits:
    if isinstance(word, Word):
        return word.digits
    if isinstance(word, str):
        return tuple(int(ch) for ch in word)
    return tuple(int(d) for d in word)


@dataclass(frozen=True)
class Cylinder:
    """Half-open interval [left, right) of points whose itinerary starts with word"""
    system: 'ExpansionSystem' = field(repr=False, compare=False)
    word: Digits
    left: Any
    right: Any

    @property
    def generation(self) -> int:
        return len(self.word)

    @property
    def length(self) -> Any:
        return self.right - self.left

    @property
    def exact(self) -> bool:
        return isinstance(self.left, Fraction)

    def bounds(self) -> Tuple[mpmath.mpf, mpmath.mpf]:
        return to_mpf(self.left), to_mpf(self.right)

    def contains(self, x: Any) -> bool:
        """Certified test left <= x < right"""
        x = as_fraction(x)
        if self.exact:
            return self.left <= x < self.right
        field_ = self.system.field
        return field_.compare(self.left, x) <= 0 and field_.compare(x, self.right) < 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            'word': word_text(self.word, self.system.alphabet_size),
            'left': format_number(self.left if self.exact else to_mpf(self.left)),
            'right': format_number(self.right if self.exact else to_mpf(self.right)),
            'length': format_number(self.length if self.exact else to_mpf(self.length)),
            'generation': self.generation,
        }


class ExpansionSystem:
    """Common interface of every expansion system"""

    alphabet_size: int = 2
    initial_state: int = 0
    distortion_bound: Fraction = Fraction(1)
    name: str = 'system'

    # automaton
    def step(self, state: int, digit: int) -> Optional[int]:
        raise NotImplementedError

    def states(self) -> List[int]:
        raise NotImplementedError

    def is_full_state(self, state: int) -> bool:
        return True

    def digit_ratio(self, state: int, digit: int) -> Any:
        """|C_wd| / |C_w| for a word w ending in the given state"""
        raise NotImplementedError

    def branch_weight(self, state: int, digit: int, s: Fraction) -> Any:
        return power(self.digit_ratio(state, digit), s)

    def word_state(self, word: Any) -> Optional[int]:
        state = self.initial_state
        for digit in _digits(word):
            if not 0 <= digit < self.alphabet_size:
                return None
            state = self.step(state, digit)
            if state is None:
                return None
        return state

    def is_admissible(self, word: Any) -> bool:
        return self.word_state(word) is not None

    def require_admissible(self, word: Any) -> Digits:
        digits = _digits(word)
        if not self.is_admissible(digits):
            raise AdmissibilityError(
                f"word {word_text(digits, self.alphabet_size)} is not admissible for {self.name}",
                word=digits,
            )
        return digits

    # geometry
    def expand(self, x: Any, n: int) -> Digits:
        raise NotImplementedError

    def synthesize(self, digits: Any) -> Any:
        raise NotImplementedError

    def cylinder(self, word: Any) -> Cylinder:
        raise NotImplementedError

    # length arithmetic
    def zero_length(self) -> Any:
        return Fraction(0)

    def unit_length(self) -> Any:
        return Fraction(1)

    def compare(self, a: Any, b: Any) -> int:
        a, b = as_fraction(a), as_fraction(b)
        return (a > b) - (a < b)

    def image_length(self, state: int) -> Any:
        """Length of the image f^n(C) of a cylinder ending in this state"""
        return Fraction(1)

    def pull_back(self, value: Any, state: int, digit: int) -> Any:
        """Measure in the child's image coordinates, seen in the parent's image coordinates"""
        raise NotImplementedError

    def image_to_absolute(self, value: Any, cylinder: Cylinder) -> Any:
        """Measure in a cylinder's image coordinates, as Lebesgue measure inside the cylinder"""
        raise NotImplementedError

    def describe(self) -> Dict[str, Any]:
        raise NotImplementedError


class PiecewiseLinearMap(ExpansionSystem):
    """Increasing full-branch affine map with rational branch lengths"""

    def __init__(self, branch_lengths: Sequence[Any], name: Optional[str] = None):
        lengths = tuple(as_fraction(length) for length in branch_lengths)
        if len(lengths) < 2:
            raise InputError("a piecewise-linear map needs at least two branches")
        if any(length <= 0 for length in lengths):
            raise InputError("branch lengths must be positive")
        if sum(lengths) != 1:
            raise InputError(f"branch lengths must sum to 1, got {sum(lengths)}")
        self.branch_lengths = lengths
        self.alphabet_size = len(lengths)
        self.endpoints = tuple(itertools.accumulate((Fraction(0),) + lengths))
        self.name = name or f"linear{list(map(str, lengths))}"

    def step(self, state: int, digit: int) -> Optional[int]:
        return 0 if 0 <= digit < self.alphabet_size else None

    def states(self) -> List[int]:
        return [0]

    def digit_ratio(self, state: int, digit: int) -> Fraction:
        return self.branch_lengths[digit]

    def pull_back(self, value: Fraction, state: int, digit: int) -> Fraction:
        return value * self.branch_lengths[digit]

    def image_to_absolute(self, value: Fraction, cylinder: Cylinder) -> Fraction:
        return value * cylinder.length

    def expand(self, x: Any, n: int) -> Digits:
        x = as_fraction(x)
        if not 0 <= x < 1:
            raise InputError(f"x must lie in [0, 1), got {x}")
        if n < 1:
            raise InputError("n must be at least 1")
        digits = []
        for _ in range(n):
            digit = bisect.bisect_right(self.endpoints, x) - 1
            digits.append(digit)
            x = (x - self.endpoints[digit]) / self.branch_lengths[digit]
        return tuple(digits)

    def synthesize(self, digits: Any) -> Fraction:
        digits = self.require_admissible(digits)
        left, scale = Fraction(0), Fraction(1)
        for digit in digits:
            left += scale * self.endpoints[digit]
            scale *= self.branch_lengths[digit]
        return left

    def cylinder(self, word: Any) -> Cylinder:
        digits = self.require_admissible(word)
        left, scale = Fraction(0), Fraction(1)
        for digit in digits:
            left += scale * self.endpoints[digit]
            scale *= self.branch_lengths[digit]
        return Cylinder(self, digits, left, left + scale)

    def describe(self) -> Dict[str, Any]:
        return {'type': 'linear', 'branches': [format_number(length) for length in self.branch_lengths]}


@dataclass
class BetaOneResult:
    """Greedy digits of 1 and whether the orbit reached 0"""
    digits: Digits
    terminated: bool
    certified: bool = True

    @property
    def k(self) -> int:
        return len(self.digits)


def _greedy_digit(field_: BetaField, y: BetaNumber, index: int) -> Tuple[int, bool]:
    """floor(y) and whether it was decided with certainty"""
    try:
        return field_.floor(y, index=index), True
    except PrecisionError:
        if field_.exact:
            raise
        nearest = int(mpmath.nint(field_.to_mpf(y)))
        if field_.is_negligible(y - nearest):
            return nearest, False
        raise


def beta_expansion_of_one(field_: BetaField, max_k: int = settings.MAX_K) -> BetaOneResult:
    """Greedy expansion of 1 in base beta, stopping when the orbit hits 0"""
    if max_k < 1:
        raise InputError("max_k must be at least 1")
    remainder = field_.one
    digits = []
    certified = True
    for index in range(max_k):
        y = field_.mul_beta(remainder)
        digit, decided = _greedy_digit(field_, y, index)
        certified = certified and decided
        digits.append(digit)
        remainder = y - digit
        if not decided:
            return BetaOneResult(tuple(digits), terminated=True, certified=False)
        if field_.is_zero(remainder):
            return BetaOneResult(tuple(digits), terminated=True, certified=certified)
        if not field_.exact and field_.is_negligible(remainder):
            return BetaOneResult(tuple(digits), terminated=True, certified=False)
    return BetaOneResult(tuple(digits), terminated=False, certified=certified)


def forbidden_words(d1: Sequence[int], k: int) -> Set[Digits]:
    """Binary words of length k that are lexicographically >= d1"""
    d1 = tuple(d1)
    if len(d1) != k or k < 1:
        raise InputError(f"d1 must have length k={k}")
    if any(d not in (0, 1) for d in d1):
        raise InputError("d1 must be a binary word")
    return {word for word in itertools.product((0, 1), repeat=k) if word >= d1}


def parry_admissible(word: Sequence[int], d1: Sequence[int]) -> bool:
    """Lexicographic test: every suffix of word*0^inf is below d1*0^inf"""
    word, d1 = tuple(word), tuple(d1)
    for start in range(len(word)):
        suffix = word[start:]
        width = max(len(suffix), len(d1))
        padded_suffix = suffix + (0,) * (width - len(suffix))
        padded_d1 = d1 + (0,) * (width - len(d1))
        if not padded_suffix < padded_d1:
            return False
    return True


class BetaSystem(ExpansionSystem):
    """Greedy beta-expansion with a terminating expansion of 1"""

    def __init__(self, field_: BetaField, max_k: int = settings.MAX_K, name: Optional[str] = None):
        self.field = field_
        self.alphabet_size = 2
        self.name = name or 'beta'
        one = beta_expansion_of_one(field_, max_k)
        if not one.terminated:
            raise NonTerminatingError(
                f"expansion of 1 did not terminate within {max_k} digits", digits=one.digits
            )
        self.expansion_of_one = one
        self.d1 = one.digits
        self.k = one.k
        self.certified = one.certified
        self.forbidden = forbidden_words(self.d1, self.k)

        images = [field_.one]
        for digit in self.d1[:-1]:
            images.append(field_.mul_beta(images[-1]) - digit)
        self.images = tuple(images)
        self.beta_value = field_.value()
        self._image_values = tuple(to_mpf(t) for t in self.images)
        self._ratios: Dict[Tuple[int, int], mpmath.mpf] = {}
        for state in range(self.k):
            for digit in (0, 1):
                target = self.step(state, digit)
                if target is not None:
                    self._ratios[(state, digit)] = (
                        self._image_values[target] / (self.beta_value * self._image_values[state])
                    )
        logger.info(
            f"beta system {self.name}: d1={word_text(self.d1, 2)}, k={self.k}, "
            f"certified={self.certified}"
        )

    # automaton over image indices
    def step(self, state: int, digit: int) -> Optional[int]:
        expected = self.d1[state]
        if digit < expected:
            return 0
        if digit > expected or state + 1 == self.k:
            return None
        return state + 1

    def states(self) -> List[int]:
        return list(range(self.k))

    def is_full_state(self, state: int) -> bool:
        return state == 0

    def digit_ratio(self, state: int, digit: int) -> mpmath.mpf:
        return self._ratios[(state, digit)]

    def zero_length(self) -> BetaNumber:
        return self.field.zero

    def unit_length(self) -> BetaNumber:
        return self.field.one

    def compare(self, a: Any, b: Any) -> int:
        return self.field.compare(a, b)

    def image_length(self, state: int) -> BetaNumber:
        return self.images[state]

    def pull_back(self, value: BetaNumber, state: int, digit: int) -> BetaNumber:
        return self.field.div_beta(self.field.coerce(value))

    def image_to_absolute(self, value: BetaNumber, cylinder: Cylinder) -> BetaNumber:
        return self.field.coerce(value).over_beta(cylinder.generation)

    def is_admissible(self, word: Any) -> bool:
        digits = _digits(word)
        if any(d not in (0, 1) for d in digits):
            return False
        padded = digits + (0,) * (self.k - 1)
        for start in range(len(padded) - self.k + 1):
            if padded[start:start + self.k] in self.forbidden:
                return False
        return True

    def image_tracking(self, word: Any) -> Optional[BetaNumber]:
        """Right end T of the image [0, T) of the cylinder, by direct exact iteration"""
        image = self.field.one
        for index, digit in enumerate(_digits(word)):
            image = self.field.mul_beta(image) - digit
            if self.field.sign(image, index=index) <= 0:
                return None
            if self.field.compare(image, 1, index=index) >= 0:
                image = self.field.one
        return image

    def expand(self, x: Any, n: int) -> Digits:
        x = as_fraction(x)
        if not 0 <= x < 1:
            raise InputError(f"x must lie in [0, 1), got {x}")
        if n < 1:
            raise InputError("n must be at least 1")
        point = self.field.rational(x)
        digits = []
        for index in range(n):
            y = self.field.mul_beta(point)
            digit = self.field.floor(y, index=index)
            digits.append(digit)
            point = y - digit
        return tuple(digits)

    def synthesize(self, digits: Any) -> BetaNumber:
        """sum of d_i / beta^(i+1)"""
        digits = self.require_admissible(digits)
        value = self.field.zero
        for digit in reversed(digits):
            value = self.field.div_beta(value + digit)
        return value

    def cylinder(self, word: Any) -> Cylinder:
        digits = self.require_admissible(word)
        state = self.word_state(digits)
        left = self.synthesize(digits)
        length = self.images[state].over_beta(len(digits))
        return Cylinder(self, digits, left, left + length)

    def is_full_cylinder(self, word: Any) -> bool:
        digits = self.require_admissible(word)
        return self.word_state(digits) == 0

    def maximal_zero_padding(self, word: Any) -> int:
        """Largest l with C_{w 0^l} = C_w"""
        state = self.word_state(self.require_admissible(word))
        padding = 0
        # appending 0 keeps the cylinder iff beta * T_state <= 1
        while self.d1[state] == 0 or (state == self.k - 1 and state != 0):
            state = self.step(state, 0)
            padding += 1
            if state == 0:
                break
        return padding

    def full_completion(self, word: Any, minimal: bool = False) -> Digits:
        """w 0^(l+1), or with minimal=True the shortest zero extension that is full"""
        digits = self.require_admissible(word)
        if not minimal:
            return digits + (0,) * (self.maximal_zero_padding(digits) + 1)
        state = self.word_state(digits)
        completed = digits
        while state != 0:
            state = self.step(state, 0)
            completed += (0,)
        return completed

    def describe(self) -> Dict[str, Any]:
        payload = dict(self.field.describe())
        payload['d1'] = word_text(self.d1, 2)
        return payload


def enumerate_admissible(system: ExpansionSystem, n: int) -> Iterator[Digits]:
    """All admissible words of length n in lexicographic order"""
    if n < 1:
        raise InputError("n must be at least 1")

    def walk(prefix: Digits, state: int) -> Iterator[Digits]:
        if len(prefix) == n:
            yield prefix
            return
        for digit in range(system.alphabet_size):
            nxt = system.step(state, digit)
            if nxt is not None:
                yield from walk(prefix + (digit,), nxt)

    yield from walk((), system.initial_state)


def is_admissible(word: Any, system: ExpansionSystem) -> bool:
    return system.is_admissible(word)


def is_full_cylinder(word: Any, system: ExpansionSystem) -> bool:
    if isinstance(system, BetaSystem):
        return system.is_full_cylinder(word)
    system.require_admissible(word)
    return True


def full_completion(word: Any, system: ExpansionSystem, minimal: bool = False) -> Digits:
    if isinstance(system, BetaSystem):
        return system.full_completion(word, minimal=minimal)
    return system.require_admissible(word)


@dataclass
class RatioConstant:
    """Smallest child/parent cylinder length ratio found by enumeration"""
    r: Any
    depth: int
    nodes: int
    c_beta: Optional[mpmath.mpf] = None
    bound: Optional[Fraction] = None
    confirms: bool = True

    def to_dict(self) -> Dict[str, Any]:
        payload = {
            'r': format_number(self.r),
            'depth': self.depth,
            'nodes': self.nodes,
            'confirms': self.confirms,
        }
        if self.c_beta is not None:
            payload['c_beta'] = format_number(self.c_beta)
        if self.bound is not None:
            payload['bound'] = format_number(self.bound)
        return payload


def ratio_constant(system: ExpansionSystem, depth: int, budget: int = settings.ENUMERATION_BUDGET) -> RatioConstant:
    """Enumerate admissible cylinders to the given generation and measure the worst shrink"""
    if depth < 1:
        raise InputError("depth must be at least 1")
    frontier = [system.initial_state]
    nodes = 0
    smallest = None
    for level in range(depth):
        next_frontier = []
        for state in frontier:
            for digit in range(system.alphabet_size):
                child = system.step(state, digit)
                if child is None:
                    continue
                nodes += 1
                if nodes > budget:
                    raise ResourceError(
                        f"ratio enumeration exceeded {budget} nodes",
                        diagnostics={'depth_reached': level, 'nodes': nodes},
                    )
                ratio = system.digit_ratio(state, digit)
                if smallest is None or ratio < smallest:
                    smallest = ratio
                next_frontier.append(child)
        frontier = next_frontier

    if isinstance(system, BetaSystem):
        c_beta = 1 / (system.beta_value * to_mpf(smallest))
        logger.info(f"ratio constant for {system.name}: r={mpmath.nstr(smallest, 12)}, C_beta={mpmath.nstr(c_beta, 12)}")
        return RatioConstant(r=smallest, depth=depth, nodes=nodes, c_beta=c_beta)

    lengths = system.branch_lengths
    imbalance = max(lengths) / min(lengths)
    bound = 1 / (system.alphabet_size * system.distortion_bound)
    return RatioConstant(
        r=smallest, depth=depth, nodes=nodes, bound=bound,
        confirms=smallest >= bound / imbalance,
    )


def base(g: int) -> PiecewiseLinearMap:
    """The base-g full shift x -> g x mod 1"""
    return PiecewiseLinearMap([Fraction(1, g)] * g, name=f"base-{g}")


def golden() -> BetaSystem:
    return BetaSystem(AlgebraicBeta([1, -1, -1], ['3/2', '17/10']), name='golden')


def tribonacci() -> BetaSystem:
    return BetaSystem(AlgebraicBeta([1, -1, -1, -1], ['9/5', '19/10']), name='tribonacci')


def build_field(spec: Dict[str, Any]) -> BetaField:
    """Base arithmetic from a beta system description"""
    if spec.get('polynomial') is not None:
        return AlgebraicBeta(spec['polynomial'], spec['isolating'])
    if spec.get('value') is not None:
        return ApproximateBeta(spec['value'], spec.get('precision_bits') or settings.PRECISION_BITS)
    raise InputError("beta system needs either polynomial+isolating or value")


def build_system(spec: Dict[str, Any], max_k: int = settings.MAX_K) -> ExpansionSystem:
    """System from its JSON description"""
    kind = spec.get('type')
    if kind == 'linear':
        return PiecewiseLinearMap(spec['branches'], name=spec.get('name'))
    if kind == 'beta':
        return BetaSystem(build_field(spec), max_k=max_k, name=spec.get('name'))
    raise InputError(f"unknown system type {kind!r}")


PRESETS = {
    'base-2': lambda: base(2),
    'base-3': lambda: base(3),
    'base-10': lambda: base(10),
    'golden': golden,
    'tribonacci': tribonacci,
}


def preset(name: str) -> ExpansionSystem:
    if name not in PRESETS:
        raise InputError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return PRESETS[name]()
