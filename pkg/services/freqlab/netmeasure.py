#!/usr/bin/env python3
"""
Net Measures

Cover measures of cylinder unions at exponent s in (0, 1]:

- N^s: the least sum of |C|^s over covers by cylinders, computed exactly by
  a bottom-up pass over the cylinder tree.
- M^s: the same over covers by dyadic intervals, bracketed by lower and
  upper bounds from a pass over the dyadic tree down to a depth cap.

Plus the comparison check between the two and the scan of M^s(F ∩ I) / |I|^s
over dyadic windows I.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, List, Optional, Tuple, Union

import mpmath

import settings
from errors import CheckReport, CheckStatus, InputError
from expansions import BetaSystem, Digits, ExpansionSystem, ratio_constant
from freqsets import CylinderUnion, FreqSetUnion, Key, RestrictedUnion
from numeric import as_fraction, format_number, power, to_mpf, validate_exponent

logger = logging.getLogger(__name__)

Target = Union[CylinderUnion, FreqSetUnion, RestrictedUnion]


@dataclass(frozen=True)
class DyadicInterval:
    """[2^scale * index, 2^scale * (index + 1))"""
    scale: int
    index: int

    @classmethod
    def unit(cls) -> 'DyadicInterval':
        return cls(0, 0)

    @property
    def depth(self) -> int:
        return -self.scale

    @property
    def length(self) -> Fraction:
        return Fraction(2) ** self.scale

    @property
    def left(self) -> Fraction:
        return self.length * self.index

    @property
    def right(self) -> Fraction:
        return self.length * (self.index + 1)

    def children(self) -> Tuple['DyadicInterval', 'DyadicInterval']:
        return (
            DyadicInterval(self.scale - 1, 2 * self.index),
            DyadicInterval(self.scale - 1, 2 * self.index + 1),
        )

    def parent(self) -> 'DyadicInterval':
        return DyadicInterval(self.scale + 1, self.index // 2)

    def to_dict(self) -> Dict[str, Any]:
        return {'scale': self.scale, 'index': self.index}


@dataclass
class MeasureBound:
    """Certified bracket lower <= measure <= upper and a cover attaining upper"""
    s: Fraction
    lower: Any
    upper: Any
    witness_cover: List[Any] = field(default_factory=list)
    partial_leaves: int = 0

    @property
    def exact(self) -> bool:
        return self.partial_leaves == 0

    @property
    def value(self) -> Any:
        return self.upper

    def to_dict(self) -> Dict[str, Any]:
        cover = []
        for item in self.witness_cover:
            if isinstance(item, DyadicInterval):
                cover.append(item.to_dict())
            else:
                cover.append(''.join(str(d) for d in item) if all(d < 10 for d in item) else list(item))
        return {
            's': format_number(self.s),
            'lower': format_number(self.lower),
            'upper': format_number(self.upper),
            'exact': self.exact,
            'partial_leaves': self.partial_leaves,
            'witness_cover': cover,
        }


def _exact_mode(system: ExpansionSystem, s: Fraction) -> bool:
    return s == 1 and not isinstance(system, BetaSystem)


def _normalizer(exact: bool):
    if exact:
        return lambda value: value
    return to_mpf


# cylinder covers

def _trie_measure(
    union: CylinderUnion,
    s: Fraction,
    record: Optional[Dict[Digits, Tuple[Any, Any]]] = None,
    record_depth: int = -1,
) -> Tuple[Any, List[Digits]]:
    system = union.system
    norm = _normalizer(_exact_mode(system, s))
    members = union.members
    n = union.generation

    def solve(lo: int, hi: int, depth: int, state: int, length: Any) -> Tuple[Any, List[Digits]]:
        prefix = members[lo][:depth]
        own = norm(power(length, s))
        if depth == n:
            result = (own, [prefix])
        else:
            total, cover = None, []
            start = lo
            while start < hi:
                digit = members[start][depth]
                stop = start
                while stop < hi and members[stop][depth] == digit:
                    stop += 1
                child_length = length * system.digit_ratio(state, digit)
                value, child_cover = solve(start, stop, depth + 1, system.step(state, digit), child_length)
                total = value if total is None else total + value
                cover.extend(child_cover)
                start = stop
            # ties keep the coarser cover
            if own <= total:
                result = (own, [prefix])
            else:
                result = (total, cover)
        if record is not None and depth <= record_depth:
            record[prefix] = (result[0], own)
        return result

    if not members:
        return norm(Fraction(0)), []
    unit = to_mpf(1) if isinstance(system, BetaSystem) else Fraction(1)
    return solve(0, len(members), 0, system.initial_state, unit)


class StateCoverValues:
    """Memoized V(key) = min(1, sum over children of ratio^s * V(child)) for an implicit union"""

    def __init__(self, union: FreqSetUnion, s: Fraction):
        self.union = union
        self.s = s
        self.system = union.system
        self.norm = _normalizer(_exact_mode(union.system, s))
        self._values: Dict[Key, Tuple[Any, bool]] = {}

    def value(self, key: Key) -> Any:
        return self._solve(key)[0]

    def _solve(self, key: Key) -> Tuple[Any, bool]:
        if key in self._values:
            return self._values[key]
        one = self.norm(Fraction(1))
        if key[0] == self.union.generation:
            result = (one, True)
        else:
            state = key[1]
            total = self.norm(Fraction(0))
            for digit, child in self.union.children(key):
                child_value = self._solve(child)[0]
                if child_value:
                    total = total + self.norm(self.system.branch_weight(state, digit, self.s)) * child_value
            result = (one, True) if one <= total else (total, False)
        self._values[key] = result
        return result

    def root_value(self) -> Any:
        root = self.union.root()
        if root is None:
            return self.norm(Fraction(0))
        return self.value(root)

    def witness(self) -> List[Digits]:
        root = self.union.root()
        if root is None or not self.value(root):
            return []
        cover = []
        stack = [((), root)]
        while stack:
            prefix, key = stack.pop()
            value, take_parent = self._solve(key)
            if not value:
                continue
            if take_parent:
                cover.append(prefix)
                continue
            for digit, child in reversed(self.union.children(key)):
                stack.append((prefix + (digit,), child))
        return cover

    def items(self, max_depth: int) -> List[Tuple[Key, Any]]:
        """Computed keys up to a depth with positive value"""
        return [(key, result[0]) for key, result in self._values.items() if key[0] <= max_depth and result[0]]


def cylinder_net_measure(union: Any, s: Any, with_witness: bool = True) -> MeasureBound:
    """N^s of the union: the least sum of |C|^s over cylinder covers"""
    s = validate_exponent(s)
    if isinstance(union, FreqSetUnion):
        values = StateCoverValues(union, s)
        value = values.root_value()
        cover = values.witness() if with_witness else []
    elif isinstance(union, CylinderUnion):
        value, cover = _trie_measure(union, s)
    else:
        raise InputError(f"cylinder net measure needs a cylinder union, got {type(union).__name__}")
    logger.debug(f"N^{format_number(s)} = {format_number(value)} with {len(cover)} cover cylinders")
    return MeasureBound(s=s, lower=value, upper=value, witness_cover=cover if with_witness else [])


# dyadic covers

@dataclass
class _DyadicNode:
    status: str
    lower: Any
    upper: Any


def _dyadic_pass(
    target: Target,
    s: Fraction,
    depth_cap: int,
    root: DyadicInterval,
    record: Optional[Dict[DyadicInterval, _DyadicNode]] = None,
    record_depth: int = -1,
) -> Tuple[Any, Any, List[DyadicInterval], int]:
    system = target.system
    compare = system.compare
    norm = _normalizer(_exact_mode(system, s))
    zero = norm(Fraction(0))
    partial = 0

    def solve(node: DyadicInterval) -> Tuple[Any, Any, List[DyadicInterval]]:
        nonlocal partial
        covered = target.overlap(node.left, node.right)
        own = norm(power(node.length, s))
        if compare(covered, 0) <= 0:
            status, result = 'empty', (zero, zero, [])
        elif compare(covered, node.length) >= 0:
            status, result = 'full', (own, own, [node])
        elif node.depth >= depth_cap:
            partial += 1
            # s <= 1 gives sum |I_i|^s >= lambda(F ∩ leaf)^s for any cover
            status, result = 'partial', (norm(power(covered, s)), own, [node])
        else:
            left, right = node.children()
            lo_l, up_l, cover_l = solve(left)
            lo_r, up_r, cover_r = solve(right)
            lower = min(own, lo_l + lo_r)
            if own <= up_l + up_r:
                status, result = 'partial', (lower, own, [node])
            else:
                status, result = 'partial', (lower, up_l + up_r, cover_l + cover_r)
        if record is not None and node.depth <= record_depth:
            record[node] = _DyadicNode(status, result[0], result[1])
        return result

    lower, upper, cover = solve(root)
    return lower, upper, cover, partial


def dyadic_outer_measure(
    target: Target,
    s: Any,
    depth_cap: int,
    root: Optional[DyadicInterval] = None,
) -> MeasureBound:
    """Bracket M^s of the target (inside root, default [0, 1)) with dyadic covers"""
    s = validate_exponent(s)
    if depth_cap < 0:
        raise InputError("depth_cap must be non-negative")
    root = root or DyadicInterval.unit()
    if root.scale > 0:
        # scales above the unit interval behave as [0, 1)
        root = DyadicInterval.unit()
    lower, upper, cover, partial = _dyadic_pass(target, s, depth_cap, root)
    logger.debug(
        f"M^{format_number(s)} in [{format_number(lower)}, {format_number(upper)}], "
        f"{partial} partial leaves at depth {depth_cap}"
    )
    return MeasureBound(s=s, lower=lower, upper=upper, witness_cover=cover, partial_leaves=partial)


def _tolerance(value: Any) -> Any:
    if isinstance(value, Fraction):
        return Fraction(0)
    return mpmath.mpf(2) ** (-(mpmath.mp.prec // 2))


def _ge(a: Any, b: Any, tolerance: Any) -> bool:
    if isinstance(a, Fraction) and isinstance(b, Fraction):
        return a >= b - tolerance
    return to_mpf(a) >= to_mpf(b) - to_mpf(tolerance)


def comparison_constants(system: ExpansionSystem, c_beta: Optional[Any] = None) -> Dict[str, Any]:
    """Constants D with M^s >= N^s / D"""
    if isinstance(system, BetaSystem):
        if c_beta is None:
            c_beta = ratio_constant(system, depth=12).c_beta
        c_beta = to_mpf(c_beta)
        beta = system.beta_value
        proof = 2 * beta * c_beta
        display = 2 * beta * c_beta ** 2
        return {'c_beta': c_beta, 'proof': proof, 'display': display, 'used': max(proof, display)}
    constant = 2 * system.alphabet_size * system.distortion_bound
    return {'used': constant}


def measure_comparison_check(
    union: CylinderUnion,
    s: Any,
    depth_cap: int = 48,
    c_beta: Optional[Any] = None,
) -> CheckReport:
    """Check lower(M^s) >= N^s / D and lower <= upper"""
    s = validate_exponent(s)
    net = cylinder_net_measure(union, s, with_witness=False)
    dyadic = dyadic_outer_measure(union, s, depth_cap)
    constants = comparison_constants(union.system, c_beta)
    constant = constants['used']
    if isinstance(net.value, Fraction) and isinstance(constant, Fraction):
        required = net.value / constant
    else:
        required = to_mpf(net.value) / to_mpf(constant)
    tolerance = _tolerance(dyadic.lower)

    errors = []
    if not _ge(dyadic.upper, dyadic.lower, tolerance):
        errors.append(f"dyadic bracket inverted: {format_number(dyadic.lower)} > {format_number(dyadic.upper)}")
    if not _ge(dyadic.lower, required, tolerance):
        errors.append(
            f"lower(M^s) = {format_number(dyadic.lower)} below N^s/D = {format_number(required)}"
        )
    ratio = to_mpf(dyadic.lower) / to_mpf(net.value) if net.value else None
    values = {
        's': s,
        'net_measure': net.value,
        'dyadic_lower': dyadic.lower,
        'dyadic_upper': dyadic.upper,
        'required': required,
        'ratio': ratio,
    }
    values.update({f"constant_{name}": value for name, value in constants.items()})
    report = CheckReport(
        name='measure_comparison',
        status=CheckStatus.FAIL if errors else CheckStatus.PASS,
        values=values,
        errors=errors,
    )
    if not dyadic.exact:
        report.warnings.append(f"{dyadic.partial_leaves} partial leaves at depth {depth_cap}")
    return report


# Falconer scan

@dataclass
class ScanRow:
    scale: int
    index: int
    ratio_lower: Any
    meets: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            'scale': self.scale,
            'index': self.index,
            'ratio_lower': format_number(self.ratio_lower) if self.meets else '',
            'meets': self.meets,
        }


@dataclass
class FalconerScan:
    """Minimum of lower(M^s(F ∩ I)) / |I|^s over dyadic I meeting F"""
    s: Fraction
    max_depth: int
    depth_cap: int
    c_min: Any
    argmin: Optional[DyadicInterval]
    rows: List[ScanRow]
    empty_intervals: List[DyadicInterval]
    cylinder_c_min: Any = None
    cylinder_argmin: Optional[Digits] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            's': format_number(self.s),
            'max_depth': self.max_depth,
            'depth_cap': self.depth_cap,
            'c_min': format_number(self.c_min) if self.c_min is not None else None,
            'argmin': self.argmin.to_dict() if self.argmin else None,
            'empty_intervals': len(self.empty_intervals),
            'cylinder_c_min': format_number(self.cylinder_c_min) if self.cylinder_c_min is not None else None,
            'cylinder_argmin': ''.join(map(str, self.cylinder_argmin)) if self.cylinder_argmin is not None else None,
        }

    def csv_rows(self) -> List[Dict[str, Any]]:
        return [
            {'scale': row.scale, 'index': row.index, 'ratio_lower': row.to_dict()['ratio_lower']}
            for row in self.rows
        ]

    def check(self, c_required: Any = 0) -> CheckReport:
        """c_min over intervals meeting F must exceed c_required"""
        c_required = as_fraction(c_required)
        report = CheckReport(
            name='falconer_condition',
            status=CheckStatus.PASS,
            values={'s': self.s, 'c_min': self.c_min, 'c_required': c_required, 'max_depth': self.max_depth},
        )
        if self.c_min is None:
            report.status = CheckStatus.INCONCLUSIVE
            report.warnings.append("no dyadic interval meets the set")
        elif not to_mpf(self.c_min) > to_mpf(c_required):
            report.status = CheckStatus.FAIL
            report.errors.append(
                f"c_min {format_number(self.c_min)} at {self.argmin.scale},{self.argmin.index} "
                f"is not above {format_number(c_required)}"
            )
        if self.empty_intervals:
            report.warnings.append(f"{len(self.empty_intervals)} dyadic intervals miss the set")
        return report


def _ratio(value: Any, weight: Any) -> Any:
    if isinstance(value, Fraction) and isinstance(weight, Fraction):
        return value / weight
    return to_mpf(value) / to_mpf(weight)


def _cylinder_column(target: Target, s: Fraction, max_depth: int) -> Tuple[Any, Optional[Digits]]:
    if isinstance(target, CylinderUnion):
        record: Dict[Digits, Tuple[Any, Any]] = {}
        _trie_measure(target, s, record=record, record_depth=max_depth)
        best, best_word = None, None
        for word in sorted(record):
            value, weight = record[word]
            ratio = _ratio(value, weight)
            if best is None or ratio < best:
                best, best_word = ratio, word
        return best, best_word
    if isinstance(target, FreqSetUnion):
        values = StateCoverValues(target, s)
        values.root_value()
        best = None
        for _, value in values.items(max_depth):
            if best is None or value < best:
                best = value
        return best, None
    return None, None


def falconer_condition_scan(
    target: Target,
    s: Any,
    max_depth: int,
    depth_cap: Optional[int] = None,
) -> FalconerScan:
    """Scan every dyadic I of depth <= max_depth for the ratio lower(M^s(F ∩ I)) / |I|^s"""
    s = validate_exponent(s)
    if max_depth < 0:
        raise InputError("max_depth must be non-negative")
    depth_cap = max_depth + settings.SCAN_EXTRA_DEPTH if depth_cap is None else depth_cap
    if depth_cap < max_depth:
        raise InputError("depth_cap must be at least max_depth")

    record: Dict[DyadicInterval, _DyadicNode] = {}
    _dyadic_pass(target, s, depth_cap, DyadicInterval.unit(), record=record, record_depth=max_depth)

    rows, empty = [], []
    c_min, argmin = None, None
    for depth in range(max_depth + 1):
        for index in range(2 ** depth):
            node = DyadicInterval(-depth, index)
            ancestor = node
            while ancestor not in record:
                ancestor = ancestor.parent()
            entry = record[ancestor]
            if entry.status == 'empty':
                rows.append(ScanRow(node.scale, node.index, None, False))
                empty.append(node)
                continue
            if entry.status == 'full':
                ratio = Fraction(1) if _exact_mode(target.system, s) else to_mpf(1)
            else:
                ratio = _ratio(entry.lower, power(node.length, s))
            rows.append(ScanRow(node.scale, node.index, ratio, True))
            if c_min is None or ratio < c_min:
                c_min, argmin = ratio, node

    cylinder_c_min, cylinder_argmin = _cylinder_column(target, s, max_depth)
    logger.info(
        f"falconer scan s={format_number(s)} depth<={max_depth}: c_min={format_number(c_min) if c_min is not None else 'n/a'}, "
        f"{len(empty)} empty intervals"
    )
    return FalconerScan(
        s=s, max_depth=max_depth, depth_cap=depth_cap, c_min=c_min, argmin=argmin,
        rows=rows, empty_intervals=empty,
        cylinder_c_min=cylinder_c_min, cylinder_argmin=cylinder_argmin,
    )
