#!/usr/bin/env python3
"""
freqlab Command Line

Single entry point for every lab operation. Each subcommand collects its
arguments into a parameter dict and hands it to the same operation table
that experiment manifests use, so a CLI call and a manifest run produce
identical output bytes.

Exit codes: 0 success, 1 property violation, 2 usage or schema error,
3 resource budget exhausted, 4 precision or non-termination failure.
"""

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import mpmath
import numpy as np
import orjson
from pydantic import ValidationError

import settings
from dimension import (
    TAIL_RULES,
    IntersectionSpec,
    condition_ii_scan,
    cylinder_scaling_check,
    entropy_dimension_oracle,
    estimate_critical_exponent,
    intersection_experiment,
    oscillation_witness,
    q_constant,
    reference_frequencies,
)
from errors import (
    AdmissibilityError,
    CheckReport,
    FreqLabError,
    InputError,
    NonTerminatingError,
    PrecisionError,
    ResourceError,
)
from expansions import (
    PRESETS,
    BetaSystem,
    ExpansionSystem,
    beta_expansion_of_one,
    build_field,
    build_system,
    full_completion,
    is_full_cylinder,
    parry_admissible,
    preset,
    ratio_constant,
)
from freqsets import CylinderUnion, FreqSetSpec, FreqSetUnion, build_freqset, membership, random_union
from logging_setup import configure_logging
from models import ExperimentManifest, parse_system_spec, validation_messages
from netmeasure import cylinder_net_measure, dyadic_outer_measure, falconer_condition_scan, measure_comparison_check
from numeric import as_fraction, format_number, number_payload, parse_number_list, set_precision
from symbolic import FrequencyVector, Word, word_text

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_PRECISION = 4

JSON_OPTIONS = orjson.OPT_SORT_KEYS | orjson.OPT_INDENT_2


@dataclass
class CommandResult:
    """Payload of one operation plus optional CSV rows"""
    payload: Dict[str, Any]
    rows: Optional[List[Dict[str, Any]]] = None
    reports: List[CheckReport] = field(default_factory=list)

    @property
    def violation(self) -> bool:
        return any(report.is_violation for report in self.reports)


def jsonable(value: Any) -> Any:
    """Recursively convert results into JSON-ready values with numbers as strings"""
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, (Fraction, mpmath.mpf, float)):
        return format_number(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {str(key): jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(item) for item in value]
    if isinstance(value, CheckReport):
        return {
            'name': value.name,
            'status': value.status.value,
            'values': jsonable(value.values),
            'errors': list(value.errors),
            'warnings': list(value.warnings),
        }
    if hasattr(value, 'to_dict'):
        return jsonable(value.to_dict())
    return format_number(value)


def render_json(payload: Dict[str, Any]) -> bytes:
    return orjson.dumps(jsonable(payload), option=JSON_OPTIONS) + b'\n'


def render_csv(rows: List[Dict[str, Any]]) -> bytes:
    """RFC 4180 CSV with a header row"""
    buffer = io.StringIO(newline='')
    if rows:
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0]), quoting=csv.QUOTE_MINIMAL, lineterminator='\r\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: jsonable(value) for key, value in row.items()})
    return buffer.getvalue().encode('utf-8')


class OperationContext:
    """Named systems, the seeded generator and worker count shared by one run"""

    def __init__(self, systems: Optional[Dict[str, Any]] = None, seed: int = settings.DEFAULT_SEED, threads: int = 1):
        self.system_specs = dict(systems or {})
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.threads = threads
        self._systems: Dict[str, ExpansionSystem] = {}

    def _spec_for(self, reference: str) -> Any:
        if reference in self.system_specs:
            return self.system_specs[reference]
        if reference in PRESETS:
            return reference
        if os.path.exists(reference):
            with open(reference, 'rb') as handle:
                return parse_system_spec(orjson.loads(handle.read()))
        raise InputError(f"unknown system {reference!r}: not a manifest system, preset or file")

    def system(self, reference: str) -> ExpansionSystem:
        if reference not in self._systems:
            spec = self._spec_for(reference)
            if isinstance(spec, str):
                self._systems[reference] = preset(spec)
            else:
                self._systems[reference] = build_system(_plain(spec))
        return self._systems[reference]

    def beta_field(self, reference: str):
        spec = self._spec_for(reference)
        if isinstance(spec, str):
            system = preset(spec)
            if not isinstance(system, BetaSystem):
                raise InputError(f"{reference} is not a beta system")
            return system.field
        spec = _plain(spec)
        if spec.get('type') != 'beta':
            raise InputError(f"{reference} is not a beta system")
        return build_field(spec)


def _plain(spec: Any) -> Dict[str, Any]:
    return spec.model_dump() if hasattr(spec, 'model_dump') else dict(spec)


# parameter helpers

def _require(params: Dict[str, Any], name: str) -> Any:
    if params.get(name) is None:
        raise InputError(f"missing parameter {name!r}")
    return params[name]


def _numbers(value: Any) -> List[Fraction]:
    if isinstance(value, str):
        return parse_number_list(value)
    return [as_fraction(item) for item in value]


def _word(system: ExpansionSystem, value: Any) -> tuple:
    if isinstance(value, str):
        return Word.parse(value, system.alphabet_size).digits
    return tuple(int(d) for d in value)


def _frequencies(system: ExpansionSystem, m: int, value: Any) -> FrequencyVector:
    if value == 'uniform':
        return reference_frequencies(system, m)
    return FrequencyVector.from_values(_numbers(value), m, system.alphabet_size)


def _freqset_spec(context: OperationContext, params: Dict[str, Any], n: Optional[int] = None) -> FreqSetSpec:
    system = context.system(_require(params, 'system'))
    m = int(params.get('m', 1))
    return FreqSetSpec(
        system=system, m=m,
        p=_frequencies(system, m, _require(params, 'p')),
        n=int(n if n is not None else _require(params, 'n')),
        eps=as_fraction(_require(params, 'eps')),
    )


def read_members(system: ExpansionSystem, path: str) -> CylinderUnion:
    """Cylinder union from a CSV with a 'word' column"""
    with open(path, newline='', encoding='utf-8') as handle:
        words = [Word.parse(row['word'], system.alphabet_size).digits for row in csv.DictReader(handle)]
    if not words:
        raise InputError(f"{path} lists no members")
    return CylinderUnion(system, len(words[0]), words)


def _union(context: OperationContext, params: Dict[str, Any]) -> Any:
    """Target set: a members file, a random union, or a frequency set (implicit unless materialized)"""
    system = context.system(_require(params, 'system'))
    if params.get('set'):
        return read_members(system, params['set'])
    if params.get('random_n'):
        return random_union(system, int(params['random_n']), context.rng, float(params.get('density', 0.5)))
    spec = _freqset_spec(context, params)
    if params.get('explicit'):
        return build_freqset(spec)
    return FreqSetUnion(spec)


# operations

def op_expand(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    digits = system.expand(as_fraction(_require(params, 'x')), int(_require(params, 'n')))
    return CommandResult({'digits': word_text(digits, system.alphabet_size)})


def op_synthesize(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    value = system.synthesize(_word(system, _require(params, 'word')))
    return CommandResult({'value': number_payload(value)})


def op_beta_one(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    field_ = context.beta_field(_require(params, 'system'))
    result = beta_expansion_of_one(field_, int(params.get('max_k', settings.MAX_K)))
    return CommandResult({
        'digits': word_text(result.digits, 2),
        'k': result.k,
        'terminated': result.terminated,
        'certified': result.certified,
    })


def op_admissible(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    word = _word(system, _require(params, 'word'))
    payload = {'word': word_text(word, system.alphabet_size), 'admissible': system.is_admissible(word)}
    if isinstance(system, BetaSystem):
        payload['parry'] = parry_admissible(word, system.d1)
        payload['forbidden'] = sorted(word_text(w, 2) for w in system.forbidden)
    return CommandResult(payload)


def op_cylinder(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    word = _word(system, _require(params, 'word'))
    payload = system.cylinder(word).to_dict()
    payload['full'] = is_full_cylinder(word, system)
    payload['full_completion'] = word_text(
        full_completion(word, system, minimal=bool(params.get('minimal', False))), system.alphabet_size
    )
    return CommandResult(payload)


def op_ratio(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    return CommandResult(ratio_constant(system, int(params.get('depth', 12))).to_dict())


def op_freqset(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    spec = _freqset_spec(context, params)
    if params.get('word') is not None or params.get('x') is not None:
        item = _word(spec.system, params['word']) if params.get('word') is not None else as_fraction(params['x'])
        return CommandResult({'spec': spec.to_dict(), 'member': membership(item, spec)})
    union = build_freqset(spec)
    return CommandResult({'spec': spec.to_dict(), 'count': union.count()}, rows=union.rows())


def op_measure(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    union = _union(context, params)
    s = as_fraction(_require(params, 's'))
    mode = params.get('mode', 'cylinder')
    if mode == 'cylinder':
        bound = cylinder_net_measure(union, s)
    elif mode == 'dyadic':
        bound = dyadic_outer_measure(union, s, int(params.get('depth', 20)))
    else:
        raise InputError(f"unknown measure mode {mode!r}")
    return CommandResult({'mode': mode, 'measure': bound.to_dict()})


def op_comparison(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    union = _union(context, params)
    if not isinstance(union, CylinderUnion):
        union = union.materialize()
    c_beta = as_fraction(params['c_beta']) if params.get('c_beta') is not None else None
    report = measure_comparison_check(union, as_fraction(_require(params, 's')), int(params.get('depth', 48)), c_beta)
    return CommandResult({'report': report}, reports=[report])


def op_scan(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    union = _union(context, params)
    depth_cap = params.get('depth_cap')
    scan = falconer_condition_scan(
        union, as_fraction(_require(params, 's')), int(params.get('max_depth', 6)),
        int(depth_cap) if depth_cap is not None else None,
    )
    report = scan.check(params.get('c_required') or 0)
    return CommandResult({'scan': scan.to_dict(), 'report': report}, rows=scan.csv_rows(), reports=[report])


def op_dimension_oracle(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    m = int(params.get('m', 1))
    result = entropy_dimension_oracle(system, m, _frequencies(system, m, _require(params, 'p')))
    return CommandResult({'oracle': result.to_dict()})


def _s_grid(params: Dict[str, Any]) -> List[Fraction]:
    if params.get('s_grid') is not None:
        return _numbers(params['s_grid'])
    step = as_fraction(params.get('s_step', '0.05'))
    count = int(1 / step)
    return [step * i for i in range(1, count + 1)]


def op_estimate(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    m = int(params.get('m', 1))
    schedule = [int(n) for n in _numbers(_require(params, 'n_schedule'))]
    estimate = estimate_critical_exponent(
        system, m, _frequencies(system, m, _require(params, 'p')), _require(params, 'eps'),
        schedule, _s_grid(params), threads=context.threads, rule=params.get('tail_rule', 'envelope'),
    )
    return CommandResult({'estimate': estimate.to_dict()}, rows=estimate.csv_rows())


def op_scaling(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    m = int(params.get('m', 1))
    words = params.get('words') or []
    if isinstance(words, str):
        words = [word for word in words.split(',') if word]
    report = cylinder_scaling_check(
        system, m, _frequencies(system, m, _require(params, 'p')), _require(params, 'eps'),
        as_fraction(_require(params, 's')), [_word(system, word) for word in words], int(_require(params, 'n')),
    )
    return CommandResult({'report': report}, reports=[report])


def op_q_constant(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    beta = params.get('beta', 'golden')
    if isinstance(beta, str) and not _is_number(beta):
        beta = context.system(beta)
    return CommandResult({'value': q_constant(as_fraction(_require(params, 's')), beta)})


def _is_number(text: str) -> bool:
    try:
        as_fraction(text)
        return True
    except InputError:
        return False


def op_witness(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    m = int(params.get('m', 1))
    targets = _require(params, 'targets')
    if isinstance(targets, str):
        targets = [part for part in targets.split(';') if part.strip()]
    vectors = [_frequencies(system, m, target) for target in targets]
    result = oscillation_witness(
        system, m, vectors, int(_require(params, 'horizon')),
        radius=as_fraction(params.get('radius', '0.02')),
    )
    rows = [
        {'checkpoint': n, **{f"f{i}": value for i, value in enumerate(point)}}
        for n, point in zip(result.report.checkpoints, result.report.trajectory)
    ]
    return CommandResult({'witness': result.to_dict()}, rows=rows)


def _intersection_specs(context: OperationContext, entries: Sequence[Any]) -> List[IntersectionSpec]:
    specs = []
    for entry in entries:
        if isinstance(entry, str):
            system_ref, m, p, eps, n = entry.split(';')
            entry = {'system': system_ref, 'm': m, 'p': p, 'eps': eps, 'n': n}
        system = context.system(_require(entry, 'system'))
        m = int(entry.get('m', 1))
        specs.append(IntersectionSpec(
            system=system, m=m, p=_frequencies(system, m, _require(entry, 'p')),
            eps=as_fraction(_require(entry, 'eps')), n=int(_require(entry, 'n')),
        ))
    return specs


def op_intersect(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    report = intersection_experiment(
        _intersection_specs(context, _require(params, 'specs')),
        s_margin=as_fraction(params.get('s_margin', '0.1')),
        depth=int(params.get('depth', 6)),
        depth_cap=int(params['depth_cap']) if params.get('depth_cap') is not None else None,
        c_required=params.get('c_required') or 0,
    )
    return CommandResult({'intersection': report.to_dict()}, reports=[report.check()])


def op_condition_ii(context: OperationContext, params: Dict[str, Any]) -> CommandResult:
    system = context.system(_require(params, 'system'))
    m = int(params.get('m', 1))
    rows = condition_ii_scan(
        system, m, _frequencies(system, m, _require(params, 'p')), _numbers(_require(params, 'deltas')),
    )
    return CommandResult({'rows': len(rows)}, rows=[row.to_dict() for row in rows])


OPERATIONS: Dict[str, Callable[[OperationContext, Dict[str, Any]], CommandResult]] = {
    'expand': op_expand,
    'synthesize': op_synthesize,
    'beta_one': op_beta_one,
    'admissible': op_admissible,
    'cylinder': op_cylinder,
    'ratio': op_ratio,
    'freqset': op_freqset,
    'measure': op_measure,
    'comparison': op_comparison,
    'scan': op_scan,
    'dimension_oracle': op_dimension_oracle,
    'estimate': op_estimate,
    'scaling': op_scaling,
    'q_constant': op_q_constant,
    'witness': op_witness,
    'intersect': op_intersect,
    'condition_ii': op_condition_ii,
}


def write_outputs(result: CommandResult, outputs: Dict[str, str]) -> None:
    for path in outputs.values():
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    if outputs.get('json'):
        with open(outputs['json'], 'wb') as handle:
            handle.write(render_json(result.payload))
    if outputs.get('csv'):
        with open(outputs['csv'], 'wb') as handle:
            handle.write(render_csv(result.rows or []))


def load_manifest(path: str) -> ExperimentManifest:
    with open(path, 'rb') as handle:
        data = orjson.loads(handle.read())
    return ExperimentManifest.model_validate(data)


def run(manifest: ExperimentManifest, threads: int = 1, base_dir: str = '.') -> CommandResult:
    """Execute a validated manifest and write its outputs"""
    context = OperationContext(systems=manifest.systems, seed=manifest.seed, threads=threads)
    logger.info(f"running manifest operation {manifest.operation} with seed {manifest.seed}")
    result = OPERATIONS[manifest.operation](context, dict(manifest.parameters))
    outputs = {kind: os.path.join(base_dir, path) for kind, path in manifest.outputs.items()}
    write_outputs(result, outputs)
    return result


# argument parsing

def _add_system(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--system', required=True, help="Preset (base-2, base-3, golden, tribonacci) or JSON file")


def _add_freqset(parser: argparse.ArgumentParser, with_n: bool = True) -> None:
    parser.add_argument('--m', type=int, default=1, help="Word length")
    parser.add_argument('--p', help="Target frequencies, comma separated, or 'uniform'")
    parser.add_argument('--eps', help="Tolerance in (0,1)")
    if with_n:
        parser.add_argument('--n', type=int, help="Generation")


def _add_target(parser: argparse.ArgumentParser) -> None:
    _add_system(parser)
    _add_freqset(parser)
    parser.add_argument('--set', help="CSV of member words (column 'word')")
    parser.add_argument('--random-n', type=int, help="Use a random union of this generation")
    parser.add_argument('--density', type=float, default=0.5)
    parser.add_argument('--explicit', action='store_true', help="Materialize the frequency set")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='freqlab', description="Digit-frequency sets, cover measures and dimension experiments")
    parser.add_argument('--seed', type=int, default=settings.DEFAULT_SEED, help="Seed for every random choice")
    parser.add_argument('--threads', type=int, default=1, help="Worker threads for table computations")
    parser.add_argument('--precision-bits', type=int, help="mpmath working precision")
    parser.add_argument('--json', action='store_true', help="Print the result as JSON")
    parser.add_argument('--out', help="Write CSV rows to this path")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('expand', help="Digits of x")
    _add_system(p)
    p.add_argument('--x', required=True)
    p.add_argument('--n', type=int, required=True)
    p.set_defaults(operation='expand')

    p = sub.add_parser('synthesize', help="Left endpoint of a word's cylinder")
    _add_system(p)
    p.add_argument('--word', required=True)
    p.set_defaults(operation='synthesize')

    p = sub.add_parser('beta-one', help="Greedy expansion of 1")
    _add_system(p)
    p.add_argument('--max-k', type=int, default=settings.MAX_K)
    p.set_defaults(operation='beta_one')

    p = sub.add_parser('admissible', help="Admissibility of a word")
    _add_system(p)
    p.add_argument('--word', required=True)
    p.set_defaults(operation='admissible')

    p = sub.add_parser('cylinder', help="Cylinder geometry and full completion")
    _add_system(p)
    p.add_argument('--word', required=True)
    p.add_argument('--minimal', action='store_true')
    p.set_defaults(operation='cylinder')

    p = sub.add_parser('ratio', help="Smallest child/parent cylinder ratio")
    _add_system(p)
    p.add_argument('--depth', type=int, default=12)
    p.set_defaults(operation='ratio')

    p = sub.add_parser('freqset', help="Members of G_p(n, eps), or membership of one word / point")
    _add_system(p)
    _add_freqset(p)
    p.add_argument('--word')
    p.add_argument('--x')
    p.set_defaults(operation='freqset')

    p = sub.add_parser('measure', help="Cylinder or dyadic cover measure")
    _add_target(p)
    p.add_argument('--s', required=True)
    p.add_argument('--mode', choices=['cylinder', 'dyadic'], default='cylinder')
    p.add_argument('--depth', type=int, default=20)
    p.set_defaults(operation='measure')

    p = sub.add_parser('comparison', help="Dyadic versus cylinder measure check")
    _add_target(p)
    p.add_argument('--s', required=True)
    p.add_argument('--depth', type=int, default=48)
    p.add_argument('--c-beta', help="Override the beta ratio constant")
    p.set_defaults(operation='comparison')

    p = sub.add_parser('scan', help="Falconer-condition scan over dyadic intervals")
    _add_target(p)
    p.add_argument('--s', required=True)
    p.add_argument('--max-depth', type=int, default=6)
    p.add_argument('--depth-cap', type=int)
    p.add_argument('--c-required', help="Floor that c_min must exceed")
    p.set_defaults(operation='scan')

    dimension = sub.add_parser('dimension', help="Dimension oracles and experiments")
    dsub = dimension.add_subparsers(dest='dimension_command', required=True)

    p = dsub.add_parser('oracle')
    _add_system(p)
    _add_freqset(p, with_n=False)
    p.set_defaults(operation='dimension_oracle')

    p = dsub.add_parser('estimate')
    _add_system(p)
    _add_freqset(p, with_n=False)
    p.add_argument('--n-schedule', required=True)
    p.add_argument('--s-grid')
    p.add_argument('--s-step', default='0.05')
    p.add_argument('--tail-rule', choices=list(TAIL_RULES), default='envelope', help="Super-critical test on the schedule tail")
    p.set_defaults(operation='estimate')

    p = dsub.add_parser('scaling')
    _add_system(p)
    _add_freqset(p)
    p.add_argument('--s', required=True)
    p.add_argument('--words', required=True, help="Comma-separated cylinder words")
    p.set_defaults(operation='scaling')

    p = dsub.add_parser('q')
    p.add_argument('--s', required=True)
    p.add_argument('--beta', default='golden', help="Preset, system file or decimal value")
    p.set_defaults(operation='q_constant')

    p = dsub.add_parser('continuity')
    _add_system(p)
    _add_freqset(p, with_n=False)
    p.add_argument('--deltas', required=True)
    p.set_defaults(operation='condition_ii')

    for parent in (dsub, sub):
        p = parent.add_parser('witness', help="Oscillating frequency witness")
        _add_system(p)
        p.add_argument('--m', type=int, default=1)
        p.add_argument('--targets', required=True, help="Vectors separated by ';'")
        p.add_argument('--horizon', type=int, required=True)
        p.add_argument('--radius', default='0.02')
        p.set_defaults(operation='witness')

        p = parent.add_parser('intersect', help="Falconer scans below the smallest oracle dimension")
        p.add_argument('--spec', action='append', required=True, dest='specs',
                       help="system;m;p;eps;n (repeatable)")
        p.add_argument('--s-margin', default='0.1')
        p.add_argument('--depth', type=int, default=6)
        p.add_argument('--depth-cap', type=int)
        p.add_argument('--c-required', help="Floor that every factor's c_min must exceed")
        p.set_defaults(operation='intersect')

    p = sub.add_parser('run', help="Execute an experiment manifest")
    p.add_argument('manifest')
    p.set_defaults(operation='run')
    return parser


GLOBAL_OPTIONS = {'seed', 'threads', 'precision_bits', 'json', 'out', 'command', 'dimension_command', 'operation'}


def _emit(result: CommandResult, as_json: bool, out: Optional[str]) -> None:
    if out and result.rows is not None:
        with open(out, 'wb') as handle:
            handle.write(render_csv(result.rows))
    if as_json:
        sys.stdout.buffer.write(render_json(result.payload))
        sys.stdout.flush()
        return
    for key, value in sorted(jsonable(result.payload).items()):
        if isinstance(value, (dict, list)):
            value = orjson.dumps(value, option=orjson.OPT_SORT_KEYS).decode()
        print(f"{key}: {value}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    configure_logging()
    try:
        if args.precision_bits:
            set_precision(args.precision_bits)
        if args.operation == 'run':
            manifest = load_manifest(args.manifest)
            result = run(manifest, threads=args.threads, base_dir=os.path.dirname(os.path.abspath(args.manifest)))
        else:
            params = {key: value for key, value in vars(args).items() if key not in GLOBAL_OPTIONS}
            context = OperationContext(seed=args.seed, threads=args.threads)
            result = OPERATIONS[args.operation](context, params)
    except ValidationError as exc:
        for message in validation_messages(exc):
            logger.error(f"schema error at {message}")
        return EXIT_USAGE
    except orjson.JSONDecodeError as exc:
        logger.error(f"invalid JSON: {exc}")
        return EXIT_USAGE
    except (InputError, AdmissibilityError) as exc:
        logger.error(str(exc))
        return EXIT_USAGE
    except ResourceError as exc:
        logger.error(f"{exc} (partial: {exc.diagnostics})")
        return EXIT_RESOURCE
    except (PrecisionError, NonTerminatingError) as exc:
        logger.error(str(exc))
        return EXIT_PRECISION
    except (FreqLabError, OSError) as exc:
        logger.error(str(exc))
        return EXIT_USAGE

    _emit(result, args.json, args.out)
    if result.violation:
        logger.warning("property check reported a violation")
        return EXIT_VIOLATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
