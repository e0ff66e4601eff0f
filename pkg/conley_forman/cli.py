"""Command line interface: `conley-forman <command> <input.json> [options]`.

The input file holds a complex `{"vertices": [...], "simplices": [...]}` and a vector field, either under the key
`"field"` or as top-level `"critical"` / `"arrows"` lists. `example:<name>` selects one of the built-in examples.
"""

import argparse
import json
import logging
import sys

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import catalog
from . import field
from . import semiflow
from .complex import ComplexDomainError, SimplicialComplex, validate
from .conley import IsolatedInvariantSet, NotIsolatedError, finest_morse_decomposition, is_isolated_invariant
from .cvf import CombinatorialVectorField, Critical, InvalidFieldError, cells_from_json, validate_field
from .geometry import CellPartition, GeometryError, check_epsilon, check_point, index_pair_betti, index_pairs
from .homology import PoincarePolynomial
from .util import parse_fraction

logger = logging.getLogger(__name__)


EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

POINT_SUM_TOLERANCE = 1e-9
"""Initial points given on the command line must sum to 1 within this tolerance."""

# Commands integrating the vector fields need the smaller bound on ε.
FIELD_COMMANDS = frozenset(('simulate', 'verify'))


class UsageError(ValueError):
    """This error is thrown for malformed input files, points or options; it maps to exit code 2."""

    def __init__(self, *args):
        super().__init__(*args)


class ValidationFailure(Exception):
    """An invalid complex or field: the messages are printed and the exit code is 1."""

    def __init__(self, report: list[str]):
        super().__init__("; ".join(report))
        self.report = report


@dataclass
class JobConfig:
    """Everything a command needs, assembled from the parsed arguments."""
    command: str
    input: str
    eps: Fraction | None = None
    complete_critical: bool = False
    close: bool = False
    set_text: str | None = None
    dt: float = semiflow.DEFAULT_DT
    t_max: float = 10.0
    samples: int = 200
    trajectories: int | None = None
    seed: int = 42
    start: str | None = None
    out: str | None = None
    events: str | None = None
    fmt: str = 'dot'
    full_reachability: bool = False
    corrupt_field: bool = False
    csv: str | None = None
    verbose: int = 0

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'JobConfig':
        try:
            eps = None if args.epsilon is None else parse_fraction(args.epsilon)
        except (ValueError, ZeroDivisionError) as e:
            raise UsageError(f"Invalid epsilon: {e}") from None

        known = {k: v for k, v in vars(args).items() if k in cls.__dataclass_fields__}
        known['eps'] = eps
        known['set_text'] = getattr(args, 'set', None)
        known['start'] = getattr(args, 'from_point', None)
        return cls(**known)


def load_field(cfg: JobConfig) -> CombinatorialVectorField:
    """Reads and validates the complex and the field of the job.

    Raises:
        UsageError: if the file cannot be read or parsed.
        ValidationFailure: if the complex or the field is invalid.
    """
    if cfg.input.startswith('example:'):
        try:
            return catalog.example(cfg.input.removeprefix('example:'))
        except KeyError as e:
            raise UsageError(e.args[0]) from None

    try:
        obj = json.loads(Path(cfg.input).read_text())
    except OSError as e:
        raise UsageError(f"Cannot read {cfg.input}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{cfg.input}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None

    try:
        close = cfg.close or (isinstance(obj, dict) and obj.get('close') is True)
        X = SimplicialComplex.from_json(obj, close=close)
        report = validate(X)
        if report:
            raise ValidationFailure(report)

        field_obj = obj.get('field', obj)
        cells = cells_from_json(X, field_obj)
    except ComplexDomainError as e:
        raise UsageError(f"{cfg.input}: {e}") from None

    if cfg.complete_critical:
        covered = {s for c in cells for s in c.simplices}
        cells.extend(Critical(s) for s in X.simplices if s not in covered)

    report = validate_field(X, cells)
    if report:
        raise ValidationFailure(report)

    return CombinatorialVectorField(X, cells)

def job_epsilon(cfg: JobConfig, V: CombinatorialVectorField) -> Fraction | None:
    """The ε of the job, checked against the complex. None means the default 1/(8d)."""
    if cfg.eps is None:
        return None
    try:
        return check_epsilon(cfg.eps, V.X, for_field=cfg.command in FIELD_COMMANDS)
    except GeometryError as e:
        raise UsageError(str(e)) from None

def parse_set(cfg: JobConfig, V: CombinatorialVectorField) -> set:
    if not cfg.set_text:
        raise UsageError("--set needs a nonempty list of simplices.")
    try:
        return V.X.parse_simplices(cfg.set_text)
    except ComplexDomainError as e:
        raise UsageError(str(e)) from None

def parse_point(text: str, V: CombinatorialVectorField) -> list[float]:
    """Parses barycentric assignments `A=0.2,B=0.3,D=0.5`; unlisted vertices get 0.

    Raises:
        UsageError: for a malformed assignment, an unknown vertex, or coordinates not forming a point of the complex.
    """
    X = V.X
    x = [0.0] * X.d
    for part in filter(None, (p.strip() for p in text.split(','))):
        name, sep, value = part.partition('=')
        if not sep:
            raise UsageError(f"Malformed coordinate {part!r}, expected NAME=VALUE.")
        try:
            v = X.vertex_id(name.strip())
            x[v] = float(Fraction(value.strip()))
        except (ComplexDomainError, ValueError, ZeroDivisionError) as e:
            raise UsageError(f"Malformed coordinate {part!r}: {e}") from None

    if abs(sum(x) - 1) > POINT_SUM_TOLERANCE:
        raise UsageError(f"Barycentric coordinates must sum to 1, got {sum(x)}.")
    try:
        check_point(x, X, tol=POINT_SUM_TOLERANCE)
    except GeometryError as e:
        raise UsageError(str(e)) from None

    return x

def _write(text: str, path: str | None):
    if path is None or path == '-':
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)

def _dump(obj):
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def cmd_validate(cfg: JobConfig) -> int:
    V = load_field(cfg)
    print(f"ok: {len(V.X)} simplices, {len(V.crit())} critical, {len(V.tail())} arrows")
    return EXIT_OK

def cmd_morse(cfg: JobConfig) -> int:
    V = load_field(cfg)
    graph = finest_morse_decomposition(V, verbose=cfg.verbose > 0)
    match cfg.fmt:
        case 'json':
            _write(graph.dumps(cfg.full_reachability), cfg.out)
        case _:
            _write(graph.to_dot(cfg.full_reachability), cfg.out)
    return EXIT_OK

def cmd_index(cfg: JobConfig) -> int:
    V = load_field(cfg)
    S = parse_set(cfg, V)
    ok, diag = is_isolated_invariant(S, V)
    if not ok:
        print(f"not an isolated invariant set: {diag}")
        return EXIT_FAILURE

    p = IsolatedInvariantSet(S, V).index
    _dump({'set': V.X.labels(S), 'poincare': str(p), 'betti': list(p.betti)})
    return EXIT_OK

def _isolated(cfg: JobConfig, V: CombinatorialVectorField) -> IsolatedInvariantSet | None:
    try:
        return IsolatedInvariantSet(parse_set(cfg, V), V)
    except NotIsolatedError as e:
        print(str(e))
        return None

def cmd_block(cfg: JobConfig) -> int:
    V = load_field(cfg)
    S = _isolated(cfg, V)
    if S is None:
        return EXIT_FAILURE

    partition = CellPartition(V.X, job_epsilon(cfg, V))
    try:
        pairs = index_pairs(S, partition)
    except GeometryError as e:
        print(str(e))
        return EXIT_FAILURE

    _dump({
        'set': S.name,
        'epsilon': str(partition.eps),
        'block': partition.dump(pairs.B),
        'exit_set': partition.dump(pairs.B_minus),
    })
    if cfg.csv:
        Path(cfg.csv).write_text(partition.coordinates_csv(pairs.B))

    return EXIT_OK

def cmd_homology_equiv(cfg: JobConfig) -> int:
    V = load_field(cfg)
    S = _isolated(cfg, V)
    if S is None:
        return EXIT_FAILURE

    partition = CellPartition(V.X, job_epsilon(cfg, V))
    try:
        bp, bq, bc = index_pair_betti(S, partition)
    except GeometryError as e:
        print(str(e))
        return EXIT_FAILURE

    equal = bp == bq == bc
    _dump({
        'set': S.name,
        'block_pair': list(bp),
        'closure_pair': list(bq),
        'combinatorial': list(bc),
        'poincare': str(PoincarePolynomial(bc)),
        'equal': equal,
    })
    return EXIT_OK if equal else EXIT_FAILURE

def cmd_simulate(cfg: JobConfig) -> int:
    V = load_field(cfg)
    eps = job_epsilon(cfg, V)
    if not cfg.start:
        raise UsageError("simulate needs an initial point, e.g. --from A=0.2,B=0.3,D=0.5")
    x0 = parse_point(cfg.start, V)

    sf = semiflow.Semiflow(V, eps, cfg.dt)
    try:
        traj = sf.flow(x0, cfg.t_max, verbose=cfg.verbose > 0)
    except (semiflow.TileMembershipError, semiflow.StepBudgetExceededError, semiflow.ProgressError) as e:
        logger.error("%s", e)
        return EXIT_FAILURE

    _write(traj.to_csv(), cfg.out)
    if cfg.events:
        _write(traj.events_jsonl(), cfg.events)

    logger.info("%d samples, %d tile crossings, final tile %s",
                len(traj.samples), len(traj.events), V.label(traj.final.cell))
    return EXIT_OK

def cmd_verify(cfg: JobConfig) -> int:
    """Runs the field property suite, the admissibility suite with the Morse consistency check of its trajectories,
    and the index pair equivalence for every Morse set. Prints a JSON report; exits with 0 iff everything passes."""
    V = load_field(cfg)
    eps = job_epsilon(cfg, V)
    n_traj = cfg.samples if cfg.trajectories is None else cfg.trajectories
    verbose = cfg.verbose > 0

    if cfg.samples == 0 and n_traj == 0:
        logger.warning("no samples: only the index pair equivalence is checked")

    fr = field.property_suite(V, eps, cfg.samples, cfg.seed, verbose=verbose)

    h_func = (lambda s, e: -field.h(s, e)) if cfg.corrupt_field else None
    ar = semiflow.admissibility_suite(V, eps, n_traj, cfg.seed, cfg.t_max, cfg.dt, h_func=h_func,
                                      keep_trajectories=True, verbose=verbose)

    graph = finest_morse_decomposition(V, verbose=verbose)
    morse = semiflow.morse_consistency(ar.runs, graph)

    partition = CellPartition(V.X, eps)
    equiv = []
    for M in graph.nodes:
        try:
            bp, bq, bc = index_pair_betti(M, partition)
            equiv.append({'set': M.name, 'block_pair': list(bp), 'closure_pair': list(bq),
                          'combinatorial': list(bc), 'equal': bp == bq == bc})
        except GeometryError as e:
            equiv.append({'set': M.name, 'error': str(e), 'equal': False})

    ok = fr.ok and ar.ok and not morse and all(e['equal'] for e in equiv)
    _dump({
        'field': {
            'samples': fr.samples,
            'max_conservation_error': fr.max_conservation_error,
            'max_norm': fr.max_norm,
            'bounds_applicable': fr.bounds_applicable,
            'bound_violations': fr.bound_violations,
            'direction_checks': fr.direction_checks,
            'direction_violations': fr.direction_violations,
            'modification_mismatches': fr.modification_mismatches,
            'ok': fr.ok,
        },
        'admissibility': ar.to_json(),
        'morse_consistency': morse,
        'index_pairs': equiv,
        'ok': ok,
    })
    return EXIT_OK if ok else EXIT_FAILURE


COMMANDS = {
    'validate': cmd_validate,
    'morse': cmd_morse,
    'index': cmd_index,
    'block': cmd_block,
    'homology-equiv': cmd_homology_equiv,
    'simulate': cmd_simulate,
    'verify': cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('input', help="JSON file with the complex and the field, or example:<name>")
    common.add_argument('--epsilon', metavar='P/Q', help="ε as an exact rational (default 1/(8d))")
    common.add_argument('--complete-critical', action='store_true',
                        help="make every simplex not listed in the field critical")
    common.add_argument('--close', action='store_true',
                        help="add the faces of the listed simplices, so that maximal simplices suffice "
                             "(also enabled by \"close\": true in the file)")
    common.add_argument('-v', '--verbose', action='count', default=0, help="-v for progress, -vv for debugging")

    parser = argparse.ArgumentParser(prog='conley-forman',
                                     description="Combinatorial Conley theory and Forman semiflows on simplicial complexes.")
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('validate', parents=[common], help="check the complex and the field")

    p = sub.add_parser('morse', parents=[common], help="finest Morse decomposition and Conley-Morse graph")
    g = p.add_mutually_exclusive_group()
    g.add_argument('--dot', dest='fmt', action='store_const', const='dot', help="DOT output (default)")
    g.add_argument('--json', dest='fmt', action='store_const', const='json', help="JSON output")
    p.add_argument('--full-reachability', action='store_true', help="all order relations, not only the reduction")
    p.add_argument('--out', help="output file (default stdout)")
    p.set_defaults(fmt='dot')

    for name, text in (('index', "Conley index of an isolated invariant set"),
                       ('block', "isolating block and exit set in the cell partition"),
                       ('homology-equiv', "compare the index pair homologies with the combinatorial index")):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument('--set', required=True, help='simplices separated by spaces, e.g. "EF E"')
        if name == 'block':
            p.add_argument('--csv', help="write a representative point of every cell of the block")

    p = sub.add_parser('simulate', parents=[common], help="integrate the semiflow from a point")
    p.add_argument('--from', dest='from_point', required=True, metavar='A=0.2,B=0.3,...',
                   help="barycentric coordinates of the initial point")
    p.add_argument('--tmax', dest='t_max', type=float, default=10.0)
    p.add_argument('--dt', type=float, default=semiflow.DEFAULT_DT)
    p.add_argument('--out', help="CSV trajectory file (default stdout)")
    p.add_argument('--events', help="JSONL file for the tile crossings")

    p = sub.add_parser('verify', parents=[common], help="run the property and admissibility suites")
    p.add_argument('--samples', type=int, default=200, help="sampled points per tile")
    p.add_argument('--trajectories', type=int, help="number of trajectories (default: --samples)")
    p.add_argument('--seed', type=int, default=42)
    p.add_argument('--tmax', dest='t_max', type=float, default=50.0)
    p.add_argument('--dt', type=float, default=semiflow.DEFAULT_DT)
    p.add_argument('--corrupt-field', action='store_true', help="negative control: flip the sign of h")

    return parser


def main(argv: list[str] = None) -> int:
    args = build_parser().parse_args(argv)

    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)

    try:
        cfg = JobConfig.from_args(args)
        return COMMANDS[cfg.command](cfg)
    except UsageError as e:
        print(f"conley-forman: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValidationFailure as e:
        for line in e.report:
            print(line)
        return EXIT_FAILURE
    except InvalidFieldError as e:
        for line in e.report:
            print(line)
        return EXIT_FAILURE
