"""
    rhopriv.cli
    ~~~~~~~~~~~

    Command line front end. Every command reads an instance file
    (``-`` for stdin) and writes a JSON report, or CSV for ``curve``.
    Exit codes: 2 invalid input, 3 rho outside a scheme's realm,
    4 problem too large, 5 failed verification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, List, Optional, Sequence

import numpy as np

from . import (
    __version__,
    _const,
    _helper,
    _logging,
    bounds,
    chernoff,
    err,
    g,
    mechanisms,
    oracle,
    privacy,
)
from .model import DataModel, support_stats

logger = _logging.create_logger()

PROG = 'rhopriv'


def probability(text: str) -> float:
    """A float or a fraction such as 1/3, inside [0, 1]."""
    try:
        value = float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a probability: {text!r}")
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text!r} outside [0, 1]")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text!r} must be at least 1")
    return value


def parse_grid(spec: str) -> List[float]:
    """``start:stop:step`` with both endpoints included."""
    try:
        start, stop, step = (float(Fraction(p)) for p in spec.split(':'))
    except (ValueError, ZeroDivisionError):
        raise err.InvalidValueError(f"bad grid spec {spec!r}")
    if step <= 0 or not 0.0 <= start <= stop <= 1.0:
        raise err.InvalidValueError(f"bad grid spec {spec!r}")
    count = int(round((stop - start) / step))
    if abs(start + count * step - stop) > 1e-9:
        raise err.InvalidValueError(
            f"grid step {step} does not reach {stop} from {start}")
    return [round(start + i * step, 12) for i in range(count + 1)]


def _read_json(path: str) -> Any:
    try:
        if path == '-':
            return json.load(sys.stdin)
        with open(path, 'r', encoding='utf-8') as fp:
            return json.load(fp)
    except json.JSONDecodeError as e:
        raise err.InvalidValueError(f"{path}: invalid JSON ({e})")
    except OSError as e:
        raise err.InvalidValueError(f"{path}: {e.strerror}")


def load_instance(path: str) -> DataModel:
    data = _read_json(path)
    if not isinstance(data, dict) or 'px' not in data or 'f' not in data:
        raise err.InvalidValueError(
            "instance file needs the keys 'px' and 'f'")
    return DataModel(data['px'], data['f'], data.get('h'),
                     labels=data.get('labels'))


def load_mechanism(path: str, model: DataModel) -> Any:
    data = _read_json(path)
    kind = 'row-lifted'
    if isinstance(data, dict):
        kind = data.get('kind', kind)
        data = data.get('matrix')
    if not isinstance(data, list):
        raise err.InvalidValueError("mechanism file needs a 'matrix'")
    if kind == 'add-noise':
        mech = mechanisms.AddNoiseMechanism(data)
        shape = (model.k, model.k)
    else:
        mech = mechanisms.Mechanism(data)
        shape = (model.r, model.k)
    if mech.matrix.shape != shape:
        raise err.InvalidValueError(
            f"{kind} mechanism must be {shape[0]}x{shape[1]} for this "
            f"instance, got {mech.matrix.shape[0]}x{mech.matrix.shape[1]}")
    return mech


def _write(text: str, path: Optional[str]) -> None:
    if path in (None, '-'):
        sys.stdout.write(text)
        return
    with open(path, 'w', encoding='utf-8', newline='') as fp:
        fp.write(text)


def _report(
    command: str,
    model: DataModel,
    result: Any,
    rho: Optional[float] = None,
    n: Optional[int] = None,
    methods: Sequence[str] = (),
    seeds: Sequence[int] = (),
) -> str:
    return _helper.dumps({
        'tool': PROG,
        'version': __version__,
        'command': command,
        'instance_digest': model.digest,
        'rho': rho,
        'n': n,
        'methods': list(methods),
        'seeds': list(seeds),
        'result': result,
    }) + '\n'


def _mechanism_dict(mech: Any, model: DataModel) -> dict:
    if isinstance(mech, mechanisms.AddNoiseMechanism):
        level = mech.recoverability_level
        kind = 'add-noise'
    else:
        level = mech.recoverability_level(model.f)
        kind = 'row-lifted'
    return {
        'scheme': mech.scheme,
        'kind': kind,
        'rho': mech.rho,
        'recoverability_level': level,
        'matrix': mech.matrix.tolist(),
    }


def cmd_mechanism(args: argparse.Namespace) -> int:
    model = load_instance(args.infile)
    stats = support_stats(model)
    mech = mechanisms.build_scheme(model, args.rho, args.scheme, stats)
    result = _mechanism_dict(mech, model)
    result['support'] = stats.todict()
    _write(_report('mechanism', model, result, rho=args.rho), args.out)
    return _const.EXIT.OK


def _exact_privacy(
    model: DataModel, mech: Any, n: int, workers: int
) -> privacy.PrivacyReport:
    try:
        if isinstance(mech, mechanisms.AddNoiseMechanism):
            return privacy.privacy_multi_addnoise(
                model, [mech] * n, workers=workers)
        return privacy.privacy_multi(model, [mech] * n, workers=workers)
    except err.EnumerationTooLarge as e:
        raise err.EnumerationTooLarge(f"{e}; rerun with --simulate")


def cmd_privacy(args: argparse.Namespace) -> int:
    model = load_instance(args.infile)
    stats = support_stats(model)
    if args.mechanism:
        mech = load_mechanism(args.mechanism, model)
    else:
        if args.rho is None or args.scheme is None:
            raise err.InvalidValueError(
                "--rho and --scheme are required without --mechanism")
        mech = mechanisms.build_scheme(model, args.rho, args.scheme, stats)

    seeds: List[int] = []
    if args.simulate:
        sim = oracle.simulate_protocol(
            model, mech, n=args.n, trials=args.trials, seed=args.seed,
            workers=args.workers)
        result = sim.todict()
        methods = ['monte-carlo']
        seeds = [args.seed]
    else:
        report = _exact_privacy(model, mech, args.n, args.workers)
        result = report.todict()
        methods = [report.method]
        if report.path is not None:
            methods.append(report.path)
        if args.n == 1 and model.has_predicate:
            result['predicate_value'] = privacy.predicate_privacy(
                model, mechanisms.as_row_lifted(mech, model.f)).value
    if args.rho is not None:
        result['closed_form'] = bounds.rho_privacy_closed(
            model, stats, args.rho)
        result['converse_upper'] = bounds.converse_upper(
            stats, args.n, args.rho)
    _write(_report('privacy', model, result, rho=args.rho, n=args.n,
                   methods=methods, seeds=seeds), args.out)
    return _const.EXIT.OK


def _csv_value(value: Any) -> str:
    return _helper.fmt_float(float(value)).strip('"')


def cmd_curve(args: argparse.Namespace) -> int:
    model = load_instance(args.infile)
    grid = parse_grid(args.grid)
    rows = bounds.privacy_curve(model, grid, n=args.n)
    columns = ('rho', 'privacy', 'converse_upper', 'achievability')
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_value(row[c]) for c in columns])
    _write(buffer.getvalue(), args.out)
    return _const.EXIT.OK


def cmd_compare(args: argparse.Namespace) -> int:
    model = load_instance(args.infile)
    stats = support_stats(model)
    result = chernoff.compare_schemes(
        model, args.rho, stats, nmax=args.nmax, workers=args.workers)
    vo = mechanisms.build_Vo(model, stats, args.rho)
    result['chernoff_report_vo'] = chernoff.chernoff_report(
        stats, vo).todict()
    _write(_report('compare', model, dict(result), rho=args.rho,
                   n=args.nmax, methods=[_const.METHOD.REDUCED]),
           args.out)
    return _const.EXIT.OK


def _suite(name: str, passed: Optional[bool], detail: str = '') -> dict:
    status = 'skipped' if passed is None else ('pass' if passed else 'fail')
    return {'name': name, 'status': status, 'detail': detail}


def _verify_suites(
    model: DataModel, args: argparse.Namespace, mech: Any = None
) -> List[dict]:
    rho = args.rho
    stats = support_stats(model)
    suites = []

    wo = mechanisms.build_Wo(model, stats, rho)
    value = privacy.privacy_single(model, wo).value
    closed = bounds.rho_privacy_closed(model, stats, rho)
    alt = bounds.rho_privacy_minentropy_form(model, stats, rho)
    suites.append(_suite(
        'closed-form',
        abs(value - closed) <= _const.TOL.INPUT
        and abs(alt - closed) <= _const.TOL.INPUT,
        f"W_o {value!r}, closed form {closed!r}"))

    vo = mechanisms.collapse_to_V(wo, model.f)
    reduced = privacy.privacy_multi_addnoise(model, vo, stats).value
    suites.append(_suite('add-noise-equivalence',
                         abs(reduced - value) <= _const.TOL.INPUT))

    config = oracle.SearchConfig(grid_step=args.step, rho=rho)
    try:
        _, best = oracle.search_optimal_mechanism(
            model, rho, config, workers=args.workers)
        suites.append(_suite('grid-optimality', True, f"grid {best!r}"))
    except err.SearchSpaceTooLarge as e:
        suites.append(_suite('grid-optimality', None, str(e)))
    except err.InvariantViolation as e:
        suites.append(_suite('grid-optimality', False, str(e)))

    if model.has_predicate:
        wp = mechanisms.build_Wo_predicate(model, stats, rho)
        pvalue = privacy.predicate_privacy(model, wp).value
        pclosed = bounds.predicate_privacy_closed(model, stats, rho)
        suites.append(_suite(
            'predicate-closed-form',
            abs(pvalue - pclosed) <= _const.TOL.INPUT
            and pvalue <= value + _const.TOL.INPUT,
            f"W'_o {pvalue!r}, closed form {pclosed!r}"))
        try:
            oracle.search_optimal_predicate(
                model, rho, config, workers=args.workers)
            suites.append(_suite('predicate-grid-optimality', True))
        except err.SearchSpaceTooLarge as e:
            suites.append(_suite('predicate-grid-optimality', None, str(e)))
        except err.InvariantViolation as e:
            suites.append(_suite('predicate-grid-optimality', False, str(e)))

    rng = np.random.default_rng(args.seed)
    worst = -np.inf
    for draw in range(args.draws):
        n = 1 + draw % 3
        ws = [oracle.random_feasible_mechanism(model, rho, rng)
              for _ in range(n)]
        gap = (privacy.privacy_multi(model, ws, workers=args.workers).value
               - bounds.converse_upper(stats, n, rho))
        worst = max(worst, gap)
    suites.append(_suite('converse', worst <= _const.TOL.CHECK,
                         f"largest excess {worst!r}"))

    hits = sum(
        oracle.simulate_protocol(model, wo, trials=args.trials,
                                 seed=args.seed + s,
                                 workers=args.workers).within(value)
        for s in range(args.seeds))
    suites.append(_suite('simulation', hits >= args.seeds - args.seeds // 20,
                         f"{hits}/{args.seeds} seeds within 4 sigma"))

    if mech is not None:
        feasible = mechanisms.is_rho_recoverable(mech, model.f, rho)
        user = privacy.privacy_single(
            model, mechanisms.as_row_lifted(mech, model.f)).value
        suites.append(_suite(
            'user-mechanism',
            feasible and user <= closed + _const.TOL.INPUT,
            f"privacy {user!r}, rho-recoverable {feasible}"))
    return suites


def cmd_verify(args: argparse.Namespace) -> int:
    model = load_instance(args.infile)
    # a malformed mechanism file fails before the slow suites run
    mech = load_mechanism(args.mechanism, model) if args.mechanism else None
    suites = _verify_suites(model, args, mech)
    failed = [s['name'] for s in suites if s['status'] == 'fail']
    result = {'passed': not failed, 'suites': suites}
    _write(_report('verify', model, result, rho=args.rho,
                   seeds=[args.seed + s for s in range(args.seeds)]),
           args.out)
    if failed:
        raise err.InvariantViolation(f"failed suites: {', '.join(failed)}")
    return _const.EXIT.OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--in', dest='infile', required=True,
                        help="instance JSON file, - for stdin")
    common.add_argument('--out', default='-', help="report file")
    common.add_argument('--workers', type=positive_int, default=None,
                        help=f"worker processes (env {g.EnvKey.DFT})")
    common.add_argument('--debug', action='store_true')

    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Privacy of rho-recoverable query responses")
    parser.add_argument('--version', action='version',
                        version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('mechanism', parents=[common],
                       help="construct a mechanism")
    p.add_argument('--rho', type=probability, required=True)
    p.add_argument('--scheme', choices=_const.SCHEMES, required=True)
    p.set_defaults(func=cmd_mechanism)

    p = sub.add_parser('privacy', parents=[common],
                       help="exact or simulated privacy")
    p.add_argument('--rho', type=probability)
    p.add_argument('--scheme', choices=_const.SCHEMES)
    p.add_argument('--mechanism', help="mechanism JSON file")
    p.add_argument('--n', type=positive_int, default=1)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument('--exact', action='store_true', default=True)
    mode.add_argument('--simulate', action='store_true')
    p.add_argument('--trials', type=positive_int, default=100_000)
    p.add_argument('--seed', type=int, default=0)
    p.set_defaults(func=cmd_privacy)

    p = sub.add_parser('curve', parents=[common],
                       help="privacy and bounds over a rho grid (CSV)")
    p.add_argument('--grid', default='0:1:0.01')
    p.add_argument('--n', type=positive_int, default=1)
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser('compare', parents=[common],
                       help="repeated V_o against V_1 or V_2")
    p.add_argument('--rho', type=probability, required=True)
    p.add_argument('--nmax', type=positive_int, default=4)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('verify', parents=[common],
                       help="run the oracle suites on an instance")
    p.add_argument('--rho', type=probability, required=True)
    p.add_argument('--step', type=probability, default=0.05)
    p.add_argument('--seeds', type=positive_int, default=20)
    p.add_argument('--trials', type=positive_int, default=20_000)
    p.add_argument('--draws', type=positive_int, default=60)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--mechanism', help="also check this mechanism file")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # usage errors share the exit code of invalid input
        return _const.EXIT.VALIDATION if e.code else _const.EXIT.OK

    config = g.G()
    config.configure(workers=args.workers, debug=args.debug)
    args.workers = config.workers
    try:
        return args.func(args)
    except err.Error as e:
        logger.error("%s", e)
        return e.exit_code


if __name__ == '__main__':
    sys.exit(main())
