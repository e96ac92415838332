#
# Copyright The NOMAD Authors.
#
# This file is part of NOMAD. See https://nomad-lab.eu for further info.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
"""
Command line interface `gas-networks`.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 I/O error.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np
import pandas as pd
import structlog

from nomad_gas_networks.cycle import decompose
from nomad_gas_networks.documents import (
    LoadedNetwork,
    ResultDocument,
    comparison_table,
    load_network,
    profile_frame,
    write_frame,
    write_result,
)
from nomad_gas_networks.errors import (
    GasNetworkError,
    NetworkParseError,
    NetworkValidationError,
    UnknownEdgeError,
)
from nomad_gas_networks.network import find_cycle
from nomad_gas_networks.pipeflow import EdgeState, pressure_profile
from nomad_gas_networks.solver import compare_models, hydrogen_sweep, solve
from nomad_gas_networks.steady import SteadyState
from nomad_gas_networks.utils import from_si, get_logger

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_IO = 4

MODEL_CHOICES = ('constant', 'linear', 'papay', 'quadratic', 'custom')
DEFAULT_MODELS = 'constant,linear,papay'

logger = get_logger(__name__)


def configure_logging(level: str) -> None:
    structlog.configure(
        processors=[
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt='%H:%M:%S'),
            structlog.dev.ConsoleRenderer(colors=False),
        ],
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(level.upper())
        ),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )


def _load(args: argparse.Namespace) -> LoadedNetwork:
    return load_network(
        args.network,
        model=getattr(args, 'model', None),
        momentum_mode=getattr(args, 'momentum', None),
    )


def _model_list(text: str) -> list[str]:
    models = [name.strip() for name in text.split(',') if name.strip()]
    unknown = [name for name in models if name not in MODEL_CHOICES]
    if unknown or not models:
        raise NetworkParseError(f'Unknown model kinds {unknown} in "{text}".')
    return models


def _summary(loaded: LoadedNetwork, state: SteadyState) -> pd.DataFrame:
    net = loaded.network
    rows = [
        {
            'node': node_id,
            'p_bar': round(from_si(state.pressures[node_id], 'bar'), 4),
            'eta': round(state.node_eta[node_id], 4),
            'load': net.node(node_id).load,
        }
        for node_id in net.node_ids
    ]
    return pd.DataFrame(rows).set_index('node')


def _residual_table(state: SteadyState) -> str:
    residuals = pd.Series(state.residuals.as_dict())
    residuals['subsonic_ok'] = state.subsonic_ok
    return residuals.to_string()


def cmd_solve(args: argparse.Namespace) -> int:
    loaded = _load(args)
    state = solve(loaded.network, loaded.model, loaded.boundary)
    result = ResultDocument.from_state(
        state,
        model_kind=loaded.model.kind,
        momentum_mode=args.momentum or loaded.document.momentum_mode,
        source=loaded.source,
        fixture_hash=loaded.source_hash,
    )
    write_result(result, args.out, args.format)
    report = sys.stderr if args.out == '-' else sys.stdout
    print(_summary(loaded, state).to_string(), file=report)
    print(_residual_table(state), file=report)
    return EXIT_OK


def cmd_profile(args: argparse.Namespace) -> int:
    loaded = _load(args)
    net = loaded.network
    edge = net.edge(args.edge)
    if edge.kind != 'pipe':
        raise UnknownEdgeError(f'Edge "{args.edge}" is a {edge.kind}, not a pipe.')
    state = solve(net, loaded.model, loaded.boundary)
    x, p = pressure_profile(
        loaded.model,
        loaded.model.pair,
        edge.pipe,
        EdgeState(q=state.flows[edge.id], eta=state.edge_eta[edge.id]),
        state.pressures[edge.foot],
        args.samples,
    )
    write_frame(profile_frame(x, p), args.out)
    return EXIT_OK


def cmd_compare_models(args: argparse.Namespace) -> int:
    loaded = _load(args)
    models = {
        name: loaded.document.build_model(name) for name in _model_list(args.models)
    }
    results = compare_models(loaded.network, models, loaded.boundary)
    mode = args.momentum or loaded.document.momentum_mode
    if args.out_dir is not None:
        os.makedirs(args.out_dir, exist_ok=True)
        stem = os.path.basename(args.network).removesuffix('.json')
        for name, state in results.items():
            if isinstance(state, GasNetworkError):
                continue
            write_result(
                ResultDocument.from_state(
                    state, name, mode, loaded.source, loaded.source_hash
                ),
                os.path.join(args.out_dir, f'{stem}.{name}.result.json'),
            )
    table = comparison_table(loaded.network, results)
    if args.out == '-':
        print(table.to_string())
    else:
        table.to_csv(args.out, index_label='quantity')
    if all(isinstance(state, GasNetworkError) for state in results.values()):
        return EXIT_SOLVER
    return EXIT_OK


def cmd_cut_info(args: argparse.Namespace) -> int:
    loaded = _load(args)
    net = loaded.network
    if find_cycle(net) is None:
        print('no cycle')
        return EXIT_OK
    decomposition, _ = decompose(net)
    info = {
        'cut_edge': decomposition.cut_edge,
        'flipped': decomposition.flipped,
        'modified_loads': decomposition.modified_loads,
        'betas': decomposition.betas,
        'reversed_betas': decomposition.reversed_betas,
        'interval': list(decomposition.interval),
    }
    if args.format == 'json':
        print(json.dumps(info, indent=2))
        return EXIT_OK
    print(f'cut edge: {info["cut_edge"]} (flipped: {str(info["flipped"]).lower()})')
    print('modified loads:')
    for node_id, value in info['modified_loads'].items():
        print(f'  {node_id}: {value:.6g}')
    print('beta:')
    for edge_id, value in info['betas'].items():
        print(f'  {edge_id}: {value:.6g}')
    print('reversed beta:')
    for edge_id, value in info['reversed_betas'].items():
        print(f'  {edge_id}: {value:.6g}')
    lower, upper = info['interval']
    print(f'I_sol: [{lower:.6g}, {upper:.6g}]')
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        loaded = _load(args)
    except NetworkValidationError as exc:
        print('invalid')
        for line in exc.diagnostics:
            print(f'  {line}')
        return EXIT_INVALID
    topology = 'tree' if find_cycle(loaded.network) is None else 'one-cycle'
    print(f'valid ({topology}, {loaded.boundary.mode} boundary)')
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    loaded = _load(args)
    models = {
        name: loaded.document.build_model(name) for name in _model_list(args.models)
    }
    fractions = np.linspace(args.eta_min, args.eta_max, args.steps)
    table = hydrogen_sweep(loaded.network, models, fractions, outlet=args.outlet)
    write_frame(table, args.out)
    return EXIT_OK


def _add_network(parser: argparse.ArgumentParser, overrides: bool = True) -> None:
    parser.add_argument('network', help='Network document (JSON).')
    if overrides:
        parser.add_argument('--model', choices=MODEL_CHOICES, default=None)
        parser.add_argument(
            '--momentum', choices=('full', 'semilinear'), default=None
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='gas-networks',
        description='Steady states of hydrogen/natural gas blends on networks.',
    )
    parser.add_argument(
        '--log-level',
        default='warning',
        choices=('debug', 'info', 'warning', 'error'),
    )
    commands = parser.add_subparsers(dest='command', required=True)

    solve_parser = commands.add_parser('solve', help='Compute the steady state.')
    _add_network(solve_parser)
    solve_parser.add_argument('--out', default='-')
    solve_parser.add_argument('--format', choices=('json', 'csv'), default='json')
    solve_parser.set_defaults(handler=cmd_solve)

    profile_parser = commands.add_parser('profile', help='Pressure along a pipe.')
    _add_network(profile_parser)
    profile_parser.add_argument('--edge', required=True)
    profile_parser.add_argument('--samples', type=int, default=51)
    profile_parser.add_argument('--out', default='-')
    profile_parser.set_defaults(handler=cmd_profile)

    compare_parser = commands.add_parser(
        'compare-models', help='Solve with several compressibility models.'
    )
    _add_network(compare_parser, overrides=False)
    compare_parser.add_argument('--models', default=DEFAULT_MODELS)
    compare_parser.add_argument(
        '--momentum', choices=('full', 'semilinear'), default=None
    )
    compare_parser.add_argument('--out', default='-', help='Summary CSV.')
    compare_parser.add_argument('--out-dir', default=None, help='Result documents.')
    compare_parser.set_defaults(handler=cmd_compare_models)

    cut_parser = commands.add_parser('cut-info', help='Report the cycle cut.')
    _add_network(cut_parser, overrides=False)
    cut_parser.add_argument('--format', choices=('text', 'json'), default='text')
    cut_parser.set_defaults(handler=cmd_cut_info)

    validate_parser = commands.add_parser('validate', help='Check a document.')
    _add_network(validate_parser, overrides=False)
    validate_parser.set_defaults(handler=cmd_validate)

    sweep_parser = commands.add_parser(
        'sweep', help='Outlet pressure over the hydrogen fraction.'
    )
    _add_network(sweep_parser, overrides=False)
    sweep_parser.add_argument('--models', default=DEFAULT_MODELS)
    sweep_parser.add_argument(
        '--momentum', choices=('full', 'semilinear'), default=None
    )
    sweep_parser.add_argument('--eta-min', type=float, default=0.0)
    sweep_parser.add_argument('--eta-max', type=float, default=1.0)
    sweep_parser.add_argument('--steps', type=int, default=5)
    sweep_parser.add_argument('--outlet', default=None)
    sweep_parser.add_argument('--out', default='-')
    sweep_parser.set_defaults(handler=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except (
        NetworkParseError,
        NetworkValidationError,
        UnknownEdgeError,
        ValueError,
    ) as exc:
        logger.error('invalid input', error=str(exc))
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_INVALID
    except GasNetworkError as exc:
        logger.error('solver failed', error=str(exc))
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_SOLVER
    except OSError as exc:
        logger.error('i/o failed', error=str(exc))
        print(f'error: {exc}', file=sys.stderr)
        return EXIT_IO


def cli() -> None:
    sys.exit(main())
