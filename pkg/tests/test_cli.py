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
import json

import pytest
import structlog

from nomad_gas_networks.cli import (
    EXIT_INVALID,
    EXIT_IO,
    EXIT_OK,
    EXIT_SOLVER,
    main,
)


@pytest.fixture(autouse=True)
def reset_logging():
    """`main` configures structlog for the captured stderr; undo that."""
    saved = structlog.get_config()
    yield
    structlog.reset_defaults()
    structlog.configure(**saved)


def two_node_document(path, comment, supply, demand, length):
    """A single pipe `p` from supply `a` at 50 bar to demand `b`."""
    path.write_text(
        json.dumps(
            {
                'comment': comment,
                'nodes': [
                    {'id': 'a', 'load': supply, 'zeta': 0.0, 'pressure': 50.0},
                    {'id': 'b', 'load': demand},
                ],
                'edges': [
                    {
                        'id': 'p',
                        'from': 'a',
                        'to': 'b',
                        'L': length,
                        'D': 0.5,
                        'lambda_fr': 0.05,
                    }
                ],
            }
        )
    )
    return str(path)


@pytest.fixture(name='unbalanced_path')
def fixture_unbalanced_path(tmp_path):
    return two_node_document(
        tmp_path / 'unbalanced.json', 'loads do not cancel', -10.0, 12.0, 1
    )


@pytest.fixture(name='choked_path')
def fixture_choked_path(tmp_path):
    return two_node_document(
        tmp_path / 'choked.json', 'far too much load', -5000.0, 5000.0, 10
    )


def test_validate(gaslib11_path, single_pipe_path, capsys):
    assert main(['validate', gaslib11_path]) == EXIT_OK
    assert capsys.readouterr().out.strip() == 'valid (one-cycle, mixed boundary)'
    assert main(['validate', single_pipe_path]) == EXIT_OK
    assert capsys.readouterr().out.strip() == 'valid (tree, reference boundary)'


def test_validate_reports_diagnostics(unbalanced_path, capsys):
    assert main(['validate', unbalanced_path]) == EXIT_INVALID
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'invalid'
    assert lines[1].startswith('  unbalanced loads')


def test_solve(single_pipe_path, capsys):
    assert main(['solve', single_pipe_path]) == EXIT_OK
    captured = capsys.readouterr()
    result = json.loads(captured.out)
    pressures = {node['id']: node['pressure_bar'] for node in result['nodes']}
    assert pressures['in'] == 60.0
    assert 40.0 < pressures['out'] < 41.5
    assert result['provenance']['model'] == 'constant'
    assert result['cut'] is None
    assert 'mass_balance' in captured.err


def test_solve_to_csv(single_pipe_path, tmp_path):
    out = tmp_path / 'state.csv'
    args = ['solve', single_pipe_path, '--format', 'csv', '--out', str(out)]
    assert main(args) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0] == 'element,id,pressure_bar,q,eta'
    assert len(lines) == 1 + 2 + 1


def test_solve_with_overrides(single_pipe_path, capsys):
    args = ['solve', single_pipe_path, '--model', 'papay', '--momentum', 'semilinear']
    assert main(args) == EXIT_OK
    provenance = json.loads(capsys.readouterr().out)['provenance']
    assert provenance == {
        'model': 'papay',
        'momentum_mode': 'semilinear',
        'source': single_pipe_path,
        'fixture_hash': provenance['fixture_hash'],
    }


def test_unbalanced_network(unbalanced_path, capsys):
    assert main(['solve', unbalanced_path]) == EXIT_INVALID
    assert 'unbalanced loads' in capsys.readouterr().err


def test_solver_failure(choked_path, capsys):
    assert main(['solve', choked_path]) == EXIT_SOLVER
    assert 'edge "p"' in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(['solve', str(tmp_path / 'missing.json')]) == EXIT_IO
    assert 'error:' in capsys.readouterr().err


def test_malformed_document(tmp_path, capsys):
    path = tmp_path / 'broken.json'
    path.write_text('{"nodes": [}')
    assert main(['solve', str(path)]) == EXIT_INVALID
    assert 'line 1' in capsys.readouterr().err


def test_profile(single_pipe_path, capsys):
    args = ['profile', single_pipe_path, '--edge', 'pipe', '--samples', '2']
    assert main(args) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'x_m,p_bar'
    assert len(lines) == 3
    rows = [[float(value) for value in line.split(',')] for line in lines[1:]]
    assert rows[0] == pytest.approx([0.0, 60.0])
    assert rows[1][0] == 50000.0
    assert rows[1][1] < 60.0


def test_profile_unknown_edge(single_pipe_path):
    args = ['profile', single_pipe_path, '--edge', 'nope']
    assert main(args) == EXIT_INVALID


def test_compare_models(single_pipe_path, tmp_path, capsys):
    out_dir = tmp_path / 'results'
    args = ['compare-models', single_pipe_path, '--out-dir', str(out_dir)]
    assert main(args) == EXIT_OK
    table = capsys.readouterr().out
    assert 'p_out[out] (bar)' in table
    assert sorted(path.name for path in out_dir.iterdir()) == [
        'single_pipe.constant.result.json',
        'single_pipe.linear.result.json',
        'single_pipe.papay.result.json',
    ]


def test_compare_models_all_failing(choked_path, capsys):
    assert main(['compare-models', choked_path]) == EXIT_SOLVER
    assert 'failed' in capsys.readouterr().out


def test_compare_unknown_model(single_pipe_path):
    args = ['compare-models', single_pipe_path, '--models', 'constant,virial']
    assert main(args) == EXIT_INVALID


def test_cut_info_tree(single_pipe_path, capsys):
    assert main(['cut-info', single_pipe_path]) == EXIT_OK
    assert capsys.readouterr().out.strip() == 'no cycle'


def test_cut_info(gaslib11_path, capsys):
    assert main(['cut-info', gaslib11_path]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'cut edge: P5 (flipped: false)'
    assert lines[-1] == 'I_sol: [0, 200]'


def test_cut_info_json(gaslib11_path, capsys):
    assert main(['cut-info', gaslib11_path, '--format', 'json']) == EXIT_OK
    info = json.loads(capsys.readouterr().out)
    assert info['cut_edge'] == 'P5'
    assert info['interval'] == pytest.approx([0.0, 200.0])
    assert info['betas'] == pytest.approx({'V1': 80.0, 'P4': 200.0})
    assert info['reversed_betas'] == pytest.approx({'V1': -80.0, 'P4': -200.0})
    assert list(info['modified_loads']) == ['4', '5', '8']
    assert info['modified_loads'] == pytest.approx(
        {'4': 120.0, '5': -200.0, '8': 80.0}
    )


def test_sweep(single_pipe_path, capsys):
    args = ['sweep', single_pipe_path, '--models', 'constant', '--steps', '3']
    assert main(args) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == 'eta,constant_bar'
    assert [line.split(',')[0] for line in lines[1:]] == ['0.0', '0.5', '1.0']
