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

import numpy as np
import pytest
import structlog

from nomad_gas_networks.documents import (
    NetworkDocument,
    ResultDocument,
    comparison_table,
    load_document,
    load_fixture,
    load_network,
    parse_document,
    profile_frame,
    write_result,
)
from nomad_gas_networks.errors import (
    NetworkParseError,
    NetworkValidationError,
    SubsonicViolationError,
)
from nomad_gas_networks.solver import solve
from nomad_gas_networks.utils import configure_default_logging

BAR = 1e5

SMALL = {
    'comment': 'two pipes',
    'nodes': [
        {'id': 'in', 'load': -50.0, 'zeta': 0.1, 'pressure': 50.0},
        {'id': 'mid'},
        {'id': 'out', 'load': 50.0},
    ],
    'edges': [
        {'id': 'a', 'from': 'in', 'to': 'mid', 'L': 20, 'D': 0.5, 'lambda_fr': 0.05},
        {'id': 'b', 'from': 'mid', 'to': 'out', 'kind': 'valve'},
    ],
}


def document(**changes):
    raw = json.loads(json.dumps(SMALL))
    raw.update(changes)
    return raw


def test_gaslib11_fixture():
    loaded = load_fixture('gaslib11.json')
    net = loaded.network
    kinds = [edge.kind for edge in net.edges]
    assert len(net.nodes) == 11
    assert sorted(kinds) == ['compressor'] * 2 + ['pipe'] * 8 + ['valve']
    assert net.cyclomatic_number == 1
    assert loaded.boundary.mode == 'mixed'
    assert loaded.boundary.supply_pressures == pytest.approx(
        {'1': 60 * BAR, '2': 58 * BAR, '6': 63 * BAR}
    )
    assert loaded.model.kind == 'constant'
    assert loaded.source_hash is not None
    assert net.edge('P1').pipe.length == pytest.approx(10e3)
    assert loaded.model.pair.ng.molar_mass == pytest.approx(0.01800678)


def test_single_pipe_fixture():
    loaded = load_fixture('single_pipe.json', model='papay', momentum_mode='semilinear')
    assert loaded.boundary.mode == 'reference'
    assert loaded.model.kind == 'papay'
    assert loaded.network.edge('pipe').pipe.momentum_mode == 'semilinear'


def test_small_document():
    doc = parse_document(json.dumps(SMALL))
    net = doc.to_network()
    assert net.node('in').kind == 'supply'
    assert net.node('in').pressure == pytest.approx(50 * BAR)
    assert net.node('mid').kind == 'demand'
    assert net.edge('a').pipe.length == pytest.approx(20e3)
    assert net.edge('b').kind == 'valve'


def test_document_round_trip():
    doc = parse_document(json.dumps(SMALL))
    assert parse_document(doc.dump()) == doc


def test_network_round_trip():
    doc = parse_document(json.dumps(SMALL))
    net = doc.to_network()
    again = NetworkDocument.from_network(net, comment='copy').to_network()
    assert again.node_ids == net.node_ids
    for node in net.nodes:
        other = again.node(node.id)
        assert (other.kind, other.load, other.zeta) == (node.kind, node.load, node.zeta)
        assert other.pressure == pytest.approx(node.pressure)
    assert again.edge('a').pipe.length == pytest.approx(net.edge('a').pipe.length)


def test_malformed_json():
    with pytest.raises(NetworkParseError, match='line 1'):
        parse_document('{"nodes": [', source='broken.json')


@pytest.mark.parametrize(
    'changes, match',
    [
        ({'model': {'kind': 'virial'}}, 'model.kind'),
        ({'schema_version': 2}, 'schema_version'),
        ({'nodes': 'none'}, 'nodes'),
    ],
)
def test_invalid_fields(changes, match):
    with pytest.raises(NetworkParseError, match=match):
        parse_document(json.dumps(document(**changes)))


def test_pipe_without_length():
    raw = document()
    del raw['edges'][0]['L']
    with pytest.raises(NetworkParseError, match='misses L'):
        parse_document(json.dumps(raw)).to_network()


def test_zero_length_pipe(models):
    raw = document()
    raw['edges'][0]['L'] = 0
    net = load_document(parse_document(json.dumps(raw))).network
    assert net.edge('a').pipe.is_frictionless
    state = solve(net, models['constant'])
    assert state.pressures['out'] == pytest.approx(state.pressures['in'])


def test_unknown_node():
    raw = document()
    raw['edges'][1]['to'] = 'nowhere'
    with pytest.raises(NetworkParseError):
        parse_document(json.dumps(raw)).to_network()


def test_missing_composition():
    raw = document()
    del raw['nodes'][0]['zeta']
    doc = parse_document(json.dumps(raw))
    with pytest.raises(NetworkValidationError) as exc_info:
        load_document(doc)
    assert 'supply "in" has no composition' in exc_info.value.diagnostics


def test_missing_comment_is_logged(caplog):
    raw = document()
    del raw['comment']
    load_document(parse_document(json.dumps(raw)))
    assert any(
        entry['log_level'] == 'warning' and 'provenance' in entry['event']
        for entry in caplog.entries
    )


def test_load_network_from_file(tmp_path):
    path = tmp_path / 'small.json'
    path.write_text(json.dumps(SMALL))
    loaded = load_network(str(path))
    assert loaded.source == str(path)
    assert len(loaded.source_hash) > 0


def test_custom_model_from_table():
    params = {
        'eta': [0.0, 1.0],
        'p_bar': [1.0, 50.0, 100.0, 200.0],
        'z': [[1.0] * 4, [1.0] * 4],
    }
    raw = document(model={'kind': 'custom', 'params': params})
    doc = parse_document(json.dumps(raw))
    loaded = load_document(doc)
    assert loaded.model.kind == 'custom'
    custom = solve(loaded.network, loaded.model)
    constant = solve(loaded.network, doc.build_model('constant'))
    assert custom.pressures['out'] == pytest.approx(constant.pressures['out'], rel=1e-6)


def test_custom_model_needs_table():
    doc = parse_document(json.dumps(document(model={'kind': 'custom'})))
    with pytest.raises(NetworkParseError, match='custom model'):
        doc.build_model()


def test_model_parameters():
    doc = parse_document(
        json.dumps(document(model={'kind': 'constant', 'params': {'k': 0.9}}))
    )
    assert doc.build_model().k == 0.9
    with pytest.raises(NetworkParseError):
        parse_document(
            json.dumps(document(model={'kind': 'constant', 'params': {'k': -1}}))
        ).build_model()


def test_result_document(diamond_net, models, tmp_path):
    state = solve(diamond_net, models['linear'])
    result = ResultDocument.from_state(state, 'linear', 'full', source='diamond')
    assert result.cut.cut_edge == 'e1'
    assert result.provenance.model == 'linear'
    pressures = {node.id: node.pressure_bar for node in result.nodes}
    assert pressures['s'] == 60.0
    assert ResultDocument.model_validate_json(result.model_dump_json()) == result

    frame = result.to_frame()
    assert list(frame.columns) == ['element', 'id', 'pressure_bar', 'q', 'eta']
    assert len(frame) == len(diamond_net.nodes) + len(diamond_net.edges)

    out = tmp_path / 'result.csv'
    write_result(result, str(out), 'csv')
    assert out.read_text().splitlines()[0] == 'element,id,pressure_bar,q,eta'


def test_tree_result_has_no_cut(path_net, models, capsys):
    state = solve(path_net, models['papay'])
    result = ResultDocument.from_state(state, 'papay', 'full')
    assert result.cut is None
    write_result(result, '-')
    assert json.loads(capsys.readouterr().out)['schema_version'] == 1


def test_library_logs_leave_stdout_clean(path_net, models, capsys):
    saved = structlog.get_config()
    structlog.reset_defaults()
    try:
        configure_default_logging()
        state = solve(path_net, models['papay'])
        write_result(ResultDocument.from_state(state, 'papay', 'full'), '-')
        captured = capsys.readouterr()
    finally:
        structlog.configure(**saved)
    assert json.loads(captured.out)['schema_version'] == 1
    assert 'tree flows solved' in captured.err


def test_profile_frame():
    frame = profile_frame(np.array([0.0, 1e3]), np.array([60e5, 59e5]))
    assert frame['x_m'].tolist() == [0.0, 1e3]
    assert frame['p_bar'].tolist() == pytest.approx([60.0, 59.0])


def test_comparison_table(path_net, models):
    results = {
        'constant': solve(path_net, models['constant']),
        'papay': SubsonicViolationError('choked', edge_id='e1'),
    }
    table = comparison_table(path_net, results)
    assert list(table.columns) == ['constant', 'papay']
    assert list(table.index) == [
        'p_out[v2] (bar)',
        'p_out[v3] (bar)',
        'q_in[v1] (kg/(m^2 s))',
        'eta_out[v2]',
        'eta_out[v3]',
        'status',
    ]
    assert table.loc['status', 'constant'] == 'ok'
    assert table.loc['status', 'papay'].startswith('failed')
    assert table.loc['q_in[v1] (kg/(m^2 s))', 'constant'] == 5.0


def test_comparison_table_orders_outlets_by_number():
    net = load_fixture('gaslib11.json').network
    table = comparison_table(net, {'constant': SubsonicViolationError('choked')})
    assert [row for row in table.index if row.startswith('p_out')] == [
        'p_out[7] (bar)',
        'p_out[10] (bar)',
        'p_out[11] (bar)',
    ]
