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
import numpy as np
import pytest

from nomad_gas_networks.errors import (
    CannotFlipCompressorError,
    MultipleCyclesError,
    NotACycleEdgeError,
    UnknownEdgeError,
)
from nomad_gas_networks.network import (
    BoundaryData,
    Edge,
    Network,
    Node,
    cut_network,
    find_cycle,
    flip_edge,
    validate,
)


def test_tree_is_valid(path_net):
    report = validate(path_net)
    assert report.ok, report.violations
    assert report.topology == 'tree'
    assert find_cycle(path_net) is None


def test_one_cycle_is_valid(triangle_net):
    report = validate(triangle_net)
    assert report.ok, report.violations
    assert report.topology == 'one-cycle'


def test_find_cycle_order(triangle_net):
    cycle = find_cycle(triangle_net)
    assert cycle.nodes == ('a', 'b', 'c')
    assert cycle.edges == ('e_ab', 'e_bc', 'e_ca')
    assert cycle.forward == (True, True, True)
    assert len(cycle) == 3


def test_find_cycle_orientation(diamond_net):
    cycle = find_cycle(diamond_net)
    assert cycle.nodes == ('a', 'b', 'd', 'c')
    assert cycle.edges == ('e1', 'e2', 'e3', 'e4')
    assert cycle.forward == (True, True, False, False)


def test_disconnected(path_net, make_pipe):
    net = Network(
        path_net.nodes + (Node('x'), Node('y')),
        path_net.edges + (make_pipe('e9', 'x', 'y'),),
    )
    report = validate(net)
    assert 'network is not connected' in report.violations
    assert report.topology is None


def test_two_cycles(triangle_net, make_pipe):
    extra = make_pipe('e_ac', 'a', 'c')
    net = Network(triangle_net.nodes, triangle_net.edges + (extra,))
    report = validate(net)
    assert any(v.startswith('cycle count > 1') for v in report.violations)
    with pytest.raises(MultipleCyclesError):
        find_cycle(net)


def test_compressor_on_cycle(triangle_net):
    edges = tuple(
        Edge('e_bc', 'b', 'c', 'compressor', gamma=1.1) if e.id == 'e_bc' else e
        for e in triangle_net.edges
    )
    report = validate(Network(triangle_net.nodes, edges))
    assert 'compressor "e_bc" lies on the cycle' in report.violations


def test_parallel_compressor(path_net):
    net = Network(
        path_net.nodes,
        path_net.edges + (Edge('c1', 'v1', 'v2', 'compressor', gamma=1.2),),
    )
    report = validate(net)
    assert 'compressor "c1" runs parallel to edge "e1"' in report.violations


def test_boundary_data_violations(path_net):
    net = path_net.with_nodes(
        {
            'v1': Node('v1', 'supply', -5.0, pressure=50e5),
            'v2': Node('v2', 'demand', 2.0, zeta=0.1),
            'v3': Node('v3', 'demand', 4.0),
        }
    )
    violations = validate(net).violations
    assert 'supply "v1" has no composition' in violations
    assert 'demand "v2" carries a composition' in violations
    assert any(v.startswith('unbalanced loads') for v in violations)


def test_missing_pressure(path_net):
    net = path_net.with_nodes({'v1': Node('v1', 'supply', -5.0, zeta=0.0)})
    assert 'no pressure specification' in validate(net).violations


def test_mixed_mode_needs_supply_pressures(star_net):
    net = star_net.with_nodes(
        {'s2': Node('s2', 'supply', -2.0, zeta=0.5, pressure=50e5)}
    )
    violations = validate(net).violations
    assert violations == ['supply "s3" has no pressure in mixed mode']


def test_mixed_mode_ignores_balance(star_net):
    net = star_net.with_nodes(
        {
            's2': Node('s2', 'supply', 0.0, zeta=0.5, pressure=51e5),
            's3': Node('s3', 'supply', 0.0, zeta=1.0, pressure=52e5),
        }
    )
    assert validate(net).ok
    boundary = BoundaryData.from_network(net)
    assert boundary.mode == 'mixed'
    assert boundary.supply_pressures == {'s1': 50e5, 's2': 51e5, 's3': 52e5}


def test_reference_boundary(path_net):
    boundary = BoundaryData.from_network(path_net)
    assert boundary.mode == 'reference'
    assert boundary.reference == ('v1', 50e5)


def test_incidence_matrix(diamond_net):
    matrix = diamond_net.incidence_matrix()
    assert matrix.shape == (6, 6)
    assert np.all(matrix.sum(axis=0) == 0)
    row = diamond_net.node_ids.index('a')
    column = [e.id for e in diamond_net.edges].index('e1')
    assert matrix[row, column] == -1


def test_cut_network(triangle_net):
    cut = cut_network(triangle_net, 'e_ab')
    assert (cut.v_l, cut.v_r, cut.e_l, cut.e_r) == (
        'e_ab:l',
        'e_ab:r',
        'e_ab',
        'e_ab:r',
    )
    tree = cut.network
    assert tree.cyclomatic_number == 0
    assert tree.edge('e_ab').head == 'e_ab:l'
    valve = tree.edge('e_ab:r')
    assert (valve.foot, valve.head, valve.kind) == ('e_ab:r', 'b', 'valve')


def test_cut_parameters(triangle_net):
    cut = cut_network(triangle_net, 'e_ab')
    net = cut.with_parameters(12.0, 0.3)
    assert net.node('e_ab:l').load == 12.0
    right = net.node('e_ab:r')
    assert (right.kind, right.load, right.zeta) == ('supply', -12.0, 0.3)
    reverse = cut.with_parameters(-4.0, 0.3)
    assert reverse.node('e_ab:l').is_supply
    assert reverse.node('e_ab:r').load == 4.0


def test_cut_rejects_tree_edges(path_net, diamond_net):
    with pytest.raises(NotACycleEdgeError):
        cut_network(path_net, 'e1')
    with pytest.raises(NotACycleEdgeError):
        cut_network(diamond_net, 'f1')
    with pytest.raises(UnknownEdgeError):
        cut_network(diamond_net, 'nope')


def test_flip_edge(path_net):
    flipped = flip_edge(path_net, 'e1')
    edge = flipped.edge('e1')
    assert (edge.foot, edge.head) == ('v2', 'v1')
    assert flip_edge(flipped, 'e1') == path_net


def test_flip_compressor(path_net):
    net = Network(
        path_net.nodes[:2] + (Node('v3', 'demand', 3.0),),
        (path_net.edges[0], Edge('c1', 'v2', 'v3', 'compressor', gamma=1.5)),
    )
    with pytest.raises(CannotFlipCompressorError):
        flip_edge(net, 'c1')


@pytest.mark.parametrize(
    'args',
    [
        ('e', 'a', 'a', 'valve'),
        ('e', 'a', 'b', 'pipe'),
        ('e', 'a', 'b', 'compressor'),
        ('e', 'a', 'b', 'regulator'),
    ],
)
def test_edge_validation(args):
    with pytest.raises(ValueError):
        Edge(*args)


def test_duplicate_ids(path_net):
    with pytest.raises(ValueError):
        Network(path_net.nodes + (Node('v1'),), path_net.edges)
