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
Graph data model of a gas network: nodes with boundary data, typed edges, the
incidence structure, topology validation and extraction of the (single) cycle.

Node and edge ids are opaque strings; wherever an order is needed it is the
lexicographic order of the ids.
"""

from dataclasses import dataclass, field, replace
from typing import (
    Literal,
)

import networkx as nx
import numpy as np

from nomad_gas_networks.errors import (
    CannotFlipCompressorError,
    MultipleCyclesError,
    NotACycleEdgeError,
    UnknownEdgeError,
)
from nomad_gas_networks.pipeflow import PipeParams

NodeKind = Literal['supply', 'demand']
EdgeKind = Literal['pipe', 'compressor', 'valve']
BALANCE_TOL = 1e-9


@dataclass(frozen=True)
class Node:
    """
    A network node. Loads are mass flux densities in kg/(m^2 s), negative at
    supplies. `zeta` is the hydrogen mass fraction injected at a supply and
    `pressure` an optional pressure specification in Pa.
    """

    id: str
    kind: NodeKind = 'demand'
    load: float = 0.0
    zeta: float | None = None
    pressure: float | None = None

    @property
    def is_supply(self) -> bool:
        return self.kind == 'supply'


@dataclass(frozen=True)
class Edge:
    """
    A directed edge from `foot` to `head`. Pipes carry `PipeParams`, compressors a
    ratio `gamma` >= 1, valves are friction-free connections.
    """

    id: str
    foot: str
    head: str
    kind: EdgeKind = 'pipe'
    pipe: PipeParams | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.foot == self.head:
            raise ValueError(f'Edge "{self.id}" is a loop.')
        if self.kind == 'pipe' and self.pipe is None:
            raise ValueError(f'Pipe "{self.id}" has no pipe parameters.')
        if self.kind == 'compressor' and (self.gamma is None or self.gamma < 1):
            raise ValueError(f'Compressor "{self.id}" needs a ratio gamma >= 1.')
        if self.kind not in ('pipe', 'compressor', 'valve'):
            raise ValueError(f'Unknown edge kind "{self.kind}".')

    @property
    def is_compressor(self) -> bool:
        return self.kind == 'compressor'

    def other(self, node_id: str) -> str:
        return self.head if node_id == self.foot else self.foot

    def incidence(self, node_id: str) -> int:
        """a(v, e): -1 at the foot, +1 at the head, 0 otherwise."""
        if node_id == self.foot:
            return -1
        if node_id == self.head:
            return 1
        return 0

    def flipped(self) -> 'Edge':
        return replace(self, foot=self.head, head=self.foot)


@dataclass(frozen=True)
class CycleInfo:
    """
    The cycle of a one-cycle network in traversal order. `edges[i]` connects
    `nodes[i]` and `nodes[i + 1]` (wrapping around), `forward[i]` is true when that
    edge is oriented in traversal direction.
    """

    nodes: tuple[str, ...]
    edges: tuple[str, ...]
    forward: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Network:
    """
    An immutable gas network. Derived lookups are built on construction.
    """

    nodes: tuple[Node, ...]
    edges: tuple[Edge, ...]
    _nodes: dict = field(init=False, repr=False, compare=False)
    _edges: dict = field(init=False, repr=False, compare=False)
    _incident: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(self.nodes))
        object.__setattr__(self, 'edges', tuple(self.edges))
        nodes = {node.id: node for node in self.nodes}
        edges = {edge.id: edge for edge in self.edges}
        if len(nodes) != len(self.nodes):
            raise ValueError('Node ids must be unique.')
        if len(edges) != len(self.edges):
            raise ValueError('Edge ids must be unique.')
        incident = {node_id: [] for node_id in nodes}
        for edge in sorted(self.edges, key=lambda e: e.id):
            for end in (edge.foot, edge.head):
                if end not in nodes:
                    raise ValueError(
                        f'Edge "{edge.id}" refers to unknown node "{end}".'
                    )
                incident[end].append(edge)
        object.__setattr__(self, '_nodes', nodes)
        object.__setattr__(self, '_edges', edges)
        object.__setattr__(
            self, '_incident', {key: tuple(value) for key, value in incident.items()}
        )

    def node(self, node_id: str) -> Node:
        return self._nodes[node_id]

    def edge(self, edge_id: str) -> Edge:
        try:
            return self._edges[edge_id]
        except KeyError as exc:
            raise UnknownEdgeError(f'No edge with id "{edge_id}".') from exc

    def has_edge(self, edge_id: str) -> bool:
        return edge_id in self._edges

    def incident_edges(self, node_id: str) -> tuple[Edge, ...]:
        """Edges at the node, sorted by id."""
        return self._incident[node_id]

    @property
    def node_ids(self) -> list[str]:
        return sorted(self._nodes)

    @property
    def edge_ids(self) -> list[str]:
        return sorted(self._edges)

    @property
    def supplies(self) -> list[Node]:
        return [
            node for node in sorted(self.nodes, key=lambda n: n.id) if node.is_supply
        ]

    @property
    def loads(self) -> dict[str, float]:
        return {node.id: node.load for node in self.nodes}

    @property
    def cyclomatic_number(self) -> int:
        return len(self.edges) - len(self.nodes) + nx.number_connected_components(
            self.graph()
        )

    def graph(self) -> nx.MultiGraph:
        """Undirected multigraph with the edge ids as keys."""
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.node_ids)
        for edge in self.edges:
            graph.add_edge(edge.foot, edge.head, key=edge.id)
        return graph

    def digraph(self) -> nx.MultiDiGraph:
        graph = nx.MultiDiGraph()
        graph.add_nodes_from(self.node_ids)
        for edge in self.edges:
            graph.add_edge(edge.foot, edge.head, key=edge.id)
        return graph

    def incidence_matrix(self) -> np.ndarray:
        """
        Dense incidence matrix with rows in `node_ids` order and columns in `edges`
        order: -1 at the foot, +1 at the head of every edge.
        """
        matrix = nx.incidence_matrix(
            self.digraph(),
            nodelist=self.node_ids,
            edgelist=[(e.foot, e.head, e.id) for e in self.edges],
            oriented=True,
        )
        return matrix.toarray()

    def with_nodes(self, nodes: dict[str, Node]) -> 'Network':
        """Returns a copy with the given nodes replaced."""
        return Network(
            tuple(nodes.get(node.id, node) for node in self.nodes), self.edges
        )

    def with_loads(self, loads: dict[str, float]) -> 'Network':
        return self.with_nodes(
            {
                node_id: replace(self.node(node_id), load=float(load))
                for node_id, load in loads.items()
            }
        )

    def with_momentum_mode(self, momentum_mode: str) -> 'Network':
        edges = tuple(
            replace(edge, pipe=replace(edge.pipe, momentum_mode=momentum_mode))
            if edge.pipe is not None
            else edge
            for edge in self.edges
        )
        return Network(self.nodes, edges)

    def without_edge(self, edge_id: str) -> 'Network':
        self.edge(edge_id)
        return Network(self.nodes, tuple(e for e in self.edges if e.id != edge_id))


@dataclass
class ValidationReport:
    """Violated invariants (empty if the network is valid) and the topology class."""

    violations: list[str]
    topology: Literal['tree', 'one-cycle'] | None = None

    @property
    def ok(self) -> bool:
        return not self.violations


def pressure_nodes(net: Network) -> list[Node]:
    return [
        node
        for node in sorted(net.nodes, key=lambda n: n.id)
        if node.pressure is not None
    ]


def is_mixed(net: Network) -> bool:
    """More than one pressure specification means supply loads are unknowns."""
    return len(pressure_nodes(net)) > 1


def _check_boundary_data(net: Network) -> list[str]:  # noqa: PLR0912
    violations = []
    mixed = is_mixed(net)
    for node in sorted(net.nodes, key=lambda n: n.id):
        if node.is_supply:
            if node.zeta is None:
                violations.append(f'supply "{node.id}" has no composition')
            elif not 0.0 <= node.zeta <= 1.0:
                violations.append(f'composition of supply "{node.id}" not in [0, 1]')
            if mixed and node.pressure is None:
                violations.append(f'supply "{node.id}" has no pressure in mixed mode')
            if not mixed and node.load >= 0:
                violations.append(f'supply "{node.id}" has a non-negative load')
        else:
            if node.zeta is not None:
                violations.append(f'demand "{node.id}" carries a composition')
            if node.load < 0:
                violations.append(f'demand "{node.id}" has a negative load')
            if mixed and node.pressure is not None:
                violations.append(
                    f'demand "{node.id}" carries a pressure in mixed mode'
                )
        if node.pressure is not None and not node.pressure > 0:
            violations.append(f'pressure at "{node.id}" is not positive')
    if not pressure_nodes(net):
        violations.append('no pressure specification')
    if not mixed:
        loads = np.array([node.load for node in net.nodes])
        total = float(loads.sum())
        if abs(total) > BALANCE_TOL * max(1.0, float(np.abs(loads).max(initial=0))):
            violations.append(f'unbalanced loads (sum = {total:.6g})')
    elif not any(node.is_supply for node in net.nodes):
        violations.append('no supply node')
    return violations


def validate(net: Network) -> ValidationReport:
    """
    Checks topology and boundary data of a network.

    Args:
        net (Network): The network.

    Returns:
        ValidationReport: The list of violated invariants and the topology class.
    """
    violations = []
    topology = None
    graph = net.graph()
    if not nx.is_connected(graph):
        violations.append('network is not connected')
    else:
        n_cycles = net.cyclomatic_number
        if n_cycles > 1:
            violations.append(f'cycle count > 1 ({n_cycles} independent cycles)')
        else:
            topology = 'tree' if n_cycles == 0 else 'one-cycle'
        if n_cycles == 1:
            cycle = find_cycle(net)
            violations.extend(
                f'compressor "{edge_id}" lies on the cycle'
                for edge_id in cycle.edges
                if net.edge(edge_id).is_compressor
            )
    for edge in sorted(net.edges, key=lambda e: e.id):
        if not edge.is_compressor:
            continue
        violations.extend(
            f'compressor "{edge.id}" runs parallel to edge "{other.id}"'
            for other in net.incident_edges(edge.foot)
            if other.id != edge.id and other.other(edge.foot) == edge.head
        )
    violations.extend(_check_boundary_data(net))
    return ValidationReport(violations=violations, topology=topology)


def _closing_edge(net: Network) -> tuple[Edge, list[Edge]]:
    """
    Builds a spanning forest in edge-id order; returns the first edge closing a
    cycle together with the forest edges.
    """
    components = nx.utils.UnionFind(net.node_ids)
    closing, tree = None, []
    for edge in sorted(net.edges, key=lambda e: e.id):
        if components[edge.foot] == components[edge.head]:
            if closing is None:
                closing = edge
            continue
        components.union(edge.foot, edge.head)
        tree.append(edge)
    return closing, tree


def find_cycle(net: Network) -> CycleInfo | None:
    """
    Extracts the unique cycle of a connected network.

    The traversal starts at the lexicographically smallest cycle node and proceeds
    towards its smaller-id cycle neighbour (ties between parallel edges are broken
    by edge id).

    Args:
        net (Network): A connected network.

    Returns:
        CycleInfo | None: The cycle, or `None` for trees.
    """
    n_cycles = net.cyclomatic_number
    if n_cycles > 1:
        raise MultipleCyclesError(f'The network has {n_cycles} independent cycles.')
    closing, tree = _closing_edge(net)
    if closing is None:
        return None

    forest = nx.Graph()
    forest.add_nodes_from(net.node_ids)
    forest.add_edges_from((e.foot, e.head, {'id': e.id}) for e in tree)
    path = nx.shortest_path(forest, closing.head, closing.foot)
    cycle_edges = {closing.id} | {
        forest.edges[u, v]['id'] for u, v in zip(path[:-1], path[1:])
    }

    def neighbours(node_id: str, used: set[str]) -> list[tuple[str, str]]:
        return sorted(
            (edge.other(node_id), edge.id)
            for edge in net.incident_edges(node_id)
            if edge.id in cycle_edges and edge.id not in used
        )

    start = min(path)
    nodes, edges, forward = [start], [], []
    current, used = start, set()
    while len(edges) < len(cycle_edges):
        nxt, edge_id = neighbours(current, used)[0]
        used.add(edge_id)
        edges.append(edge_id)
        forward.append(net.edge(edge_id).foot == current)
        if nxt != start:
            nodes.append(nxt)
        current = nxt
    return CycleInfo(nodes=tuple(nodes), edges=tuple(edges), forward=tuple(forward))


@dataclass(frozen=True)
class CutNetwork:
    """
    The tree obtained by cutting a cycle edge e = (f, h). The cut edge is replaced
    by `e_l` = (f, v_l), which keeps the id, kind and parameters of e, and the
    friction-free valve `e_r` = (v_r, h). The new nodes carry the parameter
    dependent loads b(v_l) = lambda, b(v_r) = -lambda and the composition mu.
    """

    network: Network
    cut_edge: Edge
    v_l: str
    v_r: str
    e_l: str
    e_r: str

    def with_parameters(self, lam: float, mu: float) -> Network:
        """
        The cut network with boundary data for the cut flow `lam` and the composition
        `mu` of the gas entering through the cut.
        """
        if lam > 0:
            left = Node(self.v_l, 'demand', lam)
            right = Node(self.v_r, 'supply', -lam, zeta=mu)
        elif lam < 0:
            left = Node(self.v_l, 'supply', lam, zeta=mu)
            right = Node(self.v_r, 'demand', -lam)
        else:
            # no flow through the cut, v_r still carries mu
            left = Node(self.v_l, 'demand', 0.0)
            right = Node(self.v_r, 'supply', 0.0, zeta=mu)
        return self.network.with_nodes({self.v_l: left, self.v_r: right})


def _fresh_id(taken: set[str], wanted: str) -> str:
    while wanted in taken:
        wanted += "'"
    return wanted


def cut_network(net: Network, cut_edge: str) -> CutNetwork:
    """
    Cuts the cycle of a one-cycle network at `cut_edge`.

    Args:
        net (Network): A one-cycle network.
        cut_edge (str): Id of a cycle edge.

    Returns:
        CutNetwork: The tree together with the labels of the new nodes and edges.
    """
    edge = net.edge(cut_edge)
    cycle = find_cycle(net)
    if cycle is None or cut_edge not in cycle.edges:
        raise NotACycleEdgeError(f'Edge "{cut_edge}" does not lie on a cycle.')
    node_ids = set(net.node_ids)
    v_l = _fresh_id(node_ids, f'{edge.id}:l')
    v_r = _fresh_id(node_ids | {v_l}, f'{edge.id}:r')
    e_r = _fresh_id(set(net.edge_ids), f'{edge.id}:r')
    nodes = net.nodes + (Node(v_l, 'demand', 0.0), Node(v_r, 'demand', 0.0))
    edges = tuple(e for e in net.edges if e.id != cut_edge) + (
        replace(edge, head=v_l),
        Edge(e_r, v_r, edge.head, 'valve'),
    )
    return CutNetwork(
        network=Network(nodes, edges),
        cut_edge=edge,
        v_l=v_l,
        v_r=v_r,
        e_l=edge.id,
        e_r=e_r,
    )


def flip_edge(net: Network, edge_id: str) -> Network:
    """
    Swaps foot and head of a pipe or valve. Flows of the flipped network map back by
    negating the flow of that edge.
    """
    edge = net.edge(edge_id)
    if edge.is_compressor:
        raise CannotFlipCompressorError(f'Compressor "{edge_id}" cannot be flipped.')
    return Network(
        net.nodes, tuple(e.flipped() if e.id == edge_id else e for e in net.edges)
    )


@dataclass(frozen=True)
class BoundaryData:
    """
    How the pressure level of a network is fixed: a single reference pressure
    (`reference` mode) or prescribed pressures at every supply with the supply loads
    as unknowns (`mixed` mode). Pressures are in Pa.
    """

    mode: Literal['reference', 'mixed']
    reference: tuple[str, float] | None = None
    supply_pressures: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_network(cls, net: Network) -> 'BoundaryData':
        specified = pressure_nodes(net)
        if len(specified) > 1:
            return cls(
                mode='mixed',
                supply_pressures={node.id: node.pressure for node in specified},
            )
        if not specified:
            raise ValueError('The network has no pressure specification.')
        node = specified[0]
        return cls(mode='reference', reference=(node.id, node.pressure))
