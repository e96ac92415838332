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
Steady states of tree networks: flows by leaf elimination, compositions by
upstream mixing, pressures by propagation from a reference node, and the residual
checks every computed state carries.
"""

import heapq
from collections import deque
from dataclasses import dataclass, field, replace
from typing import (
    TYPE_CHECKING,
)

import networkx as nx
import numpy as np

from nomad_gas_networks.config import SolverSettings, resolve
from nomad_gas_networks.eos import (
    CompressibilityModel,
    PotentialPoint,
    is_subsonic,
    potential_f,
)
from nomad_gas_networks.errors import (
    CompressorBackflowError,
    HydraulicError,
    UnbalancedError,
    ZeroThroughputError,
)
from nomad_gas_networks.gasprops import clip_fraction
from nomad_gas_networks.network import BALANCE_TOL, Edge, Network
from nomad_gas_networks.pipeflow import (
    EdgeState,
    compressor_in,
    compressor_out,
    downstream_pressure,
    friction_rhs,
    upstream_pressure,
)
from nomad_gas_networks.utils import get_logger

if TYPE_CHECKING:
    from structlog.stdlib import (
        BoundLogger,
    )

    from nomad_gas_networks.cycle import CutDecomposition

module_logger = get_logger(__name__)

FLOW_TOL = 1e-12


@dataclass(frozen=True)
class Residuals:
    """
    Maximum violations of the steady-state equations.

    `pressure_relation` is relative to max(|F|, 1) at the pipe ends, `coupling`
    is the absolute pressure defect of compressors and valves in Pa. The cut fields
    are only set for states obtained by cutting a cycle.
    """

    mass_balance: float
    pressure_relation: float
    coupling: float
    mixing: float
    min_compressor_flow: float | None = None
    cut_pressure: float | None = None
    cut_composition: float | None = None

    def as_dict(self) -> dict[str, float | None]:
        return {
            'mass_balance': self.mass_balance,
            'pressure_relation': self.pressure_relation,
            'coupling': self.coupling,
            'mixing': self.mixing,
            'min_compressor_flow': self.min_compressor_flow,
            'cut_pressure': self.cut_pressure,
            'cut_composition': self.cut_composition,
        }


@dataclass(frozen=True)
class TreeSolution:
    flows: dict[str, float]
    edge_eta: dict[str, float]
    node_eta: dict[str, float]
    pressures: dict[str, float]


@dataclass(frozen=True)
class SteadyState:
    """
    A steady state of a network: flows in kg/(m^2 s) (positive from foot to head),
    hydrogen mass fractions at edges and nodes, pressures in Pa, the final nodal
    loads and the residual report.
    """

    flows: dict[str, float]
    edge_eta: dict[str, float]
    pressures: dict[str, float]
    node_eta: dict[str, float]
    loads: dict[str, float]
    residuals: Residuals
    subsonic_ok: bool
    cut: 'CutDecomposition | None' = None
    supply_inflows: dict[str, float] = field(default_factory=dict)


def solve_tree_flows(
    net: Network, logger: 'BoundLogger' = None
) -> dict[str, float]:
    """
    Solves the mass balance of a tree by repeatedly eliminating the leaf with the
    smallest id.

    Args:
        net (Network): A connected tree with balanced loads.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        dict[str, float]: The unique flow of every edge.
    """
    if logger is None:
        logger = module_logger
    if net.cyclomatic_number != 0 or not nx.is_connected(net.graph()):
        raise ValueError('Flows by leaf elimination need a connected tree.')
    loads = np.array([node.load for node in net.nodes])
    total = float(loads.sum())
    if abs(total) > BALANCE_TOL * max(1.0, float(np.abs(loads).max(initial=0))):
        raise UnbalancedError(f'The loads do not sum to zero (sum = {total:.6g}).')

    residual = dict(net.loads)
    degree = {node_id: len(net.incident_edges(node_id)) for node_id in net.node_ids}
    removed_edges: set[str] = set()
    removed_nodes: set[str] = set()
    leaves = [node_id for node_id, d in degree.items() if d == 1]
    heapq.heapify(leaves)
    flows = {}
    while len(removed_nodes) < len(degree) - 1:
        leaf = heapq.heappop(leaves)
        if leaf in removed_nodes or degree[leaf] != 1:
            continue
        (edge,) = (e for e in net.incident_edges(leaf) if e.id not in removed_edges)
        flows[edge.id] = residual[leaf] * edge.incidence(leaf)
        other = edge.other(leaf)
        residual[other] -= edge.incidence(other) * flows[edge.id]
        removed_edges.add(edge.id)
        removed_nodes.add(leaf)
        degree[other] -= 1
        if degree[other] == 1:
            heapq.heappush(leaves, other)
    logger.debug('tree flows solved', n_edges=len(flows))
    return {edge.id: flows[edge.id] for edge in net.edges}


def _flow_digraph(net: Network, flows: dict[str, float]) -> nx.MultiDiGraph:
    graph = nx.MultiDiGraph()
    graph.add_nodes_from(net.node_ids)
    for edge in net.edges:
        if flows[edge.id] >= 0:
            graph.add_edge(edge.foot, edge.head, key=edge.id)
        else:
            graph.add_edge(edge.head, edge.foot, key=edge.id)
    return graph


def _inflow(net: Network, node_id: str, flows: dict[str, float], edge_eta):
    """Mass and hydrogen mass entering a node through edges and its supply."""
    node = net.node(node_id)
    mass, hydrogen = 0.0, 0.0
    for edge in net.incident_edges(node_id):
        entering = edge.incidence(node_id) * flows[edge.id]
        if entering > 0:
            mass += entering
            hydrogen += edge_eta[edge.id] * entering
    supplied = max(-node.load, 0.0)
    if node.is_supply and supplied > 0:
        mass += supplied
        hydrogen += (node.zeta or 0.0) * supplied
    return mass, hydrogen


def propagate_composition(
    net: Network, flows: dict[str, float], logger: 'BoundLogger' = None
) -> tuple[dict[str, float], dict[str, float]]:
    """
    Mixes compositions in the flow direction: every node takes the flow weighted
    mean of its inflows and every edge carries the composition of its upstream node.

    A node without inflow takes the composition of its first zero-flow incoming
    edge, otherwise its supply composition, otherwise 0.

    Args:
        net (Network): A tree.
        flows (dict[str, float]): Edge flows.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        tuple[dict[str, float], dict[str, float]]: Node and edge mass fractions.
    """
    if logger is None:
        logger = module_logger
    graph = _flow_digraph(net, flows)
    scale = max(1.0, max((abs(q) for q in flows.values()), default=0.0))
    node_eta: dict[str, float] = {}
    edge_eta: dict[str, float] = {}
    for node_id in nx.lexicographical_topological_sort(graph):
        mass, hydrogen = _inflow(net, node_id, flows, edge_eta)
        if mass > 0:
            eta = clip_fraction(hydrogen / mass)
        else:
            leaving = [
                edge.id
                for edge in net.incident_edges(node_id)
                if -edge.incidence(node_id) * flows[edge.id] > FLOW_TOL * scale
            ]
            if leaving:
                raise ZeroThroughputError(
                    f'Node "{node_id}" has outflow through {leaving} but no inflow.'
                )
            entering = sorted(key for _, _, key in graph.in_edges(node_id, keys=True))
            node = net.node(node_id)
            if entering:
                eta = edge_eta[entering[0]]
            elif node.is_supply and node.zeta is not None:
                eta = node.zeta
            else:
                eta = 0.0
        node_eta[node_id] = eta
        for _, _, key in graph.out_edges(node_id, keys=True):
            edge_eta[key] = eta
    logger.debug('compositions propagated', n_nodes=len(node_eta))
    return (
        {node_id: node_eta[node_id] for node_id in net.node_ids},
        {edge.id: edge_eta[edge.id] for edge in net.edges},
    )


def _edge_pressure(  # noqa: PLR0913
    model: CompressibilityModel,
    edge: Edge,
    q: float,
    eta: float,
    known: str,
    p_known: float,
    settings: SolverSettings,
) -> float:
    if edge.is_compressor:
        if known == edge.foot:
            return compressor_out(edge.gamma, p_known)
        return compressor_in(edge.gamma, p_known)
    if edge.kind == 'valve':
        return p_known
    state = EdgeState(q=q, eta=eta)
    try:
        if known == edge.foot:
            return downstream_pressure(
                model, model.pair, edge.pipe, state, p_known, settings
            )
        return upstream_pressure(model, model.pair, edge.pipe, state, p_known, settings)
    except HydraulicError as exc:
        raise exc.for_edge(edge.id) from exc


def propagate_pressure(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    flows: dict[str, float],
    edge_eta: dict[str, float],
    reference: tuple[str, float],
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> dict[str, float]:
    """
    Propagates pressures through a tree by breadth-first search from the
    reference node, visiting neighbours in edge-id order.

    Args:
        net (Network): A connected tree.
        model (CompressibilityModel): The compressibility model.
        flows (dict[str, float]): Edge flows.
        edge_eta (dict[str, float]): Edge mass fractions.
        reference (tuple[str, float]): Reference node id and its pressure in Pa.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        dict[str, float]: Node pressures in Pa.
    """
    if logger is None:
        logger = module_logger
    settings = resolve(settings)
    for edge in net.edges:
        if edge.is_compressor and flows[edge.id] < -FLOW_TOL:
            raise CompressorBackflowError(
                f'Compressor flow {flows[edge.id]:.6g} is negative.', edge_id=edge.id
            )
    ref_node, ref_pressure = reference
    pressures = {ref_node: float(ref_pressure)}
    queue = deque([ref_node])
    while queue:
        current = queue.popleft()
        for edge in net.incident_edges(current):
            nxt = edge.other(current)
            if nxt in pressures:
                continue
            pressures[nxt] = _edge_pressure(
                model,
                edge,
                flows[edge.id],
                edge_eta[edge.id],
                current,
                pressures[current],
                settings,
            )
            queue.append(nxt)
    logger.debug('pressures propagated', reference=ref_node)
    return {node_id: pressures[node_id] for node_id in net.node_ids}


def compute_residuals(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    flows: dict[str, float],
    edge_eta: dict[str, float],
    node_eta: dict[str, float],
    pressures: dict[str, float],
) -> tuple[Residuals, bool]:
    """
    Evaluates mass balance, pressure relations, compressor and valve couplings,
    mixing and the subsonic condition for a computed state.

    Returns:
        tuple[Residuals, bool]: The residual report and whether every pipe state is
            subsonic at both ends.
    """
    q = np.array([flows[edge.id] for edge in net.edges])
    b = np.array([net.node(node_id).load for node_id in net.node_ids])
    mass_balance = float(np.abs(net.incidence_matrix() @ q - b).max(initial=0.0))

    relation, coupling, subsonic_ok = 0.0, 0.0, True
    compressor_flows = []
    for edge in net.edges:
        p_foot, p_head = pressures[edge.foot], pressures[edge.head]
        if edge.is_compressor:
            coupling = max(coupling, abs(p_head - edge.gamma * p_foot))
            compressor_flows.append(flows[edge.id])
            continue
        if edge.kind == 'valve' or edge.pipe.is_frictionless:
            coupling = max(coupling, abs(p_head - p_foot))
            continue
        eta, mode = edge_eta[edge.id], edge.pipe.momentum_mode
        foot = PotentialPoint(eta, flows[edge.id], p_foot)
        head = PotentialPoint(eta, flows[edge.id], p_head)
        f_foot = potential_f(model, foot, mode)
        f_head = potential_f(model, head, mode)
        rhs = friction_rhs(model.pair, edge.pipe, EdgeState(flows[edge.id], eta))
        defect = abs(f_head - f_foot - rhs * edge.pipe.length)
        relation = max(relation, defect / max(abs(f_foot), abs(f_head), 1.0))
        subsonic_ok &= is_subsonic(model, foot) and is_subsonic(model, head)

    mixing = 0.0
    for node_id in net.node_ids:
        mass, hydrogen = _inflow(net, node_id, flows, edge_eta)
        if mass > 0:
            mixing = max(mixing, abs(node_eta[node_id] - hydrogen / mass))

    residuals = Residuals(
        mass_balance=mass_balance,
        pressure_relation=relation,
        coupling=coupling,
        mixing=mixing,
        min_compressor_flow=min(compressor_flows) if compressor_flows else None,
    )
    return residuals, bool(subsonic_ok)


def solve_tree_parts(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    reference: tuple[str, float],
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> TreeSolution:
    """Flows, compositions and pressures of a tree, without residuals."""
    flows = solve_tree_flows(net, logger=logger)
    node_eta, edge_eta = propagate_composition(net, flows, logger=logger)
    pressures = propagate_pressure(
        net, model, flows, edge_eta, reference, settings=settings, logger=logger
    )
    return TreeSolution(
        flows=flows, edge_eta=edge_eta, node_eta=node_eta, pressures=pressures
    )


def assemble_state(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    parts: TreeSolution,
    cut: 'CutDecomposition | None' = None,
    cut_residuals: tuple[float, float] | None = None,
) -> SteadyState:
    """Attaches the residual report to a solution of `net`."""
    residuals, subsonic_ok = compute_residuals(
        net,
        model,
        parts.flows,
        parts.edge_eta,
        parts.node_eta,
        parts.pressures,
    )
    if cut_residuals is not None:
        residuals = replace(
            residuals,
            cut_pressure=cut_residuals[0],
            cut_composition=cut_residuals[1],
        )
    return SteadyState(
        flows=parts.flows,
        edge_eta=parts.edge_eta,
        pressures=parts.pressures,
        node_eta=parts.node_eta,
        loads=dict(net.loads),
        residuals=residuals,
        subsonic_ok=subsonic_ok,
        cut=cut,
        supply_inflows={node.id: -node.load for node in net.supplies},
    )


def solve_tree(
    net: Network,
    model: CompressibilityModel,
    reference: tuple[str, float],
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> SteadyState:
    """
    Computes the steady state of a tree network.

    Args:
        net (Network): A connected tree with balanced loads.
        model (CompressibilityModel): The compressibility model.
        reference (tuple[str, float]): Reference node id and pressure in Pa.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        SteadyState: The state with its residual report.
    """
    if logger is None:
        logger = module_logger
    parts = solve_tree_parts(net, model, reference, settings=settings, logger=logger)
    state = assemble_state(net, model, parts)
    logger.info(
        'tree solved',
        model=model.kind,
        mass_balance=state.residuals.mass_balance,
        subsonic=state.subsonic_ok,
    )
    return state
