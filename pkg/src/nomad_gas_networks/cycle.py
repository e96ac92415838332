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
Steady states of networks with one cycle.

The cycle is cut at an edge chosen from the modified loads of the cycle nodes so
that the cut flow lambda stays non-negative on its whole admissible interval. The
composition mu entering through the cut follows lambda as the fixed point of the
tree mixing, and lambda itself is the root of the pressure mismatch across the cut,
found by a grid pre-scan and bisection.
"""

from dataclasses import dataclass, field, replace
from typing import (
    TYPE_CHECKING,
)

import networkx as nx
import numpy as np

from nomad_gas_networks.config import SolverSettings, resolve
from nomad_gas_networks.eos import CompressibilityModel
from nomad_gas_networks.errors import (
    CutThroughCompressorError,
    HydraulicError,
    NotZeroSumError,
    SignConditionFailedError,
)
from nomad_gas_networks.gasprops import clip_fraction
from nomad_gas_networks.network import (
    CutNetwork,
    CycleInfo,
    Node,
    Network,
    cut_network,
    find_cycle,
    flip_edge,
)
from nomad_gas_networks.steady import (
    SteadyState,
    TreeSolution,
    assemble_state,
    propagate_composition,
    solve_tree_flows,
    solve_tree_parts,
)
from nomad_gas_networks.utils import get_logger

if TYPE_CHECKING:
    from structlog.stdlib import (
        BoundLogger,
    )

module_logger = get_logger(__name__)

ZERO_SUM_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ModifiedLoads:
    """Loads of the cycle nodes after absorbing their attached trees."""

    values: dict[str, float]

    @property
    def total(self) -> float:
        return float(sum(self.values.values()))


@dataclass(frozen=True)
class CutDecomposition:
    """
    The cut of a one-cycle network and the solution of the cut parameters.

    `order` lists the cycle nodes in post-cut numbering, starting at the head of the
    cut edge. `betas` and `reversed_betas` are keyed by the ids of the remaining
    cycle edges. The admissible cut flows are `interval` = (lambda-, lambda+).
    """

    cut_edge: str
    flipped: bool
    modified_loads: dict[str, float]
    order: tuple[str, ...]
    betas: dict[str, float]
    reversed_betas: dict[str, float]
    interval: tuple[float, float]
    lam: float | None = None
    mu: float | None = None
    iterations: int = 0
    g_value: float | None = None
    prescan: list[tuple[float, float]] = field(default_factory=list)


def off_cycle_flows(net: Network, cycle: CycleInfo) -> dict[str, float]:
    """
    Flows on the edges off the cycle. Every tree hanging at a cycle node is solved
    with that node absorbing the balance of the tree, so the flows do not depend on
    the cut flow.
    """
    cycle_edges = set(cycle.edges)
    cycle_nodes = set(cycle.nodes)
    forest = net.graph()
    forest.remove_edges_from(
        (e.foot, e.head, e.id) for e in net.edges if e.id in cycle_edges
    )
    flows = {}
    for component in nx.connected_components(forest):
        (root,) = component & cycle_nodes
        others = sum(net.node(node_id).load for node_id in component - {root})
        nodes = [
            net.node(node_id) for node_id in sorted(component) if node_id != root
        ]
        root_node = net.node(root)
        nodes.append(
            Node(root_node.id, root_node.kind, -others, zeta=root_node.zeta)
        )
        edges = [
            e
            for e in net.edges
            if e.id not in cycle_edges and e.foot in component
        ]
        if edges:
            flows.update(solve_tree_flows(Network(tuple(nodes), tuple(edges))))
    return flows


def modified_loads(
    net: Network, cycle: CycleInfo, flows: dict[str, float]
) -> ModifiedLoads:
    """
    b^P(v) = b(v) - sum of a(v, e) q_e over the off-cycle edges e at v.

    Args:
        net (Network): A one-cycle network.
        cycle (CycleInfo): Its cycle.
        flows (dict[str, float]): Flows on the off-cycle edges.

    Returns:
        ModifiedLoads: The modified loads in cycle order.
    """
    cycle_edges = set(cycle.edges)
    values = {}
    for node_id in cycle.nodes:
        attached = sum(
            edge.incidence(node_id) * flows[edge.id]
            for edge in net.incident_edges(node_id)
            if edge.id not in cycle_edges
        )
        values[node_id] = net.node(node_id).load - attached
    return ModifiedLoads(values=values)


def wrapped_partial_sums(y) -> int:
    """
    Start index from which all wrapped partial sums of a zero-sum sequence are
    non-negative.

    Args:
        y (Sequence[float]): A sequence summing to zero.

    Returns:
        int: The zero-based start index, one past the last minimizer of the prefix
            sums (wrapping around).
    """
    y = np.asarray(y, dtype=float)
    n = len(y)
    if n == 0:
        raise ValueError('The sequence is empty.')
    scale = max(1.0, float(np.abs(y).sum()))
    if abs(float(y.sum())) > ZERO_SUM_TOL * scale:
        raise NotZeroSumError(f'The sequence sums to {y.sum():.6g}, not zero.')
    prefix = np.cumsum(y)
    minimizers = np.flatnonzero(prefix <= prefix.min() + TIE_TOL * scale)
    return int(minimizers[-1] + 1) % n


def wrapped_sums(y, start: int) -> np.ndarray:
    """Partial sums of `y` starting at `start` and wrapping around."""
    return np.cumsum(np.roll(np.asarray(y, dtype=float), -start))


def select_cut_edge(
    net: Network, cycle: CycleInfo, loads: ModifiedLoads
) -> tuple[str, bool, int]:
    """
    Chooses the cycle edge in front of the start node of non-negative wrapped
    partial sums.

    Returns:
        tuple[str, bool, int]: The cut edge id, whether it has to be flipped to
            point towards the start node, and the start index in cycle order.
    """
    start = wrapped_partial_sums([loads.values[v] for v in cycle.nodes])
    index = (start - 1) % len(cycle)
    edge_id = cycle.edges[index]
    if net.edge(edge_id).is_compressor:
        raise CutThroughCompressorError(
            f'The cut edge "{edge_id}" is a compressor; compressors on the cycle '
            'are not supported.'
        )
    return edge_id, not cycle.forward[index], start


def _post_cut(cycle: CycleInfo, start: int) -> tuple[list[str], list[str]]:
    n = len(cycle)
    order = [cycle.nodes[(start + j) % n] for j in range(n)]
    edges = [cycle.edges[(start + i) % n] for i in range(n - 1)]
    return order, edges


def beta_values(
    cycle: CycleInfo, loads: ModifiedLoads, start: int
) -> tuple[dict[str, float], tuple[float, float]]:
    """
    Partial sums of the modified loads along the cut cycle and the admissible
    interval of cut flows.

    Args:
        cycle (CycleInfo): The cycle.
        loads (ModifiedLoads): Modified loads of the cycle nodes.
        start (int): Start index in cycle order, the head of the cut edge.

    Returns:
        tuple[dict[str, float], tuple[float, float]]: beta per remaining cycle edge
            and (lambda-, lambda+) = (min, max) of the betas and 0.
    """
    order, edges = _post_cut(cycle, start)
    sums = np.cumsum([loads.values[v] for v in order])
    betas = {edge_id: float(sums[i]) for i, edge_id in enumerate(edges)}
    support = [0.0, *betas.values()]
    return betas, (min(support), max(support))


def reversed_beta_values(
    cycle: CycleInfo, loads: ModifiedLoads, start: int
) -> dict[str, float]:
    """
    Partial sums of the modified loads taken from the foot side of the cut
    backwards; for balanced loads they are the negated betas.
    """
    order, edges = _post_cut(cycle, start)
    tail = np.cumsum([loads.values[v] for v in reversed(order)])[::-1]
    return {edge_id: float(tail[i + 1]) for i, edge_id in enumerate(edges)}


def cut_flows(
    net: Network, cycle: CycleInfo, betas: dict[str, float], start: int, lam: float
) -> dict[str, float]:
    """
    Flows on the remaining cycle edges for the cut flow `lam`, in edge
    orientation. The flow in post-cut traversal direction is lam - beta.
    """
    order, edges = _post_cut(cycle, start)
    flows = {}
    for i, edge_id in enumerate(edges):
        along = lam - betas[edge_id]
        flows[edge_id] = along if net.edge(edge_id).foot == order[i] else -along
    return flows


def mu_eta(cut: CutNetwork, lam: float, logger: 'BoundLogger' = None) -> float:
    """
    The composition of the gas entering through the cut that reproduces itself at
    the other side of the cut.

    The mixed composition at the receiving cut node is affine in mu, so the fixed
    point follows from two composition sweeps.

    Args:
        cut (CutNetwork): The cut network.
        lam (float): The cut flow.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        float: mu, the hydrogen mass fraction at the receiving cut node.
    """
    target = cut.v_l if lam >= 0 else cut.v_r
    net0 = cut.with_parameters(lam, 0.0)
    flows = solve_tree_flows(net0, logger=logger)
    eta0 = propagate_composition(net0, flows, logger=logger)[0][target]
    net1 = cut.with_parameters(lam, 1.0)
    eta1 = propagate_composition(net1, flows, logger=logger)[0][target]
    slope = eta1 - eta0
    if slope < 1.0 - TIE_TOL:
        return clip_fraction(eta0 / (1.0 - slope))
    return clip_fraction(eta0)


@dataclass
class _CutEvaluation:
    lam: float
    mu: float
    g: float
    parts: TreeSolution | None

    @property
    def feasible(self) -> bool:
        return self.parts is not None


def _evaluate(  # noqa: PLR0913
    cut: CutNetwork,
    model: CompressibilityModel,
    reference: tuple[str, float],
    lam: float,
    settings: SolverSettings,
    logger: 'BoundLogger',
) -> _CutEvaluation:
    mu = mu_eta(cut, lam, logger=logger)
    tree = cut.with_parameters(lam, mu)
    parts = solve_tree_parts(tree, model, reference, settings=settings, logger=logger)
    g = parts.pressures[cut.v_r] - parts.pressures[cut.v_l]
    return _CutEvaluation(lam=lam, mu=mu, g=g, parts=parts)


def _bracket(
    scan: list[_CutEvaluation], tol: float
) -> tuple[_CutEvaluation, _CutEvaluation | None, int]:
    """Leftmost root or sign change of the pre-scan and the number of changes."""
    changes = sum(
        1 for left, right in zip(scan[:-1], scan[1:]) if left.g * right.g < 0
    )
    for i, left in enumerate(scan):
        if abs(left.g) <= tol:
            return left, None, changes
        if i + 1 < len(scan) and left.g * scan[i + 1].g < 0:
            return left, scan[i + 1], changes
    raise RuntimeError('The pre-scan holds no sign change.')


def _prescan(attempt, grid) -> list[_CutEvaluation]:
    """
    Evaluates the cut pressure mismatch on a grid of cut flows.

    Infeasible cut flows sit at the ends of the interval: before the first feasible
    point the pressure behind the cut collapses (g = -inf), after the last one the
    pressure in front of it does (g = +inf). Infeasible points in between are
    dropped.
    """
    results = [(float(lam), attempt(float(lam))) for lam in grid]
    feasible = [i for i, (_, e) in enumerate(results) if e is not None]
    if not feasible:
        raise HydraulicError(
            'No cut flow of the admissible interval gives a feasible tree.'
        )
    first, last = feasible[0], feasible[-1]
    scan = []
    for i, (lam, evaluation) in enumerate(results):
        if evaluation is not None:
            scan.append(evaluation)
        elif i < first:
            scan.append(_CutEvaluation(lam, float('nan'), -np.inf, None))
        elif i > last:
            scan.append(_CutEvaluation(lam, float('nan'), np.inf, None))
    return scan


def _midpoint(
    attempt, left: _CutEvaluation, right: _CutEvaluation
) -> _CutEvaluation:
    """Bisection point; an infeasible one takes the sign of its infeasible end."""
    lam = 0.5 * (left.lam + right.lam)
    evaluation = attempt(lam)
    if evaluation is not None:
        return evaluation
    for end in (left, right):
        if not end.feasible:
            return _CutEvaluation(lam, float('nan'), end.g, None)
    raise HydraulicError(
        f'The cut flow {lam:.6g} gives no feasible tree between two feasible ones.'
    )


def _map_back(
    net: Network,
    cut: CutNetwork,
    flipped: bool,
    parts: TreeSolution,
) -> TreeSolution:
    flows = {edge.id: parts.flows[edge.id] for edge in net.edges}
    edge_eta = {edge.id: parts.edge_eta[edge.id] for edge in net.edges}
    if flipped:
        flows[cut.e_l] = -flows[cut.e_l]
    return TreeSolution(
        flows=flows,
        edge_eta=edge_eta,
        node_eta={node_id: parts.node_eta[node_id] for node_id in net.node_ids},
        pressures={node_id: parts.pressures[node_id] for node_id in net.node_ids},
    )


def decompose(
    net: Network, logger: 'BoundLogger' = None
) -> tuple[CutDecomposition, Network]:
    """
    Selects the cut edge of a one-cycle network and computes the modified loads,
    betas and the admissible interval of cut flows.

    Returns:
        tuple[CutDecomposition, Network]: The decomposition (without lambda and mu)
            and the network with the cut edge oriented towards the start node.
    """
    if logger is None:
        logger = module_logger
    cycle = find_cycle(net)
    if cycle is None:
        raise ValueError('The network has no cycle.')
    loads = modified_loads(net, cycle, off_cycle_flows(net, cycle))
    edge_id, flip, start = select_cut_edge(net, cycle, loads)
    work = flip_edge(net, edge_id) if flip else net
    betas, interval = beta_values(cycle, loads, start)
    order, _ = _post_cut(cycle, start)
    decomposition = CutDecomposition(
        cut_edge=edge_id,
        flipped=flip,
        modified_loads=dict(loads.values),
        order=tuple(order),
        betas=betas,
        reversed_betas=reversed_beta_values(cycle, loads, start),
        interval=interval,
    )
    logger.debug(
        'cycle decomposed',
        cut_edge=edge_id,
        flipped=flip,
        interval=interval,
    )
    return decomposition, work


def solve_cycle(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    reference: tuple[str, float],
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> SteadyState:
    """
    Computes the steady state of a network with exactly one cycle.

    Args:
        net (Network): A valid one-cycle network with balanced loads.
        model (CompressibilityModel): The compressibility model.
        reference (tuple[str, float]): Reference node id and pressure in Pa.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        SteadyState: The state on the original network; its `cut` field holds the
            cut decomposition with the solved lambda and mu.
    """
    if logger is None:
        logger = module_logger
    settings = resolve(settings)
    decomposition, work = decompose(net, logger=logger)
    cut = cut_network(work, decomposition.cut_edge)
    lam_minus, lam_plus = decomposition.interval
    tol = settings.cut_pressure_tol

    def evaluate(lam: float) -> _CutEvaluation:
        return _evaluate(cut, model, reference, lam, settings, logger)

    def attempt(lam: float) -> _CutEvaluation | None:
        try:
            return evaluate(lam)
        except HydraulicError as exc:
            logger.debug('cut flow infeasible', lam=lam, error=str(exc))
            return None

    iterations, scan = 0, []
    if lam_plus - lam_minus <= 0:
        best = evaluate(lam_minus)
    else:
        scan = _prescan(
            attempt, np.linspace(lam_minus, lam_plus, settings.prescan_points)
        )
        g_lower, g_upper = scan[0].g, scan[-1].g
        if g_lower > tol or g_upper < -tol:
            logger.error(
                'sign condition failed', g_lower=g_lower, g_upper=g_upper
            )
            raise SignConditionFailedError(
                f'The cut pressure mismatch has the same sign at both ends of '
                f'[{lam_minus:.6g}, {lam_plus:.6g}]: g = {g_lower:.6g} Pa and '
                f'{g_upper:.6g} Pa.',
                g_lower=g_lower,
                g_upper=g_upper,
            )
        left, right, changes = _bracket(scan, tol)
        if changes > 1:
            logger.warning(
                'several sign changes of the cut pressure mismatch; taking the '
                'leftmost',
                sign_changes=changes,
            )
        best = left
        if right is not None:
            width = settings.cut_width_factor * max(1.0, lam_plus)
            for iterations in range(1, settings.cut_max_iter + 1):
                best = _midpoint(attempt, left, right)
                logger.debug('bisection', lam=best.lam, g=best.g)
                if abs(best.g) <= tol or right.lam - left.lam <= 2 * width:
                    break
                if np.sign(best.g) == np.sign(left.g):
                    left = best
                else:
                    right = best
            else:
                logger.warning('bisection budget exhausted', g=best.g)
            if not best.feasible:
                best = min(
                    (e for e in (left, right) if e.feasible), key=lambda e: abs(e.g)
                )

    parts = best.parts
    cut_residuals = (
        abs(parts.pressures[cut.v_r] - parts.pressures[cut.v_l]),
        abs(parts.node_eta[cut.v_r] - parts.node_eta[cut.v_l]),
    )
    solved = replace(
        decomposition,
        lam=best.lam,
        mu=best.mu,
        iterations=iterations,
        g_value=best.g,
        prescan=[(e.lam, e.g) for e in scan],
    )
    state = assemble_state(
        net,
        model,
        _map_back(net, cut, decomposition.flipped, parts),
        cut=solved,
        cut_residuals=cut_residuals,
    )
    logger.info(
        'cycle solved',
        model=model.kind,
        cut_edge=solved.cut_edge,
        lam=solved.lam,
        mu=solved.mu,
        iterations=iterations,
    )
    return state
