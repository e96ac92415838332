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
Entry points of the steady-state solver: dispatch by topology, the outer
iteration for prescribed supply pressures, and model comparisons.
"""

from collections.abc import Iterable, Mapping
from dataclasses import replace
from typing import (
    TYPE_CHECKING,
)

import numpy as np
import pandas as pd

from nomad_gas_networks.config import SolverSettings, resolve
from nomad_gas_networks.cycle import solve_cycle
from nomad_gas_networks.eos import CompressibilityModel
from nomad_gas_networks.errors import (
    GasNetworkError,
    HydraulicError,
    MultipleCyclesError,
    NetworkValidationError,
    NoConvergenceError,
    SignConditionFailedError,
    SupplyReversalError,
    ZeroThroughputError,
)
from nomad_gas_networks.network import BoundaryData, Network, validate
from nomad_gas_networks.steady import SteadyState, solve_tree
from nomad_gas_networks.utils import from_si, get_logger, natural_key

if TYPE_CHECKING:
    from structlog.stdlib import (
        BoundLogger,
    )

module_logger = get_logger(__name__)

# inner failures that a shorter outer step may cure
RECOVERABLE = (HydraulicError, SignConditionFailedError, ZeroThroughputError)
MIN_STEP = 1e-4


def _solve_fixed(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    reference: tuple[str, float],
    settings: SolverSettings | None,
    logger: 'BoundLogger',
) -> SteadyState:
    n_cycles = net.cyclomatic_number
    if n_cycles == 0:
        return solve_tree(net, model, reference, settings=settings, logger=logger)
    if n_cycles == 1:
        return solve_cycle(net, model, reference, settings=settings, logger=logger)
    raise MultipleCyclesError(f'The network has {n_cycles} independent cycles.')


def solve(  # noqa: PLR0913
    net: Network,
    model: CompressibilityModel,
    boundary: BoundaryData | None = None,
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
    check: bool = True,
) -> SteadyState:
    """
    Computes the steady state of a tree or one-cycle network.

    Args:
        net (Network): The network.
        model (CompressibilityModel): The compressibility model.
        boundary (BoundaryData, optional): How the pressure level is fixed. Derived
            from the node pressure specifications when omitted.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.
        check (bool, optional): Validate the network first. Defaults to True.

    Returns:
        SteadyState: The steady state with its residual report.
    """
    if logger is None:
        logger = module_logger
    if check:
        report = validate(net)
        if not report.ok:
            raise NetworkValidationError(
                'The network is not valid.', diagnostics=report.violations
            )
    if boundary is None:
        boundary = BoundaryData.from_network(net)
    if boundary.mode == 'mixed':
        return solve_mixed_bc(
            net, model, boundary.supply_pressures, settings=settings, logger=logger
        )
    return _solve_fixed(net, model, boundary.reference, settings, logger)


def _initial_loads(
    net: Network, supplies: list[str], demand: float
) -> list[np.ndarray]:
    """
    Starting loads of the free supplies in the order they are tried: the document
    loads when all supplies inject, an even split of the demand, and the even split
    shrunk so that the reference supply takes a growing share.
    """
    even = np.full(len(supplies) - 1, -demand / len(supplies))
    starts = [even * factor for factor in (1.0, 0.5, 0.25)]
    loads = [net.node(node_id).load for node_id in supplies]
    if all(load < 0 for load in loads):
        document = np.array(loads[1:], dtype=float)
        if not np.allclose(document, even):
            starts.insert(0, document)
    return starts


def solve_mixed_bc(  # noqa: PLR0913, PLR0915
    net: Network,
    model: CompressibilityModel,
    supply_pressures: Mapping[str, float] | None = None,
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> SteadyState:
    """
    Computes a steady state with prescribed pressures at all supplies and fixed
    demands. The supply with the smallest id takes the balance and anchors the
    pressure level; the loads of the other supplies are found by a quasi-Newton
    iteration on their pressure mismatch.

    Args:
        net (Network): The network; supply loads serve as the initial guess when all
            of them are negative.
        model (CompressibilityModel): The compressibility model.
        supply_pressures (Mapping[str, float], optional): Target pressure in Pa per
            supply. Defaults to the pressures stored at the supply nodes.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        SteadyState: The final inner state; `supply_inflows` holds the realized
            supply inflows.
    """
    if logger is None:
        logger = module_logger
    settings = resolve(settings)
    supplies = [node.id for node in net.supplies]
    if not supplies:
        raise ValueError('Prescribed supply pressures need at least one supply.')
    if supply_pressures is None:
        supply_pressures = {
            node.id: node.pressure
            for node in net.supplies
            if node.pressure is not None
        }
    missing = [node_id for node_id in supplies if node_id not in supply_pressures]
    if missing:
        raise ValueError(f'Supplies without pressure target: {missing}.')
    ref, free = supplies[0], supplies[1:]
    demand = sum(node.load for node in net.nodes if not node.is_supply)
    targets = np.array([supply_pressures[node_id] for node_id in free])

    def inner(x: np.ndarray) -> tuple[SteadyState, np.ndarray]:
        loads = dict(zip(free, x.tolist()))
        loads[ref] = -demand - float(x.sum())
        state = _solve_fixed(
            net.with_loads(loads),
            model,
            (ref, supply_pressures[ref]),
            settings,
            logger,
        )
        pressures = np.array([state.pressures[node_id] for node_id in free])
        return state, pressures - targets

    if not free:
        return inner(np.empty(0))[0]
    for x in _initial_loads(net, supplies, demand):
        try:
            state, r = inner(x)
            break
        except RECOVERABLE as exc:
            logger.debug(
                'initial supply loads failed', loads=x.tolist(), error=str(exc)
            )
    else:
        logger.error('no feasible initial supply loads')
        raise NoConvergenceError(
            'None of the initial supply loads gives a feasible steady state.',
            best_residual=float('inf'),
        )

    def jacobian(x: np.ndarray, r: np.ndarray) -> np.ndarray:
        jac = np.empty((len(free), len(free)))
        for j in range(len(free)):
            h = settings.mixed_fd_step * max(1.0, abs(x[j]))
            for step in (h, -h):
                shifted = x.copy()
                shifted[j] += step
                try:
                    jac[:, j] = (inner(shifted)[1] - r) / step
                    break
                except RECOVERABLE:
                    continue
            else:
                raise NoConvergenceError(
                    'The pressure mismatch cannot be differentiated at the current '
                    'supply loads.',
                    best_residual=float(np.abs(r).max()),
                )
        return jac

    jac = jacobian(x, r)
    best = float(np.abs(r).max())
    for iteration in range(settings.mixed_max_iter):
        residual = float(np.abs(r).max())
        best = min(best, residual)
        logger.debug(
            'supply pressure iteration', iteration=iteration, residual=residual
        )
        if residual <= settings.mixed_tol:
            break
        try:
            dx = -np.linalg.solve(jac, r)
        except np.linalg.LinAlgError:
            dx = -np.linalg.lstsq(jac, r, rcond=None)[0]
        t = 1.0
        while t >= MIN_STEP:
            try:
                trial_state, trial_r = inner(x + t * dx)
                if np.linalg.norm(trial_r) < np.linalg.norm(r):
                    break
            except RECOVERABLE as exc:
                logger.debug('outer step failed', step=t, error=str(exc))
            t *= settings.mixed_damping
        else:
            jac = jacobian(x, r)
            continue
        s = t * dx
        jac += np.outer(trial_r - r - jac @ s, s) / float(s @ s)
        x, state, r = x + s, trial_state, trial_r
    else:
        residual = float(np.abs(r).max())
        if residual > settings.mixed_tol:
            logger.error('supply pressures not matched', best_residual=best)
            raise NoConvergenceError(
                f'Supply pressures not matched after {settings.mixed_max_iter} '
                f'iterations (best residual {best:.6g} Pa).',
                best_residual=best,
            )

    reversed_supplies = [
        node_id for node_id, inflow in state.supply_inflows.items() if inflow <= 0
    ]
    if reversed_supplies:
        logger.error(
            'supply ends without inflow',
            nodes=reversed_supplies,
            inflows=state.supply_inflows,
        )
        raise SupplyReversalError(
            f'The supplies {reversed_supplies} take gas out of the network at '
            'their prescribed pressures.',
            inflows=dict(state.supply_inflows),
        )
    logger.info(
        'supply pressures matched',
        model=model.kind,
        inflows=state.supply_inflows,
    )
    return state


def compare_models(  # noqa: PLR0913
    net: Network,
    models: Mapping[str, CompressibilityModel],
    boundary: BoundaryData | None = None,
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> dict[str, SteadyState | GasNetworkError]:
    """
    Solves the same network with several compressibility models. A failing model
    is reported by its exception instead of aborting the others.

    Returns:
        dict[str, SteadyState | GasNetworkError]: Result or failure per model name.
    """
    if logger is None:
        logger = module_logger
    results = {}
    for name, model in models.items():
        try:
            results[name] = solve(
                net, model, boundary=boundary, settings=settings, logger=logger
            )
        except GasNetworkError as exc:
            logger.warning('model failed', model=name, error=str(exc))
            results[name] = exc
    return results


def outlet_nodes(net: Network) -> list[str]:
    """Demand nodes with a positive load, sorted by id."""
    outlets = [node.id for node in net.nodes if not node.is_supply and node.load > 0]
    return sorted(outlets, key=natural_key)


def hydrogen_sweep(  # noqa: PLR0913
    net: Network,
    models: Mapping[str, CompressibilityModel],
    fractions: Iterable[float],
    outlet: str | None = None,
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> pd.DataFrame:
    """
    Outlet pressure as a function of the injected hydrogen mass fraction.

    Every supply injects the same fraction. Failed solves give NaN.

    Args:
        net (Network): A network, typically a single pipe.
        models (Mapping[str, CompressibilityModel]): Models by column name.
        fractions (Iterable[float]): Hydrogen mass fractions in [0, 1].
        outlet (str, optional): The reported node. Defaults to the only demand node
            with positive load.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        pd.DataFrame: Column `eta` and one `<model>_bar` column per model.
    """
    if logger is None:
        logger = module_logger
    if outlet is None:
        outlets = outlet_nodes(net)
        if len(outlets) != 1:
            raise ValueError(f'Choose the outlet among {outlets}.')
        outlet = outlets[0]
    rows = []
    for eta in fractions:
        blended = net.with_nodes(
            {node.id: replace(node, zeta=float(eta)) for node in net.supplies}
        )
        row = {'eta': float(eta)}
        for name, model in models.items():
            try:
                state = solve(blended, model, settings=settings, logger=logger)
                row[f'{name}_bar'] = from_si(state.pressures[outlet], 'bar')
            except GasNetworkError as exc:
                logger.warning(
                    'sweep point failed', model=name, eta=eta, error=str(exc)
                )
                row[f'{name}_bar'] = np.nan
        rows.append(row)
    return pd.DataFrame(rows, columns=['eta', *(f'{name}_bar' for name in models)])
