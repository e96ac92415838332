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
Single-edge hydraulics: the implicit pressure relation along a pipe, its monotone
inversion, pressure profiles and the compressor relation.
"""

from dataclasses import dataclass
from typing import (
    TYPE_CHECKING,
)

import numpy as np
from scipy.optimize import brentq

from nomad_gas_networks.config import SolverSettings, resolve
from nomad_gas_networks.eos import (
    CompressibilityModel,
    MomentumMode,
    PotentialPoint,
    is_subsonic,
    potential_dfdp,
    potential_f,
    sonic_margin,
)
from nomad_gas_networks.errors import NoBracketError, SubsonicViolationError
from nomad_gas_networks.gasprops import GasPair, check_fraction
from nomad_gas_networks.utils import get_logger

if TYPE_CHECKING:
    from structlog.stdlib import (
        BoundLogger,
    )

module_logger = get_logger(__name__)


@dataclass(frozen=True)
class PipeParams:
    """
    Geometry and friction of a pipe: length and diameter in m, Darcy friction
    factor, and the momentum mode used for its pressure relation.
    """

    length: float
    diameter: float
    friction: float
    momentum_mode: MomentumMode = 'full'

    def __post_init__(self):
        if self.length < 0:
            raise ValueError('The pipe length must not be negative.')
        if not self.diameter > 0:
            raise ValueError('The pipe diameter must be positive.')
        if self.friction < 0:
            raise ValueError('The friction factor must not be negative.')
        if self.momentum_mode not in ('full', 'semilinear'):
            raise ValueError(f'Unknown momentum mode "{self.momentum_mode}".')

    @property
    def is_frictionless(self) -> bool:
        return self.friction == 0 or self.length == 0


@dataclass(frozen=True)
class EdgeState:
    """Mass flux density q in kg/(m^2 s) and hydrogen mass fraction of an edge."""

    q: float
    eta: float

    def __post_init__(self):
        if not np.isfinite(self.q):
            raise ValueError('The flow must be finite.')
        check_fraction(self.eta)


def friction_rhs(pair: GasPair, pipe: PipeParams, state: EdgeState) -> float:
    """
    Change of the potential per metre of pipe, -(lambda/2D) (RT/M) q|q|.

    Args:
        pair (GasPair): The gas constituents.
        pipe (PipeParams): The pipe.
        state (EdgeState): Flow and composition on the pipe.

    Returns:
        float: The slope in Pa^2/m.
    """
    if pipe.friction == 0 or state.q == 0:
        return 0.0
    return (
        -(pipe.friction / (2.0 * pipe.diameter))
        * pair.specific_gas_constant(state.eta)
        * state.q
        * abs(state.q)
    )


def lowest_subsonic_pressure(
    model: CompressibilityModel,
    eta: float,
    q: float,
    bracket: tuple[float, float],
) -> float:
    """
    The smallest pressure of the bracket at which the state (eta, q, p) is subsonic.

    Args:
        model (CompressibilityModel): The compressibility model.
        eta (float): Hydrogen mass fraction.
        q (float): Mass flux density in kg/(m^2 s).
        bracket (tuple[float, float]): The pressure bracket in Pa.

    Returns:
        float: A subsonic pressure just above the sonic point, or the lower end of
        the bracket if it is already subsonic.
    """
    p_lo, p_hi = bracket
    if is_subsonic(model, PotentialPoint(eta, q, p_lo)):
        return p_lo
    if not is_subsonic(model, PotentialPoint(eta, q, p_hi)):
        raise SubsonicViolationError(
            f'No subsonic pressure below {p_hi:.6g} Pa for q = {q:.6g}.'
        )
    p_sonic = brentq(
        lambda p: sonic_margin(model, PotentialPoint(eta, q, p)),
        p_lo,
        p_hi,
        xtol=1e-12 * p_hi,
    )
    p = p_sonic
    while not is_subsonic(model, PotentialPoint(eta, q, p)):
        p = p * (1.0 + 1e-10) + 1e-6
    return p


def invert_potential(  # noqa: PLR0913
    model: CompressibilityModel,
    eta: float,
    q: float,
    y: float,
    bracket: tuple[float, float] | None = None,
    momentum_mode: MomentumMode = 'full',
    settings: SolverSettings | None = None,
    logger: 'BoundLogger' = None,
) -> float:
    """
    Solves F(eta, q, p) = y for the pressure on the subsonic branch.

    A safeguarded Newton iteration (Newton steps leaving the current bracket are
    replaced by bisection steps) is followed by plain bisection if the Newton
    budget is exhausted. Convergence is measured on the potential.

    Args:
        model (CompressibilityModel): The compressibility model.
        eta (float): Hydrogen mass fraction.
        q (float): Mass flux density in kg/(m^2 s).
        y (float): Target potential in Pa^2.
        bracket (tuple[float, float], optional): Pressure bracket in Pa. Defaults
            to the bracket of the settings.
        momentum_mode (str, optional): `full` or `semilinear`.
        settings (SolverSettings, optional): Solver settings.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        float: The pressure in Pa.
    """
    settings = resolve(settings)
    logger = logger or module_logger
    p_lo, p_hi = bracket if bracket is not None else (settings.p_lo, settings.p_hi)
    clipped = False
    if momentum_mode == 'full' and q != 0:
        p_sub = lowest_subsonic_pressure(model, eta, q, (p_lo, p_hi))
        clipped = p_sub > p_lo
        p_lo = p_sub

    def residual(p: float) -> float:
        return potential_f(model, PotentialPoint(eta, q, p), momentum_mode) - y

    tol = max(settings.f_rtol * abs(y), settings.f_atol)
    f_lo = residual(p_lo)
    f_hi = residual(p_hi)
    if abs(f_lo) <= tol:
        return p_lo
    if abs(f_hi) <= tol:
        return p_hi
    if f_lo > 0:
        if clipped:
            raise SubsonicViolationError(
                'The pressure relation has no solution before the flow turns sonic.'
            )
        raise NoBracketError(
            f'Target potential lies below the bracket [{p_lo:.6g}, {p_hi:.6g}] Pa.'
        )
    if f_hi < 0:
        raise NoBracketError(
            f'Target potential lies above the bracket [{p_lo:.6g}, {p_hi:.6g}] Pa.'
        )

    a, b = p_lo, p_hi
    p = a - f_lo * (b - a) / (f_hi - f_lo)
    for _ in range(settings.newton_max_iter):
        f = residual(p)
        slope = potential_dfdp(model, PotentialPoint(eta, q, p), momentum_mode)
        if abs(f) <= tol:
            # one more step to polish the converged iterate
            polished = p - f / slope if slope > 0 else p
            return polished if a <= polished <= b else p
        if f < 0:
            a = p
        else:
            b = p
        step = p - f / slope if slope > 0 else np.nan
        p = step if a < step < b else 0.5 * (a + b)

    logger.debug(f'Newton budget exhausted at eta={eta:.4g}, q={q:.4g}; bisecting.')
    for _ in range(settings.bisection_max_iter):
        p = 0.5 * (a + b)
        f = residual(p)
        if abs(f) <= tol or b - a <= 4 * np.finfo(float).eps * b:
            return p
        if f < 0:
            a = p
        else:
            b = p
    raise NoBracketError(f'Inversion of the potential did not converge for y={y:.6g}.')


def _target_potential(
    model: CompressibilityModel,
    pipe: PipeParams,
    state: EdgeState,
    p: float,
) -> float:
    point = PotentialPoint(state.eta, state.q, p)
    if pipe.momentum_mode == 'full' and not is_subsonic(model, point):
        raise SubsonicViolationError(
            f'The state q={state.q:.6g} at p={p:.6g} Pa is not subsonic.'
        )
    return potential_f(model, point, pipe.momentum_mode)


def downstream_pressure(  # noqa: PLR0913
    model: CompressibilityModel,
    pair: GasPair,
    pipe: PipeParams,
    state: EdgeState,
    p_start: float,
    settings: SolverSettings | None = None,
) -> float:
    """
    Pressure at the head of a pipe given the pressure at its foot.

    Args:
        model (CompressibilityModel): The compressibility model.
        pair (GasPair): The gas constituents.
        pipe (PipeParams): The pipe.
        state (EdgeState): Flow and composition, flow positive from foot to head.
        p_start (float): Pressure at the foot in Pa.
        settings (SolverSettings, optional): Solver settings.

    Returns:
        float: Pressure at the head in Pa.
    """
    if p_start <= 0:
        raise ValueError('The inlet pressure must be positive.')
    if pipe.is_frictionless or state.q == 0:
        return p_start
    y = _target_potential(model, pipe, state, p_start)
    y += friction_rhs(pair, pipe, state) * pipe.length
    return invert_potential(
        model,
        state.eta,
        state.q,
        y,
        momentum_mode=pipe.momentum_mode,
        settings=settings,
    )


def upstream_pressure(  # noqa: PLR0913
    model: CompressibilityModel,
    pair: GasPair,
    pipe: PipeParams,
    state: EdgeState,
    p_end: float,
    settings: SolverSettings | None = None,
) -> float:
    """
    Pressure at the foot of a pipe given the pressure at its head, the mirror of
    `downstream_pressure`.
    """
    if p_end <= 0:
        raise ValueError('The outlet pressure must be positive.')
    if pipe.is_frictionless or state.q == 0:
        return p_end
    y = _target_potential(model, pipe, state, p_end)
    y -= friction_rhs(pair, pipe, state) * pipe.length
    return invert_potential(
        model,
        state.eta,
        state.q,
        y,
        momentum_mode=pipe.momentum_mode,
        settings=settings,
    )


def pressure_profile(  # noqa: PLR0913
    model: CompressibilityModel,
    pair: GasPair,
    pipe: PipeParams,
    state: EdgeState,
    p_start: float,
    n_samples: int,
    settings: SolverSettings | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Samples the pressure along a pipe at `n_samples` uniformly spaced positions.

    Args:
        model (CompressibilityModel): The compressibility model.
        pair (GasPair): The gas constituents.
        pipe (PipeParams): The pipe.
        state (EdgeState): Flow and composition of the pipe.
        p_start (float): Pressure at the foot (x = 0) in Pa.
        n_samples (int): Number of samples, at least 2.
        settings (SolverSettings, optional): Solver settings.

    Returns:
        tuple[np.ndarray, np.ndarray]: Positions in m and pressures in Pa.
    """
    if n_samples < 2:  # noqa: PLR2004
        raise ValueError('A profile needs at least two samples.')
    x = np.linspace(0.0, pipe.length, n_samples)
    p = np.full(n_samples, float(p_start))
    if pipe.is_frictionless or state.q == 0:
        return x, p
    y0 = _target_potential(model, pipe, state, p_start)
    slope = friction_rhs(pair, pipe, state)
    for i in range(1, n_samples):
        p[i] = invert_potential(
            model,
            state.eta,
            state.q,
            y0 + slope * x[i],
            momentum_mode=pipe.momentum_mode,
            settings=settings,
        )
    return x, p


def compressor_out(gamma: float, p_in: float) -> float:
    """Outlet pressure of a compressor with ratio `gamma`."""
    if gamma < 1:
        raise ValueError('The compression ratio must be at least 1.')
    if p_in <= 0:
        raise ValueError('The inlet pressure must be positive.')
    return gamma * p_in


def compressor_in(gamma: float, p_out: float) -> float:
    """Inlet pressure of a compressor with ratio `gamma`."""
    if gamma < 1:
        raise ValueError('The compression ratio must be at least 1.')
    if p_out <= 0:
        raise ValueError('The outlet pressure must be positive.')
    return p_out / gamma
