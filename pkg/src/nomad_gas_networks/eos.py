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
Compressibility factor models for hydrogen/natural gas blends and the pressure
potential built on them.

The potential of a pipe state (eta, q, p) is

    F(eta, q, p) = A(eta, p) + (R T q^2 / M(eta)) ln(Z(eta, p) / p),

with the antiderivative A(eta, p) = int p / Z(eta, p) dp. Along a pipe, differences
of F equal the accumulated friction term. In the semilinear momentum mode only A is
used. All pressures are in Pa.
"""

import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass
from functools import lru_cache
from typing import (
    Literal,
)

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import quad
from scipy.interpolate import RectBivariateSpline

from nomad_gas_networks.config import SolverSettings, resolve
from nomad_gas_networks.errors import NonPositiveZError
from nomad_gas_networks.gasprops import (
    GasComponent,
    GasPair,
    critical_point,
    molar_mass,
)

MomentumMode = Literal['full', 'semilinear']

# below this size of the correction terms the antiderivative switches to a series
SERIES_THRESHOLD = 1e-3
SERIES_ORDER = 8
VALIDATION_FRACTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)


def alpha_coefficient(comp: GasComponent, T: float) -> float:
    """
    Gas specific slope of the linear compressibility model in 1/Pa.

    Args:
        comp (GasComponent): The constituent.
        T (float): Gas temperature in K.

    Returns:
        float: 0.257/p_c - 0.5333 T_c/(p_c T).
    """
    if T <= 0:
        raise ValueError('The temperature must be positive.')
    return 0.257 / comp.p_crit - 0.5333 * comp.T_crit / (comp.p_crit * T)


def _series_ratio(x: float) -> float:
    """(x - ln(1 + x)) / x^2 without cancellation for small x."""
    if abs(x) < SERIES_THRESHOLD:
        return 0.5 - x / 3 + x**2 / 4 - x**3 / 5 + x**4 / 6
    return (x - math.log1p(x)) / x**2


def quadratic_antiderivative(a: float, b: float, p: float, p_scale: float) -> float:
    """
    Antiderivative of p / (1 + a p + b p^2) with A(0) = 0.

    The closed form is ln(Z)/(2b) - a/(2b) J(p) where J is the integral of 1/Z,
    taken in arctangent or logarithmic form depending on the sign of the
    discriminant. If the correction terms stay below `SERIES_THRESHOLD` on
    [0, p_scale] the integrand is expanded in a power series instead, which avoids
    the cancellation of the closed form for nearly ideal gas.

    Args:
        a (float): Linear coefficient in 1/Pa.
        b (float): Quadratic coefficient in 1/Pa^2.
        p (float): Pressure in Pa.
        p_scale (float): Largest pressure of interest, selects the branch.

    Returns:
        float: The antiderivative in Pa^2.
    """
    if b == 0.0:
        return p * p * _series_ratio(a * p)
    if max(abs(a) * p_scale, abs(b) * p_scale**2) <= SERIES_THRESHOLD:
        return float(_series_antiderivative(a, b)(p))

    z = 1.0 + a * p + b * p * p
    if z <= 0:
        raise NonPositiveZError(f'Z = {z:.4g} <= 0 at p = {p:.6g} Pa.')
    disc = 4.0 * b - a * a

    def integral_of_inverse(x: float) -> float:
        w = 2.0 * b * x + a
        if abs(disc) <= 1e-12 * a * a:
            return -2.0 / w
        if disc > 0:
            s = math.sqrt(disc)
            return 2.0 / s * math.atan(w / s)
        s = math.sqrt(-disc)
        return math.log(abs((w - s) / (w + s))) / s

    j = integral_of_inverse(p) - integral_of_inverse(0.0)
    return math.log1p(a * p + b * p * p) / (2.0 * b) - a / (2.0 * b) * j


@lru_cache(maxsize=256)
def _series_antiderivative(a: float, b: float) -> Polynomial:
    u = Polynomial([0.0, a, b])
    series = sum((-u) ** k for k in range(SERIES_ORDER + 1))
    return (Polynomial([0.0, 1.0]) * series).integ()


class CompressibilityModel(ABC):
    """
    Base class of the compressibility factor models Z(eta, p).

    Subclasses implement `z`, `dz_dp` and `antiderivative` for a hydrogen mass
    fraction `eta` and a pressure `p` in Pa. On construction Z is checked to be
    positive on a sample grid of [p_lo, p_hi].
    """

    kind: str = ''

    def __init__(
        self,
        pair: GasPair,
        p_lo: float = 1e4,
        p_hi: float = 2e7,
        settings: SolverSettings | None = None,
    ):
        if not 0 < p_lo < p_hi:
            raise ValueError('The pressure range must satisfy 0 < p_lo < p_hi.')
        self.pair = pair
        self.p_lo = p_lo
        self.p_hi = p_hi
        self.settings = resolve(settings)

    def check_range(self) -> None:
        """
        Raises `NonPositiveZError` if Z is not positive on the sample grid.
        """
        for eta in VALIDATION_FRACTIONS:
            for p in np.linspace(self.p_lo, self.p_hi, 25):
                z = self.z(eta, float(p))
                if not z > 0:
                    raise NonPositiveZError(
                        f'{self.kind} model gives Z = {z:.4g} at eta = {eta}, '
                        f'p = {p:.6g} Pa.'
                    )

    @abstractmethod
    def z(self, eta: float, p: float) -> float:
        pass

    @abstractmethod
    def dz_dp(self, eta: float, p: float) -> float:
        pass

    @abstractmethod
    def antiderivative(self, eta: float, p: float) -> float:
        pass

    def __repr__(self) -> str:
        return f'{type(self).__name__}(kind={self.kind!r})'


class ConstantCompressibility(CompressibilityModel):
    """Z = k for all states."""

    kind = 'constant'

    def __init__(self, pair: GasPair, k: float = 1.0, **kwargs):
        super().__init__(pair, **kwargs)
        if not k > 0:
            raise ValueError('The constant compressibility factor must be positive.')
        self.k = k

    def z(self, eta: float, p: float) -> float:
        return self.k

    def dz_dp(self, eta: float, p: float) -> float:
        return 0.0

    def antiderivative(self, eta: float, p: float) -> float:
        return p * p / (2.0 * self.k)


class LinearCompressibility(CompressibilityModel):
    """
    Z = 1 + alpha(eta) p with the slope mixed linearly in the mass fraction from the
    constituent slopes given by `alpha_coefficient`.
    """

    kind = 'linear'

    def __init__(self, pair: GasPair, **kwargs):
        super().__init__(pair, **kwargs)
        self.alpha_h2 = alpha_coefficient(pair.h2, pair.T)
        self.alpha_ng = alpha_coefficient(pair.ng, pair.T)
        self.check_range()

    def alpha(self, eta: float) -> float:
        return eta * self.alpha_h2 + (1.0 - eta) * self.alpha_ng

    def z(self, eta: float, p: float) -> float:
        return 1.0 + self.alpha(eta) * p

    def dz_dp(self, eta: float, p: float) -> float:
        return self.alpha(eta)

    def antiderivative(self, eta: float, p: float) -> float:
        # p/alpha - ln(Z)/alpha^2 written as p^2 (x - ln(1 + x)) / x^2, x = alpha p
        if self.z(eta, p) <= 0:
            raise NonPositiveZError(f'Z <= 0 at eta = {eta}, p = {p:.6g} Pa.')
        return p * p * _series_ratio(self.alpha(eta) * p)


class PapayCompressibility(CompressibilityModel):
    """
    Papay correlation evaluated at the pseudo-critical point of the blend:

        Z = 1 - 3.52 exp(-2.26 T/T_c) p/p_c + 0.274 exp(-1.878 T/T_c) (p/p_c)^2
    """

    kind = 'papay'

    def __init__(self, pair: GasPair, **kwargs):
        super().__init__(pair, **kwargs)
        self.check_range()

    def coefficients(self, eta: float) -> tuple[float, float]:
        """
        Coefficients a, b of Z = 1 + a p + b p^2 for the given mass fraction.
        """
        p_c, T_c = critical_point(self.pair, eta)
        t_r = self.pair.T / T_c
        a = -3.52 * math.exp(-2.26 * t_r) / p_c
        b = 0.274 * math.exp(-1.878 * t_r) / p_c**2
        return a, b

    def z(self, eta: float, p: float) -> float:
        a, b = self.coefficients(eta)
        return 1.0 + a * p + b * p * p

    def dz_dp(self, eta: float, p: float) -> float:
        a, b = self.coefficients(eta)
        return a + 2.0 * b * p

    def antiderivative(self, eta: float, p: float) -> float:
        a, b = self.coefficients(eta)
        return quadratic_antiderivative(a, b, p, self.p_hi)


class CustomCompressibility(CompressibilityModel):
    """
    A user supplied Z(eta, p). Without an analytic derivative a central finite
    difference is used, without an antiderivative an adaptive quadrature from the
    gauge pressure.
    """

    kind = 'custom'

    def __init__(
        self,
        pair: GasPair,
        z_func: Callable[[float, float], float],
        dz_func: Callable[[float, float], float] | None = None,
        antiderivative_func: Callable[[float, float], float] | None = None,
        **kwargs,
    ):
        super().__init__(pair, **kwargs)
        self.z_func = z_func
        self.dz_func = dz_func
        self.antiderivative_func = antiderivative_func
        self.check_range()

    def z(self, eta: float, p: float) -> float:
        return float(self.z_func(eta, p))

    def dz_dp(self, eta: float, p: float) -> float:
        if self.dz_func is not None:
            return float(self.dz_func(eta, p))
        h = self.settings.fd_rel_step * max(p, 1e5)
        return (self.z(eta, p + h) - self.z(eta, p - h)) / (2.0 * h)

    def antiderivative(self, eta: float, p: float) -> float:
        if self.antiderivative_func is not None:
            return float(self.antiderivative_func(eta, p))

        def integrand(s: float) -> float:
            z = self.z(eta, s)
            if z <= 0:
                raise NonPositiveZError(f'Z <= 0 at eta = {eta}, p = {s:.6g} Pa.')
            return s / z

        value, _ = quad(
            integrand,
            self.settings.p_gauge,
            p,
            epsabs=self.settings.quad_atol,
            epsrel=self.settings.quad_rtol,
            limit=200,
        )
        return value


MODEL_KINDS = {
    'constant': ConstantCompressibility,
    'linear': LinearCompressibility,
    'papay': PapayCompressibility,
    'custom': CustomCompressibility,
}


def build_model(kind: str, pair: GasPair, **params) -> CompressibilityModel:
    """
    Creates a compressibility model by its kind name.

    Args:
        kind (str): One of `constant`, `linear`, `papay`, `custom`.
        pair (GasPair): The gas constituents.
        **params: Model specific parameters, e.g. `k` or `z_func`.

    Returns:
        CompressibilityModel: The model.
    """
    if kind == 'quadratic':
        kind = 'papay'
    try:
        cls = MODEL_KINDS[kind]
    except KeyError as exc:
        raise ValueError(f'Unknown compressibility model "{kind}".') from exc
    return cls(pair, **params)


def tabulated_model(
    pair: GasPair,
    eta_grid,
    p_grid,
    z_values,
    **kwargs,
) -> CustomCompressibility:
    """
    A custom model interpolating tabulated compressibility factors, linear in the
    mass fraction and cubic in the pressure.

    Args:
        pair (GasPair): The gas constituents.
        eta_grid: Increasing mass fractions, at least two.
        p_grid: Increasing pressures in Pa, at least four.
        z_values: Z with shape (len(eta_grid), len(p_grid)).

    Returns:
        CustomCompressibility: The model.
    """
    eta_grid = np.asarray(eta_grid, dtype=float)
    p_grid = np.asarray(p_grid, dtype=float)
    z_values = np.asarray(z_values, dtype=float)
    if z_values.shape != (eta_grid.size, p_grid.size):
        raise ValueError(
            f'Z table of shape {z_values.shape} does not match the grids '
            f'({eta_grid.size}, {p_grid.size}).'
        )
    if eta_grid.size < 2 or p_grid.size < 4:  # noqa: PLR2004
        raise ValueError('The Z table needs at least 2 fractions and 4 pressures.')
    spline = RectBivariateSpline(eta_grid, p_grid, z_values, kx=1, ky=3)
    return CustomCompressibility(
        pair,
        z_func=lambda eta, p: float(spline.ev(eta, p)),
        dz_func=lambda eta, p: float(spline.ev(eta, p, dy=1)),
        **kwargs,
    )


@dataclass(frozen=True)
class PotentialPoint:
    """A pipe state: mass fraction, mass flux density in kg/(m^2 s), pressure in Pa."""

    eta: float
    q: float
    p: float


def z_eval(model: CompressibilityModel, eta: float, p: float) -> float:
    z = model.z(eta, p)
    if not z > 0:
        raise NonPositiveZError(
            f'Z = {z:.4g} at eta = {eta}, p = {p:.6g} Pa is outside the validity '
            f'range of the {model.kind} model.'
        )
    return z


def z_dp(model: CompressibilityModel, eta: float, p: float) -> float:
    return model.dz_dp(eta, p)


def antiderivative(model: CompressibilityModel, eta: float, p: float) -> float:
    return model.antiderivative(eta, p)


def kinetic_coefficient(model: CompressibilityModel, eta: float, q: float) -> float:
    """R T q^2 / M(eta) in Pa^2."""
    return model.pair.RT / molar_mass(model.pair, eta) * q * q


def potential_f(
    model: CompressibilityModel,
    pt: PotentialPoint,
    momentum_mode: MomentumMode = 'full',
) -> float:
    """
    The pressure potential of a pipe state.

    Args:
        model (CompressibilityModel): The compressibility model.
        pt (PotentialPoint): The state.
        momentum_mode (str, optional): `full` adds the kinetic term, `semilinear`
            uses the antiderivative only. Defaults to `full`.

    Returns:
        float: F in Pa^2.
    """
    if pt.p <= 0:
        raise ValueError('The pressure must be positive.')
    z = z_eval(model, pt.eta, pt.p)
    value = antiderivative(model, pt.eta, pt.p)
    if momentum_mode == 'semilinear' or pt.q == 0:
        return value
    return value + kinetic_coefficient(model, pt.eta, pt.q) * math.log(z / pt.p)


def potential_dfdp(
    model: CompressibilityModel,
    pt: PotentialPoint,
    momentum_mode: MomentumMode = 'full',
) -> float:
    """
    Derivative of `potential_f` with respect to the pressure, in Pa.

    Args:
        model (CompressibilityModel): The compressibility model.
        pt (PotentialPoint): The state.
        momentum_mode (str, optional): `full` or `semilinear`. Defaults to `full`.

    Returns:
        float: (p^2 - (RT/M) q^2 (Z - p dZ/dp)) / (p Z); positive iff subsonic.
    """
    z = z_eval(model, pt.eta, pt.p)
    if momentum_mode == 'semilinear':
        return pt.p / z
    return sonic_margin(model, pt) / (pt.p * z)


def sonic_margin(model: CompressibilityModel, pt: PotentialPoint) -> float:
    """p^2 - (RT/M) q^2 (Z - p dZ/dp); positive exactly in the subsonic domain."""
    z = model.z(pt.eta, pt.p)
    dz = model.dz_dp(pt.eta, pt.p)
    return pt.p**2 - kinetic_coefficient(model, pt.eta, pt.q) * (z - pt.p * dz)


def is_subsonic(model: CompressibilityModel, pt: PotentialPoint) -> bool:
    if pt.p <= 0:
        raise ValueError('The pressure must be positive.')
    return sonic_margin(model, pt) > 0
