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
Mixture rules for blends of hydrogen (constituent 1) and natural gas
(constituent 2). Mass fractions always refer to hydrogen.
"""

from dataclasses import dataclass

import numpy as np

R_UNIVERSAL = 8.3145
T_DEFAULT = 283.15

# Natural gas of 90 % methane, 6 % ethane and 4 % propane (molar fractions).
M_NATURAL_GAS = 0.90 * 16.043e-3 + 0.06 * 30.070e-3 + 0.04 * 44.097e-3
M_HYDROGEN = 2.016e-3


@dataclass(frozen=True)
class GasComponent:
    """A pure constituent with its molar mass (kg/mol) and critical point (Pa, K)."""

    name: str
    molar_mass: float
    p_crit: float
    T_crit: float

    def __post_init__(self):
        for field in ('molar_mass', 'p_crit', 'T_crit'):
            if not getattr(self, field) > 0:
                raise ValueError(f'{field} of "{self.name}" must be positive.')


@dataclass(frozen=True)
class GasPair:
    """
    The two constituents of the blend together with the universal gas constant
    `R` in J/(mol K) and the gas temperature `T` in K.
    """

    h2: GasComponent
    ng: GasComponent
    R: float = R_UNIVERSAL
    T: float = T_DEFAULT

    def __post_init__(self):
        if not self.R > 0 or not self.T > 0:
            raise ValueError('R and T must be positive.')
        if self.h2 == self.ng:
            raise ValueError('The two constituents must be distinct.')

    @property
    def RT(self) -> float:
        return self.R * self.T

    def specific_gas_constant(self, eta: float) -> float:
        """RT/M(eta) in m^2/s^2."""
        return self.RT / molar_mass(self, eta)


def default_pair() -> GasPair:
    """
    Hydrogen and natural gas with the critical data used for the GasLib-11
    scenario.
    """
    return GasPair(
        h2=GasComponent('hydrogen', M_HYDROGEN, 13.15e5, 33.19),
        ng=GasComponent('natural gas', M_NATURAL_GAS, 46.01e5, 204.62),
    )


def check_fraction(eta: float, name: str = 'eta') -> None:
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f'{name} must lie in [0, 1], got {eta}.')


def molar_mass(pair: GasPair, eta):
    """
    Molar mass of the blend, 1/M = eta/M1 + (1 - eta)/M2.

    Args:
        pair (GasPair): The gas constituents.
        eta: Hydrogen mass fraction (float or array).

    Returns:
        The molar mass in kg/mol.
    """
    m1, m2 = pair.h2.molar_mass, pair.ng.molar_mass
    return m1 * m2 / (eta * m2 + (1.0 - eta) * m1)


def mass_to_molar(pair: GasPair, eta):
    """
    Converts the hydrogen mass fraction into the hydrogen molar fraction.

    Args:
        pair (GasPair): The gas constituents.
        eta: Hydrogen mass fraction (float or array).

    Returns:
        The hydrogen molar fraction.
    """
    m1, m2 = pair.h2.molar_mass, pair.ng.molar_mass
    return eta * m2 / (eta * m2 + (1.0 - eta) * m1)


def molar_to_mass(pair: GasPair, eta_mol):
    """
    Inverse of `mass_to_molar`.

    Args:
        pair (GasPair): The gas constituents.
        eta_mol: Hydrogen molar fraction (float or array).

    Returns:
        The hydrogen mass fraction.
    """
    m1, m2 = pair.h2.molar_mass, pair.ng.molar_mass
    return eta_mol * m1 / (eta_mol * m1 + (1.0 - eta_mol) * m2)


def critical_point(pair: GasPair, eta) -> tuple:
    """
    Pseudo-critical pressure and temperature of the blend as molar-fraction convex
    combinations of the constituent values.
    """
    x = mass_to_molar(pair, eta)
    p_c = x * pair.h2.p_crit + (1.0 - x) * pair.ng.p_crit
    T_c = x * pair.h2.T_crit + (1.0 - x) * pair.ng.T_crit
    return p_c, T_c


def clip_fraction(eta: float) -> float:
    return float(np.clip(eta, 0.0, 1.0))
