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
from hypothesis import given
from hypothesis import strategies as st

from nomad_gas_networks.gasprops import (
    GasComponent,
    GasPair,
    check_fraction,
    critical_point,
    default_pair,
    mass_to_molar,
    molar_mass,
    molar_to_mass,
)


def test_molar_mass_end_points(pair):
    assert molar_mass(pair, 0.0) == pytest.approx(pair.ng.molar_mass)
    assert molar_mass(pair, 1.0) == pytest.approx(pair.h2.molar_mass)


def test_molar_mass_of_even_blend(pair):
    assert molar_mass(pair, 0.5) == pytest.approx(3.6260e-3, rel=1e-4)


def test_mass_to_molar(pair):
    assert mass_to_molar(pair, 0.25) == pytest.approx(0.7486, abs=1e-4)


def test_molar_to_mass_inverts_mass_to_molar(pair):
    eta = np.linspace(0.0, 1.0, 1001)
    eta_mol = mass_to_molar(pair, eta)
    assert molar_to_mass(pair, eta_mol) == pytest.approx(eta, rel=0.0, abs=1e-12)
    assert np.all(np.diff(eta_mol) > 0)
    assert eta_mol.min() >= 0.0
    assert eta_mol.max() <= 1.0
    assert (eta_mol[0], eta_mol[-1]) == pytest.approx((0.0, 1.0), abs=1e-15)


@given(eta=st.floats(0.0, 1.0))
def test_molar_mass_lies_between_constituents(eta):
    pair = default_pair()
    m = molar_mass(pair, eta)
    assert pair.h2.molar_mass * (1 - 1e-12) <= m <= pair.ng.molar_mass * (1 + 1e-12)
    assert mass_to_molar(pair, eta) >= eta - 1e-15


def test_specific_gas_constant(pair):
    assert pair.specific_gas_constant(0.0) == pytest.approx(
        8.3145 * 283.15 / 0.01800678
    )


def test_critical_point_of_pure_constituents(pair):
    assert critical_point(pair, 0.0) == pytest.approx((46.01e5, 204.62))
    assert critical_point(pair, 1.0) == pytest.approx((13.15e5, 33.19))


@pytest.mark.parametrize('eta', [-0.1, 1.01])
def test_check_fraction_rejects(eta):
    with pytest.raises(ValueError):
        check_fraction(eta)


def test_pair_validation(pair):
    with pytest.raises(ValueError):
        GasPair(pair.h2, pair.h2)
    with pytest.raises(ValueError):
        GasPair(pair.h2, pair.ng, T=0.0)
    with pytest.raises(ValueError):
        GasComponent('nothing', 0.0, 1e5, 100.0)
