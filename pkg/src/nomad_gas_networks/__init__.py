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
Steady states of hydrogen/natural gas blends on gas networks with compressors and
at most one cycle.
"""

from nomad_gas_networks.config import SolverSettings
from nomad_gas_networks.documents import load_fixture, load_network
from nomad_gas_networks.eos import build_model
from nomad_gas_networks.gasprops import default_pair
from nomad_gas_networks.network import BoundaryData, Edge, Network, Node, validate
from nomad_gas_networks.solver import compare_models, solve, solve_mixed_bc
from nomad_gas_networks.steady import SteadyState

__all__ = [
    'BoundaryData',
    'Edge',
    'Network',
    'Node',
    'SolverSettings',
    'SteadyState',
    'build_model',
    'compare_models',
    'default_pair',
    'load_fixture',
    'load_network',
    'solve',
    'solve_mixed_bc',
    'validate',
]
