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
from nomad.config.models.plugins import ParserEntryPoint, SchemaPackageEntryPoint
from pydantic import Field

from nomad_gas_networks.config import SolverSettings


class GasNetworkSchemaEntryPoint(SchemaPackageEntryPoint):
    """
    Entry point for lazy loading of the gas network steady-state schemas.
    """

    settings: SolverSettings = Field(
        default_factory=SolverSettings,
        description='Numerical settings of the steady-state solver.',
    )

    def load(self):
        from nomad_gas_networks.steady_state.schema import m_package

        return m_package


class GasNetworkParserEntryPoint(ParserEntryPoint):
    """
    Entry point for lazy loading of the GasNetworkParser.
    """

    def load(self):
        from nomad_gas_networks.steady_state.parser import GasNetworkParser

        return GasNetworkParser(**self.dict())


schema = GasNetworkSchemaEntryPoint(
    name='Gas Network Steady State Schema',
    description='Schema for steady states of hydrogen blends on gas networks.',
)


parser = GasNetworkParserEntryPoint(
    name='Gas Network Parser',
    description="""
    Parser for gas network documents. Creates a steady-state entry that solves the
    network with the compressibility model of the document.
    """,
    mainfile_mime_re=r'application/json|text/.*',
    mainfile_name_re=r'^.*\.gasnet\.json$',
)
