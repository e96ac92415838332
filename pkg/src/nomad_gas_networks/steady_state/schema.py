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
Schemas for steady states of hydrogen/natural gas blends on gas networks.

`ELNGasNetworkSteadyState` reads a network document from the upload, solves it and
stores nodal pressures and compositions, edge flows, the residual report and, for
networks with a cycle, the cut that closed it.
"""

from typing import (
    TYPE_CHECKING,
)

import numpy as np
import plotly.express as px
from nomad.config import config
from nomad.datamodel.data import (
    ArchiveSection,
    EntryData,
)
from nomad.datamodel.metainfo.annotations import (
    ELNAnnotation,
    ELNComponentEnum,
)
from nomad.datamodel.metainfo.plot import (
    PlotlyFigure,
    PlotSection,
)
from nomad.metainfo import (
    MEnum,
    Quantity,
    SchemaPackage,
    Section,
    SubSection,
)

from nomad_gas_networks.documents import load_document, parse_document
from nomad_gas_networks.errors import GasNetworkError
from nomad_gas_networks.solver import solve

if TYPE_CHECKING:
    from nomad.datamodel.datamodel import EntryArchive
    from structlog.stdlib import BoundLogger

    from nomad_gas_networks.steady import SteadyState

configuration = config.get_plugin_entry_point('nomad_gas_networks.steady_state:schema')

m_package = SchemaPackage()


class NodeSolution(ArchiveSection):
    """
    Pressure and hydrogen content at a network node.
    """

    m_def = Section(label_quantity='name')
    name = Quantity(
        type=str,
        description='Id of the node in the network document.',
    )
    load = Quantity(
        type=np.float64,
        description='Nodal load, negative at supplies.',
        unit='kg/(m**2*s)',
    )
    pressure = Quantity(
        type=np.float64,
        unit='Pa',
        a_eln=ELNAnnotation(defaultDisplayUnit='bar'),
    )
    hydrogen_mass_fraction = Quantity(
        type=np.float64,
        unit='dimensionless',
    )


class EdgeSolution(ArchiveSection):
    m_def = Section(label_quantity='name')
    name = Quantity(type=str)
    kind = Quantity(type=MEnum(['pipe', 'compressor', 'valve']))
    mass_flux = Quantity(
        type=np.float64,
        description='Mass flux density, positive from the foot to the head node.',
        unit='kg/(m**2*s)',
    )
    hydrogen_mass_fraction = Quantity(
        type=np.float64,
        unit='dimensionless',
    )


class SolverResiduals(ArchiveSection):
    """
    Maximum violations of the steady-state equations by the stored solution.
    """

    mass_balance = Quantity(type=np.float64, unit='kg/(m**2*s)')
    pressure_relation = Quantity(
        type=np.float64,
        description='Relative defect of the pipe pressure relations.',
    )
    coupling = Quantity(
        type=np.float64,
        description='Pressure defect of compressors and valves.',
        unit='Pa',
    )
    mixing = Quantity(type=np.float64, unit='dimensionless')
    cut_pressure = Quantity(type=np.float64, unit='Pa')
    cut_composition = Quantity(type=np.float64, unit='dimensionless')
    subsonic = Quantity(
        type=bool,
        description='Whether every pipe state is subsonic.',
    )


class CycleCut(ArchiveSection):
    """
    The cycle edge cut to reduce the network to a tree, and the cut flow and
    composition that close the cycle again.
    """

    cut_edge = Quantity(type=str)
    flipped = Quantity(type=bool)
    cut_flow = Quantity(type=np.float64, unit='kg/(m**2*s)')
    cut_composition = Quantity(type=np.float64, unit='dimensionless')
    lower_bound = Quantity(type=np.float64, unit='kg/(m**2*s)')
    upper_bound = Quantity(type=np.float64, unit='kg/(m**2*s)')
    iterations = Quantity(type=int)


class GasNetworkSteadyState(ArchiveSection):
    """
    Section for a steady state of a gas network.
    """

    model = Quantity(
        type=MEnum(['constant', 'linear', 'papay', 'quadratic', 'custom']),
        description="""
        Compressibility factor model. Defaults to the model of the network document.
        """,
        a_eln=ELNAnnotation(component=ELNComponentEnum.EnumEditQuantity),
    )
    momentum_mode = Quantity(
        type=MEnum(['full', 'semilinear']),
        description='Momentum balance with or without the kinetic term.',
        a_eln=ELNAnnotation(component=ELNComponentEnum.EnumEditQuantity),
    )
    nodes = SubSection(section_def=NodeSolution, repeats=True)
    edges = SubSection(section_def=EdgeSolution, repeats=True)
    residuals = SubSection(section_def=SolverResiduals)
    cut = SubSection(section_def=CycleCut)

    def write_state(self, state: 'SteadyState', kinds: dict[str, str]) -> None:
        """
        Writes a solved steady state into the section.

        Args:
            state (SteadyState): The solution.
            kinds (dict[str, str]): Edge kind by edge id.
        """
        self.nodes = [
            NodeSolution(
                name=node_id,
                load=state.loads[node_id],
                pressure=pressure,
                hydrogen_mass_fraction=state.node_eta[node_id],
            )
            for node_id, pressure in state.pressures.items()
        ]
        self.edges = [
            EdgeSolution(
                name=edge_id,
                kind=kinds[edge_id],
                mass_flux=q,
                hydrogen_mass_fraction=state.edge_eta[edge_id],
            )
            for edge_id, q in state.flows.items()
        ]
        residuals = state.residuals
        self.residuals = SolverResiduals(
            mass_balance=residuals.mass_balance,
            pressure_relation=residuals.pressure_relation,
            coupling=residuals.coupling,
            mixing=residuals.mixing,
            cut_pressure=residuals.cut_pressure,
            cut_composition=residuals.cut_composition,
            subsonic=state.subsonic_ok,
        )
        if state.cut is not None:
            self.cut = CycleCut(
                cut_edge=state.cut.cut_edge,
                flipped=state.cut.flipped,
                cut_flow=state.cut.lam,
                cut_composition=state.cut.mu,
                lower_bound=state.cut.interval[0],
                upper_bound=state.cut.interval[1],
                iterations=state.cut.iterations,
            )

    def generate_plots(self) -> list[PlotlyFigure]:
        """
        Generate the plotly figures for the nodal pressures and compositions.

        Returns:
            list[PlotlyFigure]: The plotly figures.
        """
        figures = []
        if not self.nodes:
            return figures
        names = [node.name for node in self.nodes]
        columns = {
            'Pressure (bar)': [
                node.pressure.to('bar').magnitude for node in self.nodes
            ],
            'Hydrogen mass fraction': [
                node.hydrogen_mass_fraction.magnitude for node in self.nodes
            ],
        }
        for label, values in columns.items():
            bars = px.bar(x=names, y=values)
            bars.update_layout(
                title=f'{label} per node',
                xaxis_title='Node',
                yaxis_title=label,
                template='plotly_white',
            )
            figures.append(
                PlotlyFigure(label=label, figure=bars.to_plotly_json()),
            )
        return figures


class ELNGasNetworkSteadyState(GasNetworkSteadyState, PlotSection, EntryData):
    """
    Entry section for a gas network steady state. The network is read from a
    network document in the upload and solved on normalization.
    """

    m_def = Section(label='Gas Network Steady State')

    network_file = Quantity(
        type=str,
        description='Network document (JSON) describing nodes, edges and gas.',
        a_eln=ELNAnnotation(
            component=ELNComponentEnum.FileEditQuantity,
        ),
    )

    def normalize(self, archive: 'EntryArchive', logger: 'BoundLogger'):
        """
        The normalize function of the `ELNGasNetworkSteadyState` section.

        Args:
            archive (EntryArchive): The archive containing the section that is being
            normalized.
            logger (BoundLogger): A structlog logger.
        """
        if self.network_file is not None:
            with archive.m_context.raw_file(self.network_file) as file:
                text = file.read()
            settings = getattr(configuration, 'settings', None)
            try:
                loaded = load_document(
                    parse_document(text, source=self.network_file),
                    source=self.network_file,
                    model=self.model,
                    momentum_mode=self.momentum_mode,
                    logger=logger,
                )
                state = solve(
                    loaded.network,
                    loaded.model,
                    loaded.boundary,
                    settings=settings,
                    logger=logger,
                )
            except GasNetworkError as exc:
                logger.error(f'Could not solve "{self.network_file}": {exc}')
            else:
                self.model = self.model or loaded.document.model.kind
                self.momentum_mode = (
                    self.momentum_mode or loaded.document.momentum_mode
                )
                self.write_state(
                    state, {edge.id: edge.kind for edge in loaded.network.edges}
                )

        super().normalize(archive, logger)

        self.figures = self.generate_plots()


class RawFileGasNetworkData(EntryData):
    """
    Entry section for a gas network document.
    """

    steady_state = Quantity(
        type=ELNGasNetworkSteadyState,
        a_eln=ELNAnnotation(
            component='ReferenceEditQuantity',
        ),
    )


m_package.__init_metainfo__()
