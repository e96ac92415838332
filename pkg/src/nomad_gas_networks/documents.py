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
The JSON network document, the result document and their readers and writers.

Documents use bar, km, m, K and kg/(m^2 s); everything is converted to SI once,
on load.
"""

import json
import sys
from dataclasses import dataclass
from importlib.resources import files
from typing import (
    TYPE_CHECKING,
    Any,
    Literal,
)

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from nomad_gas_networks.eos import CompressibilityModel, build_model, tabulated_model
from nomad_gas_networks.errors import (
    GasNetworkError,
    NetworkParseError,
    NetworkValidationError,
)
from nomad_gas_networks.gasprops import (
    R_UNIVERSAL,
    T_DEFAULT,
    GasComponent,
    GasPair,
    default_pair,
)
from nomad_gas_networks.network import (
    BoundaryData,
    Edge,
    Network,
    Node,
    validate,
)
from nomad_gas_networks.pipeflow import PipeParams
from nomad_gas_networks.solver import outlet_nodes
from nomad_gas_networks.utils import (
    file_hash,
    from_si,
    get_logger,
    round_significant,
    to_si,
)

if TYPE_CHECKING:
    from structlog.stdlib import (
        BoundLogger,
    )

    from nomad_gas_networks.steady import SteadyState

module_logger = get_logger(__name__)

SCHEMA_VERSION = 1
ModelKind = Literal['constant', 'linear', 'papay', 'quadratic', 'custom']


class ComponentDocument(BaseModel):
    name: str
    molar_mass: float = Field(gt=0, description='Molar mass in kg/mol.')
    p_crit: float = Field(gt=0, description='Critical pressure in bar.')
    T_crit: float = Field(gt=0, description='Critical temperature in K.')

    def to_component(self) -> GasComponent:
        return GasComponent(
            self.name, self.molar_mass, to_si(self.p_crit, 'bar'), self.T_crit
        )

    @classmethod
    def from_component(cls, comp: GasComponent) -> 'ComponentDocument':
        return cls(
            name=comp.name,
            molar_mass=comp.molar_mass,
            p_crit=round_significant(from_si(comp.p_crit, 'bar'), 12),
            T_crit=comp.T_crit,
        )


def _default_components() -> list[ComponentDocument]:
    pair = default_pair()
    return [
        ComponentDocument.from_component(pair.h2),
        ComponentDocument.from_component(pair.ng),
    ]


class GasDocument(BaseModel):
    R: float = Field(R_UNIVERSAL, gt=0, description='Gas constant in J/(mol K).')
    T: float = Field(T_DEFAULT, gt=0, description='Gas temperature in K.')
    components: list[ComponentDocument] = Field(
        default_factory=_default_components,
        min_length=2,
        max_length=2,
        description='Hydrogen first, natural gas second.',
    )

    def to_pair(self) -> GasPair:
        h2, ng = (comp.to_component() for comp in self.components)
        return GasPair(h2=h2, ng=ng, R=self.R, T=self.T)


class NodeDocument(BaseModel):
    id: str
    kind: Literal['supply', 'demand'] | None = Field(
        None,
        description='Derived from a negative load or a composition when omitted.',
    )
    load: float = Field(0.0, description='Load in kg/(m^2 s), negative at supplies.')
    zeta: float | None = Field(None, description='Injected hydrogen mass fraction.')
    pressure: float | None = Field(None, description='Pressure in bar.')

    @property
    def resolved_kind(self) -> str:
        if self.kind is not None:
            return self.kind
        return 'supply' if self.load < 0 or self.zeta is not None else 'demand'


class EdgeDocument(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    id: str
    from_: str = Field(alias='from')
    to: str
    kind: Literal['pipe', 'compressor', 'valve'] = 'pipe'
    L: float | None = Field(None, ge=0, description='Pipe length in km.')
    D: float | None = Field(None, gt=0, description='Pipe diameter in m.')
    lambda_fr: float | None = Field(None, ge=0, description='Darcy friction factor.')
    gamma: float | None = Field(None, ge=1, description='Compression ratio.')


class ModelDocument(BaseModel):
    kind: ModelKind = 'constant'
    params: dict[str, Any] = Field(default_factory=dict)


class NetworkDocument(BaseModel):
    """
    A gas network with its gas data, the compressibility model and the momentum
    mode.
    """

    schema_version: Literal[1] = SCHEMA_VERSION
    comment: str | None = None
    gas: GasDocument = Field(default_factory=GasDocument)
    nodes: list[NodeDocument]
    edges: list[EdgeDocument]
    model: ModelDocument = Field(default_factory=ModelDocument)
    momentum_mode: Literal['full', 'semilinear'] = 'full'
    reference_values: dict[str, Any] | None = None

    def to_network(self, momentum_mode: str | None = None) -> Network:
        """
        Builds the SI network.

        Args:
            momentum_mode (str, optional): Overrides the document momentum mode.

        Returns:
            Network: The network, not yet validated.
        """
        mode = momentum_mode or self.momentum_mode
        nodes = tuple(
            Node(
                id=node.id,
                kind=node.resolved_kind,
                load=node.load,
                zeta=node.zeta,
                pressure=None
                if node.pressure is None
                else to_si(node.pressure, 'bar'),
            )
            for node in self.nodes
        )
        edges = []
        for edge in self.edges:
            pipe = None
            if edge.kind == 'pipe':
                missing = [
                    name
                    for name in ('L', 'D', 'lambda_fr')
                    if getattr(edge, name) is None
                ]
                if missing:
                    raise NetworkParseError(
                        f'edges.{edge.id}: pipe misses {", ".join(missing)}'
                    )
                pipe = PipeParams(
                    length=to_si(edge.L, 'km'),
                    diameter=edge.D,
                    friction=edge.lambda_fr,
                    momentum_mode=mode,
                )
            edges.append(
                Edge(
                    id=edge.id,
                    foot=edge.from_,
                    head=edge.to,
                    kind=edge.kind,
                    pipe=pipe,
                    gamma=edge.gamma,
                )
            )
        try:
            return Network(nodes, tuple(edges))
        except ValueError as exc:
            raise NetworkParseError(str(exc)) from exc

    def build_model(self, kind: str | None = None) -> CompressibilityModel:
        """
        Creates the compressibility model of the document, or of `kind` with the
        document gas data.
        """
        pair = self.gas.to_pair()
        kind = kind or self.model.kind
        params = dict(self.model.params) if kind == self.model.kind else {}
        try:
            if kind == 'custom':
                table = params or {}
                if not {'eta', 'p_bar', 'z'} <= table.keys():
                    raise NetworkParseError(
                        'model.params: the custom model needs the table fields '
                        '"eta", "p_bar" and "z"'
                    )
                p_grid = [to_si(p, 'bar') for p in table['p_bar']]
                return tabulated_model(
                    pair,
                    table['eta'],
                    p_grid,
                    table['z'],
                    p_lo=min(p_grid),
                    p_hi=max(p_grid),
                )
            return build_model(kind, pair, **params)
        except (TypeError, ValueError) as exc:
            raise NetworkParseError(f'model: {exc}') from exc

    @classmethod
    def from_network(  # noqa: PLR0913
        cls,
        net: Network,
        pair: GasPair | None = None,
        model_kind: str = 'constant',
        model_params: dict[str, Any] | None = None,
        momentum_mode: str = 'full',
        comment: str | None = None,
    ) -> 'NetworkDocument':
        """The document of an SI network, the inverse of `to_network`."""
        pair = pair or default_pair()

        def bar(value: float | None) -> float | None:
            if value is None:
                return None
            return round_significant(from_si(value, 'bar'), 12)

        return cls(
            comment=comment,
            gas=GasDocument(
                R=pair.R,
                T=pair.T,
                components=[
                    ComponentDocument.from_component(pair.h2),
                    ComponentDocument.from_component(pair.ng),
                ],
            ),
            nodes=[
                NodeDocument(
                    id=node.id,
                    kind=node.kind,
                    load=node.load,
                    zeta=node.zeta,
                    pressure=bar(node.pressure),
                )
                for node in net.nodes
            ],
            edges=[
                EdgeDocument(
                    id=edge.id,
                    from_=edge.foot,
                    to=edge.head,
                    kind=edge.kind,
                    L=None
                    if edge.pipe is None
                    else round_significant(from_si(edge.pipe.length, 'km'), 12),
                    D=None if edge.pipe is None else edge.pipe.diameter,
                    lambda_fr=None if edge.pipe is None else edge.pipe.friction,
                    gamma=edge.gamma,
                )
                for edge in net.edges
            ],
            model=ModelDocument(kind=model_kind, params=model_params or {}),
            momentum_mode=momentum_mode,
        )

    def dump(self) -> str:
        return self.model_dump_json(by_alias=True, exclude_none=True, indent=2)


@dataclass(frozen=True)
class LoadedNetwork:
    """A parsed and validated network document with its derived objects."""

    document: NetworkDocument
    network: Network
    model: CompressibilityModel
    boundary: BoundaryData
    source: str
    source_hash: str | None = None


def _format_errors(exc: ValidationError) -> str:
    return '; '.join(
        f'{".".join(str(part) for part in error["loc"])}: {error["msg"]}'
        for error in exc.errors()
    )


def parse_document(text: str, source: str = '<string>') -> NetworkDocument:
    """
    Parses the JSON text of a network document.

    Raises:
        NetworkParseError: With line or field context.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkParseError(
            f'{source}, line {exc.lineno}, column {exc.colno}: {exc.msg}'
        ) from exc
    try:
        return NetworkDocument.model_validate(raw)
    except ValidationError as exc:
        raise NetworkParseError(f'{source}: {_format_errors(exc)}') from exc


def load_document(  # noqa: PLR0913
    document: NetworkDocument,
    source: str = '<string>',
    model: str | None = None,
    momentum_mode: str | None = None,
    source_hash: str | None = None,
    logger: 'BoundLogger' = None,
) -> LoadedNetwork:
    """
    Builds, validates and equips a parsed document.

    Args:
        document (NetworkDocument): The parsed document.
        source (str, optional): Name of the source for messages.
        model (str, optional): Overrides the document model kind.
        momentum_mode (str, optional): Overrides the document momentum mode.
        source_hash (str, optional): Hash of the source file.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        LoadedNetwork: The validated network, its model and boundary data.
    """
    if logger is None:
        logger = module_logger
    if document.comment is None:
        logger.warning('network document without provenance comment', source=source)
    net = document.to_network(momentum_mode)
    report = validate(net)
    if not report.ok:
        raise NetworkValidationError(
            f'{source} is not a valid network: {"; ".join(report.violations)}',
            diagnostics=report.violations,
        )
    return LoadedNetwork(
        document=document,
        network=net,
        model=document.build_model(model),
        boundary=BoundaryData.from_network(net),
        source=source,
        source_hash=source_hash,
    )


def load_network(
    path: str,
    model: str | None = None,
    momentum_mode: str | None = None,
    logger: 'BoundLogger' = None,
) -> LoadedNetwork:
    """
    Reads a network document from a file.

    Args:
        path (str): Path of the JSON document.
        model (str, optional): Overrides the document model kind.
        momentum_mode (str, optional): Overrides the document momentum mode.
        logger (BoundLogger, optional): A structlog logger.

    Returns:
        LoadedNetwork: The validated network, its model and boundary data.
    """
    with open(path, encoding='utf-8') as file:
        text = file.read()
    return load_document(
        parse_document(text, source=path),
        source=path,
        model=model,
        momentum_mode=momentum_mode,
        source_hash=file_hash(path),
        logger=logger,
    )


def fixture_path(name: str) -> str:
    """Path of a network document shipped with the package, e.g. `gaslib11.json`."""
    return str(files('nomad_gas_networks') / 'data' / name)


def load_fixture(name: str, **kwargs) -> LoadedNetwork:
    return load_network(fixture_path(name), **kwargs)


class NodeResult(BaseModel):
    id: str
    pressure_bar: float
    eta: float


class EdgeResult(BaseModel):
    id: str
    q: float
    eta: float


class CutResult(BaseModel):
    cut_edge: str
    flipped: bool
    lam: float
    mu: float
    interval: tuple[float, float]
    iterations: int
    modified_loads: dict[str, float]
    betas: dict[str, float]
    reversed_betas: dict[str, float]


class Provenance(BaseModel):
    model: str
    momentum_mode: str
    source: str | None = None
    fixture_hash: str | None = None


class ResultDocument(BaseModel):
    """A solved steady state; pressures in bar with six significant figures."""

    schema_version: Literal[1] = SCHEMA_VERSION
    nodes: list[NodeResult]
    edges: list[EdgeResult]
    residuals: dict[str, float | None]
    subsonic_ok: bool
    supply_inflows: dict[str, float]
    cut: CutResult | None = None
    provenance: Provenance

    @classmethod
    def from_state(
        cls,
        state: 'SteadyState',
        model_kind: str,
        momentum_mode: str,
        source: str | None = None,
        fixture_hash: str | None = None,
    ) -> 'ResultDocument':
        cut = None
        if state.cut is not None:
            cut = CutResult(
                cut_edge=state.cut.cut_edge,
                flipped=state.cut.flipped,
                lam=state.cut.lam,
                mu=state.cut.mu,
                interval=state.cut.interval,
                iterations=state.cut.iterations,
                modified_loads=state.cut.modified_loads,
                betas=state.cut.betas,
                reversed_betas=state.cut.reversed_betas,
            )
        return cls(
            nodes=[
                NodeResult(
                    id=node_id,
                    pressure_bar=round_significant(from_si(pressure, 'bar')),
                    eta=state.node_eta[node_id],
                )
                for node_id, pressure in state.pressures.items()
            ],
            edges=[
                EdgeResult(id=edge_id, q=q, eta=state.edge_eta[edge_id])
                for edge_id, q in state.flows.items()
            ],
            residuals=state.residuals.as_dict(),
            subsonic_ok=state.subsonic_ok,
            supply_inflows=state.supply_inflows,
            cut=cut,
            provenance=Provenance(
                model=model_kind,
                momentum_mode=momentum_mode,
                source=source,
                fixture_hash=fixture_hash,
            ),
        )

    def to_frame(self) -> pd.DataFrame:
        """Nodes and edges in one long table."""
        nodes = pd.DataFrame([node.model_dump() for node in self.nodes])
        edges = pd.DataFrame([edge.model_dump() for edge in self.edges])
        nodes.insert(0, 'element', 'node')
        edges.insert(0, 'element', 'edge')
        return pd.concat([nodes, edges], ignore_index=True)[
            ['element', 'id', 'pressure_bar', 'q', 'eta']
        ]


def _write_text(text: str, out: str) -> None:
    if out == '-':
        sys.stdout.write(text)
        return
    with open(out, 'w', encoding='utf-8') as file:
        file.write(text)


def write_frame(frame: pd.DataFrame, out: str) -> None:
    """Writes a table as CSV; `-` is the standard output."""
    _write_text(frame.to_csv(index=False, lineterminator='\n'), out)


def write_result(
    result: ResultDocument, out: str, fmt: Literal['json', 'csv'] = 'json'
) -> None:
    if fmt == 'csv':
        write_frame(result.to_frame(), out)
    else:
        _write_text(result.model_dump_json(indent=2) + '\n', out)


def profile_frame(x, p) -> pd.DataFrame:
    """A pressure profile with positions in m and pressures in bar."""
    return pd.DataFrame(
        {'x_m': x, 'p_bar': [from_si(float(value), 'bar') for value in p]}
    )


def comparison_table(
    net: Network, results: dict[str, 'SteadyState | GasNetworkError']
) -> pd.DataFrame:
    """
    Side-by-side summary of solves with different models: outflow pressures in bar,
    supply inflows and exit compositions. Failed models show their error.
    """
    outlets = outlet_nodes(net)
    supplies = [node.id for node in net.supplies]
    index = (
        [f'p_out[{v}] (bar)' for v in outlets]
        + [f'q_in[{v}] (kg/(m^2 s))' for v in supplies]
        + [f'eta_out[{v}]' for v in outlets]
        + ['status']
    )
    columns = {}
    for name, result in results.items():
        if isinstance(result, GasNetworkError):
            columns[name] = [None] * (len(index) - 1) + [f'failed: {result}']
            continue
        columns[name] = (
            [round_significant(from_si(result.pressures[v], 'bar')) for v in outlets]
            + [round_significant(result.supply_inflows[v]) for v in supplies]
            + [round_significant(result.node_eta[v], 4) for v in outlets]
            + ['ok']
        )
    return pd.DataFrame(columns, index=index)
