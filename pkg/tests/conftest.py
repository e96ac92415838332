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
import os
import shutil

import pytest
import structlog
from structlog.testing import LogCapture

from nomad_gas_networks.documents import fixture_path
from nomad_gas_networks.eos import build_model
from nomad_gas_networks.gasprops import default_pair
from nomad_gas_networks.network import Edge, Network, Node
from nomad_gas_networks.pipeflow import PipeParams

BAR = 1e5


@pytest.fixture(
    name='caplog',
    scope='function',
)
def fixture_caplog(request):
    """
    Extracts log messages from the logger and raises an assertion error if the specified
    log levels in the `request.param` are found.
    """
    caplog = LogCapture()
    processors = structlog.get_config()['processors']
    old_processors = processors.copy()

    try:
        processors.clear()
        processors.append(caplog)
        structlog.configure(processors=processors)
        yield caplog
        for record in caplog.entries:
            if record['log_level'] in getattr(request, 'param', []):
                assert False, record
    finally:
        processors.clear()
        processors.extend(old_processors)
        structlog.configure(processors=processors)


@pytest.fixture(name='pair')
def fixture_pair():
    return default_pair()


@pytest.fixture(name='models')
def fixture_models(pair):
    """The three closed-form compressibility models."""
    return {kind: build_model(kind, pair) for kind in ('constant', 'linear', 'papay')}


@pytest.fixture(name='make_pipe')
def fixture_make_pipe():
    """
    Factory for pipes with the GasLib-11 parameters (10 km, 0.5 m, 0.05) unless
    overridden.
    """

    def make_pipe(edge_id, foot, head, length=10e3, **kwargs):
        pipe = PipeParams(
            length=length,
            diameter=kwargs.pop('diameter', 0.5),
            friction=kwargs.pop('friction', 0.05),
            momentum_mode=kwargs.pop('momentum_mode', 'full'),
        )
        return Edge(edge_id, foot, head, 'pipe', pipe=pipe)

    return make_pipe


@pytest.fixture(name='path_net')
def fixture_path_net(make_pipe):
    """v1 -> v2 -> v3 with loads (-5, 2, 3) and the pressure fixed at v1."""
    return Network(
        (
            Node('v1', 'supply', -5.0, zeta=0.25, pressure=50 * BAR),
            Node('v2', 'demand', 2.0),
            Node('v3', 'demand', 3.0),
        ),
        (make_pipe('e1', 'v1', 'v2'), make_pipe('e2', 'v2', 'v3')),
    )


@pytest.fixture(name='star_net')
def fixture_star_net(make_pipe):
    """Three supplies of 2 feeding a central demand of 6."""
    return Network(
        (
            Node('c', 'demand', 6.0),
            Node('s1', 'supply', -2.0, zeta=0.0, pressure=50 * BAR),
            Node('s2', 'supply', -2.0, zeta=0.5),
            Node('s3', 'supply', -2.0, zeta=1.0),
        ),
        tuple(make_pipe(f'p{i}', f's{i}', 'c') for i in (1, 2, 3)),
    )


@pytest.fixture(name='triangle_net')
def fixture_triangle_net(make_pipe):
    """
    A single supply `a` feeding `b` and `c` around a triangle; the loads are 30 times
    (-3, 1, 2).
    """
    return Network(
        (
            Node('a', 'supply', -90.0, zeta=0.25, pressure=60 * BAR),
            Node('b', 'demand', 30.0),
            Node('c', 'demand', 60.0),
        ),
        (
            make_pipe('e_ab', 'a', 'b'),
            make_pipe('e_bc', 'b', 'c'),
            make_pipe('e_ca', 'c', 'a'),
        ),
    )


@pytest.fixture(name='diamond_net')
def fixture_diamond_net(make_pipe):
    """
    The cycle a-b-d-c fed by natural gas through a branch at `a` and by hydrogen
    through a branch at `d`; the modified loads are (-50, 20, -10, 40) in traversal
    order.
    """
    return Network(
        (
            Node('a', 'demand', 0.0),
            Node('b', 'demand', 20.0),
            Node('c', 'demand', 40.0),
            Node('d', 'demand', 20.0),
            Node('s', 'supply', -50.0, zeta=0.0, pressure=60 * BAR),
            Node('h', 'supply', -30.0, zeta=1.0),
        ),
        (
            make_pipe('e1', 'a', 'b'),
            make_pipe('e2', 'b', 'd'),
            make_pipe('e3', 'c', 'd'),
            make_pipe('e4', 'a', 'c'),
            make_pipe('f1', 's', 'a'),
            make_pipe('f2', 'h', 'd', length=5e3),
        ),
    )


@pytest.fixture(name='parallel_net')
def fixture_parallel_net(make_pipe):
    """Two identical two-pipe paths from `s` to `t`."""
    return Network(
        (
            Node('m1', 'demand', 0.0),
            Node('m2', 'demand', 0.0),
            Node('s', 'supply', -100.0, zeta=0.2, pressure=50 * BAR),
            Node('t', 'demand', 100.0),
        ),
        (
            make_pipe('p1', 's', 'm1'),
            make_pipe('p2', 'm1', 't'),
            make_pipe('p3', 's', 'm2'),
            make_pipe('p4', 'm2', 't'),
        ),
    )


@pytest.fixture(name='gaslib11_path')
def fixture_gaslib11_path():
    return fixture_path('gaslib11.json')


@pytest.fixture(name='single_pipe_path')
def fixture_single_pipe_path():
    return fixture_path('single_pipe.json')


@pytest.fixture(
    name='parsed_steady_state_archive',
    scope='function',
)
def fixture_parsed_steady_state_archive(tmp_path, monkeypatch, request):
    """
    Copies a shipped network document into a temporary upload as `*.gasnet.json`,
    parses it and yields the `EntryArchive` of the steady-state entry created by the
    parser.
    """
    client = pytest.importorskip('nomad.client')
    monkeypatch.chdir(tmp_path)
    stem = request.param.removesuffix('.json')
    mainfile = f'{stem}.gasnet.json'
    shutil.copy(fixture_path(request.param), mainfile)
    file_archive = client.parse(mainfile)[0]

    archive_path = f'{stem}.archive.json'
    assert file_archive.data.steady_state.m_proxy_value == os.path.abspath(
        archive_path
    )

    yield client.parse(archive_path)[0]
