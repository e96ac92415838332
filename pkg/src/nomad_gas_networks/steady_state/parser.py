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
from typing import TYPE_CHECKING

from nomad.parsing import MatchingParser

from nomad_gas_networks.steady_state.schema import (
    ELNGasNetworkSteadyState,
    RawFileGasNetworkData,
)
from nomad_gas_networks.utils import create_archive

if TYPE_CHECKING:
    from nomad.datamodel.datamodel import (
        EntryArchive,
    )


class GasNetworkParser(MatchingParser):
    """
    Parser for matching gas network documents and creating instances of the
    steady-state ELN.
    """

    def parse(
        self, mainfile: str, archive: 'EntryArchive', logger=None, child_archives=None
    ) -> None:
        data_file = mainfile.split('/')[-1]
        entry = ELNGasNetworkSteadyState(network_file=data_file)
        file_name = f'{data_file.removesuffix(".gasnet.json")}.archive.json'
        archive.data = RawFileGasNetworkData(
            steady_state=create_archive(entry, archive, file_name)
        )
        archive.metadata.entry_name = f'{data_file} network file'
