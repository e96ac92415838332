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
import hashlib
import json
import os.path
import re
import sys
from typing import (
    TYPE_CHECKING,
)

import numpy as np
import pint
import structlog

if TYPE_CHECKING:
    from nomad.datamodel.data import (
        ArchiveSection,
    )
    from nomad.datamodel.datamodel import (
        EntryArchive,
    )
    from structlog.stdlib import (
        BoundLogger,
    )

ureg = pint.UnitRegistry()


def _stderr_logger(*args) -> structlog.PrintLogger:
    return structlog.PrintLogger(file=sys.stderr)


def configure_default_logging() -> None:
    """
    Routes log events to stderr unless structlog has been configured by the
    application (the CLI, NOMAD), so that results written to stdout stay parseable.
    """
    if structlog.is_configured():
        return
    structlog.configure(logger_factory=_stderr_logger)


configure_default_logging()


def natural_key(node_id: str) -> tuple:
    """Sort key that orders ids with numbers by value, e.g. `7` before `10`."""
    return tuple(
        (0, int(part), '') if part.isdigit() else (1, 0, part)
        for part in re.split(r'(\d+)', node_id)
        if part
    )


def get_logger(name: str) -> 'BoundLogger':
    return structlog.get_logger(name)


def to_si(value: float, unit: str) -> float:
    """
    Converts a document value into its SI magnitude.

    Args:
        value (float): The value as written in the document.
        unit (str): The unit of the value, e.g. `bar` or `km`.

    Returns:
        float: The magnitude in the matching SI unit.
    """
    return float(ureg.Quantity(value, unit).to_base_units().magnitude)


def from_si(value: float, unit: str) -> float:
    """
    Converts an SI magnitude into the given document unit.

    Args:
        value (float): The SI magnitude.
        unit (str): The target unit, e.g. `bar`.

    Returns:
        float: The magnitude in `unit`.
    """
    quantity = ureg.Quantity(1.0, unit).to_base_units()
    return float(ureg.Quantity(value, quantity.units).to(unit).magnitude)


def round_significant(value: float, digits: int = 6) -> float:
    """
    Rounds to a number of significant figures.

    Args:
        value (float): The value to round.
        digits (int, optional): Number of significant figures. Defaults to 6.

    Returns:
        float: The rounded value.
    """
    if value == 0 or not np.isfinite(value):
        return float(value)
    return float(f'{value:.{digits}g}')


def file_hash(path: str) -> str:
    with open(path, 'rb') as file:
        return hashlib.sha256(file.read()).hexdigest()


def get_reference(upload_id: str, entry_id: str) -> str:
    return f'../uploads/{upload_id}/archive/{entry_id}#data'


def get_entry_id_from_file_name(file_name: str, archive: 'EntryArchive') -> str:
    from nomad.utils import hash

    return hash(archive.metadata.upload_id, file_name)


def create_archive(
    entity: 'ArchiveSection',
    archive: 'EntryArchive',
    file_name: str,
) -> str:
    """
    Writes `entity` as the data section of a new `.archive.json` file next to the
    mainfile and returns a reference to it.

    Args:
        entity (ArchiveSection): The section to store.
        archive (EntryArchive): The archive of the mainfile being parsed.
        file_name (str): Name of the archive file, relative to the upload.

    Returns:
        str: The path (client context) or the upload reference of the new entry.
    """
    from nomad.datamodel.context import ClientContext

    entity_entry = entity.m_to_dict(with_root_def=True)
    if isinstance(archive.m_context, ClientContext):
        with open(file_name, 'w') as outfile:
            json.dump({'data': entity_entry}, outfile, indent=4)
        return os.path.abspath(file_name)
    if not archive.m_context.raw_path_exists(file_name):
        with archive.m_context.raw_file(file_name, 'w') as outfile:
            json.dump({'data': entity_entry}, outfile)
        archive.m_context.process_updated_raw_file(file_name)
    return get_reference(
        archive.metadata.upload_id, get_entry_id_from_file_name(file_name, archive)
    )
