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
Exceptions raised by the gas network solver.

All errors derive from `GasNetworkError` so that callers (the CLI, the NOMAD
schema) can catch solver failures in one place. Errors raised by single-edge
hydraulics carry the id of the offending edge once the network solver has
re-raised them.
"""


class GasNetworkError(Exception):
    """Base class for all errors of the gas network package."""


class HydraulicError(GasNetworkError):
    """
    Failure of a single-edge relation. `edge_id` is filled in by the network solver.
    """

    def __init__(self, message: str, edge_id: str | None = None):
        self.message = message
        self.edge_id = edge_id
        if edge_id is not None:
            message = f'{message} (edge "{edge_id}")'
        super().__init__(message)

    def for_edge(self, edge_id: str) -> 'HydraulicError':
        """
        Returns a copy of the error annotated with the given edge id.

        Args:
            edge_id (str): The id of the edge the relation belongs to.

        Returns:
            HydraulicError: An error of the same type carrying the edge id.
        """
        if self.edge_id is not None:
            return self
        return type(self)(self.message, edge_id=edge_id)


class NonPositiveZError(HydraulicError):
    """The compressibility factor is not positive, the pressure is out of range."""


class NoBracketError(HydraulicError):
    """The target potential lies outside the subsonic pressure bracket."""


class SubsonicViolationError(HydraulicError):
    """The edge state leaves the subsonic domain."""


class CompressorBackflowError(HydraulicError):
    """A compressor carries flow against its orientation."""


class ZeroThroughputError(GasNetworkError):
    """A node without throughput feeds flow downstream."""


class UnbalancedError(GasNetworkError):
    """The nodal loads do not sum to zero."""


class NotZeroSumError(GasNetworkError):
    """A sequence passed to the wrapped partial sums does not sum to zero."""


class MultipleCyclesError(GasNetworkError):
    """The network contains more than one independent cycle."""


class NotACycleEdgeError(GasNetworkError):
    """The edge chosen for a cut does not lie on the cycle."""


class CannotFlipCompressorError(GasNetworkError):
    """Compressors have a fixed flow direction and cannot be flipped."""


class CutThroughCompressorError(GasNetworkError):
    """The selected cut edge is a compressor."""


class SignConditionFailedError(GasNetworkError):
    """The cut pressure mismatch has the same strict sign at both ends of I_sol."""

    def __init__(self, message: str, g_lower: float, g_upper: float):
        super().__init__(message)
        self.g_lower = g_lower
        self.g_upper = g_upper


class NoConvergenceError(GasNetworkError):
    """The outer mixed boundary condition iteration did not converge."""

    def __init__(self, message: str, best_residual: float):
        super().__init__(message)
        self.best_residual = best_residual


class UnknownEdgeError(GasNetworkError):
    """No edge with the requested id exists."""


class NetworkParseError(GasNetworkError):
    """A network document could not be parsed."""


class NetworkValidationError(GasNetworkError):
    """A network violates topology or boundary data invariants."""

    def __init__(self, message: str, diagnostics: list[str]):
        super().__init__(f'{message}: ' + '; '.join(diagnostics))
        self.diagnostics = diagnostics


class SupplyReversalError(GasNetworkError):
    """A supply with a prescribed pressure ends up taking gas out of the network."""

    def __init__(self, message: str, inflows: dict[str, float]):
        super().__init__(message)
        self.inflows = inflows
