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
from pydantic import BaseModel, ConfigDict, Field


class SolverSettings(BaseModel):
    """
    Numerical knobs of the steady-state solver. Defaults reproduce the documented
    behavior; a NOMAD deployment can override them through the plugin entry point.
    """

    model_config = ConfigDict(frozen=True)

    p_lo: float = Field(
        1e4,
        gt=0,
        description='Lower end of the pressure bracket in Pa.',
    )
    p_hi: float = Field(
        2e7,
        gt=0,
        description='Upper end of the pressure bracket in Pa.',
    )
    newton_max_iter: int = Field(
        50,
        ge=1,
        description='Maximum number of safeguarded Newton steps for inverting F.',
    )
    bisection_max_iter: int = Field(
        200,
        ge=1,
        description='Maximum number of bisection steps after the Newton phase.',
    )
    f_rtol: float = Field(
        1e-9,
        gt=0,
        description='Relative tolerance on the potential when inverting F.',
    )
    f_atol: float = Field(
        1e-4,
        gt=0,
        description='Absolute tolerance on the potential in Pa^2.',
    )
    p_gauge: float = Field(
        1e5,
        gt=0,
        description='Gauge pressure in Pa for numerically integrated potentials.',
    )
    quad_atol: float = Field(
        1.0,
        gt=0,
        description='Absolute tolerance in Pa^2 of the antiderivative quadrature.',
    )
    quad_rtol: float = Field(
        1e-10,
        gt=0,
        description='Relative tolerance of the antiderivative quadrature.',
    )
    fd_rel_step: float = Field(
        1e-6,
        gt=0,
        description='Relative finite difference step for dZ/dp of custom models.',
    )
    prescan_points: int = Field(
        17,
        ge=2,
        description='Number of uniform points scanned on I_sol before bisection.',
    )
    cut_pressure_tol: float = Field(
        1e-3,
        gt=0,
        description='Stop bisection once the cut pressure mismatch is below this (Pa).',
    )
    cut_width_factor: float = Field(
        1e-10,
        gt=0,
        description='Stop bisection once the interval is narrower than this times '
        'max(1, lambda_plus).',
    )
    cut_max_iter: int = Field(
        200,
        ge=1,
        description='Maximum number of bisection steps on the cut parameter.',
    )
    mixed_tol: float = Field(
        10.0,
        gt=0,
        description='Tolerance in Pa on the supply pressures of the mixed solve.',
    )
    mixed_max_iter: int = Field(
        100,
        ge=1,
        description='Maximum number of quasi-Newton iterations of the mixed solve.',
    )
    mixed_damping: float = Field(
        0.5,
        gt=0,
        lt=1,
        description='Step reduction factor applied when the residual increases.',
    )
    mixed_fd_step: float = Field(
        1e-3,
        gt=0,
        description='Relative load perturbation for the initial Jacobian.',
    )


DEFAULT_SETTINGS = SolverSettings()


def resolve(settings: SolverSettings | None) -> SolverSettings:
    return DEFAULT_SETTINGS if settings is None else settings
