# Copyright 2024 reinsurance-control contributors.
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

"""Finite difference solvers for the post- and pre-default problems."""

from .explicit import (
    PreDefaultSolution,
    check_cfl,
    kappa_convergence,
    solve_post_default,
    solve_pre_default,
)
from .grid import FieldGrid, GridSpec, interpolate
