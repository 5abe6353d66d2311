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

"""Exceptions raised by the model, solver and simulator."""

from typing import Optional, Tuple


class ModelError(ValueError):
    """Invalid model parameters or invalid arguments to a model function."""


class HorizonConditionError(ModelError):
    """The horizon is too long for the claim integrals to converge (alpha*e^{r(T-t)} >= b)."""


class CFLViolationError(ModelError):
    """The explicit scheme would be unstable on the requested grid."""

    def __init__(self, message: str, ratio: float, self_weight_margin: float):
        super().__init__(message)
        self.ratio = ratio
        self.self_weight_margin = self_weight_margin


class SolverDivergenceError(ArithmeticError):
    """A nonpositive or nonfinite value appeared during a backward march."""

    def __init__(self, message: str, node: Tuple[int, int]):
        super().__init__(message)
        self.node = node


class SimulationError(ArithmeticError):
    """A simulated path produced a nonfinite wealth value."""

    def __init__(self, message: str, path: Optional[int] = None, time: Optional[float] = None):
        super().__init__(message)
        self.path = path
        self.time = time


class MissingArtifactError(FileNotFoundError):
    """A command needs an artifact that an earlier command should have written."""
