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

from dataclasses import dataclass
from math import ceil

from ..errors import ModelError

DEFAULT_BLOCK_SIZE = 1024

_MAX_SEED = 2**64


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings; ``seed`` determines all randomness.

    Paths are simulated in blocks of ``block_size`` paths. Path i always
    belongs to block i // block_size, so it does not depend on ``n_paths``.
    With ``antithetic`` the paths 2k and 2k+1 use mirrored Brownian
    increments.
    """

    seed: int
    n_paths: int
    dt_sim: float
    antithetic: bool = False
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if not 0 <= self.seed < _MAX_SEED:
            raise ModelError(f"The seed must be a 64 bit unsigned integer (got {self.seed}).")
        if self.n_paths < 1:
            raise ModelError(f"At least one path is required (got {self.n_paths}).")
        if not self.dt_sim > 0:
            raise ModelError(f"The simulation step must be positive (got {self.dt_sim}).")
        if self.block_size < 2:
            raise ModelError(f"The block size must be at least 2 (got {self.block_size}).")
        if self.antithetic and (self.block_size % 2 or self.n_paths % 2):
            raise ModelError("Antithetic sampling needs an even block size and path count.")

    def check_horizon(self, T: float):
        if self.dt_sim > T / 100 * (1 + 1e-12):
            raise ModelError(f"The simulation step {self.dt_sim} must not exceed T/100={T / 100}.")

    def steps(self, horizon: float) -> int:
        """Number of Euler steps covering ``horizon``; the step is shrunk to fit exactly."""
        return max(1, ceil(horizon / self.dt_sim - 1e-9))

    @property
    def n_blocks(self) -> int:
        return ceil(self.n_paths / self.block_size)

    def kept(self, block: int) -> int:
        """Paths of ``block`` that belong to the run (the rest are discarded)."""
        return min(self.block_size, self.n_paths - block * self.block_size)
