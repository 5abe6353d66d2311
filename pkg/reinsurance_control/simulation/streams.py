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

"""Counter based random streams.

Every (seed, stream, block) triple owns an independent Philox generator,
the stream and block ids live in the upper words of the counter.
"""

import numpy as np

FACTOR_STREAM = 0
DEFAULT_STREAM = 1
CLAIMS_STREAM = 2
WEALTH_STREAM = 3


def block_generator(seed: int, stream: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, stream, block]))


def normals(rng: np.random.Generator, size: int, antithetic: bool) -> np.ndarray:
    """Standard normal draws; antithetic draws come in mirrored pairs (2k, 2k+1)."""
    if not antithetic:
        return rng.standard_normal(size)
    half = rng.standard_normal(size // 2)
    draws = np.empty(size)
    draws[0::2] = half
    draws[1::2] = -half
    return draws
