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

"""Monte Carlo oracles for the control problem."""

from .config import SimConfig
from .estimators import (
    Estimate,
    default_martingale_residual,
    feynman_kac_xi,
    mc_expected_utility,
    paired_difference,
    terminal_utilities,
)
from .paths import SimPath, WealthPaths, simulate_claims, simulate_default, simulate_factor, simulate_wealth
