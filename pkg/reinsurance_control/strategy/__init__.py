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

"""Value functions, optimal strategies and their qualitative checks."""

from .monotonicity import ClaimResult, MonotonicityReport, check_monotonicity_suite
from .value import (
    POST_DEFAULT,
    PRE_DEFAULT,
    StrategyPair,
    StrategyPoint,
    StrategySurface,
    ValueFunction,
    optimal_strategy,
    strategy_at,
    strategy_surface,
    strategy_table,
    value,
    value_table,
)
