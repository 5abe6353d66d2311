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

"""Model constants and the closed-form functions of the control problem."""

from .functions import (
    a_star,
    claim_exp_integral,
    coef_h,
    default_terms,
    l_star,
    m_star,
    premium_rate,
    survival,
)
from .params import PRESETS, ModelParams, preset
