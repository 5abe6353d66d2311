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

"""Checks of the solved fields against their analytic bounds."""

from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from .grid import FieldGrid
from ..model.functions import default_closed_form_shift, default_shift_bound
from ..model.params import ModelParams


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    worst_violation: float
    tolerance: float
    gating: bool = True
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "passed": bool(self.passed),
            "worstViolation": self.worst_violation,
            "tolerance": self.tolerance,
            "gating": self.gating,
            **self.details,
        }


def _log_post(xi_post: FieldGrid, u_pre: FieldGrid) -> np.ndarray:
    if xi_post.spec != u_pre.spec or not np.array_equal(xi_post.times, u_pre.times):
        raise ValueError("Both fields must be stored on the same lattice columns.")
    return np.log(xi_post.values)


def sandwich_check(
    params: ModelParams, xi_post: FieldGrid, u_pre: FieldGrid, tolerance: float = 1e-3
) -> CheckResult:
    """ln(xi_post) - width - tol <= u_pre <= ln(xi_post) + tol at every stored node."""
    u_post = _log_post(xi_post, u_pre)
    width = default_shift_bound(params)
    above = float(np.max(u_pre.values - u_post))
    below = float(np.max(u_post - width - u_pre.values))
    worst = max(above, below, 0.0)
    return CheckResult(
        "sandwich", worst <= tolerance, worst, tolerance, details={"width": width}
    )


def reduction_check(xi_post: FieldGrid, u_pre: FieldGrid, tolerance: float) -> CheckResult:
    """max |u_pre - ln(xi_post)| over every stored node.

    Without default risk both problems coincide, but the central scheme for
    u_pre only agrees with the log of the linear scheme to second order in
    dz, so the result is reported and does not gate.
    """
    u_post = _log_post(xi_post, u_pre)
    deviation = np.abs(u_pre.values - u_post)
    inner = np.abs(u_pre.spec.z) <= u_pre.spec.d / 2
    worst = float(np.max(deviation))
    origin = int(np.argmin(np.abs(u_pre.spec.z)))
    return CheckResult(
        "reduction",
        worst <= tolerance,
        worst,
        tolerance,
        gating=False,
        details={
            "innerHalfWorst": float(np.max(deviation[inner])),
            "atOrigin": float(deviation[origin, 0]),
        },
    )


def closed_form_shift_check(
    params: ModelParams, xi_post: FieldGrid, u_pre: FieldGrid, tolerance: float
) -> CheckResult:
    """u_pre - ln(xi_post) against the whole-line shift w(t) on the inner half of the lattice.

    The artificial boundary values distort the shift near the edges, so the
    result is informative only.
    """
    u_post = _log_post(xi_post, u_pre)
    inner = np.abs(u_pre.spec.z) <= u_pre.spec.d / 2
    shift = np.asarray(default_closed_form_shift(params, u_pre.times)) * np.ones(len(u_pre.times))
    deviation = np.abs(u_pre.values[inner] - u_post[inner] - shift[None, :])
    worst = float(np.max(deviation))
    return CheckResult("closed_form_shift", worst <= tolerance, worst, tolerance, gating=False)
