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

"""Probe-grid checks of the qualitative properties of values and controls."""

from dataclasses import dataclass, field, replace
from logging import getLogger
from typing import Any, Dict, List

import numpy as np

from .value import POST_DEFAULT, PRE_DEFAULT, ValueFunction, value
from ..model.functions import a_star, l_star, m_star, m_star_bounds
from ..solver.explicit import DEFAULT_KAPPA, solve_pre_default

LOGGER = getLogger(__name__)

DEFAULT_MONOTONICITY_TOLERANCE = 1e-6
DEFAULT_FIELD_TOLERANCE = 1e-3


@dataclass(frozen=True)
class ClaimResult:
    name: str
    passed: bool
    worst_violation: float
    gating: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worstViolation": self.worst_violation,
            "gating": self.gating,
        }


@dataclass
class MonotonicityReport:
    claims: List[ClaimResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        """True if every gating claim passed."""
        return all(c.passed for c in self.claims if c.gating)

    def __getitem__(self, name: str) -> ClaimResult:
        for claim in self.claims:
            if claim.name == name:
                return claim
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {"passed": self.passed, "claims": [c.to_dict() for c in self.claims]}


def _claim(name: str, violation: float, tolerance: float, gating: bool = True) -> ClaimResult:
    violation = max(float(violation), 0.0)
    result = ClaimResult(name, violation <= tolerance, violation, gating)
    if not result.passed:
        log = LOGGER.warning if gating else LOGGER.info
        log(f"Claim '{name}' violated by {violation:.3g} (tolerance {tolerance:.3g}).")
    return result


def _probe_times(vf: ValueFunction, count: int) -> np.ndarray:
    times = vf.xi_post.times
    picks = np.unique(np.linspace(0, len(times) - 1, min(count, len(times))).round().astype(int))
    return times[picks]


def _probe_factors(vf: ValueFunction) -> np.ndarray:
    # nodes of the inner half, away from the pinned boundary rows and their layers
    z = vf.xi_post.spec.z
    return z[np.abs(z) <= vf.xi_post.spec.d / 2]


def _interior_minimum(values: np.ndarray) -> bool:
    k = int(np.argmin(values))
    return 0 < k < len(values) - 1


def check_monotonicity_suite(
    vf: ValueFunction,
    tolerance: float = DEFAULT_MONOTONICITY_TOLERANCE,
    field_tolerance: float = DEFAULT_FIELD_TOLERANCE,
    kappa: float = DEFAULT_KAPPA,
    probe_count: int = 21,
    solve_full_premium: bool = True,
) -> MonotonicityReport:
    """Evaluate the qualitative claims about values and controls on probe grids.

    Claims derived from the solved fields (value dominance, bond bounds) get
    ``field_tolerance`` on the log field level on top of ``tolerance``.
    With ``solve_full_premium`` the pre-default problem is solved again with
    Delta=1 to check that no bond is held without a default risk premium.
    """
    params = vf.params
    ts = _probe_times(vf, probe_count)
    zs = _probe_factors(vf)
    report = MonotonicityReport()

    # value nonincreasing in t (holds on the tested examples only)
    violation = 0.0
    for H in (PRE_DEFAULT, POST_DEFAULT):
        v = np.array([value(vf, t, 1.0, 0.0, H) for t in ts])
        violation = max(violation, float(np.max(np.diff(v), initial=0.0)))
    report.claims.append(_claim("value_nonincreasing_in_t", violation, tolerance, gating=False))

    # value increasing in y
    ys = np.linspace(-5.0, 5.0, 11)
    violation = 0.0
    for H in (PRE_DEFAULT, POST_DEFAULT):
        for t in ts:
            v = value(vf, t, ys, np.zeros_like(ys), H)
            violation = max(violation, float(np.max(-np.diff(v), initial=0.0)))
    report.claims.append(_claim("value_increasing_in_y", violation, tolerance))

    # pre-default value dominates: xi_pre <= xi_post up to the field tolerance
    violation = 0.0
    for t in ts:
        xi_pre = vf.xi_pre.interpolate(t, zs)
        xi_post = vf.xi_post.interpolate(t, zs)
        violation = max(violation, float(np.max(np.log(xi_pre) - np.log(xi_post))))
    report.claims.append(
        _claim("pre_default_value_dominates", violation, tolerance + field_tolerance)
    )

    # a* increasing in t
    a = np.asarray(a_star(params, ts))
    violation = float(np.max(-np.diff(a), initial=0.0))
    report.claims.append(_claim("retention_increasing_in_t", violation, tolerance))

    # l* decreasing in z for the Scott volatility, |l*| increasing in t
    violation = 0.0
    for t in ts:
        l = np.asarray(l_star(params, t, zs))
        violation = max(violation, float(np.max(np.diff(l), initial=0.0)))
    report.claims.append(
        _claim(
            "stock_decreasing_in_z", violation, tolerance, gating=params.sigma_kind == "scott"
        )
    )
    violation = 0.0
    for z in zs:
        l = np.abs(np.asarray(l_star(params, ts, z)))
        violation = max(violation, float(np.max(-np.diff(l), initial=0.0)))
    report.claims.append(_claim("stock_increasing_in_t", violation, tolerance))

    # m* inside the bounds implied by the sandwich
    violation = 0.0
    for t in ts:
        m = np.asarray(
            m_star(params, t, vf.xi_pre.interpolate(t, zs), vf.xi_post.interpolate(t, zs))
        )
        lower, upper = m_star_bounds(params, t)
        slack = field_tolerance * float(params.discount(t)) / (params.alpha * params.zeta)
        violation = max(
            violation, float(np.max(lower - m)) - slack, float(np.max(m - upper)) - slack
        )
    report.claims.append(_claim("bond_within_bounds", violation, tolerance))

    # a* and l* halve when alpha doubles
    doubled = replace(params, alpha=2 * params.alpha, relaxed=params.relaxed)
    violation = 0.0
    for t in ts:
        a_base = a_star(params, t)
        violation = max(violation, abs(2 * a_star(doubled, t) - a_base) / abs(a_base or 1.0))
        l_base = np.asarray(l_star(params, t, zs))
        scale = np.maximum(np.abs(l_base), 1.0)
        violation = max(
            violation, float(np.max(np.abs(2 * np.asarray(l_star(doubled, t, zs)) - l_base) / scale))
        )
    report.claims.append(_claim("controls_halve_when_alpha_doubles", violation, tolerance))

    # no bond holdings without a default risk premium
    if solve_full_premium:
        full_premium = replace(params, delta=1.0, relaxed=params.relaxed)
        xi_full = solve_pre_default(full_premium, vf.xi_post.spec, vf.xi_post, kappa).xi
        violation = 0.0
        for t in ts:
            m = np.asarray(
                m_star(full_premium, t, xi_full.interpolate(t, zs), vf.xi_post.interpolate(t, zs))
            )
            slack = field_tolerance * float(params.discount(t)) / (params.alpha * params.zeta)
            violation = max(violation, float(np.max(np.abs(m))) - slack)
        report.claims.append(_claim("no_bond_at_full_premium", violation, tolerance))

    # m* first drops then rises in z (shape only, not gating)
    t_mid = ts[len(ts) // 2]
    m_mid = np.asarray(
        m_star(params, t_mid, vf.xi_pre.interpolate(t_mid, zs), vf.xi_post.interpolate(t_mid, zs))
    )
    report.claims.append(
        ClaimResult("bond_dips_in_z", _interior_minimum(m_mid), 0.0, gating=False)
    )

    LOGGER.info(
        f"Monotonicity suite: {sum(c.passed for c in report.claims)}/{len(report.claims)} claims passed."
    )
    return report
