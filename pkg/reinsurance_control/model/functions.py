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

"""Closed-form scalar functions of the model.

All functions accept scalars or numpy arrays for the spatial/claim arguments
and return numpy values (0-d arrays are returned as python floats).
"""

from math import exp, isfinite, log, log1p
from typing import Callable, NamedTuple, Optional, Tuple, Union

import numpy as np
from scipy.integrate import quad

from .params import ModelParams
from ..errors import HorizonConditionError, ModelError

ArrayLike = Union[float, np.ndarray]

SINGULARITY_EPS = 1e-8
"""Below this distance |b - q| the claim integral uses its Taylor expansion."""

_TIME_SLACK = 1e-12


def _result(value: np.ndarray) -> ArrayLike:
    if np.ndim(value) == 0:
        return float(value)
    return value


def _check_time(params: ModelParams, t: float):
    if not (-_TIME_SLACK <= t <= params.T * (1 + _TIME_SLACK)):
        raise ModelError(f"Time t={t} outside of [0, {params.T}].")


def claim_scale(params: ModelParams, t: float) -> float:
    """q(t) = alpha*e^{r(T-t)}, the utility weight of one unit of wealth at time t."""
    return params.alpha * exp(params.r * (params.T - t))


def survival(params: ModelParams, x: ArrayLike) -> ArrayLike:
    """Survival function of the exponential claim size distribution."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ModelError("Claim sizes must be nonnegative.")
    return _result(np.exp(-params.b * x))


def _retained_mean(params: ModelParams, a: np.ndarray) -> np.ndarray:
    # integral of the survival function over [0, a]
    return -np.expm1(-params.b * a) / params.b


def premium_rate(params: ModelParams, a: ArrayLike) -> ArrayLike:
    """Premium rate left to the insurer after buying excess-of-loss cover above ``a``."""
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ModelError("Retention levels must be nonnegative.")
    lam = params.lambda_claims
    value = (params.eta - params.theta) * lam * params.mu_inf + (
        1 + params.theta
    ) * lam * _retained_mean(params, a)
    return _result(value)


def claim_exp_integral(params: ModelParams, t: float, a: ArrayLike) -> ArrayLike:
    """psi(t, a): integral of e^{q x} times the survival function over [0, a]."""
    _check_time(params, t)
    a = np.asarray(a, dtype=float)
    if np.any(a < 0):
        raise ModelError("Retention levels must be nonnegative.")
    q = claim_scale(params, t)
    eps = params.b - q
    if eps <= 0:
        raise HorizonConditionError(
            f"alpha*e^(r(T-t))={q} >= b={params.b} at t={t}; the claim integral diverges."
        )
    if eps < SINGULARITY_EPS:
        value = a - eps * a**2 / 2 + eps**2 * a**3 / 6
    else:
        value = -np.expm1(-eps * a) / eps
    return _result(value)


def claim_exp_integral_quad(
    params: ModelParams,
    t: float,
    a: float,
    survival_fn: Optional[Callable[[float], float]] = None,
) -> float:
    """psi(t, a) by adaptive quadrature, optionally for another claim distribution."""
    _check_time(params, t)
    if a < 0:
        raise ModelError("Retention levels must be nonnegative.")
    q = claim_scale(params, t)
    if survival_fn is None:
        b = params.b
        value, _ = quad(lambda x: exp((q - b) * x), 0, a, epsabs=1e-13, epsrel=1e-12)
    else:
        value, _ = quad(
            lambda x: exp(q * x) * survival_fn(x), 0, a, epsabs=1e-13, epsrel=1e-12
        )
    return value


def premium_rate_quad(
    params: ModelParams, a: float, survival_fn: Callable[[float], float]
) -> float:
    """Premium rate for a generic claim survival function (mean claim size by quadrature)."""
    if a < 0:
        raise ModelError("Retention levels must be nonnegative.")
    mean, _ = quad(survival_fn, 0, np.inf)
    retained, _ = quad(survival_fn, 0, a)
    lam = params.lambda_claims
    return (params.eta - params.theta) * lam * mean + (1 + params.theta) * lam * retained


def a_star(params: ModelParams, t: ArrayLike) -> ArrayLike:
    """Optimal retention level; the same before and after default."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -_TIME_SLACK) or np.any(t > params.T * (1 + _TIME_SLACK)):
        raise ModelError(f"Times must lie in [0, {params.T}].")
    return _result(log1p(params.theta) / params.alpha * params.discount(t))


def l_star(params: ModelParams, t: ArrayLike, z: ArrayLike) -> ArrayLike:
    """Optimal amount invested in the stock; the same before and after default."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -_TIME_SLACK) or np.any(t > params.T * (1 + _TIME_SLACK)):
        raise ModelError(f"Times must lie in [0, {params.T}].")
    sigma = params.sigma(z)
    if np.any(sigma == 0):
        raise ModelError("Volatility must not vanish.")
    excess = params.mu(z) - params.r
    return _result(excess / (params.alpha * sigma**2) * params.discount(t))


def m_star(
    params: ModelParams, t: ArrayLike, xi_pre: ArrayLike, xi_post: ArrayLike
) -> ArrayLike:
    """Optimal pre-default amount invested in the defaultable bond."""
    xi_pre = np.asarray(xi_pre, dtype=float)
    xi_post = np.asarray(xi_post, dtype=float)
    if np.any(xi_pre <= 0) or np.any(xi_post <= 0):
        raise ModelError("The value function coefficients must be positive.")
    return m_star_from_logs(params, t, np.log(xi_pre), np.log(xi_post))


def m_star_from_logs(
    params: ModelParams, t: ArrayLike, u_pre: ArrayLike, u_post: ArrayLike
) -> ArrayLike:
    """m* given ln(xi_pre) and ln(xi_post) directly."""
    t = np.asarray(t, dtype=float)
    if np.any(t < -_TIME_SLACK) or np.any(t > params.T * (1 + _TIME_SLACK)):
        raise ModelError(f"Times must lie in [0, {params.T}].")
    log_premium = -log(params.delta)
    value = (
        (np.asarray(u_pre) - np.asarray(u_post) + log_premium)
        / (params.alpha * params.zeta)
        * params.discount(t)
    )
    return _result(value)


def m_star_bounds(params: ModelParams, t: ArrayLike) -> Tuple[ArrayLike, ArrayLike]:
    """Lower and upper bound of m* implied by the sandwich of the pre-default solution."""
    scale = params.discount(t) / (params.alpha * params.zeta)
    return _result((1 - params.delta) * scale), _result(-log(params.delta) * scale)


class CoefficientTerms(NamedTuple):
    premium: float
    """h1: utility weight of the premium income."""
    claims: float
    """h2: utility weight of the retained claims."""
    market: ArrayLike
    """h3: squared Sharpe ratio term of the stock."""


def coef_h_terms(params: ModelParams, t: float, z: ArrayLike) -> CoefficientTerms:
    """The three parts of the zeroth order coefficient h(t, z) = h1 - h2 + h3."""
    q = claim_scale(params, t)
    retention = a_star(params, t)
    premium = premium_rate(params, retention) * q
    claims = params.lambda_claims * q * claim_exp_integral(params, t, retention)
    sigma = params.sigma(z)
    market = (params.mu(z) - params.r) ** 2 / (2 * sigma**2)
    return CoefficientTerms(premium, claims, _result(market))


def coef_h_time_part(params: ModelParams, t: float) -> float:
    """h1(t) - h2(t), the part of h independent of the factor."""
    terms = coef_h_terms(params, t, 0.0)
    return terms.premium - terms.claims


def coef_h_factor_part(params: ModelParams, z: ArrayLike) -> ArrayLike:
    """h3(z)."""
    sigma = params.sigma(z)
    return _result((params.mu(z) - params.r) ** 2 / (2 * sigma**2))


def coef_h(params: ModelParams, t: float, z: ArrayLike) -> ArrayLike:
    """Zeroth order coefficient of the post-default Cauchy problem."""
    terms = coef_h_terms(params, t, z)
    value = terms.premium - terms.claims + np.asarray(terms.market)
    if not np.all(np.isfinite(value)):
        raise ModelError(f"Coefficient h is not finite at t={t}.")
    return _result(value)


def default_terms(params: ModelParams) -> Tuple[float, float]:
    """The constant I of the pre-default source term and the intensity h^Q."""
    inv_delta = 1 / params.delta
    i_term = (1 - inv_delta + inv_delta * log(inv_delta)) * params.h_p
    # rounding may push the exact zero at delta=1 slightly negative
    return max(i_term, 0.0), params.h_q


def default_shift_bound(params: ModelParams) -> float:
    """(Delta/h^P)*I, the width of the pre-default sandwich (its h^P -> 0 limit is 0)."""
    if params.h_p == 0:
        return 0.0
    i_term, h_q = default_terms(params)
    return i_term / h_q


def default_closed_form_shift(params: ModelParams, t: ArrayLike) -> ArrayLike:
    """w(t) with u_pre = u_post + w(t) for the problem on the whole real line."""
    t = np.asarray(t, dtype=float)
    if params.h_p == 0:
        return _result(np.zeros_like(t))
    _, h_q = default_terms(params)
    width = default_shift_bound(params)
    return _result(width * np.expm1(-h_q * (params.T - t)))


def effective_bond_drift(params: ModelParams) -> float:
    """Pre-default drift per unit of bond holding once the default compensator is expanded."""
    value = params.credit_spread * (1 - params.delta) + params.zeta * params.h_p
    assert isfinite(value)
    return value
