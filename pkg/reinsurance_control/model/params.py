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

"""Model constants of the insurer's control problem."""

from dataclasses import dataclass, field
from math import exp, isfinite, log
from typing import Any, Callable, Dict, Optional

import numpy as np

from ..errors import HorizonConditionError, ModelError

SIGMA_KINDS = ("scott", "constant", "custom")
"""Volatility selectors: ``scott`` is sigma(z)=e^z."""

G_KINDS = ("ou", "zero", "custom")
"""Factor drift selectors: ``ou`` is g(z)=ou_rate*(ou_mean - z)."""

FactorFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelParams:
    """All market, insurance and utility constants.

    The bond's credit spread is derived from the other fields and cannot be
    set independently. Set ``relaxed`` to allow the degenerate loadings
    (``theta <= eta`` or ``eta == 0``) used for limiting cases.
    """

    r: float
    mu0: float
    beta: float
    lambda_claims: float
    b: float
    eta: float
    theta: float
    alpha: float
    T: float
    h_p: float
    delta: float
    zeta: float
    sigma_kind: str = "scott"
    g_kind: str = "ou"
    ou_rate: float = 0.1
    ou_mean: float = 1.0
    sigma_const: float = 1.0
    rho: float = 0.0
    sigma_fn: Optional[FactorFunction] = field(default=None, compare=False, repr=False)
    g_fn: Optional[FactorFunction] = field(default=None, compare=False, repr=False)
    credit_spread: float = field(init=False)
    relaxed: bool = field(default=False, compare=False)

    def __post_init__(self):
        self._validate(self.relaxed)
        object.__setattr__(self, "credit_spread", (self.h_p / self.delta) * self.zeta)

    def _validate(self, relaxed: bool):
        for name in (
            "r",
            "mu0",
            "beta",
            "lambda_claims",
            "b",
            "eta",
            "theta",
            "alpha",
            "T",
            "h_p",
            "delta",
            "zeta",
            "ou_rate",
            "ou_mean",
            "sigma_const",
        ):
            if not isfinite(getattr(self, name)):
                raise ModelError(f"Parameter {name} must be finite (got {getattr(self, name)}).")
        if relaxed:
            if not (self.theta >= 0 and self.eta >= 0):
                raise ModelError(
                    f"Safety loadings must be nonnegative (got eta={self.eta}, theta={self.theta})."
                )
        elif not (self.theta > self.eta > 0):
            raise ModelError(
                f"Safety loadings must satisfy theta > eta > 0 (got eta={self.eta}, theta={self.theta})."
            )
        if self.alpha <= 0:
            raise ModelError(f"Risk aversion alpha must be positive (got {self.alpha}).")
        if self.b <= 0:
            raise ModelError(f"Claim rate b must be positive (got {self.b}).")
        if self.lambda_claims < 0 or (self.lambda_claims == 0 and not relaxed):
            raise ModelError(f"Claim intensity must be positive (got {self.lambda_claims}).")
        if self.T <= 0:
            raise ModelError(f"Horizon T must be positive (got {self.T}).")
        if self.beta == 0 and not relaxed:
            raise ModelError("Factor diffusion beta must not be 0.")
        if not 0 < self.delta <= 1:
            raise ModelError(f"Delta must lie in (0, 1] (got {self.delta}).")
        if not 0 < self.zeta <= 1:
            raise ModelError(f"Loss rate zeta must lie in (0, 1] (got {self.zeta}).")
        if self.h_p < 0:
            raise ModelError(f"Default intensity h_p must be nonnegative (got {self.h_p}).")
        if self.rho != 0:
            raise ModelError("Only the uncorrelated case rho=0 is supported.")
        if self.r < 0:
            raise ModelError(f"The risk-free rate must be nonnegative (got {self.r}).")
        if self.sigma_kind not in SIGMA_KINDS:
            raise ModelError(f"Unknown sigma_kind '{self.sigma_kind}', expected one of {SIGMA_KINDS}.")
        if self.g_kind not in G_KINDS:
            raise ModelError(f"Unknown g_kind '{self.g_kind}', expected one of {G_KINDS}.")
        if self.sigma_kind == "custom" and self.sigma_fn is None:
            raise ModelError("sigma_kind 'custom' requires a sigma_fn.")
        if self.g_kind == "custom" and self.g_fn is None:
            raise ModelError("g_kind 'custom' requires a g_fn.")
        if self.sigma_kind == "constant" and self.sigma_const <= 0:
            raise ModelError(f"sigma_const must be positive (got {self.sigma_const}).")
        # alpha*e^{r(T-t)} is largest at t=0
        if self.alpha * exp(self.r * self.T) >= self.b:
            limit = log(self.b / self.alpha) / self.r if self.r > 0 else None
            raise HorizonConditionError(
                f"Horizon condition violated: alpha*e^(r*T)={self.alpha * exp(self.r * self.T)} >= b={self.b}"
                + (f" (T must be < {limit})." if limit is not None else ".")
            )

    @property
    def mu_inf(self) -> float:
        """Mean claim size of the exponential claim distribution."""
        return 1 / self.b

    @property
    def h_q(self) -> float:
        """Risk-neutral default intensity."""
        return self.h_p / self.delta

    def discount(self, t):
        """The factor e^{-r(T-t)} shared by all optimal controls."""
        return np.exp(-self.r * (self.T - np.asarray(t, dtype=float)))

    def sigma(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.sigma_kind == "scott":
            return np.exp(z)
        if self.sigma_kind == "constant":
            return np.full_like(z, self.sigma_const)
        assert self.sigma_fn is not None
        return np.broadcast_to(np.asarray(self.sigma_fn(z), dtype=float), z.shape)

    def g(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if self.g_kind == "ou":
            return self.ou_rate * (self.ou_mean - z)
        if self.g_kind == "zero":
            return np.zeros_like(z)
        assert self.g_fn is not None
        return np.broadcast_to(np.asarray(self.g_fn(z), dtype=float), z.shape)

    def mu(self, z) -> np.ndarray:
        """Stock drift; constant in the Scott model."""
        return np.full_like(np.asarray(z, dtype=float), self.mu0)


EXAMPLE_1: Dict[str, Any] = {
    "r": 0.04,
    "mu0": 0.3,
    "sigma_kind": "scott",
    "g_kind": "ou",
    "ou_rate": 0.1,
    "ou_mean": 1.0,
    "beta": 0.3,
    "lambda_claims": 3.0,
    "b": 2.0,
    "eta": 7 / 3,
    "theta": 8 / 3,
    "alpha": 0.02,
    "T": 5.0,
    "h_p": 0.25,
    "delta": 0.25,
    "zeta": 0.4,
}

PRESETS: Dict[str, Dict[str, Any]] = {
    "example1": EXAMPLE_1,
    "example2": {**EXAMPLE_1, "alpha": 0.2, "T": 50.0},
    "example3": {**EXAMPLE_1, "alpha": 0.5, "T": 1.0},
    "example4": {**EXAMPLE_1, "T": 10.0},
    "example5": {**EXAMPLE_1, "T": 10.0},
}
"""Parameter blocks of the numerical examples (keyed by preset name)."""

PRESET_GRIDS: Dict[str, Dict[str, Any]] = {
    "example1": {"d": 2.0, "n_space": 401, "n_time": 50001},
    "example2": {"d": 2.0, "n_space": 401, "n_time": 50001},
}


def preset(name: str, **overrides) -> ModelParams:
    """Build the model parameters of a named example, optionally overriding fields."""
    try:
        values = PRESETS[name]
    except KeyError:
        raise ModelError(f"Unknown preset '{name}', expected one of {sorted(PRESETS)}.")
    return ModelParams(**{**values, **overrides})
