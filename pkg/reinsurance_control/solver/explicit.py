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

"""Explicit finite difference schemes for the post- and pre-default problems.

Both schemes march backward in time from the terminal column. Boundary rows
are pinned (xi = 1, u = 0) and the coefficient h is evaluated at the time of
the known column t_j when computing column j - 1.
"""

from dataclasses import replace
from logging import getLogger
from typing import Callable, Iterator, NamedTuple, Optional, Tuple

import numpy as np

from .grid import FieldGrid, GridSpec
from ..errors import CFLViolationError, ModelError, SolverDivergenceError
from ..model.functions import coef_h_factor_part, coef_h_time_part, default_terms
from ..model.params import ModelParams

LOGGER = getLogger(__name__)

DEFAULT_KAPPA = 1e3
DEFAULT_CFL_WARN_RATIO = 0.5
DEFAULT_SATURATION_WARN_FRACTION = 0.01

TimeCoefficient = Callable[[float], float]


class CFLDiagnostic(NamedTuple):
    dt: float
    dz: float
    ratio: float
    """dt*beta^2/dz^2"""
    self_weight_margin: float
    """1 - dt*(beta^2/dz^2 + max|coefficient|), must stay positive."""
    cell_peclet: float
    """dz*max|g|/beta^2; central differences keep positive neighbour weights below 1."""


def _coefficient_tables(
    params: ModelParams, spec: GridSpec, time_part: Optional[TimeCoefficient] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """h split into its time part (per time node) and factor part (per space node)."""
    time_part = time_part or (lambda t: coef_h_time_part(params, t))
    h_time = np.array([time_part(t) for t in spec.t])
    h_factor = np.asarray(coef_h_factor_part(params, spec.z), dtype=float)
    if not (np.all(np.isfinite(h_time)) and np.all(np.isfinite(h_factor))):
        raise ModelError("The coefficient h is not finite on the lattice.")
    return h_time, h_factor


def check_cfl(
    params: ModelParams,
    spec: GridSpec,
    warn_ratio: float = DEFAULT_CFL_WARN_RATIO,
    h_time: Optional[np.ndarray] = None,
    h_factor: Optional[np.ndarray] = None,
) -> CFLDiagnostic:
    """Check that the explicit schemes are stable on ``spec``.

    Raises:
        CFLViolationError: if dt*beta^2/dz^2 >= 1 or the self weight of a node
            in the scheme would not stay positive
    """
    if h_time is None or h_factor is None:
        h_time, h_factor = _coefficient_tables(params, spec)
    dt, dz = spec.dt, spec.dz
    beta2 = params.beta**2
    ratio = dt * beta2 / dz**2
    # h = h_time(t) + h_factor(z), so its extremes are sums of the extremes
    max_abs_h = max(
        abs(h_time.max() + h_factor.max()), abs(h_time.min() + h_factor.min())
    )
    zeroth_order = max_abs_h + params.h_q
    margin = 1 - dt * (beta2 / dz**2 + zeroth_order)
    max_g = float(np.max(np.abs(params.g(spec.z))))
    peclet = dz * max_g / beta2 if beta2 > 0 else (0.0 if max_g == 0 else np.inf)

    diagnostic = CFLDiagnostic(dt=dt, dz=dz, ratio=ratio, self_weight_margin=margin, cell_peclet=peclet)
    if ratio >= 1:
        raise CFLViolationError(
            f"CFL violation: dt*beta^2/dz^2 = {ratio:.6g} >= 1 (dt={dt:.6g}, dz={dz:.6g}).",
            ratio=ratio,
            self_weight_margin=margin,
        )
    if margin <= 0:
        raise CFLViolationError(
            f"CFL violation: dt*(beta^2/dz^2 + max|h| + h^Q) = {1 - margin:.6g} >= 1 "
            f"(ratio dt*beta^2/dz^2 = {ratio:.6g}).",
            ratio=ratio,
            self_weight_margin=margin,
        )
    if ratio > warn_ratio:
        LOGGER.warning(
            f"CFL ratio dt*beta^2/dz^2 = {ratio:.6g} exceeds {warn_ratio}; the scheme is only marginally stable."
        )
    if peclet >= 1:
        LOGGER.warning(
            f"Cell Peclet number {peclet:.6g} >= 1, neighbour weights of the scheme can become negative."
        )
    return diagnostic


def _fail_if_invalid(column: np.ndarray, j: int, positive: bool, name: str):
    invalid = ~np.isfinite(column)
    if positive:
        invalid |= column <= 0
    if np.any(invalid):
        i = int(np.argmax(invalid))
        raise SolverDivergenceError(
            f"{name} became {'nonpositive or ' if positive else ''}nonfinite ({column[i]}) "
            f"at node (i={i}, j={j}).",
            node=(i, j),
        )


def march_post_default(
    params: ModelParams,
    spec: GridSpec,
    time_part: Optional[TimeCoefficient] = None,
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (j, xi column) from j = n_time - 1 down to 0.

    Yielded arrays are fresh and never modified afterwards.
    """
    h_time, h_factor = _coefficient_tables(params, spec, time_part)
    check_cfl(params, spec, h_time=h_time, h_factor=h_factor)

    dt, dz = spec.dt, spec.dz
    diffusion = 0.5 * params.beta**2 / dz**2
    g_inner = params.g(spec.z[1:-1]) / (2 * dz)
    h_inner = h_factor[1:-1]

    xi = np.ones(spec.n_space)
    yield spec.n_time - 1, xi
    for j in range(spec.n_time - 1, 0, -1):
        inner = xi[1:-1]
        up, down = xi[2:], xi[:-2]
        new = np.ones(spec.n_space)
        new[1:-1] = inner + dt * (
            diffusion * (up - 2 * inner + down)
            + g_inner * (up - down)
            - (h_time[j] + h_inner) * inner
        )
        _fail_if_invalid(new, j - 1, positive=True, name="xi_post")
        xi = new
        yield j - 1, xi


def _collect(spec: GridSpec, columns: Iterator[Tuple[int, np.ndarray]], kind) -> FieldGrid:
    indices = spec.stored_indices
    values = np.empty((spec.n_space, len(indices)))
    positions = {j: k for k, j in enumerate(indices)}
    for j, column in columns:
        k = positions.get(j)
        if k is not None:
            values[:, k] = column
    return FieldGrid(
        spec=spec, kind=kind, times=spec.t[indices], values=values, column_indices=indices
    )


def solve_post_default(
    params: ModelParams,
    spec: GridSpec,
    time_part: Optional[TimeCoefficient] = None,
) -> FieldGrid:
    """Solve the linear post-default Cauchy problem for xi_post.

    Args:
        params: the model
        spec: the lattice (with storage stride)
        time_part: replaces h1(t) - h2(t) of the coefficient h (used by oracles)

    Raises:
        CFLViolationError: if the grid is too coarse in time
        SolverDivergenceError: if a value becomes nonpositive or nonfinite
    """
    LOGGER.info(
        f"Solving the post-default problem on {spec.n_space}x{spec.n_time} nodes (dt={spec.dt:.3g}, dz={spec.dz:.3g})."
    )
    return _collect(spec, march_post_default(params, spec, time_part), "xi")


class PreDefaultSolution(NamedTuple):
    u: FieldGrid
    xi: FieldGrid
    saturated_fraction: float
    """Fraction of interior node updates where |u_z| exceeded kappa."""


def _post_columns(
    params: ModelParams, spec: GridSpec, xi_post: FieldGrid
) -> Iterator[Tuple[int, np.ndarray]]:
    if xi_post.spec != spec:
        raise ModelError("xi_post was solved on a different lattice.")
    if spec.stride == 1:
        for k in range(len(xi_post.times) - 1, -1, -1):
            yield int(xi_post.column_indices[k]), xi_post.values[:, k]
        return
    # decimated storage: march again and check the stored columns
    for j, column in march_post_default(params, spec):
        if spec.is_stored(j) and not np.array_equal(column, xi_post.column_at(j)):
            raise ModelError(
                f"xi_post does not match the post-default scheme at time index {j}."
            )
        yield j, column


def march_pre_default(
    params: ModelParams,
    spec: GridSpec,
    xi_post: FieldGrid,
    kappa: float = DEFAULT_KAPPA,
    saturation: Optional[list] = None,
) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield (j, u column) of the log-transformed pre-default problem.

    If given, ``saturation`` receives the number of saturated interior updates
    as its only element once the march has finished.
    """
    if not kappa > 0:
        raise ModelError(f"The gradient cap kappa must be positive (got {kappa}).")
    h_time, h_factor = _coefficient_tables(params, spec)
    check_cfl(params, spec, h_time=h_time, h_factor=h_factor)
    i_term, h_q = default_terms(params)

    dt, dz = spec.dt, spec.dz
    half_beta2 = 0.5 * params.beta**2
    g_inner = params.g(spec.z[1:-1])
    h_inner = h_factor[1:-1]

    saturated = 0
    post = _post_columns(params, spec, xi_post)
    j_post, xi_column = next(post)
    u = np.zeros(spec.n_space)
    yield spec.n_time - 1, u
    for j in range(spec.n_time - 1, 0, -1):
        if j_post != j:
            raise ModelError(f"xi_post is missing the column of time index {j}.")
        inner = u[1:-1]
        up, down = u[2:], u[:-2]
        gradient = (up - down) / (2 * dz)
        laplacian = (up - 2 * inner + down) / dz**2
        magnitude = np.abs(gradient)
        saturated += int(np.count_nonzero(magnitude > kappa))
        capped = np.minimum(magnitude, kappa)
        source = h_time[j] + h_inner + i_term - h_q * np.log(xi_column[1:-1])
        new = np.zeros(spec.n_space)
        new[1:-1] = inner + dt * (
            half_beta2 * laplacian
            + half_beta2 * capped**2
            + g_inner * gradient
            - h_q * inner
            - source
        )
        _fail_if_invalid(new, j - 1, positive=False, name="u_pre")
        u = new
        j_post, xi_column = next(post)
        yield j - 1, u
    if saturation is not None:
        saturation[:] = [saturated]


def solve_pre_default(
    params: ModelParams,
    spec: GridSpec,
    xi_post: FieldGrid,
    kappa: float = DEFAULT_KAPPA,
    saturation_warn_fraction: float = DEFAULT_SATURATION_WARN_FRACTION,
) -> PreDefaultSolution:
    """Solve the semilinear pre-default problem for u_pre and xi_pre = exp(u_pre).

    The quadratic gradient term is truncated at ``kappa``; a warning is logged
    if more than ``saturation_warn_fraction`` of the interior updates hit the
    cap.
    """
    LOGGER.info(
        f"Solving the pre-default problem on {spec.n_space}x{spec.n_time} nodes (kappa={kappa:g})."
    )
    counter: list = []
    u = _collect(spec, march_pre_default(params, spec, xi_post, kappa, counter), "u")
    updates = (spec.n_space - 2) * (spec.n_time - 1)
    fraction = counter[0] / updates if counter else 0.0
    if fraction > saturation_warn_fraction:
        LOGGER.warning(
            f"The gradient cap kappa={kappa:g} was active on {fraction:.2%} of the interior updates, "
            "use a larger kappa."
        )
    return PreDefaultSolution(u=u, xi=u.map(np.exp, "xi"), saturated_fraction=fraction)


def kappa_convergence(
    params: ModelParams, spec: GridSpec, xi_post: FieldGrid, kappa: float = DEFAULT_KAPPA
) -> float:
    """Max-norm change of u_pre when the gradient cap is doubled."""
    base = solve_pre_default(params, spec, xi_post, kappa).u
    doubled = solve_pre_default(params, spec, xi_post, 2 * kappa).u
    return float(np.max(np.abs(base.values - doubled.values)))


def refined_spec(spec: GridSpec) -> GridSpec:
    """The lattice with half the space step and a quarter of the time step.

    dt*beta^2/dz^2 is unchanged; only the first and the last column are stored.
    """
    n_time = 4 * (spec.n_time - 1) + 1
    return GridSpec(
        d=spec.d, n_space=2 * spec.n_space - 1, n_time=n_time, T=spec.T, stride=n_time - 1
    )


def grid_convergence(params: ModelParams, spec: GridSpec, z: float = 0.0) -> float:
    """Relative change of xi_post(0, z) between ``spec`` and its refinement."""
    coarse = replace(spec, stride=spec.n_time - 1)
    base = float(solve_post_default(params, coarse).interpolate(0.0, z))
    refined = float(solve_post_default(params, refined_spec(spec)).interpolate(0.0, z))
    return abs(refined - base) / abs(refined)
