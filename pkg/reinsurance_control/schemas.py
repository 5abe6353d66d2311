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

"""Marshmallow schemas of the JSON run configuration."""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

import marshmallow as ma
from marshmallow.validate import ContainsOnly, OneOf, Range

from .errors import ModelError
from .model.params import PRESETS, ModelParams
from .simulation.config import DEFAULT_BLOCK_SIZE, SimConfig
from .solver.grid import DEFAULT_STRIDE, GridSpec
from .util import camelcase

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7")


class MaBaseSchema(ma.Schema):
    """Base schema that automatically changes python snake case to camelCase in json."""

    class Meta:
        unknown = ma.RAISE

    def on_bind_field(self, field_name: str, field_obj: ma.fields.Field):
        field_obj.data_key = camelcase(field_obj.data_key or field_name)


def _required_float(**kwargs) -> ma.fields.Float:
    return ma.fields.Float(required=True, allow_none=False, allow_nan=False, **kwargs)


class ModelParamsSchema(MaBaseSchema):
    """Model constants; ``preset`` names an example whose values the other keys override."""

    preset = ma.fields.String(load_only=True, validate=OneOf(sorted(PRESETS)))
    r = _required_float()
    mu0 = _required_float()
    sigma_kind = ma.fields.String(load_default="scott", validate=OneOf(("scott", "constant")))
    g_kind = ma.fields.String(load_default="ou", validate=OneOf(("ou", "zero")))
    ou_rate = ma.fields.Float(load_default=0.1, allow_nan=False)
    ou_mean = ma.fields.Float(load_default=1.0, allow_nan=False)
    sigma_const = ma.fields.Float(load_default=1.0, allow_nan=False)
    beta = _required_float()
    rho = ma.fields.Float(load_default=0.0, validate=OneOf((0.0,)))
    lambda_claims = _required_float()
    b = _required_float()
    eta = _required_float()
    theta = _required_float()
    alpha = _required_float()
    T = _required_float(data_key="T")
    h_p = _required_float()
    delta = _required_float(data_key="Delta")
    zeta = _required_float()
    credit_spread = ma.fields.Float(allow_nan=False)
    relaxed = ma.fields.Boolean(load_default=False, load_only=True)

    def _accept_snake_case(self, data: Mapping[str, Any]) -> Dict[str, Any]:
        """Map the python names of the fields (sigma_kind, lambda_claims, h_p, ...) to their json keys."""
        aliases = {
            name: bound.data_key
            for name, bound in self.load_fields.items()
            if bound.data_key and bound.data_key != name
        }
        normalized: Dict[str, Any] = {}
        for key, value in data.items():
            target = aliases.get(key, key)
            if target in normalized:
                raise ma.ValidationError(
                    f"'{target}' is given twice (also as '{key}').", field_name=target
                )
            normalized[target] = value
        return normalized

    @ma.pre_load
    def apply_preset(self, data: Any, **kwargs):
        if not isinstance(data, Mapping):
            return data
        data = self._accept_snake_case(data)
        if "preset" not in data:
            return data
        name = data["preset"]
        if name not in PRESETS:
            raise ma.ValidationError(
                f"Unknown preset, expected one of {sorted(PRESETS)}.", field_name="preset"
            )
        base = self.dump(ModelParams(**PRESETS[name]))
        base.pop("creditSpread", None)
        base.update({k: v for k, v in data.items() if k != "preset"})
        return base

    @ma.post_load
    def make_params(self, data: Dict[str, Any], **kwargs) -> ModelParams:
        credit_spread = data.pop("credit_spread", None)
        try:
            params = ModelParams(**data)
        except ModelError as err:
            raise ma.ValidationError(str(err))
        if credit_spread is not None and abs(credit_spread - params.credit_spread) > 1e-12:
            raise ma.ValidationError(
                f"creditSpread must equal hP/Delta*zeta={params.credit_spread}.",
                field_name="creditSpread",
            )
        return params


class GridSchema(MaBaseSchema):
    d = _required_float(validate=Range(min=0, min_inclusive=False))
    n_space = ma.fields.Integer(data_key="N", required=True, validate=Range(min=3))
    n_time = ma.fields.Integer(data_key="Mt", required=True, validate=Range(min=2))
    stride = ma.fields.Integer(validate=Range(min=1))


class SimConfigSchema(MaBaseSchema):
    seed = ma.fields.Integer(required=True, validate=Range(min=0, max=2**64 - 1))
    n_paths = ma.fields.Integer(required=True, validate=Range(min=1))
    dt_sim = _required_float(validate=Range(min=0, min_inclusive=False))
    antithetic = ma.fields.Boolean(load_default=False)
    block_size = ma.fields.Integer(validate=Range(min=2))
    y0 = ma.fields.Float(load_default=0.0, allow_nan=False)
    z0 = ma.fields.Float(load_default=0.0, allow_nan=False)
    export_paths = ma.fields.Integer(load_default=10, validate=Range(min=0))


class RunConfigSchema(MaBaseSchema):
    model = ma.fields.Nested(ModelParamsSchema, required=True)
    grid = ma.fields.Nested(GridSchema, required=True)
    sim = ma.fields.Nested(SimConfigSchema, load_default=None)
    outputs = ma.fields.String(required=True)
    figures = ma.fields.List(
        ma.fields.String(), load_default=list, validate=ContainsOnly(FIGURES)
    )
    kappa = ma.fields.Float(validate=Range(min=0, min_inclusive=False))


@dataclass(frozen=True)
class SimulationSettings:
    config: SimConfig
    y0: float = 0.0
    z0: float = 0.0
    export_paths: int = 10


@dataclass(frozen=True)
class RunConfig:
    """A validated run configuration."""

    model: ModelParams
    grid: GridSpec
    outputs: Path
    sim: Optional[SimulationSettings] = None
    figures: List[str] = field(default_factory=list)
    kappa: Optional[float] = None

    def require_sim(self) -> SimulationSettings:
        if self.sim is None:
            raise ModelError("The run configuration has no 'sim' section.")
        return self.sim


def format_validation_error(err: ma.ValidationError) -> str:
    """Flatten nested marshmallow messages into 'section.field: message' lines."""

    def walk(messages: Any, prefix: str) -> List[str]:
        if isinstance(messages, Mapping):
            lines = []
            for key, value in messages.items():
                name = f"{prefix}.{key}" if prefix else str(key)
                if key == "_schema":
                    name = prefix or "config"
                lines.extend(walk(value, name))
            return lines
        if isinstance(messages, (list, tuple)):
            return [line for m in messages for line in walk(m, prefix)]
        return [f"{prefix}: {messages}" if prefix else str(messages)]

    return "\n".join(walk(err.messages, ""))


def load_run_config(
    source: Union[str, Path, Mapping[str, Any]],
    default_stride: int = DEFAULT_STRIDE,
    default_block_size: int = DEFAULT_BLOCK_SIZE,
) -> RunConfig:
    """Load and validate a run configuration (a JSON file or an already parsed mapping).

    Raises:
        ModelError: with one line per invalid or missing field
    """
    if isinstance(source, Mapping):
        data = source
    else:
        try:
            data = json.loads(Path(source).read_text())
        except json.JSONDecodeError as err:
            raise ModelError(f"'{source}' is not valid JSON: {err}")
    try:
        loaded = RunConfigSchema().load(data)
    except ma.ValidationError as err:
        raise ModelError(format_validation_error(err))

    model: ModelParams = loaded["model"]
    grid = loaded["grid"]
    sim = loaded.get("sim")
    try:
        spec = GridSpec(
            d=grid["d"],
            n_space=grid["n_space"],
            n_time=grid["n_time"],
            T=model.T,
            stride=grid.get("stride", default_stride),
        )
        settings = None
        if sim is not None:
            settings = SimulationSettings(
                config=SimConfig(
                    seed=sim["seed"],
                    n_paths=sim["n_paths"],
                    dt_sim=sim["dt_sim"],
                    antithetic=sim["antithetic"],
                    block_size=sim.get("block_size", default_block_size),
                ),
                y0=sim["y0"],
                z0=sim["z0"],
                export_paths=sim["export_paths"],
            )
            settings.config.check_horizon(model.T)
    except ModelError as err:
        raise ModelError(f"Invalid run configuration: {err}")
    return RunConfig(
        model=model,
        grid=spec,
        outputs=Path(loaded["outputs"]),
        sim=settings,
        figures=list(loaded["figures"]),
        kappa=loaded.get("kappa"),
    )


def dump_model(params: ModelParams) -> Dict[str, Any]:
    return ModelParamsSchema().dump(params)


def dump_grid(spec: GridSpec) -> Dict[str, Any]:
    return GridSchema().dump(spec)
