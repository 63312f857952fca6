"""Run configuration: JSON file schema, validation, and object construction."""

import json
import os
from dataclasses import dataclass, field

from splitdg import cases, fluxes, mesh as mesh_mod, physics


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending key."""


@dataclass
class RunConfig:
    case: str = "density_wave"
    case_params: dict = field(default_factory=dict)
    mesh: dict = field(default_factory=lambda: {"builtin": "warped_box", "cells": [4, 4, 4]})
    degree: int = 4
    gas: dict = field(default_factory=dict)
    volume_flux: str = "ec"
    surface_dissipation: str = "llf"
    gradient_variables: str = "entropy"
    cfl: float | None = 0.4
    dt: float | None = None
    final_time: float = 0.25
    monitor_interval: int = 1
    output_dir: str = "."
    case_name: str | None = None
    seed: int = 2024
    boundary: str = "periodic"

    def __post_init__(self):
        if self.degree < 1:
            raise ConfigError(f"degree: must be >= 1, got {self.degree}")
        if self.cfl is None and self.dt is None:
            raise ConfigError("cfl/dt: one of the two time controls must be set")
        if self.cfl is not None and self.cfl <= 0:
            raise ConfigError(f"cfl: must be positive, got {self.cfl}")
        if self.dt is not None and self.dt <= 0:
            raise ConfigError(f"dt: must be positive, got {self.dt}")
        if self.final_time <= 0:
            raise ConfigError(f"final_time: must be positive, got {self.final_time}")
        if self.monitor_interval < 1:
            raise ConfigError(f"monitor_interval: must be >= 1, got {self.monitor_interval}")
        if self.volume_flux not in fluxes.VOLUME_FLUXES:
            raise ConfigError(
                f"volume_flux: unknown value '{self.volume_flux}'; "
                f"valid options: {sorted(fluxes.VOLUME_FLUXES)}")
        if self.surface_dissipation not in fluxes.DISSIPATION_MODES:
            raise ConfigError(
                f"surface_dissipation: unknown value '{self.surface_dissipation}'; "
                f"valid options: {list(fluxes.DISSIPATION_MODES)}")
        if self.case not in cases.CASES:
            raise ConfigError(
                f"case: unknown value '{self.case}'; valid options: {sorted(cases.CASES)}")
        if self.boundary not in ("periodic", "dirichlet"):
            raise ConfigError(f"boundary: must be 'periodic' or 'dirichlet', got '{self.boundary}'")
        if "path" in self.mesh and not os.path.exists(self.mesh["path"]):
            raise ConfigError(f"mesh.path: file does not exist: {self.mesh['path']}")
        if self.case_name is None:
            self.case_name = self.case

    @classmethod
    def from_file(cls, path):
        if not os.path.exists(path):
            raise ConfigError(f"config file does not exist: {path}")
        with open(path) as fh:
            try:
                raw = json.load(fh)
            except json.JSONDecodeError as err:
                raise ConfigError(f"{path}: invalid JSON: {err}") from err
        return cls.from_dict(raw, base_dir=os.path.dirname(os.path.abspath(path)))

    @classmethod
    def from_dict(cls, raw, base_dir=None):
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if base_dir and "mesh" in raw and "path" in raw["mesh"]:
            p = raw["mesh"]["path"]
            if not os.path.isabs(p):
                raw = dict(raw, mesh=dict(raw["mesh"], path=os.path.join(base_dir, p)))
        try:
            return cls(**raw)
        except TypeError as err:
            raise ConfigError(str(err)) from err

    def gas_model(self):
        try:
            return physics.GasModel(**self.gas)
        except (TypeError, ValueError) as err:
            raise ConfigError(f"gas: {err}") from err

    def flow_case(self):
        try:
            return cases.make_case(self.case, **self.case_params)
        except TypeError as err:
            raise ConfigError(f"case_params: {err}") from err

    def build_mesh(self, cells_override=None, degree_override=None):
        spec = dict(self.mesh)
        degree = degree_override if degree_override is not None else self.degree
        periodic = self.boundary == "periodic"
        if "path" in spec:
            return mesh_mod.read_mesh_file(spec["path"], degree=degree)
        builtin = spec.pop("builtin", "warped_box")
        cells = tuple(cells_override if cells_override is not None else spec.pop("cells", [4, 4, 4]))
        bounds = tuple(tuple(b) for b in spec.pop("bounds", ((0.0, 1.0),) * 3))
        if builtin == "cartesian":
            if spec:
                raise ConfigError(f"mesh: unknown cartesian options {sorted(spec)}")
            return mesh_mod.box_mesh(degree, cells, bounds, periodic=periodic)
        if builtin == "warped_box":
            amplitude = spec.pop("amplitude", 0.05)
            periods = tuple(spec.pop("periods", (1, 1, 1)))
            if spec:
                raise ConfigError(f"mesh: unknown warped_box options {sorted(spec)}")
            return mesh_mod.warped_box_mesh(degree, cells, amplitude, periods, bounds,
                                            periodic=periodic)
        raise ConfigError(f"mesh.builtin: unknown value '{builtin}'; "
                          "valid options: ['cartesian', 'warped_box']")
