"""Run configuration: strict JSON schema with unit-suffixed field names."""
from __future__ import annotations

import json
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

SCHEMA_VERSION = 1
Axis = Literal["x", "y", "z"]


class ConfigError(ValueError):
    """Malformed or invalid configuration (exit code 1)."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class TrapConfig(_Strict):
    freqs_Hz: tuple[float, float, float]
    reference: str = "Yb171"
    transverse_scaling: Literal["rf", "two-term"] = "rf"
    dc_ratio: tuple[float, float] = (0.5, 0.5)

    @field_validator("freqs_Hz")
    @classmethod
    def _positive(cls, v):
        if min(v) <= 0:
            raise ValueError("trap frequencies must be positive")
        return v


class TweezerConfig(_Strict):
    ion: int = Field(ge=0)
    omega_x_Hz: float = Field(0.0, ge=0)
    omega_y_Hz: float = Field(0.0, ge=0)
    omega_z_Hz: float = Field(0.0, ge=0)
    sign_x: Literal[-1, 1] = 1
    sign_y: Literal[-1, 1] = 1
    sign_z: Literal[-1, 1] = 1


class ChainConfig(_Strict):
    species: list[str] = Field(min_length=1)
    trap: TrapConfig
    tweezers: list[TweezerConfig] = []


class ModesConfig(_Strict):
    axes: list[Axis] = ["x", "y", "z"]


class SolverConfig(_Strict):
    axis: Axis = "z"
    target_frequencies_Hz: list[float] | None = None
    tolerance_Hz: float = Field(10.0, gt=0)
    max_iter: int = Field(100, ge=1)
    population: int = Field(100, ge=4)
    zeta: float = Field(0.9, ge=0, le=2)
    kappa: float = Field(0.5, ge=0, le=2)
    eta: float = Field(0.5, ge=0, le=1)
    max_rounds: int = Field(50, ge=0)


class BenchConfig(_Strict):
    n_targets: int = Field(100, ge=1)
    max_strength_ratio: float = Field(1.0, gt=0)
    allow_anti_trapping: bool = True


class EigvecConfig(_Strict):
    axis: Axis = "z"
    target_vectors: list[list[float]] | None = None
    tolerance: float = Field(1e-8, gt=0)


class OpticsConfig(_Strict):
    wavelengths_nm: list[float] = [375.0, 532.0, 1064.0]
    waist_um: float | list[float] = 1.0
    power_W: float | list[float] | None = None
    target_trap_Hz: float | None = 1e6


class ThermoConfig(_Strict):
    mass_expt_amu: float = Field(171.0, gt=0)
    mass_tar_amu: float = Field(133.0, gt=0)
    omega_z_Hz: float = Field(2e5, gt=0)
    tau_omega_f: list[float] = [0.5, 2.0, 10.0, 50.0]
    beta_hbar_omega_f: list[float] = [0.3, 0.554, 1.0, 3.0]
    n_max: int = Field(64, ge=4)
    dump_distribution: bool = False


class MultispeciesConfig(_Strict):
    axis: Axis = "y"
    reference_species: str | None = None


class OutputConfig(_Strict):
    dir: str = "results"
    format: Literal["json", "csv", "both"] = "both"


class RunConfig(_Strict):
    schema_version: Literal[1] = Field(alias="schema")
    seed: int = Field(0, ge=0, lt=2**64)
    chain: ChainConfig | None = None
    modes: ModesConfig = ModesConfig()
    solver: SolverConfig = SolverConfig()
    bench: BenchConfig = BenchConfig()
    eigvec: EigvecConfig = EigvecConfig()
    optics: OpticsConfig = OpticsConfig()
    thermo: ThermoConfig = ThermoConfig()
    multispecies: MultispeciesConfig = MultispeciesConfig()
    output: OutputConfig = OutputConfig()

    def to_json(self) -> str:
        return json.dumps(self.model_dump(by_alias=True, mode="json"), indent=2, sort_keys=True)


def _describe(err: ValidationError) -> str:
    lines = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"]) or "<root>"
        lines.append(f"{loc}: {e['msg']}")
    return "; ".join(lines)


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_describe(exc)) from exc
