"""Run-configuration ingestion (strict JSON).

A config declares its unit system explicitly: `physical` configs carry a
`device` block in SI units, `scaled` configs carry a `couplings` block with
desk-scale rates (cycles per time unit).  Unknown keys are rejected
everywhere so typos in physics constants cannot pass silently.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

from .constants import TWO_PI
from .device import DeviceParams, DerivedCouplings
from .errors import ConfigError
from .evolve import NoiseModel

_TOP_KEYS = {"units", "device", "couplings", "spaces", "noise", "evolve", "seed"}
_COUPLING_KEYS = {"Omega_over_2pi", "omega_a_over_2pi", "omega_b_over_2pi",
                  "g_a_over_2pi", "g_b_over_2pi"}
_NOISE_KEYS = {"D", "beta", "phi0", "n_traj", "dt", "master_seed",
               "diffusion_factor", "tau"}
_EVOLVE_KEYS = {"models", "t_max", "grid_points", "initial", "leakage_tol"}
_MODELS = ("full-rwa", "pdc", "parametric")

PHYSICAL_MIN_FREQ = 1e3
SCALED_MAX_FREQ = 1e3


@dataclass(frozen=True)
class EvolveOptions:
    models: tuple[str, ...]
    t_max: float
    grid_points: int
    initial: dict
    leakage_tol: float = 1e-6


@dataclass(frozen=True)
class RunConfig:
    units: str
    raw: dict
    device: Optional[DeviceParams] = None
    couplings: Optional[DerivedCouplings] = None
    n_a: Optional[int] = None
    n_b: Optional[int] = None
    noise: Optional[NoiseModel] = None
    noise_tau: Optional[float] = None
    evolve: Optional[EvolveOptions] = None
    seed: int = 0

    def require_device(self) -> DeviceParams:
        if self.device is None:
            raise ConfigError("this command needs a 'device' block in the config")
        return self.device

    def require_couplings(self) -> DerivedCouplings:
        if self.couplings is None:
            raise ConfigError(
                "this command needs a scaled-units 'couplings' block in the config")
        return self.couplings

    def require_scaled(self) -> None:
        if self.units != "scaled":
            raise ConfigError(
                "dynamics commands refuse physical units (the physical coupling "
                "is ~1e9 times slower than the circuit frequencies); use a "
                "config with \"units\": \"scaled\"")

    def require_spaces(self) -> tuple[int, int]:
        if self.n_a is None or self.n_b is None:
            raise ConfigError("this command needs a 'spaces' block with N_a and N_b")
        return self.n_a, self.n_b


def _reject_unknown(block: dict, allowed: set, what: str) -> None:
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown {what} fields: {sorted(unknown)}")


def parse_config(raw: dict, seed_override: Optional[int] = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(raw, _TOP_KEYS, "config")
    units = raw.get("units")
    if units not in ("physical", "scaled"):
        raise ConfigError(
            "config must declare \"units\": \"physical\" or \"scaled\" "
            "(no default; silent unit confusion is the likeliest user error)")

    effective = dict(raw)
    if seed_override is not None:
        effective["seed"] = int(seed_override)
        if "noise" in effective and isinstance(effective["noise"], dict):
            noise_block = dict(effective["noise"])
            noise_block["master_seed"] = int(seed_override)
            effective["noise"] = noise_block
    seed = int(effective.get("seed", 0))

    device = None
    if "device" in effective:
        device = DeviceParams.from_json_dict(effective["device"])
        if units == "physical":
            for name in ("EJ_over_h", "omega_a_over_2pi", "omega_b_over_2pi"):
                if getattr(device, name) <= PHYSICAL_MIN_FREQ:
                    raise ConfigError(
                        f"physical units require {name} > {PHYSICAL_MIN_FREQ:g} Hz "
                        f"(got {getattr(device, name):g})")

    couplings = None
    if "couplings" in effective:
        block = effective["couplings"]
        _reject_unknown(block, _COUPLING_KEYS, "couplings")
        missing = _COUPLING_KEYS - set(block)
        if missing:
            raise ConfigError(f"missing couplings fields: {sorted(missing)}")
        if units == "scaled":
            for k, v in block.items():
                if abs(v) > SCALED_MAX_FREQ:
                    raise ConfigError(
                        f"scaled units but couplings.{k} = {v:g} looks physical "
                        f"(> {SCALED_MAX_FREQ:g})")
        couplings = DerivedCouplings.from_rates(
            Omega=TWO_PI * block["Omega_over_2pi"],
            omega_a=TWO_PI * block["omega_a_over_2pi"],
            omega_b=TWO_PI * block["omega_b_over_2pi"],
            g_a=TWO_PI * block["g_a_over_2pi"],
            g_b=TWO_PI * block["g_b_over_2pi"])

    n_a = n_b = None
    if "spaces" in effective:
        block = effective["spaces"]
        _reject_unknown(block, {"N_a", "N_b"}, "spaces")
        n_a = int(block.get("N_a", 0)) or None
        n_b = int(block.get("N_b", 0)) or None

    noise = None
    noise_tau = None
    if "noise" in effective:
        block = effective["noise"]
        _reject_unknown(block, _NOISE_KEYS, "noise")
        noise_tau = block.get("tau")
        noise = NoiseModel(
            D=float(block.get("D", 0.0)),
            beta=float(block.get("beta", 0.0)),
            phi0=float(block.get("phi0", math.pi / 2)),
            n_traj=int(block.get("n_traj", 1)),
            dt=float(block.get("dt", 1e-3)),
            master_seed=int(block.get("master_seed", seed)),
            diffusion_factor=float(block.get("diffusion_factor", 1.0)))

    evolve = None
    if "evolve" in effective:
        block = effective["evolve"]
        _reject_unknown(block, _EVOLVE_KEYS, "evolve")
        models = tuple(block.get("models", ()))
        for mdl in models:
            if mdl not in _MODELS:
                raise ConfigError(f"unknown evolve model {mdl!r}; choose from {_MODELS}")
        if not models:
            raise ConfigError("evolve block needs a non-empty 'models' list")
        if "t_max" not in block:
            raise ConfigError("evolve block needs 't_max'")
        evolve = EvolveOptions(
            models=models,
            t_max=float(block["t_max"]),
            grid_points=int(block.get("grid_points", 51)),
            initial=dict(block.get("initial", {"q": 0, "a": 1, "b": 0})),
            leakage_tol=float(block.get("leakage_tol", 1e-6)))

    return RunConfig(units=units, raw=effective, device=device,
                     couplings=couplings, n_a=n_a, n_b=n_b, noise=noise,
                     noise_tau=noise_tau, evolve=evolve, seed=seed)


def load_config(path: str, seed_override: Optional[int] = None) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")
    return parse_config(raw, seed_override)
