"""Run configuration: TOML parsing, validation and the ``init`` template."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

from .geometry import SurfaceScenario, build_scenario

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config", "template", "DEFAULT_TOLERANCES"]


class ConfigError(ValueError):
    """Invalid or inconsistent configuration."""


# absolute tolerances, except those listed in RELATIVE
DEFAULT_TOLERANCES = {"a2": 1e-3, "b1": 1e-3, "a1": 1e-2, "b0": 5e-2, "a0": 5e-2}
RELATIVE = ("a2", "a1")


@dataclass
class RunConfig:
    scenario: SurfaceScenario
    p_min: int = 8
    p_max: int = 64
    precision_digits: int | None = None
    grid_level: int = 0
    seed: int = 0
    route: str = "auto"
    nuisance: tuple = ("n_logp_p", "n_inv_p")
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    relative: tuple = RELATIVE
    output_dir: Path = Path("zw_out")
    raw: dict = field(default_factory=dict)

    @property
    def ps(self) -> list[int]:
        return list(range(self.p_min, self.p_max + 1))

    def override(self, p_min=None, p_max=None, seed=None, precision_digits=None, require_fit=False) -> "RunConfig":
        if p_min is not None:
            self.p_min = int(p_min)
        if p_max is not None:
            self.p_max = int(p_max)
        if seed is not None:
            self.seed = int(seed)
        if precision_digits is not None:
            self.precision_digits = int(precision_digits)
        self.validate(require_fit)
        return self

    def validate(self, require_fit: bool = False) -> None:
        if self.p_min < 1:
            raise ConfigError("p_min must be at least 1")
        if self.p_max < self.p_min:
            raise ConfigError("p_max must not be below p_min")
        if require_fit and self.p_max < self.p_min + 7:
            raise ConfigError("fitting needs p_max >= p_min + 7")
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ConfigError(f"unknown tolerance key {k!r}")
            if not v > 0:
                raise ConfigError(f"tolerance for {k} must be positive")
        if self.precision_digits is not None and self.precision_digits < 10:
            raise ConfigError("precision_digits must be at least 10")


def parse_config(data: dict) -> RunConfig:
    unknown = set(data) - {"scenario", "run", "verify", "output"}
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(unknown))}")
    try:
        scenario = build_scenario(data.get("scenario", {}))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"scenario: {exc}") from exc
    run = data.get("run", {})
    verify = dict(data.get("verify", {}))
    relative = tuple(verify.pop("relative", RELATIVE))
    digits = run.get("precision_digits", 0)
    try:
        cfg = RunConfig(
            scenario,
            p_min=int(run.get("p_min", 8)),
            p_max=int(run.get("p_max", 64 if scenario.genus == 0 else 48)),
            precision_digits=int(digits) if digits else None,
            grid_level=int(run.get("grid_level", 0)),
            seed=int(run.get("seed", 0)),
            route=str(run.get("route", "auto")),
            nuisance=tuple(run.get("nuisance", ("n_logp_p", "n_inv_p"))),
            tolerances={**DEFAULT_TOLERANCES, **{k: float(v) for k, v in verify.items()}},
            relative=relative,
            output_dir=Path(data.get("output", {}).get("directory", "zw_out")),
            raw=data,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return parse_config(data)


_HEADER = """\
# zwverify run configuration.
#
# Conventions
#   * Logarithms are natural.
#   * The Kahler form omega has total mass deg L = 1 and the L^2 volume
#     form is dv = omega / 2pi, so the constant section 1 has squared norm 1/2pi.
#   * h^TX is induced by omega: if omega = i rho dz ^ dzbar then |d/dz|^2 = rho
#     and |dz|^2 = 1/rho.
#   * Sphere: D = [0:1] (cos theta = -1), canonical section s_D = x.
#   * Torus C/(Z + tau Z): D = 0, sections written in the sigma trivialisation.
#   * The Kodaira Laplacian on functions is half the Laplacian of the
#     area-one metric; torsion is tau = zeta'(0)/2.
#   * s0, sDL, sDE multiply the canonical normalisation data; complex numbers
#     are written [re, im].
#   * Perturbation modes: sphere (l, m, coeff) of real spherical harmonics,
#     torus (k, l, c, s) meaning c cos 2pi(k a + l b) + s sin 2pi(k a + l b)
#     with z = a + tau b.  psi perturbs the weight of h^L, u the conformal
#     factor of omega.
#   * Tolerances in [verify] are absolute except for the keys in 'relative'.
"""


def template(genus: int = 0) -> str:
    """Commented default configuration for ``genus``."""
    if genus not in (0, 1):
        raise ConfigError("genus must be 0 or 1")
    p_max = 64 if genus == 0 else 48
    b0 = "-2/3" if genus == 0 else "0"
    return (
        _HEADER
        + f"""
[scenario]
genus = {genus}
tau = [0.0, 1.0]        # used for genus 1 only; needs Im tau > 0
u = []
psi = []
s0 = [1.0, 0.0]
sDL = [1.0, 0.0]
sDE = [1.0, 0.0]

[run]
p_min = 8
p_max = {p_max}
precision_digits = 0    # 0 selects 30 + 2p digits per p
grid_level = 0
seed = 0
route = "auto"
nuisance = ["n_logp_p", "n_inv_p"]

[verify]
# expected b0 = {b0}
a2 = 1e-3
b1 = 1e-3
a1 = 1e-2
b0 = 5e-2
a0 = 5e-2
relative = ["a2", "a1"]

[output]
directory = "zw_out"
"""
    )
