"""Experiment configuration: dataclass, TOML parsing, canonical emission.

The on-disk format is flat TOML with sections [experiment], [model],
[generator], [estimators] and optional [sweep]; see docs/config.md for the
schema.  Emission is canonical (fixed key order, 17-significant-digit
floats) so that the echoed config written next to results is byte-stable
and parses back to an identical ExperimentConfig.
"""

from __future__ import annotations

from dataclasses import dataclass

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

THETA_POLICIES = ("null_treatment", "unit_first_gaussian")
METHODS = ("ols", "centered_ols", "tale", "concentration", "w_decorrelation")
SIGMA_MODES = ("known", "residual")


class ConfigError(ValueError):
    """Invalid or unparsable experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    name: str
    kind: str
    n: int
    d: int
    k: int
    sigma: float
    theta: str | tuple[float, ...]
    p_exploit: float
    nonadaptive_law: str
    methods: tuple[str, ...]
    sigma_mode: str
    tale_s0: float | str
    wdecorr_calibration_draws: int
    wdecorr_lambda: float | None
    n_reps: int
    master_seed: int
    alpha_grid: tuple[float, ...]
    k_grid: tuple[int, ...] | None
    target_coord: int

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "alpha_grid", tuple(float(a) for a in self.alpha_grid))
        if self.k_grid is not None:
            object.__setattr__(self, "k_grid", tuple(int(k) for k in self.k_grid))
        if isinstance(self.theta, str):
            if self.theta not in THETA_POLICIES:
                raise ConfigError(f"unknown theta policy {self.theta!r}")
        else:
            object.__setattr__(self, "theta", tuple(float(t) for t in self.theta))
            if len(self.theta) != self.d:
                raise ConfigError("explicit theta must have length d")
        if self.n_reps < 1:
            raise ConfigError("n_reps must be >= 1")
        if any(not 0.0 < a < 1.0 for a in self.alpha_grid):
            raise ConfigError("alpha_grid entries must lie in (0, 1)")
        if self.k_grid is not None and any(not 1 <= k < self.d for k in self.k_grid):
            raise ConfigError("k_grid entries must lie in [1, d)")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError(f"unknown estimator {m!r}; expected one of {METHODS}")
        if self.sigma_mode not in SIGMA_MODES:
            raise ConfigError(f"sigma_mode must be one of {SIGMA_MODES}")
        if isinstance(self.tale_s0, str) and self.tale_s0 != "auto":
            raise ConfigError("tale_s0 must be a positive number or 'auto'")
        if not 0 <= self.target_coord < self.d:
            raise ConfigError("target_coord out of range")


_DEFAULTS = {
    "p_exploit": 0.8,
    "nonadaptive_law": "standard_gaussian",
    "sigma_mode": "known",
    "tale_s0": "auto",
    "wdecorr_calibration_draws": 1000,
    "wdecorr_lambda": None,
    "alpha_grid": (),
    "k_grid": None,
    "target_coord": 0,
}


def config_from_mapping(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed TOML sections."""
    try:
        exp = data["experiment"]
        model = data["model"]
        gen = data["generator"]
        est = data["estimators"]
    except KeyError as exc:
        raise ConfigError(f"missing config section {exc}") from None
    sweep = data.get("sweep", {})
    theta = model.get("theta", "null_treatment")
    if isinstance(theta, list):
        theta = tuple(float(t) for t in theta)
    try:
        return ExperimentConfig(
            name=str(exp["name"]),
            kind=str(gen["kind"]),
            n=int(model["n"]),
            d=int(model["d"]),
            k=int(model["k"]),
            sigma=float(model["sigma"]),
            theta=theta,
            p_exploit=float(gen.get("p_exploit", _DEFAULTS["p_exploit"])),
            nonadaptive_law=str(gen.get("nonadaptive_law", _DEFAULTS["nonadaptive_law"])),
            methods=tuple(est["methods"]),
            sigma_mode=str(est.get("sigma_mode", _DEFAULTS["sigma_mode"])),
            tale_s0=est.get("tale_s0", _DEFAULTS["tale_s0"]),
            wdecorr_calibration_draws=int(
                est.get("wdecorr_calibration_draws", _DEFAULTS["wdecorr_calibration_draws"])
            ),
            wdecorr_lambda=(
                float(est["wdecorr_lambda"]) if "wdecorr_lambda" in est else None
            ),
            n_reps=int(exp["n_reps"]),
            master_seed=int(exp["master_seed"]),
            alpha_grid=tuple(exp.get("alpha_grid", _DEFAULTS["alpha_grid"])),
            k_grid=(tuple(sweep["k_grid"]) if "k_grid" in sweep else None),
            target_coord=int(exp.get("target_coord", _DEFAULTS["target_coord"])),
        )
    except KeyError as exc:
        raise ConfigError(f"missing config key {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    with open(path, "rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from None
    return config_from_mapping(data)


def _toml_scalar(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, str):
        return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.17g}"
    if isinstance(value, (tuple, list)):
        return "[" + ", ".join(_toml_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot emit {type(value)} as TOML")


def emit_config(config: ExperimentConfig) -> str:
    """Canonical TOML text for ``config``; parses back to an equal config."""
    theta = config.theta if isinstance(config.theta, str) else list(config.theta)
    lines = ["[experiment]"]
    lines.append(f"name = {_toml_scalar(config.name)}")
    lines.append(f"n_reps = {config.n_reps}")
    lines.append(f"master_seed = {config.master_seed}")
    lines.append(f"alpha_grid = {_toml_scalar(config.alpha_grid)}")
    lines.append(f"target_coord = {config.target_coord}")
    lines.append("")
    lines.append("[model]")
    lines.append(f"n = {config.n}")
    lines.append(f"d = {config.d}")
    lines.append(f"k = {config.k}")
    lines.append(f"sigma = {_toml_scalar(float(config.sigma))}")
    lines.append(f"theta = {_toml_scalar(theta)}")
    lines.append("")
    lines.append("[generator]")
    lines.append(f"kind = {_toml_scalar(config.kind)}")
    lines.append(f"p_exploit = {_toml_scalar(float(config.p_exploit))}")
    lines.append(f"nonadaptive_law = {_toml_scalar(config.nonadaptive_law)}")
    lines.append("")
    lines.append("[estimators]")
    lines.append(f"methods = {_toml_scalar(config.methods)}")
    lines.append(f"sigma_mode = {_toml_scalar(config.sigma_mode)}")
    s0 = config.tale_s0 if isinstance(config.tale_s0, str) else float(config.tale_s0)
    lines.append(f"tale_s0 = {_toml_scalar(s0)}")
    lines.append(f"wdecorr_calibration_draws = {config.wdecorr_calibration_draws}")
    if config.wdecorr_lambda is not None:
        lines.append(f"wdecorr_lambda = {_toml_scalar(float(config.wdecorr_lambda))}")
    if config.k_grid is not None:
        lines.append("")
        lines.append("[sweep]")
        lines.append(f"k_grid = {_toml_scalar(config.k_grid)}")
    return "\n".join(lines) + "\n"
