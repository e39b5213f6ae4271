"""
Experiment configuration.

The format is INI-style: ``[section]`` headers followed by ``key = value``
lines, ``#`` or ``;`` comments. Sections:

``[network]``    nodes, rule (probability | radius), param, max_retries
``[system]``     taps, weight_rule (uniform), low, high, seed
``[signal]``     profile, variance, low, high, diagonal
``[noise]``      kind (gaussian | impulsive | alpha_stable) and its parameters
``[run]``        iterations, monte_carlo, master_seed, topology_per_trial,
                 init, lec_clamp, divergence_db, steady_fraction
``[algorithm LABEL]``  name, mu, a, b  (one section per configured filter)

Every key is optional; an empty document is a valid config that runs all six
algorithms with their default parameters. Unknown sections and keys are
rejected.
"""
from __future__ import annotations

import configparser
import difflib
import math
from dataclasses import dataclass, field, fields, replace
from typing import Optional, Tuple

from .algorithms import ALGORITHMS, DEFAULT_EXP_CLAMP, AlgorithmSpec
from .noise import AlphaStableParams, GaussianNoiseParams, ImpulsiveNoiseParams
from .signals import PROFILE_KINDS
from .topology import DEFAULT_MAX_RETRIES


class ConfigError(ValueError):
    """Invalid configuration (syntax or semantics)."""


@dataclass(frozen=True)
class NetworkConfig:
    nodes: int = 20
    rule: str = "probability"
    param: float = 0.2
    max_retries: int = DEFAULT_MAX_RETRIES


@dataclass(frozen=True)
class SystemConfig:
    taps: int = 16
    weight_rule: str = "uniform"
    low: float = -1.0
    high: float = 1.0
    seed: Optional[int] = None  # None: derived from the master seed


@dataclass(frozen=True)
class SignalConfig:
    profile: str = "per_node_scalar"
    variance: float = 1.0
    low: float = 0.5
    high: float = 1.5
    diagonal: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class NoiseConfig:
    kind: str = "alpha_stable"
    alpha: float = 1.6
    beta: float = 0.05
    scale: float = 2000.0
    location: float = 0.0
    sigma_g: Tuple[float, ...] = (0.1,)
    impulse_probability: float = 0.1
    impulse_strength: Tuple[float, ...] = (100.0,)

    def stable_params(self):
        return AlphaStableParams(self.alpha, self.beta, self.scale, self.location)

    def gaussian_params(self):
        return GaussianNoiseParams(self.sigma_g)

    def impulsive_params(self):
        return ImpulsiveNoiseParams(self.gaussian_params(), self.impulse_probability,
                                    self.impulse_strength)


@dataclass(frozen=True)
class RunConfig:
    iterations: int = 2000
    monte_carlo: int = 20
    master_seed: int = 0
    topology_per_trial: str = "fixed"
    init: str = "zero"
    lec_clamp: float = DEFAULT_EXP_CLAMP
    divergence_db: float = 100.0
    steady_fraction: float = 0.1


@dataclass(frozen=True)
class AlgorithmEntry:
    label: str
    spec: AlgorithmSpec


def default_algorithms():
    return tuple(AlgorithmEntry(name, AlgorithmSpec.default(name)) for name in ALGORITHMS)


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    system: SystemConfig = field(default_factory=SystemConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    run: RunConfig = field(default_factory=RunConfig)
    algorithms: Tuple[AlgorithmEntry, ...] = field(default_factory=default_algorithms)

    def with_seed(self, seed):
        return replace(self, run=replace(self.run, master_seed=int(seed)))

    @property
    def labels(self):
        return [entry.label for entry in self.algorithms]

    @property
    def specs(self):
        return [entry.spec for entry in self.algorithms]


_SECTIONS = {
    "network": NetworkConfig,
    "system": SystemConfig,
    "signal": SignalConfig,
    "noise": NoiseConfig,
    "run": RunConfig,
}
_ALGORITHM_KEYS = ("name", "mu", "a", "b")
_HINTS = {
    ("noise", "gamma"): "use 'scale' (dispersion) or 'location' (shift) instead",
    ("noise", "delta"): "use 'scale' (dispersion) or 'location' (shift) instead",
}
_NO_SECTION = "\x00none"


def _syntax_error(lineno, line, message):
    col = len(line) - len(line.lstrip()) + 1 if line else 1
    return ConfigError(f"line {lineno}, column {col}: {message}")


def _unknown_key(section, key, allowed):
    hint = _HINTS.get((section, key))
    if hint is None:
        close = difflib.get_close_matches(key, allowed, n=2)
        hint = f"did you mean {' or '.join(repr(c) for c in close)}?" if close else \
            f"allowed keys: {', '.join(allowed)}"
    return ConfigError(f"unknown key '{section}.{key}': {hint}")


def _convert(section, key, raw, target):
    where = f"{section}.{key}"
    raw = raw.strip()
    try:
        if target is int:
            return int(raw)
        if target is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        if target == "floats":
            values = tuple(float(v) for v in raw.replace(",", " ").split())
            if not values or not all(math.isfinite(v) for v in values):
                raise ValueError
            return values
        if target == "optional_int":
            return None if raw.lower() in ("", "none") else int(raw)
        if target == "optional_floats":
            return None if raw.lower() in ("", "none") else _convert(section, key, raw, "floats")
    except ValueError:
        kind = {int: "an integer", float: "a finite number", "floats": "a list of numbers",
                "optional_int": "an integer", "optional_floats": "a list of numbers"}[target]
        raise ConfigError(f"{where}: expected {kind}, got {raw!r}") from None
    return raw


_TYPES = {
    "network": dict(nodes=int, rule=str, param=float, max_retries=int),
    "system": dict(taps=int, weight_rule=str, low=float, high=float, seed="optional_int"),
    "signal": dict(profile=str, variance=float, low=float, high=float, diagonal="optional_floats"),
    "noise": dict(kind=str, alpha=float, beta=float, scale=float, location=float,
                  sigma_g="floats", impulse_probability=float, impulse_strength="floats"),
    "run": dict(iterations=int, monte_carlo=int, master_seed=int, topology_per_trial=str,
                init=str, lec_clamp=float, divergence_db=float, steady_fraction=float),
}


def _read(text):
    parser = configparser.ConfigParser(
        interpolation=None,
        default_section=_NO_SECTION,
        inline_comment_prefixes=("#", ";"),
        empty_lines_in_values=False,
    )
    parser.optionxform = str  # keep key case so errors echo user input
    lines = text.splitlines()
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise _syntax_error(exc.lineno, exc.line, "key outside of any [section]") from None
    except (configparser.DuplicateSectionError, configparser.DuplicateOptionError) as exc:
        line = lines[exc.lineno - 1] if exc.lineno else ""
        raise _syntax_error(exc.lineno, line, exc.message.split(":", 1)[-1].strip()) from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise _syntax_error(lineno, line.strip("'"), "expected 'key = value'") from None
    return parser


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document."""
    parser = _read(text)
    parts = {}
    algorithms = []
    for section in parser.sections():
        items = dict(parser.items(section))
        if section in _SECTIONS:
            types = _TYPES[section]
            values = {}
            for key, raw in items.items():
                if key not in types:
                    raise _unknown_key(section, key, list(types))
                values[key] = _convert(section, key, raw, types[key])
            parts[section] = values
        elif section.split(None, 1)[0] == "algorithm":
            algorithms.append(_parse_algorithm(section, items))
        else:
            close = difflib.get_close_matches(section, list(_SECTIONS) + ["algorithm"], n=1)
            hint = f"; did you mean [{close[0]}]?" if close else ""
            raise ConfigError(f"unknown section [{section}]{hint}")
    config = ExperimentConfig(
        **{name: cls(**parts.get(name, {})) for name, cls in _SECTIONS.items()},
        algorithms=tuple(algorithms) if algorithms else default_algorithms(),
    )
    validate(config)
    return config


def _parse_algorithm(section, items):
    words = section.split()
    if len(words) != 2:
        raise ConfigError(f"section [{section}]: expected [algorithm LABEL]")
    label = words[1]
    for key in items:
        if key not in _ALGORITHM_KEYS:
            raise _unknown_key(section, key, list(_ALGORITHM_KEYS))
    name = items.get("name", label).strip()
    if name not in ALGORITHMS:
        raise ConfigError(f"{section}.name: unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
    default = AlgorithmSpec.default(name)
    values = {}
    for key in ("mu", "a", "b"):
        values[key] = _convert(section, key, items[key], float) if key in items else getattr(default, key)
        if not values[key] > 0:
            raise ConfigError(f"{section}.{key}: {key} must be positive")
    return AlgorithmEntry(label, AlgorithmSpec(name, **values))


def _require(cond, where, message):
    if not cond:
        raise ConfigError(f"{where}: {message}")


def validate(config: ExperimentConfig):
    """Check every cross-field constraint; raises :class:`ConfigError`."""
    net, sysc, sig, noise, run = config.network, config.system, config.signal, config.noise, config.run
    _require(net.nodes >= 2, "network.nodes", "must be at least 2")
    _require(net.rule in ("probability", "radius"), "network.rule", "must be 'probability' or 'radius'")
    if net.rule == "probability":
        _require(0.0 <= net.param <= 1.0, "network.param", "edge probability must lie in [0, 1]")
    else:
        _require(net.param > 0, "network.param", "radius must be positive")
    _require(net.max_retries >= 1, "network.max_retries", "must be at least 1")

    _require(sysc.taps >= 1, "system.taps", "must be at least 1")
    _require(sysc.weight_rule == "uniform", "system.weight_rule", "only 'uniform' is supported")
    _require(sysc.low < sysc.high, "system.low", "must be below system.high")

    _require(sig.profile in PROFILE_KINDS, "signal.profile", f"must be one of {', '.join(PROFILE_KINDS)}")
    _require(sig.variance > 0, "signal.variance", "must be positive")
    _require(0 < sig.low <= sig.high, "signal.low", "need 0 < low <= high")
    if sig.diagonal is not None:
        _require(sig.profile == "per_tap_diagonal", "signal.diagonal", "only valid for per_tap_diagonal")
        _require(len(sig.diagonal) == sysc.taps, "signal.diagonal", f"needs {sysc.taps} entries")
        _require(all(v > 0 for v in sig.diagonal), "signal.diagonal", "entries must be positive")

    _require(noise.kind in ("gaussian", "impulsive", "alpha_stable"), "noise.kind",
             "must be gaussian, impulsive or alpha_stable")
    for key in ("sigma_g", "impulse_strength"):
        values = getattr(noise, key)
        _require(len(values) in (1, net.nodes), f"noise.{key}", f"needs 1 or {net.nodes} values")
    try:
        if noise.kind == "alpha_stable":
            noise.stable_params()
        elif noise.kind == "impulsive":
            noise.impulsive_params()
        else:
            noise.gaussian_params()
    except ValueError as exc:
        raise ConfigError(f"noise: {exc}") from None

    _require(run.iterations >= 1, "run.iterations", "must be at least 1")
    _require(run.monte_carlo >= 1, "run.monte_carlo", "must be at least 1")
    _require(run.master_seed >= 0, "run.master_seed", "must be a nonnegative integer")
    _require(run.topology_per_trial in ("fixed", "redraw"), "run.topology_per_trial",
             "must be 'fixed' or 'redraw'")
    _require(run.init in ("zero", "truth"), "run.init", "must be 'zero' or 'truth'")
    _require(run.lec_clamp > 0, "run.lec_clamp", "must be positive")
    _require(0 < run.steady_fraction <= 1, "run.steady_fraction", "must lie in (0, 1]")

    labels = config.labels
    _require(len(labels) == len(set(labels)), "algorithm", "labels must be unique")
    _require(len(labels) >= 1, "algorithm", "at least one algorithm is required")


def _format_value(value):
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return "none"
    return str(value)


def format_config(config: ExperimentConfig) -> str:
    """Render ``config`` so that ``parse_config(format_config(c)) == c``."""
    out = []
    for name in _SECTIONS:
        part = getattr(config, name)
        out.append(f"[{name}]")
        for f in fields(part):
            out.append(f"{f.name} = {_format_value(getattr(part, f.name))}")
        out.append("")
    for entry in config.algorithms:
        spec = entry.spec
        out.append(f"[algorithm {entry.label}]")
        out.append(f"name = {spec.name}")
        for key in ("mu", "a", "b"):
            out.append(f"{key} = {float(getattr(spec, key))!r}")
        out.append("")
    return "\n".join(out)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


