"""Run configuration: a flat, sectioned key-value text format.

Every line is ``section.field = value`` with exactly one dot on the
left, so files stay diff-friendly and greppable.  Sections map onto the
dataclasses they configure: ``env`` to the generation environment,
``agent`` to the learner, ``sut`` to the ego controller, and ``run`` to
the orchestration fields (seeds, output directory, step budget).

Values are scalars or comma-separated tuples::

    env.kind = deceleration
    env.ego_speed = 15, 15
    agent.variant = droq
    run.seeds = 0, 1, 2

The ``agent.variant`` key selects an ablation arm by name; every other
``agent.*`` key is passed through as an override.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .agent.sac import AgentConfig, variant_config
from .env import EnvConfig
from .errors import ConfigurationError
from .idm import IdmParams

SECTIONS = ("env", "agent", "sut", "run")
RUN_FIELDS = ("seeds", "out", "budget")

_TRUE_WORDS = frozenset(("true", "yes", "on"))
_FALSE_WORDS = frozenset(("false", "no", "off"))


@dataclass(frozen=True)
class RunConfig:
    """Everything cmd_train needs, already validated and typed."""

    env: EnvConfig
    agent: AgentConfig
    sut: IdmParams
    seeds: tuple
    out: str
    budget: int
    variant: str = "full"

    def __post_init__(self):
        if not self.seeds:
            raise ConfigurationError("run.seeds must name at least one seed")
        if not all(isinstance(s, int) and not isinstance(s, bool)
                   for s in self.seeds):
            raise ConfigurationError("run.seeds must be integers")
        if not isinstance(self.budget, int) or isinstance(self.budget, bool):
            raise ConfigurationError("run.budget must be an integer")
        if self.budget < 0:
            raise ConfigurationError("run.budget must be non-negative")


def parse_scalar(text):
    """One value: int, float, boolean word, or bare string."""
    word = text.strip()
    if not word:
        raise ConfigurationError("empty value")
    lowered = word.lower()
    if lowered in _TRUE_WORDS:
        return True
    if lowered in _FALSE_WORDS:
        return False
    try:
        return int(word)
    except ValueError:
        pass
    try:
        return float(word)
    except ValueError:
        pass
    return word


def parse_value(text):
    if "," in text:
        return tuple(parse_scalar(part) for part in text.split(","))
    return parse_scalar(text)


def parse_mapping(text):
    """Raw text -> {section: {field: value}} with duplicate detection."""
    sections = {name: {} for name in SECTIONS}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"line {lineno}: expected 'section.field = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        parts = key.split(".")
        if len(parts) != 2 or not all(parts):
            raise ConfigurationError(
                f"line {lineno}: key '{key}' must be exactly 'section.field'"
            )
        section, field = parts
        if section not in sections:
            raise ConfigurationError(
                f"line {lineno}: unknown section '{section}' "
                f"(expected one of {', '.join(SECTIONS)})"
            )
        if field in sections[section]:
            raise ConfigurationError(f"line {lineno}: duplicate key '{key}'")
        sections[section][field] = parse_value(value)
    return sections


def _build(cls, mapping, section):
    """Instantiate a config dataclass from parsed keys, strictly."""
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ConfigurationError(
            f"unknown {section} field '{unknown[0]}'"
        )
    kwargs = {}
    for name, value in mapping.items():
        if isinstance(value, list):
            value = tuple(value)
        kwargs[name] = value
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigurationError(f"bad {section} configuration: {exc}") from exc


def env_config_from_mapping(mapping):
    mapping = dict(mapping)
    if "kind" not in mapping:
        raise ConfigurationError("env.kind is required")
    return _build(EnvConfig, mapping, "env")


def agent_config_from_mapping(mapping):
    """Build an AgentConfig, honoring the optional variant selector."""
    mapping = dict(mapping)
    variant = mapping.pop("variant", "full")
    known = {f.name for f in fields(AgentConfig)}
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ConfigurationError(f"unknown agent field '{unknown[0]}'")
    try:
        return variant_config(variant, **mapping), variant
    except TypeError as exc:
        raise ConfigurationError(f"bad agent configuration: {exc}") from exc


def idm_params_from_mapping(mapping):
    return _build(IdmParams, dict(mapping), "sut")


def parse_run_config(text):
    """Full pipeline: text -> RunConfig."""
    sections = parse_mapping(text)
    env = env_config_from_mapping(sections["env"])
    agent, variant = agent_config_from_mapping(sections["agent"])
    sut = idm_params_from_mapping(sections["sut"])
    run = dict(sections["run"])
    unknown = sorted(set(run) - set(RUN_FIELDS))
    if unknown:
        raise ConfigurationError(f"unknown run field '{unknown[0]}'")
    if "seeds" not in run:
        raise ConfigurationError("run.seeds is required")
    if "budget" not in run:
        raise ConfigurationError("run.budget is required")
    seeds = run["seeds"]
    if not isinstance(seeds, tuple):
        seeds = (seeds,)
    return RunConfig(env=env, agent=agent, sut=sut, seeds=seeds,
                     out=str(run.get("out", "runs")), budget=run["budget"],
                     variant=variant)


def load_run_config(path):
    p = Path(path)
    if not p.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_run_config(p.read_text(encoding="utf-8"))


def mapping_from_config(obj):
    """Dataclass -> plain dict of JSON-safe values (tuples become lists)."""
    out = {}
    for f in fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, tuple):
            value = list(value)
        out[f.name] = value
    return out
