"""
Run configuration: ``key = value`` text validated per scenario.

Every problem is collected before anything runs, each with the line it came
from, and reported together as one ConfigurationError.
"""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings

from core.exceptions import ConfigurationError
from simulations.serializers import SCENARIO_SERIALIZERS

logger = logging.getLogger(__name__)

SCENARIOS = tuple(SCENARIO_SERIALIZERS)

# Scenarios whose cost is set by a coherent mean; gated by --long-running.
LONG_RUNNING_KEYS = {
    "coherent": ("mean1", "mean2"),
    "scan": ("means",),
    "compare": ("mean",),
}


@dataclass(frozen=True)
class RunConfig:
    scenario: str
    params: dict
    output: Path
    workers: int
    long_running: bool = False
    lines: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        """sha256 of the scenario and its validated parameters; output and workers excluded."""
        payload = {"scenario": self.scenario, "params": self.params}
        text = json.dumps(payload, sort_keys=True, default=str, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _split_lines(text: str):
    """Yield (line number, key, value) and (line number, None, message) for malformed lines."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            yield number, None, f"expected 'key = value', got {raw.strip()!r}"
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            yield number, None, "missing key before '='"
            continue
        yield number, key.lower(), value


def parse_config(text: str, overrides: dict = None) -> RunConfig:
    """
    Parse and validate a run configuration.

    Args:
        text: Configuration text
        overrides: Values from the command line (scenario, output, workers,
            long_running); they win over the text

    Returns:
        RunConfig

    Raises:
        ConfigurationError: listing every problem found, each with its line
    """
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    issues = []
    values, lines = {}, {}
    for number, key, value in _split_lines(text or ""):
        if key is None:
            issues.append((number, value))
        elif key in values:
            issues.append((number, f"duplicate key {key!r} (first set on line {lines[key]})"))
        else:
            values[key] = value
            lines[key] = number

    long_running = bool(overrides.pop("long_running", False))
    for key, value in overrides.items():
        values[key] = value
        lines.pop(key, None)

    scenario = values.pop("scenario", None)
    if scenario is None:
        issues.append((None, "missing scenario"))
        raise ConfigurationError(issues)
    if scenario not in SCENARIO_SERIALIZERS:
        issues.append((lines.get("scenario"), f"unknown scenario {scenario!r}; expected one of {', '.join(SCENARIOS)}"))
        raise ConfigurationError(issues)

    serializer = SCENARIO_SERIALIZERS[scenario](data=values)
    for key in values:
        if key not in serializer.fields:
            issues.append((lines.get(key), f"unknown key {key!r} for scenario {scenario}"))
    if not serializer.is_valid():
        for key, messages in serializer.errors.items():
            label = "" if key == "non_field_errors" else f"{key}: "
            for message in _flatten(messages):
                issues.append((lines.get(key), f"{label}{message}"))

    params = dict(serializer.validated_data) if not issues else {}
    if not issues:
        issues.extend(_long_running_issues(scenario, params, lines, long_running))
    if issues:
        issues.sort(key=lambda issue: (issue[0] is None, issue[0] or 0))
        logger.warning(f"❌ invalid {scenario} config: {len(issues)} issue(s)")
        raise ConfigurationError(issues)

    output = Path(params.pop("output", settings.SIMULATION["OUTPUT_DIR"]))
    workers = params.pop("workers", settings.SIMULATION["WORKERS"])
    return RunConfig(scenario, params, output, workers, long_running, lines)


def _flatten(messages):
    # list fields report errors per item: {index: [messages]}
    if isinstance(messages, dict):
        for index, nested in messages.items():
            for message in _flatten(nested):
                yield f"item {index}: {message}"
    else:
        yield from (str(m) for m in messages)


def _long_running_issues(scenario, params, lines, long_running):
    limit = settings.SIMULATION["LONG_RUNNING_MEAN"]
    if long_running or scenario not in LONG_RUNNING_KEYS:
        return []
    issues = []
    for key in LONG_RUNNING_KEYS[scenario]:
        value = params.get(key)
        largest = max(value) if isinstance(value, list) else value
        if largest is not None and largest > limit:
            line = lines.get(key, lines.get("mean"))
            issues.append((line, f"{key}={largest:g} exceeds {limit:g}; pass --long-running to allow it"))
    return issues
