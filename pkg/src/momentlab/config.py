"""Experiment specifications: a plain-text ``key = value`` format.

Schema
------
One assignment per line, ``#`` starts a comment, blank lines are ignored.
Reserved keys:

``kind``    experiment kind (see KINDS); required
``output``  result path (optional; stdout when absent)
``format``  ``csv`` or ``json`` (default csv)

Every other key is an experiment parameter, kept as text and converted on use.
Values given on the command line replace file values, and ``MOMENTLAB_<KEY>``
environment variables sit between the two (file < environment < flags).
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Optional

from .errors import ConfigError

KINDS = (
    "tangency",
    "intersect",
    "tube-volume",
    "intersection-volume",
    "example-mass",
    "maximal",
    "dimension",
    "multiplier-decay",
    "symbol-check",
    "bernstein",
    "acceptance",
)
FORMATS = ("csv", "json")
ENV_PREFIX = "MOMENTLAB_"
RESERVED = ("kind", "output", "format")

# keys that must be present (from file, environment or flags) before running
REQUIRED = {
    "tangency": ("d", "xlast", "r"),
    "intersect": ("d", "c2"),
    "tube-volume": ("d",),
    "intersection-volume": ("d",),
    "example-mass": ("d", "s"),
    "maximal": ("d", "s"),
    "dimension": ("d", "delta", "set"),
    "multiplier-decay": ("d",),
    "symbol-check": ("d",),
    "bernstein": ("s", "p"),
    "acceptance": ("budget",),
}


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    params: Mapping[str, str] = field(default_factory=dict)
    output: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "params", {str(k): str(v) for k, v in dict(self.params).items()})

    # -- typed access ---------------------------------------------------------

    def has(self, key: str) -> bool:
        return key in self.params

    def text(self, key: str, default: Optional[str] = None) -> str:
        if key in self.params:
            return self.params[key]
        if default is None:
            raise ConfigError(f"missing parameter {key!r} for kind {self.kind!r}")
        return default

    def integer(self, key: str, default: Optional[int] = None) -> int:
        raw = self.text(key, None if default is None else str(default))
        try:
            v = float(raw)
        except ValueError as err:
            raise ConfigError(f"{key} = {raw!r} is not an integer") from err
        if v != int(v):
            raise ConfigError(f"{key} = {raw!r} is not an integer")
        return int(v)

    def number(self, key: str, default: Optional[float] = None) -> float:
        from .scaling import parse_scale_list

        raw = self.text(key, None if default is None else repr(float(default)))
        vals = parse_scale_list(raw)
        if len(vals) != 1:
            raise ConfigError(f"{key} = {raw!r} must be a single number")
        return float(vals[0])

    def numbers(self, key: str, default: Optional[str] = None) -> list:
        from .scaling import parse_scale_list

        return parse_scale_list(self.text(key, default))

    @property
    def seed(self) -> int:
        return self.integer("seed", 0)

    @property
    def experiment_id(self) -> str:
        return f"{self.kind}-{self.content_hash()[:12]}"

    # -- validation and merging -------------------------------------------------

    def validate(self) -> "ExperimentSpec":
        if self.kind not in KINDS:
            raise ConfigError(f"unknown kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}; expected csv or json")
        missing = [k for k in REQUIRED[self.kind] if k not in self.params]
        if missing:
            raise ConfigError(f"kind {self.kind!r} needs {', '.join(missing)}")
        return self

    def merged(self, overrides: Mapping[str, object]) -> "ExperimentSpec":
        """A copy with overrides applied; None values are ignored."""
        params = dict(self.params)
        out, fmt, kind = self.output, self.format, self.kind
        for k, v in overrides.items():
            if v is None:
                continue
            if k == "output":
                out = str(v)
            elif k == "format":
                fmt = str(v)
            elif k == "kind":
                kind = str(v)
            else:
                params[k] = str(v)
        return replace(self, kind=kind, params=params, output=out, format=fmt)

    def with_env(self, environ: Optional[Mapping[str, str]] = None) -> "ExperimentSpec":
        env = os.environ if environ is None else environ
        found = {}
        for name, value in env.items():
            if name.startswith(ENV_PREFIX) and len(name) > len(ENV_PREFIX):
                found[name[len(ENV_PREFIX):].lower().replace("_", "-")] = value
        return self.merged(found)

    # -- text form ----------------------------------------------------------------

    def serialize(self) -> str:
        lines = [f"kind = {self.kind}", f"format = {self.format}"]
        if self.output is not None:
            lines.append(f"output = {self.output}")
        lines += [f"{k} = {self.params[k]}" for k in sorted(self.params)]
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        """Git blob hash of the serialized form."""
        data = self.serialize().encode()
        return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def parse_spec(text: str) -> ExperimentSpec:
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (p.strip() for p in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = value
    if "kind" not in values:
        raise ConfigError("experiment file has no 'kind' line")
    kind = values.pop("kind")
    output = values.pop("output", None)
    fmt = values.pop("format", "csv")
    return ExperimentSpec(kind, values, output, fmt)


def load_spec(path) -> ExperimentSpec:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read specification {path}: {err.strerror or err}") from err
    return parse_spec(text)
