"""Pipeline configuration: a flat key=value file, overridable per flag.

The default path comes from the ORRMINE_CONFIG environment variable; command
line flags always win over file values.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .selector import DEFAULT_QUERY, DEFAULT_RANKING_PHRASES, DEFAULT_SECTIONS, DEFAULT_TOP_N

ENV_CONFIG = "ORRMINE_CONFIG"


@dataclass(frozen=True, slots=True)
class PipelineConfig:
    max_tokens: int = 300
    seed: int = 42
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    dataset: str = "orr"
    mode: str = "boundary_re"
    query: str = DEFAULT_QUERY
    ranking_phrases: tuple[str, ...] = DEFAULT_RANKING_PHRASES
    sections: tuple[str, ...] = DEFAULT_SECTIONS
    top_n: int = DEFAULT_TOP_N
    jobs: int = 1
    log_level: str = "WARNING"
    strict_alignment: bool = False

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                rendered = ",".join(str(v) for v in value)
            elif isinstance(value, bool):
                rendered = "true" if value else "false"
            else:
                rendered = str(value)
            lines.append(f"{f.name} = {rendered}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PipelineConfig":
        known = {f.name: f for f in fields(cls)}
        values: dict = {}
        for line_no, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"config line {line_no}: expected 'key = value', got {raw!r}")
            key = key.strip()
            value = value.strip()
            if key not in known:
                raise ValueError(f"config line {line_no}: unknown key {key!r}")
            values[key] = _coerce(key, value)
        return cls(**values)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        return cls.from_text(Path(path).read_text(encoding="utf-8"))


def _coerce(key: str, value: str):
    if key in ("max_tokens", "seed", "top_n", "jobs"):
        return int(value)
    if key == "ratios":
        parts = tuple(float(v) for v in value.split(","))
        if len(parts) != 3:
            raise ValueError(f"ratios needs three numbers, got {value!r}")
        return parts
    if key in ("sections", "ranking_phrases"):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    if key == "strict_alignment":
        if value.lower() not in ("true", "false"):
            raise ValueError(f"strict_alignment must be true or false, got {value!r}")
        return value.lower() == "true"
    return value


def parse_ratios(text: str) -> tuple[float, float, float]:
    parts = tuple(float(v) for v in text.split(","))
    if len(parts) != 3:
        raise ValueError(f"ratios needs three comma-separated numbers, got {text!r}")
    return parts
