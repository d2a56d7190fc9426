"""Tagged columnar output with reproducible serialization.

CSV cells use the shortest round-trip decimal representation of each float
(never more than 17 significant digits), empty string for missing values,
and a `# key=value` metadata header carrying the canonical config digest.
Identical config + seed therefore produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from .errors import ConfigError

CODE_VERSION = "0.1.0"


def config_digest(config: dict) -> str:
    """SHA-256 over the canonicalized JSON bytes of the config."""
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"),
                      ensure_ascii=True).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()


def format_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)          # shortest round-trip decimal
    return str(value)


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list[Any]] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)

    def add_row(self, values: Sequence[Any]) -> None:
        if len(values) != len(self.columns):
            raise ConfigError(
                f"row has {len(values)} cells for {len(self.columns)} columns")
        self.rows.append(list(values))

    def to_csv(self) -> str:
        lines = [f"# {k}={format_cell(v)}" for k, v in sorted(self.metadata.items())]
        lines.append(",".join(self.columns))
        for row in self.rows:
            lines.append(",".join(format_cell(v) for v in row))
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv())


def write_json_report(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
