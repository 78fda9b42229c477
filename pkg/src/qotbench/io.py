"""Run manifests and manifest-stamped CSV output."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from . import __version__
from .cfm import constants_hash
from .rng import ALGORITHM

TIMESTAMP_KEY = "timestamp"


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int | None = None
    constants_path: str | None = None
    tool_version: str = __version__
    rng: str = ALGORITHM
    timestamp: str = field(default_factory=lambda: _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"))

    def header_lines(self) -> list[str]:
        lines = [
            f"# tool: qotbench {self.tool_version}",
            f"# command: {self.command}",
            f"# constants_sha256: {constants_hash(self.constants_path)}",
            f"# rng: {self.rng}",
            f"# seed: {self.seed}",
            f"# config: {json.dumps(self.config, sort_keys=True, default=str)}",
        ]
        # kept last so data hashing can drop exactly this one line
        lines.append(f"# {TIMESTAMP_KEY}: {self.timestamp}")
        return lines


def render_csv(manifest: RunManifest | None, header: Sequence[str], rows: Iterable[Sequence], notes=()) -> str:
    buf = io.StringIO()
    if manifest is not None:
        for line in manifest.header_lines():
            buf.write(line + "\n")
    for note in notes:
        buf.write(f"# note: {note}\n")
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    n = 0
    for row in rows:
        wr.writerow(row)
        n += 1
    buf.write(f"# rows: {n}\n")
    return buf.getvalue()


def write_csv(path: str | Path, manifest: RunManifest | None, header, rows, notes=()) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(manifest, header, rows, notes))
    return path


def read_csv(text: str) -> tuple[list[str], list[list[str]]]:
    """Parse a stamped CSV back into (header, rows), skipping comment lines."""
    data = [line for line in text.splitlines() if not line.startswith("#")]
    rows = list(csv.reader(data))
    return rows[0], rows[1:]


def data_hash(text: str) -> str:
    """Hash of everything but the timestamp line."""
    kept = [line for line in text.splitlines() if not line.startswith(f"# {TIMESTAMP_KEY}:")]
    return hashlib.sha256("\n".join(kept).encode()).hexdigest()
