"""
Result files: CSV tables, JSON summaries, YAML fragments and the run manifest.

Every file is written atomically (temp file in the target directory + os.replace).
Numbers are formatted with repr() so output is locale-independent and round-trips
exactly; CSV rows end with "\\n".
"""

import csv
import io
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Iterable, List, Optional, Sequence

import yaml

MANIFEST_NAME = "manifest.json"


def atomic_write_text(path: str, text: str) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"row has {len(row)} fields for {len(header)} columns")
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    return atomic_write_text(path, csv_text(header, rows))


def json_text(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=True) + "\n"


def write_json(path: str, data: Any) -> str:
    return atomic_write_text(path, json_text(data))


def read_json(path: str) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def write_yaml(path: str, data: Any) -> str:
    return atomic_write_text(path, yaml.safe_dump(data, sort_keys=False, default_flow_style=None))


@dataclass
class RunManifest:
    """One per output directory; the only result file that carries wall-clock data."""
    subcommand: str
    config_path: Optional[str]
    output_dir: str
    seed: Optional[int]
    version: str
    timings: Dict[str, float] = field(default_factory=dict)
    files: List[str] = field(default_factory=list)
    exit_code: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def write_manifest(manifest: RunManifest) -> str:
    return write_json(os.path.join(manifest.output_dir, MANIFEST_NAME), manifest.to_dict())
