"""Deterministic JSON serialization and atomic file writes.

All persisted output goes through these helpers so that reruns with the same
seed produce byte-identical files: keys are sorted, separators are fixed, and
nothing time- or environment-dependent is emitted here.
"""

from __future__ import annotations

import json
import os
from collections.abc import Iterable, Iterator, Mapping


class DataFormatError(ValueError):
    """A data file on disk did not match the expected format."""


def dump_json_line(obj: object) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True,
                      separators=(",", ":"))


def dump_json_pretty(obj: object) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2) + "\n"


def atomic_write_text(path: str, text: str) -> None:
    """Write via a .part sibling and rename into place.

    A failure mid-write leaves only the .part file behind, never a truncated
    final file.
    """

    part = path + ".part"
    with open(part, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(text)
    os.replace(part, path)


def write_jsonl(path: str, records: Iterable[Mapping]) -> int:
    lines = [dump_json_line(rec) for rec in records]
    atomic_write_text(path, "".join(line + "\n" for line in lines))
    return len(lines)


def read_jsonl(path: str) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) pairs, flagging bad lines by position."""

    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(record, dict):
                raise DataFormatError(f"{path}:{lineno}: expected an object")
            yield lineno, record
