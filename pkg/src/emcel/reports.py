"""Delimited report tables with self-describing comment headers.

Every table starts with '#' comment lines carrying a format tag, the
experiment name, the run configuration as canonical JSON, a SHA-256 hash
of that JSON, the seed, and (outside strict mode) a creation timestamp.
Strict mode omits the timestamp so repeated runs of the same configuration
produce byte-identical files.  `read_table` parses a table back and
verifies the hash against the embedded configuration.
"""

from __future__ import annotations

import datetime
import hashlib
import json
from typing import Optional

import numpy as np

__all__ = [
    "FORMAT_TAG",
    "canonical_config",
    "config_hash",
    "write_table",
    "read_table",
    "validate_table",
]

FORMAT_TAG = "emcel-table v1"


def canonical_config(config: dict) -> str:
    """Canonical JSON for hashing: sorted keys, no whitespace.

    Non-finite floats serialise as Infinity/-Infinity/NaN, which
    json.loads reads back, so configurations with infinite endpoints
    round-trip.
    """
    return json.dumps(config, sort_keys=True, separators=(",", ":"))


def config_hash(config: dict) -> str:
    return hashlib.sha256(canonical_config(config).encode("utf-8")).hexdigest()


def _format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_table(
    path,
    experiment: str,
    columns: dict,
    config: dict,
    strict: bool = False,
    extra_meta: Optional[dict] = None,
) -> None:
    """Write named columns as comma-separated rows under a comment header.

    columns maps names to equal-length one-dimensional sequences; extra
    metadata (fitted slopes and the like) goes into additional '# key:
    value' lines without affecting the configuration hash.
    """
    if not columns:
        raise ValueError("columns: need at least one column")
    names = list(columns)
    arrays = [np.atleast_1d(np.asarray(columns[k])) for k in names]
    length = len(arrays[0])
    for name, arr in zip(names, arrays):
        if arr.ndim != 1:
            raise ValueError(f"columns[{name!r}]: expected a one-dimensional sequence")
        if len(arr) != length:
            raise ValueError(
                f"columns[{name!r}]: length {len(arr)} does not match {names[0]!r} ({length})"
            )

    lines = [
        f"# {FORMAT_TAG}",
        f"# experiment: {experiment}",
        f"# config: {canonical_config(config)}",
        f"# config-hash: sha256:{config_hash(config)}",
    ]
    if "seed" in config:
        lines.append(f"# seed: {config['seed']}")
    if extra_meta:
        for key, value in extra_meta.items():
            lines.append(f"# {key}: {value}")
    if not strict:
        stamp = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
        lines.append(f"# created: {stamp}")
    lines.append(",".join(names))
    for i in range(length):
        lines.append(",".join(_format_value(arr[i]) for arr in arrays))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_table(path) -> tuple[dict, dict]:
    """Parse a table file back into (metadata, columns).

    Verifies the format tag and that the embedded hash matches the
    embedded configuration; raises ValueError on any mismatch or on
    malformed rows.  Column values come back as float arrays.
    """
    meta: dict = {}
    names = None
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().rstrip("\n")
        if first != f"# {FORMAT_TAG}":
            raise ValueError(f"{path}: not a {FORMAT_TAG} file (first line {first!r})")
        for lineno, raw in enumerate(fh, start=2):
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip()] = value.strip()
                continue
            if names is None:
                names = line.split(",")
                continue
            parts = line.split(",")
            if len(parts) != len(names):
                raise ValueError(f"{path}:{lineno}: expected {len(names)} fields, got {len(parts)}")
            rows.append([float(p) for p in parts])
    if names is None:
        raise ValueError(f"{path}: no column header found")
    if "config" in meta:
        config = json.loads(meta["config"])
        meta["config"] = config
        stored = meta.get("config-hash", "")
        expected = f"sha256:{config_hash(config)}"
        if stored != expected:
            raise ValueError(
                f"{path}: configuration hash mismatch (header {stored!r}, recomputed {expected!r})"
            )
    data = np.asarray(rows, dtype=float) if rows else np.empty((0, len(names)))
    columns = {name: data[:, j] for j, name in enumerate(names)}
    return meta, columns


def validate_table(path) -> dict:
    """Read a table purely for validation; returns its metadata."""
    meta, _ = read_table(path)
    return meta
