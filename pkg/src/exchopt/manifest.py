"""Run manifests: enough resolved state to reproduce a command's outputs.

Timestamps live only in the manifest; data files carry none, so re-running a
deterministic command from its manifest reproduces the data files byte for
byte at any worker count.
"""
from __future__ import annotations

import json
import os
from datetime import datetime, timezone

from . import __version__


def build_manifest(command: str, resolved_config: dict, outputs: list[str],
                   seeds: list[int] | None = None, extra: dict | None = None) -> dict:
    man = {
        "schema_version": 1,
        "tool": "exchopt",
        "tool_version": __version__,
        "command": command,
        "config": resolved_config,
        "seeds": seeds or [],
        "outputs": [os.fspath(p) for p in outputs],
        "created_utc": datetime.now(timezone.utc).isoformat(),
    }
    if extra:
        man.update(extra)
    return man


def write_manifest(man: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(man, fh, indent=2, sort_keys=True)
        fh.write("\n")
