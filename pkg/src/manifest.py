"""
Run Manifest

This module records what a run consumed: the command, sha256 hashes of the
input files, the seed, the tool version, the convention fingerprint, the
worker count and the wall-clock time. Identical manifest inputs reproduce
the report payload bitwise.
"""
import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from src import config


def hash_file(path) -> str:
    """sha256 of a file's bytes, or an empty string if it cannot be read."""
    try:
        return hashlib.sha256(Path(path).read_bytes()).hexdigest()
    except OSError as e:
        logging.warning(f"Could not hash input file {path}: {e}")
        return ""


@dataclass
class RunManifest:
    command: str
    inputs: dict = field(default_factory=dict)
    seed: int = None
    workers: int = 1
    tool_version: str = config.TOOL_VERSION
    convention_fingerprint: str = field(default_factory=config.convention_fingerprint)
    started: float = field(default_factory=time.perf_counter)
    wall_clock: float = None

    def add_input(self, path):
        if path is not None:
            self.inputs[str(path)] = hash_file(path)

    def finish(self) -> "RunManifest":
        self.wall_clock = time.perf_counter() - self.started
        return self

    def to_dict(self) -> dict:
        elapsed = self.wall_clock if self.wall_clock is not None else time.perf_counter() - self.started
        return {
            "command": self.command,
            "input_hashes": dict(sorted(self.inputs.items())),
            "seed": self.seed,
            "workers": self.workers,
            "tool_version": self.tool_version,
            "convention_fingerprint": self.convention_fingerprint,
            "wall_clock": {"value": elapsed, "abs_error": 0.0, "digits": 3},
        }


def load_manifest(path) -> dict:
    """Reads the manifest embedded in a saved report; empty if the file is unreadable."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f).get("manifest", {})
    except (json.JSONDecodeError, OSError) as e:
        logging.warning(f"Could not read or parse report {path}: {e}")
        return {}


def same_inputs(first: dict, second: dict) -> bool:
    """True when two manifests name the same command, inputs, seed and conventions."""
    keys = ("command", "input_hashes", "seed", "tool_version", "convention_fingerprint")
    return all(first.get(k) == second.get(k) for k in keys)
