"""Deterministic experiment persistence: CSV tables, JSON manifests,
atomic writes.

Every run directory gets a manifest recording the fully resolved
configuration, the seeds handed to each work unit, wall clock, package
version, and a sha256 inventory of the output files.  Reruns with an
identical manifest configuration produce bitwise-identical CSV payloads:
floats are printed with 17 significant digits and all aggregation is
fixed-order.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time

__all__ = [
    "format_float",
    "write_csv",
    "write_json",
    "atomic_write_text",
    "sha256_file",
    "RunManifest",
]


def format_float(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def atomic_write_text(path, text):
    """Write via a sibling temp file and rename (crash-safe)."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path, doc):
    atomic_write_text(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    """Manifest lifecycle: written once at start (status running) and once
    at completion with the output digest inventory, both atomically, so an
    interrupted run still leaves valid JSON behind."""

    def __init__(self, out_dir, command, config, seed, threads, version):
        self.out_dir = out_dir
        self.doc = {
            "command": command,
            "config": config,
            "seed": seed,
            "threads": threads,
            "version": version,
            "status": "running",
            "unit_seeds": [],
            "outputs": {},
            "started_unix": time.time(),
        }
        self.path = os.path.join(out_dir, "manifest.json")

    def record_units(self, unit_seeds):
        self.doc["unit_seeds"] = list(unit_seeds)

    def start(self):
        os.makedirs(self.out_dir, exist_ok=True)
        write_json(self.path, self.doc)

    def finish(self, output_paths):
        self.doc["outputs"] = {
            os.path.basename(p): sha256_file(p) for p in sorted(output_paths)
        }
        self.doc["status"] = "complete"
        self.doc["wallclock_s"] = time.time() - self.doc["started_unix"]
        write_json(self.path, self.doc)

    @staticmethod
    def verify(path):
        """Re-hash the recorded outputs; returns list of mismatched files."""
        with open(path) as fh:
            doc = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))
        bad = []
        for name, digest in doc.get("outputs", {}).items():
            full = os.path.join(base, name)
            if not os.path.exists(full) or sha256_file(full) != digest:
                bad.append(name)
        return bad
