"""
Artifact output for glassbound.

This module provides a context manager that writes JSON, CSV, DOT or binary
artifacts to a file or stdout and stamps provenance metadata into them.
"""
import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction

from shared.config import config
from shared import rational

logger = logging.getLogger('glassbound.artifacts')


def build_provenance(command, spec=None, seed=None, **extra):
    """Provenance block attached to every numeric artifact."""
    provenance = {
        "command": command,
        "tool_version": config.TOOL_VERSION,
        "spec_sha256": spec.digest() if spec is not None else None,
        "seed": seed,
    }
    provenance.update({k: v for k, v in extra.items() if v is not None})
    return provenance


def plain(obj, digits=None):
    """Convert nested results to JSON-ready data with stable float rounding."""
    digits = config.REPORT_DIGITS if digits is None else digits
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, Fraction):
        return rational.format_rational(obj)
    if isinstance(obj, float):
        return round(obj, digits)
    if hasattr(obj, "item") and callable(obj.item):
        return plain(obj.item(), digits)
    if isinstance(obj, dict):
        return {str(k): plain(v, digits) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [plain(v, digits) for v in obj]
        return sorted(items, key=str) if isinstance(obj, (set, frozenset)) else items
    return str(obj)


class artifact_writer:
    """Context manager for writing one artifact.

    Usage:
        with artifact_writer(path, "json", provenance) as out:
            out.write_json({"entropy": 0.224})

    Output goes to stdout when path is None. A file that fails mid-write is
    removed.
    """
    def __init__(self, path=None, fmt="json", provenance=None, log_errors=True):
        self.path = path
        self.fmt = fmt
        self.provenance = provenance or {}
        self.log_errors = log_errors
        self.stream = None

    def __enter__(self):
        if self.path is None:
            self.stream = sys.stdout.buffer if self.fmt == "bin" else sys.stdout
        else:
            mode = "wb" if self.fmt == "bin" else "w"
            self.stream = open(self.path, mode, newline="" if mode == "w" else None)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.stream is None:
            return
        try:
            if exc_type is not None and self.log_errors:
                logger.error(f"Artifact error: {exc_type.__name__}: {str(exc_val)}")
        finally:
            if self.path is not None:
                self.stream.close()
                if exc_type is not None and os.path.exists(self.path):
                    os.remove(self.path)
            else:
                self.stream.flush()

    def write_json(self, payload):
        document = dict(plain(payload))
        document["provenance"] = plain(self.provenance)
        self.stream.write(json.dumps(document, sort_keys=True, indent=2) + "\n")

    def _comment_header(self, prefix):
        for key in sorted(self.provenance):
            if self.provenance[key] is not None:
                self.stream.write(f"{prefix} {key}={plain(self.provenance[key])}\n")

    def write_rows(self, header, rows):
        self._comment_header("#")
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(plain(list(row)))
        self.stream.write(buffer.getvalue())

    def write_lines(self, lines):
        self._comment_header("#")
        for line in lines:
            self.stream.write(f"{line}\n")

    def write_dot(self, text):
        self._comment_header("//")
        self.stream.write(text)

    def write_bytes(self, data):
        self.stream.write(data)
