"""Deterministic CSV output with a manifest header.

Every file starts with '#'-prefixed metadata lines carrying the resolved
parameter set and its content hash, so a run can be audited and repeated;
bodies are written with repr-stable formatting and files appear
atomically.
"""

from __future__ import annotations

import hashlib
import os
import tempfile


def format_value(v):
    if isinstance(v, float):
        return f"{v:.12g}"
    if isinstance(v, complex):
        return f"{v.real:.12g}{v.imag:+.12g}j"
    return str(v)


class RunManifest:
    """Resolved inputs of one CLI invocation."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = dict(params)

    def lines(self):
        items = sorted(self.params.items())
        return [f"{k} = {format_value(v)}" for k, v in items]

    @property
    def content_hash(self) -> str:
        body = self.command + "\n" + "\n".join(self.lines())
        return hashlib.sha256(body.encode()).hexdigest()[:16]

    def header(self):
        out = [f"# command: {self.command}",
               f"# manifest: {self.content_hash}"]
        out += [f"# {line}" for line in self.lines()]
        return out


def write_csv(path, manifest: RunManifest, columns, rows, extra_comments=()):
    """Atomically write a manifest-stamped CSV file."""
    lines = manifest.header()
    lines += [f"# {c}" for c in extra_comments]
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(format_value(v) for v in row))
    text = "\n".join(lines) + "\n"
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
