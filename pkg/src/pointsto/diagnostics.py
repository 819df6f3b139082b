"""Diagnostic collection shared by all analysis phases."""

from __future__ import annotations

import sys
from dataclasses import dataclass, field


@dataclass
class Diagnostic:
    path: str
    line: int
    message: str

    def __str__(self) -> str:
        return f"{self.path}:{self.line}: {self.message}"


@dataclass
class Diagnostics:
    """Collects `path:line: message` diagnostics, optionally echoing to stderr.

    The analysis never aborts on a recoverable problem; it records a
    diagnostic and degrades to a no-op for the offending construct.
    """

    echo: bool = True
    entries: list[Diagnostic] = field(default_factory=list)

    def report(self, path: str, line: int, message: str) -> None:
        diag = Diagnostic(path, line, message)
        self.entries.append(diag)
        if self.echo:
            print(str(diag), file=sys.stderr)

    def __len__(self) -> int:
        return len(self.entries)
