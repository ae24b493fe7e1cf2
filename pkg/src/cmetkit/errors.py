"""Exception hierarchy shared by all toolkit modules.

Each class carries the process exit code the CLI maps it to, so error
handling stays in one place.  In-memory helpers that validate plain
arguments raise ``ValueError``; these surface as ``DataError`` exit codes
when they escape a subcommand.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for errors with a dedicated CLI exit code."""

    exit_code = 1


class InputError(ToolkitError):
    """A required input file is missing or unreadable."""

    exit_code = 3


class FormatError(ToolkitError):
    """An input file violates its schema.

    Messages name the offending line and field where known, e.g.
    ``corpus.jsonl:17: field 'register': unknown value 'poetry'``.
    """

    exit_code = 4

    @classmethod
    def at(cls, source: str, line: int, field: str, problem: str) -> "FormatError":
        return cls(f"{source}:{line}: field {field!r}: {problem}")


class DataError(ToolkitError):
    """Inputs are individually well-formed but mutually inconsistent.

    Covers manifest/corpus coverage mismatches, label-length mismatches,
    empty vocabularies, and similar contract violations.
    """

    exit_code = 5
