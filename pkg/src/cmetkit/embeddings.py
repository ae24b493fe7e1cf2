"""Basic-meaning vector store: byte format, loading, and lookup.

The store is the boundary between this toolkit and the external encoder
process, so its layout is fixed at the byte level:

* ``embeddings.bin``: 16-byte header (magic ``BMEM``, format version,
  row count, dimension; all little-endian uint32 after the 4-byte magic)
  followed by the row-major float32 matrix, little-endian.
* ``embeddings.index``: one ``headword<TAB>row`` line per entry, UTF-8,
  rows forming a permutation of 0..rows-1.

Tokens absent from the index resolve to an all-zero vector with the OOV
flag set; model input code keys off that flag, never off the vector
contents.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .dictionary import ResolvedTable
from .errors import FormatError, InputError
from .jsonl import atomic_write, write_records

MAGIC = b"BMEM"
STORE_VERSION = 1
DEFAULT_DIM = 1024
_HEADER = struct.Struct("<4sIII")


@dataclass(frozen=True)
class Lookup:
    vector: np.ndarray
    oov: bool


class EmbeddingStore:
    """Immutable in-memory store; safe for concurrent readers."""

    def __init__(self, index: dict[str, int], matrix: np.ndarray):
        self.index = index
        self.matrix = matrix
        self.matrix.flags.writeable = False
        self.dim = int(matrix.shape[1])
        self._zero = np.zeros(self.dim, dtype=np.float32)
        self._zero.flags.writeable = False

    @property
    def rows(self) -> int:
        return int(self.matrix.shape[0])

    def lookup(self, token: str) -> Lookup:
        row = self.index.get(token)
        if row is None:
            return Lookup(self._zero, True)
        return Lookup(self.matrix[row], False)


@dataclass(frozen=True)
class WorkItem:
    """One encoding task for the external encoder."""

    row: int
    headword: str
    text: str


def build_index(resolved: ResolvedTable) -> tuple[dict[str, int], list[WorkItem]]:
    """Assign stable row ids in headword code-point order.

    The returned worklist pairs each row with its basic-meaning text, ready
    to hand to the encoder process; sorting makes the assignment a function
    of the entry set alone, independent of dump order.
    """
    index: dict[str, int] = {}
    worklist: list[WorkItem] = []
    for row, headword in enumerate(sorted(resolved.entries)):
        index[headword] = row
        worklist.append(WorkItem(row, headword, resolved.entries[headword].basic_meaning))
    return index, worklist


def write_worklist(path: str | Path, worklist: Iterable[WorkItem]) -> None:
    write_records(path, ({"row": w.row, "headword": w.headword, "text": w.text} for w in worklist))


def write_index(path: str | Path, index: dict[str, int]) -> None:
    for headword in index:
        if "\t" in headword or "\n" in headword:
            raise FormatError(f"headword contains tab or newline: {headword!r}")
    lines = "".join(f"{h}\t{r}\n" for h, r in sorted(index.items(), key=lambda kv: kv[1]))
    atomic_write(path, lines)


def load_index(path: str | Path) -> dict[str, int]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"no such file: {path}")
    index: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[1].isdigit():
                raise FormatError(f"{path}:{lineno}: expected 'headword<TAB>row'")
            headword, row = parts[0], int(parts[1])
            if headword in index:
                raise FormatError(f"{path}:{lineno}: duplicate headword {headword!r}")
            index[headword] = row
    return index


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    if matrix.ndim != 2:
        raise ValueError("matrix must be 2-dimensional")
    m = np.ascontiguousarray(matrix, dtype="<f4")
    header = _HEADER.pack(MAGIC, STORE_VERSION, m.shape[0], m.shape[1])
    atomic_write(path, header + m.tobytes())


def load_store(
    matrix_path: str | Path,
    index_path: str | Path,
    expected_dim: int = DEFAULT_DIM,
) -> EmbeddingStore:
    """Load and validate a store; any inconsistency fails the load.

    Checks: magic and version, payload length against the header, the
    declared dimension against ``expected_dim``, row count against the
    index, row ids forming a permutation, and value finiteness.
    """
    matrix_path = Path(matrix_path)
    if not matrix_path.is_file():
        raise InputError(f"no such file: {matrix_path}")
    blob = matrix_path.read_bytes()
    if len(blob) < _HEADER.size:
        raise FormatError(f"{matrix_path}: truncated header")
    magic, version, rows, dim = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise FormatError(f"{matrix_path}: bad magic {magic!r}")
    if version != STORE_VERSION:
        raise FormatError(f"{matrix_path}: unsupported store version {version}")
    if dim != expected_dim:
        raise FormatError(f"{matrix_path}: dimension mismatch: header says {dim}, expected {expected_dim}")
    payload = len(blob) - _HEADER.size
    if payload != rows * dim * 4:
        raise FormatError(
            f"{matrix_path}: payload is {payload} bytes, header implies {rows * dim * 4}"
        )
    matrix = np.frombuffer(blob, dtype="<f4", offset=_HEADER.size).reshape(rows, dim).copy()

    index = load_index(index_path)
    if len(index) != rows:
        raise FormatError(
            f"{index_path}: row-count mismatch: index has {len(index)} entries, matrix has {rows} rows"
        )
    if sorted(index.values()) != list(range(rows)):
        raise FormatError(f"{index_path}: row ids are not a permutation of 0..{rows - 1}")
    if not np.isfinite(matrix).all():
        bad = int(np.count_nonzero(~np.isfinite(matrix)))
        raise FormatError(f"{matrix_path}: {bad} non-finite values")
    return EmbeddingStore(index, matrix)
