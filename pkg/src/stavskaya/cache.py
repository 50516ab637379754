"""Binary on-disk cache for a level's state space and transitions.

Layout (little-endian):
  magic "STVK" | version u32 | n u32 | L u32 | state count u64 |
  forbidden count u64 | sorted word codes (u64 each) |
  three successor arrays in kind order (u64 each, all-ones = blocked) |
  forbidden patterns (u32 length prefix + ASCII digits each).

The gather-form predecessor table is cheap to rebuild and is not stored.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import CacheError
from .patterns import ForbiddenSet, pattern_text, text_to_pattern
from .statespace import StateSpace, TransitionTable, pred_from_succ

MAGIC = b"STVK"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sIIIQQ")
_BLOCKED = np.uint64(0xFFFFFFFFFFFFFFFF)


def cache_path(cache_dir: str, n: int) -> str:
    return os.path.join(cache_dir, f"level{n:02d}.stvk")


def write_cache(path: str, space: StateSpace, table: TransitionTable,
                fset: ForbiddenSet) -> None:
    """Serialize one level's artifacts; writes atomically via a temp file."""
    if not (space.n == table.n == fset.level):
        raise ValueError("state space, table, and forbidden set levels differ")
    tmp = path + ".tmp"
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(tmp, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION, space.n, space.length,
                              len(space), len(fset)))
        fh.write(space.codes.astype("<u8").tobytes())
        for d in range(3):
            row = np.where(table.succ[d] < 0, _BLOCKED,
                           table.succ[d].astype(np.int64).astype(np.uint64))
            fh.write(row.astype("<u8").tobytes())
        for pat in fset.patterns:
            text = pattern_text(pat).encode("ascii")
            fh.write(struct.pack("<I", len(text)))
            fh.write(text)
    os.replace(tmp, path)


def read_cache(path: str, n: int) -> tuple[StateSpace, TransitionTable, ForbiddenSet]:
    """Load one level's artifacts, validating the header against `n`."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CacheError(f"cannot read cache file {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise CacheError(f"cache file {path} is truncated")
    magic, version, level, length, count, fcount = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise CacheError(f"cache file {path} has bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise CacheError(f"cache file {path} has version {version}, "
                         f"expected {FORMAT_VERSION}")
    if level != n:
        raise CacheError(f"cache file {path} is for level {level}, expected {n}")
    if length != 3 * n - 1:
        raise CacheError(f"cache file {path} has memory length {length}, "
                         f"expected {3 * n - 1}")
    need = _HEADER.size + 8 * count * 4
    if len(raw) < need:
        raise CacheError(f"cache file {path} is truncated")

    offset = _HEADER.size
    codes = np.frombuffer(raw, dtype="<u8", count=count, offset=offset).copy()
    offset += 8 * count
    if count > 1 and not (codes[1:] > codes[:-1]).all():
        raise CacheError(f"cache file {path} has unsorted state codes")
    succ = np.empty((3, count), dtype=np.int32)
    for d in range(3):
        row = np.frombuffer(raw, dtype="<u8", count=count, offset=offset)
        offset += 8 * count
        blocked = row == _BLOCKED
        if (~blocked & (row >= count)).any():
            raise CacheError(f"cache file {path} has out-of-range successors")
        succ[d] = np.where(blocked, -1, row.astype(np.int64)).astype(np.int32)

    patterns = []
    for _ in range(fcount):
        if offset + 4 > len(raw):
            raise CacheError(f"cache file {path} is truncated in patterns")
        (m,) = struct.unpack_from("<I", raw, offset)
        offset += 4
        if offset + m > len(raw):
            raise CacheError(f"cache file {path} is truncated in patterns")
        try:
            patterns.append(text_to_pattern(raw[offset:offset + m].decode("ascii")))
        except (UnicodeDecodeError, ValueError) as exc:
            raise CacheError(f"cache file {path} has a bad pattern: {exc}") from exc
        offset += m
    if offset != len(raw):
        raise CacheError(f"cache file {path} has {len(raw) - offset} trailing bytes")

    space = StateSpace(n=n, length=length, codes=codes)
    table = TransitionTable(n=n, succ=succ, pred=pred_from_succ(succ),
                            last_digit=(codes % np.uint64(3)).astype(np.uint8))
    fset = ForbiddenSet(n, patterns)
    if len(fset) != fcount:
        raise CacheError(f"cache file {path} has duplicate patterns")
    return space, table, fset
