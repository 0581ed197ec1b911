"""GEOM benchmark instances and the plain-text instance format.

A GEOM instance places ``n`` points uniformly in ``[0, bound]^2`` and uses
the pairwise Euclidean distance as the benefit of pairing agent ``i`` with
job ``j``.

Instance files::

    n
    a_00 a_01 ... a_0(n-1)
    ...
    a_(n-1)0 ...  a_(n-1)(n-1)
"""

from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .core import Instance
from .rng import MASK64, SplitMix64


class InstanceParseError(ValueError):
    """Malformed instance text. ``line`` is 1-based (0 when not applicable)."""

    def __init__(self, message: str, line: int = 0) -> None:
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class GeomParams:
    n: int
    bound: float = 100.0
    seed: int = 0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not (self.bound > 0) or not np.isfinite(self.bound):
            raise ValueError(f"bound must be a positive finite real, got {self.bound!r}")
        if not (0 <= int(self.seed) <= MASK64):
            raise ValueError("seed must fit in 64 unsigned bits")


def geom_points(params: GeomParams) -> np.ndarray:
    """The ``(n, 2)`` point set: x then y per point, from one splitmix64 stream."""
    rng = SplitMix64(params.seed)
    raw = [rng.next_u64() for _ in range(2 * params.n)]
    pts = np.array(raw, dtype=np.float64) / float(MASK64) * float(params.bound)
    return pts.reshape(params.n, 2)


def generate_geom(params: GeomParams) -> Instance:
    pts = geom_points(params)
    diff = pts[:, None, :] - pts[None, :, :]
    # (p - q)**2 == (q - p)**2 exactly, so the matrix is exactly symmetric
    return Instance(np.sqrt((diff**2).sum(axis=-1)))


def write_instance(inst: Instance, sink: IO[str] | str | Path) -> None:
    """Write ``inst`` using ``repr`` floats, so reading back is exact."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w", encoding="ascii", newline="\n") as fh:
            write_instance(inst, fh)
        return
    sink.write(f"{inst.n}\n")
    for row in inst.benefits:
        sink.write(" ".join(repr(float(x)) for x in row))
        sink.write("\n")


def instance_to_text(inst: Instance) -> str:
    buf = io.StringIO()
    write_instance(inst, buf)
    return buf.getvalue()


def read_instance(source: IO[str] | str | Path) -> Instance:
    if isinstance(source, (str, Path)):
        with open(source, encoding="ascii") as fh:
            return read_instance(fh)
    lines = [(k + 1, ln) for k, ln in enumerate(source) if ln.strip()]
    if not lines:
        raise InstanceParseError("missing header: file is empty", 1)
    header_no, header = lines[0]
    try:
        n = int(header.strip())
    except ValueError:
        raise InstanceParseError(f"header must be an integer size, got {header.strip()!r}", header_no) from None
    if n < 1:
        raise InstanceParseError(f"size must be positive, got {n}", header_no)
    rows = lines[1:]
    out = np.empty((n, n), dtype=np.float64)
    for r, (line_no, text) in enumerate(rows[:n]):
        toks = text.split()
        if len(toks) != n:
            raise InstanceParseError(f"row {r} has {len(toks)} entries, expected {n}", line_no)
        try:
            out[r] = [float(t) for t in toks]
        except ValueError as exc:
            raise InstanceParseError(f"non-numeric entry ({exc})", line_no) from None
        if not np.all(np.isfinite(out[r])):
            raise InstanceParseError("non-finite entry", line_no)
    if len(rows) != n:
        line = rows[n][0] if len(rows) > n else (rows[-1][0] + 1 if rows else header_no + 1)
        raise InstanceParseError(f"expected {n} matrix rows, found {len(rows)}", line)
    return Instance(out)


def checksum(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
