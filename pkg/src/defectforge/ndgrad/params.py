"""Named parameter sets and their flat binary container format.

Container layout: magic ``NDG1``, then one record per tensor —
u32 name length, name bytes (utf-8), u32 rank, u32 extents, and the
row-major float64 payload.  All integers and floats are little-endian.
"""

from __future__ import annotations

import io
import struct
from typing import Iterable, Iterator

import numpy as np

from .tensor import NdgradError, Tensor

MAGIC = b"NDG1"


class ContainerFormatError(NdgradError):
    """The byte stream is not a valid parameter container."""


class ParamSet:
    """Tensors addressed by unique names, with deterministic iteration order."""

    def __init__(self, items: Iterable[tuple[str, Tensor]] = ()):
        self._by_name: dict[str, Tensor] = {}
        for name, t in items:
            self.add(name, t)

    def add(self, name: str, t: Tensor) -> None:
        if name in self._by_name:
            raise ValueError(f"duplicate parameter name {name!r}")
        self._by_name[name] = t

    def __getitem__(self, name: str) -> Tensor:
        return self._by_name[name]

    def __setitem__(self, name: str, t: Tensor) -> None:
        self.add(name, t)

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def __len__(self) -> int:
        return len(self._by_name)

    def __iter__(self) -> Iterator[str]:
        return iter(self._by_name)

    def names(self) -> list[str]:
        return list(self._by_name)

    def tensors(self) -> list[Tensor]:
        return list(self._by_name.values())

    def items(self) -> list[tuple[str, Tensor]]:
        return list(self._by_name.items())

    def copy(self) -> "ParamSet":
        """Deep copy: fresh leaf tensors sharing nothing with the original."""
        return ParamSet((name, Tensor(t.data.copy())) for name, t in self.items())

    def allclose(self, other: "ParamSet") -> bool:
        return self.names() == other.names() and all(
            np.array_equal(self[n].data, other[n].data) for n in self.names()
        )

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        buf.write(MAGIC)
        for name, t in self.items():
            raw_name = name.encode("utf-8")
            # asarray, not ascontiguousarray: the latter promotes rank-0 to rank-1
            arr = np.asarray(t.data, dtype="<f8")
            buf.write(struct.pack("<I", len(raw_name)))
            buf.write(raw_name)
            buf.write(struct.pack("<I", arr.ndim))
            buf.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            buf.write(arr.tobytes())
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "ParamSet":
        if blob[:4] != MAGIC:
            raise ContainerFormatError("bad magic; not an NDG1 container")
        ps = cls()
        view = memoryview(blob)
        pos = 4
        total = len(blob)

        def take(n: int) -> memoryview:
            nonlocal pos
            if pos + n > total:
                raise ContainerFormatError("truncated container record")
            chunk = view[pos : pos + n]
            pos += n
            return chunk

        while pos < total:
            (name_len,) = struct.unpack("<I", take(4))
            name = bytes(take(name_len)).decode("utf-8")
            (rank,) = struct.unpack("<I", take(4))
            extents = struct.unpack(f"<{rank}I", take(4 * rank))
            count = int(np.prod(extents, dtype=np.int64)) if rank else 1
            payload = take(8 * count)
            data = np.frombuffer(payload, dtype="<f8").reshape(extents).copy()
            ps.add(name, Tensor(data))
        return ps

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "ParamSet":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())
