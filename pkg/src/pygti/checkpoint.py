# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Checkpoints
===========

Binary layout, all integers being little-endian unsigned 32-bit values:

* the magic ``GTI1``;
* the format version;
* the model kind tag: length, UTF-8 bytes;
* the hyperparameters: length, UTF-8 JSON with sorted keys;
* the number of arrays, then for every array in insertion order: the name
  (length, UTF-8 bytes), the rank, the dimensions and the row-major
  little-endian float32 values.
"""
from typing import Any, BinaryIO, Dict, Tuple, Union
import io
import json
import pathlib
import struct
import numpy as np
from .core import ParamStore
from . import interface

#: Leading bytes of a checkpoint
MAGIC = b"GTI1"

#: Version of the layout
VERSION = 1

_UINT32 = struct.Struct("<I")

Path = Union[str, pathlib.Path]


class CheckpointError(ValueError):
    """Raised when a checkpoint cannot be decoded"""


class BadMagicError(CheckpointError):
    """Raised when a file does not start with the checkpoint magic"""


class VersionMismatchError(CheckpointError):
    """Raised when a checkpoint was written with another layout version"""


class TruncatedCheckpointError(CheckpointError):
    """Raised when a checkpoint ends prematurely"""


def _write_bytes(stream: BinaryIO, data: bytes) -> None:
    stream.write(_UINT32.pack(len(data)))
    stream.write(data)


def encode(kind: str, hyper: Dict[str, Any], params: ParamStore) -> bytes:
    """Encodes a model split by :py:func:`pygti.interface.to_arrays`"""
    stream = io.BytesIO()
    stream.write(MAGIC)
    stream.write(_UINT32.pack(VERSION))
    _write_bytes(stream, kind.encode("utf-8"))
    _write_bytes(stream, json.dumps(hyper, sort_keys=True).encode("utf-8"))
    stream.write(_UINT32.pack(len(params)))
    for name, array in params.items():
        _write_bytes(stream, name.encode("utf-8"))
        stream.write(_UINT32.pack(array.ndim))
        for item in array.shape:
            stream.write(_UINT32.pack(item))
        stream.write(np.ascontiguousarray(array, dtype="<f4").tobytes())
    return stream.getvalue()


class _Reader:
    def __init__(self, data: bytes, path: str):
        self.data = data
        self.offset = 0
        self.path = path

    def read(self, size: int) -> bytes:
        if self.offset + size > len(self.data):
            raise TruncatedCheckpointError(
                f"{self.path}: truncated checkpoint, {size} bytes expected at "
                f"offset {self.offset}, {len(self.data) - self.offset} left")
        result = self.data[self.offset:self.offset + size]
        self.offset += size
        return result

    def uint32(self) -> int:
        return _UINT32.unpack(self.read(_UINT32.size))[0]

    def string(self) -> str:
        return self.read(self.uint32()).decode("utf-8")


def decode(data: bytes,
           path: str = "<bytes>") -> Tuple[str, Dict[str, Any], ParamStore]:
    """Decodes the bytes written by :py:func:`encode`.

    Raises:
        BadMagicError: if the data does not start with ``GTI1``.
        VersionMismatchError: if the layout version is not handled.
        TruncatedCheckpointError: if the data ends prematurely.
    """
    reader = _Reader(data, path)
    magic = reader.read(len(MAGIC))
    if magic != MAGIC:
        raise BadMagicError(f"{path}: bad magic {magic!r}, expected "
                            f"{MAGIC!r}")
    version = reader.uint32()
    if version != VERSION:
        raise VersionMismatchError(f"{path}: checkpoint version {version} is "
                                   f"not handled, expected {VERSION}")
    kind = reader.string()
    hyper = json.loads(reader.string())
    params = ParamStore()
    for _ in range(reader.uint32()):
        name = reader.string()
        shape = tuple(reader.uint32() for _ in range(reader.uint32()))
        count = int(np.prod(shape, dtype=np.int64))
        values = np.frombuffer(reader.read(4 * count), dtype="<f4")
        params.add(name, values.reshape(shape))
    if reader.offset != len(data):
        raise CheckpointError(f"{path}: {len(data) - reader.offset} "
                              "unexpected trailing bytes")
    return kind, hyper, params


def save_checkpoint(model: interface.Model, path: Path) -> None:
    """Writes a model to a file.

    Args:
        model: A goal proposal model, a policy or a Stage-1 bundle
        path (str): Path to the file
    """
    data = encode(*interface.to_arrays(model))
    with open(path, "wb") as stream:
        stream.write(data)


def load_checkpoint(path: Path) -> interface.Model:
    """Reads a model written by :py:func:`save_checkpoint`.

    Raises:
        FileNotFoundError: if the file does not exist.
        CheckpointError: if the file is not a valid checkpoint.
    """
    with open(path, "rb") as stream:
        data = stream.read()
    kind, hyper, params = decode(data, str(path))
    try:
        return interface.from_arrays(kind, hyper, params)
    except (KeyError, TypeError, ValueError) as error:
        raise CheckpointError(
            f"{path}: parameters do not match the {kind} model: {error}"
        ) from error
