# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Parameter stores
================
"""
from typing import Dict, Iterator, Optional, Tuple
import collections
import hashlib
import numpy as np


class ParamStore:
    """Ordered collection of named arrays holding the parameters of one or
    more networks.

    Names are unique, shapes are fixed at creation and iteration follows the
    insertion order, so two stores built the same way serialize to the same
    bytes.
    """
    def __init__(self, dtype: Optional[np.dtype] = None):
        """
        Initialize an empty store.

        Args:
            dtype (numpy.dtype, optional): Data type of the arrays handled.
                Defaults to ``float32``.
        """
        dtype = np.dtype(dtype or np.float32)
        if dtype not in (np.dtype("float32"), np.dtype("float64")):
            raise ValueError(f"dtype {dtype} not handled by the object")
        self.dtype = dtype
        self._entries = collections.OrderedDict(
        )  # type: Dict[str, np.ndarray]

    def add(self, name: str, array: np.ndarray) -> np.ndarray:
        """Registers a new parameter.

        Args:
            name (str): Unique name of the parameter
            array (numpy.ndarray): Initial value

        Return:
            numpy.ndarray: the array stored (a copy in the store data type)
        """
        if name in self._entries:
            raise ValueError(f"parameter {name!r} already defined")
        array = np.array(array, dtype=self.dtype, copy=True)
        if array.ndim == 0 or any(item < 1 for item in array.shape):
            raise ValueError(
                f"parameter {name!r} has an invalid shape {array.shape}")
        self._entries[name] = array
        return array

    def __getitem__(self, name: str) -> np.ndarray:
        try:
            return self._entries[name]
        except KeyError:
            raise KeyError(f"unknown parameter {name!r}") from None

    def __setitem__(self, name: str, value: np.ndarray) -> None:
        target = self[name]
        value = np.asarray(value)
        if value.shape != target.shape:
            raise ValueError(f"parameter {name!r}: shape {value.shape} does "
                             f"not match {target.shape}")
        target[...] = value

    def __contains__(self, name: str) -> bool:
        return name in self._entries

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def items(self) -> Iterator[Tuple[str, np.ndarray]]:
        """Iterates over the (name, array) pairs in insertion order"""
        return iter(self._entries.items())

    def names(self, prefix: str = "") -> Tuple[str, ...]:
        """Gets the names of the parameters starting with ``prefix``"""
        return tuple(item for item in self._entries if item.startswith(prefix))

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        """Gets the shape of every parameter"""
        return collections.OrderedDict(
            (name, array.shape) for name, array in self._entries.items())

    def size(self) -> int:
        """Gets the total number of scalar parameters"""
        return sum(array.size for array in self._entries.values())

    def copy(self) -> "ParamStore":
        """Returns a deep copy of this store"""
        return self.astype(self.dtype)

    def astype(self, dtype: np.dtype) -> "ParamStore":
        """Returns a deep copy of this store converted to ``dtype``"""
        result = ParamStore(dtype)
        for name, array in self._entries.items():
            result.add(name, array)
        return result

    def zeros_like(self, dtype: Optional[np.dtype] = None) -> "ParamStore":
        """Returns a store with the same layout filled with zeros"""
        result = ParamStore(dtype or self.dtype)
        for name, array in self._entries.items():
            result.add(name, np.zeros(array.shape))
        return result

    def check_layout(self, other: "ParamStore") -> None:
        """Checks that ``other`` has the same names and shapes.

        Raises:
            ValueError: if the layouts differ.
        """
        if list(self._entries) != list(other):
            raise ValueError("parameter names differ: "
                             f"{list(self._entries)} != {list(other)}")
        for name, array in self._entries.items():
            if array.shape != other[name].shape:
                raise ValueError(f"parameter {name!r}: shape "
                                 f"{other[name].shape} does not match "
                                 f"{array.shape}")

    def update(self, other: "ParamStore", prefix: str = "") -> None:
        """Adds the parameters of ``other`` with names prefixed by
        ``prefix``"""
        for name, array in other.items():
            self.add(prefix + name, array)

    def subset(self, prefix: str, strip: bool = True) -> "ParamStore":
        """Extracts the parameters whose name starts with ``prefix``.

        Args:
            prefix (str): Prefix selecting the parameters
            strip (bool, optional): Remove the prefix from the names of the
                extracted parameters. Defaults to ``True``.
        """
        result = ParamStore(self.dtype)
        for name in self.names(prefix):
            result.add(name[len(prefix):] if strip else name,
                       self._entries[name])
        return result

    def checksum(self) -> str:
        """Digest of names, shapes and values, used to verify that a store
        was left untouched"""
        digest = hashlib.sha1()
        for name, array in self._entries.items():
            digest.update(name.encode("utf-8"))
            digest.update(np.asarray(array.shape, dtype="<u4").tobytes())
            digest.update(np.ascontiguousarray(array).tobytes())
        return digest.hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParamStore):
            return NotImplemented
        if list(self._entries) != list(other):
            return False
        return all(
            np.array_equal(array, other[name])
            for name, array in self._entries.items())

    def __repr__(self) -> str:
        result = [
            "<%s.%s>" % (self.__class__.__module__, self.__class__.__name__)
        ]
        for name, array in self._entries.items():
            result.append(f"  {name}: {array.shape} {array.dtype}")
        return "\n".join(result)

    def __getstate__(self):
        return (str(self.dtype), list(self._entries.items()))

    def __setstate__(self, state):
        if not isinstance(state, tuple) or len(state) != 2:
            raise ValueError("invalid state")
        self.dtype = np.dtype(state[0])
        self._entries = collections.OrderedDict(state[1])
