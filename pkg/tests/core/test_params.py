# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import pickle
import unittest
import numpy as np
from pygti.core import ParamStore


class TestParamStore(unittest.TestCase):
    @staticmethod
    def _store():
        store = ParamStore()
        store.add("w0", np.arange(6).reshape(2, 3))
        store.add("b0", np.ones(3))
        return store

    def test_add(self):
        store = self._store()
        self.assertEqual(len(store), 2)
        self.assertEqual(list(store), ["w0", "b0"])
        self.assertEqual(store["w0"].dtype, np.float32)
        self.assertEqual(store.size(), 9)
        self.assertEqual(store.shapes(), {"w0": (2, 3), "b0": (3, )})
        self.assertIn("b0", store)
        with self.assertRaises(ValueError):
            store.add("w0", np.zeros(2))
        with self.assertRaises(ValueError):
            store.add("scalar", np.float32(1))
        with self.assertRaises(ValueError):
            store.add("empty", np.zeros((0, 2)))
        with self.assertRaises(KeyError):
            store["w1"]
        with self.assertRaises(ValueError):
            ParamStore(np.int32)

    def test_add_copies(self):
        values = np.zeros(3)
        store = ParamStore()
        store.add("b", values)
        values[0] = 1
        self.assertEqual(store["b"][0], 0)

    def test_setitem(self):
        store = self._store()
        store["b0"] = np.array([1.0, 2.0, 3.0])
        np.testing.assert_array_equal(store["b0"], [1, 2, 3])
        with self.assertRaises(ValueError):
            store["b0"] = np.zeros(4)

    def test_copy(self):
        store = self._store()
        other = store.copy()
        self.assertEqual(store, other)
        other["b0"] = np.zeros(3)
        self.assertNotEqual(store, other)
        self.assertEqual(store.astype(np.float64)["w0"].dtype, np.float64)
        zeros = store.zeros_like(np.float64)
        self.assertEqual(zeros.shapes(), store.shapes())
        self.assertEqual(zeros.size(), 9)
        self.assertTrue(np.all(zeros["w0"] == 0))

    def test_layout(self):
        store = self._store()
        store.check_layout(store.zeros_like())
        other = ParamStore()
        other.add("w0", np.zeros((3, 2)))
        other.add("b0", np.zeros(3))
        with self.assertRaises(ValueError):
            store.check_layout(other)
        with self.assertRaises(ValueError):
            store.check_layout(ParamStore())

    def test_prefix(self):
        store = ParamStore()
        store.update(self._store(), "encoder.")
        store.update(self._store(), "decoder.")
        self.assertEqual(store.names("encoder."), ("encoder.w0", "encoder.b0"))
        subset = store.subset("decoder.")
        self.assertEqual(list(subset), ["w0", "b0"])
        self.assertEqual(subset, self._store())
        self.assertEqual(list(store.subset("decoder.", strip=False)),
                         ["decoder.w0", "decoder.b0"])

    def test_checksum(self):
        store = self._store()
        self.assertEqual(store.checksum(), self._store().checksum())
        store["b0"] = np.zeros(3)
        self.assertNotEqual(store.checksum(), self._store().checksum())

    def test_pickle(self):
        store = self._store()
        other = pickle.loads(pickle.dumps(store))
        self.assertEqual(store, other)
        self.assertEqual(other.dtype, np.float32)

    def test_repr(self):
        self.assertIn("w0: (2, 3) float32", repr(self._store()))


if __name__ == "__main__":
    unittest.main()
