# Copyright (c) 2020 pygti developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
import unittest
import numpy as np
from pygti.core import ParamStore, grad_check


def _quadratic(params):
    x = params["x"]
    grads = ParamStore(np.float64)
    grads.add("x", 2 * x)
    return float(np.sum(x * x)), grads


class TestGradCheck(unittest.TestCase):
    def test_exact(self):
        params = ParamStore()
        params.add("x", [0.5, -1.0, 2.0])
        self.assertLess(grad_check(params, _quadratic), 1e-8)

    def test_wrong_gradient(self):
        def function(params):
            loss, grads = _quadratic(params)
            grads["x"] = 3 * params["x"]
            return loss, grads

        params = ParamStore()
        params.add("x", [0.5, -1.0, 2.0])
        self.assertGreater(grad_check(params, function), 0.3)

    def test_store_untouched(self):
        params = ParamStore()
        params.add("x", [0.5, -1.0, 2.0])
        checksum = params.checksum()
        grad_check(params, _quadratic)
        self.assertEqual(params.checksum(), checksum)

    def test_float64_copy(self):
        seen = []

        def function(params):
            seen.append(params["x"].dtype)
            return _quadratic(params)

        params = ParamStore()
        params.add("x", [1.0])
        grad_check(params, function)
        self.assertTrue(all(item == np.float64 for item in seen))

    def test_max_entries(self):
        calls = []

        def function(params):
            calls.append(1)
            return _quadratic(params)

        params = ParamStore()
        params.add("x", np.linspace(-1, 1, 50))
        grad_check(params, function, max_entries=5)
        self.assertEqual(len(calls), 1 + 2 * 5)

    def test_errors(self):
        def nan(params):
            loss, grads = _quadratic(params)
            return float("nan"), grads

        def wrong_layout(params):
            grads = ParamStore(np.float64)
            grads.add("y", np.zeros(1))
            return 0.0, grads

        params = ParamStore()
        params.add("x", [1.0])
        with self.assertRaises(FloatingPointError):
            grad_check(params, nan)
        with self.assertRaises(ValueError):
            grad_check(params, wrong_layout)


if __name__ == "__main__":
    unittest.main()
