"""Compiled kernel vs pure-Python loop: the traces must agree bit for bit."""

import math

import numpy as np
import pytest

from welfareopt import HAVE_COMPILED
from welfareopt.solver import Box, FixedStep, InverseSqrtStep, maximize_lowest_k
from welfareopt.wireless import WirelessUtilityOracle, generate_scenario, parse_qos

needs_kernel = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled kernel not built"
)


@needs_kernel
@pytest.mark.parametrize("qos_spec", ["log", "neginv:2", "log1p", "id"])
@pytest.mark.parametrize("k", [1, 4, 10])
def test_traces_identical_across_backends(qos_spec, k):
    model = generate_scenario(10, 123, parse_qos(qos_spec))
    oracle = WirelessUtilityOracle(model)
    box = Box(np.full(10, math.log(0.05)), np.zeros(10))
    for schedule in (FixedStep(5 / math.sqrt(400)), InverseSqrtStep(0.8)):
        fast = maximize_lowest_k(k, oracle, box, np.zeros(10), 400, schedule,
                                 use_kernel=True)
        slow = maximize_lowest_k(k, oracle, box, np.zeros(10), 400, schedule,
                                 use_kernel=False)
        assert fast.backend == "compiled" and slow.backend == "python"
        np.testing.assert_array_equal(fast.thetas, slow.thetas)
        np.testing.assert_array_equal(fast.welfare, slow.welfare)
        np.testing.assert_array_equal(fast.weights, slow.weights)
        np.testing.assert_array_equal(fast.grad_norms, slow.grad_norms)
        np.testing.assert_array_equal(fast.ergodic, slow.ergodic)
        assert fast.best_index == slow.best_index
        assert fast.best_value == slow.best_value


@needs_kernel
def test_kernel_selected_automatically_for_wireless_runs():
    model = generate_scenario(3, 1)
    oracle = WirelessUtilityOracle(model)
    box = Box(np.full(3, -2.0), np.zeros(3))
    run = maximize_lowest_k(1, oracle, box, np.zeros(3), 20, FixedStep(0.1))
    assert run.backend == "compiled"


@needs_kernel
def test_unbounded_box_falls_back_to_python():
    model = generate_scenario(3, 1)
    oracle = WirelessUtilityOracle(model)
    box = Box(np.full(3, -np.inf), np.zeros(3))
    run = maximize_lowest_k(1, oracle, box, np.zeros(3), 20, FixedStep(0.1))
    assert run.backend == "python"


def test_forcing_python_backend_always_works():
    model = generate_scenario(2, 4)
    oracle = WirelessUtilityOracle(model)
    box = Box(np.full(2, -2.0), np.zeros(2))
    run = maximize_lowest_k(1, oracle, box, np.zeros(2), 10, FixedStep(0.1),
                            use_kernel=False)
    assert run.backend == "python"
