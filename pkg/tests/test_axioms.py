"""The four closure-property probes and the suite driver."""

import numpy as np
import pytest

from mapgroups.axioms import (
    probe_cutoff_bound,
    probe_extend_by_zero,
    probe_pullback_functoriality,
    probe_superposition_continuity,
    run_axiom_suite,
)


def test_superposition_probe_first_order():
    check = probe_superposition_continuity(np.random.default_rng(0))
    assert check.check_id == "axiom-PF"
    assert check.passed, check.measures
    assert abs(check.measures["slope"] - 1.0) <= 0.2


def test_pullback_probe_functorial():
    check = probe_pullback_functoriality(np.random.default_rng(1))
    assert check.check_id == "axiom-PB"
    assert check.passed, check.measures
    assert check.measures["residual"] <= 1e-9


def test_zero_extension_probe_exact():
    check = probe_extend_by_zero(np.random.default_rng(2))
    assert check.check_id == "axiom-GL"
    assert check.passed
    assert check.measures == {"round_trip_exact": True, "zero_outside": True}


def test_cutoff_bound_probe_grid_stable():
    check = probe_cutoff_bound(np.random.default_rng(3), trials=40)
    assert check.check_id == "axiom-MU"
    assert check.passed, check.measures
    assert check.measures["bound_coarse"] > 0.0


def test_suite_runs_all_four_and_is_reproducible():
    def rng_for(name):
        seed = abs(hash(name)) % (2**32)
        return np.random.default_rng(seed)

    first = run_axiom_suite(rng_for)
    second = run_axiom_suite(rng_for)
    assert [c.check_id for c in first] == [
        "axiom-PF",
        "axiom-PB",
        "axiom-GL",
        "axiom-MU",
    ]
    assert all(c.passed for c in first), [c for c in first if not c.passed]
    for a, b in zip(first, second):
        assert a.measures == b.measures


def test_suite_tolerance_overrides_can_force_failure():
    def rng_for(name):
        return np.random.default_rng(4)

    checks = run_axiom_suite(rng_for, tolerances={"axiom-MU": 0.0})
    by_id = {c.check_id: c for c in checks}
    assert not by_id["axiom-MU"].passed
    assert by_id["axiom-GL"].passed
