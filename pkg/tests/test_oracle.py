"""Full-tableau oracle tests and engine-vs-oracle equivalence."""

import numpy as np
import pytest

from qdcsim import gf2, observables
from qdcsim.circuit import CircuitConfig, default_observables, run_trajectory
from qdcsim.oracle import (
    ConditionedEntropies,
    FullTableau,
    QubitCapExceeded,
    check_complement_symmetry,
    check_ie_symmetry,
    evolve_full,
    oracle_observables,
)
from qdcsim.stabilizer import InitialStateKind


# --- FullTableau basics ---------------------------------------------------------

def test_entropy_region_initial_states():
    full = FullTableau(InitialStateKind.PURE_PRODUCT, 4)
    assert full.entropy_region([]) == 0
    assert full.entropy_region([0, 2]) == 0
    full = FullTableau(InitialStateKind.MAXIMALLY_MIXED, 4)
    assert full.entropy_region([0, 2]) == 2
    full = FullTableau(InitialStateKind.BELL_REFERENCE, 4)
    assert full.entropy_region([0]) == 1           # half of a Bell pair
    assert full.entropy_region([0, 4]) == 0        # whole Bell pair
    assert full.entropy_region(range(8)) == 0
    with pytest.raises(IndexError):
        full.entropy_region([8])


def test_oracle_stays_pure_and_counts_events():
    config = CircuitConfig(L=4, p=0.5, T=8, master_seed=5, record_every=1)
    snaps = evolve_full(config, 0)
    assert len(snaps) == 8
    n_prev = 0
    for _, full in snaps:
        assert full.entropy_region(range(full.n_qubits)) == 0  # global purity
        assert len(full.apparatus) == len(full.environment)
        assert len(full.apparatus) >= n_prev
        n_prev = len(full.apparatus)
    assert n_prev > 0


def test_oracle_no_events_at_p_zero():
    config = CircuitConfig(L=4, p=0.0, T=8, master_seed=5)
    (_, full), = evolve_full(config, 0)
    assert full.apparatus == [] and full.environment == []
    assert full.n_qubits == config.n_system


def test_qubit_cap():
    config = CircuitConfig(L=4, p=1.0, T=8, master_seed=5)
    with pytest.raises(QubitCapExceeded):
        evolve_full(config, 0, qubit_cap=20)


def test_transduced_qubits_reset_pure():
    full = FullTableau(InitialStateKind.MAXIMALLY_MIXED, 4)
    full.transduce_site(1)
    assert full.entropy_region([2]) == 0
    assert full.entropy_region([3]) == 0
    assert full.entropy_region([0]) == 1  # untouched qubit stays mixed


# --- ConditionedEntropies ----------------------------------------------------------

def test_conditioned_entropies_match_entropy_region():
    config = CircuitConfig(L=4, p=0.4, T=16, master_seed=9,
                           initial_state="bell")
    (_, full), = evolve_full(config, 0)
    cond = ConditionedEntropies(full, "apparatus")
    rs = np.random.default_rng(0)
    for _ in range(20):
        region = [int(q) for q in
                  np.nonzero(rs.random(full.n_tracked) < 0.5)[0]]
        assert cond.joint(region) == full.entropy_region(
            region + full.apparatus)
        assert cond.conditional(region) == (
            full.entropy_region(region + full.apparatus)
            - full.entropy_region(full.apparatus))
    with pytest.raises(ValueError):
        ConditionedEntropies(full, "nowhere")


# --- engine vs oracle ------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["product", "mixed", "bell"])
@pytest.mark.parametrize("p", [0.0, 0.5, 1.0])
def test_engine_matches_oracle(kind, p):
    config = CircuitConfig(L=4, p=p, T=16, master_seed=41, record_every=4,
                           initial_state=kind)
    names = default_observables(config) + ["profile:1", "profile:2"]
    for traj in range(5):
        rec = run_trajectory(config, traj, names)
        engine = {s.layer: s.values for s in rec.snapshots}
        oracle = {
            layer: vals
            for layer, vals in evolve_full(
                config, traj,
                on_snapshot=lambda _l, f: oracle_observables(
                    f, names, config.initial_state),
            )
        }
        assert engine == oracle


# --- symmetry checks ----------------------------------------------------------------------

def _final_full(seed, symmetric=True, kind="product"):
    config = CircuitConfig(L=6, p=0.5, T=24, master_seed=seed,
                           symmetric_bricks=symmetric, initial_state=kind)
    (_, full), = evolve_full(config, 0)
    return full


def test_ie_symmetry_holds_for_symmetric_bricks():
    rs = np.random.default_rng(1)
    for seed in range(5):
        report = check_ie_symmetry(_final_full(seed), 50, rs)
        assert report["violations"] == []
        assert report["trials"] == 50


def test_ie_symmetry_negative_control():
    rs = np.random.default_rng(2)
    broken = sum(
        bool(check_ie_symmetry(_final_full(seed, symmetric=False), 50,
                               rs)["violations"])
        for seed in range(10)
    )
    assert broken >= 9


def test_complement_symmetry_holds_on_bell_runs():
    rs = np.random.default_rng(3)
    for seed in range(5):
        report = check_complement_symmetry(
            _final_full(seed, kind="bell"), 50, rs)
        assert report["violations"] == []


def test_complement_symmetry_requires_bell():
    rs = np.random.default_rng(4)
    with pytest.raises(ValueError):
        check_complement_symmetry(_final_full(0), 10, rs)


def test_conditional_entropy_nonnegative_on_site_regions():
    rs = np.random.default_rng(5)
    for seed in range(5):
        full = _final_full(seed, kind="mixed")
        cond = ConditionedEntropies(full, "apparatus")
        for _ in range(30):
            sites = np.nonzero(rs.random(6) < 0.5)[0]
            region = observables.region_sites(sites)
            assert cond.conditional(region) >= 0
