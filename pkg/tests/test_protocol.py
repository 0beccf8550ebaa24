import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eacomm.linalg import DensityState, InvariantError, Povm, random_povm
from eacomm.protocol import (
    AdaptiveEAClassicalStrategy,
    Behavior,
    NonAdaptiveEAClassicalStrategy,
    behavior_of,
    born_behavior,
    check_nonadaptive,
    lift_to_adaptive,
)
from eacomm.strategies import simulate_qubit_pm

from gen import random_adaptive, random_nonadaptive, random_qubit_pm
from oracles import born_adaptive, born_nonadaptive, pauli_vector

seeds = st.integers(0, 2**32 - 1)


def _explicit(s):
    return [[e for e in a.elements] for a in s.alice]


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_adaptive_behavior_matches_oracle(seed):
    s = random_adaptive(np.random.default_rng(seed), X=3, Y=2, D=3, B=2)
    bob = [[list(p.elements) for p in row] for row in s.bob]
    ref = born_adaptive(s.shared_state.matrix, _explicit(s), bob)
    assert np.abs(behavior_of(s).p - ref).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_nonadaptive_behavior_matches_oracle(seed):
    s = random_nonadaptive(np.random.default_rng(seed))
    base = [list(p.elements) for p in s.bob_base]
    ref = born_nonadaptive(s.shared_state.matrix, _explicit(s), base, s.postprocess, s.n_outputs)
    assert np.abs(behavior_of(s).p - ref).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_lift_preserves_behavior_and_commutes(seed):
    s = random_nonadaptive(np.random.default_rng(seed), X=4, Y=2, D=3, B=3, nb=4)
    lifted = lift_to_adaptive(s)
    assert np.abs(behavior_of(lifted).p - behavior_of(s).p).max() < 1e-12


@settings(max_examples=25, deadline=None)
@given(seeds)
def test_lift_of_projective_base_commutes(seed):
    s = random_nonadaptive(np.random.default_rng(seed), X=3, Y=2, D=3, B=2, db=4, nb=4,
                           projective=True)
    rep = check_nonadaptive(lift_to_adaptive(s))
    assert rep.nonadaptive and rep.max_commutator < 1e-10


def test_generic_adaptive_strategy_is_flagged():
    s = random_adaptive(np.random.default_rng(3))
    rep = check_nonadaptive(s)
    assert not rep.nonadaptive
    assert rep.verdict == "ADAPTIVE"
    assert rep.max_commutator > 1e-3
    assert rep.worst is not None


@settings(max_examples=30, deadline=None)
@given(seeds, st.booleans(), st.booleans())
def test_qubit_simulation_reproduces_born_rule(seed, projective, mixed):
    rng = np.random.default_rng(seed)
    pm = random_qubit_pm(rng, X=4, Y=2, B=3, projective=projective, mixed=mixed)
    direct = born_behavior([(np.eye(2) + pauli_vector(n)) / 2 for n in pm.states],
                           [pm.povm(y) for y in range(2)])
    sim = behavior_of(simulate_qubit_pm(pm))
    assert np.abs(sim.p - direct.p).max() < 1e-10
    assert np.abs(pm.behavior().p - direct.p).max() < 1e-12
    if projective:
        assert check_nonadaptive(simulate_qubit_pm(pm), 1e-10).nonadaptive


def test_behavior_validation():
    with pytest.raises(InvariantError):
        Behavior(np.full((2, 2, 2), 0.6))
    with pytest.raises(InvariantError):
        Behavior(np.array([[[1.2, -0.2]]]))
    b = Behavior(np.full((2, 1, 2), 0.5))
    assert b.dims == (2, 1, 2)


def test_strategy_shape_errors():
    rng = np.random.default_rng(0)
    rho = DensityState(np.eye(4) / 4, (2, 2))
    a = random_povm(2, 2, rng)
    with pytest.raises(InvariantError):
        NonAdaptiveEAClassicalStrategy(rho, (a,), (random_povm(2, 2, rng),), np.zeros((1, 3, 2), int))
    with pytest.raises(InvariantError):
        AdaptiveEAClassicalStrategy(rho, (a, random_povm(2, 3, rng)),
                                    ((random_povm(2, 2, rng),) * 2,))
    with pytest.raises(InvariantError):
        AdaptiveEAClassicalStrategy(rho, (Povm((np.eye(3),)),), ((random_povm(2, 2, rng),),))


def test_classical_message_is_a_special_case():
    # product state and deterministic Alice: behavior is a deterministic classical strategy
    rho = DensityState(np.kron(np.diag([1.0, 0]), np.diag([1.0, 0])), (2, 2))
    send = lambda m: Povm(tuple(np.eye(2) if k == m else np.zeros((2, 2)) for k in range(2)))
    read = lambda b: Povm(tuple(np.eye(2) if k == b else np.zeros((2, 2)) for k in range(2)))
    s = AdaptiveEAClassicalStrategy(rho, (send(0), send(1)), ((read(0), read(1)),), 2)
    assert np.allclose(behavior_of(s).p[:, 0, :], np.eye(2))
