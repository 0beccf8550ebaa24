"""Random strategy generators shared by tests."""
import numpy as np

from eacomm.linalg import random_mixed_state, random_povm, random_projective, random_pure_state
from eacomm.protocol import (
    AdaptiveEAClassicalStrategy,
    NonAdaptiveEAClassicalStrategy,
    QubitPrepareMeasure,
)
from eacomm.linalg import bloch_of


def random_nonadaptive(rng, X=3, Y=2, D=2, B=2, da=2, db=2, nb=3, mixed=True, projective=False):
    d = da * db
    state = (random_mixed_state(d, rng, (da, db)) if mixed else random_pure_state(d, rng, (da, db)))
    alice = tuple(random_povm(da, D, rng) for _ in range(X))
    make = random_projective if projective else random_povm
    base = tuple(make(db, nb, rng) for _ in range(Y))
    g = rng.integers(0, B, size=(Y, D, nb))
    g[0, 0, 0] = B - 1  # all outputs appear at least once somewhere
    return NonAdaptiveEAClassicalStrategy(state, alice, base, g, n_outputs=B)


def random_adaptive(rng, X=3, Y=2, D=2, B=2, da=2, db=2):
    state = random_mixed_state(da * db, rng, (da, db))
    alice = tuple(random_povm(da, D, rng) for _ in range(X))
    bob = tuple(tuple(random_povm(db, B, rng) for _ in range(D)) for _ in range(Y))
    return AdaptiveEAClassicalStrategy(state, alice, bob, B)


def random_unit(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_qubit_pm(rng, X=3, Y=2, B=3, projective=False, mixed=False):
    states = np.array([random_unit(rng) * (rng.uniform() if mixed else 1.0) for _ in range(X)])
    povms = []
    for _ in range(Y):
        p = random_projective(2, 2, rng) if projective else random_povm(2, B, rng)
        povms.append(tuple(bloch_of(e) for e in p.elements))
    return QubitPrepareMeasure(states, tuple(povms))
