import numpy as np
import pytest

from eacomm import strategies as S
from eacomm.optimizer import (
    ANSATZ_TAGS,
    OptimizerConfig,
    gradient_check,
    make_ansatz,
    maximize,
    objective,
    objective_and_grad,
)
from eacomm.protocol import (
    AdaptiveEAClassicalStrategy,
    NonAdaptiveEAClassicalStrategy,
    QuantumMessageStrategy,
    behavior_of,
)
from eacomm.tasks import evaluate, facet_functional, mesd_functional, rac_functional

CASES = [
    ("unassisted-classical-2", rac_functional()),
    ("unassisted-classical-3", rac_functional()),
    ("qubit-projective", facet_functional()),
    ("qubit-povm", facet_functional()),
    ("ea-bit-adaptive", facet_functional()),
    ("ea-bit-nonadaptive", facet_functional()),
    ("ea-trit-adaptive", rac_functional()),
    ("ea-trit-nonadaptive", rac_functional()),
    ("ea-bit-nonadaptive", rac_functional()),
] + [(f"quantum-message-{c}", mesd_functional(4))
     for c in ("joint", "product", "seq_M_then_B", "seq_B_then_M")]


def _completeness(s):
    povms = []
    if isinstance(s, AdaptiveEAClassicalStrategy):
        povms = list(s.alice) + [p for row in s.bob for p in row]
    elif isinstance(s, NonAdaptiveEAClassicalStrategy):
        povms = list(s.alice) + list(s.bob_base)
    elif isinstance(s, QuantumMessageStrategy):
        povms = list(s.joint_povms)
    else:
        povms = [s.povm(y) for y in range(len(s.povms))]
    return max(np.abs(sum(p.elements) - np.eye(p.dim)).max() for p in povms)


def test_all_tags_are_constructible():
    for tag in ANSATZ_TAGS:
        tag = tag.replace("-D", "-2")
        f = mesd_functional(4) if tag.startswith("quantum") else rac_functional()
        if tag.startswith("qubit"):
            f = facet_functional()
        assert make_ansatz(tag, f).n_params > 0


@pytest.mark.parametrize("tag, f", CASES, ids=[f"{t}-{f.name}" for t, f in CASES])
def test_decode_is_valid_and_consistent(tag, f):
    rng = np.random.default_rng(0)
    ansatz = make_ansatz(tag, f)
    n = 1000 if tag.startswith("qubit") else 40
    worst = 0.0
    for _ in range(n):
        x = rng.uniform(-np.pi, np.pi, ansatz.n_params)
        tables = ansatz.best_tables_from_params(f, x)
        s = ansatz.decode(x, tables)
        worst = max(worst, _completeness(s))
        val = objective(f, ansatz, x, tables)
        assert evaluate(f, behavior_of(s)) == pytest.approx(val, abs=1e-10)
    assert worst < 1e-12


def test_decode_completeness_on_1000_vectors():
    rng = np.random.default_rng(1)
    f = rac_functional()
    ansatz = make_ansatz("ea-trit-adaptive", f)
    worst = max(_completeness(ansatz.decode(rng.normal(scale=3, size=ansatz.n_params),
                                            ansatz.identity_tables() if ansatz.has_table() else None))
                for _ in range(1000))
    assert worst < 1e-12


@pytest.mark.parametrize("tag, f", CASES, ids=[f"{t}-{f.name}" for t, f in CASES])
def test_gradient_matches_finite_differences(tag, f):
    rng = np.random.default_rng(2)
    ansatz = make_ansatz(tag, f)
    for _ in range(2):
        x = rng.uniform(-np.pi, np.pi, ansatz.n_params)
        assert gradient_check(ansatz, f, x) < 1e-6


@pytest.mark.parametrize("name, tag, f", [
    ("facet-qubit-povm", "qubit-povm", facet_functional()),
    ("facet-qubit-projective", "qubit-projective", facet_functional()),
    ("adaptive-ea-trit-rac", "ea-trit-adaptive", rac_functional()),
    ("chsh-ea-bit-rac", "ea-bit-nonadaptive", rac_functional()),
    ("facet-ea-bit-povm", "ea-bit-adaptive", facet_functional()),
])
def test_encode_decode_reproduces_known_strategy(name, tag, f):
    s = S.STRATEGIES[name]()
    ansatz = make_ansatz(tag, f)
    x = ansatz.encode(s)
    target = evaluate(f, behavior_of(s))
    tables = ansatz.best_tables_from_params(f, x)
    assert objective(f, ansatz, x, tables) == pytest.approx(target, abs=1e-9)
    _, g = objective_and_grad(f, ansatz, x, tables)
    assert np.all(np.isfinite(g))


def test_seeded_runs_are_reproducible():
    f = facet_functional()
    ansatz = make_ansatz("qubit-projective", f)
    cfg = OptimizerConfig(restarts=4, seed=11)
    a, b = maximize(f, ansatz, cfg), maximize(f, ansatz, cfg)
    assert a.value == b.value
    assert np.array_equal(a.params, b.params)
    assert [t.value for t in a.trace] == [t.value for t in b.trace]


def test_optimizer_respects_classical_bound():
    f = rac_functional()
    res = maximize(f, make_ansatz("unassisted-classical-2", f), OptimizerConfig(restarts=5))
    assert res.value == pytest.approx(0.75, abs=1e-9)


def test_result_metadata():
    f = facet_functional()
    res = maximize(f, make_ansatz("qubit-projective", f), OptimizerConfig(restarts=2, seed=3))
    assert res.metadata["method"].startswith("L-BFGS-B")
    assert res.metadata["restarts"] == 2 and res.metadata["iterations"] > 0
    assert evaluate(f, behavior_of(res.strategy)) == pytest.approx(res.value, abs=1e-9)


def test_bad_configuration():
    with pytest.raises(ValueError):
        OptimizerConfig(restarts=0)
    with pytest.raises(ValueError):
        make_ansatz("qubit-cubic", facet_functional())
