"""Acceptance gate: one printed PASS/FAIL line per criterion.

Every sub-item of a criterion is evaluated before asserting, so a failing
item never hides the others.  Run directly with ``python tests/test_acceptance.py``
or through pytest (lines are repeated in the terminal summary).
"""
import time

import numpy as np

from eacomm import strategies as S
from eacomm.linalg import is_psd
from eacomm.npa import SCENARIOS, Algebra, solve_bound
from eacomm.optimizer import OptimizerConfig, gradient_check, make_ansatz, maximize
from eacomm.protocol import (
    AdaptiveEAClassicalStrategy,
    NonAdaptiveEAClassicalStrategy,
    QuantumMessageStrategy,
    behavior_of,
    born_behavior,
    check_nonadaptive,
    lift_to_adaptive,
)
from eacomm.tasks import (
    classical_bound,
    evaluate,
    facet_certificate,
    facet_functional,
    mesd_functional,
    mesd_rate,
    rac_functional,
)

from conftest import ACCEPTANCE_LINES
from gen import random_nonadaptive, random_qubit_pm
from oracles import born_nonadaptive, pauli_vector

SQ2, SQ5 = np.sqrt(2), np.sqrt(5)


def _record(num, title, items, note=""):
    """``items`` is a list of (label, ok, detail); prints one line and returns overall status."""
    ok = all(i[1] for i in items)
    failed = [f"{label} ({detail})" for label, good, detail in items if not good]
    detail = "; ".join(f"{label}: {d}" for label, _, d in items)
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} -- {detail}"
    if failed:
        line += " || failing: " + ", ".join(failed)
    if note:
        line += " || note: " + note
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok, failed


def _close(label, got, want, tol):
    return label, abs(got - want) <= tol, f"{got:.10f} vs {want:.10f} (tol {tol:g})"


def test_criterion_1_exact_strategy_values():
    t0 = time.perf_counter()
    rac, fac = rac_functional(), facet_functional()
    v = lambda f, s: evaluate(f, behavior_of(s))
    items = [
        _close("EA-bit RAC", v(rac, S.chsh_ea_bit_rac()), (1 + 1 / SQ2) / 2, 1e-9),
        _close("trit theta=pi/4", v(rac, S.na_ea_trit_rac(np.pi / 4)), (5 + 3 * SQ2 / 2) / 8, 1e-9),
        _close("tilted trit", v(rac, S.na_ea_trit_rac()), (5 + SQ5) / 8, 1e-9),
        _close("adaptive trit", v(rac, S.adaptive_ea_trit_rac()), (3 + 1 / SQ2) / 4, 1e-9),
        _close("facet POVM", v(fac, S.facet_qubit_povm_strategy()), 2.25, 1e-9),
        _close("facet projective", v(fac, S.facet_qubit_projective_strategy()), SQ5, 1e-9),
        _close("stochastic dense coding", v(rac, S.stochastic_dense_coding_rac()), 1.0, 1e-9),
        _close("dense coding mesd", mesd_rate(behavior_of(S.dense_coding_strategy(2))), 1.0, 1e-9),
    ]
    dt = time.perf_counter() - t0
    items.append(("runtime", dt < 1.0, f"{dt:.3f}s < 1s"))
    ok, failed = _record(1, "exact strategy values", items)
    assert ok, failed


def test_criterion_2_classical_oracles():
    t0 = time.perf_counter()
    cert = facet_certificate(facet_functional(), 2)
    items = [
        _close("RAC bit", classical_bound(rac_functional(), 2).value, 0.75, 1e-12),
        _close("RAC trit", classical_bound(rac_functional(), 3).value, 0.875, 1e-12),
        _close("facet bit", classical_bound(facet_functional(), 2).value, 2.0, 1e-12),
        ("facet tightness", cert.is_facet,
         f"{cert.n_tight} tight vertices, face dim {cert.face_dim}, polytope dim {cert.polytope_dim}"),
    ]
    dt = time.perf_counter() - t0
    items.append(("runtime", dt < 10.0, f"{dt:.2f}s < 10s"))
    ok, failed = _record(2, "brute-force classical bounds", items)
    assert ok, failed


def test_criterion_3_qubit_simulation():
    rng = np.random.default_rng(2024)
    worst, proj_worst, nonproj_max = 0.0, 0.0, 0.0
    for k in range(200):
        projective = k % 2 == 0
        pm = random_qubit_pm(rng, X=4, Y=2, B=3, projective=projective, mixed=k % 4 == 1)
        direct = born_behavior([(np.eye(2) + pauli_vector(n)) / 2 for n in pm.states],
                               [pm.povm(y) for y in range(2)])
        ea = S.simulate_qubit_pm(pm)
        worst = max(worst, float(np.abs(behavior_of(ea).p - direct.p).max()))
        comm = check_nonadaptive(ea, 1e-10).max_commutator
        if projective:
            proj_worst = max(proj_worst, comm)
        else:
            nonproj_max = max(nonproj_max, comm)
    items = [
        ("behavior sup error", worst < 1e-10, f"{worst:.2e} < 1e-10 over 200 instances"),
        ("projective commute", proj_worst < 1e-10, f"max commutator {proj_worst:.2e} < 1e-10"),
        ("non-projective adaptive", nonproj_max > 1e-3, f"max commutator {nonproj_max:.3f} > 1e-3"),
    ]
    ok, failed = _record(3, "EA-bit simulation of qubit prepare-and-measure", items)
    assert ok, failed


def test_criterion_4_separable_bound():
    rng = np.random.default_rng(7)
    classes = ("product", "seq_M_then_B", "seq_B_then_M")
    best = 0.0
    for i in range(1000):
        s = S.sample_quantum_message(rng, classes[i % 3], structured=bool(i % 2))
        best = max(best, mesd_rate(behavior_of(s)))
    joint = mesd_rate(behavior_of(S.dense_coding_strategy(2)))
    items = [
        ("separable samples", best <= 0.5 + 1e-9, f"max {best:.6f} <= 0.5 over 1000 samples"),
        _close("joint dense coding", joint, 1.0, 1e-9),
    ]
    ok, failed = _record(4, "separable measurements limited to D/X", items)
    assert ok, failed


def test_criterion_5_optimizer_rediscovery():
    t0 = time.perf_counter()
    cfg = OptimizerConfig(restarts=50, seed=0)
    rac, fac = rac_functional(), facet_functional()
    povm = maximize(fac, make_ansatz("qubit-povm", fac), cfg).value
    proj = maximize(fac, make_ansatz("qubit-projective", fac), cfg).value
    trit = maximize(rac, make_ansatz("ea-trit-adaptive", rac), cfg).value
    dt = time.perf_counter() - t0
    items = [
        ("facet qubit-POVM", povm >= 2.25 - 1e-4, f"{povm:.10f} >= 2.25 - 1e-4"),
        ("facet qubit-projective", SQ5 - 1e-4 <= proj <= SQ5 + 1e-6,
         f"{proj:.10f} in [sqrt5 - 1e-4, sqrt5 + 1e-6]"),
        ("RAC EA-trit adaptive", trit >= 0.9268 - 1e-3, f"{trit:.10f} >= 0.9268 - 1e-3"),
        ("runtime", dt < 300, f"{dt:.1f}s < 300s"),
    ]
    ok, failed = _record(5, "optimizer rediscovery (50 restarts, seed 0)", items)
    assert ok, failed


def _npa_item(label, f, scen, level, nonadaptive, symmetrize, want, tol, max_seconds):
    t0 = time.perf_counter()
    try:
        res = solve_bound(f, scen, level, nonadaptive, symmetrize, tol=1e-7)
    except Exception as exc:  # report, do not hide
        return label, False, f"solver error: {exc}"
    dt = time.perf_counter() - t0
    good = abs(res.upper - want) <= tol and dt < max_seconds and res.relative_gap <= 1e-7
    return label, good, (f"{res.upper:.7f} vs {want:.7f} (tol {tol:g}), "
                         f"duality gap {res.relative_gap:.1e}, {dt:.1f}s < {max_seconds:g}s")


def test_criterion_6_npa_bounds():
    rac, fac = rac_functional(), facet_functional()
    items = [
        _npa_item("CHSH L1", None, "chsh", 1, False, False, 2 * SQ2, 1e-6, 5),
        _npa_item("facet EA-bit adaptive L2", fac, "facet-bit", 2, False, False, 2.25, 1e-3, 1800),
        _npa_item("facet EA-bit non-adaptive L2", fac, "facet-bit", 2, True, False, SQ5, 1e-3, 1800),
        _npa_item("RAC EA-trit non-adaptive L2 sym", rac, "rac-trit", 2, True, True, 0.9082, 1e-3, 1800),
    ]
    extra = solve_bound(fac, "facet-bit", "2+AAB").upper
    note = (f"not gating: level 2 plus Alice-Alice-Bob words gives {extra:.7f} for the facet "
            "adaptive row")
    ok, failed = _record(6, "NPA bounds with the built-in solver", items, note)
    assert ok, failed


def _povm_list(s):
    if isinstance(s, AdaptiveEAClassicalStrategy):
        return list(s.alice) + [p for row in s.bob for p in row]
    if isinstance(s, NonAdaptiveEAClassicalStrategy):
        return list(s.alice) + list(s.bob_base)
    if isinstance(s, QuantumMessageStrategy):
        return list(s.joint_povms)
    return [s.povm(y) for y in range(len(s.povms))]


def test_criterion_7_structural_properties():
    # invariants on every constructor
    inv = 0.0
    for build in S.STRATEGIES.values():
        s = build()
        for p in _povm_list(s):
            inv = max(inv, float(np.abs(sum(p.elements) - np.eye(p.dim)).max()))
            assert all(is_psd(e) for e in p.elements)
        if hasattr(s, "shared_state"):
            rho = s.shared_state.matrix
            inv = max(inv, abs(np.trace(rho) - 1))
            assert is_psd(rho)

    # lift-then-evaluate against the direct non-adaptive oracle
    rng = np.random.default_rng(99)
    lift_err = 0.0
    for _ in range(100):
        s = random_nonadaptive(rng, X=3, Y=2, D=2, B=2, nb=3)
        direct = born_nonadaptive(s.shared_state.matrix, [a.elements for a in s.alice],
                                  [p.elements for p in s.bob_base], s.postprocess, s.n_outputs)
        lift_err = max(lift_err, float(np.abs(behavior_of(lift_to_adaptive(s)).p - direct).max()))

    # confluence of word rewriting
    algs = [Algebra(SCENARIOS[n].bell(na)) for n in ("rac-trit", "facet-bit") for na in (False, True)]
    mismatches = 0
    for k in range(10_000):
        alg = algs[k % len(algs)]
        w = rng.integers(0, len(alg), size=rng.integers(0, 8))
        mismatches += alg.rewrite(w, rng) != alg.canonical(w)

    # gradient check on 20 random ansatz points
    cases = [("qubit-povm", facet_functional()), ("ea-bit-adaptive", facet_functional()),
             ("ea-trit-adaptive", rac_functional()), ("ea-bit-nonadaptive", rac_functional()),
             ("quantum-message-joint", mesd_functional(4))]
    grad = 0.0
    for k in range(20):
        tag, f = cases[k % len(cases)]
        ansatz = make_ansatz(tag, f)
        grad = max(grad, gradient_check(ansatz, f, rng.uniform(-np.pi, np.pi, ansatz.n_params)))

    items = [
        ("constructor invariants", inv < 1e-10, f"max completeness/trace error {inv:.1e}"),
        ("lift equivalence", lift_err < 1e-12, f"{lift_err:.1e} < 1e-12 over 100 strategies"),
        ("confluence", mismatches == 0, f"{mismatches} mismatches over 10^4 words"),
        ("gradient check", grad < 1e-6, f"max |autograd - finite diff| {grad:.1e} < 1e-6 over 20 points"),
    ]
    ok, failed = _record(7, "structural property suites", items)
    assert ok, failed


def test_criterion_8_excluded():
    line = ("[SKIP] criterion 8: global optimality certificate of the adaptive trit value is "
            "excluded from gating (covered one-sidedly by criteria 5 and 6)")
    print(line)
    ACCEPTANCE_LINES.append(line)


if __name__ == "__main__":
    import sys

    fails = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion")):
        try:
            fn()
        except AssertionError:
            fails += 1
    sys.exit(1 if fails else 0)
