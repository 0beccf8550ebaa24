"""Explicit protocols: EA random access codes, qubit simulations and dense coding.

All two-outcome measurements follow the ``+1 -> 0``, ``-1 -> 1`` convention
and RAC inputs are encoded as ``x = 2*x1 + x2``.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .linalg import (
    I2,
    KrausChannel,
    Povm,
    bloch_operator,
    kron,
    maximally_entangled,
    observable_povm,
    phi_plus,
    povm_element_from_bloch,
    projector,
)
from .protocol import (
    AdaptiveEAClassicalStrategy,
    NonAdaptiveEAClassicalStrategy,
    ProductMeasurement,
    QuantumMessageStrategy,
    QubitPrepareMeasure,
    SequentialMeasurement,
)

E_X = np.array([1.0, 0.0, 0.0])
E_Z = np.array([0.0, 0.0, 1.0])


def _rac_bits(x: int) -> tuple[int, int]:
    return x >> 1, x & 1


def _signed_direction(x: int, theta: float) -> np.ndarray:
    """Bloch vector of ``(-1)^x1 cos(theta) Z + (-1)^x2 sin(theta) X``."""
    x1, x2 = _rac_bits(x)
    return np.array([(-1) ** x2 * np.sin(theta), 0.0, (-1) ** x1 * np.cos(theta)])


def _zero():
    return np.zeros((2, 2), dtype=complex)


# ---------------------------------------------------------------------------
# EA-bit and EA-trit random access codes
# ---------------------------------------------------------------------------

def chsh_ea_bit_rac() -> NonAdaptiveEAClassicalStrategy:
    """One ebit plus one bit: Alice sends her CHSH outcome, Bob outputs its parity with his.

    Bob measures ``Z`` for ``y = 0`` and ``X`` for ``y = 1``; he outputs
    ``0`` when his outcome equals the message and ``1`` otherwise.
    """
    alice = tuple(observable_povm(_signed_direction(x, np.pi / 4)) for x in range(4))
    base = (observable_povm(E_Z), observable_povm(E_X))
    g = np.array([[[0 if m == bp else 1 for bp in range(2)] for m in range(2)] for _ in range(2)])
    return NonAdaptiveEAClassicalStrategy(phi_plus(), alice, base, g, n_outputs=2)


def _trit_alice(theta: float, label) -> tuple[Povm, ...]:
    """Outcome ``+1`` becomes message 0, ``-1`` becomes message ``1 + label(x)``."""
    out = []
    for x in range(4):
        op = bloch_operator(_signed_direction(x, theta))
        els = [(I2 + op) / 2, _zero(), _zero()]
        els[1 + label(x)] = (I2 - op) / 2
        out.append(Povm(tuple(els)))
    return tuple(out)


def na_ea_trit_rac(theta: float = np.arccos(1 / np.sqrt(5))) -> NonAdaptiveEAClassicalStrategy:
    """Non-adaptive EA-trit RAC with success probability ``(5 + cos t + 2 sin t)/8``.

    Messages: ``0`` for ``+1``; ``1 + x1`` for ``-1``.  After ``-1`` Bob
    announces ``x1`` directly for ``y = 0`` and flips his ``X`` outcome for ``y = 1``.
    """
    if not 0 < theta < np.pi / 2:
        raise ValueError("theta must lie in (0, pi/2)")
    alice = _trit_alice(theta, lambda x: _rac_bits(x)[0])
    base = (observable_povm(E_Z), observable_povm(E_X))
    g = np.zeros((2, 3, 2), dtype=int)
    g[0, 0] = [0, 1]
    g[0, 1] = [0, 0]
    g[0, 2] = [1, 1]
    g[1, 0] = [0, 1]
    g[1, 1] = [1, 0]
    g[1, 2] = [1, 0]
    return NonAdaptiveEAClassicalStrategy(phi_plus(), alice, base, g, n_outputs=2)


def na_ea_trit_value(theta: float) -> float:
    return (5 + np.cos(theta) + 2 * np.sin(theta)) / 8


def adaptive_ea_trit_rac() -> AdaptiveEAClassicalStrategy:
    """Adaptive EA-trit RAC reaching ``(3 + 1/sqrt 2)/4``.

    After ``-1`` Alice reveals ``c = x1 xor x2``; the two remaining inputs have
    antipodal Bloch vectors, which Bob separates with ``(Z + (-1)^c X)/sqrt 2``.
    """
    alice = _trit_alice(np.pi / 4, lambda x: _rac_bits(x)[0] ^ _rac_bits(x)[1])
    z_meas, x_meas = observable_povm(E_Z), observable_povm(E_X)
    plus = observable_povm(np.array([1.0, 0.0, 1.0]) / np.sqrt(2))
    minus = observable_povm(np.array([-1.0, 0.0, 1.0]) / np.sqrt(2))
    # c = 0: outcome +1 means x = (1, 1), -1 means x = (0, 0)
    # c = 1: outcome +1 means x = (1, 0), -1 means x = (0, 1)
    swap = lambda p: Povm((p[1], p[0]))
    bob = (
        (z_meas, swap(plus), swap(minus)),
        (x_meas, swap(plus), minus),
    )
    return AdaptiveEAClassicalStrategy(phi_plus(), alice, bob, n_outputs=2)


# ---------------------------------------------------------------------------
# qubit prepare-and-measure and its EA-bit simulation
# ---------------------------------------------------------------------------

def simulate_qubit_pm(states: np.ndarray | QubitPrepareMeasure,
                      povms: Sequence | None = None) -> AdaptiveEAClassicalStrategy:
    """EA-bit strategy reproducing the qubit behavior ``p(b|x,y) = (w_by + n_x.v_by)/2``.

    Alice measures ``(1 +- n'.sigma)/2`` with ``n' = (n_X, -n_Y, n_Z)`` on her
    half of ``phi+`` and sends the outcome sign ``s``.  Bob then holds the
    state with Bloch vector ``s n`` and measures ``(w 1 + s v.sigma)/2``.
    Mixed states (``|n| < 1``) are handled by the same unsharp measurement.
    """
    pm = states if isinstance(states, QubitPrepareMeasure) else QubitPrepareMeasure(states, povms)
    mirror = np.array([1.0, -1.0, 1.0])
    alice = []
    for n in pm.states:
        op = bloch_operator(mirror * n)
        alice.append(Povm(((I2 + op) / 2, (I2 - op) / 2)))
    bob = []
    for povm in pm.povms:
        row = []
        for s in (1, -1):
            row.append(Povm(tuple(povm_element_from_bloch(w, s * v) for w, v in povm)))
        bob.append(tuple(row))
    return AdaptiveEAClassicalStrategy(phi_plus(), tuple(alice), tuple(bob), n_outputs=pm.n_outputs)


FACET_STATES = np.array([[1.0, 0.0, 0.0],
                         [-0.5, 0.0, np.sqrt(3) / 2],
                         [-0.5, 0.0, -np.sqrt(3) / 2]])


def facet_qubit_povm_strategy() -> QubitPrepareMeasure:
    """Trine states with a three-outcome non-projective measurement; ``F = 9/4``."""
    alpha = np.arctan(4 * np.sqrt(3))
    t_plus, t_minus = -np.pi + alpha, -np.pi - alpha
    v11 = np.array([-1.0, 0.0, 0.0])
    v12 = 7 / 8 * np.array([np.cos(t_plus), 0.0, np.sin(t_plus)])
    v22 = 7 / 8 * np.array([np.cos(t_minus), 0.0, np.sin(t_minus)])
    v32 = np.array([0.25, 0.0, 0.0])
    povms = (
        ((1.0, v11), (1.0, -v11)),
        ((7 / 8, v12), (7 / 8, v22), (0.25, v32)),
    )
    return QubitPrepareMeasure(FACET_STATES, povms)


def facet_qubit_projective_strategy() -> QubitPrepareMeasure:
    """Projective strategy saturating ``F <= sqrt 5``; the third outcome of ``y = 1`` is never used."""
    v1, v2 = E_X, E_Z
    states = np.array([[-1.0, 0.0, 0.0],
                       [1.0, 0.0, -2.0],
                       [1.0, 0.0, 2.0]])
    states[1:] /= np.sqrt(5)
    povms = (
        ((1.0, v1), (1.0, -v1)),
        ((1.0, v2), (1.0, -v2), (0.0, np.zeros(3))),
    )
    return QubitPrepareMeasure(states, povms)


def unassisted_qubit_rac() -> QubitPrepareMeasure:
    """Four states at ``((-1)^x2, 0, (-1)^x1)/sqrt 2`` measured in ``Z`` and ``X``."""
    states = np.array([_signed_direction(x, np.pi / 4) for x in range(4)])
    povms = (
        ((1.0, E_Z), (1.0, -E_Z)),
        ((1.0, E_X), (1.0, -E_X)),
    )
    return QubitPrepareMeasure(states, povms)


# ---------------------------------------------------------------------------
# quantum messages
# ---------------------------------------------------------------------------

def weyl_operators(d: int) -> list[np.ndarray]:
    """``Z^a X^b`` for ``a, b in range(d)``, listed with index ``a*d + b``."""
    omega = np.exp(2j * np.pi / d)
    clock = np.diag(omega ** np.arange(d))
    shift = np.roll(np.eye(d), 1, axis=0)
    mp = np.linalg.matrix_power
    return [mp(clock, a) @ mp(shift, b) for a in range(d) for b in range(d)]


def bell_basis_povm(d: int) -> Povm:
    """Projectors onto ``(U_x (x) 1)|Phi>`` for the Weyl operators ``U_x``."""
    vec = np.eye(d).reshape(-1) / np.sqrt(d)
    els = [projector(np.kron(u, np.eye(d)) @ vec) for u in weyl_operators(d)]
    return Povm(tuple(els))


def dense_coding_channels(d: int) -> tuple[KrausChannel, ...]:
    return tuple(KrausChannel.unitary(u) for u in weyl_operators(d))


def dense_coding_strategy(d: int = 2) -> QuantumMessageStrategy:
    """``d**2`` symbols over one EA qudit, decoded by a Bell-basis measurement."""
    if d < 2:
        raise ValueError(f"dense coding needs d >= 2, got {d}")
    return QuantumMessageStrategy(maximally_entangled(d), dense_coding_channels(d),
                                  (bell_basis_povm(d),), "joint")


def dense_coding_product_zz() -> QuantumMessageStrategy:
    """Dense-coding encoding read out with ``Z (x) Z``; only the parity bit survives."""
    z = observable_povm(E_Z)
    # b1 xor b2 = x2; guess x = x2 (x1 guessed as 0)
    wiring = np.zeros((2, 2, 4))
    for b1 in range(2):
        for b2 in range(2):
            wiring[b1, b2, b1 ^ b2] = 1
    meas = ProductMeasurement(z, z, wiring)
    return QuantumMessageStrategy(phi_plus(), dense_coding_channels(2), (meas,), "product")


def stochastic_dense_coding_rac() -> QuantumMessageStrategy:
    """Perfect RAC from one EA qubit with product measurements.

    With ``U = Z^x1 X^x2`` the observable ``X (x) X`` reads ``x1`` and
    ``Z (x) Z`` reads ``x2``; the output is the parity of the two outcomes.
    """
    parity = np.array([[0, 1], [1, 0]])
    bob = tuple(ProductMeasurement(observable_povm(e), observable_povm(e), parity)
                for e in (E_X, E_Z))
    return QuantumMessageStrategy(phi_plus(), dense_coding_channels(2), bob, "product")


STRATEGIES = {
    "chsh-ea-bit-rac": chsh_ea_bit_rac,
    "na-ea-trit-rac": na_ea_trit_rac,
    "adaptive-ea-trit-rac": adaptive_ea_trit_rac,
    "facet-qubit-povm": facet_qubit_povm_strategy,
    "facet-qubit-projective": facet_qubit_projective_strategy,
    "facet-ea-bit-povm": lambda: simulate_qubit_pm(facet_qubit_povm_strategy()),
    "facet-ea-bit-projective": lambda: simulate_qubit_pm(facet_qubit_projective_strategy()),
    "unassisted-qubit-rac": unassisted_qubit_rac,
    "dense-coding": dense_coding_strategy,
    "dense-coding-product-zz": dense_coding_product_zz,
    "stochastic-dense-coding": stochastic_dense_coding_rac,
}



def _best_labels(q: np.ndarray) -> np.ndarray:
    """Guess ``argmax_x q[x, k]`` for each intermediate outcome ``k``."""
    return np.argmax(q, axis=0)


def sample_quantum_message(rng: np.random.Generator, measurement_class: str, n_inputs: int = 4,
                           d: int = 2, structured: bool = False) -> QuantumMessageStrategy:
    """Random discrimination strategy (one question, ``n_inputs`` outputs) of a measurement class.

    With ``structured`` the sample uses a maximally entangled state, unitary
    encodings and rank-1 projective measurements, and decodes each
    intermediate outcome to the most likely input; such samples sit much
    closer to the class optimum than generic ones.
    """
    from .linalg import random_channel, random_povm, random_projective, random_pure_state, random_unitary

    n_out = n_inputs
    if structured:
        state = maximally_entangled(d)
        chans = tuple(KrausChannel.unitary(random_unitary(d, rng)) for _ in range(n_inputs))
        local = lambda k: random_projective(d, d, rng)
    else:
        state = random_pure_state(d * d, rng, (d, d))
        chans = tuple(random_channel(d, d, rng, n_kraus=int(rng.integers(1, 3))) for _ in range(n_inputs))
        local = lambda k: random_povm(d, k, rng)
    proto = QuantumMessageStrategy(state, chans, (Povm((np.eye(d * d),)),), "joint")
    rhos = proto.message_states()

    def probs(ops):
        return np.array([[np.real(np.trace(r @ e)) for e in ops] for r in rhos])

    if measurement_class == "joint":
        meas = random_projective(d * d, n_out, rng) if structured else random_povm(d * d, n_out, rng)
    elif measurement_class == "product":
        k1, k2 = (d, d) if structured else (int(rng.integers(2, d * d + 1)), int(rng.integers(2, d * d + 1)))
        pm, pl = local(k1), local(k2)
        ops = [kron(a, b) for a in pm.elements for b in pl.elements]
        wiring = np.zeros((len(pm), len(pl), n_out))
        if structured:
            for k, b in enumerate(_best_labels(probs(ops))):
                wiring[k // len(pl), k % len(pl), b] = 1
        else:
            wiring = rng.dirichlet(np.full(n_out, 0.3), size=(len(pm), len(pl)))
        meas = ProductMeasurement(pm, pl, wiring)
    elif measurement_class in ("seq_M_then_B", "seq_B_then_M"):
        first_on_m = measurement_class == "seq_M_then_B"
        k = d if structured else int(rng.integers(2, d * d + 1))
        first = local(k)
        second = []
        for c, f_el in enumerate(first.elements):
            sec = local(d) if structured else random_povm(d, n_out, rng)
            if structured:
                ops = [kron(f_el, e) if first_on_m else kron(e, f_el) for e in sec.elements]
                merged = [np.zeros((d, d), dtype=complex) for _ in range(n_out)]
                for j, b in enumerate(_best_labels(probs(ops))):
                    merged[b] = merged[b] + sec.elements[j]
                sec = Povm(tuple(merged))
            second.append(sec)
        meas = SequentialMeasurement(first, tuple(second), first_on_m)
    else:
        raise ValueError(f"unknown measurement class {measurement_class!r}")
    return QuantumMessageStrategy(state, chans, (meas,), measurement_class)
