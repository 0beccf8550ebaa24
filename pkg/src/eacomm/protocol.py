"""Strategy data model and the behaviors ``p(b|x,y)`` each strategy class induces.

Indexing is zero-based throughout: inputs ``x in range(X)``, ``y in range(Y)``,
messages ``m in range(D)`` and outputs ``b in range(B)``.  Two-valued physical
outcomes are mapped as ``+1 -> 0`` and ``-1 -> 1``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .linalg import (
    STRUCT_TOL,
    DensityState,
    InvariantError,
    KrausChannel,
    Povm,
    as_matrix,
    commutator,
    completeness_error,
    kron,
    operator_norm,
    povm_element_from_bloch,
    qubit_from_bloch,
)

BEHAVIOR_TOL = 1e-9
NONADAPTIVE_TOL = 1e-8


@dataclass(frozen=True)
class Behavior:
    """Conditional distribution ``p[x, y, b] = p(b|x,y)``."""

    p: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 3:
            raise InvariantError(f"behavior tensor must be 3-d, got shape {p.shape}")
        object.__setattr__(self, "p", p)
        lo = float(-p.min(initial=0.0))
        hi = float(p.max(initial=0.0) - 1)
        if max(lo, hi) > BEHAVIOR_TOL:
            raise InvariantError("behavior entry outside [0, 1]", max(lo, hi))
        norm = float(np.max(np.abs(p.sum(axis=2) - 1), initial=0.0))
        if norm > BEHAVIOR_TOL:
            raise InvariantError("behavior not normalized over outputs", norm)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.p.shape

    def __getitem__(self, idx):
        return self.p[idx]

    def mix(self, other: "Behavior", weight: float) -> "Behavior":
        return Behavior(weight * self.p + (1 - weight) * other.p)

    def rows(self):
        """Yield ``(x, y, b, p)`` tuples in row-major order."""
        for (x, y, b), v in np.ndenumerate(self.p):
            yield x, y, b, float(v)


def _pad_povm(povm: Povm, n: int) -> Povm:
    return povm if len(povm) == n else povm.padded(n)


def _check_bipartite(state: DensityState) -> tuple[int, int]:
    if len(state.dims) != 2:
        raise InvariantError(f"shared state must be bipartite, got dims {state.dims}")
    return state.dims


def _conditional_states(state: DensityState, alice: Sequence[Povm]) -> np.ndarray:
    """Bob's unnormalized post-measurement states ``s[x, m] = Tr_A[(A_{m|x} x 1) rho]``."""
    da, db = state.dims
    rho = state.matrix.reshape(da, db, da, db)
    a = np.array([[e for e in povm.elements] for povm in alice])  # (X, D, da, da)
    # Tr_A[(A x 1) rho]_{jl} = sum_{i,k} A_{ki} rho_{ij,kl}
    return np.einsum("xmki,ijkl->xmjl", a, rho)


# ---------------------------------------------------------------------------
# entanglement-assisted classical messages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AdaptiveEAClassicalStrategy:
    """Alice measures ``alice[x]`` and sends the outcome ``m``; Bob measures ``bob[y][m]``."""

    shared_state: DensityState
    alice: tuple[Povm, ...]
    bob: tuple[tuple[Povm, ...], ...]
    n_outputs: int = 0

    def __post_init__(self):
        da, db = _check_bipartite(self.shared_state)
        alice = tuple(self.alice)
        bob = tuple(tuple(row) for row in self.bob)
        if not alice or not bob:
            raise InvariantError("strategy needs at least one input per party")
        d = len(alice[0])
        for povm in alice:
            if povm.dim != da or len(povm) != d:
                raise InvariantError("Alice POVMs must all act on H_A with D outcomes")
        n_out = self.n_outputs or max(len(p) for row in bob for p in row)
        for row in bob:
            if len(row) != d:
                raise InvariantError("Bob needs one POVM per (y, m)")
            for povm in row:
                if povm.dim != db:
                    raise InvariantError("Bob POVM acts on the wrong space")
                if len(povm) > n_out:
                    raise InvariantError("Bob POVM has more outcomes than n_outputs")
        bob = tuple(tuple(_pad_povm(p, n_out) for p in row) for row in bob)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob", bob)
        object.__setattr__(self, "n_outputs", n_out)

    @property
    def message_size(self) -> int:
        return len(self.alice[0])

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.alice), len(self.bob), self.n_outputs

    def bob_elements(self) -> np.ndarray:
        """Array ``[y, m, b, :, :]`` of Bob's measurement operators."""
        return np.array([[[e for e in p.elements] for p in row] for row in self.bob])


@dataclass(frozen=True)
class NonAdaptiveEAClassicalStrategy:
    """Bob measures ``bob_base[y]`` before reading ``m`` and outputs ``postprocess[y, m, b']``."""

    shared_state: DensityState
    alice: tuple[Povm, ...]
    bob_base: tuple[Povm, ...]
    postprocess: np.ndarray
    n_outputs: int = 0

    def __post_init__(self):
        da, db = _check_bipartite(self.shared_state)
        alice = tuple(self.alice)
        base = tuple(self.bob_base)
        d = len(alice[0])
        for povm in alice:
            if povm.dim != da or len(povm) != d:
                raise InvariantError("Alice POVMs must all act on H_A with D outcomes")
        nb = max(len(p) for p in base)
        if any(p.dim != db for p in base):
            raise InvariantError("Bob POVM acts on the wrong space")
        base = tuple(_pad_povm(p, nb) for p in base)
        g = np.asarray(self.postprocess, dtype=int)
        if g.shape != (len(base), d, nb):
            raise InvariantError(f"postprocess table must have shape {(len(base), d, nb)}, got {g.shape}")
        n_out = self.n_outputs or int(g.max()) + 1
        if g.min() < 0 or g.max() >= n_out:
            raise InvariantError("postprocess output outside range(n_outputs)")
        g = g.copy()
        g.setflags(write=False)
        object.__setattr__(self, "alice", alice)
        object.__setattr__(self, "bob_base", base)
        object.__setattr__(self, "postprocess", g)
        object.__setattr__(self, "n_outputs", n_out)

    @property
    def message_size(self) -> int:
        return len(self.alice[0])

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.alice), len(self.bob_base), self.n_outputs

    def tuple_outputs(self, y: int) -> list[tuple[int, ...]]:
        """The output list ``(b_1, ..., b_D)`` produced by each base outcome ``b'``."""
        g = self.postprocess[y]
        return [tuple(int(g[m, bp]) for m in range(self.message_size)) for bp in range(g.shape[1])]


def behavior_of_adaptive(s: AdaptiveEAClassicalStrategy) -> Behavior:
    sigma = _conditional_states(s.shared_state, s.alice)   # (X, D, db, db)
    bob = s.bob_elements()                                 # (Y, D, B, db, db)
    p = np.einsum("xmjl,ymblj->xyb", sigma, bob).real
    return Behavior(p)


def behavior_of_nonadaptive(s: NonAdaptiveEAClassicalStrategy) -> Behavior:
    sigma = _conditional_states(s.shared_state, s.alice)
    base = np.array([[e for e in p.elements] for p in s.bob_base])  # (Y, B', db, db)
    joint = np.einsum("xmjl,yclj->xymc", sigma, base).real          # p(m, b'|x, y)
    X, Y, D, nb = joint.shape
    p = np.zeros((X, Y, s.n_outputs))
    for y in range(Y):
        for m in range(D):
            for c in range(nb):
                p[:, y, s.postprocess[y, m, c]] += joint[:, y, m, c]
    return Behavior(p)


def lift_to_adaptive(s: NonAdaptiveEAClassicalStrategy) -> AdaptiveEAClassicalStrategy:
    """Fold the post-processing into message-dependent measurements."""
    db = s.shared_state.dims[1]
    bob = []
    for y, base in enumerate(s.bob_base):
        row = []
        for m in range(s.message_size):
            els = [np.zeros((db, db), dtype=complex) for _ in range(s.n_outputs)]
            for c, e in enumerate(base.elements):
                els[s.postprocess[y, m, c]] = els[s.postprocess[y, m, c]] + e
            row.append(Povm(tuple(els)))
        bob.append(tuple(row))
    return AdaptiveEAClassicalStrategy(s.shared_state, s.alice, tuple(bob), s.n_outputs)


@dataclass(frozen=True)
class AdaptivityReport:
    nonadaptive: bool
    max_commutator: float
    worst: tuple[int, int, int, int, int] | None = None  # (y, m, b, m', b')

    @property
    def verdict(self) -> str:
        return "NON-ADAPTIVE" if self.nonadaptive else "ADAPTIVE"


def check_nonadaptive(s: AdaptiveEAClassicalStrategy, tol: float = NONADAPTIVE_TOL) -> AdaptivityReport:
    """Test whether all of Bob's operators for a fixed ``y`` commute across messages."""
    worst, where = 0.0, None
    for y, row in enumerate(s.bob):
        for m, pm in enumerate(row):
            for mp in range(m, len(row)):
                for b, e in enumerate(pm.elements):
                    for bp, f in enumerate(row[mp].elements):
                        nrm = operator_norm(commutator(e, f))
                        if nrm > worst:
                            worst, where = nrm, (y, m, b, mp, bp)
    return AdaptivityReport(worst <= tol, worst, where)


# ---------------------------------------------------------------------------
# quantum messages
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProductMeasurement:
    """Independent measurements on message and local system, combined by ``wiring[b1, b2, b]``."""

    on_message: Povm
    on_local: Povm
    wiring: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.wiring, dtype=float)
        if w.ndim == 2:  # deterministic table b = w[b1, b2]
            w = np.eye(int(w.max()) + 1)[w.astype(int)]
        if w.shape[:2] != (len(self.on_message), len(self.on_local)):
            raise InvariantError("wiring table does not match component outcome counts")
        if w.min() < -STRUCT_TOL or np.max(np.abs(w.sum(axis=2) - 1)) > STRUCT_TOL:
            raise InvariantError("wiring is not a conditional distribution")
        object.__setattr__(self, "wiring", w)

    def joint(self) -> Povm:
        els = []
        for b in range(self.wiring.shape[2]):
            op = sum(self.wiring[b1, b2, b] * kron(em, el)
                     for b1, em in enumerate(self.on_message.elements)
                     for b2, el in enumerate(self.on_local.elements))
            els.append(op)
        return Povm(tuple(els))


@dataclass(frozen=True)
class SequentialMeasurement:
    """Measure one system first and use its outcome to choose the measurement on the other.

    With ``message_first`` the joint operators are
    ``sum_c first[c] (x) second[c][b]`` (message factor left); otherwise the local
    system is measured first and ``second`` acts on the message.
    """

    first: Povm
    second: tuple[Povm, ...]
    message_first: bool = True

    def __post_init__(self):
        second = tuple(self.second)
        if len(second) != len(self.first):
            raise InvariantError("need one second-stage POVM per first-stage outcome")
        nb = max(len(p) for p in second)
        object.__setattr__(self, "second", tuple(_pad_povm(p, nb) for p in second))

    def joint(self) -> Povm:
        nb = len(self.second[0])
        els = []
        for b in range(nb):
            if self.message_first:
                op = sum(kron(f, sec[b]) for f, sec in zip(self.first.elements, self.second))
            else:
                op = sum(kron(sec[b], f) for f, sec in zip(self.first.elements, self.second))
            els.append(op)
        return Povm(tuple(els))


MEASUREMENT_CLASSES = ("joint", "product", "seq_M_then_B", "seq_B_then_M")
BobQuantumMeasurement = Union[Povm, ProductMeasurement, SequentialMeasurement]


def _class_of(meas: BobQuantumMeasurement) -> str:
    if isinstance(meas, ProductMeasurement):
        return "product"
    if isinstance(meas, SequentialMeasurement):
        return "seq_M_then_B" if meas.message_first else "seq_B_then_M"
    return "joint"


@dataclass(frozen=True)
class QuantumMessageStrategy:
    """Alice applies ``alice_channels[x]`` to her half and sends the output system ``M``.

    Bob measures ``M (x) B`` (message factor first) with the measurement for ``y``.
    """

    shared_state: DensityState
    alice_channels: tuple[KrausChannel, ...]
    bob: tuple[BobQuantumMeasurement, ...]
    measurement_class: str = "joint"
    joint_povms: tuple[Povm, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        da, db = _check_bipartite(self.shared_state)
        chans = tuple(self.alice_channels)
        if self.measurement_class not in MEASUREMENT_CLASSES:
            raise InvariantError(f"unknown measurement class {self.measurement_class!r}")
        d = chans[0].dim_out
        for ch in chans:
            if ch.dim_in != da or ch.dim_out != d:
                raise InvariantError("channels must map H_A to a message of fixed dimension")
        bob = tuple(self.bob)
        joints = []
        for meas in bob:
            if self.measurement_class != "joint" and _class_of(meas) != self.measurement_class:
                raise InvariantError(
                    f"measurement {type(meas).__name__} does not belong to class {self.measurement_class}")
            povm = meas if isinstance(meas, Povm) else meas.joint()
            if povm.dim != d * db:
                raise InvariantError("Bob's measurement must act on M (x) B")
            joints.append(povm)
        n_out = max(len(p) for p in joints)
        object.__setattr__(self, "alice_channels", chans)
        object.__setattr__(self, "bob", bob)
        object.__setattr__(self, "joint_povms", tuple(_pad_povm(p, n_out) for p in joints))

    @property
    def message_dim(self) -> int:
        return self.alice_channels[0].dim_out

    @property
    def n_outputs(self) -> int:
        return len(self.joint_povms[0])

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.alice_channels), len(self.bob), self.n_outputs

    def message_states(self) -> list[np.ndarray]:
        """The states ``($_x (x) id)[psi]`` on ``M (x) B``."""
        rho = self.shared_state.matrix
        return [ch.apply(rho, self.shared_state.dims, 0) for ch in self.alice_channels]


def behavior_of_quantum(s: QuantumMessageStrategy) -> Behavior:
    states = np.array(s.message_states())
    ops = np.array([[e for e in p.elements] for p in s.joint_povms])
    p = np.einsum("xjl,yblj->xyb", states, ops).real
    return Behavior(p)


# ---------------------------------------------------------------------------
# unassisted qubit prepare-and-measure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QubitPrepareMeasure:
    """Qubit states ``(1 + n_x.sigma)/2`` measured with ``(w 1 + v.sigma)/2`` elements.

    ``povms[y]`` is a sequence of ``(weight, v)`` pairs, one per outcome.
    """

    states: np.ndarray
    povms: tuple[tuple[tuple[float, np.ndarray], ...], ...]

    def __post_init__(self):
        n = np.asarray(self.states, dtype=float).reshape(-1, 3)
        if np.max(np.linalg.norm(n, axis=1)) > 1 + STRUCT_TOL:
            raise InvariantError("state Bloch vector longer than 1")
        povms = tuple(tuple((float(w), np.asarray(v, dtype=float)) for w, v in povm)
                      for povm in self.povms)
        for povm in povms:
            for w, v in povm:
                if w < np.linalg.norm(v) - STRUCT_TOL:
                    raise InvariantError("POVM element not PSD (weight < |v|)",
                                         float(np.linalg.norm(v) - w))
            wsum = sum(w for w, _ in povm)
            vsum = sum(v for _, v in povm)
            err = max(abs(wsum - 2), float(np.max(np.abs(vsum))))
            if err > STRUCT_TOL:
                raise InvariantError("POVM vectors violate normalization/completeness", err)
        object.__setattr__(self, "states", n)
        object.__setattr__(self, "povms", povms)

    @property
    def n_outputs(self) -> int:
        return max(len(p) for p in self.povms)

    @property
    def dims(self) -> tuple[int, int, int]:
        return len(self.states), len(self.povms), self.n_outputs

    def density_states(self) -> list[DensityState]:
        return [qubit_from_bloch(n) for n in self.states]

    def povm(self, y: int) -> Povm:
        return Povm(tuple(povm_element_from_bloch(w, v) for w, v in self.povms[y]))

    def is_projective(self, tol: float = STRUCT_TOL) -> bool:
        return all(self.povm(y).is_projective(tol) for y in range(len(self.povms)))

    def behavior(self) -> Behavior:
        p = np.zeros(self.dims)
        for y, povm in enumerate(self.povms):
            for b, (w, v) in enumerate(povm):
                p[:, y, b] = 0.5 * (w + self.states @ v)
        return Behavior(p)


def born_behavior(states: Sequence[np.ndarray], povms: Sequence[Povm]) -> Behavior:
    """``p(b|x,y) = Tr(rho_x M_{b|y})`` for explicit matrices."""
    nb = max(len(p) for p in povms)
    p = np.zeros((len(states), len(povms), nb))
    for x, rho in enumerate(states):
        r = rho.matrix if isinstance(rho, DensityState) else as_matrix(rho)
        for y, povm in enumerate(povms):
            p[x, y, :len(povm)] = povm.probabilities(r)
    return Behavior(p)


Strategy = Union[AdaptiveEAClassicalStrategy, NonAdaptiveEAClassicalStrategy,
                 QuantumMessageStrategy, QubitPrepareMeasure]


def behavior_of(s: Strategy) -> Behavior:
    if isinstance(s, AdaptiveEAClassicalStrategy):
        return behavior_of_adaptive(s)
    if isinstance(s, NonAdaptiveEAClassicalStrategy):
        return behavior_of_nonadaptive(s)
    if isinstance(s, QuantumMessageStrategy):
        return behavior_of_quantum(s)
    if isinstance(s, QubitPrepareMeasure):
        return s.behavior()
    raise TypeError(f"not a strategy: {type(s).__name__}")


def joint_completeness_error(s: QuantumMessageStrategy) -> float:
    return max(completeness_error(p.elements) for p in s.joint_povms)
