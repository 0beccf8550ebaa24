"""Heuristic maximization of linear functionals over parameterized strategy classes.

Each ansatz maps a real parameter vector to a "raw" distribution
``q_y[x, k]`` over intermediate outcomes ``k`` together with a discrete
decoding table ``g_y[k] -> b``.  For a fixed table the objective is smooth
and is maximized with L-BFGS using torch autograd gradients; for fixed
continuous parameters the best table is an exact per-``k`` argmax.  The two
steps alternate until the table stops changing.

Non-adaptive EA classes use the tuple-output form: Bob's base measurement
has one outcome per tuple ``(b_1, ..., b_D)`` and he outputs ``b_m``.  Every
deterministic post-processing is a coarse-graining of this form, so no
discrete search is needed there.
"""
from __future__ import annotations

import itertools
import logging
import re
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.optimize
import torch

from .linalg import (
    DensityState,
    KrausChannel,
    Povm,
    bloch_of,
    inv_sqrt_psd,
)
from .protocol import (
    MEASUREMENT_CLASSES,
    AdaptiveEAClassicalStrategy,
    NonAdaptiveEAClassicalStrategy,
    ProductMeasurement,
    QuantumMessageStrategy,
    QubitPrepareMeasure,
    SequentialMeasurement,
    Strategy,
)
from .tasks import LinearFunctional

log = logging.getLogger(__name__)

EPS = 1e-12
CDTYPE = torch.complex128
RDTYPE = torch.float64

ANSATZ_TAGS = (
    "unassisted-classical-D", "qubit-projective", "qubit-povm",
    "ea-bit-adaptive", "ea-bit-nonadaptive", "ea-trit-adaptive", "ea-trit-nonadaptive",
) + tuple(f"quantum-message-{c}" for c in MEASUREMENT_CLASSES)


# ---------------------------------------------------------------------------
# parameter blocks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Block:
    """A contiguous slice of the parameter vector with a decoding rule."""

    name: str
    kind: str        # "povm" | "pure" | "bloch" | "direction" | "kraus" | "logits"
    shape: tuple     # kind-specific: (d, n) | (d,) | () | () | (d_in, d_out, n) | (n,)
    start: int

    @property
    def size(self) -> int:
        return _block_size(self.kind, self.shape)


def _block_size(kind: str, shape: tuple) -> int:
    if kind == "povm":
        d, n = shape
        return 2 * n * d * d
    if kind == "pure":
        return 2 * shape[0]
    if kind in ("bloch", "direction"):
        return 2
    if kind == "kraus":
        d_in, d_out, n = shape
        return 2 * n * d_out * d_in
    if kind == "logits":
        return shape[0]
    raise ValueError(f"unknown block kind {kind!r}")


def _complex(v: torch.Tensor, shape: tuple) -> torch.Tensor:
    half = v.numel() // 2
    return torch.complex(v[:half], v[half:]).reshape(shape)


class _InvSqrt(torch.autograd.Function):
    """``S^-1/2`` for Hermitian positive definite ``S``.

    The backward pass uses divided differences of ``f(t) = t^-1/2`` and
    falls back to ``f'`` on (near-)degenerate eigenvalue pairs, where the
    generic eigendecomposition gradient is singular.
    """

    @staticmethod
    def forward(ctx, s):
        w, u = torch.linalg.eigh(s)
        ctx.save_for_backward(w, u)
        return (u * w.rsqrt().to(CDTYPE)) @ u.conj().transpose(-1, -2)

    @staticmethod
    def backward(ctx, grad):
        w, u = ctx.saved_tensors
        f = w.rsqrt()
        dw = w[:, None] - w[None, :]
        close = dw.abs() <= 1e-9 * w.abs().max()
        safe = torch.where(close, torch.ones_like(dw), dw)
        fprime = -0.5 * w.pow(-1.5)
        div = torch.where(close, 0.5 * (fprime[:, None] + fprime[None, :]),
                          (f[:, None] - f[None, :]) / safe)
        uh = u.conj().transpose(-1, -2)
        return u @ (div.to(CDTYPE) * (uh @ grad @ u)) @ uh


def _inv_sqrt(s: torch.Tensor) -> torch.Tensor:
    return _InvSqrt.apply(s)


def _eye(d: int) -> torch.Tensor:
    return torch.eye(d, dtype=CDTYPE)


def povm_from_params(v: torch.Tensor, d: int, n: int) -> torch.Tensor:
    """``M_b = S^-1/2 (T_b^dag T_b + eps 1) S^-1/2``; exact completeness by construction."""
    t = _complex(v, (n, d, d))
    p = t.conj().transpose(-1, -2) @ t + EPS * _eye(d)
    s_ih = _inv_sqrt(p.sum(0))
    m = s_ih @ p @ s_ih
    return (m + m.conj().transpose(-1, -2)) / 2


def pure_from_params(v: torch.Tensor, d: int) -> torch.Tensor:
    psi = _complex(v, (d,))
    return psi / torch.linalg.vector_norm(psi)


def _pauli() -> torch.Tensor:
    return torch.tensor([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]], dtype=CDTYPE)


def bloch_from_angles(v: torch.Tensor) -> torch.Tensor:
    th, ph = v[0], v[1]
    return torch.stack([torch.sin(th) * torch.cos(ph), torch.sin(th) * torch.sin(ph), torch.cos(th)])


def bloch_matrix(n: torch.Tensor) -> torch.Tensor:
    return (_eye(2) + torch.einsum("i,ijk->jk", n.to(CDTYPE), _pauli())) / 2


def kraus_from_params(v: torch.Tensor, d_in: int, d_out: int, n: int) -> torch.Tensor:
    t = _complex(v, (n, d_out, d_in))
    s = (t.conj().transpose(-1, -2) @ t).sum(0) + EPS * _eye(d_in)
    return t @ _inv_sqrt(s)


def _decode_block(b: Block, params: torch.Tensor) -> torch.Tensor:
    v = params[b.start:b.start + b.size]
    if b.kind == "povm":
        return povm_from_params(v, *b.shape)
    if b.kind == "pure":
        return pure_from_params(v, b.shape[0])
    if b.kind == "bloch":
        return bloch_matrix(bloch_from_angles(v))
    if b.kind == "direction":
        n = bloch_from_angles(v)
        return torch.stack([bloch_matrix(n), bloch_matrix(-n)])
    if b.kind == "kraus":
        return kraus_from_params(v, *b.shape)
    if b.kind == "logits":
        return torch.softmax(v, dim=0)
    raise ValueError(b.kind)


# encoders (used to seed the optimizer with known strategies)

def _sqrt_psd(m: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh((m + m.conj().T) / 2)
    return (u * np.sqrt(np.clip(w, 0, None))) @ u.conj().T


def _split(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex).reshape(-1)
    return np.concatenate([c.real, c.imag])


def encode_povm(elements) -> np.ndarray:
    return _split(np.array([_sqrt_psd(np.asarray(e)) for e in elements]))


def encode_angles(n) -> np.ndarray:
    n = np.asarray(n, dtype=float)
    n = n / np.linalg.norm(n)
    return np.array([np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])])


# ---------------------------------------------------------------------------
# ansatz
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StrategyAnsatz:
    """A strategy class with fixed scenario and dimension caps.

    ``local_dims`` are Alice's and Bob's Hilbert-space dimensions for the
    entanglement-assisted classes; for quantum messages the message system
    is Alice's system after her channel (same dimension).
    """

    tag: str
    X: int
    outcomes: tuple[int, ...]
    D: int = 2
    local_dims: tuple[int, int] = (2, 2)
    n_kraus: int = 1
    blocks: tuple[Block, ...] = field(init=False, repr=False)

    def __post_init__(self):
        tag = self.tag
        m = re.fullmatch(r"unassisted-classical-(\d+)", tag)
        if m:
            object.__setattr__(self, "D", int(m.group(1)))
            tag = "unassisted-classical-D"
        elif tag.startswith("ea-bit"):
            object.__setattr__(self, "D", 2)
        elif tag.startswith("ea-trit"):
            object.__setattr__(self, "D", 3)
        if tag not in ANSATZ_TAGS:
            raise ValueError(f"unknown ansatz {self.tag!r}; choose from {ANSATZ_TAGS}")
        object.__setattr__(self, "tag", tag)
        object.__setattr__(self, "outcomes", tuple(int(o) for o in self.outcomes))
        object.__setattr__(self, "blocks", tuple(self._layout()))

    # layout -----------------------------------------------------------------

    @property
    def family(self) -> str:
        if self.tag.startswith("ea-"):
            return "ea-" + self.tag.rsplit("-", 1)[1]
        if self.tag.startswith("quantum-message-"):
            return "quantum-message"
        return self.tag

    @property
    def measurement_class(self) -> str:
        return self.tag[len("quantum-message-"):]

    @property
    def Y(self) -> int:
        return len(self.outcomes)

    def base_outcomes(self, y: int) -> int:
        """Outcome count of Bob's base measurement: one outcome per output tuple ``(b_1..b_D)``."""
        return self.outcomes[y] ** self.D

    def tuple_tables(self) -> list[np.ndarray]:
        """The fixed decoding ``(m, (b_1..b_D)) -> b_m`` of the tuple-output form."""
        out = []
        for y in range(self.Y):
            tuples = list(itertools.product(range(self.outcomes[y]), repeat=self.D))
            out.append(np.array([t[m] for m in range(self.D) for t in tuples]))
        return out

    def product_outcomes(self) -> tuple[int, int]:
        da, db = self.local_dims
        return da * da, db * db

    def _layout(self) -> list[Block]:
        spec: list[tuple[str, str, tuple]] = []
        da, db = self.local_dims
        fam = self.family
        if fam == "unassisted-classical-D":
            spec += [(f"enc{x}", "logits", (self.D,)) for x in range(self.X)]
        elif fam == "qubit-projective":
            spec += [(f"state{x}", "bloch", ()) for x in range(self.X)]
            spec += [(f"meas{y}", "direction", ()) for y in range(self.Y)]
        elif fam == "qubit-povm":
            spec += [(f"state{x}", "bloch", ()) for x in range(self.X)]
            spec += [(f"meas{y}", "povm", (2, self.outcomes[y])) for y in range(self.Y)]
        elif fam in ("ea-adaptive", "ea-nonadaptive"):
            spec.append(("psi", "pure", (da * db,)))
            spec += [(f"alice{x}", "povm", (da, self.D)) for x in range(self.X)]
            if fam == "ea-adaptive":
                spec += [(f"bob{y}_{m}", "povm", (db, self.outcomes[y]))
                         for y in range(self.Y) for m in range(self.D)]
            else:
                spec += [(f"bob{y}", "povm", (db, self.base_outcomes(y))) for y in range(self.Y)]
        elif fam == "quantum-message":
            spec.append(("psi", "pure", (da * db,)))
            spec += [(f"chan{x}", "kraus", (da, da, self.n_kraus)) for x in range(self.X)]
            cls = self.measurement_class
            for y in range(self.Y):
                if cls == "joint":
                    spec.append((f"bob{y}", "povm", (da * db, self.outcomes[y])))
                elif cls == "product":
                    k1, k2 = self.product_outcomes()
                    spec += [(f"bob{y}_msg", "povm", (da, k1)), (f"bob{y}_loc", "povm", (db, k2))]
                else:
                    first, second = (da, db) if cls == "seq_M_then_B" else (db, da)
                    spec.append((f"bob{y}_first", "povm", (first, first)))
                    spec += [(f"bob{y}_second{c}", "povm", (second, self.outcomes[y]))
                             for c in range(first)]
        blocks, pos = [], 0
        for name, kind, shape in spec:
            blocks.append(Block(name, kind, shape, pos))
            pos += _block_size(kind, shape)
        return blocks

    @property
    def n_params(self) -> int:
        return sum(b.size for b in self.blocks)

    def block(self, name: str) -> Block:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    def has_table(self) -> bool:
        return self.family in ("unassisted-classical-D", "qubit-projective") or \
            (self.family == "quantum-message" and self.measurement_class == "product")

    def raw_sizes(self) -> list[int]:
        fam = self.family
        if fam == "unassisted-classical-D":
            return [self.D] * self.Y
        if fam == "qubit-projective":
            return [2] * self.Y
        if fam == "ea-nonadaptive":
            return [self.D * self.base_outcomes(y) for y in range(self.Y)]
        if fam == "quantum-message" and self.measurement_class == "product":
            k1, k2 = self.product_outcomes()
            return [k1 * k2] * self.Y
        return list(self.outcomes)

    # forward model ----------------------------------------------------------

    def parts(self, params: torch.Tensor) -> dict[str, torch.Tensor]:
        return {b.name: _decode_block(b, params) for b in self.blocks}

    def raw(self, params: torch.Tensor) -> list[torch.Tensor]:
        """``q_y[x, k]`` for each ``y``."""
        P = self.parts(params)
        fam, da, db = self.family, *self.local_dims
        X, Y = self.X, self.Y
        if fam == "unassisted-classical-D":
            enc = torch.stack([P[f"enc{x}"] for x in range(X)])
            return [enc] * Y
        if fam in ("qubit-projective", "qubit-povm"):
            rho = torch.stack([P[f"state{x}"] for x in range(X)])
            return [torch.einsum("xij,kji->xk", rho, P[f"meas{y}"]).real for y in range(Y)]
        if fam.startswith("ea-"):
            psi = P["psi"].reshape(da, db)
            A = torch.stack([P[f"alice{x}"] for x in range(X)])            # (X, D, da, da)
            # Bob's unnormalized conditional states psi^T A^T psi^*
            sig = torch.einsum("ij,xmki,kl->xmjl", psi, A, psi.conj())
            out = []
            for y in range(Y):
                if fam == "ea-adaptive":
                    B = torch.stack([P[f"bob{y}_{m}"] for m in range(self.D)])  # (D, B, db, db)
                    out.append(torch.einsum("xmjl,mblj->xb", sig, B).real)
                else:
                    B = P[f"bob{y}"]                                            # (K, db, db)
                    out.append(torch.einsum("xmjl,clj->xmc", sig, B).real.reshape(X, -1))
            return out
        # quantum message: rho_x on M (x) B
        psi = P["psi"].reshape(da, db)
        states = []
        for x in range(X):
            ks = P[f"chan{x}"]                                   # (n, dM, dA)
            phis = ks @ psi                                      # (n, dM, dB)
            states.append(torch.einsum("nij,nkl->ijkl", phis, phis.conj()).reshape(da * db, da * db))
        rho = torch.stack(states)
        out = []
        for y in range(Y):
            M = self._joint_measurement(P, y)
            out.append(torch.einsum("xij,kji->xk", rho, M).real)
        return out

    def _joint_measurement(self, P, y: int) -> torch.Tensor:
        cls = self.measurement_class
        if cls == "joint":
            return P[f"bob{y}"]
        if cls == "product":
            mm, ml = P[f"bob{y}_msg"], P[f"bob{y}_loc"]
            k1, k2 = mm.shape[0], ml.shape[0]
            return torch.stack([torch.kron(mm[i], ml[j]) for i in range(k1) for j in range(k2)])
        first = P[f"bob{y}_first"]
        second = [P[f"bob{y}_second{c}"] for c in range(first.shape[0])]
        els = []
        for b in range(self.outcomes[y]):
            if cls == "seq_M_then_B":
                els.append(sum(torch.kron(first[c], second[c][b]) for c in range(len(second))))
            else:
                els.append(sum(torch.kron(second[c][b], first[c]) for c in range(len(second))))
        return torch.stack(els)

    # discrete tables --------------------------------------------------------

    def identity_tables(self) -> list[np.ndarray]:
        """Tables used by classes without a discrete search."""
        if self.family == "ea-nonadaptive":
            return self.tuple_tables()
        return [np.arange(k) for k in self.raw_sizes()]

    def best_tables(self, f: LinearFunctional, q: list[np.ndarray]) -> list[np.ndarray]:
        if not self.has_table():
            return self.identity_tables()
        out = []
        for y, qy in enumerate(q):
            score = f.coeffs[:, y, :self.outcomes[y]].T @ qy   # (B_y, K)
            out.append(np.argmax(score, axis=0))
        return out

    # decoding into strategy objects -----------------------------------------

    def decode(self, params, tables: list[np.ndarray] | None = None) -> Strategy:
        """Build the strategy object the parameters describe (all invariants checked)."""
        params = np.asarray(params, dtype=float)
        if params.shape != (self.n_params,):
            raise ValueError(f"{self.tag} expects {self.n_params} parameters, got {params.shape}")
        if tables is None:
            tables = self.identity_tables() if not self.has_table() else \
                self.best_tables_from_params(None, params)
        with torch.no_grad():
            P = {k: v.numpy() for k, v in self.parts(torch.as_tensor(params)).items()}
        fam, da, db = self.family, *self.local_dims
        nb = max(self.outcomes)
        if fam == "unassisted-classical-D":
            alice = tuple(Povm(tuple(np.array([[p]], dtype=complex) for p in P[f"enc{x}"]))
                          for x in range(self.X))
            bob = tuple(tuple(_indicator_povm(int(tables[y][m]), nb) for m in range(self.D))
                        for y in range(self.Y))
            return AdaptiveEAClassicalStrategy(DensityState(np.ones((1, 1)), (1, 1)), alice, bob, nb)
        if fam in ("qubit-projective", "qubit-povm"):
            states = np.array([bloch_of(P[f"state{x}"])[1] for x in range(self.X)])
            povms = []
            for y in range(self.Y):
                els = P[f"meas{y}"]
                if fam == "qubit-projective":
                    merged = [np.zeros((2, 2), dtype=complex) for _ in range(self.outcomes[y])]
                    for k, e in enumerate(els):
                        merged[tables[y][k]] = merged[tables[y][k]] + e
                    els = merged
                povms.append(tuple(bloch_of(e) for e in els))
            return QubitPrepareMeasure(states, tuple(povms))
        psi = DensityState.pure(P["psi"], (da, db))
        if fam.startswith("ea-"):
            alice = tuple(_povm(P[f"alice{x}"]) for x in range(self.X))
            if fam == "ea-adaptive":
                bob = tuple(tuple(_povm(P[f"bob{y}_{m}"]) for m in range(self.D)) for y in range(self.Y))
                return AdaptiveEAClassicalStrategy(psi, alice, bob, nb)
            base = tuple(_povm(P[f"bob{y}"]) for y in range(self.Y))
            kmax = max(self.base_outcomes(y) for y in range(self.Y))
            g = np.zeros((self.Y, self.D, kmax), dtype=int)
            for y in range(self.Y):
                g[y, :, :self.base_outcomes(y)] = np.asarray(tables[y]).reshape(self.D, -1)
            return NonAdaptiveEAClassicalStrategy(psi, alice, base, g, nb)
        chans = tuple(KrausChannel(tuple(_orthonormalize_kraus(P[f"chan{x}"])))
                      for x in range(self.X))
        cls = self.measurement_class
        bob = []
        for y in range(self.Y):
            if cls == "joint":
                bob.append(_povm(P[f"bob{y}"]))
            elif cls == "product":
                k1, k2 = self.product_outcomes()
                wiring = np.zeros((k1, k2, nb))
                for k, b in enumerate(tables[y]):
                    wiring[k // k2, k % k2, b] = 1
                bob.append(ProductMeasurement(_povm(P[f"bob{y}_msg"]), _povm(P[f"bob{y}_loc"]), wiring))
            else:
                first = _povm(P[f"bob{y}_first"])
                second = tuple(_povm(P[f"bob{y}_second{c}"]) for c in range(len(first)))
                bob.append(SequentialMeasurement(first, second, cls == "seq_M_then_B"))
        return QuantumMessageStrategy(psi, chans, tuple(bob), cls)

    def best_tables_from_params(self, f: LinearFunctional | None, params) -> list[np.ndarray]:
        if f is None:
            raise ValueError("decoding a class with a discrete table needs the table or the functional")
        with torch.no_grad():
            q = [t.numpy() for t in self.raw(torch.as_tensor(np.asarray(params, dtype=float)))]
        return self.best_tables(f, q)

    # encoding of known qubit strategies ---------------------------------------

    def encode(self, strategy) -> np.ndarray:
        """Parameters reproducing ``strategy`` (qubit and adaptive EA classes)."""
        v = np.zeros(self.n_params)

        def put(name, vals):
            b = self.block(name)
            v[b.start:b.start + b.size] = vals

        if self.family in ("qubit-povm", "qubit-projective") and isinstance(strategy, QubitPrepareMeasure):
            for x, n in enumerate(strategy.states):
                put(f"state{x}", encode_angles(n))
            for y in range(self.Y):
                if self.family == "qubit-povm":
                    put(f"meas{y}", encode_povm(strategy.povm(y).padded(self.outcomes[y]).elements))
                else:
                    w, vec = max(strategy.povms[y], key=lambda e: e[0])
                    put(f"meas{y}", encode_angles(vec))
            return v
        if self.family == "ea-adaptive" and isinstance(strategy, AdaptiveEAClassicalStrategy):
            put("psi", _split(_purify(strategy.shared_state.matrix)))
            for x, povm in enumerate(strategy.alice):
                put(f"alice{x}", encode_povm(povm.elements))
            for y, row in enumerate(strategy.bob):
                for m, povm in enumerate(row):
                    put(f"bob{y}_{m}", encode_povm(_trim(povm.elements, self.outcomes[y])))
            return v
        if self.family == "ea-nonadaptive" and isinstance(strategy, NonAdaptiveEAClassicalStrategy):
            put("psi", _split(_purify(strategy.shared_state.matrix)))
            for x, povm in enumerate(strategy.alice):
                put(f"alice{x}", encode_povm(povm.elements))
            for y, povm in enumerate(strategy.bob_base):
                # base outcome c produces the tuple (g[y, 0, c], ..., g[y, D-1, c])
                tuples = list(itertools.product(range(self.outcomes[y]), repeat=self.D))
                els = [np.zeros((povm.dim, povm.dim), dtype=complex) for _ in tuples]
                for c, e in enumerate(povm.elements):
                    els[tuples.index(tuple(int(b) for b in strategy.postprocess[y, :, c]))] += e
                put(f"bob{y}", encode_povm(els))
            return v
        raise NotImplementedError(f"no encoder for {type(strategy).__name__} in {self.tag}")


def _trim(elements, n: int):
    """Drop padding outcomes beyond ``n``; they must be zero."""
    extra = elements[n:]
    if any(np.abs(e).max() > 1e-12 for e in extra):
        raise ValueError(f"strategy uses outcomes beyond the {n} allowed by the ansatz")
    return elements[:n]


def _purify(rho: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(rho)
    if np.sum(w > 1e-9) != 1:
        raise ValueError("only pure shared states can be encoded")
    return u[:, -1]


def _povm(els: np.ndarray) -> Povm:
    return Povm(tuple((e + e.conj().T) / 2 for e in els))


def _indicator_povm(b: int, n: int) -> Povm:
    els = [np.zeros((1, 1), dtype=complex) for _ in range(n)]
    els[b] = np.ones((1, 1), dtype=complex)
    return Povm(tuple(els))


def _orthonormalize_kraus(ks: np.ndarray) -> list[np.ndarray]:
    s = sum(k.conj().T @ k for k in ks)
    fix = inv_sqrt_psd(s)
    return [k @ fix for k in ks]


def make_ansatz(tag: str, f: LinearFunctional, D: int | None = None,
                local_dims: tuple[int, int] = (2, 2), n_kraus: int = 1) -> StrategyAnsatz:
    """Ansatz for ``tag`` matching the input and outcome structure of ``f``."""
    kw = {} if D is None else {"D": D}
    return StrategyAnsatz(tag, f.dims[0], f.outcomes, local_dims=tuple(local_dims),
                          n_kraus=n_kraus, **kw)


# ---------------------------------------------------------------------------
# objective and ascent
# ---------------------------------------------------------------------------

def _check_dims(f: LinearFunctional, ansatz: StrategyAnsatz) -> None:
    if f.dims[0] != ansatz.X or f.outcomes != ansatz.outcomes:
        raise ValueError(f"functional dims {f.dims} / outcomes {f.outcomes} do not match "
                         f"ansatz X={ansatz.X}, outcomes={ansatz.outcomes}")


def _weights(f: LinearFunctional, ansatz: StrategyAnsatz, tables) -> list[torch.Tensor]:
    _check_dims(f, ansatz)
    return [torch.as_tensor(f.coeffs[:, y, :][:, np.asarray(t)]) for y, t in enumerate(tables)]


def objective_and_grad(f: LinearFunctional, ansatz: StrategyAnsatz, params,
                       tables=None) -> tuple[float, np.ndarray]:
    """Value of ``f`` on the decoded behavior and its autograd gradient."""
    theta = torch.tensor(np.asarray(params, dtype=float), dtype=RDTYPE, requires_grad=True)
    q = ansatz.raw(theta)
    if tables is None:
        tables = ansatz.best_tables(f, [t.detach().numpy() for t in q])
    W = _weights(f, ansatz, tables)
    val = sum((w * qy).sum() for w, qy in zip(W, q)) + f.offset
    val.backward()
    return float(val.detach()), theta.grad.numpy().copy()


def objective(f: LinearFunctional, ansatz: StrategyAnsatz, params, tables=None) -> float:
    with torch.no_grad():
        q = ansatz.raw(torch.as_tensor(np.asarray(params, dtype=float)))
        if tables is None:
            tables = ansatz.best_tables(f, [t.numpy() for t in q])
        W = _weights(f, ansatz, tables)
        return float(sum((w * qy).sum() for w, qy in zip(W, q)) + f.offset)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 50
    max_iters: int = 500
    ftol: float = 1e-13
    gtol: float = 1e-9
    max_rounds: int = 20
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.ftol <= 0 or self.gtol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


METHOD = "L-BFGS-B on torch autograd gradients, alternating with exact argmax over decoding tables"


@dataclass
class RestartTrace:
    restart: int
    value: float
    iterations: int
    rounds: int


@dataclass
class OptimizationResult:
    value: float
    strategy: Strategy
    params: np.ndarray
    tables: list[np.ndarray]
    trace: list[RestartTrace]
    metadata: dict


def _ascend(f, ansatz, x0, cfg) -> tuple[float, np.ndarray, list[np.ndarray], int, int]:
    x = np.asarray(x0, dtype=float)
    tables = ansatz.best_tables_from_params(f, x)
    total_it, rounds = 0, 0
    val = objective(f, ansatz, x, tables)
    for rounds in range(1, cfg.max_rounds + 1):
        def fun(z, tables=tables):
            v, g = objective_and_grad(f, ansatz, z, tables)
            return -v, -g
        res = scipy.optimize.minimize(fun, x, jac=True, method="L-BFGS-B",
                                      options={"maxiter": cfg.max_iters, "ftol": cfg.ftol,
                                               "gtol": cfg.gtol})
        x, val = res.x, -float(res.fun)
        total_it += int(res.nit)
        new = ansatz.best_tables_from_params(f, x)
        if all(np.array_equal(a, b) for a, b in zip(new, tables)):
            break
        tables = new
        val = objective(f, ansatz, x, tables)
    return val, x, tables, total_it, rounds


def maximize(f: LinearFunctional, ansatz: StrategyAnsatz, cfg: OptimizerConfig = OptimizerConfig(),
             initial: list[np.ndarray] | None = None,
             progress: Callable[[RestartTrace], None] | None = None) -> OptimizationResult:
    """Best value over ``cfg.restarts`` local ascents from uniform random starts in ``[-pi, pi]``.

    ``initial`` optionally prepends extra starting points (they do not count
    toward ``restarts``).  Ties go to the lowest restart index.
    """
    _check_dims(f, ansatz)
    rng = np.random.default_rng(cfg.seed)
    starts = [np.asarray(s, dtype=float) for s in (initial or [])]
    starts += [rng.uniform(-np.pi, np.pi, ansatz.n_params) for _ in range(cfg.restarts)]
    t0 = time.perf_counter()
    best = None
    trace = []
    for i, x0 in enumerate(starts):
        val, x, tables, nit, rounds = _ascend(f, ansatz, x0, cfg)
        rec = RestartTrace(i, val, nit, rounds)
        trace.append(rec)
        if progress:
            progress(rec)
        if best is None or val > best[0]:
            best = (val, x, tables)
    val, x, tables = best
    strategy = ansatz.decode(x, tables)
    meta = {
        "method": METHOD,
        "ansatz": ansatz.tag,
        "D": ansatz.D,
        "local_dims": list(ansatz.local_dims),
        "restarts": cfg.restarts,
        "seed": cfg.seed,
        "iterations": sum(t.iterations for t in trace),
        "seconds": time.perf_counter() - t0,
    }
    return OptimizationResult(val, strategy, x, tables, trace, meta)


def gradient_check(ansatz: StrategyAnsatz, f: LinearFunctional, params, h: float = 1e-5,
                   tables=None) -> float:
    """Max deviation between the autograd gradient and central differences."""
    params = np.asarray(params, dtype=float)
    if tables is None:
        tables = ansatz.best_tables_from_params(f, params)
    _, grad = objective_and_grad(f, ansatz, params, tables)
    fd = np.empty_like(params)
    for i in range(len(params)):
        e = np.zeros_like(params)
        e[i] = h
        fd[i] = (objective(f, ansatz, params + e, tables) - objective(f, ansatz, params - e, tables)) / (2 * h)
    return float(np.max(np.abs(grad - fd)))
