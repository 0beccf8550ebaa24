"""Dense complex linear algebra and qubit/qudit primitives.

Everything here works on plain ``numpy`` arrays; the small wrapper classes
(:class:`DensityState`, :class:`Povm`, :class:`KrausChannel`) validate their
invariants once at construction and are treated as immutable afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

STRUCT_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (X, Y, Z)

PHI_PLUS = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)


class InvariantError(ValueError):
    """A quantum object violates one of its structural invariants."""

    def __init__(self, message: str, violation: float = float("nan")):
        super().__init__(message)
        self.violation = violation


# ---------------------------------------------------------------------------
# matrix predicates
# ---------------------------------------------------------------------------

def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {m.shape}")
    return m


def hermiticity_error(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T), initial=0.0))


def is_hermitian(a: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    a = as_matrix(a)
    return a.shape[0] == a.shape[1] and hermiticity_error(a) <= tol


def min_eigenvalue(a: np.ndarray) -> float:
    a = as_matrix(a)
    return float(np.linalg.eigvalsh((a + a.conj().T) / 2)[0])


def is_psd(a: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    return is_hermitian(a, tol) and min_eigenvalue(a) >= -tol


def is_unitary(a: np.ndarray, tol: float = STRUCT_TOL) -> bool:
    a = as_matrix(a)
    if a.shape[0] != a.shape[1]:
        return False
    return float(np.max(np.abs(a.conj().T @ a - np.eye(a.shape[0])))) <= tol


def operator_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def kron(*mats) -> np.ndarray:
    """Kronecker product of any number of matrices (or vectors)."""
    return reduce(np.kron, [np.asarray(m, dtype=complex) for m in mats])


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def inv_sqrt_psd(s: np.ndarray) -> np.ndarray:
    w, u = np.linalg.eigh(s)
    return (u / np.sqrt(w)) @ u.conj().T


# ---------------------------------------------------------------------------
# quantum objects
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DensityState:
    """A density operator on a tensor product of spaces with dimensions ``dims``."""

    matrix: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = tuple(int(d) for d in self.dims) or (m.shape[0],)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)
        if m.shape[0] != m.shape[1] or int(np.prod(dims)) != m.shape[0]:
            raise InvariantError(f"dims {dims} incompatible with matrix shape {m.shape}")
        herm = hermiticity_error(m)
        if herm > STRUCT_TOL:
            raise InvariantError("state is not Hermitian", herm)
        lam = min_eigenvalue(m)
        if lam < -STRUCT_TOL:
            raise InvariantError("state is not positive semidefinite", -lam)
        tr_err = abs(np.trace(m) - 1)
        if tr_err > STRUCT_TOL:
            raise InvariantError("state trace differs from 1", tr_err)

    @classmethod
    def pure(cls, vec, dims: Sequence[int] = ()) -> "DensityState":
        v = np.asarray(vec, dtype=complex).reshape(-1)
        v = v / np.linalg.norm(v)
        return cls(projector(v), tuple(dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op: np.ndarray) -> float:
        return float(np.real(np.trace(self.matrix @ op)))


def maximally_entangled(d: int = 2) -> DensityState:
    v = np.zeros(d * d, dtype=complex)
    v[[i * d + i for i in range(d)]] = 1
    return DensityState.pure(v, (d, d))


def phi_plus() -> DensityState:
    return maximally_entangled(2)


def partial_trace(state: DensityState | np.ndarray, keep: Sequence[int],
                  dims: Sequence[int] | None = None):
    """Trace out every subsystem not listed in ``keep``.

    Accepts a :class:`DensityState` (returns one) or a raw operator together
    with ``dims`` (returns an array), so it can also reduce POVM elements.
    """
    if isinstance(state, DensityState):
        rho, dims = state.matrix, state.dims
    else:
        rho = as_matrix(state)
        if dims is None:
            raise ValueError("dims required for a raw matrix")
    dims = tuple(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError(f"keep={keep} outside subsystems 0..{n - 1}")
    t = rho.reshape(dims + dims)
    traced = [k for k in range(n) if k not in keep]
    # trace highest index first so axis positions stay valid
    for cur_n, k in enumerate(sorted(traced, reverse=True)):
        nn = n - cur_n
        t = np.trace(t, axis1=k, axis2=k + nn)
    kd = tuple(dims[k] for k in keep)
    d = int(np.prod(kd)) if kd else 1
    out = t.reshape(d, d)
    if isinstance(state, DensityState):
        return DensityState(out, kd or (1,))
    return out


@dataclass(frozen=True)
class Povm:
    """A measurement: PSD elements summing to the identity."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        els = tuple(as_matrix(e) for e in self.elements)
        if not els:
            raise InvariantError("POVM has no elements")
        object.__setattr__(self, "elements", els)
        d = els[0].shape[0]
        for e in els:
            if e.shape != (d, d):
                raise InvariantError("POVM elements have inconsistent shapes")
            herm = hermiticity_error(e)
            if herm > STRUCT_TOL:
                raise InvariantError("POVM element is not Hermitian", herm)
            lam = min_eigenvalue(e)
            if lam < -STRUCT_TOL:
                raise InvariantError("POVM element is not positive semidefinite", -lam)
        err = completeness_error(els)
        if err > STRUCT_TOL:
            raise InvariantError("POVM elements do not sum to identity", err)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.elements)

    def __len__(self):
        return len(self.elements)

    def __getitem__(self, b):
        return self.elements[b]

    def probabilities(self, rho) -> np.ndarray:
        r = rho.matrix if isinstance(rho, DensityState) else as_matrix(rho)
        return np.array([np.real(np.trace(r @ e)) for e in self.elements])

    def is_projective(self, tol: float = STRUCT_TOL) -> bool:
        return all(np.max(np.abs(e @ e - e)) <= tol for e in self.elements)

    def padded(self, n: int) -> "Povm":
        """The same measurement with zero elements appended up to ``n`` outcomes."""
        extra = n - len(self.elements)
        if extra < 0:
            raise ValueError("cannot pad to fewer outcomes")
        zero = np.zeros((self.dim, self.dim), dtype=complex)
        return Povm(self.elements + (zero,) * extra)


def completeness_error(elements) -> float:
    total = sum(elements)
    return float(np.max(np.abs(total - np.eye(total.shape[0]))))


@dataclass(frozen=True)
class KrausChannel:
    """A CPTP map given by Kraus operators of shape ``(d_out, d_in)``."""

    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(as_matrix(k) for k in self.kraus_ops)
        if not ks:
            raise InvariantError("channel has no Kraus operators")
        shape = ks[0].shape
        if any(k.shape != shape for k in ks):
            raise InvariantError("Kraus operators have inconsistent shapes")
        object.__setattr__(self, "kraus_ops", ks)
        s = sum(k.conj().T @ k for k in ks)
        err = float(np.max(np.abs(s - np.eye(shape[1]))))
        if err > STRUCT_TOL:
            raise InvariantError("Kraus operators are not trace preserving", err)

    @classmethod
    def unitary(cls, u) -> "KrausChannel":
        return cls((as_matrix(u),))

    @property
    def dim_in(self) -> int:
        return self.kraus_ops[0].shape[1]

    @property
    def dim_out(self) -> int:
        return self.kraus_ops[0].shape[0]

    def apply(self, rho: np.ndarray, dims: Sequence[int], subsystem: int = 0) -> np.ndarray:
        """Apply the channel to one tensor factor of ``rho``; returns the new matrix."""
        out = 0
        for k in self.kraus_ops:
            ops = [np.eye(d) for d in dims]
            ops[subsystem] = k
            kk = kron(*ops)
            out = out + kk @ rho @ kk.conj().T
        return out


# ---------------------------------------------------------------------------
# Bloch-sphere calculus
# ---------------------------------------------------------------------------

def bloch_operator(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v[0] * X + v[1] * Y + v[2] * Z


def qubit_from_bloch(n) -> DensityState:
    """The qubit state ``(1 + n.sigma)/2``; ``|n| <= 1``."""
    n = np.asarray(n, dtype=float)
    if np.linalg.norm(n) > 1 + STRUCT_TOL:
        raise InvariantError("Bloch vector longer than 1", float(np.linalg.norm(n) - 1))
    return DensityState((I2 + bloch_operator(n)) / 2)


def povm_element_from_bloch(weight: float, v) -> np.ndarray:
    """The operator ``(weight*1 + v.sigma)/2``, PSD iff ``weight >= |v|``."""
    v = np.asarray(v, dtype=float)
    if weight < np.linalg.norm(v) - STRUCT_TOL:
        raise InvariantError("POVM element not PSD: weight < |v|",
                             float(np.linalg.norm(v) - weight))
    return (weight * I2 + bloch_operator(v)) / 2


def bloch_of(op: np.ndarray) -> tuple[float, np.ndarray]:
    """Inverse of :func:`povm_element_from_bloch`: ``(weight, v)`` of a 2x2 Hermitian."""
    op = as_matrix(op)
    w = float(np.real(np.trace(op)))
    v = np.array([np.real(np.trace(op @ p)) for p in PAULIS])
    return w, v


def observable_povm(direction) -> Povm:
    """Projective measurement of ``d.sigma``; outcome 0 is +1, outcome 1 is -1."""
    d = np.asarray(direction, dtype=float)
    err = abs(np.linalg.norm(d) - 1)
    if err > STRUCT_TOL:
        raise InvariantError("measurement direction is not a unit vector", err)
    op = bloch_operator(d)
    return Povm(((I2 + op) / 2, (I2 - op) / 2))


def unit_vector(theta: float, phi: float) -> np.ndarray:
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


# ---------------------------------------------------------------------------
# random objects (tests, sampling)
# ---------------------------------------------------------------------------

def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_state(d: int, rng: np.random.Generator, dims: Sequence[int] = ()) -> DensityState:
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return DensityState.pure(v, dims or (d,))


def random_mixed_state(d: int, rng: np.random.Generator, dims: Sequence[int] = (),
                       rank: int | None = None) -> DensityState:
    g = rng.normal(size=(d, rank or d)) + 1j * rng.normal(size=(d, rank or d))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return DensityState(rho / np.trace(rho).real, dims or (d,))


def random_povm(d: int, n: int, rng: np.random.Generator, rank: int | None = None) -> Povm:
    ts = [rng.normal(size=(rank or d, d)) + 1j * rng.normal(size=(rank or d, d)) for _ in range(n)]
    ms = [t.conj().T @ t for t in ts]
    s_half = inv_sqrt_psd(sum(ms))
    els = [s_half @ m @ s_half for m in ms]
    els = [(e + e.conj().T) / 2 for e in els]
    return Povm(tuple(els))


def random_projective(d: int, n: int, rng: np.random.Generator) -> Povm:
    """A random projective measurement with ``n`` outcomes (some possibly zero)."""
    u = random_unitary(d, rng)
    labels = rng.integers(0, n, size=d)
    els = []
    for b in range(n):
        cols = u[:, labels == b]
        els.append(cols @ cols.conj().T)
    return Povm(tuple(els))


def random_channel(d_in: int, d_out: int, rng: np.random.Generator, n_kraus: int = 2) -> KrausChannel:
    g = rng.normal(size=(n_kraus * d_out, d_in)) + 1j * rng.normal(size=(n_kraus * d_out, d_in))
    q, _ = np.linalg.qr(g)
    return KrausChannel(tuple(q[k * d_out:(k + 1) * d_out, :] for k in range(n_kraus)))

