"""Linear functionals on behaviors and brute-force classical bounds."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .protocol import Behavior

ENUMERATION_GUARD = 10**8


@dataclass(frozen=True)
class LinearFunctional:
    """``value(p) = sum_{x,y,b} coeffs[x, y, b] p(b|x,y) + offset``.

    ``outcomes[y]`` is the number of outputs Bob may actually produce for
    ``y``; behaviors are padded to ``max(outcomes)`` with zeros beyond it.
    """

    coeffs: np.ndarray
    offset: float = 0.0
    outcomes: tuple[int, ...] = ()
    name: str = ""
    input_distribution: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float)
        if c.ndim != 3:
            raise ValueError(f"coefficient tensor must be 3-d, got shape {c.shape}")
        outs = tuple(int(o) for o in self.outcomes) or (c.shape[2],) * c.shape[1]
        if len(outs) != c.shape[1] or max(outs) > c.shape[2]:
            raise ValueError("outcome counts do not match the coefficient tensor")
        for y, o in enumerate(outs):
            if np.any(c[:, y, o:] != 0):
                raise ValueError(f"nonzero coefficient on an impossible outcome for y={y}")
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "outcomes", outs)

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.coeffs.shape

    def scaled(self, k: float) -> "LinearFunctional":
        return LinearFunctional(k * self.coeffs, k * self.offset, self.outcomes, self.name)


def evaluate(f: LinearFunctional, p: Behavior | np.ndarray) -> float:
    table = p.p if isinstance(p, Behavior) else np.asarray(p, dtype=float)
    if table.shape != f.dims:
        raise ValueError(f"behavior shape {table.shape} does not match functional {f.dims}")
    return float(np.sum(f.coeffs * table) + f.offset)


def rac_bit(x: int, y: int, num_bits: int = 2) -> int:
    """Bit ``y`` of input ``x``; bit 0 is the most significant (``x = 2*x1 + x2``)."""
    return (x >> (num_bits - 1 - y)) & 1


def rac_functional(num_bits: int = 2) -> LinearFunctional:
    """Average success probability of the ``num_bits -> 1`` binary random access code."""
    X, Y = 2**num_bits, num_bits
    c = np.zeros((X, Y, 2))
    for x in range(X):
        for y in range(Y):
            c[x, y, rac_bit(x, y, num_bits)] = 1 / (X * Y)
    return LinearFunctional(c, 0.0, (2,) * Y, name="rac")


# (sign, b, x, y) with the printed one-based labels of p(b|x,y).
FACET_TERMS = (
    (-1, 1, 1, 1), (+1, 1, 2, 1), (+1, 1, 3, 1),
    (-1, 1, 1, 2), (-1, 1, 2, 2), (+1, 1, 3, 2),
    (-1, 2, 1, 2), (+1, 2, 2, 2), (-1, 2, 3, 2),
)


def facet_functional() -> LinearFunctional:
    """Three preparations, two measurements with two and three outcomes.

    The sixth term is ``+p(1|3,2)``; this is the form consistent with the
    reduced expression ``-p(1|11)+p(1|21)+p(1|31)-2p(1|22)+2p(1|32)-1``.
    """
    c = np.zeros((3, 2, 3))
    for sign, b, x, y in FACET_TERMS:
        c[x - 1, y - 1, b - 1] += sign
    return LinearFunctional(c, 0.0, (2, 3), name="facet")


def mesd_functional(n_states: int) -> LinearFunctional:
    c = np.zeros((n_states, 1, n_states))
    for x in range(n_states):
        c[x, 0, x] = 1 / n_states
    return LinearFunctional(c, 0.0, (n_states,), name="mesd")


def mesd_rate(p: Behavior | np.ndarray) -> float:
    """Average probability of guessing ``x`` correctly with a single measurement."""
    table = p.p if isinstance(p, Behavior) else np.asarray(p, dtype=float)
    X, Y, B = table.shape
    if Y != 1 or B != X:
        raise ValueError(f"discrimination needs Y=1 and B=X, got {table.shape}")
    return float(np.mean([table[x, 0, x] for x in range(X)]))


def zero_functional(dims: tuple[int, int, int], offset: float = 0.0) -> LinearFunctional:
    return LinearFunctional(np.zeros(dims), offset)


TASKS = {
    "rac": rac_functional,
    "facet": facet_functional,
    "mesd": lambda: mesd_functional(4),
}


# ---------------------------------------------------------------------------
# classical messages with shared randomness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DeterministicStrategy:
    """Encoding ``m = encoding[x]`` and decoding ``b = decoding[y, m]``."""

    encoding: tuple[int, ...]
    decoding: np.ndarray

    def behavior(self, n_outputs: int) -> Behavior:
        X, (Y, _) = len(self.encoding), self.decoding.shape
        p = np.zeros((X, Y, n_outputs))
        for x, m in enumerate(self.encoding):
            for y in range(Y):
                p[x, y, self.decoding[y, m]] = 1
        return Behavior(p)


@dataclass(frozen=True)
class ClassicalBound:
    value: float
    strategy: DeterministicStrategy


def _check_guard(X: int, Y: int, B: int, D: int) -> None:
    size = D**X * B**(Y * D)
    if size > ENUMERATION_GUARD:
        raise ValueError(f"enumeration of {size:.3g} deterministic strategies exceeds guard")


def classical_bound(f: LinearFunctional, message_size: int) -> ClassicalBound:
    """Exact maximum of ``f`` over classical ``D``-valued messages and shared randomness.

    Linear objectives are maximized at deterministic vertices.  For a fixed
    encoding the best decoder is chosen independently for every ``(y, m)``.
    """
    X, Y, B = f.dims
    D = int(message_size)
    _check_guard(X, Y, B, D)
    mask = np.array([[b < f.outcomes[y] for b in range(B)] for y in range(Y)])
    best_val, best = -np.inf, None
    for enc in itertools.product(range(D), repeat=X):
        enc_arr = np.array(enc)
        # score[y, m, b] = sum_{x: e(x)=m} c[x, y, b]
        score = np.stack([f.coeffs[enc_arr == m].sum(axis=0) for m in range(D)], axis=1)
        score = np.where(mask[:, None, :], score, -np.inf)
        dec = score.argmax(axis=2)
        val = float(score.max(axis=2).sum()) + f.offset
        if val > best_val + 1e-12:
            best_val, best = val, DeterministicStrategy(enc, dec)
    return ClassicalBound(best_val, best)


def deterministic_behaviors(X: int, outcomes: tuple[int, ...], message_size: int) -> np.ndarray:
    """All deterministic classical-message behaviors, shape ``(N, X, Y, max B)``."""
    Y, B, D = len(outcomes), max(outcomes), message_size
    decoders = list(itertools.product(*[range(outcomes[y]) for y in range(Y) for _ in range(D)]))
    _check_guard(X, Y, B, D)
    rows = set()
    for enc in itertools.product(range(D), repeat=X):
        for dec in decoders:
            d = np.array(dec).reshape(Y, D)
            rows.add(tuple(int(d[y, enc[x]]) for x in range(X) for y in range(Y)))
    out = np.zeros((len(rows), X, Y, B))
    for k, row in enumerate(sorted(rows)):
        for i, b in enumerate(row):
            out[k, i // Y, i % Y, b] = 1
    return out


def _free_coordinates(p: np.ndarray, outcomes: tuple[int, ...]) -> np.ndarray:
    """Drop the last allowed outcome per ``(x, y)``, which normalization fixes."""
    cols = [p[:, :, y, :outcomes[y] - 1].reshape(len(p), -1) for y in range(len(outcomes))]
    return np.concatenate(cols, axis=1)


def affine_rank(points: np.ndarray, tol: float = 1e-9) -> int:
    if len(points) == 0:
        return -1
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=tol)) if len(points) > 1 else 0


@dataclass(frozen=True)
class FacetCertificate:
    bound: float
    n_tight: int
    face_dim: int
    polytope_dim: int

    @property
    def is_facet(self) -> bool:
        return self.face_dim == self.polytope_dim - 1


def facet_certificate(f: LinearFunctional, message_size: int, tol: float = 1e-9) -> FacetCertificate:
    """Check that ``f <= max`` is a facet of the classical-message polytope."""
    X, _, _ = f.dims
    verts = deterministic_behaviors(X, f.outcomes, message_size)
    vals = np.einsum("nxyb,xyb->n", verts, f.coeffs) + f.offset
    bound = float(vals.max())
    tight = verts[vals >= bound - tol]
    free_all = _free_coordinates(verts, f.outcomes)
    free_tight = _free_coordinates(tight, f.outcomes)
    return FacetCertificate(bound, len(tight), affine_rank(free_tight), affine_rank(free_all))
