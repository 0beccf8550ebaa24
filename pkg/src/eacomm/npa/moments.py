"""Moment matrices, objectives and the affine SDPs they induce."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from ..tasks import LinearFunctional
from .algebra import (
    ZERO,
    Algebra,
    BellScenario,
    EAScenario,
    Poly,
    Word,
    letter_poly,
    poly_mul,
)

LEVELS = (1, "1+AB", 2, "2+AAB", 3)
INDEX_GUARD = 2000


class ScenarioError(ValueError):
    pass


def parse_level(level) -> int | str:
    if isinstance(level, str) and level.strip().upper() in ("1+AB", "2+AAB"):
        return level.strip().upper()
    lv = int(level)
    if lv not in LEVELS:
        raise ValueError(f"level must be one of {LEVELS}, got {level!r}")
    return lv


def index_monomials(alg: Algebra, level) -> list[Word]:
    level = parse_level(level)
    letters = range(len(alg))
    if level == "1+AB":
        raw = [()] + [(l,) for l in letters]
        raw += [(a, b) for a in alg.alice_ids() for b in alg.bob_ids()]
    elif level == "2+AAB":
        raw = [w for k in range(3) for w in itertools.product(letters, repeat=k)]
        raw += [(a, a2, b) for a in alg.alice_ids() for a2 in alg.alice_ids() for b in alg.bob_ids()]
    else:
        raw = [w for k in range(level + 1) for w in itertools.product(letters, repeat=k)]
    seen, out = set(), []
    for w in raw:
        c = alg.canonical(w)
        if c is ZERO or c in seen:
            continue
        seen.add(c)
        out.append(c)
        if len(out) > INDEX_GUARD:
            raise ScenarioError(f"moment matrix index exceeds {INDEX_GUARD} monomials")
    return sorted(out, key=lambda w: (len(w), w))


@dataclass
class MomentMatrix:
    """Class structure of a real moment matrix ``Gamma[i, j] = <w_i^dagger w_j>``.

    ``entry_class[i, j]`` is the class id of the entry or ``-1`` if the word
    reduces to zero.  Class 0 is the identity and is pinned to one.  The
    variables of the relaxation are ``y = offset_vector + basis @ z`` over
    classes; without symmetrization ``basis`` just selects every non-identity
    class.
    """

    algebra: Algebra
    level: int | str
    index: list[Word]
    classes: list[Word]
    entry_class: np.ndarray
    offset_vector: np.ndarray = field(repr=False)
    basis: sp.csr_matrix = field(repr=False)
    symmetrized: bool = False
    scenario: EAScenario | BellScenario | None = None
    nonadaptive: bool = False

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def n_variables(self) -> int:
        return self.basis.shape[1]

    @property
    def zero_set(self) -> list[tuple[int, int]]:
        return [tuple(ij) for ij in np.argwhere(self.entry_class < 0)]

    def class_id(self, word: Word) -> int:
        rep = self.algebra.representative(word)
        if rep is ZERO:
            raise KeyError("zero word has no class")
        try:
            return self._class_of[rep]
        except KeyError:
            raise ScenarioError(
                f"moment {self.algebra.format(rep)} not present at level {self.level}") from None

    def __post_init__(self):
        self._class_of = {w: k for k, w in enumerate(self.classes)}

    def class_vector(self, poly: Poly) -> np.ndarray:
        v = np.zeros(self.n_classes)
        for w, c in poly.items():
            v[self.class_id(w)] += c
        return v

    def indicator(self) -> sp.csr_matrix:
        """Sparse ``(n_classes, n*n)`` map from class values to ``vec(Gamma)``."""
        n = self.size
        flat = self.entry_class.reshape(-1)
        cols = np.flatnonzero(flat >= 0)
        return sp.csr_matrix((np.ones(len(cols)), (flat[cols], cols)), shape=(self.n_classes, n * n))

    def gamma(self, class_values: np.ndarray) -> np.ndarray:
        vals = np.append(np.asarray(class_values, dtype=float), 0.0)
        return vals[self.entry_class]


def _build_classes(alg: Algebra, index: list[Word]):
    n = len(index)
    entry = np.full((n, n), -1, dtype=int)
    classes: list[Word] = [()]
    lookup = {(): 0}
    for i in range(n):
        for j in range(i, n):
            rep = alg.representative(alg.product(index[i], index[j]))
            if rep is ZERO:
                continue
            k = lookup.get(rep)
            if k is None:
                k = lookup[rep] = len(classes)
                classes.append(rep)
            entry[i, j] = entry[j, i] = k
    return classes, entry


def build_moment_matrix(scenario: EAScenario | BellScenario, level=2, nonadaptive: bool = False,
                        symmetrize: bool = False) -> MomentMatrix:
    """Moment matrix for an EA scenario (Bob settings ``(y, m)``) or a plain Bell scenario.

    ``nonadaptive`` adds the commutation of Bob's operators sharing ``y``.
    ``symmetrize`` restricts the moments to those invariant under relabeling
    the message, ``m -> sigma(m)`` on both parties.
    """
    level = parse_level(level)
    if isinstance(scenario, EAScenario):
        bell = scenario.bell(nonadaptive)
    else:
        if nonadaptive or symmetrize:
            raise ScenarioError("nonadaptive/symmetrize need an entanglement-assisted scenario")
        bell = scenario
    alg = Algebra(bell)
    index = index_monomials(alg, level)
    classes, entry = _build_classes(alg, index)
    k = len(classes)
    offset = np.zeros(k)
    offset[0] = 1.0
    basis = sp.identity(k, format="csr")[:, 1:]
    mm = MomentMatrix(alg, level, index, classes, entry, offset, basis.tocsr(), False,
                      scenario, nonadaptive)
    if symmetrize:
        _symmetrize(mm, scenario)
    return mm


# ---------------------------------------------------------------------------
# symmetrization under message relabelings
# ---------------------------------------------------------------------------

def _relabel_letter(alg: Algebra, scen: EAScenario, letter_id: int, perm) -> Poly:
    l = alg.letters[letter_id]
    if l.party == 0:
        return letter_poly(alg, 0, l.setting, perm[l.outcome])
    y, m = divmod(l.setting, scen.D)
    return {(alg.letter_id(1, scen.bob_setting(y, perm[m]), l.outcome),): 1.0}


def relabeling_action(mm: MomentMatrix, perm) -> sp.csr_matrix:
    """Matrix ``R`` with ``(R y)[c] = <sigma(word_c)>`` in terms of the class values ``y``."""
    alg, scen = mm.algebra, mm.scenario
    rows, cols, vals = [], [], []
    for c, word in enumerate(mm.classes):
        poly: Poly = {(): 1.0}
        for l in word:
            poly = poly_mul(alg, poly, _relabel_letter(alg, scen, l, perm))
        for w, coef in poly.items():
            rows.append(c)
            cols.append(mm.class_id(w))
            vals.append(coef)
    k = mm.n_classes
    return sp.csr_matrix((vals, (rows, cols)), shape=(k, k))


def _symmetrize(mm: MomentMatrix, scen: EAScenario) -> None:
    perms = list(itertools.permutations(range(scen.D)))
    reynolds = sum(relabeling_action(mm, p) for p in perms) / len(perms)
    dense = reynolds.toarray()
    # columns of the projector spanning its range
    _, r, piv = scipy.linalg.qr(dense, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > 1e-9 * diag[0]))
    basis = dense[:, np.sort(piv[:rank])]
    # one basis vector carries the pinned identity, the rest vanish on it
    j0 = int(np.argmax(np.abs(basis[0])))
    b0 = basis[:, j0] / basis[0, j0]
    rest = np.delete(basis, j0, axis=1)
    rest = rest - np.outer(b0, rest[0])
    rest[np.abs(rest) < 1e-13] = 0.0
    b0[np.abs(b0) < 1e-13] = 0.0
    mm.offset_vector = b0
    mm.basis = sp.csr_matrix(rest)
    mm.symmetrized = True


# ---------------------------------------------------------------------------
# objectives and the SDP
# ---------------------------------------------------------------------------

@dataclass
class SdpProblem:
    """``maximize c.z + offset`` subject to ``G0 + sum_k z_k G_k >= 0``.

    ``G0`` is dense ``(n, n)``; ``G`` is a sparse ``(m, n*n)`` matrix whose
    row ``k`` is ``vec(G_k)``.
    """

    G0: np.ndarray
    G: sp.csr_matrix
    c: np.ndarray
    offset: float = 0.0

    @property
    def size(self) -> int:
        return self.G0.shape[0]

    @property
    def n_variables(self) -> int:
        return self.G.shape[0]

    def matrix(self, z: np.ndarray) -> np.ndarray:
        n = self.size
        return self.G0 + (self.G.T @ np.asarray(z)).reshape(n, n)

    def objective(self, z: np.ndarray) -> float:
        return float(self.c @ z + self.offset)


def bell_functional_from_linear(f: LinearFunctional, scen: EAScenario) -> np.ndarray:
    """Coefficients ``c[x, s, a, b]`` of ``p(a, b|x, s)`` with ``s = (y, m)`` and ``a = m``."""
    X, Y, B = f.dims
    if (X, Y) != (scen.X, scen.Y):
        raise ScenarioError(f"functional dims {f.dims} do not match scenario {scen}")
    for y in range(Y):
        if np.any(f.coeffs[:, y, scen.outcomes[y]:] != 0):
            raise ScenarioError("functional weights an outcome the scenario does not have")
    S = scen.Y * scen.D
    c = np.zeros((X, S, scen.D, max(scen.outcomes)))
    for x, y, b in np.ndindex(X, Y, min(B, max(scen.outcomes))):
        if f.coeffs[x, y, b]:
            for m in range(scen.D):
                c[x, scen.bob_setting(y, m), m, b] = f.coeffs[x, y, b]
    return c


def class_objective_from_bell(coeffs: np.ndarray, mm: MomentMatrix) -> np.ndarray:
    """Class-space vector of ``sum c[x, s, a, b] <A_{a|x} B_{b|s}>``."""
    alg = mm.algebra
    scen = alg.scenario
    v = np.zeros(mm.n_classes)
    for (x, s, a, b), coef in np.ndenumerate(coeffs):
        if coef == 0:
            continue
        if a >= scen.alice_outcomes[x] or b >= scen.bob_outcomes[s]:
            raise ScenarioError(f"coefficient on nonexistent outcome ({x}, {s}, {a}, {b})")
        poly = poly_mul(alg, letter_poly(alg, 0, x, a), letter_poly(alg, 1, s, b))
        v += coef * mm.class_vector(poly)
    return v


def chsh_coefficients() -> np.ndarray:
    """``E00 + E01 + E10 - E11`` as coefficients of ``p(a, b|x, y)``."""
    c = np.zeros((2, 2, 2, 2))
    for x, y, a, b in np.ndindex(2, 2, 2, 2):
        c[x, y, a, b] = (-1) ** (a + b) * (-1 if x == y == 1 else 1)
    return c


def _problem(mm: MomentMatrix, class_obj: np.ndarray, offset: float) -> SdpProblem:
    ind = mm.indicator()
    n = mm.size
    G0 = (ind.T @ mm.offset_vector).reshape(n, n)
    G = (mm.basis.T @ ind).tocsr()
    G.eliminate_zeros()
    c = mm.basis.T @ class_obj
    return SdpProblem(G0, G, np.asarray(c).ravel(), float(offset + class_obj @ mm.offset_vector))


def objective_from_functional(f: LinearFunctional, mm: MomentMatrix) -> SdpProblem:
    if not isinstance(mm.scenario, EAScenario):
        raise ScenarioError("a behavior functional needs an entanglement-assisted scenario")
    coeffs = bell_functional_from_linear(f, mm.scenario)
    return _problem(mm, class_objective_from_bell(coeffs, mm), f.offset)


def objective_from_bell(coeffs: np.ndarray, mm: MomentMatrix, offset: float = 0.0) -> SdpProblem:
    return _problem(mm, class_objective_from_bell(coeffs, mm), offset)


def moments_of_strategy(mm: MomentMatrix, alice_ops, bob_ops, state: np.ndarray) -> np.ndarray:
    """Class values realized by explicit projectors (used to test soundness).

    ``alice_ops[x][a]`` and ``bob_ops[s][b]`` are the full measurement
    operators on ``H_A`` and ``H_B``; ``state`` is a density matrix on
    ``H_A (x) H_B``.
    """
    alg = mm.algebra
    da = alice_ops[0][0].shape[0]
    db = bob_ops[0][0].shape[0]
    vals = np.zeros(mm.n_classes)
    for k, word in enumerate(mm.classes):
        a_op, b_op = np.eye(da, dtype=complex), np.eye(db, dtype=complex)
        for l in word:
            L = alg.letters[l]
            if L.party == 0:
                a_op = a_op @ alice_ops[L.setting][L.outcome]
            else:
                b_op = b_op @ bob_ops[L.setting][L.outcome]
        vals[k] = np.real(np.trace(state @ np.kron(a_op, b_op)))
    return vals
