"""Projector words for two-party moment relaxations.

A letter is a projector ``P_{o|s}`` of one party: setting ``s``, outcome ``o``.
The last outcome of every setting is not a letter; it is recovered from
completeness when expectation values are expanded.  Letters are numbered so
that every Alice letter precedes every Bob letter, and that numbering is the
total order used to sort commuting letters.

Reduction rules on words:

* Alice letters commute with Bob letters;
* ``PP -> P`` (idempotence);
* ``P_{o|s} P_{o'|s} -> 0`` for ``o != o'`` (orthogonality);
* optionally, Bob letters whose settings share a *commuting group* commute.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

ZERO = None
Word = tuple


class Letter(NamedTuple):
    party: int    # 0 Alice, 1 Bob
    setting: int
    outcome: int

    def __str__(self):
        return f"{'AB'[self.party]}{self.outcome}|{self.setting}"


@dataclass(frozen=True)
class BellScenario:
    """Two parties with per-setting outcome counts.

    ``bob_groups[s]`` labels which Bob settings mutually commute; ``None``
    disables the extra commutation.
    """

    alice_outcomes: tuple[int, ...]
    bob_outcomes: tuple[int, ...]
    bob_groups: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.bob_groups is not None and len(self.bob_groups) != len(self.bob_outcomes):
            raise ValueError("need one commuting-group label per Bob setting")


@dataclass(frozen=True)
class EAScenario:
    """Entanglement-assisted classical message: ``X`` inputs, ``D`` messages,
    ``Y`` questions for Bob with ``outcomes[y]`` answers each.

    Bob's settings in the equivalent Bell scenario are the pairs ``(y, m)``,
    numbered ``s = y * D + m``.
    """

    X: int
    outcomes: tuple[int, ...]
    D: int
    name: str = ""

    @property
    def Y(self) -> int:
        return len(self.outcomes)

    def bob_setting(self, y: int, m: int) -> int:
        return y * self.D + m

    def bell(self, nonadaptive: bool = False) -> BellScenario:
        bob = tuple(self.outcomes[y] for y in range(self.Y) for _ in range(self.D))
        groups = tuple(y for y in range(self.Y) for _ in range(self.D)) if nonadaptive else None
        return BellScenario((self.D,) * self.X, bob, groups)


SCENARIOS = {
    "chsh": BellScenario((2, 2), (2, 2)),
    "rac-bit": EAScenario(4, (2, 2), 2, "rac-bit"),
    "rac-trit": EAScenario(4, (2, 2), 3, "rac-trit"),
    "facet-bit": EAScenario(3, (2, 3), 2, "facet-bit"),
}


class Algebra:
    """Letters of a :class:`BellScenario` and canonical forms of words over them."""

    def __init__(self, scenario: BellScenario):
        self.scenario = scenario
        letters = []
        for party, outs in ((0, scenario.alice_outcomes), (1, scenario.bob_outcomes)):
            for s, n in enumerate(outs):
                letters.extend(Letter(party, s, o) for o in range(n - 1))
        self.letters: tuple[Letter, ...] = tuple(letters)
        self.index = {l: i for i, l in enumerate(letters)}
        self.party = np.array([l.party for l in letters], dtype=int)
        # global setting id: distinct between parties
        self.setting = np.array([l.setting + (0 if l.party == 0 else 10**6) for l in letters])
        groups = scenario.bob_groups
        self.group = np.array([
            -1 if l.party == 0 or groups is None else groups[l.setting] for l in letters])
        self._memo: dict[Word, Word | None] = {}

    def __len__(self):
        return len(self.letters)

    def letter_id(self, party: int, setting: int, outcome: int) -> int:
        return self.index[Letter(party, setting, outcome)]

    def alice_ids(self) -> list[int]:
        return [i for i, l in enumerate(self.letters) if l.party == 0]

    def bob_ids(self) -> list[int]:
        return [i for i, l in enumerate(self.letters) if l.party == 1]

    def format(self, word: Word | None) -> str:
        if word is ZERO:
            return "0"
        return " ".join(str(self.letters[i]) for i in word) or "1"

    # -- canonical form -------------------------------------------------

    def _reduce_plain(self, word: list[int]) -> list[int] | None:
        out: list[int] = []
        for l in word:
            if out and self.setting[out[-1]] == self.setting[l]:
                if out[-1] == l:
                    continue
                return ZERO
            out.append(l)
        return out

    def _reduce_grouped(self, word: list[int]) -> list[int] | None:
        out: list[int] = []
        i = 0
        while i < len(word):
            g = self.group[word[i]]
            if g < 0:
                if out and self.setting[out[-1]] == self.setting[word[i]]:
                    if out[-1] != word[i]:
                        return ZERO
                else:
                    out.append(word[i])
                i += 1
                continue
            j = i
            while j < len(word) and self.group[word[j]] == g:
                j += 1
            run = sorted(set(word[i:j]))
            settings = [self.setting[l] for l in run]
            if len(set(settings)) != len(settings):
                return ZERO
            out.extend(run)
            i = j
        return out

    def canonical(self, word: Sequence[int]) -> Word | None:
        """Normal form of ``word`` or ``None`` if it reduces to the zero operator."""
        key = tuple(word)
        if key in self._memo:
            return self._memo[key]
        alice = [l for l in key if self.party[l] == 0]
        bob = [l for l in key if self.party[l] == 1]
        ra = self._reduce_plain(alice)
        rb = ZERO if ra is ZERO else (
            self._reduce_plain(bob) if self.scenario.bob_groups is None else self._reduce_grouped(bob))
        res = ZERO if rb is ZERO else tuple(ra + rb)
        self._memo[key] = res
        return res

    def adjoint(self, word: Word) -> Word:
        return tuple(reversed(word))

    def product(self, u: Word, v: Word) -> Word | None:
        """Canonical form of ``u^dagger v``."""
        return self.canonical(self.adjoint(u) + tuple(v))

    def representative(self, word: Word | None) -> Word | None:
        """Canonical class of a real moment: ``w`` and ``w^dagger`` are identified."""
        if word is ZERO:
            return ZERO
        c = self.canonical(word)
        if c is ZERO:
            return ZERO
        d = self.canonical(self.adjoint(c))
        return min(c, d, key=lambda w: (len(w), w))

    # -- single-step rewriting (independent of ``canonical``) ------------

    def applicable_rules(self, word: Sequence[int]) -> list[tuple[str, int]]:
        rules = []
        for i in range(len(word) - 1):
            a, b = word[i], word[i + 1]
            if self.party[a] == 1 and self.party[b] == 0:
                rules.append(("swap-party", i))
            elif a == b:
                rules.append(("idempotent", i))
            elif self.setting[a] == self.setting[b]:
                rules.append(("orthogonal", i))
            elif self.group[a] >= 0 and self.group[a] == self.group[b] and a > b:
                rules.append(("swap-commuting", i))
        return rules

    def rewrite(self, word: Sequence[int], rng: np.random.Generator | None = None,
                max_steps: int = 10_000) -> Word | None:
        """Apply reduction rules one at a time, in random order, until none applies."""
        w = list(word)
        for _ in range(max_steps):
            rules = self.applicable_rules(w)
            if not rules:
                return tuple(w)
            kind, i = rules[rng.integers(len(rules))] if rng is not None else rules[0]
            if kind == "orthogonal":
                return ZERO
            if kind == "idempotent":
                del w[i + 1]
            else:
                w[i], w[i + 1] = w[i + 1], w[i]
        raise RuntimeError("rewriting did not terminate")


# ---------------------------------------------------------------------------
# operator polynomials
# ---------------------------------------------------------------------------

Poly = dict  # Word -> float


def letter_poly(alg: Algebra, party: int, setting: int, outcome: int) -> Poly:
    """``P_{o|s}`` as a polynomial in letters; the eliminated outcome is ``1 - sum``."""
    n = (alg.scenario.alice_outcomes if party == 0 else alg.scenario.bob_outcomes)[setting]
    if not 0 <= outcome < n:
        raise ValueError(f"outcome {outcome} outside range({n}) for setting {setting}")
    if outcome < n - 1:
        return {(alg.letter_id(party, setting, outcome),): 1.0}
    poly = {(): 1.0}
    for o in range(n - 1):
        poly[(alg.letter_id(party, setting, o),)] = -1.0
    return poly


def poly_mul(alg: Algebra, p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for u, a in p.items():
        for v, b in q.items():
            w = alg.canonical(u + v)
            if w is ZERO:
                continue
            out[w] = out.get(w, 0.0) + a * b
    return {w: c for w, c in out.items() if c != 0}
