"""Session-based next-click scorers: AR, first-order MC, SR and SKNN.

Every model is trained once from a batch of item sequences and is read-only
afterwards. ``score(prefix)`` returns a ranked list of ``(item, score)``
pairs, highest score first, ties broken by ascending item id, with items
already in the prefix removed.
"""

from __future__ import annotations

import heapq
import math
from collections import Counter, defaultdict
from typing import Callable, Iterable, Optional, Sequence, TextIO

from locrec.model import Method

RankedList = list[tuple[str, float]]


def rank_scores(scores: dict, exclude=(), n: Optional[int] = None) -> RankedList:
    """Order a score map by (score desc, id asc), dropping excluded and zero entries."""
    items = [(i, s) for i, s in scores.items() if s > 0 and i not in exclude]
    key = lambda p: (-p[1], p[0])
    if n is not None and n < len(items):
        return heapq.nsmallest(n, items, key=key)
    items.sort(key=key)
    return items


class SessionModel:
    """Shared plumbing. Subclasses implement ``_fit`` and ``_scores``."""

    method: Method

    def __init__(self):
        self.items: frozenset = frozenset()

    def fit(self, sessions: Iterable[Sequence[str]]):
        sessions = [tuple(s) for s in sessions]
        self.items = frozenset(i for s in sessions for i in s)
        self._fit(sessions)
        return self

    def knows(self, item: str) -> bool:
        return item in self.items

    def score(self, prefix: Sequence[str], n: Optional[int] = None) -> RankedList:
        if not prefix:
            raise ValueError("prefix must be non-empty")
        return rank_scores(self._scores(prefix), exclude=set(prefix), n=n)

    def _fit(self, sessions):
        raise NotImplementedError

    def _scores(self, prefix) -> dict:
        raise NotImplementedError


class PairTableModel(SessionModel):
    """Models that score candidates from a (last item -> candidate) table."""

    def __init__(self):
        super().__init__()
        self.table: dict[str, dict[str, float]] = {}

    def _scores(self, prefix):
        return self.table.get(prefix[-1], {})

    def pairs(self):
        for a in sorted(self.table):
            row = self.table[a]
            for b in sorted(row):
                yield a, b, row[b]


class AssociationRules(PairTableModel):
    """Size-two rules: every later item in a session, regardless of gap."""

    method = Method.AR

    def _fit(self, sessions):
        table = defaultdict(Counter)
        for s in sessions:
            for i, a in enumerate(s[:-1]):
                table[a].update(s[i + 1 :])
        self.table = {a: dict(row) for a, row in table.items()}


class MarkovChain(PairTableModel):
    """First-order transitions. Raw counts rank the same as row-normalized probabilities."""

    method = Method.MC

    def _fit(self, sessions):
        table = defaultdict(Counter)
        for s in sessions:
            for a, b in zip(s, s[1:]):
                table[a][b] += 1
        self.table = {a: dict(row) for a, row in table.items()}

    def probabilities(self, item: str) -> dict[str, float]:
        row = self.table.get(item, {})
        total = sum(row.values())
        return {b: c / total for b, c in row.items()}


def inverse_decay(gap: int) -> float:
    return 1.0 / gap


def linear_decay(gap: int) -> float:
    return max(0.0, 1.0 - 0.1 * (gap - 1))


SR_DECAYS: dict[str, Callable[[int], float]] = {"inverse": inverse_decay, "linear": linear_decay}


class SequentialRules(PairTableModel):
    """Forward rules up to ``max_back`` steps apart, weighted by ``decay(gap)``.

    Weights are summed with ``math.fsum`` so the result does not depend on the
    order sessions arrive in.
    """

    method = Method.SR

    def __init__(self, max_back: int = 10, decay: str = "inverse"):
        super().__init__()
        if max_back < 1:
            raise ValueError("max_back must be >= 1")
        if decay not in SR_DECAYS:
            raise ValueError(f"unknown SR decay {decay!r}; choose from {sorted(SR_DECAYS)}")
        self.max_back = max_back
        self.decay = decay

    def _fit(self, sessions):
        weight = SR_DECAYS[self.decay]
        gaps = defaultdict(Counter)
        for s in sessions:
            for i, a in enumerate(s):
                for g in range(1, min(self.max_back, len(s) - 1 - i) + 1):
                    gaps[(a, s[i + g])][g] += 1
        table = defaultdict(dict)
        for (a, b), hist in gaps.items():
            w = math.fsum(weight(g) for g, c in hist.items() for _ in range(c))
            if w > 0:
                table[a][b] = w
        self.table = dict(table)


class SessionKNN(SessionModel):
    """Session-based kNN over binary item sets with cosine similarity.

    Neighbor ids are positions in the training order; equal similarities are
    broken by ascending position.
    """

    method = Method.SKNN

    def __init__(self, k: int = 20):
        super().__init__()
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.sessions: list[frozenset] = []
        self.index: dict[str, list[int]] = {}

    def _fit(self, sessions):
        self.sessions = [frozenset(s) for s in sessions]
        index = defaultdict(list)
        for sid, items in enumerate(self.sessions):
            for item in items:
                index[item].append(sid)
        self.index = dict(index)

    def neighbors(self, prefix: Sequence[str]) -> list[tuple[int, float]]:
        current = set(prefix)
        overlap = Counter()
        for item in current:
            overlap.update(self.index.get(item, ()))
        norm = math.sqrt(len(current))
        sims = [(sid, n / (norm * math.sqrt(len(self.sessions[sid])))) for sid, n in overlap.items()]
        return heapq.nsmallest(self.k, sims, key=lambda p: (-p[1], p[0]))

    def _scores(self, prefix):
        contributions = defaultdict(list)
        for sid, sim in self.neighbors(prefix):
            for item in self.sessions[sid]:
                contributions[item].append(sim)
        return {item: math.fsum(v) for item, v in contributions.items()}

    def pairs(self):
        for sid, items in enumerate(self.sessions):
            for item in sorted(items):
                yield str(sid), item, 1


def make_model(method, sr_decay: str = "inverse", sr_max_back: int = 10, knn_k: int = 20) -> SessionModel:
    method = Method.parse(method) if isinstance(method, str) else method
    if method is Method.AR:
        return AssociationRules()
    if method is Method.MC:
        return MarkovChain()
    if method is Method.SR:
        return SequentialRules(max_back=sr_max_back, decay=sr_decay)
    return SessionKNN(k=knn_k)


def dump_model(model: SessionModel, fh: TextIO) -> None:
    """Debug dump, one ``antecedent<TAB>consequent<TAB>score`` line per entry, sorted."""
    for a, b, s in model.pairs():
        fh.write(f"{a}\t{b}\t{s:g}\n" if isinstance(s, float) else f"{a}\t{b}\t{s}\n")
