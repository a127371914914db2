"""Brute-force reference implementations used as test oracles.

These deliberately avoid the package's tables and indexes: every score is
recomputed from scratch by enumerating the training sessions.
"""

import math


def _rank(scores, prefix):
    seen = set(prefix)
    kept = [(i, s) for i, s in scores.items() if s > 0 and i not in seen]
    return sorted(kept, key=lambda kv: (-kv[1], kv[0]))


def ar(sessions, prefix):
    last = prefix[-1]
    scores = {}
    for s in sessions:
        for i in range(len(s)):
            for j in range(len(s)):
                if j > i and s[i] == last:
                    scores[s[j]] = scores.get(s[j], 0) + 1
    return _rank(scores, prefix)


def mc(sessions, prefix):
    last = prefix[-1]
    scores = {}
    for s in sessions:
        for i in range(len(s) - 1):
            if s[i] == last:
                scores[s[i + 1]] = scores.get(s[i + 1], 0) + 1
    return _rank(scores, prefix)


def sr(sessions, prefix, max_back=10, weight=lambda g: 1.0 / g):
    last = prefix[-1]
    parts = {}
    for s in sessions:
        for i in range(len(s)):
            for j in range(i + 1, len(s)):
                if s[i] == last and j - i <= max_back:
                    parts.setdefault(s[j], []).append(weight(j - i))
    return _rank({k: math.fsum(v) for k, v in parts.items()}, prefix)


def sknn(sessions, prefix, k=20):
    current = set(prefix)
    sims = []
    for sid, s in enumerate(sessions):
        items = set(s)
        common = len(current & items)
        if common:
            sims.append((sid, common / (math.sqrt(len(current)) * math.sqrt(len(items)))))
    sims.sort(key=lambda p: (-p[1], p[0]))
    parts = {}
    for sid, sim in sims[:k]:
        for item in set(sessions[sid]):
            parts.setdefault(item, []).append(sim)
    return _rank({i: math.fsum(v) for i, v in parts.items()}, prefix)


def metrics(ranks, k):
    """Per-event loop computing (HR, MRR, NDCG) at cutoff ``k``; None is a miss."""
    hr = mrr = ndcg = 0.0
    for r in ranks:
        if r is not None and r <= k:
            hr += 1
            mrr += 1 / r
            ndcg += 1 / math.log(r + 1, 2)
    n = len(ranks)
    return (hr / n, mrr / n, ndcg / n) if n else (0.0, 0.0, 0.0)
