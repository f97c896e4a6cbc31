"""Quantitative evaluation of the trained model pair.

Latent-space retrieval proportions, per-word KL ranking of a generated
corpus against its complement, rank-biased overlap (RBO) between ranked
word lists, the song-pair RBO matrix, the per-clip timeline against calm
and intense references, and the peak-dB significance test.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .corpus.vocab import normalize

DEFAULT_RBO_P = 0.9
DEFAULT_RBO_DEPTH = 100
DEFAULT_SMOOTHING = 0.5

RankedWordList = list[tuple[str, float]]


# ---------------------------------------------------------------------------
# distributions and word-KL ranking

@dataclass
class WordDistribution:
    """word -> probability map; always sums to 1."""

    probs: dict[str, float]

    def __post_init__(self) -> None:
        total = sum(self.probs.values())
        if self.probs and abs(total - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {total}, expected 1")
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative probability")

    @classmethod
    def from_counts(
        cls, counts: dict[str, int], vocabulary: set[str], smoothing: float = DEFAULT_SMOOTHING
    ) -> "WordDistribution":
        """Add-epsilon smoothed distribution over an explicit vocabulary."""
        if not vocabulary:
            raise ValueError("empty vocabulary")
        denom = sum(counts.get(w, 0) for w in vocabulary) + smoothing * len(vocabulary)
        probs = {w: (counts.get(w, 0) + smoothing) / denom for w in sorted(vocabulary)}
        return cls(probs)

    def __getitem__(self, word: str) -> float:
        return self.probs[word]


def count_words(lines: list[str]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for line in lines:
        for w in normalize(line):
            counts[w] = counts.get(w, 0) + 1
    return counts


def kl_scores(p_g: WordDistribution, p_n: WordDistribution, words: set[str]) -> dict[str, float]:
    """word-KL(w) = p_G(w) * ln(p_G(w) / p_N(w)) for each requested word."""
    return {w: p_g[w] * float(np.log(p_g[w] / p_n[w])) for w in words}


def rank_words(scores: dict[str, float]) -> RankedWordList:
    """Sort score descending, ties broken lexicographically."""
    return sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))


def word_kl(
    gk_lines: list[str], n_lines: list[str], smoothing: float = DEFAULT_SMOOTHING
) -> RankedWordList:
    """Rank the words of a generated corpus G by distinctiveness vs complement N.

    Both distributions are add-epsilon smoothed over the union vocabulary so
    the log ratio stays finite; words never occurring in G are omitted from
    the ranking.
    """
    if not gk_lines or not n_lines:
        raise ValueError("both corpora must be non-empty")
    g_counts = count_words(gk_lines)
    n_counts = count_words(n_lines)
    union = set(g_counts) | set(n_counts)
    if not union:
        raise ValueError("corpora contain no words")
    p_g = WordDistribution.from_counts(g_counts, union, smoothing)
    p_n = WordDistribution.from_counts(n_counts, union, smoothing)
    return rank_words(kl_scores(p_g, p_n, {w for w, c in g_counts.items() if c > 0}))


# ---------------------------------------------------------------------------
# rank-biased overlap

def _words_of(ranked) -> list[str]:
    return [w if isinstance(w, str) else w[0] for w in ranked]


def rbo(s, t, p: float = DEFAULT_RBO_P, depth: int = DEFAULT_RBO_DEPTH) -> float:
    """Extrapolated rank-biased overlap of two ranked lists, in [0, 1].

    With A_d the overlap fraction of the depth-d heads, returns
    (1-p) * sum_{d=1..D} p^(d-1) * A_d  +  p^D * A_D,
    where D is ``depth`` capped at the point both lists are exhausted (so
    identical lists score exactly 1 regardless of their length). Handles
    non-conjoint lists; 0 means disjoint.
    """
    if not 0 < p < 1:
        raise ValueError("persistence p must be in (0, 1)")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    s_words, t_words = _words_of(s), _words_of(t)
    if not s_words or not t_words:
        raise ValueError("ranked lists must be non-empty")
    if len(set(s_words)) != len(s_words) or len(set(t_words)) != len(t_words):
        raise ValueError("ranked lists must not contain duplicate words")
    eff_depth = min(depth, max(len(s_words), len(t_words)))

    seen_s: set[str] = set()
    seen_t: set[str] = set()
    overlap = 0
    score = 0.0
    a_d = 0.0
    for d in range(1, eff_depth + 1):
        if d <= len(s_words):
            w = s_words[d - 1]
            if w in seen_t:
                overlap += 1
            seen_s.add(w)
        if d <= len(t_words):
            w = t_words[d - 1]
            if w in seen_s and w not in seen_t:
                overlap += 1
            seen_t.add(w)
        a_d = overlap / d
        score += (1 - p) * p ** (d - 1) * a_d
    return score + p**eff_depth * a_d


# ---------------------------------------------------------------------------
# embedding-space retrieval

def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """dot(a, b) / (|a| |b|); zero vectors are rejected."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("cosine similarity undefined for zero vectors")
    return float(np.dot(a, b) / (na * nb))


def topn_retrieval(
    query: np.ndarray,
    query_label: dict[str, str],
    pool: np.ndarray,
    pool_labels: list[dict[str, str]],
    n: int,
) -> dict[str, float]:
    """Fractions of the query's top-n nearest pool entries sharing each label.

    The caller must exclude the query from its own pool entry.
    """
    pool = np.asarray(pool, dtype=np.float64)
    if n > pool.shape[0]:
        raise ValueError(f"n={n} exceeds pool size {pool.shape[0]}")
    q = np.asarray(query, dtype=np.float64)
    norms = np.linalg.norm(pool, axis=1) * np.linalg.norm(q)
    if np.any(norms == 0):
        raise ValueError("zero vector in pool or query")
    sims = pool @ q / norms
    top = np.argsort(-sims, kind="stable")[:n]
    out = {}
    for key in ("song_id", "album_id", "artist_id"):
        short = "same_" + key.split("_")[0]
        out[short] = sum(1 for i in top if pool_labels[i][key] == query_label[key]) / n
    return out


def retrieval_table(
    embeddings: np.ndarray, labels: list[dict[str, str]], ns: tuple[int, ...] = (50, 100)
) -> dict[int, dict[str, float]]:
    """Average top-n proportions over every query, self excluded from its pool."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    n_items = embeddings.shape[0]
    table: dict[int, dict[str, float]] = {}
    for n in ns:
        sums = {"same_song": 0.0, "same_album": 0.0, "same_artist": 0.0}
        for i in range(n_items):
            keep = np.arange(n_items) != i
            props = topn_retrieval(
                embeddings[i], labels[i], embeddings[keep], [labels[j] for j in range(n_items) if j != i], n
            )
            for k in sums:
                sums[k] += props[k]
        table[n] = {k: v / n_items for k, v in sums.items()}
    return table


# ---------------------------------------------------------------------------
# corpus-level reports

def rbo_matrix(
    corpora: dict[str, list[str]],
    p: float = DEFAULT_RBO_P,
    depth: int = DEFAULT_RBO_DEPTH,
    smoothing: float = DEFAULT_SMOOTHING,
) -> tuple[list[str], np.ndarray]:
    """Pairwise RBO of per-song word-KL rankings, each song ranked vs the rest.

    Returns (song ids in insertion order, symmetric matrix with unit diagonal).
    """
    songs = list(corpora)
    if len(songs) < 2:
        raise ValueError("need at least two songs")
    rankings = []
    for s in songs:
        rest = [line for other in songs if other != s for line in corpora[other]]
        rankings.append(word_kl(corpora[s], rest, smoothing))
    m = np.eye(len(songs))
    for i in range(len(songs)):
        for j in range(i + 1, len(songs)):
            m[i, j] = m[j, i] = rbo(rankings[i], rankings[j], p, depth)
    return songs, m


@dataclass
class TimelinePoint:
    t: float
    rbo_calm: float
    rbo_intense: float


def clip_timeline(
    clip_corpora: list[tuple[float, list[str]]],
    calm_lines: list[str],
    intense_lines: list[str],
    p: float = DEFAULT_RBO_P,
    depth: int = DEFAULT_RBO_DEPTH,
    smoothing: float = DEFAULT_SMOOTHING,
) -> list[TimelinePoint]:
    """Per-clip RBO against the calm and intense reference corpora.

    Each clip's word-KL ranking is computed against the union of the other
    clips; the references are ranked against that same complement so a clip
    whose corpus equals a reference scores exactly 1 against it.
    """
    if not calm_lines or not intense_lines:
        raise ValueError("reference corpora must be non-empty")
    if len(clip_corpora) < 2:
        raise ValueError("need at least two clips")
    out = []
    for i, (t, lines) in enumerate(clip_corpora):
        rest = [line for j, (_, other) in enumerate(clip_corpora) if j != i for line in other]
        ranked_clip = word_kl(lines, rest, smoothing)
        ranked_calm = word_kl(calm_lines, rest, smoothing)
        ranked_intense = word_kl(intense_lines, rest, smoothing)
        out.append(
            TimelinePoint(
                t=t,
                rbo_calm=rbo(ranked_clip, ranked_calm, p, depth),
                rbo_intense=rbo(ranked_clip, ranked_intense, p, depth),
            )
        )
    if any(b.t <= a.t for a, b in zip(out, out[1:])):
        raise ValueError("clip times must be strictly increasing")
    return out


def ttest_peak_db(group_a: list[float], group_b: list[float]) -> tuple[float, float]:
    """Welch two-sample t-test (unequal variances); returns (t, two-sided p)."""
    a = np.asarray(group_a, dtype=np.float64)
    b = np.asarray(group_b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise ValueError("each group needs at least two values")
    if a.var(ddof=1) == 0 and b.var(ddof=1) == 0:
        raise ValueError("degenerate variance in both groups")
    t, pval = stats.ttest_ind(a, b, equal_var=False)
    return float(t), float(pval)


# ---------------------------------------------------------------------------
# emitters

def _write_descriptor(csv_path: Path, descriptor: dict) -> None:
    """JSON sidecar describing a CSV report (rendering is the UI's job)."""
    csv_path.with_suffix(".meta.json").write_text(
        json.dumps(descriptor, indent=2, sort_keys=True), encoding="utf-8"
    )


def write_rbo_matrix_csv(
    path: str | Path,
    songs: list[str],
    matrix: np.ndarray,
    categories: dict[str, str],
    params: dict | None = None,
) -> None:
    """song x song CSV; first two columns are song id and its category."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["song_id", "category", *songs])
        for i, s in enumerate(songs):
            writer.writerow([s, categories.get(s, ""), *[f"{x:.6f}" for x in matrix[i]]])
    _write_descriptor(
        path,
        {"kind": "rbo_matrix", "songs": songs,
         "categories": {s: categories.get(s, "") for s in songs}, "params": params or {}},
    )


def write_timeline_csv(
    path: str | Path,
    points: list[TimelinePoint],
    peak_dbs: list[float],
    params: dict | None = None,
) -> None:
    if len(points) != len(peak_dbs):
        raise ValueError("points and peak_dbs must align")
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "rbo_calm", "rbo_intense", "peak_db"])
        for pt, db in zip(points, peak_dbs):
            writer.writerow([f"{pt.t:.3f}", f"{pt.rbo_calm:.6f}", f"{pt.rbo_intense:.6f}", f"{db:.4f}"])
    _write_descriptor(
        path, {"kind": "clip_timeline", "n_clips": len(points), "params": params or {}}
    )


def write_retrieval_json(path: str | Path, table: dict[int, dict[str, float]]) -> None:
    payload = {str(n): {k: round(v, 6) for k, v in props.items()} for n, props in table.items()}
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")
