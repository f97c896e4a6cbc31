"""Word-level tokenization and vocabulary management.

Lines are lowercased and punctuation-stripped before splitting on
whitespace. Token sequences are wrapped in BOS/EOS sentinels; indices
0..3 are reserved for PAD, BOS, EOS, UNK in that order.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from pathlib import Path
from typing import Iterable

PAD = 0
BOS = 1
EOS = 2
UNK = 3

RESERVED = ["<pad>", "<bos>", "<eos>", "<unk>"]

DEFAULT_MAX_LINE_LEN = 20

_PUNCT = re.compile(r"[^\w\s']", flags=re.UNICODE)


def normalize(line: str) -> list[str]:
    """Lowercase, strip punctuation, split on whitespace."""
    cleaned = _PUNCT.sub(" ", line.lower()).replace("_", " ")
    return cleaned.split()


class Vocabulary:
    """Bijective token <-> index map with fixed reserved sentinels."""

    def __init__(self, tokens: Iterable[str]):
        self.index_to_token: list[str] = list(RESERVED)
        self.token_to_index: dict[str, int] = {t: i for i, t in enumerate(RESERVED)}
        for tok in tokens:
            if tok in self.token_to_index:
                raise ValueError(f"duplicate or reserved token {tok!r}")
            self.token_to_index[tok] = len(self.index_to_token)
            self.index_to_token.append(tok)

    def __len__(self) -> int:
        return len(self.index_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_index

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self.index_to_token == other.index_to_token

    def index(self, token: str) -> int:
        return self.token_to_index.get(token, UNK)

    def token(self, index: int) -> str:
        if not 0 <= index < len(self.index_to_token):
            raise IndexError(f"index {index} outside vocabulary of size {len(self)}")
        return self.index_to_token[index]

    def to_json(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"tokens": self.index_to_token[len(RESERVED) :]}, indent=2),
            encoding="utf-8",
        )

    @classmethod
    def from_json(cls, path: str | Path) -> "Vocabulary":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(data["tokens"])


def build_vocab(lines: Iterable[str], min_count: int = 1) -> Vocabulary:
    """Vocabulary over all tokens with frequency >= min_count.

    Ordering is deterministic: frequency descending, then lexicographic.
    """
    counts = Counter()
    n_lines = 0
    for line in lines:
        n_lines += 1
        counts.update(normalize(line))
    if n_lines == 0:
        raise ValueError("empty corpus")
    kept = sorted(
        (tok for tok, c in counts.items() if c >= min_count),
        key=lambda tok: (-counts[tok], tok),
    )
    if not kept:
        raise ValueError(f"no tokens reach min_count={min_count}")
    return Vocabulary(kept)


def tokenize(line: str, vocab: Vocabulary, max_line_len: int = DEFAULT_MAX_LINE_LEN) -> list[int]:
    """Map a raw line to [BOS, ids..., EOS], truncated to max_line_len total tokens."""
    if max_line_len < 3:
        raise ValueError("max_line_len must leave room for BOS, EOS and one token")
    words = normalize(line)
    if not words:
        raise ValueError(f"line is empty after normalization: {line!r}")
    content = [vocab.index(w) for w in words[: max_line_len - 2]]
    return [BOS] + content + [EOS]


def detokenize(ids: Iterable[int], vocab: Vocabulary) -> str:
    """Inverse of tokenize up to casing/punctuation loss; sentinels are dropped."""
    words = []
    for i in ids:
        if i in (PAD, BOS, EOS):
            continue
        words.append(vocab.token(i))
    return " ".join(words)
