"""Merge-based subword vocabulary with special tokens.

Words are pre-segmented on whitespace. The first character of every word
carries the sentinel ``▁`` so that word-initial pieces are distinct from
word-internal ones; ``decode`` turns the sentinel back into a space.
"""

from __future__ import annotations

import heapq
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from functools import lru_cache

SENTINEL = "▁"
SPECIALS = ("<pad>", "<unk>", "<mask>", "<sep>", "<cls>", "<Source>", "<Target>", "<->")
# always present so marker layouts can render their colon token
_ALWAYS = (":",)


class VocabError(ValueError):
    pass


@dataclass(frozen=True)
class TokenizedText:
    token_ids: list[int]
    word_alignment: list[int]
    unit_boundaries: list[int] = field(default_factory=list)


class Vocab:
    """Specials occupy ids ``0..7``; base symbols follow, then merged pieces in learning order."""

    def __init__(self, base, merges=()):
        self.base: list[str] = list(base)
        self.merges: list[tuple[str, str]] = [tuple(m) for m in merges]
        if len(set(self.base)) != len(self.base):
            raise VocabError("duplicate base symbols")
        self.pieces = list(self.base)
        seen = set(self.pieces)
        for a, b in self.merges:
            if a + b not in seen:
                self.pieces.append(a + b)
                seen.add(a + b)
        self.ids = {p: len(SPECIALS) + i for i, p in enumerate(self.pieces)}
        self.ranks = {m: r for r, m in enumerate(self.merges)}
        self._segment = lru_cache(maxsize=65536)(self._segment_uncached)

    pad, unk, mask, sep, cls, source_marker, target_marker, ignore = range(len(SPECIALS))

    def __len__(self):
        return len(SPECIALS) + len(self.pieces)

    def __eq__(self, other):
        return isinstance(other, Vocab) and self.pieces == other.pieces and self.merges == other.merges

    @property
    def specials(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(SPECIALS)}

    def piece(self, token_id: int) -> str:
        if token_id < len(SPECIALS):
            return SPECIALS[token_id]
        return self.pieces[token_id - len(SPECIALS)]

    def colon(self) -> int:
        return self.ids.get(":", self.unk)

    def _segment_uncached(self, word: str) -> tuple[str, ...]:
        symbols = [SENTINEL + word[0]] + list(word[1:])
        while len(symbols) > 1:
            best = None
            for k in range(len(symbols) - 1):
                r = self.ranks.get((symbols[k], symbols[k + 1]))
                if r is not None and (best is None or r < best[0]):
                    best = (r, k)
            if best is None:
                break
            _, k = best
            symbols[k:k + 2] = [symbols[k] + symbols[k + 1]]
        return tuple(symbols)

    def encode_word(self, word: str) -> list[int]:
        if not word:
            return []
        return [self.ids.get(p, self.unk) for p in self._segment(word)]

    def decode(self, token_ids) -> str:
        out = []
        for t in token_ids:
            out.append(self.piece(t) if t >= len(SPECIALS) else "")
        return "".join(out).replace(SENTINEL, " ").lstrip(" ")

    def save(self, path) -> None:
        """Write the vocabulary file: a specials header line, then one piece per line.

        Base characters come first. Each merge follows as ``piece<TAB>left<TAB>right``
        in learning order so the segmentation replays exactly.
        """
        lines = ["#specials\t" + "\t".join(SPECIALS)]
        lines.extend(self.base)
        lines.extend(f"{a + b}\t{a}\t{b}" for a, b in self.merges)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    @classmethod
    def load(cls, path) -> "Vocab":
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().split("\n")
        header = lines[0].split("\t")
        if header[0] != "#specials" or tuple(header[1:]) != SPECIALS:
            raise VocabError(f"{path}: unexpected specials header")
        base, merges = [], []
        for line in lines[1:]:
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) == 3:
                merges.append((fields[1], fields[2]))
            elif merges:
                raise VocabError(f"{path}: base symbol {fields[0]!r} after merges")
            else:
                base.append(fields[0])
        return cls(base, merges)


def base_inventory(corpus) -> list[str]:
    chars = set(_ALWAYS)
    for text in corpus:
        for word in text.split():
            chars.add(SENTINEL + word[0])
            chars.update(word[1:])
    return sorted(chars)


def train_vocab(corpus, size: int) -> Vocab:
    """Learn ``size - len(base characters)`` merges by greedy pair frequency.

    ``size`` counts pieces (base characters plus merges); specials come on
    top. Frequency ties go to the lexicographically smallest pair.
    """
    corpus = list(corpus)
    base = base_inventory(corpus)
    if size < len(base):
        raise VocabError(f"size {size} is below the {len(base)}-symbol base inventory")
    word_freq = Counter(w for text in corpus for w in text.split())
    words = [[SENTINEL + w[0]] + list(w[1:]) for w in word_freq]
    freqs = list(word_freq.values())

    pair_counts: Counter = Counter()
    where: dict[tuple[str, str], set[int]] = defaultdict(set)
    for i, syms in enumerate(words):
        for pair in zip(syms, syms[1:]):
            pair_counts[pair] += freqs[i]
            where[pair].add(i)
    heap = [(-c, p) for p, c in pair_counts.items()]
    heapq.heapify(heap)

    pieces = list(base)
    known = set(pieces)
    merges = []
    while len(pieces) < size and heap:
        negc, pair = heapq.heappop(heap)
        if pair_counts.get(pair, 0) != -negc or negc == 0:
            continue
        merged = pair[0] + pair[1]
        merges.append(pair)
        if merged not in known:
            pieces.append(merged)
            known.add(merged)
        touched = set()
        for i in sorted(where.pop(pair, ())):
            syms = words[i]
            f = freqs[i]
            for old in zip(syms, syms[1:]):
                pair_counts[old] -= f
                touched.add(old)
            new = []
            k = 0
            while k < len(syms):
                if k + 1 < len(syms) and (syms[k], syms[k + 1]) == pair:
                    new.append(merged)
                    k += 2
                else:
                    new.append(syms[k])
                    k += 1
            words[i] = new
            for p in zip(new, new[1:]):
                pair_counts[p] += f
                where[p].add(i)
                touched.add(p)
        pair_counts.pop(pair, None)
        for p in touched:
            c = pair_counts.get(p, 0)
            if c > 0:
                heapq.heappush(heap, (-c, p))
            else:
                pair_counts.pop(p, None)
    return Vocab(base, merges)


def encode_words(words, vocab: Vocab) -> TokenizedText:
    ids: list[int] = []
    align: list[int] = []
    for w in words:
        align.append(len(ids))
        ids.extend(vocab.encode_word(w))
    return TokenizedText(ids, align)
