"""
Subsequence counting and parity profiles.

#(w, w') counts the embeddings of w' into w as a subsequence. The parity
profile of w at depth n records #(w, w') mod 2 for every non-empty w' of
length <= n; a word is "even" when that profile is identically zero.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


def subsequence_count(w: Sequence, w_prime: Sequence) -> int:
    """Number of strictly increasing index tuples embedding w_prime into w"""
    m = len(w_prime)
    # counts[k] = embeddings of w_prime[:k] into the prefix of w read so far
    counts = [1] + [0] * m
    for c in w:
        for k in range(m, 0, -1):
            if w_prime[k - 1] == c:
                counts[k] += counts[k - 1]
    return counts[m]


def profile_domain(alphabet: Sequence[str], n: int) -> List[str]:
    """Non-empty words of length <= n, shortest first, then in alphabet order"""
    return [''.join(p) for length in range(1, n + 1) for p in product(alphabet, repeat=length)]


@lru_cache(maxsize=64)
def _domain_index(alphabet: Tuple[str, ...], n: int):
    """Per (letter, length): positions of domain words ending in that letter and of their prefixes"""
    domain = profile_domain(alphabet, n)
    position = {w: i + 1 for i, w in enumerate(domain)}   # slot 0 is the empty word
    plan: Dict[str, List[Tuple[np.ndarray, np.ndarray]]] = {}
    for c in alphabet:
        steps = []
        for length in range(n, 0, -1):
            targets = [position[w] for w in domain if len(w) == length and w[-1] == c]
            parents = [position.get(w[:-1], 0) for w in domain if len(w) == length and w[-1] == c]
            steps.append((np.array(targets, dtype=np.intp), np.array(parents, dtype=np.intp)))
        plan[c] = steps
    return tuple(domain), plan


@dataclass(frozen=True, eq=False)
class ParityProfile:
    alphabet: Tuple[str, ...]
    depth: int
    bits: np.ndarray            # uint8, aligned with profile_domain(alphabet, depth)

    @property
    def domain(self) -> Tuple[str, ...]:
        return _domain_index(self.alphabet, self.depth)[0]

    def __getitem__(self, w_prime: str) -> int:
        return int(self.bits[self.domain.index(w_prime)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParityProfile):
            return NotImplemented
        return (self.alphabet == other.alphabet and self.depth == other.depth
                and np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.alphabet, self.depth, self.bits.tobytes()))

    def is_zero(self) -> bool:
        return not self.bits.any()

    def as_dict(self) -> Dict[str, int]:
        return {w: int(b) for w, b in zip(self.domain, self.bits)}


def _resolve_alphabet(word: Sequence[str], alphabet: Optional[Sequence[str]]) -> Tuple[str, ...]:
    if alphabet is None:
        alphabet = sorted(set(word))
    alphabet = tuple(alphabet)
    if not alphabet:
        raise ValueError("An alphabet is needed for the empty word")
    unknown = set(word) - set(alphabet)
    if unknown:
        raise ValueError(f"Symbols {sorted(unknown)} are not in the alphabet {list(alphabet)}")
    return alphabet


def _fresh_counts(domain_size: int) -> np.ndarray:
    counts = np.zeros(domain_size + 1, dtype=np.uint8)
    counts[0] = 1
    return counts


def _append(counts: np.ndarray, c: str, plan) -> None:
    # longest words first so every prefix still holds its value from before c
    for targets, parents in plan[c]:
        counts[targets] ^= counts[parents]


def parity_profile(w: Sequence[str], n: int, alphabet: Optional[Sequence[str]] = None) -> ParityProfile:
    if n < 1:
        raise ValueError("depth must be at least 1")
    alphabet = _resolve_alphabet(w, alphabet)
    domain, plan = _domain_index(alphabet, n)
    counts = _fresh_counts(len(domain))
    for c in w:
        _append(counts, c, plan)
    return ParityProfile(alphabet, n, counts[1:].copy())


def _interval_profiles(s: Sequence[str], n: int, alphabet: Tuple[str, ...]) -> Dict[Tuple[int, int], np.ndarray]:
    """Profile bits of every interval s(i, j), grown one letter at a time from each start"""
    domain, plan = _domain_index(alphabet, n)
    table: Dict[Tuple[int, int], np.ndarray] = {}
    for i in range(len(s)):
        counts = _fresh_counts(len(domain))
        for j in range(i, len(s)):
            _append(counts, s[j], plan)
            table[(i, j)] = counts[1:].copy()
    return table


def even_subword_search(s: Sequence[str], n: int,
                        alphabet: Optional[Sequence[str]] = None) -> Optional[Tuple[int, int]]:
    """
    Shortest interval (i, j), leftmost among equals, whose subword has an all-even
    profile at depth n. None when no interval qualifies.
    """
    if n < 1:
        raise ValueError("depth must be at least 1")
    alphabet = _resolve_alphabet(s, alphabet)
    domain, plan = _domain_index(alphabet, n)
    best: Optional[Tuple[int, int]] = None
    for i in range(len(s)):
        counts = _fresh_counts(len(domain))
        limit = len(s) if best is None else min(len(s), i + best[1] - best[0] + 1)
        for j in range(i, limit):
            _append(counts, s[j], plan)
            if not counts[1:].any():
                if best is None or (j - i, i) < (best[1] - best[0], best[0]):
                    best = (i, j)
                break
    return best


@dataclass(frozen=True)
class PirilloPair:
    start: int
    split: int                  # w1 = s[start:split], w2 = s[split:end]
    end: int
    w1: str
    w2: str


def pirillo_pair_search(s: Sequence[str], n: int,
                        alphabet: Optional[Sequence[str]] = None) -> Optional[PirilloPair]:
    """
    First subword w1 w2 (by total length, then start, then split) with
    phi(w1) = phi(w2) = phi(w1 w2); such a pair always has all-even profiles.
    """
    if n < 1:
        raise ValueError("depth must be at least 1")
    alphabet = _resolve_alphabet(s, alphabet)
    profiles = _interval_profiles(s, n, alphabet)
    text = ''.join(s)
    for length in range(2, len(s) + 1):
        for start in range(0, len(s) - length + 1):
            end = start + length
            whole = profiles[(start, end - 1)]
            for split in range(start + 1, end):
                left = profiles[(start, split - 1)]
                right = profiles[(split, end - 1)]
                if np.array_equal(left, right) and np.array_equal(left, whole):
                    return PirilloPair(start, split, end, text[start:split], text[split:end])
    return None


def concat_count_identity_check(w1: Sequence[str], w2: Sequence[str], w_prime: Sequence[str]) -> bool:
    """#(w1 w2, w') equals the sum over splits of w' of #(w1, left) * #(w2, right)"""
    direct = subsequence_count(tuple(w1) + tuple(w2), w_prime)
    convolution = sum(subsequence_count(w1, w_prime[:i]) * subsequence_count(w2, w_prime[i:])
                      for i in range(len(w_prime) + 1))
    return direct == convolution


@dataclass(frozen=True)
class RamseyBoundSpec:
    """R(2, 3, 2^((m^(n+1) - 1) / (m - 1))) kept as an expression"""
    alphabet_size: int
    depth: int

    @property
    def colour_exponent(self) -> int:
        m, n = self.alphabet_size, self.depth
        return n + 1 if m == 1 else (m ** (n + 1) - 1) // (m - 1)

    @property
    def colours_expr(self) -> str:
        return f"2^{self.colour_exponent}"

    def expression(self) -> str:
        return f"R(2,3,{self.colours_expr})"

    def __str__(self):
        return self.expression()


def ramsey_bound(m: int, n: int) -> RamseyBoundSpec:
    if m < 1 or n < 1:
        raise ValueError("alphabet size and depth must be positive")
    return RamseyBoundSpec(m, n)


def construction_degree_sequence(alphabet_size: int, terms: int) -> List[str]:
    """r_0 = 16, r_(k+1) = 15 * R(2, 3, 2^((|S|^(r_k + 1) - 1) / (|S| - 1))), symbolically"""
    if terms <= 0:
        return []
    seq = ['16']
    for k in range(1, terms):
        prev = f"r{k - 1}"
        seq.append(f"15*R(2,3,2^(({alphabet_size}^({prev}+1)-1)/({alphabet_size}-1)))")
    return seq
