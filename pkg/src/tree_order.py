"""
The tree of super-reduced words and its lexicographic order.

Words are tuples of generator indices, so the order on nodes is plain tuple
comparison: a proper prefix is smaller, otherwise the first differing
generator decides. Depth-first preorder with children in generator order
visits nodes in exactly this order.
"""
import logging
from enum import Enum
from typing import Iterator, List, Sequence, Set

from src.errors import NoPath, UndecidableBackend
from src.groups import CanonicalForm, GroupWord, TapeGraph

logger = logging.getLogger(__name__)


class Ordering(Enum):
    LESS = -1
    EQUAL = 0
    GREATER = 1


def _require_decidable(graph: TapeGraph, operation: str):
    if not graph.backend.decidable:
        raise UndecidableBackend(f"{operation} needs a decidable word problem")


def lex_compare(u: Sequence[int], v: Sequence[int]) -> Ordering:
    u, v = tuple(u), tuple(v)
    if u == v:
        return Ordering.EQUAL
    return Ordering.LESS if u < v else Ordering.GREATER


def is_super_reduced(graph: TapeGraph, w: Sequence[int]) -> bool:
    """No non-empty subword multiplies to e, i.e. all prefix products are distinct"""
    _require_decidable(graph, 'is_super_reduced')
    w = tuple(w)
    if not graph.alphabet.is_well_formed(w):
        raise ValueError(f"Word {w} uses indices outside the alphabet")
    form = graph.identity()
    seen = {form}
    for g in w:
        form = graph.act(form, g)
        if form in seen:
            return False
        seen.add(form)
    return True


def _preorder(graph: TapeGraph, depth: int) -> Iterator[GroupWord]:
    """Super-reduced words of length <= depth in lexicographic order"""
    n = graph.alphabet.size
    word: List[int] = []
    forms: List[CanonicalForm] = [graph.identity()]
    on_path: Set[CanonicalForm] = {forms[0]}
    # stack of next generator to try at each depth
    choice: List[int] = [0]
    yield ()
    while choice:
        g = choice[-1]
        if len(word) >= depth or g >= n:
            choice.pop()
            if word:
                on_path.discard(forms.pop())
                word.pop()
            continue
        choice[-1] = g + 1
        image = graph.act(forms[-1], g)
        if image in on_path:
            continue
        word.append(g)
        forms.append(image)
        on_path.add(image)
        choice.append(0)
        yield tuple(word)


def super_reduced_words(graph: TapeGraph, depth: int) -> List[GroupWord]:
    _require_decidable(graph, 'super_reduced_words')
    if depth < 0:
        raise ValueError("depth must be non-negative")
    return [w for w in _preorder(graph, depth) if len(w) == depth]


def minimal_path_prefix(graph: TapeGraph, depth: int) -> GroupWord:
    """Least super-reduced word of the given length; approximates the minimal infinite path"""
    _require_decidable(graph, 'minimal_path_prefix')
    if depth < 0:
        raise ValueError("depth must be non-negative")
    for w in _preorder(graph, depth):
        if len(w) == depth:
            return w
    raise NoPath(f"No super-reduced word of length {depth}")


def tprime_prefix(graph: TapeGraph, depth: int, k: int) -> List[GroupWord]:
    """
    First k nodes of the well-ordered subtree below the minimal path,
    approximated at the given depth: nodes of length <= depth that do not
    exceed the minimal path prefix.
    """
    _require_decidable(graph, 'tprime_prefix')
    if k <= 0:
        return []
    bound = minimal_path_prefix(graph, depth)
    out: List[GroupWord] = []
    for w in _preorder(graph, depth):
        if w > bound:
            break
        out.append(w)
        if len(out) == k:
            break
    return out


def r_prefix(graph: TapeGraph, depth: int, k: int) -> List[GroupWord]:
    """tprime_prefix pruned to the lexicographically least word per group element"""
    _require_decidable(graph, 'r_prefix')
    if k <= 0:
        return []
    bound = minimal_path_prefix(graph, depth)
    seen: Set[CanonicalForm] = set()
    out: List[GroupWord] = []
    for w in _preorder(graph, depth):
        if w > bound:
            break
        form = graph.backend.canonicalize(w)
        if form in seen:
            continue
        seen.add(form)
        out.append(w)
        if len(out) == k:
            break
    logger.debug(f"r_prefix kept {len(out)} words at depth {depth}")
    return out
