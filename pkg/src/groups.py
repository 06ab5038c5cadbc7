"""
Finitely generated groups as Turing tapes.

A tape graph is the Cayley graph of an infinite group G with an ordered,
inverse-closed generating set S. Every other module talks to the group only
through the word-problem oracle exposed here: canonical forms, equality of
words, and right multiplication of a canonical form by a generator.
"""
import json
import logging
import re
from abc import ABC, abstractmethod
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple, Union

from config.config import Config
from src.errors import BudgetExhausted, FiniteGroup, InvalidAlphabet, UndecidableBackend

logger = logging.getLogger(__name__)

GroupWord = Tuple[int, ...]
CanonicalForm = Hashable

EMPTY_WORD = 'ε'


class WordVerdict(Enum):
    EQUAL = "Equal"
    NOT_EQUAL = "NotEqual"
    UNKNOWN = "Unknown"


class GroupKind(Enum):
    FREE_ABELIAN = "free_abelian"
    FREE_GROUP = "free_group"
    INFINITE_DIHEDRAL = "infinite_dihedral"
    FINITELY_PRESENTED = "finitely_presented"
    FINITE_TABLE = "finite_table"


@dataclass(frozen=True)
class GeneratorAlphabet:
    """Generators g1 < ... < gn in declaration order, with inverse_map[i] the index of gi^-1"""
    symbols: Tuple[str, ...]
    inverse_map: Tuple[int, ...]

    def __post_init__(self):
        if len(self.symbols) < 1:
            raise InvalidAlphabet("A generating set needs at least one generator")
        if len(set(self.symbols)) != len(self.symbols):
            raise InvalidAlphabet(f"Generator names must be distinct: {list(self.symbols)}")
        if len(self.inverse_map) != len(self.symbols):
            raise InvalidAlphabet("inverse_map must have one entry per generator")
        for i, j in enumerate(self.inverse_map):
            if not 0 <= j < len(self.symbols):
                raise InvalidAlphabet(f"Inverse of {self.symbols[i]} points outside the alphabet")

    @classmethod
    def from_names(cls, names: Sequence[str], inverses: Dict[str, str]) -> 'GeneratorAlphabet':
        """Build from names and a name->name inverse table; a pair may be listed in either direction"""
        names = tuple(str(n) for n in names)
        position = {name: i for i, name in enumerate(names)}
        table: Dict[str, str] = {}
        for key, value in inverses.items():
            if key not in position or value not in position:
                raise InvalidAlphabet(f"Inverse pair {key}->{value} names an unknown generator")
            table[key] = value
        for key, value in list(table.items()):
            table.setdefault(value, key)
        missing = [name for name in names if name not in table]
        if missing:
            raise InvalidAlphabet(f"No inverse declared for {missing} (the generating set must be closed under inverses)")
        return cls(names, tuple(position[table[name]] for name in names))

    @property
    def size(self) -> int:
        return len(self.symbols)

    def index(self, name: str) -> int:
        try:
            return self.symbols.index(name)
        except ValueError:
            raise ValueError(f"Unknown generator {name!r}; alphabet is {list(self.symbols)}") from None

    def inverse(self, i: int) -> int:
        return self.inverse_map[i]

    def is_involution(self) -> bool:
        return all(self.inverse_map[self.inverse_map[i]] == i for i in range(self.size))

    def inverse_word(self, word: Iterable[int]) -> GroupWord:
        return tuple(self.inverse_map[g] for g in reversed(tuple(word)))

    def is_well_formed(self, word: Iterable[int]) -> bool:
        return all(isinstance(g, int) and 0 <= g < self.size for g in word)

    def parse_word(self, text: str) -> GroupWord:
        """Parse 'a b a', 'a,b,a' or (when names tokenize greedily) 'aba'; 'ε' or '' is the empty word"""
        text = text.strip()
        if text in ('', EMPTY_WORD):
            return ()
        if re.search(r'[\s,]', text):
            return tuple(self.index(token) for token in re.split(r'[\s,]+', text) if token)

        by_length = sorted(self.symbols, key=len, reverse=True)
        word: List[int] = []
        rest = text
        while rest:
            for name in by_length:
                if rest.startswith(name):
                    word.append(self.index(name))
                    rest = rest[len(name):]
                    break
            else:
                raise ValueError(f"Cannot split {text!r} into generators {list(self.symbols)}")
        return tuple(word)

    def format_word(self, word: Iterable[int]) -> str:
        word = tuple(word)
        if not word:
            return EMPTY_WORD
        names = [self.symbols[g] for g in word]
        if all(len(name) == 1 for name in self.symbols):
            return ''.join(names)
        return ' '.join(names)


class GroupBackend(ABC):
    """
    Word-problem oracle for one group.

    Backends are immutable after construction. Canonical forms are hashable;
    act(form, g) is the canonical form of form * g.
    """
    kind: GroupKind
    decidable = True
    infinite = True

    def __init__(self, alphabet: GeneratorAlphabet):
        self.alphabet = alphabet

    @abstractmethod
    def identity(self) -> CanonicalForm:
        ...

    @abstractmethod
    def act(self, form: CanonicalForm, generator: int) -> CanonicalForm:
        ...

    def canonicalize(self, word: Iterable[int]) -> CanonicalForm:
        form = self.identity()
        for g in word:
            form = self.act(form, g)
        return form

    def words_equal(self, u: Sequence[int], v: Sequence[int]) -> WordVerdict:
        # u == v  iff  u v^-1 == e
        probe = tuple(u) + self.alphabet.inverse_word(v)
        if self.canonicalize(probe) == self.identity():
            return WordVerdict.EQUAL
        return WordVerdict.NOT_EQUAL

    def check_generators(self):
        """Backend-specific alphabet rules; raise InvalidAlphabet on violation"""

    def render(self, form: CanonicalForm) -> str:
        return self.alphabet.format_word(form)


class FreeAbelianBackend(GroupBackend):
    """Z^d; canonical forms are integer vectors"""
    kind = GroupKind.FREE_ABELIAN

    def __init__(self, alphabet: GeneratorAlphabet, vectors: Optional[Sequence[Sequence[int]]] = None):
        super().__init__(alphabet)
        if vectors is None:
            vectors = self.default_vectors(alphabet)
        vectors = tuple(tuple(int(x) for x in v) for v in vectors)
        if len(vectors) != alphabet.size:
            raise InvalidAlphabet("free_abelian needs one vector per generator")
        ranks = {len(v) for v in vectors}
        if len(ranks) != 1:
            raise InvalidAlphabet("All generator vectors must have the same rank")
        self.vectors = vectors
        self.rank = ranks.pop()

    @staticmethod
    def default_vectors(alphabet: GeneratorAlphabet) -> List[Tuple[int, ...]]:
        """The k-th inverse pair (first-declared member first) becomes +e_k / -e_k"""
        pairs: List[Tuple[int, int]] = []
        seen = set()
        for i in range(alphabet.size):
            if i in seen:
                continue
            j = alphabet.inverse(i)
            if alphabet.inverse(j) == i and j != i:
                pairs.append((i, j))
                seen.update((i, j))
            else:
                pairs.append((i, -1))
                seen.add(i)
        rank = len(pairs)
        vectors: List[Tuple[int, ...]] = [()] * alphabet.size
        for k, (i, j) in enumerate(pairs):
            unit = [0] * rank
            unit[k] = 1
            vectors[i] = tuple(unit)
            if j >= 0:
                vectors[j] = tuple(-x for x in unit)
        return vectors

    def identity(self) -> Tuple[int, ...]:
        return (0,) * self.rank

    def act(self, form, generator):
        return tuple(a + b for a, b in zip(form, self.vectors[generator]))

    def render(self, form) -> str:
        return '(' + ','.join(str(x) for x in form) + ')'


class FreeGroupBackend(GroupBackend):
    """Free group on the inverse pairs of the alphabet; canonical forms are freely reduced words"""
    kind = GroupKind.FREE_GROUP

    def check_generators(self):
        fixed = [self.alphabet.symbols[i] for i in range(self.alphabet.size) if self.alphabet.inverse(i) == i]
        if fixed:
            raise InvalidAlphabet(f"Free group generators cannot be their own inverse: {fixed}")

    def identity(self) -> GroupWord:
        return ()

    def act(self, form, generator):
        if form and form[-1] == self.alphabet.inverse(generator):
            return form[:-1]
        return form + (generator,)

    @property
    def rank(self) -> int:
        return self.alphabet.size // 2


class InfiniteDihedralBackend(GroupBackend):
    """<a, b | a^2, b^2>; canonical forms are alternating words"""
    kind = GroupKind.INFINITE_DIHEDRAL

    def check_generators(self):
        if self.alphabet.size != 2:
            raise InvalidAlphabet("The infinite dihedral group is generated by exactly two involutions")
        if any(self.alphabet.inverse(i) != i for i in range(2)):
            raise InvalidAlphabet("Both dihedral generators must be declared self-inverse")

    def identity(self) -> GroupWord:
        return ()

    def act(self, form, generator):
        if form and form[-1] == generator:
            return form[:-1]
        return form + (generator,)


class FinitelyPresentedBackend(GroupBackend):
    """
    <S | relators> with a budgeted rewriting search.

    Canonical forms are the shortlex-least words reachable by free reduction and
    non-length-increasing relator-piece replacements. This is exact for some
    presentations and only a best-known representative for others, so the
    backend is semi-decidable: words_equal never answers NotEqual.
    """
    kind = GroupKind.FINITELY_PRESENTED
    decidable = False

    def __init__(self, alphabet: GeneratorAlphabet, relators: Sequence[Sequence[int]], budget: int):
        super().__init__(alphabet)
        if budget <= 0:
            raise ValueError("rewrite budget must be positive")
        self.relators = tuple(tuple(r) for r in relators)
        self.budget = budget
        self.rules = self._build_rules()

    def _free_reduce(self, word: Iterable[int]) -> GroupWord:
        stack: List[int] = []
        for g in word:
            if stack and stack[-1] == self.alphabet.inverse(g):
                stack.pop()
            else:
                stack.append(g)
        return tuple(stack)

    def _build_rules(self) -> Tuple[Tuple[GroupWord, GroupWord], ...]:
        rules = set()
        for relator in self.relators:
            relator = self._free_reduce(relator)
            for r in (relator, self.alphabet.inverse_word(relator)):
                for shift in range(len(r)):
                    conjugate = r[shift:] + r[:shift]
                    for k in range(1, len(conjugate) + 1):
                        lhs = conjugate[:k]
                        rhs = self.alphabet.inverse_word(conjugate[k:])
                        if len(rhs) <= len(lhs) and lhs != rhs:
                            rules.add((lhs, rhs))
        return tuple(sorted(rules, key=lambda rule: (len(rule[0]), rule)))

    def identity(self) -> GroupWord:
        return ()

    def canonicalize(self, word: Iterable[int]) -> GroupWord:
        start = self._free_reduce(word)
        best = start
        seen = {start}
        queue = deque([start])
        steps = 0
        while queue:
            current = queue.popleft()
            steps += 1
            if steps > self.budget:
                raise BudgetExhausted(
                    f"Rewriting {self.alphabet.format_word(start)} exceeded {self.budget} steps", self.budget
                )
            for lhs, rhs in self.rules:
                width = len(lhs)
                for i in range(len(current) - width + 1):
                    if current[i:i + width] != lhs:
                        continue
                    candidate = self._free_reduce(current[:i] + rhs + current[i + width:])
                    if candidate in seen:
                        continue
                    seen.add(candidate)
                    queue.append(candidate)
                    if (len(candidate), candidate) < (len(best), best):
                        best = candidate
        return best

    def act(self, form, generator):
        return self.canonicalize(tuple(form) + (generator,))

    def words_equal(self, u, v) -> WordVerdict:
        try:
            if self.canonicalize(tuple(u) + self.alphabet.inverse_word(v)) == ():
                return WordVerdict.EQUAL
            if self.canonicalize(u) == self.canonicalize(v):
                return WordVerdict.EQUAL
        except BudgetExhausted as e:
            logger.warning(f"Word problem left undecided: {e}")
        return WordVerdict.UNKNOWN


class FiniteTableBackend(GroupBackend):
    """Finite group from a multiplication table (element 0 is the identity); never a valid tape"""
    kind = GroupKind.FINITE_TABLE
    infinite = False

    def __init__(self, alphabet: GeneratorAlphabet, table: Sequence[Sequence[int]], elements: Sequence[int]):
        super().__init__(alphabet)
        order = len(table)
        if order == 0 or any(len(row) != order for row in table):
            raise ValueError("Multiplication table must be square and non-empty")
        if any(not 0 <= x < order for row in table for x in row):
            raise ValueError("Multiplication table entries must be element indices")
        if len(elements) != alphabet.size or any(not 0 <= e < order for e in elements):
            raise ValueError("Every generator needs an element index of the table")
        self.table = tuple(tuple(row) for row in table)
        self.elements = tuple(elements)

    def identity(self) -> int:
        return 0

    def act(self, form, generator):
        return self.table[form][self.elements[generator]]

    def render(self, form) -> str:
        return str(form)


@dataclass
class ValidationReport:
    """Outcome of checking the tape restrictions of a (G, S) pair"""
    kind: str
    generators: Tuple[str, ...]
    restrictions: Dict[int, str] = field(default_factory=dict)
    infinite: bool = True
    decidable: bool = True

    @property
    def ok(self) -> bool:
        return self.infinite and not any(v.startswith('violated') for v in self.restrictions.values())

    def lines(self) -> List[str]:
        out = [f"group: {self.kind}", f"generators: {' < '.join(self.generators)}"]
        out.extend(f"restriction {k}: {v}" for k, v in sorted(self.restrictions.items()))
        out.append(f"word problem: {'decidable' if self.decidable else 'semi-decidable (budgeted)'}")
        return out


@dataclass(frozen=True)
class TapeGraph:
    """The pair (G, S); construction validates the tape restrictions and rejects finite groups"""
    backend: GroupBackend
    alphabet: GeneratorAlphabet

    def __post_init__(self):
        if self.backend.alphabet != self.alphabet:
            raise InvalidAlphabet("Backend and tape graph disagree on the generating set")
        validate_tape_graph(self)

    @property
    def infinite_flag(self) -> bool:
        return self.backend.infinite

    def identity(self) -> CanonicalForm:
        return self.backend.identity()

    def act(self, form: CanonicalForm, generator: int) -> CanonicalForm:
        return self.backend.act(form, generator)

    def render(self, form: CanonicalForm) -> str:
        return self.backend.render(form)


def _check_word(graph: TapeGraph, word: Sequence[int]) -> GroupWord:
    word = tuple(word)
    if not graph.alphabet.is_well_formed(word):
        raise ValueError(f"Word {word} uses indices outside the {graph.alphabet.size}-letter alphabet")
    return word


def canonicalize(graph: TapeGraph, w: Sequence[int]) -> CanonicalForm:
    return graph.backend.canonicalize(_check_word(graph, w))


def words_equal(graph: TapeGraph, u: Sequence[int], v: Sequence[int]) -> WordVerdict:
    return graph.backend.words_equal(_check_word(graph, u), _check_word(graph, v))


def validate_tape_graph(graph: TapeGraph) -> ValidationReport:
    """
    Check the tape restrictions for a Cayley graph.

    Restrictions 1, 2 and 5 (one out-edge per colour, edges labelled by generators,
    finitely many colours) hold for any Cayley graph; 4 (connected) holds because
    S generates; 6 (closed under inverses) is checked through the oracle; 3
    (infinitely many cells) is the backend's declared property.
    """
    alphabet, backend = graph.alphabet, graph.backend
    report = ValidationReport(kind=backend.kind.value, generators=alphabet.symbols, decidable=backend.decidable)
    report.restrictions[1] = 'holds (Cayley graph: one edge per generator at every vertex)'
    report.restrictions[2] = 'holds (edges coloured by generators)'
    report.restrictions[5] = f'holds ({alphabet.size} colours)'
    report.restrictions[4] = 'holds (S generates G)'

    if not alphabet.is_involution():
        raise InvalidAlphabet("inverse_map is not an involution")
    backend.check_generators()
    for i in range(alphabet.size):
        verdict = backend.words_equal((i, alphabet.inverse(i)), ())
        if verdict is WordVerdict.NOT_EQUAL:
            raise InvalidAlphabet(
                f"{alphabet.symbols[i]} * {alphabet.symbols[alphabet.inverse(i)]} is not the identity"
            )
        if verdict is WordVerdict.UNKNOWN:
            report.restrictions[6] = 'unverified (budget exhausted)'
    report.restrictions.setdefault(6, 'holds (every generator paired with its inverse)')

    report.infinite = backend.infinite
    if not backend.infinite:
        raise FiniteGroup(f"{backend.kind.value} describes a finite group; a tape needs infinitely many cells")
    report.restrictions[3] = 'holds (infinite by kind)'
    return report


def ball(graph: TapeGraph, radius: int) -> FrozenSet[CanonicalForm]:
    """All elements at word length <= radius"""
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if not graph.backend.decidable:
        raise UndecidableBackend(f"ball needs exact canonical forms; {graph.backend.kind.value} is semi-decidable")
    seen = {graph.identity()}
    frontier = [graph.identity()]
    for _ in range(radius):
        next_frontier = []
        for form in frontier:
            for g in range(graph.alphabet.size):
                image = graph.act(form, g)
                if image not in seen:
                    seen.add(image)
                    next_frontier.append(image)
        frontier = next_frontier
    return frozenset(seen)


def build_backend(data: Dict[str, Any], alphabet: GeneratorAlphabet, config: Optional[Config] = None) -> GroupBackend:
    kind = GroupKind(data.get('kind', ''))
    if kind is GroupKind.FREE_ABELIAN:
        vectors = data.get('vectors')
        if vectors is not None:
            vectors = [vectors[name] for name in alphabet.symbols]
        return FreeAbelianBackend(alphabet, vectors)
    if kind is GroupKind.FREE_GROUP:
        return FreeGroupBackend(alphabet)
    if kind is GroupKind.INFINITE_DIHEDRAL:
        return InfiniteDihedralBackend(alphabet)
    if kind is GroupKind.FINITELY_PRESENTED:
        budget = data.get('budget') or (config or Config()).REWRITE_BUDGET
        relators = [[alphabet.index(name) for name in relator] for relator in data.get('relators', [])]
        return FinitelyPresentedBackend(alphabet, relators, int(budget))
    elements = data.get('elements', {})
    return FiniteTableBackend(alphabet, data.get('table', []), [elements[name] for name in alphabet.symbols])


def group_from_dict(data: Dict[str, Any], config: Optional[Config] = None) -> TapeGraph:
    alphabet = GeneratorAlphabet.from_names(data.get('generators', []), data.get('inverses', {}))
    backend = build_backend(data, alphabet, config)
    graph = TapeGraph(backend, alphabet)
    logger.info(f"Tape graph ready: {backend.kind.value} on {alphabet.size} generators")
    return graph


def load_group(path: Union[str, Path], config: Optional[Config] = None) -> TapeGraph:
    """Load a group description file; raises InvalidAlphabet / FiniteGroup for invalid tapes"""
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    return group_from_dict(data, config)
