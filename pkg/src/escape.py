"""
Escapes from an element of infinite order.

Repeating a word for an infinite-order element a = h_0 ... h_(m-1) walks off to
infinity but may revisit cells. The schedule below records, for every position
r of the word, the last time the walk comes back to the cell after h_r; following
gamma from position m-1 skips those loops, and the resulting index sequence is
eventually periodic, so one period gives a computable escape.
"""
import logging
from dataclasses import dataclass, field
from itertools import islice
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

from src.errors import ScheduleError, UndecidableBackend
from src.groups import CanonicalForm, GroupWord, TapeGraph, ball

logger = logging.getLogger(__name__)


def _require_decidable(graph: TapeGraph, operation: str):
    if not graph.backend.decidable:
        raise UndecidableBackend(f"{operation} needs a decidable word problem")


def _apply(graph: TapeGraph, form: CanonicalForm, word: Sequence[int]) -> CanonicalForm:
    for g in word:
        form = graph.act(form, g)
    return form


@dataclass(frozen=True)
class InfiniteOrderWitness:
    word: GroupWord
    minimality_checked: bool = False
    order_probe_bound: int = 0
    shorter_word: Optional[GroupWord] = None

    @property
    def m(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class EventuallyPeriodic:
    """prefix followed by period repeated forever"""
    prefix: GroupWord
    period: GroupWord

    def __post_init__(self):
        if not self.period:
            raise ValueError("the periodic part cannot be empty")

    def __getitem__(self, i: int) -> int:
        if i < len(self.prefix):
            return self.prefix[i]
        return self.period[(i - len(self.prefix)) % len(self.period)]

    def __iter__(self) -> Iterator[int]:
        yield from self.prefix
        while True:
            yield from self.period

    def take(self, n: int) -> GroupWord:
        return tuple(islice(iter(self), n))


@dataclass
class EscapeSchedule:
    word: GroupWord
    alpha: Dict[int, FrozenSet[Tuple[int, int]]]
    beta: Dict[int, int]
    gamma: Dict[int, int]
    orbit: List[int]                # x_0 = m-1, x_(i+1) = gamma(x_i), through one full cycle
    tail: int                       # first index of the cycle
    cycle: int                      # cycle length
    period: Tuple[int, int]         # (j1, j2)
    escape_word: GroupWord
    m_max: int
    k_seq: List[int] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.word)

    def x(self, n: int) -> int:
        """gamma applied n times to m-1"""
        if n < len(self.orbit):
            return self.orbit[n]
        return self.orbit[self.tail + (n - self.tail) % self.cycle]

    def escape(self) -> EventuallyPeriodic:
        return EventuallyPeriodic((), self.escape_word)

    def table(self) -> List[Dict]:
        return [{'r': r,
                 'alpha': sorted(self.alpha[r]),
                 'beta': self.beta[r],
                 'gamma': self.gamma[r]} for r in range(self.m)]


def order_probe(graph: TapeGraph, a: Sequence[int], bound: int) -> bool:
    """a^k != e for 1 <= k <= bound"""
    _require_decidable(graph, 'order_probe')
    a = tuple(a)
    identity = graph.identity()
    form = identity
    for _ in range(bound):
        form = _apply(graph, form, a)
        if form == identity:
            return False
    return True


def make_witness(graph: TapeGraph, word: Sequence[int], probe_bound: int) -> InfiniteOrderWitness:
    """Check the element looks infinite-order and that no shorter word names it"""
    _require_decidable(graph, 'make_witness')
    word = tuple(word)
    if not word:
        raise ValueError("the identity has finite order")
    if not order_probe(graph, word, probe_bound):
        raise ValueError(f"{graph.alphabet.format_word(word)} has finite order (power <= {probe_bound} is e)")

    target = graph.backend.canonicalize(word)
    shorter = None
    if target in ball(graph, len(word) - 1):
        shorter = _shortest_word_for(graph, target, len(word) - 1)
        logger.warning(f"{graph.alphabet.format_word(word)} is not minimal; "
                       f"{graph.alphabet.format_word(shorter)} names the same element")
    return InfiniteOrderWitness(word, shorter is None, probe_bound, shorter)


def _shortest_word_for(graph: TapeGraph, target: CanonicalForm, radius: int) -> GroupWord:
    frontier = {graph.identity(): ()}
    seen = dict(frontier)
    for _ in range(radius + 1):
        if target in seen:
            return seen[target]
        nxt = {}
        for form, word in frontier.items():
            for g in range(graph.alphabet.size):
                image = graph.act(form, g)
                if image not in seen:
                    seen[image] = word + (g,)
                    nxt[image] = word + (g,)
        frontier = nxt
    return seen[target]


def _floyd(f, x0: int) -> Tuple[int, int]:
    """(tail, cycle) of the sequence x0, f(x0), f(f(x0)), ..."""
    tortoise, hare = f(x0), f(f(x0))
    while tortoise != hare:
        tortoise, hare = f(tortoise), f(f(hare))
    tail = 0
    tortoise = x0
    while tortoise != hare:
        tortoise, hare = f(tortoise), f(hare)
        tail += 1
    cycle = 1
    hare = f(tortoise)
    while tortoise != hare:
        hare = f(hare)
        cycle += 1
    return tail, cycle


def compute_schedule(graph: TapeGraph, w: InfiniteOrderWitness, m_max: int) -> EscapeSchedule:
    """
    alpha(r) = {(M, s) : h_(r+1..m-1) a^M h_(0..s-1) = e, 0 <= M <= m_max};
    beta(r) the largest such M (0 if none); gamma(r) the s paired with beta(r)
    (the largest one when a non-minimal expression pairs several),
    or (r + 1) mod m when alpha(r) is empty.
    """
    _require_decidable(graph, 'compute_schedule')
    h = w.word
    m = len(h)
    if m == 0:
        raise ValueError("witness word is empty")
    if m_max < 0:
        raise ValueError("m_max must be non-negative")
    identity = graph.identity()

    alpha: Dict[int, FrozenSet[Tuple[int, int]]] = {}
    for r in range(m):
        found = set()
        form = _apply(graph, identity, h[r + 1:])
        for M in range(m_max + 1):
            if M > 0:
                form = _apply(graph, form, h)
            probe = form
            for s in range(m):
                if s > 0:
                    probe = graph.act(probe, h[s - 1])
                if probe == identity:
                    found.add((M, s))
        ss = [s for _, s in found]
        if len(set(ss)) != len(ss):
            raise ScheduleError(f"alpha({r}) pairs one s with several M; the element cannot have infinite order")
        if len({M for M, _ in found}) != len(found):
            logger.warning(f"alpha({r}) pairs one M with several s; the expression is not minimal, "
                           "gamma takes the latest return")
        alpha[r] = frozenset(found)

    beta = {r: max((M for M, _ in alpha[r]), default=0) for r in range(m)}
    gamma = {}
    for r in range(m):
        if alpha[r]:
            gamma[r] = max(s for M, s in alpha[r] if M == beta[r])
        else:
            gamma[r] = (r + 1) % m

    tail, cycle = _floyd(gamma.__getitem__, m - 1)
    orbit = [m - 1]
    while len(orbit) < tail + cycle + 1:
        orbit.append(gamma[orbit[-1]])
    j1 = max(tail, 1)
    j2 = j1 + cycle - 1
    schedule = EscapeSchedule(
        word=h, alpha=alpha, beta=beta, gamma=gamma, orbit=orbit, tail=tail, cycle=cycle,
        period=(j1, j2), escape_word=(), m_max=m_max,
    )
    schedule.escape_word = tuple(h[schedule.x(i)] for i in range(j1, j2 + 1))
    schedule.k_seq = k_sequence(schedule, j2)
    logger.info(f"Escape schedule for {graph.alphabet.format_word(h)}: period {schedule.period}, "
                f"escape {graph.alphabet.format_word(schedule.escape_word)} repeated")
    return schedule


def k_sequence(schedule: EscapeSchedule, n_max: int) -> List[int]:
    """k_0 = -1 and the three-case step on alpha(x_n)"""
    m = schedule.m
    ks = [-1]
    for n in range(n_max):
        x = schedule.x(n)
        if not schedule.alpha[x]:
            step = 1 if x == m - 1 else 0
        else:
            step = schedule.beta[x] + 1
        ks.append(ks[-1] + step)
    return ks


def _power(graph: TapeGraph, a: GroupWord, k: int) -> GroupWord:
    if k >= 0:
        return a * k
    return graph.alphabet.inverse_word(a) * (-k)


def verify_prefix_lemma(graph: TapeGraph, schedule: EscapeSchedule, w: InfiniteOrderWitness, n_max: int) -> bool:
    """h_(x_1) ... h_(x_n) = a^(k_n) h_0 ... h_(x_n) for 1 <= n <= n_max"""
    _require_decidable(graph, 'verify_prefix_lemma')
    h = w.word
    ks = k_sequence(schedule, n_max)
    lhs = graph.identity()
    for n in range(1, n_max + 1):
        x = schedule.x(n)
        lhs = graph.act(lhs, h[x])
        rhs = graph.backend.canonicalize(_power(graph, h, ks[n]) + h[:x + 1])
        if lhs != rhs:
            logger.warning(f"Prefix identity fails at n={n} (k_n={ks[n]})")
            return False
    return True


def self_intersection_scan(graph: TapeGraph, seq: EventuallyPeriodic, N: int) -> Optional[int]:
    """Least j <= N whose prefix product repeats an earlier one (e counts as step 0)"""
    _require_decidable(graph, 'self_intersection_scan')
    form = graph.identity()
    seen = {form}
    for j, g in enumerate(islice(iter(seq), N), start=1):
        form = graph.act(form, g)
        if form in seen:
            return j
        seen.add(form)
    return None


def verify_escape(graph: TapeGraph, seq, N: int) -> bool:
    """The N + 1 prefix products of lengths 0 through N (e included) are pairwise distinct"""
    if not isinstance(seq, EventuallyPeriodic):
        seq = EventuallyPeriodic((), tuple(seq))
    return self_intersection_scan(graph, seq, N) is None
