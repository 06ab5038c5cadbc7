"""
Compile a standard one-tape machine into a machine over any tape graph.

The compiled machine keeps the simulated tape on a spanning tree that it grows
on-line. Every cell stores (gamma, sigma, A, B): the simulated symbol, the edge
back toward the root, the tree edges leading away from the cell, and the edges
already found to lead somewhere visited. Moving right in the simulation means
moving to the successor in the depth-first order of that tree; moving left means
moving to the predecessor.

Extended generators S' are handled as ordinals: 0 is the bottom sentinel,
generator i is i + 1, and n + 1 is the top sentinel. Both sentinels move the
head nowhere.
"""
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from src.errors import BudgetExhausted, MachineDefinitionError
from src.groups import CanonicalForm, GroupWord, TapeGraph
from src.machine import (Configuration, HaltReason, MachineSpec, StandardTM, Transition,
                         graph_machine_from_dict, iter_run, machine_to_dict, read_machine_file)

logger = logging.getLogger(__name__)

BOTTOM = 0
BOTTOM_NAME = '<g0>'
TOP_NAME = '<top>'
FAMILIES = ('C', 'R', 'L', 'E', 'B')

# compiled steps allowed per simulated step before bisimulation gives up
COMPILED_FUEL_FACTOR = 64
TRANSCRIBE_STEP_LIMIT = 100_000


class CompiledSymbol(NamedTuple):
    gamma: str
    sigma: int
    A: FrozenSet[int]
    B: FrozenSet[int]


class CompiledState(NamedTuple):
    family: str
    q: str
    x: Optional[int] = None

    def __str__(self):
        return self.family + self.q if self.x is None else f"{self.family}{self.q}[{self.x}]"


@dataclass(frozen=True)
class ExtendedGenerators:
    """S' = {g0} + S + {top} as ordinals 0..n+1"""
    n: int
    inverse_map: Tuple[int, ...]

    @property
    def top(self) -> int:
        return self.n + 1

    @property
    def all(self) -> range:
        return range(self.n + 2)

    @property
    def real(self) -> range:
        return range(1, self.n + 1)

    def inverse(self, x: int) -> int:
        if x == BOTTOM or x == self.top:
            return x
        return self.inverse_map[x - 1] + 1

    def move(self, x: int) -> Optional[int]:
        if x == BOTTOM or x == self.top:
            return None
        return x - 1

    @classmethod
    def for_graph(cls, graph: TapeGraph) -> 'ExtendedGenerators':
        return cls(graph.alphabet.size, graph.alphabet.inverse_map)


def compiled_state_count(m: StandardTM, graph: TapeGraph) -> int:
    n = graph.alphabet.size
    return len(m.states) * (1 + 2 * (n + 2) + 2 * n)


class CompiledTable(Mapping):
    """
    The transition table of the compiled machine, computed row by row on demand.
    Iteration enumerates every (non-terminal state, symbol) key.
    """

    def __init__(self, m: StandardTM, ext: ExtendedGenerators,
                 states: FrozenSet[CompiledState], symbols: FrozenSet[CompiledSymbol],
                 terminals: FrozenSet[CompiledState]):
        self.m = m
        self.ext = ext
        self.states = states
        self.symbols = symbols
        self.terminals = terminals
        self._rows: Dict[Tuple[CompiledState, CompiledSymbol], Transition] = {}

    def __getitem__(self, key) -> Transition:
        row = self._rows.get(key)
        if row is not None:
            return row
        state, symbol = key
        if state not in self.states or state in self.terminals or symbol not in self.symbols:
            raise KeyError(key)
        row = self._row(state, symbol)
        self._rows[key] = row
        return row

    def __iter__(self) -> Iterator[Tuple[CompiledState, CompiledSymbol]]:
        for state in sorted(self.states - self.terminals, key=_state_sort_key):
            for symbol in sorted(self.symbols, key=_symbol_sort_key):
                yield state, symbol

    def __len__(self) -> int:
        return len(self.states - self.terminals) * len(self.symbols)

    def _row(self, state: CompiledState, symbol: CompiledSymbol) -> Transition:
        ext = self.ext
        gamma, sigma, A, B = symbol
        family, q, x = state

        if family == 'C':
            q2, write, direction = self.m.transitions[(q, gamma)]
            written = CompiledSymbol(write, sigma, A, B)
            if direction == 'R':
                return Transition(CompiledState('R', q2, BOTTOM), written, None)
            # rootward: the parent sees this cell through sigma^-1
            return Transition(CompiledState('L', q2, ext.inverse(sigma)), written, ext.move(sigma))

        if family == 'L':
            below = [y for y in A if y < x]
            if not below:
                return Transition(CompiledState('C', q), symbol, None)
            y = max(below)
            return Transition(CompiledState('L', q, ext.top), symbol, ext.move(y))

        if family == 'R':
            above = [y for y in A if y > x]
            if above:
                y = min(above)
                return Transition(CompiledState('C', q), symbol, ext.move(y))
            fresh = [z for z in ext.real if z not in B and z > x]
            if fresh:
                y = min(fresh)
                return Transition(CompiledState('E', q, y), CompiledSymbol(gamma, sigma, A | {y}, B), ext.move(y))
            return Transition(CompiledState('R', q, ext.inverse(sigma)), symbol, ext.move(sigma))

        if family == 'E':
            if not A and not B:
                back = ext.inverse(x)
                return Transition(CompiledState('C', q), CompiledSymbol(gamma, back, frozenset(), frozenset({back})), None)
            return Transition(CompiledState('B', q, x), symbol, ext.move(ext.inverse(x)))

        # family B: the probe along x hit a visited cell
        return Transition(CompiledState('R', q, x), CompiledSymbol(gamma, sigma, A - {x}, B | {x}), None)


def _state_sort_key(state: CompiledState):
    return (FAMILIES.index(state.family), state.q, -1 if state.x is None else state.x)


def _symbol_sort_key(symbol: CompiledSymbol):
    return (symbol.gamma, symbol.sigma, sorted(symbol.A), sorted(symbol.B))


def _disjoint_pairs(real: range) -> Iterator[Tuple[FrozenSet[int], FrozenSet[int]]]:
    for marks in product((0, 1, 2), repeat=len(real)):
        A = frozenset(g for g, mark in zip(real, marks) if mark == 1)
        B = frozenset(g for g, mark in zip(real, marks) if mark == 2)
        yield A, B


def compile_machine(m: StandardTM, graph: TapeGraph) -> MachineSpec:
    """Build the machine over `graph` that simulates `m` one step per C-state visit"""
    ext = ExtendedGenerators.for_graph(graph)
    states = set()
    for q in m.states:
        states.add(CompiledState('C', q))
        for x in ext.all:
            states.add(CompiledState('R', q, x))
            states.add(CompiledState('L', q, x))
        for x in ext.real:
            states.add(CompiledState('E', q, x))
            states.add(CompiledState('B', q, x))
    states = frozenset(states)

    pairs = list(_disjoint_pairs(ext.real))
    symbols = frozenset(CompiledSymbol(gamma, sigma, A, B)
                        for gamma in m.tape_alphabet for sigma in ext.all for A, B in pairs)
    empty = frozenset()
    blank = CompiledSymbol(m.blank, BOTTOM, empty, empty)
    inputs = frozenset(CompiledSymbol(s, BOTTOM, empty, empty) for s in m.input_alphabet)
    terminals = frozenset(CompiledState('C', q) for q in m.terminals)

    spec = MachineSpec(
        graph=graph,
        states=states,
        tape_alphabet=symbols,
        blank=blank,
        input_alphabet=inputs,
        transitions=CompiledTable(m, ext, states, symbols, terminals),
        start=CompiledState('C', m.start),
        terminals=terminals,
        check_totality=False,
    )
    logger.info(f"Compiled {len(m.states)}-state machine onto {graph.backend.kind.value}: "
                f"{len(states)} states, {len(symbols)} symbols")
    return spec


# ==================== Serialization ====================

def _name(graph: TapeGraph, x: Optional[int]) -> Optional[str]:
    if x is None:
        return None
    if x == BOTTOM:
        return BOTTOM_NAME
    if x == graph.alphabet.size + 1:
        return TOP_NAME
    return graph.alphabet.symbols[x - 1]


def _ordinal(graph: TapeGraph, name: Optional[str]) -> Optional[int]:
    if name is None:
        return None
    if name == BOTTOM_NAME:
        return BOTTOM
    if name == TOP_NAME:
        return graph.alphabet.size + 1
    try:
        return graph.alphabet.index(name) + 1
    except ValueError as e:
        raise MachineDefinitionError(str(e)) from None


def encode_state(graph: TapeGraph, state: CompiledState) -> List[Any]:
    return [state.family, state.q, _name(graph, state.x)]


def encode_symbol(graph: TapeGraph, symbol: CompiledSymbol) -> List[Any]:
    return [symbol.gamma, _name(graph, symbol.sigma),
            sorted((_name(graph, g) for g in symbol.A), key=lambda s: _ordinal(graph, s)),
            sorted((_name(graph, g) for g in symbol.B), key=lambda s: _ordinal(graph, s))]


def decode_state(graph: TapeGraph, raw: Sequence[Any]) -> CompiledState:
    if len(raw) != 3 or raw[0] not in FAMILIES:
        raise MachineDefinitionError(f"Compiled state must be [family, q, x], got {raw}")
    return CompiledState(raw[0], raw[1], _ordinal(graph, raw[2]))


def decode_symbol(graph: TapeGraph, raw: Sequence[Any]) -> CompiledSymbol:
    if len(raw) != 4:
        raise MachineDefinitionError(f"Compiled symbol must be [gamma, sigma, A, B], got {raw}")
    gamma, sigma, A, B = raw
    return CompiledSymbol(gamma, _ordinal(graph, sigma),
                          frozenset(_ordinal(graph, g) for g in A), frozenset(_ordinal(graph, g) for g in B))


def compiled_to_dict(spec: MachineSpec) -> Dict[str, Any]:
    graph = spec.graph
    return machine_to_dict(spec, kind='compiled',
                           encode_state=lambda s: encode_state(graph, s),
                           encode_symbol=lambda s: encode_symbol(graph, s))


def dump_compiled(spec: MachineSpec, path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(compiled_to_dict(spec), f, ensure_ascii=False)
    logger.info(f"Compiled machine written to {path}")
    return path


def load_compiled(path: Union[str, Path], graph: TapeGraph) -> MachineSpec:
    data = read_machine_file(path)
    if data.get('kind') != 'compiled':
        raise MachineDefinitionError(f"{path} is not a compiled machine")
    return graph_machine_from_dict(data, graph,
                                   decode_state=lambda raw: decode_state(graph, raw),
                                   decode_symbol=lambda raw: decode_symbol(graph, raw))


# ==================== Running ====================

def _cell(spec: MachineSpec, cfg: Configuration, form: CanonicalForm) -> CompiledSymbol:
    return cfg.tape.get(form, spec.blank)


def _run_until_c(spec: MachineSpec, cfg: Configuration, limit: int):
    for _ in iter_run(spec, cfg, limit):
        if cfg.state.family == 'C':
            return
    raise BudgetExhausted(f"No successor cell found within {limit} steps", limit)


def _walk_home(spec: MachineSpec, cfg: Configuration, graph: TapeGraph):
    ext = ExtendedGenerators.for_graph(graph)
    for _ in range(len(cfg.tape) + 1):
        sigma = _cell(spec, cfg, cfg.head).sigma
        if sigma == BOTTOM:
            return
        cfg.head = graph.act(cfg.head, ext.move(sigma))
    raise RuntimeError("sigma pointers do not lead back to the root")


def tree_word(cfg: Configuration, graph: TapeGraph) -> GroupWord:
    """Path from the root to the head, read off the sigma pointers"""
    ext = ExtendedGenerators.for_graph(graph)
    edges: List[int] = []
    head = cfg.head
    for _ in range(len(cfg.tape) + 1):
        cell = cfg.tape.get(head)
        sigma = BOTTOM if cell is None else cell.sigma
        if sigma == BOTTOM:
            return tuple(reversed(edges))
        edges.append(ext.inverse(sigma) - 1)
        head = graph.act(head, ext.move(sigma))
    raise RuntimeError("sigma pointers do not lead back to the root")


def transcribe_input(compiled: MachineSpec, graph: TapeGraph, input: Sequence[str]) -> Configuration:
    """
    Lay the input on tree cells 1..k (the root is cell 0 and stays blank) by
    driving the compiled successor search, then park the head at the root in C q0.
    """
    start: CompiledState = compiled.start
    empty = frozenset()
    for s in input:
        if CompiledSymbol(s, BOTTOM, empty, empty) not in compiled.input_alphabet:
            raise ValueError(f"{s!r} is not an input symbol of the compiled machine")

    cfg = Configuration(start, graph.identity(), {}, 0)
    for s in input:
        cfg.state = CompiledState('R', start.q, BOTTOM)
        _run_until_c(compiled, cfg, TRANSCRIBE_STEP_LIMIT)
        cell = _cell(compiled, cfg, cfg.head)
        cfg.tape[cfg.head] = cell._replace(gamma=s)
    _walk_home(compiled, cfg, graph)
    cfg.state = start
    cfg.steps = 0
    return cfg


def run_standard(m: StandardTM, input: Sequence[str], fuel: int) -> Tuple[List[Tuple[str, str]], HaltReason, List[str]]:
    """Direct run on a one-way tape: cell 0 blank, input from cell 1, L at cell 0 stays"""
    return run_standard_from(m, [m.blank] + list(input), 0, m.start, fuel)


def run_standard_from(m: StandardTM, cells: Sequence[str], head: int, state: str,
                      fuel: int) -> Tuple[List[Tuple[str, str]], HaltReason, List[str]]:
    """Direct run from an arbitrary tape prefix, head position and state"""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    if not 0 <= head < max(len(cells), 1):
        raise ValueError(f"head {head} is off the tape")
    tape = list(cells) or [m.blank]
    visits: List[Tuple[str, str]] = []
    while state not in m.terminals and len(visits) < fuel:
        read = tape[head]
        visits.append((state, read))
        state, tape[head], direction = m.transitions[(state, read)]
        if direction == 'R':
            head += 1
            if head == len(tape):
                tape.append(m.blank)
        elif head > 0:
            head -= 1
    halt = HaltReason.terminal(state) if state in m.terminals else HaltReason.out_of_fuel()
    return visits, halt, tape


def _compiled_visits(compiled: MachineSpec, cfg: Configuration, fuel: int) -> Tuple[List[Tuple[str, str]], HaltReason, int]:
    visits: List[Tuple[str, str]] = []
    start_steps = cfg.steps
    for entry in iter_run(compiled, cfg, fuel * COMPILED_FUEL_FACTOR + COMPILED_FUEL_FACTOR):
        if entry.state.family == 'C':
            visits.append((entry.state.q, entry.read.gamma))
        # finish the last simulated move so a halt right at the fuel limit is seen
        if len(visits) == fuel and cfg.state.family == 'C':
            break
    halt = HaltReason.terminal(cfg.state.q) if cfg.state in compiled.terminals else HaltReason.out_of_fuel()
    return visits, halt, cfg.steps - start_steps


@dataclass
class BisimReport:
    equivalent: bool
    compared: int
    direct_halt: HaltReason
    compiled_halt: HaltReason
    compiled_steps: int = 0
    mismatch: Optional[str] = None

    def as_dict(self) -> Dict[str, Any]:
        return {
            'equivalent': self.equivalent,
            'compared': self.compared,
            'direct_halt': str(self.direct_halt),
            'compiled_halt': str(self.compiled_halt),
            'compiled_steps': self.compiled_steps,
            'mismatch': self.mismatch,
        }


def simulated_cells(compiled: MachineSpec, cfg: Configuration, graph: TapeGraph) -> List[CanonicalForm]:
    """Cells of the spanning tree in depth-first order from the root: the simulated tape, left to right"""
    ext = ExtendedGenerators.for_graph(graph)
    order: List[CanonicalForm] = []
    stack = [graph.identity()]
    while stack:
        if len(order) > len(cfg.tape):
            raise RuntimeError("A pointers do not form a tree")
        form = stack.pop()
        order.append(form)
        for y in sorted(_cell(compiled, cfg, form).A, reverse=True):
            stack.append(graph.act(form, ext.move(y)))
    return order


def bisimulate(m: StandardTM, graph: TapeGraph, input: Sequence[str], fuel: int) -> BisimReport:
    """Run m directly and compiled on `graph`; compare the C-state projection step for step"""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    compiled = compile_machine(m, graph)
    cfg = transcribe_input(compiled, graph, input)
    return bisimulate_from(m, graph, cfg, fuel, compiled)


def bisimulate_from(m: StandardTM, graph: TapeGraph, cfg: Configuration, fuel: int,
                    compiled: Optional[MachineSpec] = None) -> BisimReport:
    """
    Bisimulate from a compiled configuration sitting in a C state. The direct run
    starts on the simulated tape read off the spanning tree, with the head at the
    position of cfg.head in that order. cfg itself is left untouched.
    """
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    if compiled is None:
        compiled = compile_machine(m, graph)
    if not isinstance(cfg.state, CompiledState) or cfg.state.family != 'C':
        raise ValueError(f"bisimulation starts in a C state, not {cfg.state}")
    order = simulated_cells(compiled, cfg, graph)
    if cfg.head not in order:
        raise ValueError("the head is not on the spanning tree")
    if fuel == 0:
        return BisimReport(True, 0, HaltReason.out_of_fuel(), HaltReason.out_of_fuel())
    cells = [_cell(compiled, cfg, form).gamma for form in order]

    with ThreadPoolExecutor(max_workers=2) as pool:
        direct_job = pool.submit(run_standard_from, m, cells, order.index(cfg.head), cfg.state.q, fuel)
        compiled_job = pool.submit(_compiled_visits, compiled, cfg.copy(), fuel)
        direct, direct_halt, _ = direct_job.result()
        simulated, compiled_halt, compiled_steps = compiled_job.result()

    mismatch = None
    for i, (expected, got) in enumerate(zip(direct, simulated)):
        if expected != got:
            mismatch = f"step {i}: direct {expected}, compiled {got}"
            break
    if mismatch is None and len(simulated) < len(direct):
        mismatch = f"compiled run stopped after {len(simulated)} simulated steps, direct took {len(direct)}"
    if mismatch is None and direct_halt.is_terminal:
        if not compiled_halt.is_terminal or compiled_halt.state != direct_halt.state or len(simulated) != len(direct):
            mismatch = f"direct halted {direct_halt} after {len(direct)} steps, compiled {compiled_halt}"

    report = BisimReport(mismatch is None, min(len(direct), len(simulated)), direct_halt, compiled_halt,
                         compiled_steps, mismatch)
    if mismatch:
        logger.warning(f"Bisimulation failed on {graph.backend.kind.value}: {mismatch}")
    else:
        logger.info(f"Bisimulation held for {report.compared} steps ({compiled_steps} compiled steps)")
    return report


def visitation_order(compiled: MachineSpec, graph: TapeGraph, fuel: int) -> List[GroupWord]:
    """Words of the tree cells in the order the compiled machine creates them, from a blank tape"""
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    cfg = Configuration(compiled.start, graph.identity(), {}, 0)
    words: Dict[CanonicalForm, GroupWord] = {graph.identity(): ()}
    created: List[GroupWord] = []
    for entry in iter_run(compiled, cfg, fuel):
        state: CompiledState = entry.state
        if state.family != 'E' or entry.read.A or entry.read.B:
            continue
        x = state.x - 1
        parent = graph.act(entry.head, graph.alphabet.inverse(x))
        word = words[parent] + (x,)
        words[entry.head] = word
        created.append(word)
    return created
