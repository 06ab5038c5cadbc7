"""
Turing machines whose tape is a Cayley graph.

Cells are addressed by canonical forms, so the sparse tape dictionary is the
"list of visited nodes" an oracle machine would keep; moving the head is one
call to the backend's act().
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, FrozenSet, Hashable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import pandas as pd

from src.errors import MachineDefinitionError, PointerClobber
from src.groups import CanonicalForm, GroupWord, TapeGraph, canonicalize

logger = logging.getLogger(__name__)

State = Hashable
Symbol = Hashable
STAY = 'Stay'
TRACE_COLUMNS = ['step', 'state', 'head', 'read', 'write', 'move']


@dataclass(frozen=True)
class Transition:
    next_state: State
    write: Symbol
    move: Optional[int]     # generator index, None for Stay


def _check_shape(states, tape_alphabet, blank, input_alphabet, start, terminals):
    if blank not in tape_alphabet:
        raise MachineDefinitionError(f"Blank {blank!r} is not in the tape alphabet")
    if blank in input_alphabet:
        raise MachineDefinitionError("The blank cannot be an input symbol")
    if not set(input_alphabet) <= set(tape_alphabet):
        raise MachineDefinitionError("Input alphabet must be a subset of the tape alphabet")
    if start not in states:
        raise MachineDefinitionError(f"Start state {start!r} is not a declared state")
    if not set(terminals) <= set(states):
        raise MachineDefinitionError(f"Terminal states {set(terminals) - set(states)} are not declared")


@dataclass(frozen=True)
class MachineSpec:
    """A machine over a tape graph: delta must be total on (states - terminals) x tape_alphabet"""
    graph: TapeGraph
    states: FrozenSet[State]
    tape_alphabet: FrozenSet[Symbol]
    blank: Symbol
    input_alphabet: FrozenSet[Symbol]
    transitions: Mapping[Tuple[State, Symbol], Transition]
    start: State
    terminals: FrozenSet[State]
    check_totality: bool = True

    def __post_init__(self):
        _check_shape(self.states, self.tape_alphabet, self.blank, self.input_alphabet, self.start, self.terminals)
        if self.check_totality:
            self._check_transitions()

    def _check_transitions(self):
        n = self.graph.alphabet.size
        for q in self.states - self.terminals:
            for s in self.tape_alphabet:
                if (q, s) not in self.transitions:
                    raise MachineDefinitionError(f"No transition for state {q!r} reading {s!r}")
        for (q, s), t in self.transitions.items():
            if t.next_state not in self.states or t.write not in self.tape_alphabet:
                raise MachineDefinitionError(f"Transition ({q!r}, {s!r}) leaves the declared states or alphabet")
            if t.move is not None and not 0 <= t.move < n:
                raise MachineDefinitionError(f"Transition ({q!r}, {s!r}) moves along unknown generator {t.move}")

    def delta(self, state: State, symbol: Symbol) -> Transition:
        try:
            return self.transitions[(state, symbol)]
        except KeyError:
            raise MachineDefinitionError(f"No transition for state {state!r} reading {symbol!r}") from None


@dataclass(frozen=True)
class StandardTM:
    """Classical one-tape machine; moves are 'L' or 'R' on a one-way tape where L at cell 0 stays"""
    states: FrozenSet[str]
    tape_alphabet: FrozenSet[str]
    blank: str
    input_alphabet: FrozenSet[str]
    transitions: Mapping[Tuple[str, str], Tuple[str, str, str]]
    start: str
    terminals: FrozenSet[str]

    def __post_init__(self):
        _check_shape(self.states, self.tape_alphabet, self.blank, self.input_alphabet, self.start, self.terminals)
        for q in self.states - self.terminals:
            for s in self.tape_alphabet:
                if (q, s) not in self.transitions:
                    raise MachineDefinitionError(f"No transition for state {q!r} reading {s!r}")
        for key, (q2, w, move) in self.transitions.items():
            if q2 not in self.states or w not in self.tape_alphabet:
                raise MachineDefinitionError(f"Transition {key} leaves the declared states or alphabet")
            if move not in ('L', 'R'):
                raise MachineDefinitionError(f"Transition {key} has move {move!r}; expected L or R")


@dataclass
class Configuration:
    """Running state; cells missing from `tape` hold the blank and no entry ever stores it"""
    state: State
    head: CanonicalForm
    tape: Dict[CanonicalForm, Symbol] = field(default_factory=dict)
    steps: int = 0

    def copy(self) -> 'Configuration':
        return Configuration(self.state, self.head, dict(self.tape), self.steps)

    def read(self, blank: Symbol) -> Symbol:
        return self.tape.get(self.head, blank)


@dataclass(frozen=True)
class TraceEntry:
    step: int
    state: State
    head: CanonicalForm
    read: Symbol
    write: Symbol
    move: Optional[int]


RunTrace = List[TraceEntry]


@dataclass(frozen=True)
class HaltReason:
    kind: str               # 'Terminal' or 'OutOfFuel'
    state: Optional[State] = None

    @classmethod
    def terminal(cls, state: State) -> 'HaltReason':
        return cls('Terminal', state)

    @classmethod
    def out_of_fuel(cls) -> 'HaltReason':
        return cls('OutOfFuel')

    @property
    def is_terminal(self) -> bool:
        return self.kind == 'Terminal'

    def __str__(self):
        return f"Terminal({self.state})" if self.is_terminal else 'OutOfFuel'


def initial_configuration(spec: MachineSpec, cells: Sequence[Tuple[GroupWord, Symbol]] = ()) -> Configuration:
    """Start state at the identity, with the given (word, symbol) cells written"""
    tape: Dict[CanonicalForm, Symbol] = {}
    for word, symbol in cells:
        if symbol not in spec.tape_alphabet:
            raise MachineDefinitionError(f"Initial symbol {symbol!r} is not in the tape alphabet")
        form = canonicalize(spec.graph, word)
        if symbol == spec.blank:
            tape.pop(form, None)
        else:
            tape[form] = symbol
    return Configuration(spec.start, spec.graph.identity(), tape, 0)


def _advance(spec: MachineSpec, cfg: Configuration) -> TraceEntry:
    """Apply delta once to cfg in place"""
    read = cfg.tape.get(cfg.head, spec.blank)
    t = spec.delta(cfg.state, read)
    entry = TraceEntry(cfg.steps, cfg.state, cfg.head, read, t.write, t.move)
    if t.write == spec.blank:
        cfg.tape.pop(cfg.head, None)
    else:
        cfg.tape[cfg.head] = t.write
    if t.move is not None:
        cfg.head = spec.graph.act(cfg.head, t.move)
    cfg.state = t.next_state
    cfg.steps += 1
    return entry


def step(spec: MachineSpec, cfg: Configuration) -> Configuration:
    if cfg.state in spec.terminals:
        raise ValueError(f"State {cfg.state!r} is terminal; nothing to step")
    nxt = cfg.copy()
    _advance(spec, nxt)
    return nxt


def iter_run(spec: MachineSpec, cfg: Configuration, fuel: Optional[int]) -> Iterator[TraceEntry]:
    """Advance cfg in place, yielding one entry per step; stops at a terminal state or after `fuel` steps"""
    taken = 0
    while cfg.state not in spec.terminals and (fuel is None or taken < fuel):
        yield _advance(spec, cfg)
        taken += 1


def run(spec: MachineSpec, cfg: Configuration, fuel: int,
        record: bool = True) -> Tuple[Configuration, RunTrace, HaltReason]:
    if fuel < 0:
        raise ValueError("fuel must be non-negative")
    current = cfg.copy()
    trace: RunTrace = []
    for entry in iter_run(spec, current, fuel):
        if record:
            trace.append(entry)
    halt = HaltReason.terminal(current.state) if current.state in spec.terminals else HaltReason.out_of_fuel()
    logger.debug(f"Run stopped after {current.steps - cfg.steps} steps: {halt}")
    return current, trace, halt


@dataclass
class WalkCell:
    pointers: List[Tuple[int, int]] = field(default_factory=list)   # (visit index, generator back)
    marked: bool = False


def word_problem_walk(graph: TapeGraph, u: Sequence[int], v: Sequence[int]) -> bool:
    """
    Decide u == v by walking the tape: lay pointers along u, mark the end,
    follow the pointers home, then walk v and look for the mark.
    Cell identity comes from the tape addressing alone.
    """
    alphabet = graph.alphabet
    if not (alphabet.is_well_formed(u) and alphabet.is_well_formed(v)):
        raise ValueError("word_problem_walk needs words over the tape alphabet")

    tape: Dict[CanonicalForm, WalkCell] = {}
    head = graph.identity()
    for k, g in enumerate(u):
        head = graph.act(head, g)
        tape.setdefault(head, WalkCell()).pointers.append((k, alphabet.inverse(g)))
    tape.setdefault(head, WalkCell()).marked = True

    for k in range(len(u) - 1, -1, -1):
        visit, back = tape[head].pointers.pop()
        if visit != k:
            raise PointerClobber(f"Expected the pointer laid at step {k}, found step {visit}")
        head = graph.act(head, back)

    for g in v:
        head = graph.act(head, g)
    cell = tape.get(head)
    return bool(cell and cell.marked)


def trace_rows(trace: RunTrace, graph: TapeGraph,
               show: Callable[[Any], str] = str) -> List[Tuple[int, str, str, str, str, str]]:
    names = graph.alphabet.symbols
    return [(e.step, show(e.state), graph.render(e.head), show(e.read), show(e.write),
             STAY if e.move is None else names[e.move]) for e in trace]


def write_trace(trace: RunTrace, graph: TapeGraph, path: Union[str, Path], fmt: str = 'tsv',
                show: Callable[[Any], str] = str) -> Path:
    df = pd.DataFrame(trace_rows(trace, graph, show), columns=TRACE_COLUMNS)
    path = Path(path)
    if fmt == 'json':
        df.to_json(path, orient='records', force_ascii=False, indent=2)
    elif fmt == 'tsv':
        df.to_csv(path, sep='\t', index=False)
    else:
        raise ValueError(f"Unknown trace format {fmt!r}")
    return path


# ==================== Machine files ====================

def _move_index(graph: TapeGraph, name: str) -> Optional[int]:
    if name == STAY:
        return None
    try:
        return graph.alphabet.index(name)
    except ValueError as e:
        raise MachineDefinitionError(str(e)) from None


def _require(data: Dict[str, Any], *keys: str):
    missing = [k for k in keys if k not in data]
    if missing:
        raise MachineDefinitionError(f"Machine file is missing {missing}")


def standard_from_dict(data: Dict[str, Any]) -> StandardTM:
    _require(data, 'states', 'alphabet', 'blank', 'transitions', 'start')
    table = {}
    for row in data['transitions']:
        if len(row) != 5:
            raise MachineDefinitionError(f"Transition rows have five entries, got {row}")
        q, s, q2, w, move = row
        if (q, s) in table:
            raise MachineDefinitionError(f"Duplicate transition for ({q!r}, {s!r})")
        table[(q, s)] = (q2, w, move)
    return StandardTM(
        states=frozenset(data['states']),
        tape_alphabet=frozenset(data['alphabet']),
        blank=data['blank'],
        input_alphabet=frozenset(data.get('input_alphabet', [])),
        transitions=table,
        start=data['start'],
        terminals=frozenset(data.get('terminals', [])),
    )


def graph_machine_from_dict(data: Dict[str, Any], graph: TapeGraph,
                            decode_state: Callable[[Any], State] = lambda x: x,
                            decode_symbol: Callable[[Any], Symbol] = lambda x: x) -> MachineSpec:
    """Build a MachineSpec; moves are generator names or 'Stay'"""
    _require(data, 'states', 'alphabet', 'blank', 'transitions', 'start')
    table: Dict[Tuple[State, Symbol], Transition] = {}
    for row in data['transitions']:
        if len(row) != 5:
            raise MachineDefinitionError(f"Transition rows have five entries, got {row}")
        q, s, q2, w, move = row
        key = (decode_state(q), decode_symbol(s))
        if key in table:
            raise MachineDefinitionError(f"Duplicate transition for {key}")
        table[key] = Transition(decode_state(q2), decode_symbol(w), _move_index(graph, move))
    return MachineSpec(
        graph=graph,
        states=frozenset(decode_state(q) for q in data['states']),
        tape_alphabet=frozenset(decode_symbol(s) for s in data['alphabet']),
        blank=decode_symbol(data['blank']),
        input_alphabet=frozenset(decode_symbol(s) for s in data.get('input_alphabet', [])),
        transitions=table,
        start=decode_state(data['start']),
        terminals=frozenset(decode_state(q) for q in data.get('terminals', [])),
    )


def machine_to_dict(machine: Union[StandardTM, MachineSpec], kind: Optional[str] = None,
                    encode_state: Callable[[State], Any] = lambda x: x,
                    encode_symbol: Callable[[Symbol], Any] = lambda x: x) -> Dict[str, Any]:
    if isinstance(machine, StandardTM):
        rows = [[q, s, q2, w, m] for (q, s), (q2, w, m) in machine.transitions.items()]
        kind = kind or 'standard'
    else:
        names = machine.graph.alphabet.symbols
        rows = [[encode_state(q), encode_symbol(s), encode_state(t.next_state), encode_symbol(t.write),
                 STAY if t.move is None else names[t.move]]
                for (q, s), t in machine.transitions.items()]
        kind = kind or 'graph'
    sort_key = lambda x: json.dumps(x, ensure_ascii=False)
    return {
        'kind': kind,
        'states': sorted((encode_state(q) for q in machine.states), key=sort_key),
        'alphabet': sorted((encode_symbol(s) for s in machine.tape_alphabet), key=sort_key),
        'blank': encode_symbol(machine.blank),
        'input_alphabet': sorted((encode_symbol(s) for s in machine.input_alphabet), key=sort_key),
        'transitions': sorted(rows, key=sort_key),
        'start': encode_state(machine.start),
        'terminals': sorted((encode_state(q) for q in machine.terminals), key=sort_key),
    }


def read_machine_file(path: Union[str, Path]) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        data = json.load(f)
    if not isinstance(data, dict):
        raise MachineDefinitionError(f"{path} does not hold a machine object")
    return data


def load_machine(path: Union[str, Path], graph: Optional[TapeGraph] = None) -> Union[StandardTM, MachineSpec]:
    """Load a 'standard' or 'graph' machine file; compiled machines go through compiler.load_compiled"""
    data = read_machine_file(path)
    kind = data.get('kind', 'standard')
    if kind == 'standard':
        return standard_from_dict(data)
    if kind == 'graph':
        if graph is None:
            raise MachineDefinitionError("A graph machine needs a tape graph to resolve its moves")
        return graph_machine_from_dict(data, graph)
    raise MachineDefinitionError(f"Machine kind {kind!r} is not loadable here")


def dump_machine(machine: Union[StandardTM, MachineSpec], path: Union[str, Path]) -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(machine_to_dict(machine), f, indent=2, ensure_ascii=False)
    logger.info(f"Machine written to {path}")
    return path
