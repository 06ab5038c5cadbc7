#!/usr/bin/env python3
import sys
from pathlib import Path

# Add project root to path so we can import config
project_root = str(Path(__file__).resolve().parents[1])
if project_root not in sys.path:
    sys.path.insert(0, project_root)

import argparse
import json
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

from config.config import Config
from src import algebra, compiler, escape, machine, tree_order, words
from src.errors import CayleyTapeError, FiniteGroup, InvalidAlphabet, LowDegreeResidue
from src.groups import TapeGraph, WordVerdict, load_group, validate_tape_graph, words_equal
from src.run_logger import RunLogger

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad input files or arguments; exit code 2"""


@dataclass
class RunConfig:
    subcommand: str
    group: Optional[Path]
    machine: Optional[Path]
    fuel: int
    fmt: str
    seed: int

    def __post_init__(self):
        if self.fuel < 0:
            raise UsageError("--fuel must be non-negative")
        for path in (self.group, self.machine):
            if path is not None and not Path(path).exists():
                raise UsageError(f"{path} does not exist")


def _show(value: Any) -> str:
    if isinstance(value, compiler.CompiledState):
        return str(value)
    if isinstance(value, compiler.CompiledSymbol):
        return f"({value.gamma},{value.sigma},{sorted(value.A)},{sorted(value.B)})"
    return str(value)


class CayleyTapeCLI:
    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.config = Config()
        if not self.config.validate_config():
            raise UsageError("configuration is invalid; see the log for details")
        self.logger = RunLogger(self.config, quiet=args.quiet)
        self.run_config = RunConfig(
            subcommand=args.command,
            group=getattr(args, 'group', None),
            machine=getattr(args, 'machine', None),
            fuel=getattr(args, 'fuel', None) if getattr(args, 'fuel', None) is not None else self.config.DEFAULT_FUEL,
            fmt=args.format,
            seed=args.seed if args.seed is not None else self.config.SEED,
        )
        self.logger.logger.debug(f"Settings: {self.config.as_dict()}")

    # ==================== helpers ====================

    def emit(self, payload: Dict[str, Any], lines: Sequence[str]):
        if self.run_config.fmt == 'json':
            print(json.dumps(payload, ensure_ascii=False, default=str))
        else:
            for line in lines:
                print(line)

    def report(self, payload: Dict[str, Any]):
        self.logger.log_report(self.run_config.subcommand, payload)

    def graph(self) -> TapeGraph:
        return load_group(self.run_config.group, self.config)

    def word(self, graph: TapeGraph, text: str):
        return graph.alphabet.parse_word(text)

    # ==================== subcommands ====================

    def cmd_validate(self) -> int:
        try:
            graph = self.graph()
        except (InvalidAlphabet, FiniteGroup) as e:
            payload = {'group': str(self.run_config.group), 'valid': False, 'error': f"{type(e).__name__}: {e}"}
            self.report(payload)
            self.emit(payload, [f"invalid: {type(e).__name__}: {e}"])
            return EXIT_FAILED
        report = validate_tape_graph(graph)
        payload = {'group': str(self.run_config.group), 'valid': report.ok, 'kind': report.kind,
                   'restrictions': report.restrictions}
        self.report(payload)
        self.emit(payload, report.lines() + ['valid'])
        return EXIT_OK

    def cmd_run(self) -> int:
        graph = self.graph()
        data = machine.read_machine_file(self.run_config.machine)
        kind = data.get('kind', 'standard')
        text = self.args.input or ''

        if kind == 'standard':
            program = compiler.compile_machine(machine.standard_from_dict(data), graph)
            cfg = compiler.transcribe_input(program, graph, list(text))
        else:
            if kind == 'compiled':
                program = compiler.load_compiled(self.run_config.machine, graph)
            else:
                program = machine.graph_machine_from_dict(data, graph)
            cells = self._initial_cells(graph, text)
            cfg = machine.initial_configuration(program, cells)

        final, trace, halt = machine.run(program, cfg, self.run_config.fuel)
        if self.args.trace:
            self.logger.log_trace(trace, graph, self.args.trace,
                                  'json' if self.run_config.fmt == 'json' else 'tsv', _show)

        tape = sorted((graph.render(form), _show(symbol)) for form, symbol in final.tape.items())
        payload = {'halt': str(halt), 'steps': final.steps, 'head': graph.render(final.head), 'tape': tape}
        self.report(payload)
        self.emit(payload, [f"halt\t{halt}", f"steps\t{final.steps}", f"head\t{graph.render(final.head)}"]
                  + [f"{cell}\t{symbol}" for cell, symbol in tape])
        return EXIT_OK

    def _initial_cells(self, graph: TapeGraph, text: str):
        if self.args.tape:
            with open(self.args.tape, 'r', encoding='utf-8') as f:
                raw = json.load(f)
            return [(self.word(graph, w), s) for w, s in raw]
        if not text:
            return []
        if not self.args.along:
            raise UsageError("--input on a graph machine needs --along GEN")
        g = graph.alphabet.index(self.args.along)
        # one-way tape convention: cell 0 stays blank, input starts one step along
        return [((g,) * (i + 1), s) for i, s in enumerate(text)]

    def cmd_compile(self) -> int:
        graph = self.graph()
        m = machine.load_machine(self.run_config.machine)
        if not isinstance(m, machine.StandardTM):
            raise UsageError("compile takes a standard machine")
        program = compiler.compile_machine(m, graph)
        compiler.dump_compiled(program, self.args.out)
        payload = {'out': str(self.args.out), 'states': len(program.states), 'symbols': len(program.tape_alphabet),
                   'rows': len(program.transitions)}
        self.report(payload)
        self.emit(payload, [f"{k}\t{v}" for k, v in payload.items()])
        return EXIT_OK

    def cmd_bisim(self) -> int:
        graph = self.graph()
        m = machine.load_machine(self.run_config.machine)
        if not isinstance(m, machine.StandardTM):
            raise UsageError("bisim takes a standard machine")
        result = compiler.bisimulate(m, graph, list(self.args.input or ''), self.run_config.fuel)
        payload = result.as_dict()
        self.report(payload)
        self.logger.save_table('bisimulation', [dict(payload, group=str(self.run_config.group),
                                                    machine=str(self.run_config.machine))])
        self.emit(payload, [f"{k}\t{v}" for k, v in payload.items()])
        return EXIT_OK if result.equivalent else EXIT_FAILED

    def cmd_wordproblem(self) -> int:
        graph = self.graph()
        u, v = self.word(graph, self.args.u), self.word(graph, self.args.v)
        walk = machine.word_problem_walk(graph, u, v)
        oracle = words_equal(graph, u, v)
        agree = oracle is WordVerdict.UNKNOWN or (oracle is WordVerdict.EQUAL) == walk
        payload = {'walk': walk, 'oracle': oracle.value, 'agree': agree}
        self.report(payload)
        self.emit(payload, [f"walk\t{'Equal' if walk else 'NotEqual'}", f"oracle\t{oracle.value}"])
        return EXIT_OK if agree else EXIT_FAILED

    def cmd_treeorder(self) -> int:
        graph = self.graph()
        depth = self.args.depth
        if self.args.tprime is not None:
            found = tree_order.tprime_prefix(graph, depth, self.args.tprime)
        elif self.args.r is not None:
            found = tree_order.r_prefix(graph, depth, self.args.r)
        else:
            found = [tree_order.minimal_path_prefix(graph, depth)]
        rendered = [graph.alphabet.format_word(w) for w in found]
        self.emit({'words': rendered}, rendered)
        return EXIT_OK

    def cmd_evensubword(self) -> int:
        s, n = self.args.word, self.args.depth
        alphabet = list(self.args.alphabet) if self.args.alphabet else None
        if self.args.pirillo:
            pair = words.pirillo_pair_search(s, n, alphabet)
            if pair is None:
                self.emit({'pair': None}, ['none'])
                return EXIT_OK
            candidates = [pair.w1, pair.w2, pair.w1 + pair.w2]
            payload = {'pair': [pair.start, pair.split, pair.end], 'w1': pair.w1, 'w2': pair.w2}
        else:
            interval = words.even_subword_search(s, n, alphabet)
            if interval is None:
                self.emit({'interval': None}, ['none'])
                return EXIT_OK
            i, j = interval
            candidates = [s[i:j + 1]]
            payload = {'interval': [i, j], 'subword': s[i:j + 1]}

        domain = words.profile_domain(alphabet or sorted(set(s)), n)
        odd = [(w, wp) for w in candidates for wp in domain if words.subsequence_count(w, wp) % 2]
        payload['verified'] = not odd
        self.report(payload)
        lines = [f"{k}\t{v}" for k, v in payload.items()]
        lines += [f"odd\t#({w},{wp})" for w, wp in odd]
        self.emit(payload, lines)
        return EXIT_OK if not odd else EXIT_FAILED

    def cmd_algebra(self) -> int:
        action = self.args.action
        if action == 'binomial':
            checks = {i: algebra.binomial_inverse_check(i, self.args.degree, self.args.d)
                      for i in range(1, self.args.d + 1)}
            payload = {'d': self.args.d, 'degree': self.args.degree, 'checks': checks, 'ok': all(checks.values())}
            lines = [f"x{i}\t{'ok' if ok else 'FAILED'}" for i, ok in checks.items()]
            self.report(payload)
            self.emit(payload, lines)
            return EXIT_OK if payload['ok'] else EXIT_FAILED

        if action == 'gs-series':
            with open(self.args.r, 'r', encoding='utf-8') as f:
                r = {int(k): int(v) for k, v in json.load(f).items()}
            coeffs = algebra.gs_series_coefficients(self.args.d, r, self.args.terms)
            payload = {'coefficients': coeffs, 'non_negative': all(c >= 0 for c in coeffs)}
            self.emit(payload, [str(c) for c in coeffs] + [f"non_negative\t{payload['non_negative']}"])
            return EXIT_OK

        if action == 'relator':
            try:
                parts = algebra.relator_from_even_subword(self.args.word, self.args.rlo, self.args.degree, self.args.d)
            except LowDegreeResidue as e:
                self.emit({'error': str(e), 'degrees': list(e.degrees)}, [f"residue\t{e}"])
                return EXIT_FAILED
            payload = {'components': [{'degree': f.max_degree(), 'monomials': f.to_strings()} for f in parts]}
            self.emit(payload, [f"{f.max_degree()}\t{' + '.join(f.to_strings())}" for f in parts])
            return EXIT_OK

        # member
        with open(self.args.poly, 'r', encoding='utf-8') as f:
            poly_raw = json.load(f)
        with open(self.args.basis, 'r', encoding='utf-8') as f:
            basis_raw = json.load(f)
        monomials = [algebra.parse_monomial(t) for t in poly_raw] + \
                    [algebra.parse_monomial(t) for b in basis_raw for t in b]
        d = self.args.d or max((v + 1 for m in monomials for v in m), default=1)
        D = self.args.degree
        poly = algebra.poly_from_strings(poly_raw, d, D)
        basis = algebra.HomogeneousBasis(tuple(algebra.poly_from_strings(b, d, D) for b in basis_raw))
        member = algebra.ideal_membership(poly, basis, D, self.config.IDEAL_DIMENSION_CAP)
        self.emit({'member': member}, ['member' if member else 'not a member'])
        return EXIT_OK

    def cmd_escape(self) -> int:
        graph = self.graph()
        a = self.word(graph, self.args.element)
        mmax = self.args.mmax if self.args.mmax is not None else self.config.M_MAX
        n_verify = self.args.verify if self.args.verify is not None else self.config.VERIFY_N
        probe = self.args.probe if self.args.probe is not None else self.config.ORDER_PROBE

        witness = escape.make_witness(graph, a, probe)
        schedule = escape.compute_schedule(graph, witness, mmax)
        escaped = escape.verify_escape(graph, schedule.escape_word, n_verify)
        lemma = escape.verify_prefix_lemma(graph, schedule, witness, self.args.lemma)
        fmt = graph.alphabet.format_word
        self.logger.save_table('escape_schedule', schedule.table())

        payload = {
            'element': fmt(a), 'minimal': witness.minimality_checked, 'escape': fmt(schedule.escape_word),
            'period': list(schedule.period), 'table': schedule.table(), 'm_max': mmax,
            'verify_n': n_verify, 'escape_verified': escaped, 'prefix_lemma': lemma,
        }
        self.report(payload)
        lines = [f"escape\t({fmt(schedule.escape_word)})^ω", f"period\t{schedule.period}", "r\talpha\tbeta\tgamma"]
        lines += [f"{row['r']}\t{row['alpha']}\t{row['beta']}\t{row['gamma']}" for row in schedule.table()]
        lines += [f"verify_escape({n_verify})\t{'pass' if escaped else 'FAIL'}",
                  f"prefix_lemma({self.args.lemma})\t{'pass' if lemma else 'FAIL'}"]
        if not escaped:
            lines.append(f"hint\traise --mmax above {mmax}")
        self.emit(payload, lines)
        return EXIT_OK if escaped and lemma else EXIT_FAILED

    def dispatch(self) -> int:
        handler = getattr(self, 'cmd_' + self.args.command.replace('-', ''))
        return handler()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='cayley-tape', description='Turing machines on Cayley-graph tapes')
    parser.add_argument('--seed', type=int, default=None)
    parser.add_argument('--format', choices=('tsv', 'json'), default='tsv')
    parser.add_argument('--quiet', action='store_true')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('validate')
    p.add_argument('--group', type=Path, required=True)

    p = sub.add_parser('run')
    p.add_argument('--machine', type=Path, required=True)
    p.add_argument('--group', type=Path, required=True)
    p.add_argument('--input')
    p.add_argument('--along')
    p.add_argument('--tape', type=Path)
    p.add_argument('--fuel', type=int)
    p.add_argument('--trace', type=Path)

    p = sub.add_parser('compile')
    p.add_argument('--machine', type=Path, required=True)
    p.add_argument('--group', type=Path, required=True)
    p.add_argument('--out', type=Path, required=True)

    p = sub.add_parser('bisim')
    p.add_argument('--machine', type=Path, required=True)
    p.add_argument('--group', type=Path, required=True)
    p.add_argument('--input', default='')
    p.add_argument('--fuel', type=int)

    p = sub.add_parser('wordproblem')
    p.add_argument('--group', type=Path, required=True)
    p.add_argument('--u', required=True)
    p.add_argument('--v', required=True)

    p = sub.add_parser('treeorder')
    p.add_argument('--group', type=Path, required=True)
    p.add_argument('--depth', type=int, required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument('--minimal-path', action='store_true')
    mode.add_argument('--tprime', type=int)
    mode.add_argument('--r', type=int)

    p = sub.add_parser('evensubword')
    p.add_argument('--word', required=True)
    p.add_argument('--depth', type=int, required=True)
    p.add_argument('--alphabet')
    p.add_argument('--pirillo', action='store_true')

    p = sub.add_parser('algebra')
    actions = p.add_subparsers(dest='action', required=True)
    a = actions.add_parser('binomial')
    a.add_argument('--d', type=int, required=True)
    a.add_argument('--degree', type=int, default=algebra.GENERATOR_EXPONENT)
    a = actions.add_parser('gs-series')
    a.add_argument('--d', type=int, required=True)
    a.add_argument('--r', type=Path, required=True)
    a.add_argument('--terms', type=int, required=True)
    a = actions.add_parser('relator')
    a.add_argument('--word', required=True)
    a.add_argument('--rlo', type=int, required=True)
    a.add_argument('--degree', type=int, required=True)
    a.add_argument('--d', type=int)
    a = actions.add_parser('member')
    a.add_argument('--poly', type=Path, required=True)
    a.add_argument('--basis', type=Path, required=True)
    a.add_argument('--degree', type=int, required=True)
    a.add_argument('--d', type=int)

    p = sub.add_parser('escape')
    p.add_argument('--group', type=Path, required=True)
    p.add_argument('--element', required=True)
    p.add_argument('--mmax', type=int)
    p.add_argument('--verify', type=int)
    p.add_argument('--probe', type=int)
    p.add_argument('--lemma', type=int, default=200)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK

    try:
        cli = CayleyTapeCLI(args)
        return cli.dispatch()
    except (UsageError, CayleyTapeError, ValueError, OSError, json.JSONDecodeError, KeyError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
