"""
Non-commutative polynomials over F2, truncated at a fixed degree.

A polynomial is the set of its monomials (coefficients are 0 or 1), and a
monomial is a tuple of indeterminate indices, so x1*x2 is (0, 1) and the
constant 1 is (). Group elements of the construction are the formal symbols
a = (1 + x1), A = (1 + x1)^15, b = (1 + x2), B = (1 + x2)^15, and so on.
"""
import logging
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import floor
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config.config import Config
from src.errors import DimensionOverflow, LowDegreeResidue
from src.words import even_subword_search

logger = logging.getLogger(__name__)

Monomial = Tuple[int, ...]

GENERATOR_EXPONENT = 16     # (1 + x)^16 = 1 + x^16 over F2
INVERSE_EXPONENT = 15


@dataclass(frozen=True)
class TruncatedPoly:
    monomials: FrozenSet[Monomial]
    d: int
    degree: int             # truncation degree D

    def __post_init__(self):
        if self.d < 1 or self.degree < 0:
            raise ValueError("need at least one indeterminate and a non-negative truncation degree")
        kept = frozenset(m for m in self.monomials if len(m) <= self.degree)
        if any(not 0 <= v < self.d for m in kept for v in m):
            raise ValueError(f"monomial uses an indeterminate outside x1..x{self.d}")
        object.__setattr__(self, 'monomials', kept)

    @classmethod
    def zero(cls, d: int, D: int) -> 'TruncatedPoly':
        return cls(frozenset(), d, D)

    @classmethod
    def one(cls, d: int, D: int) -> 'TruncatedPoly':
        return cls(frozenset({()}), d, D)

    @classmethod
    def variable(cls, i: int, d: int, D: int) -> 'TruncatedPoly':
        return cls(frozenset({(i,)}), d, D)

    def is_zero(self) -> bool:
        return not self.monomials

    def max_degree(self) -> int:
        return max((len(m) for m in self.monomials), default=-1)

    def is_homogeneous(self) -> bool:
        return len({len(m) for m in self.monomials}) == 1

    def components(self) -> Dict[int, 'TruncatedPoly']:
        """Homogeneous components keyed by degree"""
        by_degree: Dict[int, set] = {}
        for m in self.monomials:
            by_degree.setdefault(len(m), set()).add(m)
        return {e: TruncatedPoly(frozenset(ms), self.d, self.degree) for e, ms in sorted(by_degree.items())}

    def __add__(self, other: 'TruncatedPoly') -> 'TruncatedPoly':
        return poly_add(self, other)

    def __mul__(self, other: 'TruncatedPoly') -> 'TruncatedPoly':
        return poly_mul(self, other)

    def __pow__(self, k: int) -> 'TruncatedPoly':
        result = TruncatedPoly.one(self.d, self.degree)
        for _ in range(k):
            result = result * self
        return result

    def to_strings(self) -> List[str]:
        return [format_monomial(m) for m in sorted(self.monomials, key=lambda m: (len(m), m))]

    def __str__(self):
        return ' + '.join(self.to_strings()) or '0'


def _check_compatible(f: TruncatedPoly, g: TruncatedPoly):
    if f.d != g.d or f.degree != g.degree:
        raise ValueError(f"polynomials live in different truncated algebras: (d={f.d}, D={f.degree}) vs (d={g.d}, D={g.degree})")


def poly_add(f: TruncatedPoly, g: TruncatedPoly) -> TruncatedPoly:
    _check_compatible(f, g)
    return TruncatedPoly(f.monomials ^ g.monomials, f.d, f.degree)


def poly_mul(f: TruncatedPoly, g: TruncatedPoly) -> TruncatedPoly:
    _check_compatible(f, g)
    D = f.degree
    out = set()
    for m1 in f.monomials:
        room = D - len(m1)
        if room < 0:
            continue
        for m2 in g.monomials:
            if len(m2) <= room:
                m = m1 + m2
                if m in out:
                    out.remove(m)
                else:
                    out.add(m)
    return TruncatedPoly(frozenset(out), f.d, D)


def format_monomial(m: Monomial) -> str:
    if not m:
        return '1'
    parts = []
    i = 0
    while i < len(m):
        j = i
        while j < len(m) and m[j] == m[i]:
            j += 1
        run = j - i
        parts.append(f"x{m[i] + 1}" if run == 1 else f"x{m[i] + 1}^{run}")
        i = j
    return '*'.join(parts)


_FACTOR = re.compile(r'^x(\d+)(?:\^(\d+))?$')


def parse_monomial(text: str) -> Monomial:
    text = text.strip().replace(' ', '')
    if text == '1':
        return ()
    out: List[int] = []
    for factor in text.split('*'):
        match = _FACTOR.match(factor)
        if not match:
            raise ValueError(f"Cannot parse monomial factor {factor!r}")
        index, power = int(match.group(1)), int(match.group(2) or 1)
        if index < 1:
            raise ValueError("indeterminates are numbered from x1")
        out.extend([index - 1] * power)
    return tuple(out)


def poly_from_strings(monomials: Iterable[str], d: int, D: int) -> TruncatedPoly:
    acc = set()
    for text in monomials:
        acc ^= {parse_monomial(text)}
    return TruncatedPoly(frozenset(acc), d, D)


# ==================== Construction generators ====================

@dataclass(frozen=True)
class ConstructionSymbol:
    name: str
    index: int              # indeterminate x_(index+1)
    exponent: int           # 1 or 15

    @property
    def inverse_name(self) -> str:
        return self.name.swapcase()


def construction_alphabet(d: int) -> List[ConstructionSymbol]:
    """a = (1+x1), A = (1+x1)^15, b = (1+x2), B = (1+x2)^15, ..."""
    if not 1 <= d <= 26:
        raise ValueError("the construction alphabet supports 1..26 indeterminates")
    out = []
    for i in range(d):
        lower = chr(ord('a') + i)
        out.append(ConstructionSymbol(lower, i, 1))
        out.append(ConstructionSymbol(lower.upper(), i, INVERSE_EXPONENT))
    return out


def _symbol_table(d: int) -> Dict[str, ConstructionSymbol]:
    return {s.name: s for s in construction_alphabet(d)}


def infer_d(word: Iterable[str]) -> int:
    letters = [c.lower() for c in word]
    return max((ord(c) - ord('a') + 1 for c in letters), default=1)


def expand_symbol(symbol: ConstructionSymbol, d: int, D: int) -> TruncatedPoly:
    base = TruncatedPoly(frozenset({(), (symbol.index,)}), d, D)
    return base ** symbol.exponent


def expand_group_word(w: Sequence[str], D: int, d: Optional[int] = None) -> TruncatedPoly:
    """Product of the expanded symbols of w, truncated at D"""
    d = d or infer_d(w)
    table = _symbol_table(d)
    cache: Dict[str, TruncatedPoly] = {}
    result = TruncatedPoly.one(d, D)
    for name in w:
        if name not in table:
            raise ValueError(f"{name!r} is not a construction symbol for d={d}")
        if name not in cache:
            cache[name] = expand_symbol(table[name], d, D)
        result = result * cache[name]
    return result


def binomial_product(i: int, D: int, d: Optional[int] = None) -> TruncatedPoly:
    """(1 + x_i)(1 + x_i)^15 with i counted from 1"""
    d = d or i
    if not 1 <= i <= d:
        raise ValueError(f"indeterminate x{i} is outside x1..x{d}")
    name = chr(ord('a') + i - 1)
    return expand_group_word([name, name.upper()], D, d)


def binomial_inverse_check(i: int, D: int, d: Optional[int] = None) -> bool:
    """(1+x_i)(1+x_i)^15 minus the relator x_i^16 is 1"""
    d = d or i
    product_ = binomial_product(i, D, d)
    relator = TruncatedPoly(frozenset({(i - 1,) * GENERATOR_EXPONENT}), d, D)
    return product_ + relator == TruncatedPoly.one(d, D)


# ==================== Homogeneous ideals ====================

@dataclass(frozen=True)
class HomogeneousBasis:
    polys: Tuple[TruncatedPoly, ...]

    def __post_init__(self):
        ordered = tuple(sorted(self.polys, key=lambda f: (f.max_degree(), f.to_strings())))
        for f in ordered:
            if f.is_zero() or not f.is_homogeneous():
                raise ValueError(f"basis polynomials must be non-zero and homogeneous, got {f}")
            if f.max_degree() < 2:
                raise ValueError(f"basis polynomials have degree at least 2, got {f}")
        object.__setattr__(self, 'polys', ordered)

    @property
    def counts(self) -> Dict[int, int]:
        """r_i: number of basis polynomials of each degree"""
        out: Dict[int, int] = {}
        for f in self.polys:
            out[f.max_degree()] = out.get(f.max_degree(), 0) + 1
        return out


def standard_basis(d: int, D: int = GENERATOR_EXPONENT) -> HomogeneousBasis:
    """{x_1^16, ..., x_d^16}"""
    return HomogeneousBasis(tuple(TruncatedPoly(frozenset({(i,) * GENERATOR_EXPONENT}), d, D) for i in range(d)))


def construction_window_violations(basis: HomogeneousBasis, d: int) -> List[str]:
    """Degree discipline of the construction: nothing below 16, exactly d at 16, at most one per higher degree"""
    problems = []
    for degree, count in sorted(basis.counts.items()):
        if degree < GENERATOR_EXPONENT:
            problems.append(f"{count} relator(s) of degree {degree} < {GENERATOR_EXPONENT}")
        elif degree == GENERATOR_EXPONENT and count != d:
            problems.append(f"{count} relator(s) of degree {GENERATOR_EXPONENT}, expected {d}")
        elif degree > GENERATOR_EXPONENT and count > 1:
            problems.append(f"{count} relators share degree {degree}")
    if GENERATOR_EXPONENT not in basis.counts and d > 0:
        problems.append(f"no relators of degree {GENERATOR_EXPONENT}, expected {d}")
    return problems


def relator_from_even_subword(w: Sequence[str], r_lo: int, D: int, d: Optional[int] = None) -> List[TruncatedPoly]:
    """
    Homogeneous components of p - 1, p the expansion of w, with degrees in (r_lo, D].
    Raises LowDegreeResidue if anything survives at degree <= r_lo.
    """
    d = d or infer_d(w)
    p = expand_group_word(w, D, d)
    shifted = p + TruncatedPoly.one(d, D)
    parts = shifted.components()
    residue = [e for e in parts if e <= r_lo]
    if residue:
        raise LowDegreeResidue(f"p - 1 keeps components of degree {residue} (at most {r_lo} expected to vanish)",
                               residue)
    return [parts[e] for e in sorted(parts)]


def relators_for_sequence(prefix: Sequence[str], d: int, r_lo: int,
                          D: int) -> Optional[Tuple[Tuple[int, int], List[TruncatedPoly]]]:
    """Find the even subword of an enumerated prefix and turn it into relators"""
    alphabet = [s.name for s in construction_alphabet(d)]
    interval = even_subword_search(prefix, r_lo, alphabet)
    if interval is None:
        return None
    i, j = interval
    components = relator_from_even_subword(prefix[i:j + 1], r_lo, D, d)
    logger.info(f"Even subword at [{i}, {j}] gives {len(components)} relator component(s)")
    return interval, components


def _column(m: Monomial, d: int) -> int:
    idx = 0
    for v in m:
        idx = idx * d + v
    return idx


def row_reduce_gf2(A: np.ndarray) -> np.ndarray:
    """Row echelon form over F2; zero rows dropped"""
    A = A.copy()
    m, n = A.shape
    i = j = 0
    while i < m and j < n:
        nonzero = np.nonzero(A[i:, j])[0]
        if len(nonzero) == 0:
            j += 1
            continue
        pivot = i + nonzero[0]
        if pivot != i:
            A[[i, pivot]] = A[[pivot, i]]
        below = i + 1 + np.nonzero(A[i + 1:, j])[0]
        A[below] ^= A[i]
        i += 1
        j += 1
    return A[:i]


def _in_row_space(echelon: np.ndarray, v: np.ndarray) -> bool:
    v = v.copy()
    for row in echelon:
        pivot = np.argmax(row)
        if v[pivot]:
            v ^= row
    return not v.any()


def _span_rows(basis: HomogeneousBasis, degree: int, d: int) -> List[np.ndarray]:
    width = d ** degree
    rows = []
    for f in basis.polys:
        k = f.max_degree()
        if k > degree:
            continue
        slack = degree - k
        for left_len in range(slack + 1):
            for left in product(range(d), repeat=left_len):
                for right in product(range(d), repeat=slack - left_len):
                    row = np.zeros(width, dtype=np.uint8)
                    for m in f.monomials:
                        row[_column(left + m + right, d)] ^= 1
                    rows.append(row)
    return rows


def ideal_membership(f: TruncatedPoly, basis: HomogeneousBasis, D: int, cap: Optional[int] = None) -> bool:
    """
    Is f in the two-sided ideal generated by the basis? Decided degree by degree:
    each homogeneous component of f must lie in the F2-span of m1 * f_i * m2.
    """
    if f.max_degree() > D:
        raise ValueError(f"f has degree {f.max_degree()} above the truncation degree {D}")
    cap = cap or Config().IDEAL_DIMENSION_CAP
    d = max([f.d] + [g.d for g in basis.polys])
    for degree, part in f.components().items():
        width = d ** degree
        if width > cap:
            raise DimensionOverflow(f"degree {degree} needs {width} monomials over {d} indeterminates (cap {cap})")
        target = np.zeros(width, dtype=np.uint8)
        for m in part.monomials:
            target[_column(m, d)] = 1
        rows = _span_rows(basis, degree, d)
        if not rows:
            return False
        echelon = row_reduce_gf2(np.array(rows, dtype=np.uint8))
        if not _in_row_space(echelon, target):
            logger.debug(f"Degree {degree} component of f lies outside the ideal")
            return False
    return True


def distinctness_witness(u: Sequence[str], v: Sequence[str], basis: HomogeneousBasis, D: int,
                         d: Optional[int] = None, cap: Optional[int] = None) -> bool:
    """True iff expand(u) - expand(v) is outside the ideal, so u and v differ in the quotient group"""
    d = d or max([infer_d(u), infer_d(v)] + [g.d for g in basis.polys])
    difference = expand_group_word(u, D, d) + expand_group_word(v, D, d)
    return not ideal_membership(difference, basis, D, cap)


# ==================== Golod-Shafarevich ====================

def gs_series_coefficients(d: int, r: Mapping[int, int], K: int) -> List[int]:
    """Coefficients c_0..c_K of 1 / (1 - d t + sum r_i t^i), exact"""
    if K < 0:
        raise ValueError("K must be non-negative")
    if any(i < 2 and count for i, count in r.items()):
        raise ValueError("relator counts must vanish below degree 2")
    coeffs = [1]
    for k in range(1, K + 1):
        c = d * coeffs[k - 1]
        for i, count in r.items():
            if count and 2 <= i <= k:
                c -= count * coeffs[k - i]
        coeffs.append(c)
    return coeffs


def gs_positive_through(d: int, r: Mapping[int, int], K: int) -> bool:
    return all(c >= 0 for c in gs_series_coefficients(d, r, K))


def corollary_bound(d: int, eps: Fraction, i: int) -> Fraction:
    return eps ** 2 * (d - 2 * eps) ** (i - 2)


def corollary_bound_check(d: int, eps: Fraction, r: Mapping[int, int]) -> bool:
    """r_i <= eps^2 (d - 2 eps)^(i - 2) for every listed degree"""
    eps = Fraction(eps)
    if not 0 < eps < Fraction(d, 2):
        raise ValueError("eps must satisfy 0 < eps < d/2")
    for i, count in r.items():
        if i < 2:
            if count:
                return False
            continue
        if count > corollary_bound(d, eps, i):
            return False
    return True


def bound_shaped_counts(d: int, eps: Fraction, start: int, through: int) -> Dict[int, int]:
    """floor(eps^2 (d - 2 eps)^(i - 2)) for start <= i <= through, zero elsewhere"""
    eps = Fraction(eps)
    return {i: floor(corollary_bound(d, eps, i)) for i in range(start, through + 1)}
