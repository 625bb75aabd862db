"""Latin squares, Latin rectangles and mutually orthogonal families.

Symbols are 1-based integers. Rows index channels, columns index sensors.
Every public location (row, column) reported by this module is 1-based.
"""
from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import ConstructionUnsupported, DimensionError, MalformedRectangle

TIEBREAKS = ("lexicographic", "diagonal")


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime >= n."""
    n = max(n, 2)
    while not is_prime(n):
        n += 1
    return n


def _prev_prime(n: int):
    n -= 1
    while n >= 2:
        if is_prime(n):
            return n
        n -= 1
    return None


@dataclass(frozen=True, eq=False)
class LatinRectangle:
    """An M x K grid of symbols drawn from [1, q].

    Construction only checks shape; use :func:`is_latin` to check the
    row/column distinctness property.
    """

    cells: np.ndarray
    q: int

    def __post_init__(self):
        cells = np.array(self.cells, dtype=np.int64, copy=True)
        if cells.ndim != 2 or cells.shape[0] < 1 or cells.shape[1] < 1:
            raise DimensionError(f"cells must be a non-empty 2-D grid, got shape {cells.shape}")
        q = int(self.q)
        if cells.shape[0] > q or cells.shape[1] > q:
            raise DimensionError(
                f"{cells.shape[0]}x{cells.shape[1]} rectangle does not fit symbol range q={q}")
        cells.setflags(write=False)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "q", q)

    @property
    def M(self) -> int:
        return self.cells.shape[0]

    @property
    def K(self) -> int:
        return self.cells.shape[1]

    @property
    def shape(self):
        return self.cells.shape

    def cell(self, row: int, col: int) -> int:
        """1-based cell lookup."""
        return int(self.cells[row - 1, col - 1])

    def tolist(self):
        return self.cells.tolist()

    def __eq__(self, other):
        if not isinstance(other, LatinRectangle):
            return NotImplemented
        return self.q == other.q and np.array_equal(self.cells, other.cells)

    def __hash__(self):
        return hash((self.q, self.cells.shape, self.cells.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(M={self.M}, K={self.K}, q={self.q}, cells={self.tolist()})"


class LatinSquare(LatinRectangle):
    """A q x q Latin square over symbols [1, q]."""

    def __init__(self, cells, q=None):
        cells = np.asarray(cells)
        if q is None:
            q = cells.shape[0] if cells.ndim == 2 else 0
        super().__init__(cells, q)

    def __post_init__(self):
        super().__post_init__()
        if self.M != self.K or self.M != self.q:
            raise DimensionError(f"a Latin square of order {self.q} must be {self.q}x{self.q}")

    @property
    def order(self) -> int:
        return self.q


@dataclass(frozen=True)
class LatinVerdict:
    """Result of :func:`is_latin`. Truthy iff the grid is Latin."""

    ok: bool
    row: int | None = None
    col: int | None = None

    def __bool__(self):
        return self.ok


def is_latin(rect: LatinRectangle) -> LatinVerdict:
    """Check row and column distinctness.

    Cells are scanned row-major; the first cell repeating a symbol already
    seen in its row or column is reported.
    """
    cells = rect.cells
    bad = (cells < 1) | (cells > rect.q)
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise MalformedRectangle(
            f"symbol {cells[i, j]} at ({i + 1}, {j + 1}) outside [1, {rect.q}]")
    M, K = cells.shape
    row_seen = np.zeros((M, rect.q + 1), dtype=bool)
    col_seen = np.zeros((K, rect.q + 1), dtype=bool)
    for i in range(M):
        for j in range(K):
            s = cells[i, j]
            if row_seen[i, s] or col_seen[j, s]:
                return LatinVerdict(False, i + 1, j + 1)
            row_seen[i, s] = True
            col_seen[j, s] = True
    return LatinVerdict(True)


def _check_same_dims(a: LatinRectangle, b: LatinRectangle):
    if a.shape != b.shape or a.q != b.q:
        raise DimensionError(
            f"rectangles differ: {a.M}x{a.K} (q={a.q}) vs {b.M}x{b.K} (q={b.q})")


def join(a: LatinRectangle, b: LatinRectangle) -> np.ndarray:
    """Cellwise ordered pairs, shape (M, K, 2)."""
    _check_same_dims(a, b)
    return np.stack([a.cells, b.cells], axis=-1)


def are_orthogonal(a: LatinRectangle, b: LatinRectangle) -> bool:
    """True iff the M*K ordered pairs (a[i,j], b[i,j]) are pairwise distinct."""
    _check_same_dims(a, b)
    codes = a.cells * (a.q + 1) + b.cells
    return np.unique(codes).size == codes.size


@dataclass(frozen=True)
class OrthogonalFamily:
    members: tuple

    def __post_init__(self):
        members = tuple(self.members)
        if not members:
            raise DimensionError("an orthogonal family needs at least one member")
        first = members[0]
        for m in members[1:]:
            _check_same_dims(first, m)
        object.__setattr__(self, "members", members)

    @property
    def M(self) -> int:
        return self.members[0].M

    @property
    def K(self) -> int:
        return self.members[0].K

    @property
    def q(self) -> int:
        return self.members[0].q

    def __len__(self):
        return len(self.members)

    def __getitem__(self, i) -> LatinRectangle:
        return self.members[i]

    def __iter__(self) -> Iterator[LatinRectangle]:
        return iter(self.members)

    def is_orthogonal(self) -> bool:
        """Exhaustive pairwise check."""
        n = len(self.members)
        return all(are_orthogonal(self.members[i], self.members[j])
                   for i in range(n) for j in range(i + 1, n))

    def truncate(self, M: int, K: int) -> "OrthogonalFamily":
        return OrthogonalFamily(tuple(truncate(m, M, K) for m in self.members))


def build_mols(q: int) -> OrthogonalFamily:
    """Complete set of q-1 mutually orthogonal Latin squares of prime order q.

    Member a (a = 1..q-1) has cell (i, j) = ((a*i + j) mod q) + 1 with 0-based i, j.
    """
    q = int(q)
    if not is_prime(q):
        raise ConstructionUnsupported(q, _prev_prime(q), next_prime(q + 1))
    idx = np.arange(q, dtype=np.int64)
    squares = []
    for a in range(1, q):
        cells = (a * idx[:, None] + idx[None, :]) % q + 1
        squares.append(LatinSquare(cells, q))
    return OrthogonalFamily(tuple(squares))


def truncate(square: LatinRectangle, M: int, K: int) -> LatinRectangle:
    """Keep the first M rows and first K columns."""
    if not (1 <= M <= square.M and 1 <= K <= square.K):
        raise DimensionError(
            f"cannot truncate a {square.M}x{square.K} grid to {M}x{K}")
    return LatinRectangle(square.cells[:M, :K], square.q)


def family_for(M: int, K: int) -> OrthogonalFamily:
    """Orthogonal family of M x K rectangles built at the smallest prime q >= max(M, K)."""
    if M < 1 or K < 1:
        raise DimensionError(f"invalid rectangle size {M}x{K}")
    return build_mols(next_prime(max(M, K))).truncate(M, K)


@dataclass(frozen=True)
class SymbolAssignment:
    """One distinct symbol per column.

    ``symbols[k-1]`` is the symbol of column k and ``rows[k-1]`` the 1-based
    row where that symbol sits in column k.
    """

    symbols: tuple
    rows: tuple = field(default=())

    @property
    def per_column(self) -> dict:
        return {k + 1: s for k, s in enumerate(self.symbols)}

    def is_valid_for(self, rect: LatinRectangle) -> bool:
        if len(self.symbols) != rect.K or len(set(self.symbols)) != rect.K:
            return False
        for k, s in enumerate(self.symbols):
            if s not in rect.cells[:, k]:
                return False
        if self.rows:
            return all(rect.cells[r - 1, k] == s
                       for k, (r, s) in enumerate(zip(self.rows, self.symbols)))
        return True


def _row_preference(rect: LatinRectangle, col: int, tiebreak: str, avoid=None) -> list:
    M = rect.M
    if avoid is None:
        usable, shunned = list(range(M)), []
    else:
        usable = [r for r in range(M) if not avoid[r, col]]
        shunned = [r for r in range(M) if avoid[r, col]]
    if tiebreak == "lexicographic":
        def key(r):
            return rect.cells[r, col]
        return sorted(usable, key=key) + sorted(shunned, key=key)
    if tiebreak == "diagonal":
        if not usable:
            return shunned
        start = col % len(usable)
        return usable[start:] + usable[:start] + shunned
    raise ValueError(f"unknown tiebreak {tiebreak!r}; expected one of {TIEBREAKS}")


def common_cells(family: "OrthogonalFamily") -> np.ndarray:
    """Mask of cells holding the same symbol in every member of the family."""
    stack = np.stack([m.cells for m in family])
    return np.all(stack == stack[0], axis=0)


def assign_symbols(rect: LatinRectangle, tiebreak: str = "lexicographic",
                   avoid=None) -> SymbolAssignment:
    """Pick one distinct symbol per column (a perfect column-to-symbol matching).

    Columns are fixed in order. Each column takes the most preferred of its
    symbols for which the still-open columns can be completed, which is tested
    by an augmenting path over the current matching.

    ``lexicographic`` prefers the smallest symbol, giving the lexicographically
    smallest symbol vector. ``diagonal`` prefers row ``(k mod M)`` for column k
    and then the following rows cyclically, spreading backup channels over rows.

    ``avoid`` is an optional M x K boolean mask of cells to try only after all
    others (for instance :func:`common_cells` of the family, since a cell
    shared by every member gives the same backup pair in every WBAN). With a
    mask, ``diagonal`` cycles over the column's unmasked rows only.
    """
    if tiebreak not in TIEBREAKS:
        raise ValueError(f"unknown tiebreak {tiebreak!r}; expected one of {TIEBREAKS}")
    cells = rect.cells
    M, K = cells.shape
    # symbol -> row, per column
    where = [{int(cells[r, k]): r for r in range(M)} for k in range(K)]
    col_sym = [-1] * K
    sym_col: dict = {}
    fixed = [False] * K

    def augment(col, banned, seen):
        for s in where[col]:
            if s in banned or s in seen:
                continue
            seen.add(s)
            other = sym_col.get(s)
            if other is None or (not fixed[other] and augment(other, banned, seen)):
                col_sym[col] = s
                sym_col[s] = col
                return True
        return False

    for k in range(K):
        if not augment(k, set(), set()):
            raise AssertionError("rectangle admits no perfect symbol matching; is it Latin?")

    used: set = set()
    for k in range(K):
        fixed[k] = True
        chosen = None
        for r in _row_preference(rect, k, tiebreak, avoid):
            s = int(cells[r, k])
            if s in used:
                continue
            if col_sym[k] == s:
                chosen = s
                break
            saved_cols, saved_syms = list(col_sym), dict(sym_col)
            displaced = sym_col.get(s)
            del sym_col[col_sym[k]]
            col_sym[k] = s
            sym_col[s] = k
            if displaced is None:
                chosen = s
                break
            col_sym[displaced] = -1
            if augment(displaced, used | {s}, set()):
                chosen = s
                break
            col_sym, sym_col = saved_cols, saved_syms
        if chosen is None:
            raise AssertionError(f"no feasible symbol for column {k + 1}; broken Latin invariant")
        used.add(chosen)

    rows = tuple(where[k][s] + 1 for k, s in enumerate(col_sym))
    return SymbolAssignment(tuple(col_sym), rows)


def format_rectangle(rect: LatinRectangle) -> str:
    lines = [f"{rect.M} {rect.K} {rect.q}"]
    lines.extend(" ".join(str(int(v)) for v in row) for row in rect.cells)
    return "\n".join(lines) + "\n"


def parse_rectangle(text: str) -> LatinRectangle:
    """Parse the ``M K q`` header + M rows text format."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedRectangle("empty rectangle text")
    try:
        M, K, q = (int(v) for v in lines[0].split())
    except ValueError:
        raise MalformedRectangle(f"bad header {lines[0]!r}; expected 'M K q'") from None
    if len(lines) - 1 != M:
        raise MalformedRectangle(f"header declares {M} rows, found {len(lines) - 1}")
    rows = []
    for n, ln in enumerate(lines[1:], start=2):
        try:
            row = [int(v) for v in ln.split()]
        except ValueError:
            raise MalformedRectangle(f"line {n}: non-integer symbol") from None
        if len(row) != K:
            raise MalformedRectangle(f"line {n}: expected {K} symbols, found {len(row)}")
        rows.append(row)
    return LatinRectangle(np.array(rows, dtype=np.int64), q)


def write_rectangle(rect: LatinRectangle, dest) -> None:
    text = format_rectangle(rect)
    if isinstance(dest, (str, os.PathLike)):
        with open(dest, "w") as fh:
            fh.write(text)
    else:
        dest.write(text)


def read_rectangle(src) -> LatinRectangle:
    if isinstance(src, (str, os.PathLike)):
        with open(src) as fh:
            return parse_rectangle(fh.read())
    if isinstance(src, io.IOBase) or hasattr(src, "read"):
        return parse_rectangle(src.read())
    raise TypeError(f"cannot read a rectangle from {type(src).__name__}")


def rectangle_from_rows(rows: Sequence[Sequence[int]], q: int | None = None) -> LatinRectangle:
    cells = np.asarray(rows, dtype=np.int64)
    if q is None:
        q = max(cells.shape) if cells.ndim == 2 else 0
    return LatinRectangle(cells, q)
