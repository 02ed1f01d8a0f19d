"""Exact Gauss-Jordan elimination over Q and prime fields.

Matrices are sparse: each row is a dict ``col -> value`` with no stored
zeros.  Pivoting always takes the first row with a nonzero entry in the
current column, so results are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

from .scalars import QQ, Rationals


class _NoSolution:
    def __repr__(self):
        return "NoSolution"

    def __bool__(self):
        return False


NoSolution = _NoSolution()


class ExactMatrix:
    def __init__(self, rows: int, cols: int, entries=None, field: Rationals = QQ):
        self.rows = rows
        self.cols = cols
        self.field = field
        self._rows = [dict() for _ in range(rows)]
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < rows and 0 <= j < cols):
                raise IndexError(f"entry ({i}, {j}) outside {rows}x{cols}")
            v = field(v)
            if v:
                self._rows[i][j] = v

    @classmethod
    def from_rows(cls, rows, field: Rationals = QQ, cols: int | None = None):
        rows = [list(r) for r in rows]
        ncols = cols if cols is not None else (len(rows[0]) if rows else 0)
        entries = {(i, j): v for i, r in enumerate(rows) for j, v in enumerate(r) if v}
        return cls(len(rows), ncols, entries, field)

    @classmethod
    def from_columns(cls, columns, nrows: int, field: Rationals = QQ):
        entries = {(i, j): v for j, col in enumerate(columns) for i, v in col.items() if v}
        return cls(nrows, len(columns), entries, field)

    @property
    def entries(self):
        return {(i, j): v for i, r in enumerate(self._rows) for j, v in r.items()}

    def row(self, i) -> dict:
        return dict(self._rows[i])

    def to_rows(self):
        return [[r.get(j, 0) for j in range(self.cols)] for r in self._rows]

    def apply(self, x):
        """Matrix-vector product ``m @ x``."""
        f = self.field
        return [f(sum((v * x[j] for j, v in r.items()), 0)) for r in self._rows]

    def __eq__(self, other):
        return (
            isinstance(other, ExactMatrix)
            and (self.rows, self.cols) == (other.rows, other.cols)
            and self._rows == other._rows
        )

    def __repr__(self):
        return f"ExactMatrix({self.rows}x{self.cols}, {self.field!r}, {self.to_rows()})"


@dataclass
class RREF:
    matrix: ExactMatrix
    rank: int
    pivots: list


def _eliminate(rows, ncols, field, aug=None):
    """In-place Gauss-Jordan on a list of sparse row dicts.

    ``aug`` is an optional parallel list of right-hand sides that receive the
    same row operations.
    """
    pivots = []
    r = 0
    nrows = len(rows)
    for c in range(ncols):
        if r == nrows:
            break
        k = next((i for i in range(r, nrows) if c in rows[i]), None)
        if k is None:
            continue
        if k != r:
            rows[k], rows[r] = rows[r], rows[k]
            if aug is not None:
                aug[k], aug[r] = aug[r], aug[k]
        inv = field.inv(rows[r][c])
        if inv != 1:
            rows[r] = {j: field(v * inv) for j, v in rows[r].items()}
            if aug is not None:
                aug[r] = field(aug[r] * inv)
        prow = rows[r]
        for i in range(nrows):
            if i == r or c not in rows[i]:
                continue
            f = rows[i][c]
            row = rows[i]
            for j, v in prow.items():
                nv = field(row.get(j, 0) - f * v)
                if nv:
                    row[j] = nv
                else:
                    row.pop(j, None)
            if aug is not None:
                aug[i] = field(aug[i] - f * aug[r])
        pivots.append(c)
        r += 1
    return pivots


def rref(m: ExactMatrix) -> RREF:
    rows = [dict(r) for r in m._rows]
    pivots = _eliminate(rows, m.cols, m.field)
    out = ExactMatrix(m.rows, m.cols, field=m.field)
    out._rows = rows
    return RREF(out, len(pivots), pivots)


def rank(m: ExactMatrix) -> int:
    return rref(m).rank


def kernel_basis(m: ExactMatrix):
    """Basis of the right kernel, one vector per free column."""
    red = rref(m)
    pivset = set(red.pivots)
    basis = []
    for free in range(m.cols):
        if free in pivset:
            continue
        v = [0] * m.cols
        v[free] = m.field(1)
        for i, pc in enumerate(red.pivots):
            a = red.matrix._rows[i].get(free, 0)
            if a:
                v[pc] = m.field(-a)
        basis.append(v)
    return basis


def solve(m: ExactMatrix, b):
    """Some exact solution of ``m x = b``, or :data:`NoSolution`."""
    if len(b) != m.rows:
        raise ValueError("right-hand side has wrong length")
    f = m.field
    rows = [dict(r) for r in m._rows]
    aug = [f(x) for x in b]
    pivots = _eliminate(rows, m.cols, f, aug)
    for i in range(len(pivots), m.rows):
        if aug[i]:
            return NoSolution
    x = [f(0)] * m.cols
    for i, pc in enumerate(pivots):
        x[pc] = aug[i]
    return x
