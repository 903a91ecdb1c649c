"""Sparse exact Gauss-Jordan elimination over the rationals.

A ``SparseSystem`` is factored once; the recorded row operations are then
replayed on any number of right-hand sides.
"""

from __future__ import annotations

from typing import Mapping, Sequence

from gmpy2 import mpq

__all__ = ["SparseSystem", "InconsistentSystem"]


class InconsistentSystem(ArithmeticError):
    pass


class SparseSystem:
    """Rows are dicts {column: rational}.  Columns are pivoted left to right.

    After factoring, ``pivots`` maps pivot column -> row index, ``rank`` is the
    number of pivots, and ``kernel_dim = ncols - rank``.
    """

    def __init__(self, rows: Sequence[Mapping[int, object]], ncols: int):
        self.nrows = len(rows)
        self.ncols = ncols
        work = [{c: mpq(v) for c, v in r.items() if v} for r in rows]
        colrows: dict = {}
        for i, r in enumerate(work):
            for c in r:
                if not 0 <= c < ncols:
                    raise IndexError(f"column {c} out of range")
                colrows.setdefault(c, set()).add(i)
        ops = []
        pivots = {}
        used = set()
        for c in range(ncols):
            cand = [i for i in colrows.get(c, ()) if i not in used]
            if not cand:
                continue
            p = min(cand, key=lambda i: (len(work[i]), i))
            used.add(p)
            prow = work[p]
            inv = 1 / prow[c]
            if inv != 1:
                for k in prow:
                    prow[k] *= inv
                ops.append(("s", p, inv))
            for i in sorted(colrows[c]):
                if i == p:
                    continue
                row = work[i]
                f = row[c]
                for k, v in prow.items():
                    nv = row.get(k, 0) - f * v
                    if nv:
                        if k not in row:
                            colrows.setdefault(k, set()).add(i)
                        row[k] = nv
                    elif k in row:
                        del row[k]
                        colrows[k].discard(i)
                ops.append(("a", i, p, f))
            colrows[c] = {p}
            pivots[c] = p
        self.pivots = pivots
        self.rank = len(pivots)
        self.kernel_dim = ncols - self.rank
        self._ops = ops
        self._rows = work
        self._free_rows = [i for i in range(self.nrows) if i not in used]

    def solve(self, rhs: Sequence, check: bool = True) -> list:
        """A solution with free variables set to zero.

        Raises InconsistentSystem when check is set and the system has no solution.
        """
        b = [mpq(v) for v in rhs]
        if len(b) != self.nrows:
            raise ValueError("rhs length mismatch")
        for op in self._ops:
            if op[0] == "s":
                b[op[1]] *= op[2]
            else:
                _, i, p, f = op
                if b[p]:
                    b[i] -= f * b[p]
        if check:
            bad = [i for i in self._free_rows if b[i]]
            if bad:
                raise InconsistentSystem(f"{len(bad)} equations cannot be satisfied")
        x = [mpq(0)] * self.ncols
        for c, p in self.pivots.items():
            x[c] = b[p]
        # free columns are zero, so pivot rows read off directly
        return x

    def kernel_basis(self) -> list:
        """Basis of the null space, one vector per free column."""
        free = [c for c in range(self.ncols) if c not in self.pivots]
        out = []
        for fc in free:
            v = [mpq(0)] * self.ncols
            v[fc] = mpq(1)
            for c, p in self.pivots.items():
                a = self._rows[p].get(fc)
                if a:
                    v[c] = -a
            out.append(v)
        return out
