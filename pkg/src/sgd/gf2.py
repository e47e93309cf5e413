"""Crossing-by-face incidence matrix over GF(2) and solving machinery.

Rows are crossings, columns are faces; entry 1 when the crossing lies on the
face's boundary (set semantics).  Applying a region set changes exactly the
crossings whose column-sum over the set is odd, so "which region sets realize
this crossing-change target" is plain linear algebra over GF(2) with
bit-packed integer rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .core import Diagram
from .errors import UnknownCrossing


@dataclass(frozen=True)
class Gf2Matrix:
    rows: tuple  # crossing ids, sorted
    cols: tuple  # face ids, canonical order
    bits: tuple  # per row: int with bit k set iff incident to cols[k]

    def row_of(self, crossing: str) -> int:
        try:
            return self.rows.index(crossing)
        except ValueError:
            raise UnknownCrossing(crossing) from None

    def column_mask(self, face_ids) -> int:
        m = 0
        for fid in face_ids:
            m |= 1 << self.cols.index(fid)
        return m

    def flips(self, face_ids) -> frozenset:
        """Crossings changed by a region crossing change at ``face_ids``."""
        m = self.column_mask(face_ids)
        return frozenset(
            c for c, b in zip(self.rows, self.bits) if bin(b & m).count("1") % 2
        )


@dataclass(frozen=True)
class TargetSet:
    change: frozenset  # crossing ids to flip
    care: Optional[frozenset] = None  # constrained crossings; None = all

    def care_rows(self, all_rows) -> tuple:
        if self.care is None:
            return tuple(all_rows)
        return tuple(c for c in all_rows if c in self.care)


@dataclass(frozen=True)
class SolveOutcome:
    sat: bool
    regions: Optional[frozenset] = None  # face ids, when sat
    certificate: Optional[frozenset] = None  # crossing ids whose rows sum to 0, targets to 1
    induced: Optional[frozenset] = None  # all crossings actually flipped


def incidence_matrix(d: Diagram) -> Gf2Matrix:
    faces = d.faces()
    cols = tuple(f.id for f in faces)
    rows = tuple(d.crossing_ids())
    bits = []
    for c in rows:
        b = 0
        for k, f in enumerate(faces):
            if c in f.crossings_on_boundary:
                b |= 1 << k
        bits.append(b)
    return Gf2Matrix(rows, cols, tuple(bits))


def _eliminate(m: Gf2Matrix, row_ids, target: frozenset):
    """Gaussian elimination over the row-restricted system M x = t.

    Returns (solution mask | None, certificate row-id set | None).  Rows are
    augmented with the target bit and a left-multiplier marker so an
    infeasible combination yields a verifiable certificate.
    """
    ncols = len(m.cols)
    tbit = 1 << ncols
    work = []
    for k, rid in enumerate(row_ids):
        row = m.bits[m.row_of(rid)]
        if rid in target:
            row |= tbit
        work.append((row, 1 << k))
    pivots = []  # (col, row bits, marker)
    for col in range(ncols):
        pos = None
        for i in range(len(work)):
            if (work[i][0] >> col) & 1:
                pos = i
                break
        if pos is None:
            continue
        prow, pmark = work.pop(pos)
        for i in range(len(work)):
            if (work[i][0] >> col) & 1:
                work[i] = (work[i][0] ^ prow, work[i][1] ^ pmark)
        pivots.append((col, prow, pmark))
    for row, mark in work:
        if row & tbit:
            cert = frozenset(row_ids[k] for k in range(len(row_ids)) if (mark >> k) & 1)
            return None, cert
    x = 0
    # back-substitution over the reduced pivot rows (free columns stay 0)
    for col, prow, _ in reversed(pivots):
        rhs = 1 if (prow & tbit) else 0
        acc = 0
        probe = prow & ~((1 << (col + 1)) - 1) & ((1 << ncols) - 1)
        acc = bin(probe & x).count("1") % 2
        if (rhs ^ acc) & 1:
            x |= 1 << col
    return x, None


def solve(m: Gf2Matrix, t: TargetSet) -> SolveOutcome:
    """Exact solve: change exactly t.change among all crossings (no care-set)."""
    for c in t.change:
        m.row_of(c)
    x, cert = _eliminate(m, tuple(m.rows), t.change)
    if x is None:
        return SolveOutcome(False, certificate=cert)
    regions = frozenset(m.cols[k] for k in range(len(m.cols)) if (x >> k) & 1)
    return SolveOutcome(True, regions=regions, induced=m.flips(regions))


def solve_with_dont_care(m: Gf2Matrix, t: TargetSet) -> SolveOutcome:
    """Row-restricted solve: only crossings in the care-set are constrained.

    The reported ``induced`` set includes whatever happened to don't-care
    crossings under the returned region set.
    """
    for c in t.change:
        m.row_of(c)
    care = t.care_rows(m.rows)
    x, cert = _eliminate(m, care, t.change & frozenset(care) if t.care is not None else t.change)
    if x is None:
        return SolveOutcome(False, certificate=cert)
    regions = frozenset(m.cols[k] for k in range(len(m.cols)) if (x >> k) & 1)
    return SolveOutcome(True, regions=regions, induced=m.flips(regions))


def solve_constraints(m: Gf2Matrix, ones, zeros, pairs) -> SolveOutcome:
    """Solve for a region set whose flips satisfy mixed constraints:
    crossings in ``ones`` flip, crossings in ``zeros`` do not, and each pair
    in ``pairs`` flips together (either both or neither)."""
    ncols = len(m.cols)
    tbit = 1 << ncols
    work = []
    keys = []
    for c in sorted(ones):
        work.append(m.bits[m.row_of(c)] | tbit)
        keys.append(("one", c))
    for c in sorted(zeros):
        work.append(m.bits[m.row_of(c)])
        keys.append(("zero", c))
    for c1, c2 in sorted(pairs):
        work.append(m.bits[m.row_of(c1)] ^ m.bits[m.row_of(c2)])
        keys.append(("pair", c1, c2))
    marks = [1 << k for k in range(len(work))]
    pivots = []
    rows = list(zip(work, marks))
    for col in range(ncols):
        pos = None
        for i in range(len(rows)):
            if (rows[i][0] >> col) & 1:
                pos = i
                break
        if pos is None:
            continue
        prow, pmark = rows.pop(pos)
        for i in range(len(rows)):
            if (rows[i][0] >> col) & 1:
                rows[i] = (rows[i][0] ^ prow, rows[i][1] ^ pmark)
        pivots.append((col, prow))
    for row, mark in rows:
        if row & tbit:
            cert = frozenset(
                keys[k][1] for k in range(len(keys)) if (mark >> k) & 1
            )
            return SolveOutcome(False, certificate=cert)
    x = 0
    for col, prow in reversed(pivots):
        rhs = 1 if (prow & tbit) else 0
        probe = prow & ~((1 << (col + 1)) - 1) & ((1 << ncols) - 1)
        acc = bin(probe & x).count("1") % 2
        if (rhs ^ acc) & 1:
            x |= 1 << col
    regions = frozenset(m.cols[k] for k in range(ncols) if (x >> k) & 1)
    return SolveOutcome(True, regions=regions, induced=m.flips(regions))


def kernel_basis(m: Gf2Matrix) -> tuple:
    """Basis of the null space: region sets whose application changes nothing."""
    ncols = len(m.cols)
    work = list(m.bits)
    pivot_of_col = {}
    reduced = []
    for col in range(ncols):
        pos = None
        for i in range(len(work)):
            if (work[i] >> col) & 1:
                pos = i
                break
        if pos is None:
            continue
        prow = work.pop(pos)
        for i in range(len(work)):
            if (work[i] >> col) & 1:
                work[i] ^= prow
        for j in range(len(reduced)):
            if (reduced[j][1] >> col) & 1:
                reduced[j] = (reduced[j][0], reduced[j][1] ^ prow)
        pivot_of_col[col] = prow
        reduced.append((col, prow))
    basis = []
    pivot_cols = set(pivot_of_col)
    for free in range(ncols):
        if free in pivot_cols:
            continue
        vec = 1 << free
        for col, prow in reduced:
            if (prow >> free) & 1:
                vec |= 1 << col
        basis.append(frozenset(m.cols[k] for k in range(ncols) if (vec >> k) & 1))
    return tuple(basis)


def rank(m: Gf2Matrix) -> int:
    return len(m.cols) - len(kernel_basis(m))


def minimum_weight_witness(m: Gf2Matrix, outcome: SolveOutcome) -> frozenset:
    """Smallest region set equivalent to a Sat witness, by kernel search.

    Only attempted when the kernel dimension is at most 20; otherwise the
    original witness is returned unchanged.
    """
    if not outcome.sat:
        raise ValueError("no witness to minimize")
    basis = kernel_basis(m)
    if len(basis) > 20:
        return outcome.regions
    base = m.column_mask(outcome.regions)
    masks = [m.column_mask(b) for b in basis]
    best = base
    best_w = bin(base).count("1")
    for combo in range(1, 1 << len(masks)):
        v = base
        k = combo
        i = 0
        while k:
            if k & 1:
                v ^= masks[i]
            k >>= 1
            i += 1
        w = bin(v).count("1")
        if w < best_w or (w == best_w and v < best):
            best, best_w = v, w
    return frozenset(m.cols[k] for k in range(len(m.cols)) if (best >> k) & 1)
