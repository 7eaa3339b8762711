"""Global branch-and-bound for the nonconvex acquisition MIQP.

Branching order: categorical label blocks first, then continuous indicator
chains (bisecting the interval-index range), then spatial bisection of x
inside a single cell to tighten the nonconvex exploration rows. Node
selection is best-bound with (depth, creation order) tie-breaks, so runs
are deterministic for a fixed model and config.

Lower bounds combine a reachable-leaf relaxation of the tree rows (each
tree contributes the smallest leaf weight compatible with the node's cells
and labels) with an interval over-estimate of the exploration term (the
minimum over data points of the box-maximum distance dominates the
max-of-min). User constraint rows participate through interval propagation
and pruning; incumbents are validated against them directly and therefore
are always eps-feasible.

Termination by wall clock is supported but breaks bit-reproducibility; use
``node_limit`` when byte-identical records are required.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import Point
from .core.constraints import EQ, GE, LE
from .encode import (
    IndRowM,
    LinRowM,
    MiqpModel,
    ProdRowM,
    QuadRowM,
    acquisition_value,
    complete_solution,
)

INF = math.inf


@dataclass(frozen=True)
class SolveConfig:
    """Solver tolerances and limits.

    ``time_limit_secs`` is advisory: when it expires before any feasible
    incumbent exists, the search continues until the first one is found.
    ``node_limit`` is the deterministic analogue used by seeded experiments.
    ``seed`` is recorded for metadata; the search itself draws nothing.
    """

    rel_gap: float = 1e-4
    feas_tol: float = 1e-6
    time_limit_secs: float = 100.0
    node_limit: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.rel_gap <= 0 or self.feas_tol <= 0:
            raise ValueError("tolerances must be positive")


@dataclass
class SolveResult:
    point: Point | None
    objective: float
    bound: float
    gap: float
    status: str  # optimal | gap_limit | time_limit_feasible | infeasible
    nodes: int
    wall_time: float
    solution: np.ndarray | None = None

    def __post_init__(self):
        if self.point is not None and self.bound > self.objective + 1e-9:
            raise ValueError("bound exceeds incumbent objective")


@dataclass
class _Node:
    uid: int
    depth: int
    cell_lo: np.ndarray
    cell_hi: np.ndarray
    box_lo: np.ndarray
    box_hi: np.ndarray
    masks: np.ndarray
    aux_lo: np.ndarray
    aux_hi: np.ndarray
    bound: float = -INF

    def heap_key(self):
        return (self.bound, self.depth, self.uid)


class _PLin:
    __slots__ = ("cont", "cat", "aux", "sense", "rhs", "name", "scale")

    def __init__(self, cont, cat, aux, sense, rhs, name):
        self.cont, self.cat, self.aux = cont, cat, aux
        self.sense, self.rhs, self.name = sense, rhs, name
        coeffs = [c for _, c in cont] + [c for *_, c in cat] + [c for _, c in aux]
        self.scale = max(1.0, math.sqrt(sum(c * c for c in coeffs)))


class _PQuad:
    __slots__ = ("squares", "bilinear", "lin", "rhs", "name", "scale")

    def __init__(self, squares, bilinear, lin, rhs, name):
        self.squares, self.bilinear, self.lin = squares, bilinear, lin
        self.rhs, self.name = rhs, name
        coeffs = [q for _, q in squares] + [q for *_, q in bilinear]
        self.scale = max(lin.scale, math.sqrt(sum(c * c for c in coeffs)))


class Solver:
    def __init__(self, model: MiqpModel, config: SolveConfig):
        self.model = model
        self.config = config
        space = model.space
        self.cont = list(space.continuous_indices)
        self.cat = list(space.categorical_indices)
        self.cont_pos = {i: c for c, i in enumerate(self.cont)}
        self.cat_pos = {i: c for c, i in enumerate(self.cat)}
        self.lows = np.array([space.features[i].lower for i in self.cont])
        self.widths = np.array([space.features[i].width for i in self.cont])
        self.n_cells = np.array([model.n_cells(i) for i in self.cont], dtype=np.int32)
        self.aux_names = list(model.aux_var.keys())
        self.aux_pos = {n: k for k, n in enumerate(self.aux_names)}
        self.aux_idx = np.array([model.aux_var[n] for n in self.aux_names], dtype=int)
        self.label_bits = [
            (np.int64(1) << np.arange(space.features[i].n_labels, dtype=np.int64))
            for i in self.cat
        ]
        self._stack_tables()
        self._compile_rows()
        self.uid = 0
        ex = model.explore
        self.alpha_coeff = ex.coeff if ex is not None else 0.0
        self.has_user_rows = bool(self.lin_rows or self.quad_rows or self.ind_rows or self.prod_rows)

    # -- static model data -----------------------------------------------------

    def _stack_tables(self):
        model = self.model
        if model.kind == "maxmin" or not model.tables:
            self.leaf_values = np.zeros(0)
            self.tree_offsets = np.zeros(1, dtype=int)
            self.ens_tree_offsets = np.zeros(1, dtype=int)
            self.bases = np.zeros(0)
            self.leaf_cont_lo = np.zeros((0, len(self.cont)), dtype=np.int32)
            self.leaf_cont_hi = np.zeros((0, len(self.cont)), dtype=np.int32)
            self.leaf_cat_masks = np.zeros((0, len(self.cat)), dtype=np.int64)
            return
        values, clo, chi, cmask = [], [], [], []
        tree_offsets = [0]
        ens_tree_offsets = [0]
        bases = []
        for tab in model.tables:
            n_prev = tree_offsets[-1]
            for t in range(len(tab.tree_offsets) - 1):
                lo, hi = tab.tree_offsets[t], tab.tree_offsets[t + 1]
                values.append(tab.values[lo:hi])
                clo.append(tab.cont_lo[lo:hi])
                chi.append(tab.cont_hi[lo:hi])
                cmask.append(tab.cat_masks[lo:hi])
                tree_offsets.append(tree_offsets[-1] + (hi - lo))
            ens_tree_offsets.append(len(tree_offsets) - 1)
            bases.append(tab.base)
        self.bases = np.array(bases)
        self.ens_tree_offsets = np.array(ens_tree_offsets, dtype=int)
        self.tree_offsets = np.array(tree_offsets, dtype=int)
        if values:
            self.leaf_values = np.concatenate(values)
            self.leaf_cont_lo = np.vstack(clo)
            self.leaf_cont_hi = np.vstack(chi)
            self.leaf_cat_masks = np.vstack(cmask)
        else:
            self.leaf_values = np.zeros(0)
            self.leaf_cont_lo = np.zeros((0, len(self.cont)), dtype=np.int32)
            self.leaf_cont_hi = np.zeros((0, len(self.cont)), dtype=np.int32)
            self.leaf_cat_masks = np.zeros((0, len(self.cat)), dtype=np.int64)

    def _classify_var(self, v: int):
        model = self.model
        for i in self.cont:
            if model.x_var[i] == v:
                return ("x", self.cont_pos[i])
        for i in self.cat:
            ids = model.nu_cat[i]
            hit = np.nonzero(ids == v)[0]
            if hit.size:
                return ("nu", self.cat_pos[i], int(hit[0]))
        for k, idx in enumerate(self.aux_idx):
            if idx == v:
                return ("aux", k)
        return None

    def _compile_rows(self):
        self.lin_rows: list[_PLin] = []
        self.quad_rows: list[_PQuad] = []
        self.ind_rows: list[tuple[int, bool, _PLin]] = []
        self.prod_rows: list[tuple[int, int, int]] = []
        self.sq_rows: list[_PQuad] = []  # pure-square quadratic rows, batched
        var_class: dict[int, tuple] = {}

        def classify(v):
            if v not in var_class:
                var_class[v] = self._classify_var(v)
            return var_class[v]

        def compile_lin(row: LinRowM) -> _PLin | None:
            cont, cat, aux = [], [], []
            for v, c in row.terms:
                if c == 0.0:
                    continue
                cls = classify(v)
                if cls is None:
                    return None  # references model-internal vars; not propagated
                if cls[0] == "x":
                    cont.append((cls[1], c))
                elif cls[0] == "nu":
                    cat.append((cls[1], cls[2], c))
                else:
                    aux.append((cls[1], c))
            return _PLin(cont, cat, aux, row.sense, row.rhs, row.name)

        for r in self.model.rows:
            if not getattr(r, "user", False):
                continue
            if isinstance(r, LinRowM):
                p = compile_lin(r)
                if p is not None and (p.cont or p.cat or p.aux):
                    self.lin_rows.append(p)
            elif isinstance(r, QuadRowM):
                squares, bilinear = [], []
                ok = True
                for a, b, q in r.quad:
                    ca, cb = classify(a), classify(b)
                    if ca is None or cb is None or ca[0] == "nu" or cb[0] == "nu":
                        ok = False
                        break
                    ta = (ca[0], ca[1])
                    tb = (cb[0], cb[1])
                    if a == b:
                        squares.append((ta, q))
                    else:
                        bilinear.append((ta, tb, q))
                lin = compile_lin(LinRowM(r.terms, LE, 0.0))
                if ok and lin is not None:
                    row = _PQuad(squares, bilinear, lin, r.rhs, r.name)
                    if not bilinear and not lin.cont and not lin.cat and not lin.aux:
                        self.sq_rows.append(row)
                    else:
                        self.quad_rows.append(row)
            elif isinstance(r, IndRowM):
                cls = classify(r.guard)
                p = compile_lin(r.then)
                if cls is not None and cls[0] == "aux" and p is not None:
                    self.ind_rows.append((cls[1], r.polarity, p))
            elif isinstance(r, ProdRowM):
                cr, ca, cb = classify(r.result), classify(r.a), classify(r.b)
                if all(c is not None and c[0] == "aux" for c in (cr, ca, cb)):
                    self.prod_rows.append((cr[1], ca[1], cb[1]))
        self._build_row_arrays()

    def _build_row_arrays(self):
        """Flat term arrays so one numpy pass can interval-check every row."""
        t_row, t_kind, t_pos, t_label, t_coeff = [], [], [], [], []
        for r_id, row in enumerate(self.lin_rows):
            for cpos, coeff in row.cont:
                t_row.append(r_id); t_kind.append(0); t_pos.append(cpos); t_label.append(0); t_coeff.append(coeff)
            for cpos, label, coeff in row.cat:
                t_row.append(r_id); t_kind.append(1); t_pos.append(cpos); t_label.append(label); t_coeff.append(coeff)
            for apos, coeff in row.aux:
                t_row.append(r_id); t_kind.append(2); t_pos.append(apos); t_label.append(0); t_coeff.append(coeff)
        self.lt_row = np.array(t_row, dtype=int)
        self.lt_kind = np.array(t_kind, dtype=np.int8)
        self.lt_pos = np.array(t_pos, dtype=int)
        self.lt_label = np.array(t_label, dtype=int)
        self.lt_coeff = np.array(t_coeff, dtype=float)
        n_rows = len(self.lin_rows)
        counts = np.bincount(self.lt_row, minlength=n_rows) if n_rows else np.zeros(0, dtype=int)
        self.lt_offsets = np.concatenate(([0], np.cumsum(counts)))[:-1] if n_rows else np.zeros(0, dtype=int)
        self.lin_sense_le = np.array([r.sense in (LE, EQ) for r in self.lin_rows], dtype=bool)
        self.lin_sense_ge = np.array([r.sense in (GE, EQ) for r in self.lin_rows], dtype=bool)
        self.lin_rhs = np.array([r.rhs for r in self.lin_rows], dtype=float)
        k_max = max((len(b) for b in self.label_bits), default=0)
        self.label_bit_matrix = np.zeros((len(self.cat), k_max), dtype=np.int64)
        for c, bits in enumerate(self.label_bits):
            self.label_bit_matrix[c, : len(bits)] = bits
        # pure-square quadratic rows
        s_row, s_kind, s_pos, s_q = [], [], [], []
        for r_id, row in enumerate(self.sq_rows):
            for (kind, pos), q in row.squares:
                s_row.append(r_id); s_kind.append(0 if kind == "x" else 2); s_pos.append(pos); s_q.append(q)
        self.sq_row = np.array(s_row, dtype=int)
        self.sq_kind = np.array(s_kind, dtype=np.int8)
        self.sq_pos = np.array(s_pos, dtype=int)
        self.sq_q = np.array(s_q, dtype=float)
        self.sq_rhs = np.array([r.rhs for r in self.sq_rows], dtype=float)
        self.sq_scale = np.array([r.scale for r in self.sq_rows], dtype=float)

    # -- node algebra ----------------------------------------------------------

    def root(self) -> _Node:
        model = self.model
        cell_lo = np.zeros(len(self.cont), dtype=np.int32)
        cell_hi = self.n_cells - 1
        box_lo = self.lows.copy()
        box_hi = self.lows + self.widths
        masks = np.array(
            [np.int64((1 << model.space.features[i].n_labels) - 1) for i in self.cat],
            dtype=np.int64,
        )
        lo, hi = model.bounds_arrays()
        aux_lo = lo[self.aux_idx] if len(self.aux_idx) else np.zeros(0)
        aux_hi = hi[self.aux_idx] if len(self.aux_idx) else np.zeros(0)
        self.uid += 1
        return _Node(self.uid, 0, cell_lo, cell_hi, box_lo, box_hi, masks,
                     aux_lo.copy(), aux_hi.copy())

    def _child(self, node: _Node) -> _Node:
        self.uid += 1
        return _Node(
            self.uid,
            node.depth + 1,
            node.cell_lo.copy(),
            node.cell_hi.copy(),
            node.box_lo.copy(),
            node.box_hi.copy(),
            node.masks.copy(),
            node.aux_lo.copy(),
            node.aux_hi.copy(),
        )

    def _sync_cells_box(self, node: _Node) -> bool:
        """Mutually tighten interval-index ranges and the x box."""
        model = self.model
        for c, i in enumerate(self.cont):
            ths = model.thresholds[i]
            if len(ths):
                lo_c = int(np.searchsorted(ths, node.box_lo[c], side="left"))
                hi_c = int(np.searchsorted(ths, node.box_hi[c], side="left"))
                node.cell_lo[c] = max(node.cell_lo[c], lo_c)
                node.cell_hi[c] = min(node.cell_hi[c], hi_c)
            if node.cell_lo[c] > node.cell_hi[c]:
                return False
            hull_lo, _ = model.cell_interval(i, int(node.cell_lo[c]))
            _, hull_hi = model.cell_interval(i, int(node.cell_hi[c]))
            node.box_lo[c] = max(node.box_lo[c], hull_lo)
            node.box_hi[c] = min(node.box_hi[c], hull_hi)
            if node.box_lo[c] > node.box_hi[c] + 1e-12:
                return False
        return True

    def _nu_interval(self, node: _Node, cpos: int, label: int) -> tuple[float, float]:
        bit = np.int64(1) << np.int64(label)
        m = node.masks[cpos]
        if not (m & bit):
            return 0.0, 0.0
        if m == bit:
            return 1.0, 1.0
        return 0.0, 1.0

    def _lin_interval(self, node: _Node, row: _PLin) -> tuple[float, float]:
        lo = hi = 0.0
        for cpos, coeff in row.cont:
            a = coeff * node.box_lo[cpos]
            b = coeff * node.box_hi[cpos]
            lo += min(a, b)
            hi += max(a, b)
        for cpos, label, coeff in row.cat:
            l, h = self._nu_interval(node, cpos, label)
            lo += min(coeff * l, coeff * h)
            hi += max(coeff * l, coeff * h)
        for apos, coeff in row.aux:
            a = coeff * node.aux_lo[apos]
            b = coeff * node.aux_hi[apos]
            lo += min(a, b)
            hi += max(a, b)
        return lo, hi

    def _tighten_lin(self, node: _Node, row: _PLin, tol: float) -> int:
        """Returns -1 infeasible, 0 unchanged, 1 tightened."""
        lo, hi = self._lin_interval(node, row)
        changed = 0
        senses = []
        if row.sense in (LE, EQ):
            senses.append((LE, row.rhs))
        if row.sense in (GE, EQ):
            senses.append((GE, row.rhs))
        for sense, rhs in senses:
            if sense == LE and lo > rhs + tol:
                return -1
            if sense == GE and hi < rhs - tol:
                return -1
        # a row satisfied over the whole box implies no bound can tighten
        senses = [
            (s, rhs)
            for s, rhs in senses
            if not (s == LE and hi <= rhs) and not (s == GE and lo >= rhs)
        ]
        for sense, rhs in senses:
            for cpos, coeff in row.cont:
                a, b = coeff * node.box_lo[cpos], coeff * node.box_hi[cpos]
                rest_lo = lo - min(a, b)
                rest_hi = hi - max(a, b)
                if sense == LE:
                    cap = rhs - rest_lo
                    if coeff > 0 and node.box_hi[cpos] > cap / coeff + 1e-12:
                        node.box_hi[cpos] = cap / coeff
                        changed = 1
                    elif coeff < 0 and node.box_lo[cpos] < cap / coeff - 1e-12:
                        node.box_lo[cpos] = cap / coeff
                        changed = 1
                else:
                    need = rhs - rest_hi
                    if coeff > 0 and node.box_lo[cpos] < need / coeff - 1e-12:
                        node.box_lo[cpos] = need / coeff
                        changed = 1
                    elif coeff < 0 and node.box_hi[cpos] > need / coeff + 1e-12:
                        node.box_hi[cpos] = need / coeff
                        changed = 1
                if node.box_lo[cpos] > node.box_hi[cpos] + 1e-12:
                    return -1
            for cpos, label, coeff in row.cat:
                l, h = self._nu_interval(node, cpos, label)
                a, b = coeff * l, coeff * h
                rest_lo = lo - min(a, b)
                rest_hi = hi - max(a, b)
                bit = np.int64(1) << np.int64(label)
                if sense == LE:
                    cap = rhs - rest_lo
                    if coeff > 0 and cap / coeff < 1.0 - 1e-9 and (node.masks[cpos] & bit):
                        if cap / coeff < -1e-9:
                            return -1
                        if node.masks[cpos] != bit:
                            node.masks[cpos] &= ~bit
                            changed = 1
                        else:
                            return -1
                    elif coeff < 0 and cap / coeff > 1e-9 and node.masks[cpos] != bit:
                        # nu must be >= cap/coeff > 0, so the label is forced on
                        if not (node.masks[cpos] & bit):
                            return -1
                        node.masks[cpos] = bit
                        changed = 1
                else:
                    need = rhs - rest_hi
                    if coeff > 0 and need / coeff > 1e-9 and node.masks[cpos] != bit:
                        if not (node.masks[cpos] & bit):
                            return -1
                        node.masks[cpos] = bit
                        changed = 1
                    elif coeff < 0 and need / coeff < 1.0 - 1e-9 and (node.masks[cpos] & bit):
                        if need / coeff < -1e-9:
                            return -1
                        if node.masks[cpos] != bit:
                            node.masks[cpos] &= ~bit
                            changed = 1
                        else:
                            return -1
            for apos, coeff in row.aux:
                a, b = coeff * node.aux_lo[apos], coeff * node.aux_hi[apos]
                rest_lo = lo - min(a, b)
                rest_hi = hi - max(a, b)
                if sense == LE:
                    cap = rhs - rest_lo
                    if coeff > 0 and node.aux_hi[apos] > cap / coeff + 1e-12:
                        node.aux_hi[apos] = cap / coeff
                        changed = 1
                    elif coeff < 0 and node.aux_lo[apos] < cap / coeff - 1e-12:
                        node.aux_lo[apos] = cap / coeff
                        changed = 1
                else:
                    need = rhs - rest_hi
                    if coeff > 0 and node.aux_lo[apos] < need / coeff - 1e-12:
                        node.aux_lo[apos] = need / coeff
                        changed = 1
                    elif coeff < 0 and node.aux_hi[apos] > need / coeff + 1e-12:
                        node.aux_hi[apos] = need / coeff
                        changed = 1
                if node.aux_lo[apos] > node.aux_hi[apos] + 1e-12:
                    return -1
        return changed

    def _term_interval(self, node: _Node, ref) -> tuple[float, float]:
        kind, pos = ref
        if kind == "x":
            return node.box_lo[pos], node.box_hi[pos]
        return node.aux_lo[pos], node.aux_hi[pos]

    def _tighten_quad(self, node: _Node, row: _PQuad, tol: float) -> int:
        lo_sum = 0.0
        square_parts = []
        for ref, q in row.squares:
            a, b = self._term_interval(node, ref)
            m = 0.0 if a <= 0.0 <= b else min(a * a, b * b)
            mx = max(a * a, b * b)
            contrib_lo = q * m if q > 0 else q * mx
            square_parts.append((ref, q, contrib_lo))
            lo_sum += contrib_lo
        for ra, rb, q in row.bilinear:
            a1, a2 = self._term_interval(node, ra)
            b1, b2 = self._term_interval(node, rb)
            prods = (a1 * b1, a1 * b2, a2 * b1, a2 * b2)
            lo_sum += q * min(prods) if q > 0 else q * max(prods)
        lin_lo, _ = self._lin_interval(node, row.lin)
        lo_sum += lin_lo
        if lo_sum > row.rhs + tol:
            return -1
        changed = 0
        for ref, q, contrib_lo in square_parts:
            if q <= 0:
                continue
            cap = (row.rhs - (lo_sum - contrib_lo)) / q
            if cap < -tol:
                return -1
            bound = math.sqrt(max(cap, 0.0))
            kind, pos = ref
            if kind == "x":
                if node.box_hi[pos] > bound + 1e-9:
                    node.box_hi[pos] = bound
                    changed = 1
                if node.box_lo[pos] < -bound - 1e-9:
                    node.box_lo[pos] = -bound
                    changed = 1
                if node.box_lo[pos] > node.box_hi[pos] + 1e-12:
                    return -1
            else:
                if node.aux_hi[pos] > bound + 1e-9:
                    node.aux_hi[pos] = bound
                    changed = 1
                if node.aux_lo[pos] < -bound - 1e-9:
                    node.aux_lo[pos] = -bound
                    changed = 1
                if node.aux_lo[pos] > node.aux_hi[pos] + 1e-12:
                    return -1
        return changed

    def _nu_intervals(self, node: _Node) -> tuple[np.ndarray, np.ndarray]:
        """(lo, hi) of every categorical indicator as (n_cat, K_max) arrays."""
        masks = node.masks[:, None]
        allowed = (masks & self.label_bit_matrix) != 0
        single = masks == self.label_bit_matrix
        return single.astype(float), allowed.astype(float)

    def _lin_pass(self, node: _Node, tol: float) -> tuple[bool, bool]:
        """Vectorized interval check plus Jacobi tightening of all linear rows.

        Implied per-term bounds are applied simultaneously; returns
        (feasible, anything changed).
        """
        if not len(self.lt_row):
            return True, False
        rows = self.lt_row
        vlo = np.empty(len(rows))
        vhi = np.empty(len(rows))
        is_x = self.lt_kind == 0
        is_nu = self.lt_kind == 1
        is_aux = self.lt_kind == 2
        vlo[is_x] = node.box_lo[self.lt_pos[is_x]]
        vhi[is_x] = node.box_hi[self.lt_pos[is_x]]
        if is_nu.any():
            nu_lo, nu_hi = self._nu_intervals(node)
            vlo[is_nu] = nu_lo[self.lt_pos[is_nu], self.lt_label[is_nu]]
            vhi[is_nu] = nu_hi[self.lt_pos[is_nu], self.lt_label[is_nu]]
        vlo[is_aux] = node.aux_lo[self.lt_pos[is_aux]]
        vhi[is_aux] = node.aux_hi[self.lt_pos[is_aux]]
        a = self.lt_coeff * vlo
        b = self.lt_coeff * vhi
        t_lo = np.minimum(a, b)
        t_hi = np.maximum(a, b)
        row_lo = np.add.reduceat(t_lo, self.lt_offsets)
        row_hi = np.add.reduceat(t_hi, self.lt_offsets)
        if np.any(self.lin_sense_le & (row_lo > self.lin_rhs + tol)):
            return False, False
        if np.any(self.lin_sense_ge & (row_hi < self.lin_rhs - tol)):
            return False, False

        pos_c = self.lt_coeff > 0
        new_hi = np.full(len(rows), INF)
        new_lo = np.full(len(rows), -INF)
        sel = self.lin_sense_le[rows]
        cap = self.lin_rhs[rows] - (row_lo[rows] - t_lo)
        np.divide(cap, self.lt_coeff, out=new_hi, where=sel & pos_c)
        np.divide(cap, self.lt_coeff, out=new_lo, where=sel & ~pos_c)
        sel = self.lin_sense_ge[rows]
        need = self.lin_rhs[rows] - (row_hi[rows] - t_hi)
        tmp = np.zeros(len(rows))
        np.divide(need, self.lt_coeff, out=tmp, where=sel)
        new_lo = np.where(sel & pos_c, np.maximum(new_lo, tmp), new_lo)
        new_hi = np.where(sel & ~pos_c, np.minimum(new_hi, tmp), new_hi)

        changed = False
        for kind_sel, arr_lo, arr_hi, pos in (
            (is_x, node.box_lo, node.box_hi, self.lt_pos),
            (is_aux, node.aux_lo, node.aux_hi, self.lt_pos),
        ):
            if not kind_sel.any():
                continue
            p = pos[kind_sel]
            old_hi = arr_hi.copy()
            old_lo = arr_lo.copy()
            np.minimum.at(arr_hi, p, new_hi[kind_sel])
            np.maximum.at(arr_lo, p, new_lo[kind_sel])
            if np.any(arr_hi < old_hi - 1e-12) or np.any(arr_lo > old_lo + 1e-12):
                changed = True
            if np.any(arr_lo > arr_hi + 1e-9):
                return False, changed
        if is_nu.any():
            k_max = self.label_bit_matrix.shape[1]
            imp_hi = np.ones((len(self.cat), k_max))
            imp_lo = np.zeros((len(self.cat), k_max))
            p = self.lt_pos[is_nu]
            l = self.lt_label[is_nu]
            np.minimum.at(imp_hi, (p, l), new_hi[is_nu])
            np.maximum.at(imp_lo, (p, l), new_lo[is_nu])
            off_bits = (imp_hi < 1.0 - 1e-9) & (self.label_bit_matrix != 0)
            on_bits = (imp_lo > 1e-9) & (self.label_bit_matrix != 0)
            for c in range(len(self.cat)):
                mask = node.masks[c]
                if off_bits[c].any():
                    remove = np.bitwise_or.reduce(self.label_bit_matrix[c][off_bits[c]])
                    mask = np.int64(mask & ~remove)
                if on_bits[c].any():
                    forced = self.label_bit_matrix[c][on_bits[c]]
                    if len(forced) > 1:
                        return False, changed
                    mask = np.int64(mask & forced[0])
                if mask == 0:
                    return False, changed
                if mask != node.masks[c]:
                    node.masks[c] = mask
                    changed = True
        return True, changed

    def _sq_pass(self, node: _Node, tol: float) -> tuple[bool, bool]:
        """Vectorized prune and tighten of pure-square quadratic rows."""
        if not len(self.sq_row):
            return True, False
        vlo = np.empty(len(self.sq_row))
        vhi = np.empty(len(self.sq_row))
        is_x = self.sq_kind == 0
        vlo[is_x] = node.box_lo[self.sq_pos[is_x]]
        vhi[is_x] = node.box_hi[self.sq_pos[is_x]]
        vlo[~is_x] = node.aux_lo[self.sq_pos[~is_x]]
        vhi[~is_x] = node.aux_hi[self.sq_pos[~is_x]]
        straddles = (vlo <= 0.0) & (vhi >= 0.0)
        m2 = np.where(straddles, 0.0, np.minimum(vlo * vlo, vhi * vhi))
        mx2 = np.maximum(vlo * vlo, vhi * vhi)
        contrib_lo = np.where(self.sq_q > 0, self.sq_q * m2, self.sq_q * mx2)
        row_lo = np.zeros(len(self.sq_rows))
        np.add.at(row_lo, self.sq_row, contrib_lo)
        if np.any(row_lo > self.sq_rhs + tol * self.sq_scale):
            return False, False
        pos = self.sq_q > 0
        if not pos.any():
            return True, False
        cap = (self.sq_rhs[self.sq_row[pos]] - (row_lo[self.sq_row[pos]] - contrib_lo[pos])) / self.sq_q[pos]
        bound = np.sqrt(np.maximum(cap, 0.0))
        changed = False
        kinds = self.sq_kind[pos]
        positions = self.sq_pos[pos]
        for arr_lo, arr_hi, kind_code in ((node.box_lo, node.box_hi, 0), (node.aux_lo, node.aux_hi, 2)):
            sel = kinds == kind_code
            if not sel.any():
                continue
            p = positions[sel]
            bnd = bound[sel]
            old_hi = arr_hi[p]
            np.minimum.at(arr_hi, p, bnd)
            old_lo = arr_lo[p]
            np.maximum.at(arr_lo, p, -bnd)
            if np.any(arr_hi[p] < old_hi - 1e-12) or np.any(arr_lo[p] > old_lo + 1e-12):
                changed = True
            if np.any(arr_lo[p] > arr_hi[p] + 1e-12):
                return False, changed
        return True, changed

    def propagate(self, node: _Node) -> bool:
        """Interval-tighten the node against user rows; False when infeasible."""
        if not self._sync_cells_box(node):
            return False
        if not self.has_user_rows:
            return True
        tol = self.config.feas_tol
        for _ in range(3):
            changed = 0
            ok, lin_changed = self._lin_pass(node, tol)
            if not ok:
                return False
            changed |= lin_changed
            ok, sq_changed = self._sq_pass(node, tol)
            if not ok:
                return False
            changed |= sq_changed
            for apos, polarity, then in self.ind_rows:
                g_lo, g_hi = node.aux_lo[apos], node.aux_hi[apos]
                want = 1.0 if polarity else 0.0
                if g_lo > 0.5 or g_hi < 0.5:
                    active = (g_lo > 0.5) == polarity
                    if active:
                        r = self._tighten_lin(node, then, tol)
                        if r < 0:
                            return False
                        changed |= r
                else:
                    lo, hi = self._lin_interval(node, then)
                    violated = (
                        (then.sense == LE and lo > then.rhs + tol)
                        or (then.sense == GE and hi < then.rhs - tol)
                        or (then.sense == EQ and (lo > then.rhs + tol or hi < then.rhs - tol))
                    )
                    if violated:  # guard forced away from its polarity
                        if want > 0.5:
                            node.aux_hi[apos] = 0.0
                        else:
                            node.aux_lo[apos] = 1.0
                        if node.aux_lo[apos] > node.aux_hi[apos]:
                            return False
                        changed = 1
            for rpos, apos, bpos in self.prod_rows:
                r_lo = max(node.aux_lo[rpos], node.aux_lo[apos] + node.aux_lo[bpos] - 1.0)
                r_hi = min(node.aux_hi[rpos], node.aux_hi[apos], node.aux_hi[bpos])
                if r_lo > node.aux_lo[rpos]:
                    node.aux_lo[rpos] = r_lo
                    changed = 1
                if r_hi < node.aux_hi[rpos]:
                    node.aux_hi[rpos] = r_hi
                    changed = 1
                if node.aux_lo[rpos] > node.aux_hi[rpos] + 1e-12:
                    return False
                if node.aux_lo[rpos] > 0.5:  # product forced to 1
                    if node.aux_hi[apos] < 0.5 or node.aux_hi[bpos] < 0.5:
                        return False
                    if node.aux_lo[apos] < 0.5:
                        node.aux_lo[apos] = 1.0
                        changed = 1
                    if node.aux_lo[bpos] < 0.5:
                        node.aux_lo[bpos] = 1.0
                        changed = 1
                if node.aux_hi[rpos] < 0.5:  # product forced to 0
                    if node.aux_lo[apos] > 0.5 and node.aux_lo[bpos] > 0.5:
                        return False
                    if node.aux_lo[apos] > 0.5 and node.aux_hi[bpos] > 0.5:
                        node.aux_hi[bpos] = 0.0
                        changed = 1
                    elif node.aux_lo[bpos] > 0.5 and node.aux_hi[apos] > 0.5:
                        node.aux_hi[apos] = 0.0
                        changed = 1
            for row in self.quad_rows:
                r = self._tighten_quad(node, row, tol)
                if r < 0:
                    return False
                changed |= r
            if changed:
                if not self._sync_cells_box(node):
                    return False
            else:
                break
        return True

    # -- bounding ----------------------------------------------------------------

    def _mu_lower(self, node: _Node) -> float:
        """Lower bound on the scalarized prediction part of the objective."""
        model = self.model
        if model.kind == "maxmin":
            return 0.0
        spec = model.spec
        den = spec.denominators()
        best = -INF
        n_leaves = len(self.leaf_values)
        if n_leaves:
            ok = np.ones(n_leaves, dtype=bool)
            if len(self.cont):
                ok &= np.all(
                    (self.leaf_cont_lo <= node.cell_hi[None, :])
                    & (self.leaf_cont_hi >= node.cell_lo[None, :]),
                    axis=1,
                )
            if len(self.cat):
                ok &= np.all((self.leaf_cat_masks & node.masks[None, :]) != 0, axis=1)
            vals = np.where(ok, self.leaf_values, INF)
            tree_mins = np.minimum.reduceat(vals, self.tree_offsets[:-1])
        for e in range(len(model.ensembles)):
            w = float(spec.weights[e])
            if w == 0.0:
                best = max(best, 0.0)
                continue
            t0, t1 = self.ens_tree_offsets[e], self.ens_tree_offsets[e + 1]
            mu_lb = self.bases[e] + (float(tree_mins[t0:t1].sum()) if t1 > t0 else 0.0)
            best = max(best, w * (mu_lb - float(spec.y_lower[e])) / float(den[e]))
        return best

    def _alpha_upper(self, node: _Node) -> float:
        ex = self.model.explore
        if ex is None:
            return 0.0
        n_d = ex.Xn.shape[0]
        total = np.zeros(n_d)
        if len(self.cont):
            nlo = (node.box_lo - self.lows) / self.widths
            nhi = (node.box_hi - self.lows) / self.widths
            d_lo = nlo[None, :] - ex.Xn
            d_hi = nhi[None, :] - ex.Xn
            if ex.kind == "sqeuclid":
                total += np.sum(np.maximum(d_lo * d_lo, d_hi * d_hi), axis=1)
            else:
                total += np.sum(np.maximum(np.abs(d_lo), np.abs(d_hi)), axis=1)
        for c in range(len(self.cat)):
            k = len(self.label_bits[c])
            allowed = (node.masks[c] & self.label_bits[c]) != 0
            coeffs = np.where(allowed[None, :], ex.dissim[:, c, :k], -INF)
            total += np.max(coeffs, axis=1)
        return float(np.clip(np.min(total), 0.0, ex.cap))

    def bound(self, node: _Node) -> float:
        b = self._mu_lower(node)
        if self.alpha_coeff != 0.0:
            b -= self.alpha_coeff * self._alpha_upper(node)
        return b

    # -- candidates ----------------------------------------------------------------

    def _labels_center(self, node: _Node) -> np.ndarray:
        out = np.zeros(len(self.cat), dtype=int)
        for c in range(len(self.cat)):
            allowed = np.nonzero((node.masks[c] & self.label_bits[c]) != 0)[0]
            out[c] = int(allowed[0])
        return out

    def _labels_far(self, node: _Node) -> np.ndarray:
        ex = self.model.explore
        out = np.zeros(len(self.cat), dtype=int)
        for c in range(len(self.cat)):
            allowed = np.nonzero((node.masks[c] & self.label_bits[c]) != 0)[0]
            if ex is None or ex.dissim.shape[2] == 0:
                out[c] = int(allowed[0])
            else:
                means = ex.dissim[:, c, allowed].mean(axis=0)
                out[c] = int(allowed[int(np.argmax(means))])
        return out

    def _x_far(self, node: _Node) -> np.ndarray:
        ex = self.model.explore
        x = 0.5 * (node.box_lo + node.box_hi)
        if ex is None or not len(self.cont):
            return x
        nlo = (node.box_lo - self.lows) / self.widths
        nhi = (node.box_hi - self.lows) / self.widths
        for c in range(len(self.cont)):
            d_lo = np.min(np.abs(nlo[c] - ex.Xn[:, c])) if ex.Xn.size else 0.0
            d_hi = np.min(np.abs(nhi[c] - ex.Xn[:, c])) if ex.Xn.size else 0.0
            x[c] = node.box_lo[c] if d_lo > d_hi else node.box_hi[c]
        return x

    def _point_from(self, x_cont: np.ndarray, labels: np.ndarray) -> Point:
        space = self.model.space
        values = np.zeros(space.n)
        for c, i in enumerate(self.cont):
            values[i] = x_cont[c]
        for c, i in enumerate(self.cat):
            values[i] = labels[c]
        point = Point(tuple(values))
        if self.model.aux_completer is not None:
            point = Point(point.values, self.model.aux_completer(point))
        return point

    def _is_banned(self, x_cont: np.ndarray, labels: np.ndarray) -> bool:
        if not self.model.banned:
            return False
        cells = tuple(
            self.model.cell_of(i, float(x_cont[c])) for c, i in enumerate(self.cont)
        )
        labs = tuple(int(v) for v in labels)
        return (cells, labs) in self.model.banned

    def _rows_feasible(self, node_like_point: Point) -> bool:
        """Fast user-row check via the compiled rows (tolerance-scaled)."""
        x = np.array([node_like_point.values[i] for i in self.cont])
        labels = np.array([int(node_like_point.values[i]) for i in self.cat], dtype=int)
        aux = np.array([node_like_point.aux.get(n, 0.0) for n in self.aux_names])
        tol = self.config.feas_tol

        def lin_value(row: _PLin) -> float:
            v = 0.0
            for cpos, coeff in row.cont:
                v += coeff * x[cpos]
            for cpos, label, coeff in row.cat:
                v += coeff * (1.0 if labels[cpos] == label else 0.0)
            for apos, coeff in row.aux:
                v += coeff * aux[apos]
            return v

        def lin_ok(row: _PLin) -> bool:
            v = lin_value(row)
            t = tol * row.scale
            if row.sense == LE:
                return v <= row.rhs + t
            if row.sense == GE:
                return v >= row.rhs - t
            return abs(v - row.rhs) <= t

        for row in self.lin_rows:
            if not lin_ok(row):
                return False
        for apos, polarity, then in self.ind_rows:
            if (aux[apos] > 0.5) == polarity and not lin_ok(then):
                return False
        for rpos, apos, bpos in self.prod_rows:
            if abs(aux[rpos] - aux[apos] * aux[bpos]) > tol:
                return False
        for row in self.quad_rows:
            v = 0.0
            for (kind, pos), q in row.squares:
                t = x[pos] if kind == "x" else aux[pos]
                v += q * t * t
            for (ka, pa), (kb, pb), q in row.bilinear:
                ta = x[pa] if ka == "x" else aux[pa]
                tb = x[pb] if kb == "x" else aux[pb]
                v += q * ta * tb
            v += lin_value(row.lin)
            if v > row.rhs + tol * row.scale:
                return False
        return True

    def try_candidate(self, x_cont: np.ndarray, labels: np.ndarray):
        """Validate and score a candidate; returns (objective, Point) or None."""
        x_cont = np.clip(x_cont, self.lows, self.lows + self.widths)
        if self._is_banned(x_cont, labels):
            return None
        point = self._point_from(x_cont, labels)
        if self.has_user_rows and not self._rows_feasible(point):
            return None
        return acquisition_value(self.model, point.as_vector()), point

    def node_candidates(self, node: _Node, with_repair: bool = True):
        center = 0.5 * (node.box_lo + node.box_hi)
        yield center, self._labels_center(node)
        if self.model.explore is not None:
            yield self._x_far(node), self._labels_far(node)
        hook = getattr(self.model, "repair_hook", None)
        if hook is not None and self.has_user_rows and with_repair:
            got = hook(center, self._labels_center(node), node.box_lo.copy(), node.box_hi.copy())
            if got is not None:
                yield got

    # -- terminal refinement ------------------------------------------------------

    def refine_cell(self, node: _Node, tol: float):
        """Final treatment of a fully-fixed, unconstrained cell.

        The prediction part is constant over the cell. The exploration part
        is maximized exactly when the stationary-candidate enumeration is
        affordable (squared-distance bisectors are hyperplanes; Manhattan
        breakpoints form a lattice) and by capped interval bisection
        otherwise. Returns (value, best x, labels, node bound floor).
        """
        labels = self._labels_center(node)
        ex = self.model.explore
        mu_part = self._mu_lower(node)  # exact: single cell, single labels
        if ex is None or self.alpha_coeff == 0.0:
            x = 0.5 * (node.box_lo + node.box_hi)
            return mu_part, x, labels, mu_part
        consts = np.zeros(ex.Xn.shape[0])
        for c in range(len(self.cat)):
            consts += ex.dissim[:, c, labels[c]]
        nlo = (node.box_lo - self.lows) / self.widths
        nhi = (node.box_hi - self.lows) / self.widths
        best, best_x, resid = _max_min_dist_box(ex.kind, ex.Xn, consts, nlo, nhi, ex.cap, tol)
        x = self.lows + best_x * self.widths
        # the maximizer may sit exactly on the cell's left threshold, where the
        # x <= v walk convention assigns the neighboring cell; nudge inside
        for c, i in enumerate(self.cont):
            x[c] = min(max(x[c], node.box_lo[c]), node.box_hi[c])
            if self.model.cell_of(i, x[c]) < node.cell_lo[c]:
                x[c] = np.nextafter(node.box_lo[c], np.inf)
        value = mu_part - self.alpha_coeff * best
        floor = mu_part - self.alpha_coeff * min(best + resid, ex.cap)
        return value, x, labels, floor


def _replace(arr: np.ndarray, i: int, v: float) -> np.ndarray:
    out = arr.copy()
    out[i] = v
    return out


def _dist_at(kind: str, Xn: np.ndarray, consts: np.ndarray, x: np.ndarray, cap: float) -> float:
    diffs = Xn - x[None, :]
    per = np.sum(diffs * diffs, axis=1) if kind == "sqeuclid" else np.sum(np.abs(diffs), axis=1)
    return float(np.clip((per + consts).min(), 0.0, cap))


def _max_min_dist_box(
    kind: str,
    Xn: np.ndarray,
    consts: np.ndarray,
    lo: np.ndarray,
    hi: np.ndarray,
    cap: float,
    tol: float,
):
    """(best value, best x, residual) for max over box of min_d dist + const.

    ``residual`` bounds how far the true maximum may exceed the returned
    value; zero for the exact enumerations.
    """
    m = len(lo)
    n_d = Xn.shape[0]
    if m == 0:
        return float(np.clip(consts.min(), 0.0, cap)), lo, 0.0
    if kind == "sqeuclid":
        count = sum(
            _comb(n_d, (m - k) + 1) * _comb(m, k) * (2**k) for k in range(m + 1)
        )
        if count <= 6000:
            val, x = _max_quad_exact(Xn, consts, lo, hi)
            return min(val, cap), x, 0.0
    elif m == 1:
        val, x = _max_manhattan_1d(Xn, consts, lo, hi)
        return min(val, cap), x, 0.0
    return _max_dist_bisect(kind, Xn, consts, lo, hi, cap, tol)


def _comb(n: int, k: int) -> int:
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _max_quad_exact(Xn, consts, lo, hi):
    """Stationary-candidate enumeration for the squared-distance envelope."""
    import itertools

    m = len(lo)
    sq = np.sum(Xn * Xn, axis=1)
    n_d = Xn.shape[0]

    def g(x):
        d = Xn - x[None, :]
        return float(np.min(np.sum(d * d, axis=1) + consts))

    best_x = 0.5 * (lo + hi)
    best = g(best_x)
    for state in itertools.product((0, 1, 2), repeat=m):
        free = [i for i, s in enumerate(state) if s == 0]
        fixed = {i: (lo[i] if s == 1 else hi[i]) for i, s in enumerate(state) if s != 0}
        mf = len(free)
        if mf == 0:
            x = np.array([fixed[i] for i in range(m)])
            v = g(x)
            if v > best:
                best, best_x = v, x
            continue
        for sites in itertools.combinations(range(n_d), mf + 1):
            a = sites[0]
            A = np.zeros((mf, mf))
            rhs = np.zeros(mf)
            for r, b in enumerate(sites[1:]):
                diff = 2.0 * (Xn[b] - Xn[a])
                A[r] = diff[free]
                rhs[r] = sq[b] - sq[a] + consts[b] - consts[a]
                rhs[r] -= sum(diff[i] * v for i, v in fixed.items())
            try:
                x_free = np.linalg.solve(A, rhs)
            except np.linalg.LinAlgError:
                continue
            x = np.zeros(m)
            x[free] = x_free
            for i, v in fixed.items():
                x[i] = v
            if np.any(x < lo - 1e-9) or np.any(x > hi + 1e-9):
                continue
            x = np.clip(x, lo, hi)
            v = g(x)
            if v > best:
                best, best_x = v, x
    return best, best_x


def _max_manhattan_1d(Xn, consts, lo, hi):
    """Exact 1-D Manhattan envelope maximum.

    The envelope is piecewise linear with breakpoints at the data
    coordinates (distance kinks) and at weighted pair midpoints (ownership
    ties), so evaluating those candidates plus the interval ends is complete.
    """
    pts = Xn[:, 0]
    cands = [lo[0], hi[0]]
    cands.extend(np.clip(pts, lo[0], hi[0]))
    n_d = len(pts)
    for a in range(n_d):
        for b in range(a + 1, n_d):
            # |x - pa| + ca = |x - pb| + cb has its tie inside [pa, pb]
            mid = 0.5 * (pts[a] + pts[b] + consts[b] - consts[a])
            if lo[0] <= mid <= hi[0]:
                cands.append(mid)

    def g(x):
        return float(np.min(np.abs(pts - x) + consts))

    best, best_x = -INF, None
    for x in cands:
        v = g(float(x))
        if v > best:
            best, best_x = v, np.array([float(x)])
    return best, best_x


def _max_dist_bisect(kind, Xn, consts, lo, hi, cap, tol, max_pops: int = 600):
    """Capped interval bisection; sound residual for the unexplored remainder."""

    def g(x):
        return _dist_at(kind, Xn, consts, x, cap)

    def ub(a, b):
        d_lo = a[None, :] - Xn
        d_hi = b[None, :] - Xn
        if kind == "sqeuclid":
            per = np.sum(np.maximum(d_lo * d_lo, d_hi * d_hi), axis=1)
        else:
            per = np.sum(np.maximum(np.abs(d_lo), np.abs(d_hi)), axis=1)
        return float(min(np.min(per + consts), cap))

    best_x = 0.5 * (lo + hi)
    best = g(best_x)
    heap = [(-ub(lo, hi), 0, lo.copy(), hi.copy())]
    ticket = 1
    pops = 0
    resid = 0.0
    while heap:
        neg_ub, _, a, b = heapq.heappop(heap)
        u = -neg_ub
        if u <= best + tol:
            break
        pops += 1
        if pops > max_pops:
            resid = max(u - best, 0.0)
            break
        mid = 0.5 * (a + b)
        v = g(mid)
        if v > best:
            best, best_x = v, mid
        widths = b - a
        dim = int(np.argmax(widths))
        if widths[dim] < 1e-12:
            continue
        for sub in ((a, _replace(b, dim, mid[dim])), (_replace(a, dim, mid[dim]), b)):
            u_c = ub(*sub)
            if u_c > best + tol:
                heapq.heappush(heap, (-u_c, ticket, sub[0], sub[1]))
                ticket += 1
    return best, best_x, max(resid, tol)


def solve(model: MiqpModel, config: SolveConfig | None = None, node_log=None) -> SolveResult:
    """Minimize the model objective to the configured relative gap.

    ``node_log``: optional text stream receiving one line per processed node
    (id, depth, node bound, global bound, incumbent objective).
    """
    config = config or SolveConfig()
    solver = Solver(model, config)
    t_start = time.perf_counter()

    incumbent: Point | None = None
    inc_obj = INF
    closed_floor = INF  # residual bound over exactly-refined or closed nodes
    dropped_floor = INF  # residual bound over nodes dropped by the gap cutoff
    nodes_processed = 0
    heap: list[tuple[tuple, _Node]] = []

    def scale() -> float:
        return max(abs(inc_obj), 1e-10)

    def note_candidates(node: _Node):
        nonlocal incumbent, inc_obj
        # the repair heuristic is comparatively expensive; once an incumbent
        # exists, run it only periodically
        with_repair = incumbent is None or node.uid % 8 == 0
        for x_cont, labels in solver.node_candidates(node, with_repair):
            got = solver.try_candidate(np.asarray(x_cont, dtype=float), np.asarray(labels, dtype=int))
            if got is None:
                continue
            obj, point = got
            if obj < inc_obj - 1e-12:
                inc_obj, incumbent = obj, point

    root = solver.root()
    if solver.propagate(root):
        root.bound = solver.bound(root)
        note_candidates(root)
        heapq.heappush(heap, (root.heap_key(), root))

    status = None
    while heap:
        nodes_processed += 1
        (_, node) = heapq.heappop(heap)
        global_lb = min(node.bound, closed_floor)
        if node_log is not None:
            node_log.write(
                f"node {node.uid} depth {node.depth} bound {node.bound:.12g} "
                f"global {global_lb:.12g} incumbent "
                f"{inc_obj if incumbent is not None else float('inf'):.12g}\n"
            )
        if incumbent is not None and inc_obj - global_lb <= config.rel_gap * scale():
            heapq.heappush(heap, (node.heap_key(), node))
            status = "optimal"
            break
        if incumbent is not None:
            if config.node_limit is not None and nodes_processed > config.node_limit:
                heapq.heappush(heap, (node.heap_key(), node))
                status = "gap_limit"
                break
            if (
                math.isfinite(config.time_limit_secs)
                and nodes_processed % 256 == 0
                and time.perf_counter() - t_start > config.time_limit_secs
            ):
                heapq.heappush(heap, (node.heap_key(), node))
                status = "time_limit_feasible"
                break
            if node.bound >= inc_obj - config.rel_gap * scale():
                dropped_floor = min(dropped_floor, node.bound)
                continue  # cutoff: cannot improve beyond the gap

        children = _branch(solver, node)
        if children is None:
            # fully fixed; final treatment of the node
            if not solver.has_user_rows:
                cells = tuple(int(c) for c in node.cell_lo)
                labs = tuple(int(solver._labels_center(node)[c]) for c in range(len(solver.cat)))
                if (cells, labs) in model.banned:
                    continue
                tol = max(1e-12, 0.01 * config.rel_gap * scale() / max(solver.alpha_coeff, 1e-9))
                tol = min(tol, 1e-9 * (1.0 + (model.explore.cap if model.explore else 1.0)))
                value, x, labels, floor = solver.refine_cell(node, tol)
                got = solver.try_candidate(x, labels)
                if got is not None and got[0] < inc_obj - 1e-12:
                    inc_obj, incumbent = got
                closed_floor = min(closed_floor, floor)
            else:
                note_candidates(node)
                closed_floor = min(closed_floor, node.bound)
            continue
        for child in children:
            if not solver.propagate(child):
                continue
            child.bound = solver.bound(child)
            if incumbent is not None and child.bound >= inc_obj - config.rel_gap * scale():
                dropped_floor = min(dropped_floor, child.bound)
                continue
            note_candidates(child)
            heapq.heappush(heap, (child.heap_key(), child))

    wall = time.perf_counter() - t_start
    if incumbent is None:
        return SolveResult(None, INF, INF, 0.0, "infeasible", nodes_processed, wall)
    open_bound = heap[0][1].bound if heap else INF
    bound_final = min(open_bound, closed_floor, dropped_floor, inc_obj)
    gap = (inc_obj - bound_final) / scale()
    if status is None:
        status = "optimal" if gap <= config.rel_gap + 1e-15 else "gap_limit"
    solution, _ = complete_solution(model, incumbent)
    point = Point(incumbent.values, {n: float(solution[model.aux_var[n]]) for n in model.aux_var})
    return SolveResult(point, inc_obj, bound_final, gap, status, nodes_processed, wall, solution)


def _branch(solver: Solver, node: _Node):
    """Children of a node, or None when the node is fully fixed."""
    # categorical blocks first
    for c in range(len(solver.cat)):
        allowed = np.nonzero((node.masks[c] & solver.label_bits[c]) != 0)[0]
        if len(allowed) > 1:
            half = len(allowed) // 2
            kids = []
            for part in (allowed[:half], allowed[half:]):
                child = solver._child(node)
                bits = np.int64(0)
                for lab in part:
                    bits |= np.int64(1) << np.int64(lab)
                child.masks[c] = np.int64(node.masks[c] & bits)
                kids.append(child)
            return kids
    # then interval-index chains
    ranges = node.cell_hi - node.cell_lo
    if len(ranges) and ranges.max() > 0:
        c = int(np.argmax(ranges))
        i = solver.cont[c]
        mid = int((node.cell_lo[c] + node.cell_hi[c]) // 2)
        ths = solver.model.thresholds[i]
        left = solver._child(node)
        left.cell_hi[c] = mid
        left.box_hi[c] = min(left.box_hi[c], float(ths[mid]))
        right = solver._child(node)
        right.cell_lo[c] = mid + 1
        right.box_lo[c] = max(right.box_lo[c], float(ths[mid]))
        return [left, right]
    # finally spatial bisection (constrained models only; unconstrained cells
    # are finished exactly by refine_cell)
    if solver.has_user_rows and len(solver.cont):
        nwidths = (node.box_hi - node.box_lo) / solver.widths
        c = int(np.argmax(nwidths))
        if nwidths[c] > 1e-9:
            mid = 0.5 * (node.box_lo[c] + node.box_hi[c])
            left = solver._child(node)
            left.box_hi[c] = mid
            right = solver._child(node)
            right.box_lo[c] = mid
            return [left, right]
    return None


def bound_cell(model: MiqpModel, cells: dict[int, tuple[int, int]] | None = None,
               labels: dict[int, tuple[int, ...]] | None = None,
               box: dict[int, tuple[float, float]] | None = None,
               config: SolveConfig | None = None) -> float:
    """Valid objective lower bound over a partial assignment.

    ``cells`` maps continuous feature index to an inclusive interval-index
    range, ``labels`` maps categorical feature index to the allowed label
    subset, ``box`` optionally narrows x inside the selected cells.
    """
    solver = Solver(model, config or SolveConfig())
    node = solver.root()
    for i, (lo, hi) in (cells or {}).items():
        c = solver.cont_pos[i]
        node.cell_lo[c] = max(node.cell_lo[c], lo)
        node.cell_hi[c] = min(node.cell_hi[c], hi)
    for i, labs in (labels or {}).items():
        c = solver.cat_pos[i]
        bits = np.int64(0)
        for lab in labs:
            bits |= np.int64(1) << np.int64(lab)
        node.masks[c] &= bits
    for i, (lo, hi) in (box or {}).items():
        c = solver.cont_pos[i]
        node.box_lo[c] = max(node.box_lo[c], lo)
        node.box_hi[c] = min(node.box_hi[c], hi)
    if not solver.propagate(node):
        return INF
    return solver.bound(node)
