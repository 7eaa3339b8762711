"""Mixed-integer quadratic model for one acquisition solve.

Variables: interval/label indicators (nu), per-tree leaf activations (z,
relaxed to [0,1] continuous), the raw continuous inputs x, per-objective
prediction variables, the scalarization epigraph variable, and the
exploration variables (alpha and its per-data-point continuous/categorical
parts), plus any user auxiliaries.

Indicator semantics: for a continuous feature i with sorted thresholds
v_1 < ... < v_K, nu[i][j] == 1 iff x_i <= v_j, giving the ordering chain
nu[i][j] <= nu[i][j+1]. Cell c in {0..K} denotes the interval
(v_c, v_{c+1}] with v_0, v_{K+1} the feature bounds. For a categorical
feature, nu[i][j] == 1 iff label j is selected and the labels sum to one.

All ensembles share one nu vocabulary: the per-feature threshold lists are
the union over the per-objective ensembles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .core import (
    AuxTerm,
    AuxVar,
    BinaryProduct,
    CatTerm,
    ContTerm,
    DesignSpace,
    Indicator,
    Linear,
    Point,
    Quadratic,
)
from .core.constraints import EQ, GE, LE
from .gbrt import Leaf, SplitNode, TreeEnsemble, tree_split_entries
from .similarity import SimilarityTable

INF = math.inf


@dataclass(frozen=True)
class AcquisitionSpec:
    """Weights, exploration strength, and normalization for one solve."""

    weights: np.ndarray
    kappa: float
    y_lower: np.ndarray
    y_upper: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(self.y_upper < self.y_lower):
            raise ValueError("normalization upper bounds below lower bounds")

    def denominators(self) -> np.ndarray:
        """Normalization spans, floored to guard constant-objective data."""
        return np.maximum(self.y_upper - self.y_lower, 1e-8)


@dataclass
class LinRowM:
    terms: list[tuple[int, float]]
    sense: str
    rhs: float
    name: str = ""
    user: bool = False


@dataclass
class QuadRowM:
    """sum(coeff * var_a * var_b) + sum(linear) <= rhs."""

    quad: list[tuple[int, int, float]]
    terms: list[tuple[int, float]]
    rhs: float
    name: str = ""
    user: bool = False


@dataclass
class IndRowM:
    guard: int
    polarity: bool
    then: LinRowM
    name: str = ""
    user: bool = True


@dataclass
class ProdRowM:
    result: int
    a: int
    b: int
    name: str = ""
    user: bool = True


RowM = LinRowM | QuadRowM | IndRowM | ProdRowM


@dataclass
class EnsembleTables:
    """Flat per-leaf arrays used for reachable-leaf bounding."""

    tree_offsets: np.ndarray  # (T+1,) into the leaf arrays
    values: np.ndarray  # (L,)
    cont_lo: np.ndarray  # (L, n_cont) inclusive cell-index ranges
    cont_hi: np.ndarray
    cat_masks: np.ndarray  # (L, n_cat) int64 label bitmasks
    base: float
    leaf_node_ids: list[list[int]]  # per tree, node id of each leaf row


@dataclass
class ExploreSpec:
    """Distance data for the exploration term and its bounding."""

    kind: str  # "sqeuclid" | "manhattan"
    Xn: np.ndarray  # (D, n_cont) normalized continuous data
    labels: np.ndarray  # (D, n_cat) label indices
    dissim: np.ndarray  # (D, n_cat, K_max) 1 - S coefficients
    coeff: float  # objective coefficient multiplying alpha
    cap: float


class MiqpModel:
    """Complete model: variables, rows, objective, plus solver structure."""

    def __init__(self, space: DesignSpace, thresholds: dict[int, np.ndarray]):
        self.space = space
        self.kind = "acquisition"
        self.thresholds = {
            i: np.asarray(thresholds.get(i, np.zeros(0)), dtype=float)
            for i in space.continuous_indices
        }
        self.var_names: list[str] = []
        self.var_lo: list[float] = []
        self.var_hi: list[float] = []
        self.var_binary: list[bool] = []
        self.rows: list[RowM] = []
        self.objective: list[tuple[int, float]] = []
        self.objective_offset = 0.0

        self.x_var: dict[int, int] = {}
        self.nu_cont: dict[int, np.ndarray] = {}
        self.nu_cat: dict[int, np.ndarray] = {}
        self.aux_var: dict[str, int] = {}
        self.mu_vars: list[int] = []
        self.mu_hat_var: int | None = None
        self.alpha_var: int | None = None
        self.ensembles: list[TreeEnsemble] = []
        self.tables: list[EnsembleTables] = []
        self.z_vars: list[list[np.ndarray]] = []
        self.spec: AcquisitionSpec | None = None
        self.explore: ExploreSpec | None = None
        self.banned: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
        self.aux_completer: Callable[[Point], dict[str, float]] | None = None
        self.maxmin_k: list | None = None

        for i in space.continuous_indices:
            f = space.features[i]
            self.x_var[i] = self.add_var(f"x[{f.name}]", f.lower, f.upper)
        for i in space.continuous_indices:
            ths = self.thresholds[i]
            ids = np.array(
                [self.add_var(f"nu[{space.features[i].name},{j}]", 0, 1, binary=True)
                 for j in range(len(ths))],
                dtype=int,
            )
            self.nu_cont[i] = ids
            for j in range(len(ths) - 1):  # ordering chain
                self.rows.append(
                    LinRowM([(ids[j], 1.0), (ids[j + 1], -1.0)], LE, 0.0, f"order[{i},{j}]")
                )
        for i in space.categorical_indices:
            f = space.features[i]
            if f.n_labels > 63:
                raise ValueError(f"feature {f.name}: more than 63 labels unsupported")
            ids = np.array(
                [self.add_var(f"nu[{f.name}={lab}]", 0, 1, binary=True) for lab in f.labels],
                dtype=int,
            )
            self.nu_cat[i] = ids
            self.rows.append(
                LinRowM([(v, 1.0) for v in ids], EQ, 1.0, f"onehot[{f.name}]")
            )
        for decl in space.aux_vars:
            lo, hi = decl.bounds
            self.aux_var[decl.name] = self.add_var(
                f"aux[{decl.name}]", lo, hi, binary=decl.kind == "binary"
            )

    # -- variable / row helpers -------------------------------------------------

    def add_var(self, name: str, lo: float, hi: float, binary: bool = False) -> int:
        self.var_names.append(name)
        self.var_lo.append(float(lo))
        self.var_hi.append(float(hi))
        self.var_binary.append(binary)
        return len(self.var_names) - 1

    @property
    def n_vars(self) -> int:
        return len(self.var_names)

    def bounds_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        return np.array(self.var_lo), np.array(self.var_hi)

    def _map_term(self, t) -> tuple[int, float]:
        if isinstance(t, ContTerm):
            return self.x_var[t.feature], t.coeff
        if isinstance(t, CatTerm):
            return int(self.nu_cat[t.feature][t.label]), t.coeff
        if isinstance(t, AuxTerm):
            return self.aux_var[t.name], t.coeff
        raise TypeError(f"unknown term {t}")

    def _map_ref(self, t) -> int:
        if isinstance(t, ContTerm):
            return self.x_var[t.feature]
        if isinstance(t, AuxTerm):
            return self.aux_var[t.name]
        raise TypeError("quadratic terms must reference continuous features or aux vars")

    def add_user_constraints(self) -> None:
        for c in self.space.constraints:
            if isinstance(c, AuxVar):
                continue
            if isinstance(c, Linear):
                self.rows.append(
                    LinRowM([self._map_term(t) for t in c.terms], c.sense, c.rhs, c.name, user=True)
                )
            elif isinstance(c, Quadratic):
                self.rows.append(
                    QuadRowM(
                        [(self._map_ref(a), self._map_ref(b), q) for a, b, q in c.quad],
                        [self._map_term(t) for t in c.terms],
                        c.rhs,
                        c.name,
                        user=True,
                    )
                )
            elif isinstance(c, Indicator):
                then = LinRowM(
                    [self._map_term(t) for t in c.then.terms], c.then.sense, c.then.rhs, c.name
                )
                self.rows.append(IndRowM(self.aux_var[c.guard], c.polarity, then, c.name))
            elif isinstance(c, BinaryProduct):
                self.rows.append(
                    ProdRowM(self.aux_var[c.result], self.aux_var[c.a], self.aux_var[c.b], c.name)
                )

    # -- structure helpers -------------------------------------------------------

    def n_cells(self, i: int) -> int:
        return len(self.thresholds[i]) + 1

    def cell_interval(self, i: int, c: int) -> tuple[float, float]:
        """Closed hull of cell c for continuous feature i."""
        f = self.space.features[i]
        ths = self.thresholds[i]
        lo = f.lower if c == 0 else float(ths[c - 1])
        hi = f.upper if c == len(ths) else float(ths[c])
        return lo, hi

    def cell_of(self, i: int, x: float) -> int:
        """Cell index c such that x in (v_c, v_{c+1}] (x <= v convention)."""
        return int(np.searchsorted(self.thresholds[i], x, side="left"))

    def cells_of_point(self, point: Point) -> tuple[int, ...]:
        return tuple(self.cell_of(i, point.values[i]) for i in self.space.continuous_indices)

    def labels_of_point(self, point: Point) -> tuple[int, ...]:
        return tuple(int(point.values[i]) for i in self.space.categorical_indices)

    # -- dumping -------------------------------------------------------------

    def dump_text(self) -> str:
        lines = [f"# miqp model: {self.n_vars} vars, {len(self.rows)} rows"]
        for k, name in enumerate(self.var_names):
            kind = "bin" if self.var_binary[k] else "cont"
            lines.append(f"var {k} {name} {kind} [{self.var_lo[k]}, {self.var_hi[k]}]")

        def lin_str(terms):
            return " + ".join(f"{c:+g}*{self.var_names[v]}" for v, c in terms) or "0"

        for r in self.rows:
            if isinstance(r, LinRowM):
                lines.append(f"row {r.name}: {lin_str(r.terms)} {r.sense} {r.rhs:g}")
            elif isinstance(r, QuadRowM):
                q = " + ".join(
                    f"{c:+g}*{self.var_names[a]}*{self.var_names[b]}" for a, b, c in r.quad
                )
                lines.append(f"row {r.name}: {q} + {lin_str(r.terms)} <= {r.rhs:g}")
            elif isinstance(r, IndRowM):
                g = self.var_names[r.guard]
                pol = "" if r.polarity else "!"
                lines.append(
                    f"row {r.name}: {pol}{g} -> {lin_str(r.then.terms)} {r.then.sense} {r.then.rhs:g}"
                )
            else:
                lines.append(
                    f"row {r.name}: {self.var_names[r.result]} = "
                    f"{self.var_names[r.a]} * {self.var_names[r.b]}"
                )
        lines.append("objective: minimize " + lin_str(self.objective) + f" {self.objective_offset:+g}")
        return "\n".join(lines)


# -- encoding operations ----------------------------------------------------


def union_thresholds(space: DesignSpace, ensembles: Sequence[TreeEnsemble]) -> dict[int, np.ndarray]:
    out = {}
    for i in space.continuous_indices:
        vals: set[float] = set()
        for e in ensembles:
            vals.update(float(v) for v in e.thresholds.get(i, ()))
        out[i] = np.array(sorted(vals))
    return out


def encode_tree_ensemble(model: MiqpModel, ensemble: TreeEnsemble, tag: str) -> int:
    """Add one ensemble's leaf variables and rows; returns the prediction var."""
    e_index = len(model.ensembles)
    model.ensembles.append(ensemble)
    z_per_tree: list[np.ndarray] = []
    mu = model.add_var(f"mu[{tag}]", -INF, INF)
    mu_terms: list[tuple[int, float]] = [(mu, 1.0)]
    for t_id, tree in enumerate(ensemble.trees):
        leaf_ids = tree.leaves()
        zvars = np.array(
            [model.add_var(f"z[{tag},{t_id},{l}]", 0.0, 1.0) for l in leaf_ids], dtype=int
        )
        z_per_tree.append(zvars)
        pos = {l: k for k, l in enumerate(leaf_ids)}
        model.rows.append(
            LinRowM([(int(v), 1.0) for v in zvars], EQ, 1.0, f"leafsum[{tag},{t_id}]")
        )
        for l, k in pos.items():
            mu_terms.append((int(zvars[k]), -tree.nodes[l].value))
        for s_id, feature, detail, left_leaves, right_leaves in tree_split_entries(tree):
            if isinstance(detail, float):
                ths = model.thresholds[feature]
                j = int(np.searchsorted(ths, detail))
                if j >= len(ths) or ths[j] != detail:
                    raise ValueError(
                        f"split threshold {detail} of feature {feature} missing from model"
                    )
                nus = [(int(model.nu_cont[feature][j]), 1.0)]
            else:
                nus = [(int(model.nu_cat[feature][j]), 1.0) for j in sorted(detail)]
            left_terms = [(int(zvars[pos[l]]), 1.0) for l in left_leaves]
            model.rows.append(
                LinRowM(
                    left_terms + [(v, -c) for v, c in nus],
                    LE,
                    0.0,
                    f"split_l[{tag},{t_id},{s_id}]",
                )
            )
            right_terms = [(int(zvars[pos[l]]), 1.0) for l in right_leaves]
            model.rows.append(
                LinRowM(right_terms + nus, LE, 1.0, f"split_r[{tag},{t_id},{s_id}]")
            )
    model.rows.append(LinRowM(mu_terms, EQ, ensemble.base_score, f"pred[{tag}]"))
    model.z_vars.append(z_per_tree)
    model.mu_vars.append(mu)
    model.tables.append(build_leaf_tables(model, ensemble))
    assert len(model.tables) == e_index + 1
    return mu


def build_leaf_tables(model: MiqpModel, ensemble: TreeEnsemble) -> EnsembleTables:
    space = model.space
    cont = space.continuous_indices
    cat = space.categorical_indices
    cont_pos = {i: c for c, i in enumerate(cont)}
    cat_pos = {i: c for c, i in enumerate(cat)}
    full_masks = np.array(
        [(1 << space.features[i].n_labels) - 1 for i in cat], dtype=np.int64
    )
    offsets = [0]
    values: list[float] = []
    lo_rows: list[np.ndarray] = []
    hi_rows: list[np.ndarray] = []
    mask_rows: list[np.ndarray] = []
    leaf_node_ids: list[list[int]] = []

    for tree in ensemble.trees:
        ids_this_tree: list[int] = []

        def walk(node_id, lo, hi, masks):
            node = tree.nodes[node_id]
            if isinstance(node, Leaf):
                values.append(node.value)
                lo_rows.append(lo.copy())
                hi_rows.append(hi.copy())
                mask_rows.append(masks.copy())
                ids_this_tree.append(node_id)
                return
            assert isinstance(node, SplitNode)
            if node.threshold is not None:
                c = cont_pos[node.feature]
                j = int(np.searchsorted(model.thresholds[node.feature], node.threshold))
                l_hi = hi.copy()
                l_hi[c] = min(l_hi[c], j)  # cells 0..j map to x <= v_j side
                walk(node.left, lo, l_hi, masks)
                r_lo = lo.copy()
                r_lo[c] = max(r_lo[c], j + 1)
                walk(node.right, r_lo, hi, masks)
            else:
                c = cat_pos[node.feature]
                bits = np.int64(0)
                for lab in node.left_labels:
                    bits |= np.int64(1) << np.int64(lab)
                l_masks = masks.copy()
                l_masks[c] &= bits
                walk(node.left, lo, hi, l_masks)
                r_masks = masks.copy()
                r_masks[c] &= ~bits
                walk(node.right, lo, hi, r_masks)

        lo0 = np.zeros(len(cont), dtype=np.int32)
        hi0 = np.array([model.n_cells(i) - 1 for i in cont], dtype=np.int32)
        walk(0, lo0, hi0, full_masks.copy())
        offsets.append(len(values))
        leaf_node_ids.append(ids_this_tree)

    n_leaves = len(values)
    return EnsembleTables(
        tree_offsets=np.array(offsets, dtype=int),
        values=np.array(values),
        cont_lo=np.vstack(lo_rows) if n_leaves else np.zeros((0, len(cont)), dtype=np.int32),
        cont_hi=np.vstack(hi_rows) if n_leaves else np.zeros((0, len(cont)), dtype=np.int32),
        cat_masks=np.vstack(mask_rows) if n_leaves else np.zeros((0, len(cat)), dtype=np.int64),
        base=ensemble.base_score,
        leaf_node_ids=leaf_node_ids,
    )


def encode_linking(model: MiqpModel) -> None:
    """Tie x_i to the interval selected by its indicator chain."""
    for i in model.space.continuous_indices:
        f = model.space.features[i]
        ths = model.thresholds[i]
        if len(ths) == 0:
            continue
        xv = model.x_var[i]
        nus = model.nu_cont[i]
        prev = np.concatenate(([f.lower], ths[:-1]))
        gaps_lo = ths - prev  # v_j - v_{j-1}
        nxt = np.concatenate((ths[1:], [f.upper]))
        gaps_hi = nxt - ths  # v_{j+1} - v_j
        model.rows.append(
            LinRowM(
                [(xv, 1.0)] + [(int(nus[j]), float(gaps_lo[j])) for j in range(len(ths))],
                GE,
                f.lower + float(gaps_lo.sum()),
                f"link_lo[{f.name}]",
            )
        )
        model.rows.append(
            LinRowM(
                [(xv, 1.0)] + [(int(nus[j]), float(gaps_hi[j])) for j in range(len(ths))],
                LE,
                f.upper,
                f"link_hi[{f.name}]",
            )
        )


def normalized_data(space: DesignSpace, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    cont = space.continuous_indices
    cat = space.categorical_indices
    if X.shape[0] == 0:
        return np.zeros((0, len(cont))), np.zeros((0, len(cat)), dtype=int)
    lows = np.array([space.features[i].lower for i in cont])
    widths = np.array([space.features[i].width for i in cont])
    Xn = (X[:, list(cont)] - lows) / widths if cont else np.zeros((len(X), 0))
    labels = X[:, list(cat)].astype(int) if cat else np.zeros((len(X), 0), dtype=int)
    return Xn, labels


def encode_exploration(
    model: MiqpModel,
    X: np.ndarray,
    table: SimilarityTable | None,
    coeff: float,
) -> None:
    """Add the distance-based exploration rows for every data point."""
    space = model.space
    cont = space.continuous_indices
    cat = space.categorical_indices
    if X.shape[0] == 0:
        raise ValueError("exploration needs a non-empty dataset")
    for i in cont:
        if space.features[i].width <= 0:
            raise ValueError("zero-width continuous bounds")
    Xn, labels = normalized_data(space, X)
    if table is not None and cat:
        dissim = table.dissimilarity_coeffs(labels)
    else:
        k_max = max((space.features[i].n_labels for i in cat), default=0)
        dissim = np.zeros((len(X), len(cat), max(k_max, 1)))
    cap = float(len(cont) + len(cat))
    alpha = model.add_var("alpha", 0.0, cap)
    n_d = X.shape[0]
    for d in range(n_d):
        combine: list[tuple[int, float]] = [(alpha, 1.0)]
        if cont:
            a_n = model.add_var(f"alpha_n[{d}]", 0.0, float(len(cont)))
            quad = []
            lin = [(a_n, 1.0)]
            rhs = 0.0
            for c, i in enumerate(cont):
                f = space.features[i]
                w = f.width
                gamma = Xn[d, c] + f.lower / w
                quad.append((model.x_var[i], model.x_var[i], -1.0 / (w * w)))
                lin.append((model.x_var[i], 2.0 * gamma / w))
                rhs += gamma * gamma
            model.rows.append(QuadRowM(quad, lin, rhs, f"explore_n[{d}]"))
            combine.append((a_n, -1.0))
        if cat:
            a_c = model.add_var(f"alpha_c[{d}]", 0.0, float(len(cat)))
            terms: list[tuple[int, float]] = [(a_c, 1.0)]
            for c, i in enumerate(cat):
                for j in range(space.features[i].n_labels):
                    coef = dissim[d, c, j]
                    if coef != 0.0:
                        terms.append((int(model.nu_cat[i][j]), -float(coef)))
            model.rows.append(LinRowM(terms, LE, 0.0, f"explore_c[{d}]"))
            combine.append((a_c, -1.0))
        model.rows.append(LinRowM(combine, LE, 0.0, f"explore[{d}]"))
    model.alpha_var = alpha
    model.explore = ExploreSpec("sqeuclid", Xn, labels, dissim, coeff, cap)


def encode_chebyshev(model: MiqpModel, spec: AcquisitionSpec, mu_vars: list[int]) -> None:
    """Epigraph rows and the final objective min mu_hat - coeff * alpha."""
    w = np.asarray(spec.weights, dtype=float)
    if len(mu_vars) != len(w):
        raise ValueError("one weight per objective required")
    den = spec.denominators()
    mu_hat = model.add_var("mu_hat", -INF, INF)
    for i, mv in enumerate(mu_vars):
        scale = w[i] / den[i]
        model.rows.append(
            LinRowM(
                [(mu_hat, 1.0), (mv, -scale)],
                GE,
                -scale * float(spec.y_lower[i]),
                f"cheby[{i}]",
            )
        )
    model.mu_hat_var = mu_hat
    model.spec = spec
    model.objective = [(mu_hat, 1.0)]
    if model.alpha_var is not None and model.explore is not None and model.explore.coeff != 0.0:
        model.objective.append((model.alpha_var, -model.explore.coeff))


def build_acquisition_model(
    space: DesignSpace,
    ensembles: Sequence[TreeEnsemble],
    spec: AcquisitionSpec,
    X: np.ndarray,
    similarity: SimilarityTable | None = None,
    aux_completer: Callable[[Point], dict[str, float]] | None = None,
) -> MiqpModel:
    """Assemble the full model: trees, linking, exploration, epigraph, user rows."""
    thresholds = union_thresholds(space, ensembles)
    model = MiqpModel(space, thresholds)
    model.aux_completer = aux_completer
    mu_vars = [encode_tree_ensemble(model, e, f"f{i}") for i, e in enumerate(ensembles)]
    encode_linking(model)
    coeff = spec.kappa / space.n
    encode_exploration(model, X, similarity, coeff)
    encode_chebyshev(model, spec, mu_vars)
    model.add_user_constraints()
    return model


def build_maxmin_model(
    space: DesignSpace,
    X: np.ndarray,
    pins: "PinSpec | None" = None,
    aux_completer: Callable[[Point], dict[str, float]] | None = None,
) -> MiqpModel:
    """Max-min Manhattan distance model for space-filling sampling.

    Maximizes the normalized Manhattan distance (plus overlap dissimilarity
    over categorical features) to the closest existing sample, subject to the
    space's constraints and any pinned assignments. Positive/negative parts
    of each coordinate difference are split into complementary nonnegative
    auxiliaries; complementarity is enforced through indicator binaries.
    """
    if X.shape[0] == 0:
        raise ValueError("max-min sampling needs at least one existing sample")
    model = MiqpModel(space, {})
    model.kind = "maxmin"
    model.aux_completer = aux_completer
    cont = space.continuous_indices
    cat = space.categorical_indices
    Xn, labels = normalized_data(space, X)
    table = SimilarityTable(space, X, "overlap") if cat and X.shape[0] >= 1 else None
    dissim = (
        table.dissimilarity_coeffs(labels) if table is not None
        else np.zeros((len(X), len(cat), 0))
    )
    cap = float(len(cont) + len(cat))
    alpha = model.add_var("alpha_samp", 0.0, cap)
    model.alpha_var = alpha
    maxmin_k = []
    for d in range(X.shape[0]):
        row_terms: list[tuple[int, float]] = [(alpha, 1.0)]
        k_list = []
        for c, i in enumerate(cont):
            f = space.features[i]
            kp = model.add_var(f"k_pos[{d},{c}]", 0.0, 1.0)
            kn = model.add_var(f"k_neg[{d},{c}]", 0.0, 1.0)
            s = model.add_var(f"k_sign[{d},{c}]", 0.0, 1.0, binary=True)
            # k_pos - k_neg = X_norm - x_norm
            model.rows.append(
                LinRowM(
                    [(kp, 1.0), (kn, -1.0), (model.x_var[i], 1.0 / f.width)],
                    EQ,
                    float(Xn[d, c]) + f.lower / f.width,
                    f"manh[{d},{c}]",
                )
            )
            model.rows.append(LinRowM([(kp, 1.0), (s, -1.0)], LE, 0.0, f"sos_p[{d},{c}]"))
            model.rows.append(LinRowM([(kn, 1.0), (s, 1.0)], LE, 1.0, f"sos_n[{d},{c}]"))
            row_terms += [(kp, -1.0), (kn, -1.0)]
            k_list.append((kp, kn, s, i))
        for c, i in enumerate(cat):
            for j in range(space.features[i].n_labels):
                coef = dissim[d, c, j]
                if coef != 0.0:
                    row_terms.append((int(model.nu_cat[i][j]), -float(coef)))
        model.rows.append(LinRowM(row_terms, LE, 0.0, f"maxmin[{d}]"))
        maxmin_k.append(k_list)
    model.maxmin_k = maxmin_k
    model.explore = ExploreSpec("manhattan", Xn, labels, dissim, 1.0, cap)
    model.objective = [(alpha, -1.0)]
    model.add_user_constraints()
    if pins is not None:
        apply_pins(model, pins)
    return model


@dataclass(frozen=True)
class PinSpec:
    """Per-point pinned assignments for the space-filling sampler."""

    features: dict[int, float] = field(default_factory=dict)
    rows: tuple = ()


def apply_pins(model: MiqpModel, pins: PinSpec) -> None:
    for i, v in pins.features.items():
        f = model.space.features[i]
        if f.is_continuous:
            model.rows.append(LinRowM([(model.x_var[i], 1.0)], EQ, float(v), f"pin[{f.name}]", user=True))
        else:
            model.rows.append(
                LinRowM([(int(model.nu_cat[i][int(v)]), 1.0)], EQ, 1.0, f"pin[{f.name}]", user=True)
            )
    for c in pins.rows:
        if isinstance(c, Linear):
            model.rows.append(
                LinRowM([model._map_term(t) for t in c.terms], c.sense, c.rhs, c.name or "pin_row", user=True)
            )
        else:
            raise TypeError("pin rows must be linear")


# -- solution completion and decoding ----------------------------------------


def active_leaf(model: MiqpModel, e_index: int, t_index: int, point_vec: np.ndarray) -> int:
    tree = model.ensembles[e_index].trees[t_index]
    i = 0
    while not isinstance(tree.nodes[i], Leaf):
        n = tree.nodes[i]
        if n.threshold is not None:
            i = n.left if point_vec[n.feature] <= n.threshold else n.right
        else:
            i = n.left if int(point_vec[n.feature]) in n.left_labels else n.right
    return i


def alpha_at(model: MiqpModel, x_cont: np.ndarray, labels: np.ndarray) -> float:
    """Exact exploration value (min over data) at a candidate assignment."""
    ex = model.explore
    if ex is None:
        return 0.0
    space = model.space
    cont = space.continuous_indices
    if len(cont):
        lows = np.array([space.features[i].lower for i in cont])
        widths = np.array([space.features[i].width for i in cont])
        xn = (x_cont - lows) / widths
        diffs = ex.Xn - xn[None, :]
        cont_part = (
            np.sum(diffs * diffs, axis=1)
            if ex.kind == "sqeuclid"
            else np.sum(np.abs(diffs), axis=1)
        )
    else:
        cont_part = np.zeros(ex.Xn.shape[0])
    cat_part = np.zeros(ex.Xn.shape[0])
    for c in range(ex.labels.shape[1]):
        cat_part += ex.dissim[:, c, labels[c]]
    return float(np.clip(np.min(cont_part + cat_part), 0.0, ex.cap))


def predictions_at(model: MiqpModel, point_vec: np.ndarray) -> np.ndarray:
    return np.array([e.predict_encoded(point_vec) for e in model.ensembles])


def acquisition_value(model: MiqpModel, point_vec: np.ndarray) -> float:
    """True acquisition at a point: scalarized prediction minus exploration."""
    space = model.space
    x_cont = np.array([point_vec[i] for i in space.continuous_indices])
    labels = np.array([int(point_vec[i]) for i in space.categorical_indices], dtype=int)
    a = alpha_at(model, x_cont, labels)
    if model.kind == "maxmin":
        return -a
    spec = model.spec
    mus = predictions_at(model, point_vec)
    den = spec.denominators()
    scal = np.max(spec.weights * (mus - spec.y_lower) / den)
    coeff = model.explore.coeff if model.explore is not None else 0.0
    return float(scal - coeff * a)


def complete_solution(model: MiqpModel, point: Point) -> tuple[np.ndarray, float]:
    """Full variable assignment and objective value induced by a point.

    Indicator, leaf, prediction, epigraph, and exploration variables are all
    determined by the point; user auxiliaries come from the model's
    completion hook (or the point's own aux values).
    """
    space = model.space
    vec = point.as_vector()
    sol = np.zeros(model.n_vars)
    for i in space.continuous_indices:
        sol[model.x_var[i]] = vec[i]
    for i in space.continuous_indices:
        c = model.cell_of(i, vec[i])
        ids = model.nu_cont[i]
        for j in range(len(ids)):
            sol[ids[j]] = 1.0 if j >= c else 0.0
    for i in space.categorical_indices:
        ids = model.nu_cat[i]
        sol[ids] = 0.0
        sol[ids[int(vec[i])]] = 1.0

    for e_index, ensemble in enumerate(model.ensembles):
        mu = ensemble.base_score
        for t_index, tree in enumerate(ensemble.trees):
            leaf = active_leaf(model, e_index, t_index, vec)
            pos = {l: k for k, l in enumerate(tree.leaves())}
            zv = model.z_vars[e_index][t_index]
            sol[zv] = 0.0
            sol[zv[pos[leaf]]] = 1.0
            mu += tree.nodes[leaf].value
        sol[model.mu_vars[e_index]] = mu

    x_cont = np.array([vec[i] for i in space.continuous_indices])
    labels = np.array([int(vec[i]) for i in space.categorical_indices], dtype=int)
    ex = model.explore
    if ex is not None and model.alpha_var is not None:
        if model.kind == "acquisition":
            cont_idx = space.continuous_indices
            per_d_n = np.zeros(ex.Xn.shape[0])
            if len(cont_idx):
                lows = np.array([space.features[i].lower for i in cont_idx])
                widths = np.array([space.features[i].width for i in cont_idx])
                xn = (x_cont - lows) / widths
                diffs = ex.Xn - xn[None, :]
                per_d_n = np.sum(diffs * diffs, axis=1)
            per_d_c = np.zeros(ex.Xn.shape[0])
            for c in range(ex.labels.shape[1]):
                per_d_c += ex.dissim[:, c, labels[c]]
            for d in range(ex.Xn.shape[0]):
                an = model_var_index(model, f"alpha_n[{d}]")
                if an is not None:
                    sol[an] = min(per_d_n[d], float(len(cont_idx)))
                ac = model_var_index(model, f"alpha_c[{d}]")
                if ac is not None:
                    sol[ac] = min(per_d_c[d], float(len(labels)))
            sol[model.alpha_var] = alpha_at(model, x_cont, labels)
        else:
            cont_idx = space.continuous_indices
            lows = np.array([space.features[i].lower for i in cont_idx])
            widths = np.array([space.features[i].width for i in cont_idx])
            xn = (x_cont - lows) / widths if len(cont_idx) else np.zeros(0)
            for d, k_list in enumerate(model.maxmin_k or []):
                for c, (kp, kn, s, i) in enumerate(k_list):
                    diff = ex.Xn[d, c] - xn[c]
                    sol[kp] = max(diff, 0.0)
                    sol[kn] = max(-diff, 0.0)
                    sol[s] = 1.0 if diff > 0 else 0.0
            sol[model.alpha_var] = alpha_at(model, x_cont, labels)

    if model.spec is not None and model.mu_hat_var is not None:
        den = model.spec.denominators()
        mus = np.array([sol[m] for m in model.mu_vars])
        sol[model.mu_hat_var] = float(
            np.max(model.spec.weights * (mus - model.spec.y_lower) / den)
        )

    aux_values = dict(point.aux)
    if model.aux_completer is not None:
        aux_values.update(model.aux_completer(point))
    for name, idx in model.aux_var.items():
        if name in aux_values:
            sol[idx] = aux_values[name]
    objective = model.objective_offset + sum(c * sol[v] for v, c in model.objective)
    return sol, float(objective)


def dump_fixture(
    space: DesignSpace,
    ensembles: Sequence[TreeEnsemble],
    spec: AcquisitionSpec,
    X: np.ndarray,
    similarity_measure: str = "goodall4",
) -> dict:
    """Serializable description of one unconstrained acquisition solve."""
    return {
        "schema": "treemoo.fixture/1",
        "ensembles": [e.to_dict() for e in ensembles],
        "weights": [float(w) for w in spec.weights],
        "kappa": spec.kappa,
        "y_lower": [float(v) for v in spec.y_lower],
        "y_upper": [float(v) for v in spec.y_upper],
        "data": np.asarray(X, dtype=float).tolist(),
        "similarity": similarity_measure,
    }


def load_fixture(doc: dict) -> MiqpModel:
    """Rebuild the full model from a fixture dump."""
    from .gbrt import TreeEnsemble as _TE
    from .similarity import SimilarityTable

    if doc.get("schema") != "treemoo.fixture/1":
        raise ValueError(f"unsupported fixture schema {doc.get('schema')!r}")
    ensembles = [_TE.from_dict(d) for d in doc["ensembles"]]
    space = ensembles[0].space
    spec = AcquisitionSpec(
        np.array(doc["weights"]),
        float(doc["kappa"]),
        np.array(doc["y_lower"]),
        np.array(doc["y_upper"]),
    )
    X = np.array(doc["data"], dtype=float)
    table = None
    if space.categorical_indices and X.shape[0] >= 2:
        table = SimilarityTable(space, X, doc.get("similarity", "goodall4"))
    return build_acquisition_model(space, ensembles, spec, X, table)


def model_var_index(model: MiqpModel, name: str) -> int | None:
    cache = getattr(model, "_name_index", None)
    if cache is None or len(cache) != model.n_vars:
        cache = {n: k for k, n in enumerate(model.var_names)}
        model._name_index = cache
    return cache.get(name)


def decode(model: MiqpModel, solution: np.ndarray) -> Point:
    """Read the proposal out of a solved model.

    Continuous features are read directly; each categorical feature takes
    the label whose indicator is active (largest value). A categorical
    feature with no indicator above one half is an infeasible solution.
    """
    space = model.space
    values: list[float] = []
    for i, f in enumerate(space.features):
        if f.is_continuous:
            values.append(float(solution[model.x_var[i]]))
        else:
            nus = solution[model.nu_cat[i]]
            j = int(np.argmax(nus))
            if nus[j] < 0.5:
                raise ValueError(f"no active label indicator for feature {f.name}")
            values.append(float(j))
    aux = {name: float(solution[idx]) for name, idx in model.aux_var.items()}
    return Point(tuple(values), aux)


def check_solution(model: MiqpModel, solution: np.ndarray, feas_tol: float = 1e-6):
    """Rows violated by a full assignment beyond the scaled tolerance."""
    bad = []

    def scale(coeffs):
        return max(1.0, math.sqrt(sum(c * c for c in coeffs)))

    for r in model.rows:
        if isinstance(r, LinRowM):
            lhs = sum(c * solution[v] for v, c in r.terms)
            tol = feas_tol * scale([c for _, c in r.terms])
            if r.sense == LE and lhs > r.rhs + tol:
                bad.append((r.name, lhs - r.rhs))
            elif r.sense == GE and lhs < r.rhs - tol:
                bad.append((r.name, r.rhs - lhs))
            elif r.sense == EQ and abs(lhs - r.rhs) > tol:
                bad.append((r.name, abs(lhs - r.rhs)))
        elif isinstance(r, QuadRowM):
            lhs = sum(q * solution[a] * solution[b] for a, b, q in r.quad)
            lhs += sum(c * solution[v] for v, c in r.terms)
            tol = feas_tol * scale([q for *_, q in r.quad] + [c for _, c in r.terms])
            if lhs > r.rhs + tol:
                bad.append((r.name, lhs - r.rhs))
        elif isinstance(r, IndRowM):
            g = solution[r.guard]
            if (g > 0.5) == r.polarity:
                lhs = sum(c * solution[v] for v, c in r.then.terms)
                tol = feas_tol * scale([c for _, c in r.then.terms])
                if r.then.sense == LE and lhs > r.then.rhs + tol:
                    bad.append((r.name, lhs - r.then.rhs))
                elif r.then.sense == GE and lhs < r.then.rhs - tol:
                    bad.append((r.name, r.then.rhs - lhs))
                elif r.then.sense == EQ and abs(lhs - r.then.rhs) > tol:
                    bad.append((r.name, abs(lhs - r.then.rhs)))
        elif isinstance(r, ProdRowM):
            if abs(solution[r.result] - solution[r.a] * solution[r.b]) > feas_tol:
                bad.append((r.name, abs(solution[r.result] - solution[r.a] * solution[r.b])))
    return bad
