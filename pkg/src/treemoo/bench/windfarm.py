"""Offshore windfarm layout model: wake interference, objectives, constraints.

Up to 16 identical turbines are placed on a square field; wake losses follow
the classic linear-expansion deficit model with a two-circle lens overlap for
partial wake coverage. The two objectives are normalized energy production
and efficiency, both maximized by the benchmark and negated at the optimizer
boundary.

The shipped wind rose and power/thrust curves are NOT taken from any
published dataset: the defaults are a generic 8-direction uniform-weight
rose with Weibull-binned speeds and a generic 8 MW turbine curve (cut-in
4 m/s, rated 12.5 m/s, cut-out 25 m/s). Both are loadable from plain
tabular text files so real data can be substituted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..core import (
    AuxTerm,
    AuxVar,
    BinaryProduct,
    CatTerm,
    CategoricalFeature,
    ContTerm,
    ContinuousFeature,
    DesignSpace,
    Indicator,
    Linear,
    Point,
    Quadratic,
)

FIELD_SIDE = 3900.0
MAX_TURBINES = 16
ROTOR_RADIUS = 82.0
HUB_HEIGHT = 107.0
ROUGHNESS = 5e-4
MIN_DISTANCE = 975.0


@dataclass(frozen=True)
class Curve:
    """Piecewise-linear table; values outside the speed range are zero."""

    speeds: np.ndarray
    values: np.ndarray

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        out = np.interp(u, self.speeds, self.values, left=0.0, right=0.0)
        return out if out.ndim else float(out)


@dataclass(frozen=True)
class WindfarmModel:
    rose: np.ndarray  # rows (speed, direction_deg, frequency)
    power: Curve
    thrust: Curve
    rotor_radius: float = ROTOR_RADIUS
    hub_height: float = HUB_HEIGHT
    roughness: float = ROUGHNESS
    side: float = FIELD_SIDE
    max_turbines: int = MAX_TURBINES

    def __post_init__(self):
        freq = self.rose[:, 2]
        if np.any(freq < 0) or abs(freq.sum() - 1.0) > 1e-9:
            raise ValueError("rose frequencies must be nonnegative and sum to 1")

    @property
    def wake_expansion(self) -> float:
        return 0.5 / math.log(self.hub_height / self.roughness)


def default_rose() -> np.ndarray:
    """8 uniform directions x 3 Weibull-binned speeds (k=2, scale 9 m/s)."""
    directions = np.arange(0.0, 360.0, 45.0)
    speeds = np.array([6.0, 9.0, 12.0])
    k, lam = 2.0, 9.0
    pdf = (k / lam) * (speeds / lam) ** (k - 1.0) * np.exp(-((speeds / lam) ** k))
    sw = pdf / pdf.sum()
    rows = [
        (u, d, w / len(directions))
        for d in directions
        for u, w in zip(speeds, sw)
    ]
    return np.array(rows)


def default_power_curve() -> Curve:
    return Curve(np.array([0.0, 4.0, 12.5, 25.0]), np.array([0.0, 0.0, 8000.0, 8000.0]))


def default_thrust_curve() -> Curve:
    return Curve(np.array([0.0, 4.0, 12.5, 25.0]), np.array([0.8, 0.8, 0.65, 0.1]))


def default_model() -> WindfarmModel:
    return WindfarmModel(default_rose(), default_power_curve(), default_thrust_curve())


def load_rose(path: str | Path) -> np.ndarray:
    """Rose file: whitespace-separated rows ``speed direction frequency``."""
    rows = np.loadtxt(path, comments="#", ndmin=2)
    if rows.shape[1] != 3:
        raise ValueError("rose file needs 3 columns: speed direction frequency")
    return rows


def load_curves(path: str | Path) -> tuple[Curve, Curve]:
    """Curve file: whitespace-separated rows ``speed power thrust``."""
    rows = np.loadtxt(path, comments="#", ndmin=2)
    if rows.shape[1] != 3:
        raise ValueError("curve file needs 3 columns: speed power thrust")
    return Curve(rows[:, 0], rows[:, 1]), Curve(rows[:, 0], rows[:, 2])


def write_default_files(rose_path: str | Path, curve_path: str | Path) -> None:
    rose = default_rose()
    header = "speed_m_s direction_deg frequency (generic defaults, not measured data)"
    np.savetxt(rose_path, rose, header=header)
    power, thrust = default_power_curve(), default_thrust_curve()
    np.savetxt(
        curve_path,
        np.stack([power.speeds, power.values, thrust.values], axis=1),
        header="speed_m_s power_kw thrust_coeff (generic defaults, not measured data)",
    )


@dataclass
class Layout:
    """Concrete placement: active flags plus coordinates in meters."""

    active: np.ndarray  # (16,) bool
    xs: np.ndarray
    ys: np.ndarray

    @classmethod
    def from_point(cls, point: Point) -> "Layout":
        n = MAX_TURBINES
        vals = point.as_vector()
        active = vals[:n] > 0.5
        xs = vals[n : 2 * n].copy()
        ys = vals[2 * n : 3 * n].copy()
        return cls(active, xs, ys)

    def to_point(self) -> Point:
        values = np.concatenate([self.active.astype(float), self.xs, self.ys])
        point = Point(tuple(values))
        return Point(point.values, layout_aux(point))

    @property
    def n_active(self) -> int:
        return int(self.active.sum())


def lens_area(r_wake: float, r_rotor: float, c: float) -> float:
    """Rotor area covered by a wake disc whose center is offset by c."""
    if c >= r_wake + r_rotor:
        return 0.0
    if c + r_rotor <= r_wake:
        return math.pi * r_rotor * r_rotor
    # two circular segments; arccos arguments clamped against roundoff
    a1 = max(-1.0, min(1.0, (r_wake**2 + c**2 - r_rotor**2) / (2.0 * r_wake * c)))
    a2 = max(-1.0, min(1.0, (r_rotor**2 + c**2 - r_wake**2) / (2.0 * r_rotor * c)))
    t1 = 2.0 * math.acos(a1)
    t2 = 2.0 * math.acos(a2)
    return 0.5 * r_wake**2 * (t1 - math.sin(t1)) + 0.5 * r_rotor**2 * (t2 - math.sin(t2))


def wake_interference(
    model: WindfarmModel,
    pos_k: np.ndarray,
    pos_j: np.ndarray,
    u_w: float,
    direction_deg: float,
) -> float:
    """Velocity-deficit fraction caused on turbine j by turbine k.

    ``direction_deg`` is the downwind bearing; coordinates are rotated so
    the downwind separation and crosswind offset fall out directly. Zero
    when j is upwind of k or the wake cone misses the rotor entirely.
    """
    theta = math.radians(direction_deg)
    downwind = math.cos(theta) * (pos_j[0] - pos_k[0]) + math.sin(theta) * (pos_j[1] - pos_k[1])
    if downwind <= 0.0:
        return 0.0
    crosswind = abs(
        -math.sin(theta) * (pos_j[0] - pos_k[0]) + math.cos(theta) * (pos_j[1] - pos_k[1])
    )
    xi = model.wake_expansion
    r = model.rotor_radius
    r_wake = r + xi * downwind
    if crosswind >= r_wake + r:
        return 0.0
    ct = float(model.thrust(u_w))
    ct = min(max(ct, 0.0), 0.999999)
    u_kj = (1.0 - math.sqrt(1.0 - ct)) / (1.0 + xi * downwind / r) ** 2
    area = lens_area(r_wake, r, crosswind)
    return u_kj * area / (math.pi * r * r)


def eval_windfarm(layout: Layout, model: WindfarmModel | None = None) -> tuple[float, float]:
    """(energy production, efficiency), both in (0, 1] and to be maximized.

    The energy numerator sums produced power over wind cases; the production
    objective normalizes by the ideal output of a full farm and efficiency
    by the ideal output of the active turbines, so
    production == (n_active / max_turbines) * efficiency identically.
    """
    model = model or default_model()
    if layout.n_active == 0:
        raise ValueError("at least one turbine must be active")
    act = np.nonzero(layout.active)[0]
    pos = np.stack([layout.xs[act], layout.ys[act]], axis=1)
    n_act = len(act)
    produced = 0.0
    ideal = 0.0
    for u_w, direction, freq in model.rose:
        deficit_sq = np.zeros(n_act)
        for a in range(n_act):
            for b in range(n_act):
                if a == b:
                    continue
                u_kj = wake_interference(model, pos[b], pos[a], u_w, direction)
                deficit_sq[a] += u_kj * u_kj
        u_eff = u_w * (1.0 - np.sqrt(deficit_sq))
        u_eff = np.maximum(u_eff, 0.0)
        produced += float(np.sum(model.power(u_eff))) * freq
        ideal += float(model.power(u_w)) * freq
    f1 = produced / (model.max_turbines * ideal)
    f2 = produced / (n_act * ideal)
    return f1, f2


# -- constraint set ------------------------------------------------------------


def _pairs():
    for k in range(MAX_TURBINES):
        for j in range(k + 1, MAX_TURBINES):
            yield k, j


def windfarm_design_space(include_helpers: bool = True) -> DesignSpace:
    """Feature and constraint declarations for the layout problem.

    Features: 16 two-label activity flags, then the 16 x and 16 y
    coordinates. Required rows: at least one active turbine, pairwise
    distance auxiliaries tied to the coordinates, and indicator-guarded
    minimum separation for active pairs. Helper rows (ordering of the
    activity flags, inactive turbines parked at the origin) break symmetry
    and are attached only for the feasibility-guaranteeing solver path.
    """
    feats: list = [
        CategoricalFeature(f"b{k + 1}", ("off", "on")) for k in range(MAX_TURBINES)
    ]
    feats += [ContinuousFeature(f"x{k + 1}", 0.0, FIELD_SIDE) for k in range(MAX_TURBINES)]
    feats += [ContinuousFeature(f"y{k + 1}", 0.0, FIELD_SIDE) for k in range(MAX_TURBINES)]

    cons: list = []
    diag = FIELD_SIDE * math.sqrt(2.0)
    for k in range(MAX_TURBINES):
        cons.append(AuxVar(f"act{k + 1}", "binary"))
    for k, j in _pairs():
        tag = f"{k + 1}_{j + 1}"
        cons.append(AuxVar(f"dx{tag}", "bounded", -FIELD_SIDE, FIELD_SIDE))
        cons.append(AuxVar(f"dy{tag}", "bounded", -FIELD_SIDE, FIELD_SIDE))
        cons.append(AuxVar(f"dist{tag}", "bounded", 0.0, diag))
        cons.append(AuxVar(f"bdist{tag}", "binary"))

    # channel the activity flags into binaries usable by products/indicators
    for k in range(MAX_TURBINES):
        cons.append(
            Linear(
                (AuxTerm(f"act{k + 1}", 1.0), CatTerm(k, 1, -1.0)),
                "==",
                0.0,
                name=f"chan{k + 1}",
            )
        )
    cons.append(
        Linear(
            tuple(AuxTerm(f"act{k + 1}", 1.0) for k in range(MAX_TURBINES)),
            ">=",
            1.0,
            name="one_active",
        )
    )
    x0, y0 = MAX_TURBINES, 2 * MAX_TURBINES  # feature offsets of the coordinates
    for k, j in _pairs():
        tag = f"{k + 1}_{j + 1}"
        cons.append(
            Linear(
                (AuxTerm(f"dx{tag}", 1.0), ContTerm(x0 + k, -1.0), ContTerm(x0 + j, 1.0)),
                "==",
                0.0,
                name=f"defdx{tag}",
            )
        )
        cons.append(
            Linear(
                (AuxTerm(f"dy{tag}", 1.0), ContTerm(y0 + k, -1.0), ContTerm(y0 + j, 1.0)),
                "==",
                0.0,
                name=f"defdy{tag}",
            )
        )
        cons.append(
            Quadratic(
                (
                    (AuxTerm(f"dist{tag}", 1.0), AuxTerm(f"dist{tag}", 1.0), 1.0),
                    (AuxTerm(f"dx{tag}", 1.0), AuxTerm(f"dx{tag}", 1.0), -1.0),
                    (AuxTerm(f"dy{tag}", 1.0), AuxTerm(f"dy{tag}", 1.0), -1.0),
                ),
                (),
                0.0,
                nonconvex=True,
                name=f"distdef{tag}",
            )
        )
        cons.append(
            Indicator(
                f"bdist{tag}",
                True,
                Linear((AuxTerm(f"dist{tag}", 1.0),), ">=", MIN_DISTANCE),
                name=f"mindist{tag}",
            )
        )
        cons.append(
            BinaryProduct(f"bdist{tag}", f"act{k + 1}", f"act{j + 1}", name=f"pair{tag}")
        )

    if include_helpers:
        for k in range(MAX_TURBINES - 1):
            cons.append(
                Linear(
                    (AuxTerm(f"act{k + 1}", 1.0), AuxTerm(f"act{k + 2}", -1.0)),
                    ">=",
                    0.0,
                    name=f"order{k + 1}",
                )
            )
        for k in range(MAX_TURBINES):
            cons.append(
                Indicator(
                    f"act{k + 1}",
                    False,
                    Linear((ContTerm(x0 + k, 1.0),), "<=", 0.0),
                    name=f"park_x{k + 1}",
                )
            )
            cons.append(
                Indicator(
                    f"act{k + 1}",
                    False,
                    Linear((ContTerm(y0 + k, 1.0),), "<=", 0.0),
                    name=f"park_y{k + 1}",
                )
            )
    return DesignSpace(tuple(feats), tuple(cons))


_PAIR_IDX = np.array(list(_pairs()), dtype=int)
_PAIR_TAGS = [f"{k + 1}_{j + 1}" for k, j in _pairs()]


def layout_aux(point: Point) -> dict[str, float]:
    """Completion of all layout auxiliaries implied by a design point."""
    layout = Layout.from_point(point)
    k_idx, j_idx = _PAIR_IDX[:, 0], _PAIR_IDX[:, 1]
    dx = layout.xs[k_idx] - layout.xs[j_idx]
    dy = layout.ys[k_idx] - layout.ys[j_idx]
    dist = np.hypot(dx, dy)
    both = layout.active[k_idx] & layout.active[j_idx]
    aux: dict[str, float] = {}
    for k in range(MAX_TURBINES):
        aux[f"act{k + 1}"] = 1.0 if layout.active[k] else 0.0
    for p, tag in enumerate(_PAIR_TAGS):
        aux[f"dx{tag}"] = float(dx[p])
        aux[f"dy{tag}"] = float(dy[p])
        aux[f"dist{tag}"] = float(dist[p])
        aux[f"bdist{tag}"] = 1.0 if both[p] else 0.0
    return aux


def pairwise_violations(point: Point, tol: float = 1e-6) -> list[tuple[int, int, float]]:
    """Active pairs closer than the minimum separation, with shortfalls."""
    layout = Layout.from_point(point)
    bad = []
    for k, j in _pairs():
        if layout.active[k] and layout.active[j]:
            d = math.hypot(layout.xs[k] - layout.xs[j], layout.ys[k] - layout.ys[j])
            if d < MIN_DISTANCE - tol:
                bad.append((k, j, MIN_DISTANCE - d))
    return bad


def repair_layout(
    x_cont: np.ndarray,
    labels: np.ndarray,
    box_lo: np.ndarray,
    box_hi: np.ndarray,
) -> tuple[np.ndarray, np.ndarray] | None:
    """Deterministic push-apart heuristic producing a separated layout.

    Starts from the candidate coordinates, spreads violating active pairs
    along their connecting line (field bounds respected), and falls back to
    a fixed feasible grid when the iteration stalls. Inactive turbines are
    parked at the origin.
    """
    n = MAX_TURBINES
    active = labels > 0.5
    xs = x_cont[:n].copy()
    ys = x_cont[n:].copy()
    xs[~active] = 0.0
    ys[~active] = 0.0
    act = np.nonzero(active)[0]
    if len(act) == 0:
        return None
    margin = MIN_DISTANCE * 1.001
    pos = np.stack([xs[act], ys[act]], axis=1)
    m = len(act)
    iu, ju = np.triu_indices(m, k=1)
    angles = 0.7 * (iu * m + ju)
    fallback = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    for _ in range(80):
        delta = pos[iu] - pos[ju]
        d = np.hypot(delta[:, 0], delta[:, 1])
        short = d < margin
        if not short.any():
            xs[act], ys[act] = pos[:, 0], pos[:, 1]
            return np.concatenate([xs, ys]), labels
        degenerate = d < 1e-9
        dirs = np.where(degenerate[:, None], fallback, delta / np.maximum(d, 1e-9)[:, None])
        push = np.where(short, 0.55 * (margin - d), 0.0)
        moves = np.zeros_like(pos)
        np.add.at(moves, iu, dirs * push[:, None])
        np.add.at(moves, ju, -dirs * push[:, None])
        pos = np.clip(pos + moves, 0.0, FIELD_SIDE)
    # fixed fallback grid: 4 x 4 spacing 1300 m always satisfies the minimum
    grid = np.linspace(0.0, FIELD_SIDE, 4)
    for slot, a in enumerate(act):
        xs[a] = grid[slot % 4]
        ys[a] = grid[slot // 4]
    return np.concatenate([xs, ys]), labels


def first_point(rng: np.random.Generator) -> Point:
    """Single-turbine seed layout: turbine 1 near the field center."""
    noise = float(rng.uniform(0.0, FIELD_SIDE / 2.0))
    layout = Layout(
        active=np.array([True] + [False] * (MAX_TURBINES - 1)),
        xs=np.array([FIELD_SIDE / 2.0 + noise] + [0.0] * (MAX_TURBINES - 1)),
        ys=np.array([FIELD_SIDE / 2.0 + noise] + [0.0] * (MAX_TURBINES - 1)),
    )
    return layout.to_point()
