"""Battery-design constraint fixture with a stub evaluator.

One categorical feature selects a published parameter set; nine continuous
features cover discharge rate and electrode geometry. Indicator rows cap the
discharge rate per parameter set and two linear rows keep the porosity plus
active-material fractions below 0.95. The evaluator is an analytic STUB used
only to exercise the constraint grammar and categorical proposals; it does
not simulate cell physics.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import (
    AuxTerm,
    AuxVar,
    CatTerm,
    CategoricalFeature,
    ContTerm,
    ContinuousFeature,
    DesignSpace,
    Indicator,
    Linear,
    Point,
)

PARAMETER_SETS = ("Ai2019", "Chen2020", "Ecker2015", "Marquis2019", "Yang2017")
C_RATE_CAPS = {"Ai2019": 3.2, "Chen2020": 2.2, "Ecker2015": 8.2, "Marquis2019": 5.2, "Yang2017": 8.2}

# feature order: p, C, eps_por-, eps_act-, r_part-, eps_por+, eps_act+, r_part+, lam-, lam+
F_P, F_C = 0, 1
F_POR_N, F_ACT_N, F_RAD_N = 2, 3, 4
F_POR_P, F_ACT_P, F_RAD_P = 5, 6, 7
F_LAM_N, F_LAM_P = 8, 9


def battery_design_space() -> DesignSpace:
    feats = (
        CategoricalFeature("p", PARAMETER_SETS),
        ContinuousFeature("c_rate", 0.5, 8.2),
        ContinuousFeature("eps_por_neg", 0.2, 0.7),
        ContinuousFeature("eps_act_neg", 0.2, 0.7),
        ContinuousFeature("r_particle_neg", 1e-6, 20e-6),
        ContinuousFeature("eps_por_pos", 0.2, 0.7),
        ContinuousFeature("eps_act_pos", 0.2, 0.7),
        ContinuousFeature("r_particle_pos", 1e-6, 20e-6),
        ContinuousFeature("lambda_neg", 0.5, 2.0),
        ContinuousFeature("lambda_pos", 0.5, 2.0),
    )
    cons: list = []
    cons.append(
        Linear((ContTerm(F_POR_N, 1.0), ContTerm(F_ACT_N, 1.0)), "<=", 0.95, name="binder_neg")
    )
    cons.append(
        Linear((ContTerm(F_POR_P, 1.0), ContTerm(F_ACT_P, 1.0)), "<=", 0.95, name="binder_pos")
    )
    for label, name in enumerate(PARAMETER_SETS):
        guard = f"is_{name}"
        cons.append(AuxVar(guard, "binary"))
        cons.append(
            Linear((AuxTerm(guard, 1.0), CatTerm(F_P, label, -1.0)), "==", 0.0, name=f"chan_{name}")
        )
        cons.append(
            Indicator(
                guard,
                True,
                Linear((ContTerm(F_C, 1.0),), "<=", C_RATE_CAPS[name]),
                name=f"c_cap_{name}",
            )
        )
    return DesignSpace(feats, tuple(cons))


def battery_aux(point: Point) -> dict[str, float]:
    label = int(point.values[F_P])
    return {
        f"is_{name}": 1.0 if i == label else 0.0 for i, name in enumerate(PARAMETER_SETS)
    }


_SET_POWER = np.array([0.9, 1.1, 0.8, 1.0, 1.05])
_SET_ENERGY = np.array([1.1, 0.95, 1.05, 1.0, 0.9])


def battery_stub_evaluate(point: Point) -> tuple[float, float]:
    """Deterministic smooth stand-in for (mean power, discharged energy).

    Shaped so the categorical choice and the rate/geometry trade off matter,
    which is all the fixture needs; maximization orientation.
    """
    v = point.as_vector()
    p = int(v[F_P])
    c = v[F_C]
    transport = (v[F_POR_N] + v[F_POR_P]) / 1.4
    loading = (v[F_ACT_N] + v[F_ACT_P]) / 1.4 * (v[F_LAM_N] + v[F_LAM_P]) / 4.0
    kinetics = 1.0 / (1.0 + 5e5 * (v[F_RAD_N] + v[F_RAD_P]))
    power = _SET_POWER[p] * c * transport * kinetics
    energy = _SET_ENERGY[p] * loading * math.exp(-0.15 * c) * (0.5 + transport)
    return float(power), float(energy)
