"""
Exact counterfactual truths of a scenario by enumeration over (X, U).
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.stats import norm

from copsens.sim.scenario import SimScenario


def _joint_xu(scenario: SimScenario) -> list[tuple[int, int, float]]:
    px = np.asarray(scenario.covariate.probs, dtype=float)
    pu = scenario.u_prob()
    cells = []
    for x, p in enumerate(px):
        cells.append((x, 0, float(p * (1.0 - pu[x]))))
        cells.append((x, 1, float(p * pu[x])))
    return [c for c in cells if c[2] > 0.0]


def true_controlled_risk(scenario: SimScenario, s: float) -> float:
    """P{Y(1, s) = 1} = sum over (x, u) of P(Y=1 | s, x, u, vaccine) P(x, u)."""
    return float(sum(p * float(scenario.vaccine_risk(s, x, u)) for x, u, p in _joint_xu(scenario)))


def true_placebo_risk(scenario: SimScenario) -> float:
    """P{Y(0) = 1}."""
    return float(sum(p * float(scenario.placebo_risk(x, u)) for x, u, p in _joint_xu(scenario)))


@dataclass(frozen=True)
class TruthTables:
    grid: np.ndarray
    true_rc: np.ndarray
    true_placebo_risk: float

    @property
    def true_cve(self) -> np.ndarray:
        return 1.0 - self.true_rc / self.true_placebo_risk

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "s": self.grid,
                "true_rc": self.true_rc,
                "true_cve": self.true_cve,
                "true_placebo_risk": self.true_placebo_risk,
            }
        )


def true_rr_c(scenario: SimScenario, s1: float, s2: float) -> float:
    """RR_C(s1, s2) = P{Y(1, s2) = 1} / P{Y(1, s1) = 1}."""
    return true_controlled_risk(scenario, s2) / true_controlled_risk(scenario, s1)


def truth_table(scenario: SimScenario, grid: Sequence[float] | np.ndarray) -> TruthTables:
    g = np.asarray(grid, dtype=float)
    return TruthTables(
        grid=g,
        true_rc=np.array([true_controlled_risk(scenario, s) for s in g]),
        true_placebo_risk=true_placebo_risk(scenario),
    )


def default_truth_grid(scenario: SimScenario, points: int = 101) -> np.ndarray:
    """Grid over the marker law mean +/- 1.96 sd."""
    m = scenario.marker
    return np.linspace(m.mean - 1.96 * m.sd, m.mean + 1.96 * m.sd, points)


def confounding_strength(scenario: SimScenario, s1: float, s2: float) -> tuple[float, float]:
    """
    Realized (RR_UD, RR_EU) at the marker pair (s1, s2).

    RR_UD is the largest risk ratio between U levels over x and s in {s1, s2}.
    RR_EU is the largest ratio of P(U=u | s, x) between s2 and s1, over u and x
    and in either direction, under the scenario's normal marker law.
    """
    if scenario.unmeasured is None:
        return 1.0, 1.0
    pu = scenario.u_prob()
    sd = scenario.marker.sd
    rr_ud = 1.0
    rr_eu = 1.0
    for x in range(len(scenario.covariate.levels)):
        for s in (s1, s2):
            r0 = float(scenario.vaccine_risk(s, x, 0))
            r1 = float(scenario.vaccine_risk(s, x, 1))
            rr_ud = max(rr_ud, r1 / r0, r0 / r1)
        if pu[x] in (0.0, 1.0):
            continue

        def posterior(s: float, x: int = x) -> float:
            f1 = pu[x] * norm.pdf(s, loc=float(scenario.marker_mean(x, 1)), scale=sd)
            f0 = (1.0 - pu[x]) * norm.pdf(s, loc=float(scenario.marker_mean(x, 0)), scale=sd)
            return float(f1 / (f1 + f0))

        p1, p2 = posterior(s1), posterior(s2)
        for a, b in ((p1, p2), (1.0 - p1, 1.0 - p2)):
            if a > 0.0 and b > 0.0:
                rr_eu = max(rr_eu, b / a, a / b)
    return rr_ud, rr_eu
