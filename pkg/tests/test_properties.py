"""Seeded property suites, at least 1000 random cases each.

Two suites are known to fail at their stated tolerance with the natural
random inputs; see ``test_sur_matches_refined_grid`` and
``test_dual_bound_with_polar_directions`` for what does hold there.
"""

import numpy as np
import pytest

import property_checks as pc
from robust_split.geometry.linalg import sur
from robust_split.geometry.sets import FinGenCone, NonposOrthant
from robust_split.residual import Problem, residual_dual_lb, residual_values
from robust_split.uncertainty import UncertaintySet

SUITES = {
    "convexity": pc.convexity,
    "lipschitz": pc.lipschitz,
    "homogeneity": pc.homogeneity,
    "subgradient_inequality": pc.subgradient_inequality,
    "dual_bound": pc.dual_bound,
    "vertex_attainment": pc.vertex_attainment,
    "dykstra_vs_box": pc.dykstra_vs_box,
    "support": pc.support_properties,
    "sur_vs_grid": pc.sur_vs_grid,
}


@pytest.mark.parametrize("name", list(SUITES))
def test_property_suite(name):
    out = SUITES[name]()
    assert out.cases >= pc.CASES
    assert out.violations == 0, str(out)


def test_projection_suites():
    outs = pc.projection_properties()
    assert len(outs) == 2 * len(pc.ALL_VARIANTS)
    failed = [str(o) for o in outs if not o.ok]
    assert not failed, failed


def test_sur_matches_refined_grid():
    """Where the 1e-3 grid misses, a grid refined around its minimiser agrees with sur to 1e-9."""
    rng = np.random.default_rng(9)
    th = np.arange(0.0, np.pi, 1e-3)
    for _ in range(pc.CASES):
        A = rng.normal(size=(2, int(rng.integers(2, 5))))
        vals = np.linalg.norm(np.stack([np.cos(th), np.sin(th)], 1) @ A, axis=1)
        s = sur(A)
        assert s <= vals.min() + 1e-12
        t0 = th[np.argmin(vals)]
        fine = np.linspace(t0 - 2e-3, t0 + 2e-3, 40_001)
        best = np.linalg.norm(np.stack([np.cos(fine), np.sin(fine)], 1) @ A, axis=1).min()
        assert abs(best - s) <= 1e-9


def test_dual_bound_with_polar_directions():
    """Adding the polar-cone projections of the directions closes the gap on cone instances."""
    dirs = pc.sphere_directions(3, 10_000)
    rng = np.random.default_rng(4)
    K = FinGenCone(NonposOrthant(3).polar_generators())
    PD = K.project(dirs)
    nr = np.linalg.norm(PD, axis=1)
    D = np.vstack([dirs, PD[nr > 1e-12] / nr[nr > 1e-12, None]])
    for _ in range(200):
        n, k = (int(v) for v in rng.integers(1, 4, 2))
        P = Problem(pc.random_set(rng, n), NonposOrthant(3), UncertaintySet(rng.normal(size=(k, 3, n))))
        x = rng.uniform(-5, 5, n)
        val = float(residual_values(P, x[None])[0][0])
        lb = residual_dual_lb(P, x, D)
        assert lb <= val + 1e-9
        if val > 1e-9:
            assert (val - lb) / val <= 0.05
