"""Smoke test for the dseg Python extension.

Build and install first:
    maturin develop -m crates/python/Cargo.toml --features extension-module
"""

import json
import math

import dseg


def main():
    planar = dseg.Problem.planar()
    assert planar.kind == "planar" and planar.dim == 2
    assert planar.field([1.0, 0.0]) == [0.0, -1.0]

    scc = dseg.Problem.strongly_convex_concave(10, seed=1)
    point = [0.1 * i for i in range(scc.dim)]
    analytic = scc.field(point)
    numeric = scc.finite_difference_field(point)
    err = math.dist(analytic, numeric) / math.hypot(*analytic)
    assert err < 1e-6, err

    bilinear = dseg.Problem.bilinear(5, seed=3, spectrum=(0.5, 1.0))
    assert 0.5 - 1e-9 <= bilinear.error_bound <= bilinear.lipschitz <= 1.0 + 1e-9

    admissible, violated = dseg.classify_assumption4(1 / 3, 2 / 3)
    assert admissible and violated == []
    admissible, violated = dseg.classify_assumption4(0.25, 0.5)
    assert not admissible and len(violated) == 2

    energies = dseg.energy_recursion_eg(0.5, 0.0, 0.25, 1.0, 2)
    assert abs(energies[1] - 0.890625) < 1e-15

    pred = dseg.predict_rate_constants(planar, 0.45, 0.1, 0.25, a=0.9, selector="affine")
    assert abs(pred["floor"] - 0.5292) < 1e-3

    schedule = dseg.Schedule(0.5, 0.1)
    traj = dseg.run(planar, "dseg", schedule, dseg.Oracle.exact(), [1.0, 0.0], horizon=10)
    factor = (1 - 0.05) ** 2 + 0.01
    assert abs(traj["dist_sq"][-1] - factor**10) < 1e-12
    assert traj["oracle_calls"] == 20

    n = [10 * k for k in range(1, 21)]
    slope, _, r2 = dseg.fit_loglog_slope(n, [3.0 / x for x in n], 1, 1000)
    assert abs(slope + 1) < 1e-9 and r2 > 0.999999

    config = {
        "name": "smoke",
        "problem": {"kind": "planar"},
        "oracle": {"noise_kind": "additive_gaussian_first_block_only", "sigma": 0.5},
        "solver": "og",
        "schedule": {"gamma1": 0.5, "eta1": 0.05, "offset_b": 19, "r_gamma": 0, "r_eta": 1},
        "horizon": 2000,
        "runs": 4,
        "init": {"kind": "point", "values": [1.0, 0.0]},
    }
    first = dseg.run_experiment(json.dumps(config), workers=1)
    second = dseg.run_experiment(json.dumps(config), workers=4)
    assert first["mean"] == second["mean"] and first["digest"] == second["digest"]
    assert first["oracle_calls"] == 4 * 2000

    [region] = dseg.run_acceptance("region")
    assert region["passed"], region

    print("smoke test passed:", len(dseg.SOLVERS), "solvers,", len(dseg.metrics()), "metrics")


if __name__ == "__main__":
    main()
