"""Smoke test for the tpp_depth_py extension module.

Build and run from the repository root:

    cargo build --release -p tpp-depth-py --features extension-module
    cp target/release/libtpp_depth_py.so python/tpp_depth_py.so
    python3 python/smoke_test.py
"""

import math

import tpp_depth_py as tpp


def main():
    rows = tpp.simulate("hpp", [2.0], n=200, k=2, seed=7)
    assert len(rows) == 200 and all(len(r) == 2 for r in rows)
    assert rows == tpp.simulate("hpp", [2.0], n=200, k=2, seed=7)

    params = tpp.fit_params(rows)
    assert params.k == 2
    assert math.isclose(sum(params.u_bar), 1.0)
    assert params.center[-1] == params.start + params.mu_last

    center = tpp.product_depth(params.center, params)
    assert math.isclose(center["product"], 1.0, rel_tol=1e-12)

    # worked example: s0 = 0, mu = 1, var = 0.5, u = (0.5, 0.5)
    ref = tpp.DepthParams(0.0, 1.0, 0.5, [0.5, 0.5])
    b = tpp.product_depth([0.5, 1.0], ref)
    assert b["product"] == 1.0
    b = tpp.product_depth([0.25, 1.0], ref)
    assert math.isclose(b["conditional"], math.sqrt(0.75), rel_tol=1e-12)
    assert tpp.product_depth([0.0, 1.0], ref)["product"] == 0.0
    assert math.isclose(tpp.hpp_conditional_depth([0.25, 1.0]), math.sqrt(0.75), rel_tol=1e-12)
    assert math.isclose(tpp.marginal_factor(1.5, ref), (1 / 1.5) ** 0.5, rel_tol=1e-12)
    assert math.isclose(
        tpp.mahalanobis_depth([0.5, 1.0], [0.5, 1.0], [[0.25, 0.25], [0.25, 0.5]]), 1.0
    )

    ranks = tpp.rank(rows, params)
    assert sorted(ranks)[0] == 1 and max(ranks) <= len(rows)
    values = tpp.depth_values(rows, params, "mahalanobis")
    assert all(0.0 < v <= 1.0 for v in values)

    clone = tpp.DepthParams.from_json(params.to_json())
    assert clone.u_bar == params.u_bar and clone.var_last == params.var_last

    report = tpp.verify_properties(params, trials=500, seed=1, reference=rows)
    assert report["passed"], report

    for bad in (lambda: tpp.product_depth([1.0, 0.5], ref), lambda: tpp.rank(rows, params, "prodcut")):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
