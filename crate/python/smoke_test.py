#!/usr/bin/env python3
"""Smoke test for the linksign Python bindings.

Builds the extension module with cargo, stages the shared library where the
interpreter can import it, and exercises the main types and operations.

Usage: python3 python/smoke_test.py
"""

import shutil
import subprocess
import sys
import sysconfig
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def build_and_import():
    subprocess.run(
        ["cargo", "build", "-p", "linksign-py", "--release"],
        cwd=ROOT,
        check=True,
    )
    suffix = sysconfig.get_config_var("EXT_SUFFIX") or ".so"
    staging = ROOT / "target" / "python"
    staging.mkdir(parents=True, exist_ok=True)
    built = ROOT / "target" / "release" / "liblinksign_py.so"
    if not built.exists():  # e.g. macOS
        built = ROOT / "target" / "release" / "liblinksign_py.dylib"
    shutil.copy2(built, staging / f"linksign_py{suffix}")
    sys.path.insert(0, str(staging))
    import linksign_py

    return linksign_py


def main():
    ls = build_and_import()
    checks = 0

    def check(name, condition):
        nonlocal checks
        assert condition, f"FAILED: {name}"
        checks += 1
        print(f"ok: {name}")

    # Graph construction and validation.
    g = ls.SignedGraph(3, [(0, 1, 1), (1, 2, 1), (0, 2, -1)])
    check("triangle builds", g.node_count() == 3 and g.edge_count() == 3)
    try:
        ls.SignedGraph(2, [(0, 0, 1)])
        raise AssertionError("self-loop accepted")
    except ValueError:
        check("self-loop rejected", True)

    # Exact oracles.
    cost, labels = ls.delta_exact(g)
    check("one-negative triangle has index 1", cost == 1 and len(labels) == 3)
    cost2, sides = ls.delta2_exact(g)
    check("two-cluster index 1", cost2 == 1 and set(sides) <= {-1, 1})
    balanced, witness = ls.is_two_balanced(g)
    check("imbalance witnessed by an odd cycle", not balanced and witness[2] % 2 == 1)

    # Spectral layer.
    lap = ls.signed_laplacian(g)
    check("laplacian diagonal is the degree", lap[0][0] == 2.0)
    value, vector, residual = ls.min_eigenpair(g)
    check("eigen residual within tolerance", residual <= 1e-9 and len(vector) == 3)
    qmin, _ = ls.boolean_min_quadratic(g)
    check("boolean minimum is 4*delta2", qmin == 4 * cost2)

    # Balanced instance end to end: generator, covers, tree learner.
    topo = ls.gen_random_connected(20, 100, seed=5)
    sides = [1 if i % 2 == 0 else -1 for i in range(20)]
    bal = ls.gen_two_cluster_labeling(topo, sides)
    check("planted labeling is balanced", ls.delta2_exact(bal)[0] == 0)

    cover = ls.scccc(bal, rho=2, theta=8, seed=3)
    check("scccc cover verifies", cover.verify(bal) == [])
    check("scccc exact on balanced", cover.mistakes(bal) == 0)
    stats = cover.stats()
    check(
        "query/test split covers every edge",
        stats["query_count"] + stats["test_count"] == bal.edge_count(),
    )

    cover2 = ls.cccc(bal, rho=4, seed=3)
    check("cccc cover verifies", cover2.verify(bal) == [])
    check("cccc exact on balanced", cover2.mistakes(bal) == 0)

    perturbed, flips = ls.gen_p_random(bal, p=0.08, seed=11)
    check(
        "flip-load bound holds",
        cover.mistakes(perturbed) <= cover.flip_load_bound(flips),
    )

    run = ls.tree_learner_run(bal, tree="wilson", seed=9)
    check("tree learner exact on balanced", run["mistakes"] == 0)
    num, den = run["average_stretch"]
    check("average stretch at least 1", num >= den)
    check("flip RHS of empty set is 0", ls.flip_bound_rhs(bal, [], seed=9) == 0)

    # Clique generator against the oracle.
    clique, triangles = ls.gen_clique_delta(9, 4, seed=2)
    check("clique generator plants the index", ls.delta_exact(clique)[0] == 4)
    check("four disjoint triangles recorded", len(triangles) == 4)

    # Online layer: halving experts under weighted majority, adversary floor.
    small = ls.SignedGraph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 0, -1), (0, 2, 1)])
    wm = ls.weighted_majority_run(small)
    check("weighted majority runs the full order", len(wm["steps"]) == 5)
    adv = ls.adversary_run(small, k=1)
    check(
        "adversary forces |V|-1+k mistakes",
        adv["mistakes"] >= adv["forced"] == 4,
    )
    check("adversarial labeling stays k-regular", adv["final_delta"] <= 1)

    # Edge-list round trip.
    with tempfile.TemporaryDirectory() as tmp:
        path = str(Path(tmp) / "graph.txt")
        ls.save_edge_list(bal, path)
        loaded, mapping = ls.load_edge_list(path)
        check(
            "edge list round trip preserves edges and signs",
            [(int(mapping[u]), int(mapping[v]), s) for u, v, s in loaded.edges()]
            == bal.edges(),
        )

    print(f"\nsmoke test passed: {checks} checks")


if __name__ == "__main__":
    main()
