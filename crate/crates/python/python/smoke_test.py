"""Smoke test of the compiled module.

Build and run from the workspace root:

    cargo build --release -p rlocspace-py --features extension-module
    cp target/release/librlocspace_py.so crates/python/python/rlocspace.so
    python3 crates/python/python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import rlocspace  # noqa: E402


def main():
    assert rlocspace.__version__
    assert rlocspace.classify(2, 1, "1/2", "2") == "critical(r=0)"
    assert rlocspace.classify(2, 1, "3/2", "2") == "critical(r=1)"

    ids = rlocspace.corpus_ids()
    assert "gaussian" in ids and "z_gaussian" in ids

    try:
        rlocspace.membership("gaussian", "n=2,l=1,s=3/2,p=2,q=0.5")
    except ValueError as e:
        assert "q" in str(e)
    else:
        raise AssertionError("q < 1 accepted")

    r = rlocspace.membership("z2_gaussian", "n=2,l=1,s=3/2,p=2")
    assert r["in_rloc"] and r["consistent_with_theorem"], r

    w = rlocspace.whitney(2, 1, 5)
    assert w["cubes"] > 0

    q = rlocspace.power_hardy_quotient(0.75)
    assert math.isclose(q, 0.75 ** -2, rel_tol=1e-3), q

    probe = rlocspace.divergence_probe("plateau")
    assert probe["verdict"] == "log-divergent", probe["verdict"]

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
