"""Smoke test for the skewlab_py extension module.

Build with `maturin develop -m crates/py/Cargo.toml`, or with
`cargo build -p skewlab-py --release` followed by copying
target/release/libskewlab_py.so to python/skewlab_py.so.
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import skewlab_py as sl


def main():
    assert sl.kappa(1.0, 2.0) == 1.0
    assert sl.kappa(3.0, 3.0) == 0.0
    try:
        sl.kappa(0.0, 1.0)
    except ValueError:
        pass
    else:
        raise AssertionError("kappa(0, 1) should raise")

    names = sl.catalog_names()
    assert {"noinvattr", "coinflip-one", "coinflip-two", "keller", "product-hump"} <= set(names), names

    keller = sl.System.catalog("keller")
    again = sl.System.from_json(keller.to_json())
    assert again.to_json() == keller.to_json()
    cert = keller.certify(theta="0.25")
    assert cert["alpha_star"] > 0 and cert["gamma"] > 0, cert
    values, summary = keller.pullback_grid(nodes=256)
    assert len(values) == 256 and summary["positive_fraction"] > 0.95, summary
    assert keller.classify()["classification"] == keller.classification

    noinv = sl.System.catalog("noinvattr")
    series = noinv.pullback("0", depth=30, stop=None)
    assert all(v <= 0.5 ** (i + 1) for i, v in enumerate(series))
    _, x = noinv.iterate("0", 0.5, 5)
    assert 1.0 - x < 1e-9

    trace = noinv.orbit_pair("0", 0.2, 0.8, steps=50, beta=1.0, eps=0.1)
    kappas = [s["kappa"] for s in trace["records"] if s["kappa"]]
    assert all(b < a for a, b in zip(kappas, kappas[1:])), kappas
    assert "convergence" in trace

    coin = sl.System.catalog("coinflip-one")
    assert not coin.invertible
    try:
        coin.pullback("(0)", depth=5)
    except RuntimeError:
        pass
    else:
        raise AssertionError("one-sided pullback should raise")

    try:
        sl.System.from_json(json.dumps({"base": {"kind": "circle"}}))
    except ValueError as e:
        assert "base" in str(e), e
    else:
        raise AssertionError("bad config should raise")

    assert math.isfinite(keller.fiber("0.1", 0.5))
    print("smoke test ok")


if __name__ == "__main__":
    main()
