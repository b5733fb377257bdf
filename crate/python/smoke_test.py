"""Smoke test for the `mlrf` extension module.

Build it first, e.g. `maturin develop -m crates/python/Cargo.toml`, or copy
`target/release/libmlrf.so` next to this script as `mlrf.so`.
"""

from fractions import Fraction
from pathlib import Path

import mlrf

LOOPS = Path(__file__).resolve().parent.parent / "crates" / "core" / "loops"


def main():
    three_phase = mlrf.Loop.from_file(LOOPS / "three_phase.slc")
    v = three_phase.analyze()
    assert v.kind == "MLRF" and v.depth == 3, v
    assert v.checked
    assert all(isinstance(c, Fraction) for f in v.mlrf for c in f[0])
    assert three_phase.min_depth() == 3
    assert three_phase.has_mlrf_of_depth(3) and not three_phase.has_mlrf_of_depth(2)

    drift = mlrf.Loop.from_file(LOOPS / "drift.slc")
    v = drift.analyze()
    assert v.kind == "NONTERMINATING" and v.iterations == 3, v
    v = drift.analyze(mode="integer")
    assert v.witness == [Fraction(-1), Fraction(-2)], v.witness

    v = mlrf.Loop.from_file(LOOPS / "ratio_growth.slc").analyze()
    assert v.kind == "UNKNOWN" and v.reason == "depth-bound", v

    countdown = mlrf.Loop("vars: x\nguard: x >= 0\nupdate: x' = x - 1/2\n")
    assert countdown.vars == ["x"]
    assert countdown.dellrf(1) is not None
    assert '"kind": "MLRF"' in countdown.analyze().to_json()

    try:
        mlrf.Loop("vars: x\nguard: y >= 0\n")
    except ValueError as e:
        assert "undeclared" in str(e)
    else:
        raise AssertionError("bad loop accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
