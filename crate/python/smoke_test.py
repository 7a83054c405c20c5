"""Smoke test for the pymdimlab extension.

Uses an installed module when present, otherwise the library from
`cargo build -p mdimlab-py --release`.
"""

import importlib.machinery
import importlib.util
import json
import pathlib
import sys


def load():
    try:
        import pymdimlab

        return pymdimlab
    except ImportError:
        pass
    root = pathlib.Path(__file__).resolve().parent.parent
    for profile in ("release", "debug"):
        for name in ("libpymdimlab.so", "libpymdimlab.dylib", "pymdimlab.dll"):
            path = root / "target" / profile / name
            if path.exists():
                loader = importlib.machinery.ExtensionFileLoader("pymdimlab", str(path))
                spec = importlib.util.spec_from_file_location("pymdimlab", str(path), loader=loader)
                module = importlib.util.module_from_spec(spec)
                loader.exec_module(module)
                return module
    sys.exit("pymdimlab not found; run `cargo build -p mdimlab-py --release` first")


def main():
    m = load()

    bits = m.encode_int(-5)
    assert m.decode_int(bits) == (-5, len(bits))
    p = m.encode_point(["3/2^2", "-1"])
    assert m.decode_point(p) == ["3/2^2", "-1"]

    assert [m.zn_enumeration(i, 2) for i in range(5)] == [[0, 0], [0, 1], [0, -1], [1, 0], [-1, 0]]
    assert m.zn_index([1, 0]) == 3
    assert all(m.enumeration_bound_holds(i, m.zn_enumeration(i, 3)) for i in range(2000))
    assert 1 <= len(m.cover_ball(["1/2^3", "1/2^5"], 2)) <= 9

    machine = m.Machine(16, 1000)
    assert 0.0 < machine.kraft_mass() <= 1.0
    assert machine.halting_count() >= machine.output_count() > 0
    assert machine.k("") is not None

    f = m.Function(json.dumps({"name": "scale", "c": "2"}))
    assert (f.n, f.k) == (1, 1)
    assert f.eval(["3/2^2"], 10) == ["3/2^1"]

    random = json.dumps({"kind": "random", "seed": 1})
    rational = json.dumps({"kind": "rational", "q": ["3/2^3"]})
    lo, hi = m.dim_estimate(random)
    assert abs(lo - 1.0) <= 0.1 and abs(hi - 1.0) <= 0.1, (lo, hi)
    assert m.dim_estimate(rational)[1] <= 0.05
    lo, hi = m.mdim_estimate(random, json.dumps({"kind": "random", "seed": 2}))
    assert hi <= 0.1, (lo, hi)

    report = json.loads(m.run(json.dumps({"suite": "kraft"})))
    assert report["fail_count"] == 0 and report["pass_count"] > 0

    print("pymdimlab smoke test passed")


if __name__ == "__main__":
    main()
