"""Smoke test for the Python bindings.

Build with `maturin develop -m crates/python/Cargo.toml`, or point PYTHONPATH
at a directory holding the built `aba_persuasion_py` extension.
"""

import json
import pathlib
import sys

import aba_persuasion_py as aba

DATA = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "data"


def main():
    xor = aba.Instance.from_file(str(DATA / "xor.json"))
    copy = aba.Instance.from_file(str(DATA / "copy.json"))
    assert xor.dims == (2, 2, 2)

    rep = xor.solve_exact()
    assert rep.classification == "Complements", rep
    assert abs(rep.bob_utility + rep.objective) < 1e-12
    assert abs(rep.alice_utility + rep.bob_utility - rep.V) < 1e-9
    assert copy.classify() == "Substitutes"

    # the report JSON keeps its fixed key order
    keys = list(json.loads(rep.to_json()).keys())
    assert keys[:5] == ["method", "objective", "bob_utility", "V", "classification"], keys

    full = xor.full_reveal()
    none = xor.no_reveal()
    assert xor.bob_utility(full) >= -1e-12
    cross = xor.cross_belief(none, full)
    assert abs(cross["bob_utility"] + cross["alice_utility"] - xor.value()) < 1e-9

    passed, values = xor.deviation_check(full, none)
    assert passed, values

    quad = aba.Instance.from_file(str(DATA / "independent.json"))
    fa = quad.fptas_a(0.1)
    assert fa.bob_utility <= quad.oracle(0.05, 2).bob_utility + fa.diagnostics["guarantee"]

    try:
        aba.Scheme(["x"], [[0.5], [0.5]])
    except ValueError:
        pass
    else:
        raise AssertionError("mismatched labels accepted")

    print("python smoke test ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
