"""Quick check that the extension module loads and its main entry points work.

Build first, for example:
    maturin develop -m crates/py/Cargo.toml --release
or
    cargo build --release -p frachz-py --features extension-module
    cp target/release/libfrachz_py.so python/frachz_py.so
"""

import json
import math

import frachz_py as fz


def main():
    half = fz.OustaloupFilter(0.5)
    assert len(half.zeros) == 5 and len(half.poles) == 5
    mag, phase = half.freq_response(1.0)
    assert abs(mag - 1.0) < 0.05 and abs(phase - 45.0) < 4.0

    t = [i * 0.001 for i in range(4001)]
    gl = fz.gl_differintegral(t, 0.5, 0.001)
    assert abs(gl[-1] - 2.0 * math.sqrt(4.0 / math.pi)) < 0.02 * gl[-1]

    eng = fz.FuzzyEngine()
    assert eng.infer(0.0, 0.0) == 0.0
    assert abs(eng.infer(0.4, -0.2) + eng.infer(-0.4, 0.2)) < 1e-9
    assert len(eng.surface(11)) == 11

    plant = fz.Plant.preset("gp2")
    spec = fz.ControllerSpec.published("gp2", "fuzzy-pd-i")
    again = fz.ControllerSpec.from_json(spec.to_json())
    assert again.params() == spec.params()
    assert set(spec.params()) == {"K_e", "K_d", "K_i", "K_PD", "lambda", "mu"}

    run = fz.simulate(plant, spec)
    assert not run["unstable"]
    n_dist = len(run["t"]) // 2
    assert abs(run["y"][n_dist - 1] - 1.0) < 0.05
    assert abs(fz.evaluate(plant, spec) - run["J"]) < 1e-9 * run["J"]

    best, j = fz.tune(fz.Plant.preset("gp1"), "fuzzy-pid", seeds=[1], generations=3)
    assert best.structure == "fuzzy-pid" and 0.0 < j < 1e10

    front = fz.pareto(fz.Plant.preset("gp3"), "fuzzy-pid", generations=2, population=12, seed=1)
    for objs, member in front:
        assert len(objs) == 2 and member.structure == "fuzzy-pid"

    assert "gp3" in fz.reproduce_tables()
    print(json.dumps({"ok": True, "J_gp2_pd_i": run["J"], "tuned_J": j, "front": len(front)}))


if __name__ == "__main__":
    main()
