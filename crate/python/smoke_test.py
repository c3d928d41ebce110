"""Smoke test for the iob_energy extension module.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/iob_energy-*.whl
"""

import math
import sys

import iob_energy as ie


def close(a, b, rel):
    return abs(a - b) <= rel * abs(b)


def main():
    bt = ie.NodeConfig.preset("bluetooth")
    wir = ie.NodeConfig.preset("wir")

    assert close(bt.node_power(1e6), 3.925e-2, 1e-12)
    assert close(wir.node_power(1e6), 2.0e-3, 1e-12)

    hours = ie.lifetime(wir, 1e6) / 3600
    assert close(hours, 1500.0, 1e-9), hours
    assert ie.lifetime(wir, 1e6, harvest=1.0) is None

    cmp = ie.compare_lifetime(bt, wir, 1e6)
    assert abs(cmp["ratio"] - 19.625) < 1e-6, cmp

    v = ie.max_perpetual_rate(wir, 400e-6)
    assert v["method"] == "closed_form" and close(v["rate"], 2e5, 1e-12), v
    b = ie.max_perpetual_rate(wir, 400e-6, method="bisection")
    assert close(b["rate"], 2e5, 1e-6), b

    knee = ie.EfficiencyModel(-0.5, math.log10(7e-7), 0.7e-9)
    assert close(knee.knee_rate(), 1e6, 1e-6)
    assert knee.efficiency(1e7) == 0.7e-9

    rep = ie.fit_loglog(ie.bundled_survey_csv(), resolution_bits=16)
    assert rep.model.slope < 0 and rep.n_points >= 2, rep.model
    fitted = ie.NodeConfig.fitted(rep.model, "bluetooth", 15e-9, 1e8, 0.4)
    assert ie.max_perpetual_rate(fitted, 100e-6)["rate"] < 10e3

    sweep = ie.power_sweep([("bt", bt), ("wir", wir)], points=9)
    assert len(sweep["rates"]) == 9 and set(sweep["power"]) == {"bt", "wir"}

    sim = ie.simulate(wir, 1e6, horizon=1e7, dt=60.0)
    assert sim["terminal"] == "depleted"
    assert abs(sim["time"] - 5.4e6) <= 60.0, sim["time"]

    try:
        ie.NodeConfig.from_json('{"sensing": {}}')
    except ValueError:
        pass
    else:
        raise AssertionError("bad config accepted")

    print("python smoke test: ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
