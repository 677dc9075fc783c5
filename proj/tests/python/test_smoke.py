import math

import pytest

ipva = pytest.importorskip("ipva")


def test_presets_and_frequencies():
    p = ipva.preset("pareto3")
    w1, w2 = ipva.benchmark_natural_frequencies(p)
    assert w1 < p.omega0() < w2
    with pytest.raises(ipva.IpvaError):
        ipva.preset("nope")


def test_passive_benchmark_tracks_closed_form():
    p = ipva.preset("table1")
    road = ipva.RoadModel()
    road.seed = 4
    samples = ipva.generate_road(road, 400.0)
    sim = ipva.simulate_passive(p, 0.225, samples, road, 400.0, benchmark=True)
    cf = ipva.closed_form_linear(p, 0.225, road)
    assert sim["rms_accel"] == pytest.approx(cf["rms_accel"], rel=0.15)
    assert sim["avg_power"] == pytest.approx(cf["avg_power"], rel=0.25)


def test_spectrum_of_a_tone():
    ts = 0.01
    x = [math.sin(20.0 * k * ts) for k in range(20000)]
    omega, density = ipva.psd(x, ts, 4096)
    peak = omega[max(range(len(density)), key=density.__getitem__)]
    assert peak == pytest.approx(20.0, abs=omega[1] - omega[0])


def test_closed_loop_is_passive():
    p = ipva.preset("pareto3")
    road = ipva.RoadModel()
    samples = ipva.generate_road(road, 1.2)
    for controller in ("nmpc", "sl-mpc"):
        r = ipva.closed_loop(p, controller, "perfect", samples, road, 1.0)
        assert r["min_passivity_margin"] >= 0.0
        assert all(0.0 <= u <= p.ce_max for u in r["controls"])


def test_experiment_writes_manifest(tmp_path):
    r = ipva.run_experiment("experiment = simulate\nseeds = 2\nduration = 2\n",
                            str(tmp_path / "sim"))
    assert len(r["hash"]) == 16
    assert (tmp_path / "sim" / "manifest.txt").exists()
