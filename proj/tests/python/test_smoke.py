import math
import os
import pathlib

import pytest

import kirchnet

DATA = pathlib.Path(os.environ.get("KIRCHNET_DATA_DIR", pathlib.Path(__file__).resolve().parents[2] / "data"))


def wheatstone():
    return kirchnet.load_network(str(DATA / "wheatstone.net"))


def test_network_and_distance():
    net = wheatstone()
    assert net.vertex_count == 6
    assert net.edge_count == 7
    assert net.total_length == 7.0
    assert kirchnet.validate(net)["regular"]
    assert kirchnet.distance(net, "v:1", "v:6") == 4.0
    assert kirchnet.distance(net, "v:6", "e:1:0.5") == kirchnet.distance(net, "e:1:0.5", "v:6")
    length, keys = kirchnet.shortest_path(net, "v:1", "v:6")
    assert length == 4.0
    assert keys == ["1", "2", "5", "7"]


def test_errors_are_translated():
    net = wheatstone()
    with pytest.raises(kirchnet.KirchnetError):
        kirchnet.distance(net, "v:99", "v:1")
    with pytest.raises(kirchnet.KirchnetError):
        kirchnet.network_from_edges([("1", "a", "b", -1.0)])
    split = kirchnet.network_from_edges([("1", "a", "b", 1.0), ("2", "c", "d", 1.0)])
    assert not kirchnet.validate(split)["connected"]


def test_measure_and_fluxes():
    net = wheatstone()
    assert kirchnet.total_measure(net) == 7.0
    assert kirchnet.integrate(net, lambda e, x: 2.0 + x, 0.1) == pytest.approx(7 * 2.5, abs=1e-12)
    assert kirchnet.upwind_flux(0.3, 0.7, 1.0) == pytest.approx(0.3)
    assert kirchnet.upwind_flux(0.3, 0.7, -1.0) == pytest.approx(-0.7)
    assert kirchnet.godunov_flux(0.8, 0.2) == 0.25


def test_simulate_conserves_mass():
    r = kirchnet.simulate_scenario(str(DATA / "wheatstone_lwr_merge.scn"), t_end=1.0)
    assert r["steps"] > 0
    assert r["times"][-1] == 1.0
    assert max(abs(m - r["mass"][0]) for m in r["mass"]) <= 1e-12
    assert r["max_kirchhoff_residual"] <= 1e-12
    assert all(0.0 <= v <= 1.0 for edge in r["final_density"] for v in edge)


def test_mollifier_order():
    errs = [kirchnet.mollifier_error(lambda t, x: (1.0 + x) * math.sin(t), 2.0, g) for g in (4.0, 8.0)]
    assert kirchnet.observed_order(*errs) == pytest.approx(1.0, abs=1e-6)


def test_cli_in_process():
    code, out, _ = kirchnet.run_cli(["distance", str(DATA / "wheatstone.net"), "v:1", "v:6"])
    assert code == 0
    assert out == "4.000000000000\npath: 1 2 5 7\n"
    assert kirchnet.run_cli(["validate", str(DATA / "missing.net")])[0] == 2
