import json

import numpy as np
import pytest

import floodsom


def small_config(out):
    cfg = floodsom.default_config()
    cfg["terrain"].update(nrows=24, ncols=24, bump_sigma_min=80.0, bump_sigma_max=150.0)
    cfg["sim"]["duration"] = 900.0
    cfg["sampling"].update(n_locations=5, n_train=3, margin=3)
    cfg["feature_radius"] = 1
    cfg["som_zero"].update(rows=5, cols=5, epochs=3)
    cfg["som_wet"].update(rows=4, cols=4, epochs=3)
    cfg["k"] = 3
    cfg["output_dir"] = str(out)
    return cfg


def test_dem_is_deterministic():
    a = floodsom.generate_dem({"terrain": {"nrows": 12, "ncols": 9}})
    b = floodsom.generate_dem({"terrain": {"nrows": 12, "ncols": 9}})
    assert a.shape == (12, 9)
    assert np.array_equal(a, b)


def test_simulation_conserves_volume():
    dem = floodsom.generate_dem({"terrain": {"nrows": 20, "ncols": 20}})
    depths, injected, seconds = floodsom.simulate(dem, 20.0, [(0, 0), (300, 2), (600, 0)], 10, 10, duration=600)
    assert injected == pytest.approx(600.0)
    assert depths.sum() * 400.0 == pytest.approx(injected, rel=1e-9)
    assert (depths >= 0).all()
    assert seconds >= 0


def test_stats_and_formatting():
    s = floodsom.depth_stats(np.array([0.1, 0.3]))
    assert s["mean"] == pytest.approx(0.2)
    assert s["std"] == pytest.approx(0.1)
    assert floodsom.format_time_delta(11.0, 2.0) == "-9 s (-81.8%)"


def test_errors_map_to_python_exceptions(tmp_path):
    with pytest.raises(ValueError):
        floodsom.generate_dem({"terrain": {"nrows": 0}})
    with pytest.raises(FileNotFoundError):
        floodsom.CombinedModel.load(str(tmp_path / "missing.json"))


def test_small_pipeline_and_prediction(tmp_path):
    cfg = small_config(tmp_path)
    floodsom.run_pipeline(cfg)
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["validation_locations"]) == 2

    cm = floodsom.CombinedModel.load(str(tmp_path / "combined.json"))
    assert cm.k == 3
    assert cm.size == 25 + 16
    dem = floodsom.generate_dem(cfg)
    row, col = report["validation_locations"][0]["source"]
    pred = cm.predict_map(dem, cfg["terrain"]["cell_size"], row, col)
    assert pred.shape == dem.shape
    assert ((pred == 0) | (pred >= cfg["theta"])).all()
    assert np.array_equal(pred, cm.predict_map(dem, cfg["terrain"]["cell_size"], row, col))
    assert cm.with_k(5).k == 5
