import json

import numpy as np
import pytest

from copsens import read_csv
from copsens.cli import main

LINEAR_SPEC = {"kind": "linear_scm", "alpha": 0.0, "beta": -0.4, "delta": 0.52}
BINARY_SPEC = {
    "kind": "binary",
    "p_u": 0.4,
    "p_a_given_u": [0.3, 0.8],
    "p_y_given_au": [[0.2, 0.5], [0.7, 0.9]],
}
CATEGORICAL_SPEC = {
    "kind": "categorical",
    "p_u": 0.5,
    "p_a_given_u": [0.2, 0.7],
    "dims": [[[0.3, 0.5], [0.4, 0.6]] for _ in range(7)],
}

FAST_FLAGS = ["--max-epochs", "3", "--batch-size", "64", "--patience", "3"]


def write_spec(tmp_path, spec, name="dgp.json"):
    path = tmp_path / name
    path.write_text(json.dumps(spec))
    return path


def simulate(tmp_path, spec, n=400, seed=5, name="data.csv"):
    spec_path = write_spec(tmp_path, spec)
    out = tmp_path / name
    rc = main(["simulate", "--dgp", str(spec_path), "-n", str(n),
               "--seed", str(seed), "--out", str(out)])
    assert rc == 0
    return out


class TestSimulate:
    def test_linear_row_with_metadata(self, tmp_path):
        out = simulate(tmp_path, LINEAR_SPEC, n=500)
        a, y = read_csv(out)
        assert a.shape == (500,)
        meta = json.loads(out.with_suffix(".meta.json").read_text())
        assert meta["true_ace"] == 0.0
        assert meta["schema"] == {"a": "continuous", "y": "continuous"}
        assert "config_sha256" in meta and "seed" in meta

    def test_binary_sidecar_carries_exact_bounds(self, tmp_path):
        out = simulate(tmp_path, BINARY_SPEC)
        meta = json.loads(out.with_suffix(".meta.json").read_text())
        lo, hi = meta["af_bounds"]
        assert hi - lo == pytest.approx(1.0, abs=1e-12)
        assert lo <= meta["true_ace"] <= hi

    def test_categorical_writes_dimension_file(self, tmp_path):
        out = simulate(tmp_path, CATEGORICAL_SPEC)
        dims = out.with_suffix(".dims.csv")
        assert dims.exists()
        header = dims.read_text().splitlines()[0]
        assert header == "a," + ",".join(f"d{i}" for i in range(7))
        meta = json.loads(out.with_suffix(".meta.json").read_text())
        assert meta["schema"]["y"] == "discrete:8"
        lo, hi = meta["af_bounds"]
        assert hi - lo == pytest.approx(7.0, abs=1e-12)

    def test_byte_identical_reruns(self, tmp_path):
        out1 = simulate(tmp_path, LINEAR_SPEC, name="r1.csv")
        out2 = simulate(tmp_path, LINEAR_SPEC, name="r2.csv")
        assert out1.read_bytes() == out2.read_bytes()

    def test_zero_samples_rejected(self, tmp_path):
        spec_path = write_spec(tmp_path, LINEAR_SPEC)
        rc = main(["simulate", "--dgp", str(spec_path), "-n", "0",
                   "--seed", "1", "--out", str(tmp_path / "x.csv")])
        assert rc == 2

    def test_missing_spec_is_data_error(self, tmp_path):
        rc = main(["simulate", "--dgp", str(tmp_path / "nope.json"), "-n", "10",
                   "--seed", "1", "--out", str(tmp_path / "x.csv")])
        assert rc == 3


class TestFit:
    def test_writes_report_and_params(self, tmp_path):
        data = simulate(tmp_path, LINEAR_SPEC)
        out_dir = tmp_path / "fit"
        rc = main(["fit", "--data", str(data), "--rho", "-0.55",
                   "--out-dir", str(out_dir), "--seed", "3"] + FAST_FLAGS)
        assert rc == 0
        report = json.loads((out_dir / "fit_report.json").read_text())
        assert report["rho"] == -0.55
        assert {"train_nll", "val_nll", "test_nll", "best_epoch",
                "config_sha256", "seed"} <= report.keys()
        params = json.loads((out_dir / "params.json").read_text())
        assert params["format"] == "copsens-params"

    def test_schema_flags_and_sidecar_default(self, tmp_path):
        data = simulate(tmp_path, BINARY_SPEC)
        out_dir = tmp_path / "fitb"
        rc = main(["fit", "--data", str(data), "--rho", "0.0",
                   "--out-dir", str(out_dir), "--seed", "4"] + FAST_FLAGS)
        assert rc == 0
        report = json.loads((out_dir / "fit_report.json").read_text())
        assert report["config"]["schema"] == {"a": "discrete:2", "y": "discrete:2"}

    def test_invalid_rho_is_usage_error(self, tmp_path):
        data = simulate(tmp_path, LINEAR_SPEC)
        rc = main(["fit", "--data", str(data), "--rho", "1.0",
                   "--out-dir", str(tmp_path / "f")] + FAST_FLAGS)
        assert rc == 2

    def test_divergence_is_numerical_error(self, tmp_path):
        data = simulate(tmp_path, LINEAR_SPEC)
        rc = main(["fit", "--data", str(data), "--rho", "0.0",
                   "--learning-rate", "1e18", "--max-epochs", "5",
                   "--out-dir", str(tmp_path / "f")])
        assert rc == 4

    def test_parse_error_reports_line(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,y\n1,2\n3,oops\n")
        rc = main(["fit", "--data", str(bad), "--rho", "0.0",
                   "--out-dir", str(tmp_path / "f")] + FAST_FLAGS)
        assert rc == 3
        assert ":3:" in capsys.readouterr().err

    def test_config_file_defaults_and_override(self, tmp_path):
        data = simulate(tmp_path, LINEAR_SPEC)
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"max-epochs": 2, "seed": 17, "batch-size": 64,
                                   "patience": 2}))
        out_dir = tmp_path / "fc"
        rc = main(["fit", "--config", str(cfg), "--data", str(data),
                   "--rho", "0.0", "--out-dir", str(out_dir), "--seed", "99"])
        assert rc == 0
        report = json.loads((out_dir / "fit_report.json").read_text())
        assert report["config"]["max_epochs"] == 2   # from config file
        assert report["config"]["seed"] == 99        # flag wins


class TestSweepCommand:
    def test_curve_files_written(self, tmp_path):
        data = simulate(tmp_path, BINARY_SPEC)
        out_dir = tmp_path / "sweep"
        rc = main(["sweep", "--data", str(data), "--grid=-0.5,0.0,0.5",
                   "--n-samples", "2000", "--out-dir", str(out_dir),
                   "--seed", "2"] + FAST_FLAGS)
        assert rc == 0
        doc = json.loads((out_dir / "rho_curve.json").read_text())
        assert doc["grid"] == [-0.5, 0.0, 0.5]
        assert len(doc["points"]) == 3
        assert "config_sha256" in doc
        csv_lines = (out_dir / "rho_curve.csv").read_text().splitlines()
        assert csv_lines[0] == "rho,ace,ey1,ey0"
        assert len(csv_lines) == 4

    def test_pipeline_determinism(self, tmp_path):
        data = simulate(tmp_path, BINARY_SPEC)
        outs = []
        for name in ("s1", "s2"):
            out_dir = tmp_path / name
            rc = main(["sweep", "--data", str(data), "--grid=-0.5,0.5",
                       "--n-samples", "1000", "--out-dir", str(out_dir),
                       "--seed", "2", "--jobs", str(1 if name == "s1" else 2)]
                      + FAST_FLAGS)
            assert rc == 0
            outs.append((out_dir / "rho_curve.csv").read_bytes())
        assert outs[0] == outs[1]


class TestBoundsCommand:
    def test_binary_bounds(self, tmp_path, capsys):
        data = simulate(tmp_path, BINARY_SPEC, n=2000)
        capsys.readouterr()  # drop simulate's status line
        rc = main(["bounds", "--data", str(data)])
        assert rc == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["kind"] == "binary"
        assert doc["width"] == pytest.approx(1.0, abs=1e-12)

    def test_categorical_bounds_from_dimension_file(self, tmp_path):
        data = simulate(tmp_path, CATEGORICAL_SPEC, n=2000)
        dims = data.with_suffix(".dims.csv")
        out = tmp_path / "bounds.json"
        rc = main(["bounds", "--data", str(dims), "--out", str(out)])
        assert rc == 0
        doc = json.loads(out.read_text())
        assert doc["kind"] == "categorical"
        assert len(doc["dimensions"]) == 7
        assert doc["width"] == pytest.approx(7.0, abs=1e-12)

    def test_non_binary_rejected(self, tmp_path):
        data = simulate(tmp_path, LINEAR_SPEC)
        rc = main(["bounds", "--data", str(data)])
        assert rc == 3


class TestReport:
    def test_merges_curves(self, tmp_path):
        data = simulate(tmp_path, BINARY_SPEC)
        out_dir = tmp_path / "sweep"
        main(["sweep", "--data", str(data), "--grid=-0.5,0.5",
              "--n-samples", "500", "--out-dir", str(out_dir), "--seed", "2"]
             + FAST_FLAGS)
        merged = tmp_path / "merged.csv"
        rc = main(["report", str(out_dir / "rho_curve.json"),
                   "--out", str(merged)])
        assert rc == 0
        lines = merged.read_text().splitlines()
        assert lines[0] == "label,rho,ace,ey1,ey0"
        assert len(lines) == 3
        summary = json.loads(merged.with_suffix(".summary.json").read_text())
        assert summary["curves"][0]["label"] == "rho_curve"


class TestEndToEndSchemaRoundtrip:
    def test_discrete_mass_preserved_through_codec(self, tmp_path):
        from copsens import Dataset, VarSchema, decode
        data = simulate(tmp_path, BINARY_SPEC, n=20_000, seed=11)
        a, y = read_csv(data)
        ds = Dataset(a, y, VarSchema.parse("discrete:2"), VarSchema.parse("discrete:2"))
        a_enc, y_enc = ds.encoded(np.random.default_rng(1))
        a_dec = decode(ds.a_schema.codec(), a_enc)
        y_dec = decode(ds.y_schema.codec(), y_enc)
        for raw, dec in ((a, a_dec), (y, y_dec)):
            freq_raw = np.bincount(raw.astype(int), minlength=2) / raw.size
            freq_dec = np.bincount(dec, minlength=2) / dec.size
            assert 0.5 * np.abs(freq_raw - freq_dec).sum() < 0.01
