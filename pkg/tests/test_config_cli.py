import json
import math
from pathlib import Path

import numpy as np
import pytest

from cdce.channel import Pulse
from cdce.cli import main
from cdce.config import ENV_BASE_SEED, ConfigError, load_config
from cdce.grids import Dims
from cdce.harness import ESTIMATOR_NAMES, run_trial
from cdce.pilots import assemble_frame, discrete_af, pilot_dd_image

CONFIG_DIR = Path(__file__).resolve().parent.parent / "configs"
REPO_CONFIG = str(CONFIG_DIR / "pilot_only.yaml")
DATA_CONFIG = str(CONFIG_DIR / "with_data.yaml")
AF_CONFIG = str(CONFIG_DIR / "af_study.yaml")


def write_config(tmp_path, text, name="cfg.yaml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


SMALL = """
trials: 2
estimators: [st_ls, st_lmmse]
snr_grid_db: [10]
"""


class TestLoadConfig:
    def test_repo_pilot_config(self):
        cfg = load_config(REPO_CONFIG)
        assert cfg.dims == Dims(8, 14, 2)
        assert cfg.stats.n_paths == 3
        assert cfg.stats.l_max == 2
        assert cfg.stats.k_max == 3
        assert cfg.frame.lattice.freq_spacing == 2
        assert cfg.frame.lattice.time_spacing == 1
        assert cfg.frame.sequence_kind == "all_ones"
        assert cfg.frame.data_mode == "none"
        assert cfg.snr_grid_db == (0.0, 5.0, 10.0, 15.0, 20.0)
        assert cfg.trials == 500
        assert cfg.mode == "pilot_only"
        assert cfg.estimators == ESTIMATOR_NAMES
        assert cfg.lasso.lam == 0.01
        assert cfg.cov_samples == 1000
        assert cfg.base_seed == 0
        assert cfg.pulse == Pulse("ideal")

    def test_repo_data_config_fills_qpsk(self):
        cfg = load_config(DATA_CONFIG)
        assert cfg.mode == "with_data"
        assert cfg.frame.data_mode == "qpsk"

    def test_empty_file_gives_defaults(self, tmp_path):
        cfg = load_config(write_config(tmp_path, ""))
        assert cfg.dims == Dims(8, 14, 2)
        assert cfg.trials == 500
        assert cfg.estimators == ESTIMATOR_NAMES
        assert cfg.snr_grid_db == (0.0, 5.0, 10.0, 15.0, 20.0)
        assert cfg.base_seed == 0

    def test_missing_file_rejected(self):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config("/no/such/config.yaml")

    def test_unparseable_yaml_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot parse"):
            load_config(write_config(tmp_path, "trials: [unclosed"))

    def test_non_mapping_top_level_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="mapping"):
            load_config(write_config(tmp_path, "- 1\n- 2\n"))

    @pytest.mark.parametrize(
        "text,fragment",
        [
            ("snr_points: [0]", "unknown keys"),
            ("dims: {m: 8, rows: 3}", "unknown keys"),
            ("stats: {doppler: 2}", "unknown keys"),
            ("frame: {spacing: 2}", "unknown keys"),
            ("lasso: {alpha: 0.1}", "unknown keys"),
            ("trials: many", "integer"),
            ("trials: true", "integer"),
            ("dims: {m: 8.5}", "integer"),
            ("frame: {pilot_power: strong}", "number"),
            ("mode: blind", "mode"),
            ("snr_grid_db: []", "non-empty"),
            ("snr_grid_db: 10", "non-empty"),
            ("estimators: []", "non-empty"),
            ("estimators: [st_ls, 3]", "string"),
            ("dims: [8, 14]", "must be a mapping"),
            ("lasso: {lambda: -0.5}", "invalid lasso"),
            ("frame: {freq_spacing: 0}", "invalid frame"),
            ("estimators: [kalman]", "invalid config"),
            ("trials: 0", "invalid config"),
        ],
    )
    def test_bad_configs_rejected(self, tmp_path, text, fragment):
        with pytest.raises(ConfigError, match=fragment):
            load_config(write_config(tmp_path, text))

    def test_sequence_key_maps_to_kind(self, tmp_path):
        cfg = load_config(write_config(tmp_path, "frame: {sequence: walsh}"))
        assert cfg.frame.sequence_kind == "walsh"

    def test_env_overrides_file_seed(self, tmp_path):
        path = write_config(tmp_path, "base_seed: 3")
        assert load_config(path, env={}).base_seed == 3
        assert load_config(path, env={ENV_BASE_SEED: "12"}).base_seed == 12

    def test_bad_env_seed_rejected(self, tmp_path):
        path = write_config(tmp_path, "")
        with pytest.raises(ConfigError, match=ENV_BASE_SEED):
            load_config(path, env={ENV_BASE_SEED: "0x7"})


class TestCliSingle:
    def test_prints_one_line_per_estimator(self, tmp_path, capsys):
        path = write_config(tmp_path, SMALL)
        assert main(["single", "--config", path, "--snr-db", "10", "--trial", "0"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [ln.split("\t")[0] for ln in lines] == ["st_ls", "st_lmmse"]
        cfg = load_config(path)
        ratios = run_trial(cfg, 10.0, 0)
        for ln, name in zip(lines, ("st_ls", "st_lmmse")):
            assert float(ln.split("\t")[1]) == pytest.approx(
                10 * math.log10(ratios[name]), abs=1e-5
            )

    def test_negative_trial_is_an_error(self, tmp_path, capsys):
        path = write_config(tmp_path, SMALL)
        assert main(["single", "--config", path, "--snr-db", "0", "--trial", "-1"]) == 1
        assert capsys.readouterr().err.startswith("error:")


class TestCliSweep:
    def test_writes_csv_with_exact_header(self, tmp_path, capsys):
        path = write_config(tmp_path, SMALL)
        out = tmp_path / "rows.csv"
        assert main(["sweep", "--config", path, "--out", str(out)]) == 0
        assert "wrote 2 rows" in capsys.readouterr().out
        lines = out.read_text().splitlines()
        assert lines[0] == "estimator,snr_db,trials,nmse_db,stderr_db"
        assert len(lines) == 3
        assert lines[1].startswith("st_lmmse,10,2,")
        assert lines[2].startswith("st_ls,10,2,")

    def test_writes_json_rows(self, tmp_path):
        path = write_config(tmp_path, SMALL)
        out = tmp_path / "rows.json"
        assert main([
            "sweep", "--config", path, "--out", str(out), "--format", "json"
        ]) == 0
        payload = json.loads(out.read_text())
        assert [row["estimator"] for row in payload] == ["st_lmmse", "st_ls"]
        assert all(row["trials"] == 2 for row in payload)

    def test_unwritable_output_is_an_error(self, tmp_path, capsys):
        path = write_config(tmp_path, SMALL)
        rc = main(["sweep", "--config", path, "--out", "/nonexistent-dir/rows.csv"])
        assert rc == 1
        assert "error: cannot write results" in capsys.readouterr().err

    def test_bad_config_is_an_error(self, tmp_path, capsys):
        path = write_config(tmp_path, "mode: blind")
        assert main(["sweep", "--config", path, "--out", str(tmp_path / "x.csv")]) == 1
        assert capsys.readouterr().err.startswith("error:")


class TestCliAf:
    def test_payload_matches_library_surfaces(self, tmp_path):
        out = tmp_path / "af.json"
        assert main(["af", "--config", AF_CONFIG, "--out", str(out)]) == 0
        payload = json.loads(out.read_text())
        assert set(payload) == {"dd_image", "ambiguity"}

        cfg = load_config(AF_CONFIG)
        frame = assemble_frame(
            cfg.frame, np.random.default_rng(np.random.SeedSequence([cfg.base_seed]))
        )
        expected = {
            "dd_image": pilot_dd_image(frame),
            "ambiguity": discrete_af(pilot_dd_image(frame)),
        }
        for key, grid in expected.items():
            block = payload[key]
            assert block["rows"] == cfg.dims.m
            assert block["cols"] == cfg.dims.n
            assert len(block["re"]) == cfg.dims.m * cfg.dims.n
            rebuilt = (
                np.array(block["re"]) + 1j * np.array(block["im"])
            ).reshape(cfg.dims.m, cfg.dims.n, order="F")
            np.testing.assert_allclose(rebuilt, grid, atol=1e-12)

    def test_column_major_flattening(self, tmp_path):
        out = tmp_path / "af.json"
        main(["af", "--config", AF_CONFIG, "--out", str(out)])
        payload = json.loads(out.read_text())
        cfg = load_config(AF_CONFIG)
        frame = assemble_frame(
            cfg.frame, np.random.default_rng(np.random.SeedSequence([cfg.base_seed]))
        )
        grid = pilot_dd_image(frame)
        block = payload["dd_image"]
        # the entry at flat index m is (row 0, col 1) under column-major order
        assert block["re"][cfg.dims.m] == pytest.approx(grid[0, 1].real, abs=1e-12)

    def test_unwritable_output_is_an_error(self, capsys):
        rc = main(["af", "--config", AF_CONFIG, "--out", "/nonexistent-dir/af.json"])
        assert rc == 1
        assert "error: cannot write" in capsys.readouterr().err
