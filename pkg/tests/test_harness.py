import logging

import numpy as np
import pandas as pd
import pytest

import run_finger
from conftest import CONFIGS
from harness.commands import (cmd_gen_dataset, cmd_run, cmd_train_eval, cmd_verify, split_indices, summary_path,
                              tactile_log_path)
from harness.dataset import generate_dataset, load_scenario_set, window_samples
from harness.summary import runs_of, summarize
from harness.verify import check_friction_cone, check_tau_decomposition, verify_rows
from sim.runner import run_log_columns
from stability.features import FEATURE_NAMES
from stability.logistic import load_model
from tactile.estimator import TactileFrame
from utils.config import load_yaml
from utils.error_handler import EXIT_BLOWUP, EXIT_FAILURE, EXIT_OK, EmptyDataset
from utils.logger import read_run_log, read_tactile_log, write_dataset, write_run_log
from utils.metrics import decay_rate

RATE = 150
METADATA = {'scenario': 'synthetic', 'mu': 0.8, 'control_rate': RATE, 'torque_limits': [0.7] * 4}


def synthetic_rows(n=120, contact_from=10, stable=(20, 80), rng=None):
    """A well-behaved RunLog: contact from `contact_from`, y = 1 on `stable`, theta decaying."""
    rng = rng or np.random.default_rng(0)
    rows = pd.DataFrame(0.0, index=range(n), columns=run_log_columns(4))
    rows['tick'] = np.arange(n)
    rows['time'] = np.arange(n) / RATE
    contact = np.arange(n) >= contact_from
    y = (np.arange(n) >= stable[0]) & (np.arange(n) < stable[1])
    rows['gt_contact'] = contact.astype(int)
    rows['y'] = y.astype(int)
    rows['theta'] = np.where(contact, 0.5 * np.exp(-2.0 * np.clip(rows['time'] - stable[0] / RATE, 0.0, None)), np.nan)
    rows.loc[contact, 'F_n'] = 1.0
    rows.loc[contact, 'F_t'] = 0.3
    rows.loc[contact, 'F_ext_x'] = 1.0
    for i in range(4):
        rows[f"tau_motion_{i}"] = rng.standard_normal(n)
        rows[f"tau_task_{i}"] = np.where(y, rng.standard_normal(n), 0.0)
        rows[f"tau_cmd_{i}"] = rows[f"tau_motion_{i}"] + rows[f"tau_task_{i}"]
        rows[f"tau_applied_{i}"] = np.clip(rows[f"tau_cmd_{i}"], -0.7, 0.7)
    for col in ('tick', 'y', 'gt_contact', 'gt_slip', 'active', 'saturated'):
        rows[col] = rows[col].astype(int)
    return rows


def _save(tmp_path, rows, name="run.csv", metadata=None):
    path = tmp_path / name
    write_run_log(path, metadata or METADATA, rows)
    return path


class TestVerify:
    def test_well_behaved_log_passes(self, tmp_path, capsys):
        path = _save(tmp_path, synthetic_rows())
        assert cmd_verify(path) == EXIT_OK
        out = capsys.readouterr().out
        assert "FAIL" not in out
        assert out.strip().endswith("VERIFIED")

    def test_rising_theta_fails_only_decay(self, tmp_path, capsys):
        rows = synthetic_rows()
        rows.loc[60:79, 'theta'] = 0.9
        path = _save(tmp_path, rows)
        assert cmd_verify(path) == EXIT_FAILURE
        lines = capsys.readouterr().out.splitlines()
        assert any(line.startswith("FAIL theta_decay") for line in lines)
        assert sum(line.startswith("FAIL") for line in lines) == 1

    def test_decomposition_round_trips_exactly(self, tmp_path):
        metadata, rows = read_run_log(_save(tmp_path, synthetic_rows()))
        assert check_tau_decomposition(rows).passed

    def test_task_torque_without_stable_contact(self):
        rows = synthetic_rows()
        rows.loc[5, 'tau_task_0'] = 0.1
        rows.loc[5, 'tau_cmd_0'] = rows.loc[5, 'tau_motion_0'] + 0.1
        assert not check_tau_decomposition(rows).passed

    def test_cone_violation(self):
        rows = synthetic_rows()
        rows.loc[50, 'F_t'] = 0.81
        assert not check_friction_cone(rows, 0.8).passed
        assert check_friction_cone(rows, 'nan').passed

    def test_force_without_contact(self, tmp_path):
        rows = synthetic_rows()
        rows.loc[3, 'F_ext_y'] = 0.2
        report = verify_rows(METADATA, rows)
        assert not report.passed
        assert [c.name for c in report.checks if not c.passed] == ['fext_zero_off_contact']

    def test_missing_columns(self, tmp_path, capsys):
        path = _save(tmp_path, synthetic_rows().drop(columns=['F_t']))
        assert cmd_verify(path) == EXIT_FAILURE
        assert "F_t" in capsys.readouterr().out

    def test_missing_file(self, tmp_path):
        assert cmd_verify(tmp_path / "none.csv") == EXIT_FAILURE


class TestSummary:
    def test_runs_of(self):
        assert runs_of([0, 1, 1, 0, 1]) == [(1, 2), (4, 4)]
        assert runs_of([]) == []

    def test_intervals_follow_y(self):
        rows = synthetic_rows(stable=(20, 80))
        s = summarize(METADATA, rows)
        assert len(s.intervals) == 1
        iv = s.intervals[0]
        assert (iv.start_tick, iv.end_tick) == (20, 79)
        assert iv.contact_maintained
        assert iv.decay_rate == pytest.approx(2.0, abs=1e-9)

    def test_contact_loss_and_recovery(self):
        rows = synthetic_rows(n=200, stable=(20, 60))
        rows.loc[70:89, 'gt_contact'] = 0
        rows.loc[70:89, ['theta', 'F_n', 'F_t', 'F_ext_x']] = [np.nan, 0.0, 0.0, 0.0]
        rows.loc[100:149, 'y'] = 1
        s = summarize(METADATA, rows)
        assert s.contact_loss_count == 1
        assert s.recovered_after_loss == 1
        assert len(s.intervals) == 2

    def test_outcomes(self):
        assert summarize(METADATA, synthetic_rows(stable=(200, 300))).outcome == "no-stable-contact"
        converged = synthetic_rows(n=600, stable=(20, 600))
        assert summarize(METADATA, converged).outcome == "converged"

    def test_decay_rate_needs_two_points(self):
        assert np.isnan(decay_rate([0.0], [0.3]))


class TestDatasetWindows:
    def test_labels_and_qualification(self, layout):
        n = 40
        rows = pd.DataFrame({
            'active': (np.arange(n) >= 10).astype(int),
            'gt_contact': (np.arange(n) >= 8).astype(int),
            'gt_slip': (np.arange(n) == 30).astype(int),
        })
        readings = np.zeros((layout.n_tx, 3))
        readings[12] = [0.1, 0.0, 2.0]
        frames = [TactileFrame(k / RATE, readings if k >= 10 else np.zeros((layout.n_tx, 3))) for k in range(n)]
        features, labels, ends = window_samples(rows, frames, layout, window=15, stride=1, threshold=0.02)
        assert ends[0] == 14 and ends[-1] == n - 1
        assert all(len(x) == len(FEATURE_NAMES) for x in features)
        by_end = dict(zip(ends, labels))
        assert by_end[22] == 1
        assert by_end[30] == 0 and by_end[39] == 0
        assert by_end[29] == 1

    def test_scenario_set_seeds(self):
        scenario_set = load_scenario_set(CONFIGS / "datasets" / "default_mixed.yaml", seed=100)
        assert [r.seed for r in scenario_set.runs] == list(range(100, 100 + len(scenario_set.runs)))
        assert all(r.scenario.exists() for r in scenario_set.runs)


class TestCommands:
    def test_run_writes_log_and_summary(self, tmp_path, capsys):
        scenario = tmp_path / "short.yaml"
        scenario.write_text((CONFIGS / "scenarios" / "approach_only.yaml").read_text()
                            .replace("../", f"{CONFIGS}/").replace("duration: 2.0", "duration: 0.1"))
        out = tmp_path / "out" / "short.csv"
        assert cmd_run([scenario], out) == EXIT_OK
        metadata, rows = read_run_log(out)
        assert len(rows) == 15
        assert metadata['seed'] == 7
        assert load_yaml(summary_path(out))['outcome'] == "no-stable-contact"
        assert capsys.readouterr().out.startswith("OK approach_only")

    def test_run_writes_tactile_log(self, tmp_path):
        scenario = tmp_path / "short.yaml"
        scenario.write_text((CONFIGS / "scenarios" / "plane_preloaded.yaml").read_text()
                            .replace("../", f"{CONFIGS}/").replace("duration: 2.0", "duration: 0.1"))
        out = tmp_path / "short.csv"
        assert run_finger.main(['--log-level', 'WARNING', 'run', str(scenario), '--out', str(out),
                                '--tactile-log']) == EXIT_OK
        frames = read_tactile_log(tactile_log_path(out))
        _, rows = read_run_log(out)
        assert len(frames) == len(rows) == 15
        assert frames[3].timestamp == pytest.approx(rows['time'].iat[3])
        assert frames[0].readings.shape == (30, 3)
        assert np.abs(frames[0].readings).sum() > 0.0

    def test_tactile_log_is_opt_in(self, tmp_path):
        scenario = tmp_path / "short.yaml"
        scenario.write_text((CONFIGS / "scenarios" / "approach_only.yaml").read_text()
                            .replace("../", f"{CONFIGS}/").replace("duration: 2.0", "duration: 0.1"))
        out = tmp_path / "short.csv"
        assert cmd_run([scenario], out) == EXIT_OK
        assert not tactile_log_path(out).exists()

    def test_missing_chain_file(self, tmp_path, capsys):
        scenario = tmp_path / "broken.yaml"
        scenario.write_text((CONFIGS / "scenarios" / "plane_reference.yaml").read_text()
                            .replace("../chains/allegro_index.yaml", "missing_chain.yaml"))
        assert cmd_run([scenario], tmp_path / "x.csv") == EXIT_FAILURE
        assert "missing_chain.yaml" in capsys.readouterr().out

    def test_blowup_exit_code(self, tmp_path, capsys):
        scenario = tmp_path / "unstable.yaml"
        scenario.write_text((CONFIGS / "scenarios" / "approach_only.yaml").read_text()
                            .replace("../", f"{CONFIGS}/").replace("qdot_bound: 100.0", "qdot_bound: 1.0e-6"))
        assert cmd_run([scenario], tmp_path / "x.csv") == EXIT_BLOWUP
        assert "diverged" in capsys.readouterr().out

    def test_train_eval_on_separable_data(self, tmp_path, rng):
        n = 400
        y = np.arange(n) % 2
        X = rng.standard_normal((n, len(FEATURE_NAMES))) * 0.1
        X[:, 1] += np.where(y == 1, -1.0, 1.0)
        data = tmp_path / "data.csv"
        write_dataset(data, X, y, FEATURE_NAMES)
        model_path = tmp_path / "model.yaml"
        assert cmd_train_eval(data, model_path) == EXIT_OK
        assert load_model(model_path).d == len(FEATURE_NAMES)
        assert load_yaml(model_path)['metrics']['accuracy'] == 1.0

    def test_train_eval_single_class(self, tmp_path, rng):
        data = tmp_path / "data.csv"
        write_dataset(data, rng.standard_normal((50, len(FEATURE_NAMES))), np.ones(50), FEATURE_NAMES)
        assert cmd_train_eval(data, tmp_path / "model.yaml") == EXIT_FAILURE

    def test_split_is_seeded_partition(self):
        train, test = split_indices(100, seed=3)
        assert len(train) == 80 and len(test) == 20
        assert sorted(np.r_[train, test].tolist()) == list(range(100))
        assert np.array_equal(split_indices(100, seed=3)[0], train)

    def test_cli_verify(self, tmp_path):
        path = _save(tmp_path, synthetic_rows())
        assert run_finger.main(['--log-level', 'WARNING', 'verify', str(path)]) == EXIT_OK


def _diverging_set(tmp_path, good=True):
    """Scenario set whose last run diverges on its first physics step."""
    diverging = tmp_path / "diverging.yaml"
    diverging.write_text((CONFIGS / "scenarios" / "plane_preloaded.yaml").read_text()
                         .replace("../", f"{CONFIGS}/").replace("qdot_bound: 100.0", "qdot_bound: 1.0e-6"))
    runs = [f"  - {{scenario: {CONFIGS}/scenarios/plane_preloaded.yaml}}"] if good else []
    runs.append(f"  - {{scenario: {diverging}, mu: 0.5}}")
    path = tmp_path / "set.yaml"
    path.write_text("name: with_blowup\nwindow: 15\nstride: 5\nduration: 0.3\nruns:\n" + "\n".join(runs) + "\n")
    return path


class TestDivergedRuns:
    def test_gen_dataset_skips_and_reports(self, tmp_path, capsys, caplog):
        out = tmp_path / "data.csv"
        with caplog.at_level(logging.ERROR, logger="utils.error_handler"):
            assert cmd_gen_dataset(_diverging_set(tmp_path), out) == EXIT_OK
        printed = capsys.readouterr().out
        assert "SKIP run 1 (diverging" in printed
        assert "(1 skipped)" in printed
        assert any("NumericalBlowup" in r.getMessage() for r in caplog.records)

        data = pd.read_csv(out)
        assert len(data) > 0
        assert (data['run'] == 0).all()
        index = pd.read_csv(f"{out}.runs.csv", keep_default_na=False)
        assert index['error_id'].iloc[0] == ""
        assert index['error_id'].iloc[1].startswith("ERR_")
        assert index['windows'].tolist()[1] == 0

    def test_skipped_run_is_recorded(self, tmp_path):
        generated = generate_dataset(load_scenario_set(_diverging_set(tmp_path)))
        assert [s.spec.index for s in generated.skipped] == [1]
        skipped = generated.skipped[0]
        assert skipped.tick == 0
        assert "diverged" in skipped.message
        assert skipped.spec.overrides == {'mu': 0.5}

    def test_all_runs_diverged(self, tmp_path, capsys):
        path = _diverging_set(tmp_path, good=False)
        with pytest.raises(EmptyDataset, match="1 of 1 runs diverged"):
            generate_dataset(load_scenario_set(path))
        assert cmd_gen_dataset(path, tmp_path / "data.csv") == EXIT_FAILURE
        assert "Dataset error" in capsys.readouterr().out
