# tests/test_bench.py
import json

import pytest
from numpy.testing import assert_allclose
from pydantic import ValidationError

from flmreg.core.config import Settings
from flmreg.core.exceptions import ConfigurationError, EmissionError, IngestionError, RunError
from flmreg.shared.constants import (
    CSV_COLUMNS,
    BetaChoice,
    CsvLayout,
    Method,
    OutputFormat,
    SelectionMode,
    SelectionRule,
)
from flmreg.shared.utils import format_execution_time
from flmreg.features.fda_core import empirical_spectrum
from flmreg.features.estimators import fit_spectral_truncation, fit_tikhonov, mse_against_truth
from flmreg.features.simgen import SimDesign, draw_dataset
from flmreg.features.bench import (
    BenchDAO,
    BenchService,
    ExperimentConfig,
    MseTable,
    ResultMetadata,
    RhoSweepSpec,
    TuningSpec,
    fit_with_tuning,
)
from flmreg.features.bench.schemas import SweepSpec
from flmreg.main import EXIT_CONFIG, EXIT_INGESTION, EXIT_OK, EXIT_RUN, main

SMALL_DESIGN = {"n": 30, "m": 12, "n_components": 6, "seed": 0}


@pytest.fixture
def dao():
    return BenchDAO()


@pytest.fixture
def service(tmp_path):
    return BenchService(Settings(workers=1, output_dir=str(tmp_path), failure_budget=0.01))


def _metadata(command="mc-bench"):
    return ResultMetadata(version="test", command=command, seed=0, wall_time_ms=1.0, wall_time="1.0ms")


# Ingestion
def test_ingest_response_first(tmp_path, dao):
    path = tmp_path / "toy.csv"
    path.write_text("1,0,0,0\n3,1,1,1\n")
    data = dao.ingest_csv(path)
    assert (data.n, data.m) == (2, 3)
    assert_allclose(data.y, [1.0, 3.0])
    assert_allclose(data.grid.points, [1 / 6, 0.5, 5 / 6])


def test_ingest_header_supplies_grid(tmp_path, dao):
    path = tmp_path / "grid.csv"
    path.write_text("t:0.1,0.5,0.9\n1,0,0,0\n3,1,1,1\n")
    assert_allclose(dao.ingest_csv(path).grid.points, [0.1, 0.5, 0.9])


def test_ingest_two_file_layout(tmp_path, dao):
    curves, responses = tmp_path / "x.csv", tmp_path / "y.csv"
    curves.write_text("0,0,0\n1,1,1\n2,2,2\n")
    responses.write_text("1\n3\n5\n")
    data = dao.ingest_csv(curves, CsvLayout.TWO_FILE, responses)
    assert (data.n, data.m) == (3, 3)
    assert_allclose(data.y, [1.0, 3.0, 5.0])
    responses.write_text("1\n3\n")
    with pytest.raises(IngestionError):
        dao.ingest_csv(curves, CsvLayout.TWO_FILE, responses)


@pytest.mark.parametrize(
    "content, line, column",
    [
        ("", None, None),
        ("1,0,0,0\n", None, None),
        ("1,0,0,0\n3,1,1\n", 2, 4),
        ("1,0,0,0\n3,1,abc,1\n", 2, 3),
        ("1,0,0,0\n3,1,nan,1\n", 2, 3),
    ],
)
def test_ingest_errors_carry_location(tmp_path, dao, content, line, column):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(IngestionError) as info:
        dao.ingest_csv(path)
    assert info.value.path == str(path)
    assert info.value.line == line
    assert info.value.column == column


def test_simulated_dataset_reads_back(tmp_path, dao):
    data, _, _ = draw_dataset(SimDesign(**SMALL_DESIGN))
    path = tmp_path / "sim.csv"
    dao.write_dataset(data, path)
    again = dao.ingest_csv(path)
    assert_allclose(again.X, data.X)
    assert_allclose(again.grid.points, data.grid.points)


# Emission
def test_csv_columns_are_fixed(tmp_path, dao, service):
    config = ExperimentConfig(design=SMALL_DESIGN, methods=[Method.TR], replications=2)
    table = service.run_mc_study(config)
    path = dao.emit_results(table, tmp_path / "table.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 2


def test_empty_table_still_has_header(tmp_path, dao):
    path = dao.emit_results(MseTable(), tmp_path / "empty.csv")
    assert path.read_text() == ",".join(CSV_COLUMNS) + "\n"
    json_path = dao.emit_results(MseTable(), tmp_path / "empty.json", OutputFormat.JSON, _metadata())
    assert dao.load_results(json_path).records == []


def test_json_results_round_trip(tmp_path, dao, service):
    config = ExperimentConfig(design=SMALL_DESIGN, methods=[Method.ST, Method.HR], replications=3)
    table = service.run_mc_study(config)
    path = dao.emit_results(table, tmp_path / "table.json", OutputFormat.JSON, _metadata())
    document = dao.load_results(path)
    assert document.records == table.records()
    assert document.metadata.command == "mc-bench"


def test_json_emission_needs_metadata(tmp_path, dao):
    with pytest.raises(EmissionError):
        dao.emit_results(MseTable(), tmp_path / "x.json", OutputFormat.JSON)


# Monte-Carlo studies
def test_single_replication_equals_direct_fit(service):
    design = SimDesign(beta_choice=BetaChoice.BETA2, n=40, m=20, n_components=10, noise_sd=0.0)
    config = ExperimentConfig(
        design=design,
        tuning=[TuningSpec(method=Method.ST, mode=SelectionMode.FIXED, r_values=[5])],
        replications=1,
        seed=3,
    )
    row = service.run_mc_study(config).rows[0]
    data, beta, _ = draw_dataset(design.model_copy(update={"seed": 3}), 0)
    expected = mse_against_truth(fit_spectral_truncation(data, empirical_spectrum(data), 5), beta)
    assert row.mean_mse == pytest.approx(expected, rel=1e-12)
    assert row.mc_se == 0.0
    assert row.mean_r == 5.0
    assert row.mean_rho == 0.0


def test_results_do_not_depend_on_worker_count(tmp_path, dao, service):
    base = dict(
        design=SMALL_DESIGN,
        tuning=[
            TuningSpec(method=Method.TR, mode=SelectionMode.GCV),
            TuningSpec(method=Method.HR, mode=SelectionMode.KFOLD, r_values=[1, 2], rho_grid=[0.01, 0.1], folds=3),
        ],
        replications=4,
        seed=11,
    )
    serial = service.run_mc_study(ExperimentConfig(workers=1, **base))
    parallel = service.run_mc_study(ExperimentConfig(workers=2, **base))
    assert serial.records() == parallel.records()
    a = dao.emit_results(serial, tmp_path / "serial.csv").read_bytes()
    b = dao.emit_results(parallel, tmp_path / "parallel.csv").read_bytes()
    assert a == b


def test_oracle_best_picks_a_grid_point(service):
    config = ExperimentConfig(
        design=SMALL_DESIGN,
        tuning=[TuningSpec(method=Method.HR_ORACLE, mode=SelectionMode.ORACLE_BEST,
                           r_values=[1, 2], rho_grid=[0.01, 0.1])],
        replications=3,
    )
    table = service.run_mc_study(config)
    row = table.rows[0]
    assert row.method == "HR_oracle"
    assert row.selection == "oracle_best"
    assert row.mean_r in (1.0, 2.0)
    assert len(table.replication_records) == 3


def test_failure_budget_raises_run_error(service):
    config = ExperimentConfig(
        design=SMALL_DESIGN,
        tuning=[TuningSpec(method=Method.ST, mode=SelectionMode.FIXED, r_values=[10])],
        replications=3,
    )
    with pytest.raises(RunError):
        service.run_mc_study(config)


def test_single_cell_sweep_is_a_tikhonov_fit(service):
    config = ExperimentConfig(
        design=SMALL_DESIGN,
        methods=[Method.TR],
        rho_sweep=RhoSweepSpec(r_values=[0], rho_grid=[0.1], rho_scale="absolute"),
        replications=1,
        seed=5,
    )
    table = service.run_rho_sweep(config)
    assert len(table.rows) == 1
    point = table.rows[0]
    data, beta, _ = draw_dataset(SimDesign(**{**SMALL_DESIGN, "seed": 5}), 0)
    expected = mse_against_truth(fit_tikhonov(data, empirical_spectrum(data), 0.1), beta)
    assert point.method == "TR"
    assert point.is_minimum
    assert point.mean_mse == pytest.approx(expected, rel=1e-10)
    assert table.ratios[0].ratio is None


def test_sweep_marks_one_minimum_per_curve(service):
    config = ExperimentConfig(
        design=SMALL_DESIGN,
        methods=[Method.HR],
        rho_sweep=RhoSweepSpec(r_values=[0, 1, 2], rho_grid=[0.001, 0.01, 0.1, 1.0]),
        replications=2,
    )
    table = service.run_rho_sweep(config)
    for r in (0, 1, 2):
        assert sum(p.is_minimum for p in table.curve(r)) == 1
    ratio = table.ratios[0]
    assert ratio.ratio == pytest.approx(ratio.min_tr / ratio.min_hr)


# Split prediction
def test_noiseless_split_prediction_is_exact(service):
    design = SimDesign(beta_choice=BetaChoice.BETA2, n=40, m=20, n_components=5, noise_sd=0.0)
    data, _, _ = draw_dataset(design)
    config = ExperimentConfig(
        tuning=[TuningSpec(method=Method.ST, mode=SelectionMode.FIXED, r_values=[5])],
        splits=5,
    )
    table = service.run_split_prediction(None, config, data=data)
    assert table.train_size == 20
    assert table.rows[0].mean_error < 1e-6
    again = service.run_split_prediction(None, config, data=data)
    assert again.records() == table.records()


def test_split_prediction_rejects_oracle_methods(service):
    data, _, _ = draw_dataset(SimDesign(**SMALL_DESIGN))
    config = ExperimentConfig(methods=[Method.TR_ORACLE])
    with pytest.raises(ConfigurationError):
        service.run_split_prediction(None, config, data=data)


# Configuration
def test_sweep_expands_designs():
    config = ExperimentConfig(
        sweep=SweepSpec(beta_choices=[BetaChoice.BETA1, BetaChoice.BETA2], alphas=[1.1, 2.0]),
        methods=[Method.HR],
        seed=9,
    )
    designs = config.designs()
    assert [(d.beta_choice, d.alpha_decay) for d in designs] == [
        (BetaChoice.BETA1, 1.1), (BetaChoice.BETA1, 2.0), (BetaChoice.BETA2, 1.1), (BetaChoice.BETA2, 2.0),
    ]
    assert all(d.seed == 9 for d in designs)


def test_configuration_validation():
    with pytest.raises(ValidationError):
        ExperimentConfig()
    with pytest.raises(ValidationError):
        ExperimentConfig(methods=[Method.HR], replications=0)
    with pytest.raises(ValidationError):
        TuningSpec(method=Method.HR_ORACLE, mode=SelectionMode.GCV)
    with pytest.raises(ValidationError):
        TuningSpec(method=Method.ST, r_values=[0])
    config = ExperimentConfig(methods=[Method.ST, Method.TR_ORACLE, Method.HR])
    assert [t.mode for t in config.tuning] == [SelectionMode.GCV, SelectionMode.ORACLE_BEST, SelectionMode.DOUBLE_CV]
    assert all(t.rule == SelectionRule.ONE_SE for t in config.tuning)


def test_fit_with_tuning_kfold_is_seeded(random_data):
    tuning = TuningSpec(method=Method.HR, mode=SelectionMode.KFOLD, r_values=[1, 2, 3], folds=5)
    first = fit_with_tuning(random_data, tuning, seed=4, replication=1)
    again = fit_with_tuning(random_data, tuning, seed=4, replication=1)
    assert (first.r, first.rho) == (again.r, again.rho)
    assert first.r in (1, 2, 3)


def test_format_execution_time():
    assert format_execution_time(850) == "850.0ms"
    assert format_execution_time(12345) == "12.3s"
    assert format_execution_time(125000) == "2m 5.0s"
    assert format_execution_time(125000, 250) == "2m 5.0s (500.0ms/rep)"


def test_tikhonov_gcv_stays_near_its_oracle(service):
    config = ExperimentConfig(
        design={"alpha_decay": 2.0, "n": 100, "m": 30, "n_components": 30},
        tuning=[
            TuningSpec(method=Method.TR, mode=SelectionMode.GCV),
            TuningSpec(method=Method.TR, mode=SelectionMode.ORACLE_BEST),
        ],
        replications=30,
        seed=5,
        workers=1,
    )
    table = service.run_mc_study(config)
    gcv = table.row("beta1", 2.0, "TR", "gcv").mean_mse
    best = table.row("beta1", 2.0, "TR", "oracle_best").mean_mse
    assert gcv < 3.0 * best


def test_reduced_well_spaced_table(service):
    config = ExperimentConfig(
        design={"alpha_decay": 1.1},
        tuning=[
            {"method": "TR", "mode": "gcv"},
            {"method": "HR", "mode": "double_cv", "folds": 5},
            {"method": "ST", "mode": "oracle_best"},
            {"method": "TR", "mode": "oracle_best"},
            {"method": "HR", "mode": "oracle_best"},
        ],
        replications=40,
        seed=2024,
        workers=1,
    )
    table = service.run_mc_study(config)
    for method, expected in TRUE_MSE[("beta1", 1.1)].items():
        assert table.row("beta1", 1.1, method, "oracle_best").mean_mse == pytest.approx(expected, abs=0.1)
    assert table.row("beta1", 1.1, "HR", "double_cv").mean_mse < table.row("beta1", 1.1, "TR", "gcv").mean_mse


def test_oracle_mse_table(service):
    config = ExperimentConfig(design=SMALL_DESIGN, methods=[Method.HR],
                              rho_sweep=RhoSweepSpec(rho_grid=[0.01, 0.1, 1.0]))
    table = service.oracle_mse(config)
    assert len(table.rows) == 3
    for row in table.rows:
        assert row.split_r == 5
        assert row.gap == pytest.approx(row.tr_mse - row.hr_mse)


# Command line
def _write_config(path, document):
    path.write_text(json.dumps(document))
    return path


def test_cli_writes_results_and_replications(tmp_path):
    config = _write_config(tmp_path / "config.json", {
        "design": SMALL_DESIGN, "tuning": [{"method": "TR", "mode": "gcv"}], "replications": 2,
    })
    out = tmp_path / "mc.json"
    code = main(["mc-bench", "--config", str(config), "--out", str(out), "--format", "json",
                 "--dump-replications", "--seed", "4"])
    assert code == EXIT_OK
    document = BenchDAO().load_results(out)
    assert document.metadata.seed == 4
    assert len(document.records) == 1
    dump = (tmp_path / "mc.json.replications.csv").read_text().splitlines()
    assert len(dump) == 3


def test_cli_simulate_then_fit(tmp_path):
    data_path = tmp_path / "data.csv"
    config = _write_config(tmp_path / "config.json", {"design": SMALL_DESIGN, "methods": ["HR"]})
    assert main(["simulate", "--config", str(config), "--out", str(data_path)]) == EXIT_OK
    out = tmp_path / "beta.csv"
    assert main(["fit", "--data", str(data_path), "--method", "TR", "--mode", "fixed",
                 "--rho", "0.1", "--out", str(out)]) == EXIT_OK
    assert out.read_text().splitlines()[0] == "t,beta"


def test_cli_exit_codes(tmp_path):
    bad_config = _write_config(tmp_path / "bad.json", {"methods": ["HR"], "replications": 0})
    assert main(["mc-bench", "--config", str(bad_config)]) == EXIT_CONFIG

    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["predict-split", "--data", str(empty), "--out", str(tmp_path / "p.csv")]) == EXIT_INGESTION

    failing = _write_config(tmp_path / "fail.json", {
        "design": SMALL_DESIGN,
        "tuning": [{"method": "ST", "mode": "fixed", "r_values": [10]}],
        "replications": 2,
    })
    assert main(["mc-bench", "--config", str(failing), "--out", str(tmp_path / "f.csv")]) == EXIT_RUN


# Full-scale reproduction of the well-spaced simulation table
TRUE_MSE = {
    ("beta1", 1.1): {"ST": 0.272, "TR": 0.516, "HR": 0.26},
    ("beta1", 2.0): {"ST": 0.286, "TR": 0.445, "HR": 0.274},
    ("beta2", 1.1): {"ST": 0.247, "TR": 0.494, "HR": 0.24},
    ("beta2", 2.0): {"ST": 0.241, "TR": 0.409, "HR": 0.234},
    ("beta3", 1.1): {"ST": 0.05, "TR": 0.055, "HR": 0.063},
    ("beta3", 2.0): {"ST": 0.049, "TR": 0.045, "HR": 0.051},
}
SLOW_REPS = 300


def _table_config(spacing="well_spaced"):
    return ExperimentConfig(
        design={"spacing": spacing},
        sweep={"beta_choices": ["beta1", "beta2", "beta3"], "alphas": [1.1, 2.0]},
        tuning=[
            {"method": "ST", "mode": "gcv"},
            {"method": "TR", "mode": "gcv"},
            {"method": "HR", "mode": "double_cv"},
            {"method": "ST", "mode": "oracle_best"},
            {"method": "TR", "mode": "oracle_best"},
            {"method": "HR", "mode": "oracle_best"},
        ],
        replications=SLOW_REPS,
        seed=2024,
        workers=4,
    )


@pytest.mark.slow
def test_well_spaced_table(service):
    table = service.run_mc_study(_table_config())
    for (beta, alpha), cells in TRUE_MSE.items():
        for method, expected in cells.items():
            row = table.row(beta, alpha, method, "oracle_best")
            # 300 replications: tolerance doubled from 0.06
            assert row.mean_mse == pytest.approx(expected, abs=0.12)
            assert row.mc_se <= 0.05
        hr = table.row(beta, alpha, "HR", "double_cv").mean_mse
        tr = table.row(beta, alpha, "TR", "gcv").mean_mse
        if beta == "beta3":
            assert abs(hr - tr) < 0.05
        else:
            assert tr - hr > 0.2


@pytest.mark.slow
def test_closely_spaced_table(service):
    table = service.run_mc_study(_table_config("closely_spaced"))
    reported_hr = {("beta1", 1.1): 0.935, ("beta1", 2.0): 0.725, ("beta2", 1.1): 0.887, ("beta2", 2.0): 0.681}
    for (beta, alpha), expected in reported_hr.items():
        hr = table.row(beta, alpha, "HR", "double_cv").mean_mse
        assert hr == pytest.approx(expected, abs=0.15)
        assert hr < table.row(beta, alpha, "TR", "gcv").mean_mse
        assert hr < table.row(beta, alpha, "ST", "gcv").mean_mse


@pytest.mark.slow
def test_sweep_ratios(service):
    config = ExperimentConfig(
        sweep={"beta_choices": ["beta1", "beta2"], "alphas": [1.1, 2.0]},
        methods=["HR"],
        replications=SLOW_REPS,
        seed=7,
        workers=4,
    )
    table = service.run_rho_sweep(config)
    expected = {1.1: 2.0, 2.0: 1.4}
    for ratio in table.ratios:
        assert ratio.ratio == pytest.approx(expected[ratio.alpha], abs=0.4)
