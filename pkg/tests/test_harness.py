import json
import subprocess
import sys
from dataclasses import replace

import numpy as np
import pytest

from bayesfem import harness
from bayesfem.cli import main
from bayesfem.errors import ConfigError, InvalidInputError, SamplerError
from bayesfem.harness import (
    MEASURED_FREQUENCIES,
    Report,
    builtin_case,
    compare,
    emit_report,
    load_report,
    parse_config,
    percent_error,
    run_case,
    write_config,
)
from bayesfem.samplers import Chain


def write(tmp_path, text, name="case.ini"):
    path = tmp_path / name
    path.write_text(text)
    return path


class TestBuiltinCases:
    def test_young5(self):
        cs = builtin_case("young5")
        assert len(cs.space) == 5
        np.testing.assert_array_equal(cs.space.initial, [2.4e11] * 5)
        np.testing.assert_array_equal(cs.space.sigma, [2e11] * 5)
        assert cs.space.lower.tolist() == [1.7e11] * 5 and cs.space.upper.tolist() == [2.5e11] * 5
        assert [e.elements for e in cs.space.entries] == [(0, 10), (10, 20), (20, 30), (30, 40), (40, 50)]
        assert cs.n_samples == 1000 and cs.data.beta == 1.0

    def test_inertia_area4(self):
        cs = builtin_case("inertia_area4")
        np.testing.assert_array_equal(cs.space.sigma, [5e-9, 5e-9, 5e-4, 5e-4])
        np.testing.assert_array_equal(cs.space.upper, [7.5e-9, 7.5e-9, 9e-4, 9e-4])
        np.testing.assert_array_equal(cs.space.lower, [3.5e-9, 3.5e-9, 4.5e-4, 4.5e-4])
        assert cs.model.youngs_modulus_nominal == 2.1e11

    def test_unknown_name_lists_valid_names(self):
        with pytest.raises(InvalidInputError, match="young5, inertia_area4"):
            builtin_case("bogus")

    def test_measured_frequencies(self):
        assert builtin_case("young5").data.frequencies == (31.9, 197.9, 553.0, 1082.2, 1781.5)


class TestConfig:
    def test_seed_override_only(self, tmp_path):
        cs = parse_config(write(tmp_path, "[case]\nbase = young5\n[sampler]\nseed = 17\n"))
        assert cs == replace(builtin_case("young5"), seed=17)

    def test_inverted_bounds_named(self, tmp_path):
        text = "[case]\nbase = young5\n\n[parameters]\nlower = 3e11, 3e11, 3e11, 3e11, 3e11\n"
        with pytest.raises(ConfigError) as info:
            parse_config(write(tmp_path, text))
        assert info.value.key == "parameters.lower"
        assert info.value.line == 5

    def test_malformed_number(self, tmp_path):
        with pytest.raises(ConfigError, match=r"sampler\.samples, line 4"):
            parse_config(write(tmp_path, "[case]\nbase = young5\n[sampler]\nsamples = lots\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config(write(tmp_path, "[case]\nbase = young5\n[sampler]\nwarp = 9\n"))

    def test_missing_key_without_base(self, tmp_path):
        with pytest.raises(ConfigError, match="beam.length"):
            parse_config(write(tmp_path, "[beam]\nwidth = 0.06\n"))

    def test_vector_beta(self, tmp_path):
        cs = parse_config(write(tmp_path, "[case]\nbase = young5\n[data]\nbeta = 1, 2, 3, 4, 5\n"))
        np.testing.assert_array_equal(cs.data.beta_vector, [1, 2, 3, 4, 5])

    def test_area_override(self, tmp_path):
        cs = parse_config(write(tmp_path, "[case]\nbase = inertia_area4\n[parameters]\ninitial = 5e-9, 5e-9, 8e-4, 8e-4\n"))
        assert cs.space.initial[2] == 8e-4

    @pytest.mark.parametrize("name", ["young5", "inertia_area4"])
    def test_round_trip(self, tmp_path, name):
        cs = replace(builtin_case(name), seed=3, n_samples=77, metric="absolute",
                     sampler=harness.SamplerConfig(name="hmc", step_size=0.02, burn_in=5))
        write_config(cs, tmp_path / "c.ini")
        assert parse_config(tmp_path / "c.ini") == cs

    def test_full_config_without_base(self, tmp_path):
        write_config(builtin_case("young5"), tmp_path / "c.ini")
        text = (tmp_path / "c.ini").read_text()
        assert "base" not in text
        assert parse_config(tmp_path / "c.ini") == builtin_case("young5")


class TestReport:
    def test_percent_error_arithmetic(self):
        assert percent_error(541.1, 553.0) == pytest.approx(2.15, abs=5e-3)
        assert percent_error(553.0, 553.0) == 0.0

    def test_single_sample_run(self, tmp_path):
        cs = replace(builtin_case("young5"), n_samples=1)
        res = run_case(cs, tmp_path)
        rep = res.report
        assert rep.posterior_mean == rep.initial == list(res.chain.samples[0])
        pd = cs.posterior()
        np.testing.assert_array_equal(rep.updated_frequencies, pd.model_frequencies(rep.posterior_mean))
        assert rep.measured_frequencies == list(MEASURED_FREQUENCIES)

    def test_report_consistency_and_files(self, tmp_path):
        cs = replace(builtin_case("inertia_area4"), n_samples=60, seed=2)
        res = run_case(cs, tmp_path)
        rep = res.report
        assert set(p.name for p in tmp_path.iterdir()) == {
            "chain.csv", "report.txt", "report.json", "config.ini", "timing.json"
        }
        chain = Chain.from_csv(tmp_path / "chain.csv")
        mean = chain.samples[rep.burn_in:].mean(axis=0)
        np.testing.assert_array_equal(mean, rep.posterior_mean)
        f = cs.posterior().model_frequencies(mean)
        np.testing.assert_array_equal(f, rep.updated_frequencies)
        np.testing.assert_array_equal(rep.updated_errors_pct, percent_error(f, MEASURED_FREQUENCIES))
        assert load_report(tmp_path / "report.json") == rep
        assert parse_config(tmp_path / "config.ini") == cs
        assert "wall_time_s" in json.loads((tmp_path / "timing.json").read_text())
        text = (tmp_path / "report.txt").read_text()
        assert "Measured (Hz)" in text and "Updated (Hz)" in text

    def test_json_round_trip_is_exact(self, tmp_path):
        rep = Report("x", "mh", 0, 1, 0, ["a"], [0.1], [1 / 3], [0.0], [31.9], [32.7], [2.5078369905956],
                     [np.nextafter(31.9, 40.0)], [0.0], 1.0, None, None, 1, 1)
        emit_report(rep, tmp_path / "r.json", "json")
        assert load_report(tmp_path / "r.json") == rep

    def test_unknown_format(self, tmp_path):
        rep = run_case(replace(builtin_case("young5"), n_samples=1)).report
        with pytest.raises(InvalidInputError):
            emit_report(rep, tmp_path / "r", "xml")

    def test_unwritable_path(self, tmp_path):
        rep = run_case(replace(builtin_case("young5"), n_samples=1)).report
        with pytest.raises(OSError):
            emit_report(rep, tmp_path / "missing" / "r.txt")

    def test_sampler_failure_keeps_partial_chain(self, tmp_path, monkeypatch):
        real = harness.mh_sample

        def failing(target, theta0, n, seed, widths):
            partial = real(target, theta0, 20, seed, widths=widths)
            raise SamplerError("stuck", partial_chain=partial)

        monkeypatch.setattr(harness, "mh_sample", failing)
        res = run_case(replace(builtin_case("young5"), n_samples=100), tmp_path)
        assert res.report.error == "stuck"
        assert res.report.n_retained == 20
        assert res.report.posterior_mean is not None
        assert len(Chain.from_csv(tmp_path / "chain.csv")) == 20
        assert "ERROR: stuck" in (tmp_path / "report.txt").read_text()

    def test_compare_layout(self, tmp_path):
        cs = replace(builtin_case("young5"), n_samples=3)
        results = compare(cs, tmp_path)
        assert set(results) == {"mh", "slice", "hmc"}
        for name in results:
            assert (tmp_path / name / "chain.csv").exists()
        text = (tmp_path / "compare.txt").read_text()
        assert "mh" in text and "slice" in text and "hmc" in text


class TestCli:
    def test_run(self, tmp_path, capsys):
        code = main(["run", "--case", "young5", "--sampler", "slice", "--samples", "15", "--seed", "1",
                     "--out", str(tmp_path)])
        assert code == 0
        assert "Updated (Hz)" in capsys.readouterr().out
        assert load_report(tmp_path / "report.json").sampler == "slice"

    def test_run_config_file(self, tmp_path):
        cfg = write(tmp_path, "[case]\nbase = inertia_area4\n[sampler]\nname = mh\nsamples = 12\n")
        assert main(["run", "--case", str(cfg), "--out", str(tmp_path / "o"), "--prior-mean", "nominal"]) == 0
        assert "prior_mean = nominal" in (tmp_path / "o" / "config.ini").read_text()

    def test_compare(self, tmp_path, capsys):
        assert main(["compare", "--case", "young5", "--samples", "3", "--out", str(tmp_path)]) == 0
        assert "Mean" in capsys.readouterr().out

    def test_unknown_case_exit_code(self, tmp_path, capsys):
        assert main(["run", "--case", "bogus", "--out", str(tmp_path)]) == 2
        assert "young5" in capsys.readouterr().err

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg = write(tmp_path, "[case]\nbase = young5\n[sampler]\nsamples = -3\n")
        assert main(["run", "--case", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "error:" in capsys.readouterr().err

    def test_sampler_failure_exit_code(self, tmp_path, monkeypatch):
        def failing(*args, **kwargs):
            raise SamplerError("stuck", partial_chain=None)

        monkeypatch.setattr(harness, "mh_sample", failing)
        assert main(["run", "--case", "young5", "--samples", "5", "--out", str(tmp_path)]) == 1

    def test_module_entry_point(self, tmp_path):
        proc = subprocess.run(
            [sys.executable, "-m", "bayesfem", "run", "--case", "young5", "--samples", "2", "--out", str(tmp_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr

    def test_usage_error(self):
        with pytest.raises(SystemExit) as info:
            main(["run", "--case", "young5"])
        assert info.value.code == 2
