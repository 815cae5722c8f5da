import io
import json
import math
import shutil
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings

from core.exceptions import ConfigurationError
from simulations.config import parse_config
from simulations.writers import json_safe, write_json, write_table


class ParseConfigTests(SimpleTestCase):
    def test_valid_fock_config(self):
        config = parse_config("scenario = fock\nn = 2\ntau_max = 10")
        self.assertEqual(config.scenario, "fock")
        self.assertEqual((config.params["n1"], config.params["n2"]), (2, 2))
        self.assertEqual(config.params["tau_max"], 10.0)

    def test_range_error_reports_line(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_config("scenario = fock\nn = -1")
        self.assertEqual([line for line, _ in ctx.exception.issues], [2])
        self.assertEqual(ctx.exception.exit_status, 1)

    def test_empty_file_misses_scenario(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_config("")
        self.assertIn("missing scenario", ctx.exception.message)

    def test_all_errors_collected(self):
        text = "# coherent run\nscenario = coherent\nmean = -3\nbogus = 1\neps_tail = 0.1\nmean = 4\n"
        with self.assertRaises(ConfigurationError) as ctx:
            parse_config(text)
        lines = [line for line, _ in ctx.exception.issues]
        self.assertEqual(lines, [3, 4, 5, 6])

    def test_coherent_mean_range_errors_carry_lines(self):
        with self.assertRaises(ConfigurationError) as ctx:
            parse_config("scenario = coherent\nmean1 = 4\nmean2 = 0\nreference_mean = -1\n")
        self.assertEqual([line for line, _ in ctx.exception.issues], [3, 4])

    def test_comments_lists_and_complex_values(self):
        text = (
            "scenario = lambda0-check  # trailing comment\n"
            "\n"
            "e1 = 0.1j\n"
            "omega2 = 1+0.5j\n"
            "scales = 0.1, 0.2, 0.4\n"
        )
        config = parse_config(text)
        self.assertEqual(config.params["e1"], 0.1j)
        self.assertEqual(config.params["omega2"], 1 + 0.5j)
        self.assertEqual(config.params["scales"], [0.1, 0.2, 0.4])

    def test_descending_list_rejected(self):
        with self.assertRaises(ConfigurationError):
            parse_config("scenario = scan\nmeans = 30, 10")

    def test_overrides_win(self):
        config = parse_config("scenario = fock\nn = 1\nworkers = 3", {"scenario": "fock", "workers": 2, "output": "x"})
        self.assertEqual(config.workers, 2)
        self.assertEqual(config.output, Path("x"))

    @override_settings(SIMULATION={"EPS_TAIL": 1e-8, "WORKERS": 1, "OUTPUT_DIR": "out", "LONG_RUNNING_MEAN": 500.0})
    def test_long_running_gate(self):
        with self.assertRaises(ConfigurationError):
            parse_config("scenario = coherent\nmean = 1000")
        config = parse_config("scenario = coherent\nmean = 1000", {"long_running": True})
        self.assertEqual(config.params["mean1"], 1000.0)

    def test_hash_ignores_output_and_workers(self):
        a = parse_config("scenario = fock\nn = 1", {"workers": 1, "output": "a"})
        b = parse_config("scenario = fock\nn = 1", {"workers": 4, "output": "b"})
        self.assertEqual(a.config_hash, b.config_hash)
        self.assertNotEqual(a.config_hash, parse_config("scenario = fock\nn = 2").config_hash)


class WriterTests(SimpleTestCase):
    def setUp(self):
        self.out = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.out, ignore_errors=True)

    def test_table_format(self):
        path = write_table(self.out / "t.csv", ["x", "q", "n", "mode"], [(0.1, float("nan"), 3, "resonant")])
        self.assertEqual(path.read_bytes(), b"x,q,n,mode\r\n0.10000000000000001,,3,resonant\r\n")

    def test_json_has_no_nan(self):
        self.assertEqual(json_safe({"a": [1.0, float("nan")], "b": float("inf")}), {"a": [1.0, None], "b": None})
        path = write_json(self.out / "t.json", {"slope": float("nan"), "rows": [(0.5, float("-inf"))]})
        text = path.read_text(encoding="utf-8")
        self.assertNotIn("NaN", text)
        self.assertNotIn("Infinity", text)
        self.assertEqual(json.loads(text), {"rows": [[0.5, None]], "slope": None})


class SimulateCommandTests(SimpleTestCase):
    def setUp(self):
        self.out = Path(tempfile.mkdtemp())
        self.addCleanup(shutil.rmtree, self.out, ignore_errors=True)

    def write_config(self, text):
        path = self.out / "run.cfg"
        path.write_text(text, encoding="utf-8")
        return str(path)

    def simulate(self, *args, **options):
        stdout, stderr = io.StringIO(), io.StringIO()
        call_command("simulate", *args, stdout=stdout, stderr=stderr, **options)
        return stdout.getvalue()

    def read_csv(self, name, directory=None):
        return pd.read_csv((directory or self.out) / name)

    def read_json(self, name):
        text = (self.out / name).read_text(encoding="utf-8")
        self.assertNotIn("NaN", text)
        return json.loads(text)

    def test_fock_single_pair(self):
        config = self.write_config("scenario = fock\nn = 1\ntau_max = 20\ntau_steps = 400\n")
        output = self.simulate(config=config, out=str(self.out))
        self.assertIn("fock finished", output)
        frame = self.read_csv("fock.csv")
        self.assertEqual(len(frame), 401)
        self.assertLess(np.max(np.abs(frame["pump_mean"] - np.cos(frame["tau"]) ** 2)), 1e-10)
        self.assertTrue(math.isnan(frame["q_gen"][0]))
        raw = (self.out / "fock.csv").read_bytes()
        self.assertTrue(raw.startswith(b"tau,pump_mean,gen_mean,pump_var,gen_var,q_pump,q_gen,var_diff\r\n0,1,0,"))

    def test_phase_gate_truth_table(self):
        self.simulate("phase-gate", out=str(self.out))
        payload = self.read_json("phase-gate.json")
        overlaps = [complex(r["overlap_real"], r["overlap_imag"]) for r in payload["truth_table"]]
        self.assertEqual([r["input"] for r in payload["truth_table"]][-1], "|1,1,0,0>")
        for expected, overlap in zip((1, 1, 1, -1), overlaps):
            self.assertLess(abs(overlap - expected), 1e-10)

    def test_manifest(self):
        self.simulate("mf-scan", out=str(self.out))
        manifest = self.read_json("manifest.json")
        self.assertEqual(manifest["scenario"], "mf-scan")
        self.assertEqual(manifest["outputs"], ["mf-scan.csv"])
        self.assertEqual(len(manifest["config_sha256"]), 64)
        frame = self.read_csv("mf-scan.csv")
        self.assertEqual(list(frame.columns), ["b0", "z_conv", "efficiency"])
        self.assertEqual(list(frame["b0"]), [10.0, 30.0, 100.0, 300.0, 1000.0])

    def test_lambda0_check(self):
        self.simulate("lambda0-check", out=str(self.out))
        frame = self.read_csv("lambda0-check.csv")
        self.assertEqual(list(frame.columns), ["scale", "exact", "two_lambda0", "rel_err"])
        self.assertEqual(len(frame), 3)
        self.assertTrue(np.all(frame["rel_err"] < 1e-2))
        payload = self.read_json("lambda0-check.json")
        self.assertAlmostEqual(payload["lambda0"], 2 * 0.01 / (100 * 1.01), delta=1e-12)

    def test_lambda0_check_without_generated_field_writes_null(self):
        config = self.write_config("scenario = lambda0-check\ne1 = 0\n")
        self.simulate(config=config, out=str(self.out))
        payload = self.read_json("lambda0-check.json")
        self.assertIsNone(payload["ladder_slope"])
        self.assertEqual(payload["lambda0"], 0.0)
        frame = self.read_csv("lambda0-check.csv")
        self.assertTrue(frame["rel_err"].isna().all())

    def test_classical(self):
        config = self.write_config("scenario = classical\nxi_max = 5\nxi_steps = 50\n")
        self.simulate(config=config, out=str(self.out))
        frame = self.read_csv("classical.csv")
        self.assertEqual(
            list(frame.columns),
            ["xi", "I_omega1", "I_omega2", "I_e1", "I_e2", "m1", "m2", "m3", "m4"],
        )
        self.assertEqual(len(frame), 51)
        for label in ("m1", "m2", "m3", "m4"):
            self.assertLess(np.max(np.abs(frame[label] - frame[label][0])), 1e-8 * (frame["m1"][0] + frame["m2"][0]))

    def test_compare_small_mean(self):
        config = self.write_config("scenario = compare\nmean = 6\ntau_steps = 200\n")
        self.simulate(config=config, out=str(self.out))
        frame = self.read_csv("compare.csv")
        self.assertEqual(list(frame.columns), ["tau", "quantum_pump_mean", "meanfield_b", "difference"])
        self.assertEqual(len(frame), 201)
        self.assertAlmostEqual(frame["quantum_pump_mean"][0], 6.0, delta=1e-6)
        self.assertEqual(frame["meanfield_b"][0], 6.0)
        np.testing.assert_allclose(frame["difference"], frame["quantum_pump_mean"] - frame["meanfield_b"], atol=1e-12)
        summary = self.read_json("compare.json")
        self.assertEqual(summary["mean"], 6.0)
        self.assertEqual(set(summary["first_minimum"]), {"quantum", "meanfield"})
        self.assertLess(summary["first_minimum"]["meanfield"]["value"], 6.0)

    def test_scan_both_modes(self):
        config = self.write_config("scenario = scan\nmeans = 4, 10\nmode = both\ntau_steps = 200\n")
        self.simulate(config=config, out=str(self.out))
        frame = self.read_csv("scan.csv")
        self.assertEqual(list(frame.columns), ["mean", "tau_min", "value", "mode"])
        self.assertEqual(list(frame["mode"]), ["resonant", "resonant", "constant", "constant"])
        resonant = frame[frame["mode"] == "resonant"]["tau_min"].tolist()
        constant = frame[frame["mode"] == "constant"]["tau_min"].tolist()
        self.assertLess(resonant[0], resonant[1])
        self.assertGreater(constant[0], constant[1])

    def test_config_error_exit_status(self):
        config = self.write_config("scenario = fock\nn = -1\n")
        with self.assertRaises(CommandError) as ctx:
            self.simulate(config=config, out=str(self.out))
        self.assertEqual(ctx.exception.returncode, 1)
        self.assertFalse((self.out / "fock.csv").exists())

    def test_solver_error_exit_status_and_cleanup(self):
        # omega1 = e1 = 0 makes the field equations singular
        config = self.write_config("scenario = classical\nomega1 = 0\ne1 = 0\nxi_max = 1\n")
        with self.assertRaises(CommandError) as ctx:
            self.simulate(config=config, out=str(self.out))
        self.assertEqual(ctx.exception.returncode, 2)
        self.assertIn("classical", str(ctx.exception))
        self.assertEqual(sorted(p.name for p in self.out.iterdir()), ["run.cfg"])

    def test_outputs_identical_across_worker_counts(self):
        config = self.write_config("scenario = coherent\nmean = 6\ntau_max = 10\ntau_steps = 100\n")
        first, second = self.out / "one", self.out / "two"
        self.simulate(config=config, out=str(first), workers=1)
        self.simulate(config=config, out=str(second), workers=2)
        self.assertEqual((first / "coherent.csv").read_bytes(), (second / "coherent.csv").read_bytes())
        columns = list(self.read_csv("coherent.csv", first).columns)
        self.assertIn("weight_mass", columns)
        self.assertIn("tail_mass", columns)

    def test_meanfield_trajectory(self):
        self.simulate("meanfield", out=str(self.out))
        frame = self.read_csv("meanfield.csv")
        self.assertEqual(frame["b"][0], 100.0)
        self.assertEqual(list(frame.columns), ["xi", "b", "b_dot"])
