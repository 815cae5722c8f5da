"""
Scenario execution. One function per scenario, each writing its tables
through an OutputSet; ``run`` adds the manifest and cleans up after failures.
"""
import logging
import time
from collections import OrderedDict

import numpy as np

from adiabatic.solvers import (
    adiabatic_branch,
    build_five_level,
    hermiticity_defect,
    lambda0,
    lambda0_ladder,
)
from classical.solvers import classical_trajectory
from core.exceptions import SimulationError
from core.models import FieldState, PhysicalParams, TrajectoryRecord
from core.utils import xi_from_zeta
from ensemble.solvers import (
    CONSTANT,
    RESONANT,
    build_ensemble,
    conversion_scan,
    ensemble_observables,
    first_minimum,
)
from fock.solvers import basis_amplitudes, build_sector, fock_series, phase_gate_truth_table
from meanfield.solvers import conversion_distance, integrate_meanfield, meanfield_scan
from simulations.config import RunConfig
from simulations.writers import OutputSet, write_json, write_manifest, write_record, write_table

logger = logging.getLogger(__name__)


def _fields(params) -> FieldState:
    return FieldState(params["omega1"], params["omega2"], params["e1"], params["e2"])


def _tau_grid(params) -> np.ndarray:
    if params.get("tau_grid"):
        return np.asarray(params["tau_grid"], dtype=float)
    return np.linspace(0.0, params["tau_max"], params["tau_steps"] + 1)


# ============================================================================
# SCENARIOS
# ============================================================================
def run_lambda0_check(config: RunConfig, outputs: OutputSet):
    p = config.params
    fs = _fields(p)
    params = PhysicalParams(p["kappa"], p["delta"], p["gamma1"], p["gamma2"])
    rows, slope = lambda0_ladder(fs, params, p["scales"])
    write_table(outputs.path("lambda0-check.csv"), ["scale", "exact", "two_lambda0", "rel_err"], rows)
    m = build_five_level(fs, params)
    branch = adiabatic_branch(m)
    write_json(
        outputs.path("lambda0-check.json"),
        {
            "branch_real": branch.real,
            "branch_imag": branch.imag,
            "lambda0": lambda0(fs, params),
            "hermiticity_defect": hermiticity_defect(m),
            "ladder_slope": slope,
        },
    )


def run_classical(config: RunConfig, outputs: OutputSet):
    p = config.params
    if "zeta_max" in p:
        xi_max = float(xi_from_zeta(PhysicalParams(p["kappa"], p["delta"]), p["zeta_max"]))
    else:
        xi_max = p["xi_max"]
    grid = np.linspace(0.0, xi_max, p["xi_steps"] + 1)
    record = classical_trajectory(_fields(p), grid, tol=p["tol"])
    write_record(outputs.path("classical.csv"), record)


def run_fock(config: RunConfig, outputs: OutputSet):
    p = config.params
    s = build_sector(p["n1"], p["n2"], p["n3"], p["n4"])
    record = fock_series(s, basis_amplitudes(s), _tau_grid(p))
    write_record(outputs.path("fock.csv"), record)


def run_coherent(config: RunConfig, outputs: OutputSet):
    p = config.params
    fixed = None
    if p["denominator"] == CONSTANT:
        fixed = float(round(p.get("reference_mean", p["mean1"])))
    e = build_ensemble(p["mean1"], p["mean2"], p["eps_tail"], denominator=fixed)
    series = ensemble_observables(e, _tau_grid(p), config.workers)
    write_record(outputs.path("coherent.csv"), series.record)


def run_scan(config: RunConfig, outputs: OutputSet):
    p = config.params
    modes = (RESONANT, CONSTANT) if p["mode"] == "both" else (p["mode"],)
    rows = []
    for mode in modes:
        for row in conversion_scan(
            p["means"],
            mode,
            reference_mean=p.get("reference_mean"),
            eps_tail=p["eps_tail"],
            steps=p["tau_steps"],
            workers=config.workers,
        ):
            rows.append((row.mean, row.tau_min, row.value, row.mode))
    write_table(outputs.path("scan.csv"), ["mean", "tau_min", "value", "mode"], rows)


def run_meanfield(config: RunConfig, outputs: OutputSet):
    p = config.params
    grid = np.linspace(0.0, p["xi_max"], p["xi_steps"] + 1)
    record = integrate_meanfield(p["b0"], p["xi_max"], grid)
    write_record(outputs.path("meanfield.csv"), record)


def run_mf_scan(config: RunConfig, outputs: OutputSet):
    rows = meanfield_scan(config.params["b0_values"])
    write_table(outputs.path("mf-scan.csv"), ["b0", "z_conv", "efficiency"], rows)


def run_phase_gate(config: RunConfig, outputs: OutputSet):
    tau = config.params["tau"]
    table = [
        {"input": label, "overlap_real": z.real, "overlap_imag": z.imag}
        for label, z in phase_gate_truth_table(tau)
    ]
    write_json(outputs.path("phase-gate.json"), {"tau": tau, "truth_table": table})


def run_compare(config: RunConfig, outputs: OutputSet):
    p = config.params
    mean = p["mean"]
    tau_max = p.get("tau_max") or 2.0 * conversion_distance(mean)
    grid = np.linspace(0.0, tau_max, p["tau_steps"] + 1)
    e = build_ensemble(mean, mean, p["eps_tail"])
    quantum = ensemble_observables(e, grid, config.workers).pump_mean
    meanfield = integrate_meanfield(mean, tau_max, grid).columns["b"]
    record = TrajectoryRecord(
        "tau",
        grid,
        OrderedDict(quantum_pump_mean=quantum, meanfield_b=meanfield, difference=quantum - meanfield),
    )
    write_record(outputs.path("compare.csv"), record)

    summary = {}
    for label, values in (("quantum", quantum), ("meanfield", meanfield)):
        try:
            tau_min, value = first_minimum(grid, values)
            summary[label] = {"tau_min": tau_min, "value": value}
        except SimulationError as exc:
            logger.warning(f"compare: no {label} minimum on the grid ({exc.message})")
            summary[label] = None
    write_json(outputs.path("compare.json"), {"mean": mean, "first_minimum": summary})


SCENARIO_RUNNERS = {
    "lambda0-check": run_lambda0_check,
    "classical": run_classical,
    "fock": run_fock,
    "coherent": run_coherent,
    "scan": run_scan,
    "meanfield": run_meanfield,
    "mf-scan": run_mf_scan,
    "phase-gate": run_phase_gate,
    "compare": run_compare,
}


def run(config: RunConfig) -> list:
    """
    Execute one scenario and write its tables plus manifest.json.

    Returns:
        Paths of the written files

    Raises:
        SimulationError: with the scenario name in the message; nothing the
            run wrote is left behind
    """
    outputs = OutputSet(config.output)
    started = time.perf_counter()
    logger.info(f"running {config.scenario} into {config.output} (config {config.config_hash[:12]})")
    try:
        SCENARIO_RUNNERS[config.scenario](config, outputs)
        write_manifest(outputs, config, time.perf_counter() - started)
    except SimulationError as exc:
        outputs.discard()
        logger.error(f"❌ {config.scenario} failed: {exc}", exc_info=True)
        exc.message = f"{config.scenario}: {exc.message}"
        exc.args = (exc.message,)
        raise
    except Exception:
        outputs.discard()
        logger.error(f"❌ {config.scenario} failed unexpectedly", exc_info=True)
        raise
    logger.info(f"✅ {config.scenario} done in {time.perf_counter() - started:.2f}s")
    return list(outputs.paths)
