"""End-to-end feasibility run: realize a patch, work out every pair
interaction, render the spectra, search the gate intervals, and try to
configure the cluster blind.

Stages run in a fixed order (placement, integrals, spectra, spins,
configure); a failure inside one is re-raised as a StageError naming it, so
a batch caller can attribute losses. Every quantity in the report is a
plain float/int/str so the JSON dump is stable and diffable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .configure import (CouplingResults, calibrate_gate_time, infer_adjacency,
                        simulate_scan)
from .constants import HBAR_MEV_PS
from .errors import (DonorgateError, InvalidSpecError, NoCleanGateError,
                     PreconditionError, StageError)
from .integrals import exchange_curve, transfer_splitting_curve
from .lattice import place_dopants
from .scenario import Placement, RandomPlacementSpec, Scenario
from .spectra import gate_transitions, resolvable_gate_count
from .spins import SpinSystem, effective_coupling, sfg_gate

# blind configuration is only attempted on clusters small enough that the
# scan stays readable; larger patches report adjacency from thresholding
_CONFIGURE_MAX_CONTROLS = 4


def realize_placements(scenario: Scenario) -> Scenario:
    """Explicit-placement version of a scenario.

    Random specs are realized by Bernoulli occupation of the enumerated
    lattice sites; labels are assigned per role (C1.., Q1..) in site order,
    so a fixed placement seed gives a fixed labelled patch.
    """
    if scenario.placements is not None:
        return scenario
    rp = scenario.random_placement
    region = place_dopants(scenario.lattice, rp.concentration, dict(rp.mix),
                           rp.seed)
    counters = {"control": 0, "qubit": 0}
    prefix = {"control": "C", "qubit": "Q"}
    placements = []
    for site, species_name in region.placements:
        role = scenario.species_by_name(species_name).role
        counters[role] += 1
        placements.append(Placement(f"{prefix[role]}{counters[role]}",
                                    species_name, tuple(site.position)))
    return scenario.with_placements(placements)


def _stage(name):
    def wrap(fn):
        def run(*args, **kwargs):
            try:
                return fn(*args, **kwargs)
            except StageError:
                raise
            except DonorgateError as err:
                raise StageError(name, err) from err
        return run
    return wrap


@_stage("placement")
def _placement_stage(scenario):
    realized = realize_placements(scenario)
    return realized, realized.controls(), realized.qubits()


@_stage("integrals")
def _integrals_stage(scenario, controls, qubits):
    """Exchange for every control-qubit pair inside the cutoff, transfer for
    every control-control pair (the spectra stage needs all of them)."""
    exchange_rows = []
    couplings = {}
    for c_label, c_pos in controls:
        c_model = scenario.model_for(c_label)
        for q_label, q_pos in qubits:
            sep = float(np.linalg.norm(q_pos - c_pos))
            if sep <= 0.0:
                raise InvalidSpecError(
                    f"{c_label} and {q_label} share a site")
            if sep > scenario.pair_cutoff_a:
                continue
            q_model = scenario.model_for(q_label)
            excited = exchange_curve(c_model, q_model, True, (sep,))[0]
            ground = exchange_curve(c_model, q_model, False, (sep,))[0]
            exchange_rows.append({
                "control": c_label, "qubit": q_label,
                "separation_a": sep,
                "j_excited_mev": float(excited.exchange_splitting_mev),
                "j_ground_mev": float(ground.exchange_splitting_mev),
            })
            couplings[(c_label, q_label)] = float(excited.exchange_splitting_mev)

    transfer_rows = []
    transfer_results = []
    for i in range(len(controls)):
        for j in range(i + 1, len(controls)):
            (la, pa), (lb, pb) = controls[i], controls[j]
            sep = float(np.linalg.norm(pb - pa))
            if sep <= 0.0:
                raise InvalidSpecError(f"{la} and {lb} share a site")
            model = scenario.model_for(min(la, lb))
            row = transfer_splitting_curve(
                model, (sep,), scenario.spectral.base_transition_mev)[0]
            transfer_results.append(row)
            transfer_rows.append({
                "pair": (la, lb), "separation_a": sep,
                "transfer_mev": float(row.transfer_mev),
                "splitting_mev": float(row.splitting_mev),
            })
    return exchange_rows, couplings, transfer_rows, transfer_results


@_stage("spectra")
def _spectra_stage(scenario, transfer_results, seed):
    lines = gate_transitions(scenario, scenario.spectral, transfer_results,
                             seed=[seed, 0x53])
    resolvable = (resolvable_gate_count(lines,
                                        scenario.spectral.homogeneous_fwhm_mev,
                                        scenario.spectral.resolution_factor)
                  if lines else 0)
    rows = [{"control": l.gate_id, "energy_mev": float(l.energy_mev),
             "width_mev": float(l.width_mev),
             "shifts": {n: float(v) for n, v in l.shift_breakdown}}
            for l in lines]
    return lines, rows, resolvable


@_stage("spins")
def _spins_stage(scenario, couplings):
    records = []
    for c_label in sorted({c for c, _ in couplings}):
        ranked = sorted(((q, j) for (c, q), j in couplings.items()
                         if c == c_label and abs(j) >= scenario.min_gate_coupling_mev),
                        key=lambda item: abs(item[1]), reverse=True)
        if len(ranked) < 2:
            continue
        (qa, ja), (qb, jb) = ranked[:2]
        j_eff = effective_coupling(ja, jb, scenario.excitation_energy_mev)
        trio = SpinSystem(
            spins=((c_label, "control"), (qa, "qubit"), (qb, "qubit")),
            couplings={(0, 1): ja, (0, 2): jb},
        )
        try:
            report = sfg_gate(trio, c_label)
            clean = True
        except NoCleanGateError as err:
            report = err.best_candidate
            clean = False
        margins = {}
        for q in (qa, qb):
            model = scenario.model_for(q)
            if model.t1_s is not None:
                margins[q] = model.t1_s * 1e12 / report.duration_ps
        records.append({
            "control": c_label, "qubits": (qa, qb),
            "j1_mev": float(ja), "j2_mev": float(jb),
            "j_eff_mev": float(j_eff),
            "tau_scale_ps": float(np.pi * HBAR_MEV_PS / abs(j_eff)),
            "duration_ps": float(report.duration_ps),
            "residual_bits": float(report.control_residual_entanglement),
            "entangling_power": float(report.entangling_power),
            "clean": clean,
            "t1_margin": ({q: float(m) for q, m in margins.items()}
                          if margins else None),
        })
    return records


@_stage("configure")
def _configure_stage(scenario, lines, couplings, gate_records):
    n_controls = len({c for c, _ in couplings})
    if not lines or not couplings:
        return {"attempted": False, "reason": "nothing to configure"}
    if n_controls > _CONFIGURE_MAX_CONTROLS:
        return {"attempted": False,
                "reason": f"{n_controls} controls exceed the scan budget"}

    resolved = CouplingResults(transitions=tuple(lines), couplings=couplings)
    scan = simulate_scan(scenario, scenario.spectral, resolved)
    offsets = dict(scenario.qubit_epr_offsets())
    hypothesis = infer_adjacency(
        scan, scenario.detection_threshold_mev,
        homogeneous_fwhm_mev=scenario.spectral.homogeneous_fwhm_mev,
        epr_line_labels=offsets,
        epr_linewidth_mev=scenario.epr.linewidth_mev)

    truth = {}
    for (c, q), j in couplings.items():
        if abs(j) >= scenario.detection_threshold_mev:
            truth.setdefault(c, set()).add(q)
    line_of = {l.gate_id: l.energy_mev for l in lines}

    matches = []
    claimed = set()
    for entry in hypothesis.entries:
        control = min(line_of, key=lambda c: abs(line_of[c] - entry.optical_energy_mev))
        inferred = {q: j for q, j in entry.couplings}
        expected = truth.get(control, set())
        matches.append({
            "control": control,
            "optical_energy_mev": float(entry.optical_energy_mev),
            "ambiguous": entry.ambiguous,
            "inferred": {q: float(j) for q, j in sorted(inferred.items())},
            "true_qubits": sorted(expected),
            "match": set(inferred) == expected,
        })
        claimed.add(control)
    missed = sorted(c for c in truth if c not in claimed)
    recovered = (not missed) and all(m["match"] for m in matches)

    calibrations = []
    for record in gate_records:
        control = record["control"]
        if control not in claimed:
            continue
        try:
            cal = calibrate_gate_time(scenario, hypothesis, control, resolved)
        except (PreconditionError, NoCleanGateError):
            continue
        calibrations.append({
            "control": control, "qubits": tuple(cal.qubit_labels),
            "duration_ps": float(cal.duration_ps),
            "fidelity_to_target": float(cal.fidelity_to_target),
        })
    return {"attempted": True, "recovered": recovered, "entries": matches,
            "missed_controls": missed, "calibrations": calibrations}


@dataclass(frozen=True)
class FeasibilityReport:
    """Everything one patch produced, stage by stage."""

    scenario_name: str
    seed: int
    placements: tuple
    n_controls: int
    n_qubits: int
    exchange: tuple
    transfer: tuple
    lines: tuple
    resolvable_gates: int
    gates: tuple
    configuration: dict
    targets: dict

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario_name,
            "seed": self.seed,
            "placements": [{"label": l, "species": s, "position_a": list(p)}
                           for l, s, p in self.placements],
            "counts": {"controls": self.n_controls, "qubits": self.n_qubits},
            "exchange": list(self.exchange),
            "transfer": [dict(r, pair=list(r["pair"])) for r in self.transfer],
            "lines": list(self.lines),
            "resolvable_gates": self.resolvable_gates,
            "gates": [dict(g, qubits=list(g["qubits"])) for g in self.gates],
            "configuration": self.configuration,
            "targets": self.targets,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary_rows(self):
        """(key, value) pairs for the flat CSV export."""
        t = self.targets
        rows = [
            ("scenario", self.scenario_name),
            ("seed", self.seed),
            ("n_controls", self.n_controls),
            ("n_qubits", self.n_qubits),
            ("n_pairs_in_reach", len(self.exchange)),
            ("resolvable_gates", self.resolvable_gates),
            ("n_gates", len(self.gates)),
            ("qubit_target_met", t["qubits_met"]),
            ("gate_target_met", t["gates_met"]),
            ("configure_attempted", self.configuration.get("attempted", False)),
            ("configure_recovered", self.configuration.get("recovered", "")),
        ]
        for g in self.gates:
            rows.append((f"gate_{g['control']}_tau_ps", g["duration_ps"]))
            rows.append((f"gate_{g['control']}_residual_bits", g["residual_bits"]))
        return rows


def resolve_cluster(scenario: Scenario, seed: int = None):
    """(realized scenario, CouplingResults) for scan and inference work.

    Runs the placement, integrals and spectra stages only.
    """
    seed = scenario.seed if seed is None else int(seed)
    realized, controls, qubits = _placement_stage(scenario)
    _, couplings, _, transfer_results = _integrals_stage(realized, controls, qubits)
    lines, _, _ = _spectra_stage(realized, transfer_results, seed)
    return realized, CouplingResults(transitions=tuple(lines), couplings=couplings)


def run_feasibility(scenario: Scenario, seed: int = None) -> FeasibilityReport:
    """Run the full pipeline on one scenario and collect the report."""
    seed = scenario.seed if seed is None else int(seed)
    realized, controls, qubits = _placement_stage(scenario)
    exchange_rows, couplings, transfer_rows, transfer_results = \
        _integrals_stage(realized, controls, qubits)
    lines, line_rows, resolvable = _spectra_stage(realized, transfer_results, seed)
    gate_records = _spins_stage(realized, couplings)
    configuration = _configure_stage(realized, lines, couplings, gate_records)

    targets = {
        "qubits_met": len(qubits) >= scenario.n_qubit_target,
        "gates_met": len(gate_records) >= scenario.n_gate_target,
        "n_qubit_target": scenario.n_qubit_target,
        "n_gate_target": scenario.n_gate_target,
    }
    return FeasibilityReport(
        scenario_name=scenario.name,
        seed=seed,
        placements=tuple((p.label, p.species, p.position_a)
                         for p in realized.placements),
        n_controls=len(controls),
        n_qubits=len(qubits),
        exchange=tuple(exchange_rows),
        transfer=tuple(transfer_rows),
        lines=tuple(line_rows),
        resolvable_gates=resolvable,
        gates=tuple(gate_records),
        configuration=configuration,
        targets=targets,
    )


@dataclass(frozen=True)
class PatchStatistics:
    """Distribution of patch outcomes over independent doping realizations."""

    n_patches: int
    seed: int
    qubit_counts: dict
    control_counts: dict
    gate_counts: dict
    fraction_meeting_gate_target: float
    n_gate_target: int

    def to_dict(self) -> dict:
        return {
            "n_patches": self.n_patches,
            "seed": self.seed,
            "qubit_counts": {str(k): v for k, v in sorted(self.qubit_counts.items())},
            "control_counts": {str(k): v for k, v in sorted(self.control_counts.items())},
            "gate_counts": {str(k): v for k, v in sorted(self.gate_counts.items())},
            "fraction_meeting_gate_target": self.fraction_meeting_gate_target,
            "n_gate_target": self.n_gate_target,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary_rows(self):
        rows = [("n_patches", self.n_patches), ("seed", self.seed),
                ("n_gate_target", self.n_gate_target),
                ("fraction_meeting_gate_target", self.fraction_meeting_gate_target)]
        rows += [(f"patches_with_{k}_gates", v)
                 for k, v in sorted(self.gate_counts.items())]
        return rows


def _capable_controls(scenario, controls, qubits) -> int:
    """Controls with two or more qubit couplings at or above the gate floor.

    Counts from excited-state exchange only; no spectra, spins or scan work,
    so patch sweeps stay cheap.
    """
    n = 0
    for c_label, c_pos in controls:
        c_model = scenario.model_for(c_label)
        strong = 0
        for q_label, q_pos in qubits:
            sep = float(np.linalg.norm(q_pos - c_pos))
            if not 0.0 < sep <= scenario.pair_cutoff_a:
                continue
            j = exchange_curve(c_model, scenario.model_for(q_label),
                               True, (sep,))[0].exchange_splitting_mev
            if abs(j) >= scenario.min_gate_coupling_mev:
                strong += 1
                if strong >= 2:
                    n += 1
                    break
    return n


def patch_statistics(scenario: Scenario, n_patches: int,
                     seed: int = None) -> PatchStatistics:
    """Dope `n_patches` independent patches and tally what each could host."""
    if scenario.random_placement is None:
        raise InvalidSpecError("patch statistics need a random placement spec")
    if n_patches < 1:
        raise InvalidSpecError("n_patches must be >= 1")
    seed = scenario.seed if seed is None else int(seed)

    children = np.random.SeedSequence(seed).spawn(n_patches)
    qubit_counts, control_counts, gate_counts = {}, {}, {}
    met = 0
    rp = scenario.random_placement
    for child in children:
        patch_seed = int(child.generate_state(1)[0])
        patch = replace(scenario, random_placement=RandomPlacementSpec(
            rp.concentration, rp.mix, patch_seed))
        realized, controls, qubits = _placement_stage(patch)
        try:
            gates = _capable_controls(realized, controls, qubits)
        except DonorgateError as err:
            raise StageError("integrals", err) from err
        qubit_counts[len(qubits)] = qubit_counts.get(len(qubits), 0) + 1
        control_counts[len(controls)] = control_counts.get(len(controls), 0) + 1
        gate_counts[gates] = gate_counts.get(gates, 0) + 1
        if gates >= scenario.n_gate_target:
            met += 1
    return PatchStatistics(
        n_patches=n_patches,
        seed=seed,
        qubit_counts=qubit_counts,
        control_counts=control_counts,
        gate_counts=gate_counts,
        fraction_meeting_gate_target=met / n_patches,
        n_gate_target=scenario.n_gate_target,
    )
