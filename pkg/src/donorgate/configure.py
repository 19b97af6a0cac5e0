"""Simulated configuration of a gate cluster: the EPR-vs-optical scan,
adjacency inference from it, and gate-time calibration.

The measurement model: sweep an optical frequency; any control whose
transition lies within the homogeneous width of it is excited. While a
control is excited, every qubit EPR line coupled to it splits into two
components displaced by half the coupling (both signs, equal weight, so m
simultaneously excited couplings fan a line into 2^m components). Rows are
sums of unit-height Lorentzians over the EPR axis. Inference reads the map
back without touching ground truth: resonance positions from the rows whose
deviation from the baseline spectrum steps up, couplings from the splitting
of each vanished EPR line.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import (DependencyError, InvalidSpecError, NoCleanGateError,
                     PreconditionError)
from .spectra import SpectralModel, TransitionLine
from .spins import (GateReport, SpinSystem, gate_fidelity,
                    induced_qubit_operator, sfg_gate)

# beyond this many simultaneously split couplings the 2^m fan is truncated
# to the strongest ones; far outside any configuration of interest
_MAX_SPLIT = 12


@dataclass(frozen=True)
class EprModel:
    """EPR measurement parameters: Lorentzian linewidth (FWHM) and how the
    per-qubit Zeeman offsets are fixed (explicit values, or a Gaussian FWHM
    spread sampled by the owning scenario)."""

    linewidth_mev: float
    zeeman_offsets_mev: tuple = None  # ((label, meV), ...) explicit
    zeeman_spread_fwhm_mev: float = None

    def __post_init__(self):
        if self.linewidth_mev <= 0:
            raise InvalidSpecError("EPR linewidth must be positive")
        if self.zeeman_offsets_mev is None and self.zeeman_spread_fwhm_mev is None:
            raise InvalidSpecError("give explicit zeeman offsets or a spread")
        if self.zeeman_offsets_mev is not None:
            object.__setattr__(self, "zeeman_offsets_mev",
                               tuple((str(l), float(v)) for l, v in self.zeeman_offsets_mev))


@dataclass(frozen=True)
class CouplingResults:
    """Resolved inputs the scan is rendered from: the controls' optical
    lines and the control-qubit exchange couplings (meV, excited-state)."""

    transitions: tuple
    couplings: tuple  # (((control_label, qubit_label), J_mev), ...)

    def __post_init__(self):
        object.__setattr__(self, "transitions", tuple(self.transitions))
        raw = (self.couplings.items() if hasattr(self.couplings, "items")
               else self.couplings)
        object.__setattr__(
            self, "couplings",
            tuple(sorted(((str(c), str(q)), float(j)) for (c, q), j in raw)))

    def coupling(self, control: str, qubit: str) -> float:
        for (c, q), j in self.couplings:
            if c == control and q == qubit:
                return j
        return 0.0

    def transition(self, control: str) -> TransitionLine:
        for line in self.transitions:
            if line.gate_id == control:
                return line
        raise DependencyError(f"no transition line for control {control!r}")


@dataclass(frozen=True, eq=False)
class ScanMap:
    """EPR response versus optical excitation frequency."""

    optical_axis_mev: np.ndarray
    epr_axis_mev: np.ndarray
    response: np.ndarray
    ground_truth_hidden: bool = True

    def __post_init__(self):
        object.__setattr__(self, "optical_axis_mev",
                           np.asarray(self.optical_axis_mev, dtype=float))
        object.__setattr__(self, "epr_axis_mev",
                           np.asarray(self.epr_axis_mev, dtype=float))
        object.__setattr__(self, "response", np.asarray(self.response, dtype=float))
        if self.response.shape != (len(self.optical_axis_mev), len(self.epr_axis_mev)):
            raise InvalidSpecError("response shape must be (optical, epr)")
        if np.any(self.response < 0):
            raise InvalidSpecError("response must be non-negative")
        for axis in (self.optical_axis_mev, self.epr_axis_mev):
            if len(axis) > 1 and np.any(np.diff(axis) <= 0):
                raise InvalidSpecError("axes must be strictly increasing")

    def to_rows(self):
        """Header plus one row per optical frequency, for CSV export."""
        header = ["optical_mev"] + [f"epr_{v:.6g}" for v in self.epr_axis_mev]
        rows = [[f"{f:.9g}"] + [f"{x:.9g}" for x in row]
                for f, row in zip(self.optical_axis_mev, self.response)]
        return header, rows


def _lorentzian(axis: np.ndarray, center: float, fwhm: float) -> np.ndarray:
    half = 0.5 * fwhm
    return half * half / ((axis - center) ** 2 + half * half)


def simulate_scan(scenario, spectral_model: SpectralModel,
                  exchange_results: CouplingResults, epr_model: EprModel = None, *,
                  optical_axis=None, epr_axis=None) -> ScanMap:
    """Render the two-dimensional configuration scan for a scenario.

    Axes default to covering every optical line within 4 homogeneous widths
    (step delta_h/4) and every EPR component within 8 linewidths (step
    linewidth/5).
    """
    if epr_model is None:
        epr_model = scenario.epr
    if exchange_results is None:
        raise DependencyError("exchange results (transitions + couplings) required")
    delta_h = spectral_model.homogeneous_fwhm_mev
    gamma = epr_model.linewidth_mev

    lines = {line.gate_id: line.energy_mev for line in exchange_results.transitions}
    offsets = dict(scenario.qubit_epr_offsets())

    if optical_axis is None:
        center = (min(lines.values()), max(lines.values())) if lines else (
            spectral_model.base_transition_mev,) * 2
        optical_axis = np.arange(center[0] - 4.0 * delta_h,
                                 center[1] + 4.0 * delta_h, delta_h / 4.0)
    else:
        optical_axis = np.asarray(optical_axis, dtype=float)

    per_qubit = {q: [] for q in offsets}
    for (c, q), j in exchange_results.couplings:
        if q in per_qubit and j != 0.0:
            per_qubit[q].append((c, j))

    if epr_axis is None:
        if offsets:
            reach = [abs(off) + sum(abs(j) for _, j in per_qubit[q]) / 2.0
                     for q, off in offsets.items()]
            span = max(reach) + 8.0 * gamma
        else:
            span = 8.0 * gamma
        epr_axis = np.arange(-span, span, gamma / 5.0)
    else:
        epr_axis = np.asarray(epr_axis, dtype=float)

    response = np.zeros((len(optical_axis), len(epr_axis)))
    for i, freq in enumerate(optical_axis):
        excited = {c for c, e in lines.items() if abs(e - freq) <= delta_h}
        row = np.zeros_like(epr_axis)
        for q, base in offsets.items():
            couplings = sorted((j for c, j in per_qubit[q] if c in excited),
                               key=abs, reverse=True)[:_MAX_SPLIT]
            weight = 1.0 / (1 << len(couplings))
            for signs in itertools.product((0.5, -0.5), repeat=len(couplings)):
                shift = sum(s * j for s, j in zip(signs, couplings))
                row += weight * _lorentzian(epr_axis, base + shift, gamma)
        response[i] = row
    return ScanMap(optical_axis, epr_axis, response)


@dataclass(frozen=True)
class ControlHypothesis:
    optical_energy_mev: float
    couplings: tuple  # ((qubit_label, J_mev), ...)
    ambiguous: bool = False

    def qubit_labels(self) -> frozenset:
        return frozenset(q for q, _ in self.couplings)


@dataclass(frozen=True)
class AdjacencyHypothesis:
    entries: tuple
    detection_threshold_mev: float

    def adjacency(self) -> tuple:
        return tuple(e.qubit_labels() for e in self.entries)


def _peak_positions(axis: np.ndarray, values: np.ndarray, floor: float) -> list:
    """Sub-sample peak centers by parabolic refinement of local maxima."""
    idx, _ = find_peaks(values, height=floor, prominence=floor / 2.0)
    out = []
    step = axis[1] - axis[0]
    for k in idx:
        if 0 < k < len(values) - 1:
            denom = values[k - 1] - 2.0 * values[k] + values[k + 1]
            frac = 0.5 * (values[k - 1] - values[k + 1]) / denom if denom != 0 else 0.0
            out.append(float(axis[k] + np.clip(frac, -1, 1) * step))
        else:
            out.append(float(axis[k]))
    return out


def infer_adjacency(scan: ScanMap, detection_threshold_mev: float, *,
                    homogeneous_fwhm_mev: float, epr_line_labels=None,
                    epr_linewidth_mev: float = None) -> AdjacencyHypothesis:
    """Recover which optical resonances move which EPR lines, and by how much.

    Works purely from the map: the baseline spectrum is the elementwise
    median row (most frequencies excite nothing); each control occupies a
    window of full width 2*delta_h in which rows deviate, so rising steps of
    the row deviation locate transitions at (step edge) + delta_h; the
    splitting of a vanished EPR line in the window's exclusive row is the
    coupling. Estimated couplings below the detection threshold are dropped.
    Resonances closer than delta_h to a neighbor are flagged ambiguous.
    """
    if detection_threshold_mev <= 0:
        raise PreconditionError("detection threshold must be positive")
    optical = scan.optical_axis_mev
    epr = scan.epr_axis_mev
    step_epr = epr[1] - epr[0] if len(epr) > 1 else 1.0
    gamma = epr_linewidth_mev if epr_linewidth_mev is not None else 6.0 * step_epr

    baseline = np.median(scan.response, axis=0)
    deviation = np.sum(np.abs(scan.response - baseline), axis=1)
    top = float(np.max(deviation)) if len(deviation) else 0.0
    if top <= 0 or not len(epr):
        return AdjacencyHypothesis((), detection_threshold_mev)

    # rising steps of the (piecewise-constant) deviation profile
    jumps = np.flatnonzero(np.diff(deviation) > 0.05 * top) + 1
    energies = [float(0.5 * (optical[k - 1] + optical[k]) + homogeneous_fwhm_mev)
                for k in jumps]

    base_floor = 0.12 * float(np.max(baseline))
    base_peaks = _peak_positions(epr, baseline, base_floor)
    keep_tol = max(2.0 * step_epr, gamma / 2.0, detection_threshold_mev / 6.0)
    mid_tol = max(3.0 * step_epr, gamma / 2.0)

    entries = []
    for energy in energies:
        row = scan.response[int(np.argmin(np.abs(optical - energy)))]
        row_peaks = _peak_positions(epr, row, 0.12 * float(np.max(row)))
        vanished = [z for z in base_peaks
                    if not any(abs(p - z) <= keep_tol for p in row_peaks)]
        new = [p for p in row_peaks
               if not any(abs(p - z) <= keep_tol for z in base_peaks)]

        couplings = []
        used = set()
        for z in vanished:
            pair = None
            best = mid_tol
            for a, b in itertools.combinations(
                    (p for p in new if p not in used), 2):
                lo, hi = min(a, b), max(a, b)
                err = abs(0.5 * (lo + hi) - z)
                if lo < z < hi and err < best:
                    best, pair = err, (lo, hi)
            if pair is not None:
                used.update(pair)
                coupling = pair[1] - pair[0]
            else:
                # split partner hidden under another line: use the near side
                free = [p for p in new if p not in used]
                if not free:
                    continue
                p = min(free, key=lambda p: abs(p - z))
                used.add(p)
                coupling = 2.0 * abs(p - z)
            if coupling >= detection_threshold_mev:
                couplings.append((z, coupling))

        labeled = []
        for z, coupling in couplings:
            if epr_line_labels:
                label = min(epr_line_labels,
                            key=lambda l: abs(epr_line_labels[l] - z))
            else:
                label = f"L{1 + min(range(len(base_peaks)), key=lambda k: abs(base_peaks[k] - z))}"
            labeled.append((label, float(coupling)))
        entries.append(ControlHypothesis(energy, tuple(sorted(labeled))))

    flagged = []
    for k, entry in enumerate(entries):
        near = any(abs(entry.optical_energy_mev - other.optical_energy_mev)
                   < homogeneous_fwhm_mev
                   for m, other in enumerate(entries) if m != k)
        flagged.append(ControlHypothesis(entry.optical_energy_mev,
                                         entry.couplings, ambiguous=near))
    return AdjacencyHypothesis(tuple(flagged), detection_threshold_mev)


def calibrate_gate_time(scenario, adjacency: AdjacencyHypothesis,
                        control_id: str, resolved: CouplingResults, *,
                        tau_range=None) -> GateReport:
    """Pick the gate interval from inferred couplings and score the result.

    The interval and reported unitary come from the inferred couplings (what
    an experiment would know). Fidelity is then the overlap between the gate
    the true system realizes at that interval and the gate it would realize
    if calibrated from the true couplings directly.
    """
    line = resolved.transition(control_id)
    if not adjacency.entries:
        raise PreconditionError("adjacency hypothesis is empty")
    entry = min(adjacency.entries,
                key=lambda e: abs(e.optical_energy_mev - line.energy_mev))
    ranked = sorted(entry.couplings, key=lambda c: abs(c[1]), reverse=True)
    if len(ranked) < 2:
        raise PreconditionError(
            f"control {control_id!r} needs two coupled qubits, "
            f"inference found {len(ranked)}")
    (qa, ja_inferred), (qb, jb_inferred) = ranked[:2]

    def cluster(j1, j2):
        return SpinSystem(
            spins=((control_id, "control"), (qa, "qubit"), (qb, "qubit")),
            couplings={(0, 1): j1, (0, 2): j2},
        )

    try:
        inferred_report = sfg_gate(cluster(ja_inferred, jb_inferred), control_id,
                                   tau_range)
    except NoCleanGateError as err:
        # generic coupling ratios have no exactly clean interval; run the
        # gate at the best dip, as the bench procedure would
        inferred_report = err.best_candidate
    tau = inferred_report.duration_ps

    ja_true = resolved.coupling(control_id, qa)
    jb_true = resolved.coupling(control_id, qb)
    if ja_true == 0.0 or jb_true == 0.0:
        raise DependencyError("ground-truth couplings missing for fidelity scoring")
    true_system = cluster(ja_true, jb_true)
    try:
        target_unitary = sfg_gate(true_system, control_id,
                                  (0.7 * tau, 1.3 * tau)).qubit_unitary
    except NoCleanGateError as err:
        target_unitary = err.best_candidate.qubit_unitary
    realized, _ = induced_qubit_operator(true_system, control_id, tau)
    # compare gates, not raw blocks: at a best-dip interval the induced block
    # carries a small non-unitary part that is not a calibration error
    u, _, vh = np.linalg.svd(realized)
    realized_gate = u @ vh

    return GateReport(
        duration_ps=tau,
        qubit_unitary=inferred_report.qubit_unitary,
        control_residual_entanglement=inferred_report.control_residual_entanglement,
        entangling_power=inferred_report.entangling_power,
        fidelity_to_target=gate_fidelity(realized_gate, target_unitary),
        qubit_labels=(qa, qb),
    )
