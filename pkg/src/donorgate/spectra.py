"""Optical transition lines of the controls, and how many gates they resolve.

Each control donor carries one optical transition. Overlap with other excited
controls shifts it deterministically (the shared excitation delocalizes, so
the branch energies are the eigenvalues of the one-excitation hopping
matrix); strain and charged-defect fields shift it randomly. The spread of
these shifts across a patch is the inhomogeneous width, and it is a resource:
lines far enough apart can be addressed one at a time, so the number of
usable gates is the number of lines that remain pairwise separated on the
scale of the homogeneous width.

All width parameters are full widths at half maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import HC_MEV_NM
from .errors import DependencyError, InvalidSpecError, PreconditionError
from .integrals import TransferSplitting

# FWHM of a unit-sigma Gaussian
GAUSSIAN_FWHM = 2.0 * math.sqrt(2.0 * math.log(2.0))

_RESERVED_COMPONENT = "overlap"


def wavelength_to_mev(wavelength_nm: float) -> float:
    return HC_MEV_NM / wavelength_nm


def wavelength_width_to_mev(width_nm: float, wavelength_nm: float) -> float:
    """Linewidth quoted in nm converted to meV at the given wavelength."""
    return HC_MEV_NM * width_nm / wavelength_nm**2


@dataclass(frozen=True)
class SpectralModel:
    """Transition energy scale and linewidth budget for the control species.

    `disorder_components` are independent zero-mean Gaussian shift sources,
    (name, FWHM in meV) pairs; their quadrature sum is the inhomogeneous
    width. `resolution_factor` is the separation demanded between lines, in
    units of the homogeneous width.
    """

    base_transition_mev: float
    homogeneous_fwhm_mev: float
    disorder_components: tuple = ()
    resolution_factor: float = 1.5

    def __post_init__(self):
        if self.homogeneous_fwhm_mev <= 0:
            raise InvalidSpecError("homogeneous width must be positive")
        if self.resolution_factor < 1.0:
            raise InvalidSpecError("resolution factor below 1 merges adjacent lines")
        names = [name for name, _ in self.disorder_components]
        if len(set(names)) != len(names):
            raise InvalidSpecError("disorder component names must be unique")
        if _RESERVED_COMPONENT in names:
            raise InvalidSpecError(f"component name '{_RESERVED_COMPONENT}' is reserved")
        if any(width < 0 for _, width in self.disorder_components):
            raise InvalidSpecError("disorder widths must be non-negative")
        object.__setattr__(self, "disorder_components",
                           tuple((str(n), float(w)) for n, w in self.disorder_components))

    @property
    def inhomogeneous_fwhm_mev(self) -> float:
        return math.sqrt(sum(w * w for _, w in self.disorder_components))


@dataclass(frozen=True)
class TransitionLine:
    """One control's optical line: energy, homogeneous width, and the
    per-source breakdown of its displacement from the bare transition."""

    gate_id: str
    energy_mev: float
    width_mev: float
    shift_breakdown: tuple

    def shift_mev(self) -> float:
        return sum(value for _, value in self.shift_breakdown)


def _transfer_lookup(transfer_results, separation: float) -> float:
    for row in transfer_results:
        if isinstance(row, TransferSplitting) and math.isclose(
                row.separation_a, separation, rel_tol=1e-9, abs_tol=1e-9):
            return row.transfer_mev
    raise DependencyError(
        f"no transfer result covers the control separation {separation:.4f} A; "
        "evaluate transfer_splitting_curve at the pairwise separations first"
    )


def _overlap_shifts(positions: np.ndarray, transfer_results) -> np.ndarray:
    """Branch shifts from excitation sharing among nearby controls.

    The single shared excitation hops between controls with amplitude t(R),
    so the transition energies are base + eigenvalues of the hopping matrix.
    Branches are assigned to controls in label order, ascending in energy;
    for an isolated control the shift is exactly zero.
    """
    m = len(positions)
    if m == 1:
        return np.zeros(1)
    hop = np.zeros((m, m))
    for i in range(m):
        for j in range(i + 1, m):
            sep = float(np.linalg.norm(positions[i] - positions[j]))
            hop[i, j] = hop[j, i] = _transfer_lookup(transfer_results, sep)
    return np.linalg.eigvalsh(hop)


def gate_transitions(scenario, spectral_model: SpectralModel, transfer_results,
                     seed=None) -> list:
    """Optical lines for every control in the scenario.

    `transfer_results` must cover every control-control separation (see
    `integrals.transfer_splitting_curve`). Random shift components are drawn
    one control at a time in label order, so a fixed seed fixes the lines.
    """
    controls = sorted(scenario.controls(), key=lambda c: c[0])
    if not controls:
        return []
    positions = np.asarray([pos for _, pos in controls], dtype=float)
    shifts = _overlap_shifts(positions, transfer_results)

    rng = np.random.default_rng(seed)
    lines = []
    for (label, _), overlap in zip(controls, shifts):
        breakdown = [(_RESERVED_COMPONENT, float(overlap))]
        for name, width in spectral_model.disorder_components:
            breakdown.append((name, float(rng.normal(0.0, width / GAUSSIAN_FWHM))))
        energy = spectral_model.base_transition_mev + sum(v for _, v in breakdown)
        lines.append(TransitionLine(
            gate_id=label,
            energy_mev=energy,
            width_mev=spectral_model.homogeneous_fwhm_mev,
            shift_breakdown=tuple(breakdown),
        ))
    return lines


def resolvable_gate_count(lines, homogeneous_fwhm_mev: float,
                          resolution_factor: float = 1.5) -> int:
    """Size of the largest subset of lines pairwise separated by at least
    resolution_factor * homogeneous width.

    Counted greedily left to right after sorting; on sorted energies that
    rule is exact, not a heuristic. Accepts TransitionLine objects or bare
    energies in meV.
    """
    energies = sorted(
        line.energy_mev if isinstance(line, TransitionLine) else float(line)
        for line in lines
    )
    if not energies:
        raise PreconditionError("need at least one line")
    gap = resolution_factor * homogeneous_fwhm_mev
    count = 1
    last = energies[0]
    for energy in energies[1:]:
        if energy - last >= gap * (1.0 - 1e-12):
            count += 1
            last = energy
    return count
