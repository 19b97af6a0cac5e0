"""Effective-mass donor models and the thermal-initialization check.

Two estimation routes are implemented: directly from an ionization energy,
and from a bound-exciton binding via the Haynes-rule ratio. Both reduce to
the same scaling relations

    m*/m0 = eps^2 * R_c / 13.6 eV
    a*    = 0.529 A * eps / (m*/m0) = 0.529 A * (13.6 eV / eps) / R_c

with R_c the Coulombic part of the binding (total binding minus any central
cell split). A central cell term deepens the level without shrinking the
hydrogenic envelope, so a* always follows the Coulombic part alone.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources

from .constants import BOHR_ANGSTROM, K_B_MEV_PER_K, MU_B_MEV_PER_T, RYDBERG_EV
from .errors import InvalidModelError

_ROLES = ("qubit", "control")


@dataclass(frozen=True)
class DonorModel:
    """Effective-mass parameters of one dopant species."""

    species_name: str
    role: str
    binding_energy_ev: float
    central_cell_split_ev: float
    dielectric_constant: float
    effective_bohr_radius_a: float
    radius_scale_factor: float = 1.0
    spin: float = 0.5
    t1_s: float | None = None
    t2_s: float | None = None

    def __post_init__(self):
        if self.role not in _ROLES:
            raise InvalidModelError(f"role must be one of {_ROLES}")
        if self.binding_energy_ev <= 0:
            raise InvalidModelError("binding energy must be positive")
        if not (0.0 <= self.central_cell_split_ev < self.binding_energy_ev):
            raise InvalidModelError("central cell split must lie in [0, binding)")
        if self.dielectric_constant <= 1.0:
            raise InvalidModelError("dielectric constant must exceed 1")
        if self.effective_bohr_radius_a <= 0:
            raise InvalidModelError("effective Bohr radius must be positive")
        if not (0.0 < self.radius_scale_factor <= 1.0):
            raise InvalidModelError("radius_scale_factor must lie in (0, 1]")

    @property
    def coulombic_binding_ev(self) -> float:
        return self.binding_energy_ev - self.central_cell_split_ev

    def ground_orbital_radius_a(self) -> float:
        """1s envelope radius used in pair integrals (compactness applied)."""
        return self.effective_bohr_radius_a * self.radius_scale_factor

    def excited_orbital_radius_a(self) -> float:
        """Bohr-radius parameter of the 2p envelope (decay length is twice this)."""
        return self.effective_bohr_radius_a


def model_from_ionization(
    species_name: str,
    binding_energy_ev: float,
    dielectric_constant: float,
    central_cell_split_ev: float = 0.0,
    role: str = "control",
    radius_scale_factor: float = 1.0,
    spin: float = 0.5,
    t1_s: float | None = None,
    t2_s: float | None = None,
) -> DonorModel:
    """Donor model from a measured or assumed ionization energy."""
    r_c = binding_energy_ev - central_cell_split_ev
    if r_c <= 0:
        raise InvalidModelError("Coulombic part of the binding must be positive")
    a_star = BOHR_ANGSTROM * (RYDBERG_EV / dielectric_constant) / r_c
    return DonorModel(
        species_name=species_name,
        role=role,
        binding_energy_ev=binding_energy_ev,
        central_cell_split_ev=central_cell_split_ev,
        dielectric_constant=dielectric_constant,
        effective_bohr_radius_a=a_star,
        radius_scale_factor=radius_scale_factor,
        spin=spin,
        t1_s=t1_s,
        t2_s=t2_s,
    )


def model_from_exciton(
    species_name: str,
    exciton_binding_ev: float,
    haynes_factor: float = 0.1,
    dielectric_constant: float = 5.7,
    **kwargs,
) -> DonorModel:
    """Donor model from a bound-exciton binding and a Haynes-rule factor."""
    if exciton_binding_ev <= 0:
        raise InvalidModelError("exciton binding must be positive")
    if not (0.0 < haynes_factor < 1.0):
        raise InvalidModelError("haynes_factor must lie in (0, 1)")
    return model_from_ionization(
        species_name,
        exciton_binding_ev / haynes_factor,
        dielectric_constant,
        **kwargs,
    )


@dataclass(frozen=True)
class ZeemanCheck:
    """Zeeman-versus-thermal energy comparison for spin initialization."""

    g_factor: float
    field_t: float
    temperature_k: float
    ratio: float
    polarization: float


def zeeman_check(g_factor: float, field_t: float, temperature_k: float) -> ZeemanCheck:
    """Equilibrium spin polarization tanh(g mu_B B / 2 k T)."""
    if temperature_k <= 0:
        raise InvalidModelError("temperature must be positive")
    ratio = g_factor * MU_B_MEV_PER_T * field_t / (K_B_MEV_PER_K * temperature_k)
    return ZeemanCheck(
        g_factor=g_factor,
        field_t=field_t,
        temperature_k=temperature_k,
        ratio=ratio,
        polarization=math.tanh(ratio / 2.0),
    )


_PRESET_FILE = "donor_presets.json"


def load_presets() -> dict[str, DonorModel]:
    """Built-in species catalog from the packaged data file.

    The file is a versioned key-value document (see data/donor_presets.json);
    new species can be added there without code changes.
    """
    raw = json.loads(
        resources.files("donorgate").joinpath("data", _PRESET_FILE).read_text()
    )
    if raw.get("schema_version") != 1:
        raise InvalidModelError("unsupported donor preset schema version")
    catalog = {}
    for name, entry in raw["species"].items():
        catalog[name] = model_from_ionization(
            species_name=entry["species_name"],
            binding_energy_ev=entry["binding_energy_ev"],
            dielectric_constant=entry["dielectric_constant"],
            central_cell_split_ev=entry.get("central_cell_split_ev", 0.0),
            role=entry["role"],
            radius_scale_factor=entry.get("radius_scale_factor", 1.0),
            spin=entry.get("spin", 0.5),
            t1_s=entry.get("t1_s"),
            t2_s=entry.get("t2_s"),
        )
    return catalog


def preset(name: str) -> DonorModel:
    try:
        return load_presets()[name]
    except KeyError:
        raise InvalidModelError(f"unknown donor preset {name!r}") from None


def with_radius_scale(model: DonorModel, scale: float) -> DonorModel:
    """Copy of `model` with a different compactness factor."""
    return replace(model, radius_scale_factor=scale)
