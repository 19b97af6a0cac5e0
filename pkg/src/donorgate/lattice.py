"""Diamond lattice geometry: site enumeration, neighbor shells, doping.

All integer site algebra happens in units of a0/4 (a0 = conventional cubic
lattice constant), where diamond sites are exactly the integer triples that
are either all even with x+y+z = 0 (mod 4) or all odd with x+y+z = 3 (mod 4).
Shell membership is decided by exact equality of integer squared distances,
so shells can never merge through floating-point rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientRegionError, InvalidSpecError


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of the enumerated crystal region.

    Parameters
    ----------
    bounding_radius : float
        Sphere radius in angstrom; sites with |r| <= bounding_radius are in.
    lattice_constant : float
        Conventional cubic cell edge in angstrom.
    origin_convention : str
        Only "atom_centered" is defined: the sphere is centred on a lattice
        site, and that site itself is counted.
    """

    bounding_radius: float
    lattice_constant: float = 3.567
    origin_convention: str = "atom_centered"

    def __post_init__(self):
        if self.lattice_constant <= 0:
            raise InvalidSpecError("lattice_constant must be positive")
        if self.bounding_radius < 0:
            raise InvalidSpecError("bounding_radius must be non-negative")
        if self.origin_convention != "atom_centered":
            raise InvalidSpecError(
                f"unknown origin convention {self.origin_convention!r}"
            )


@dataclass(frozen=True)
class Site:
    """One lattice site: position in angstrom plus a stable integer id."""

    position: np.ndarray
    index: int


@dataclass(frozen=True)
class ShellTable:
    """Ordered neighbor shells of the origin site."""

    shells: tuple  # of (shell_radius_angstrom, site_count)

    @property
    def total_sites(self) -> int:
        return sum(count for _, count in self.shells)


@dataclass(frozen=True)
class DopedRegion:
    """A random doping realization over one enumerated region."""

    spec: LatticeSpec
    placements: tuple  # of (Site, species_id)
    concentration: float
    seed: int
    n_sites: int = 0  # enumerated sites in the region


def _integer_sites(lattice_constant: float, radius: float) -> np.ndarray:
    """All diamond sites with |r| <= radius, as an (N, 3) int array in a0/4.

    Generated slab by slab in z to bound memory; order is deterministic
    (increasing z, then the generation order of the masked grid).
    """
    # r2max in integer units; the +1e-9 guards against radius values that are
    # meant to be exactly on a shell.
    q = 4.0 * radius / lattice_constant
    r2max = int(math.floor(q * q + 1e-9))
    n = int(math.floor(q + 1e-9))
    if r2max < 0:
        return np.zeros((0, 3), dtype=np.int32)

    chunks = []
    axis = np.arange(-n, n + 1, dtype=np.int32)
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    xx = xx.ravel()
    yy = yy.ravel()
    sum_xy = xx.astype(np.int64) + yy
    r2_xy = xx.astype(np.int64) ** 2 + yy.astype(np.int64) ** 2
    parity_xy = (xx & 1) + (yy & 1)  # 0 = both even, 2 = both odd, 1 = mixed
    for z in range(-n, n + 1):
        r2 = r2_xy + z * z
        ok = r2 <= r2max
        if z & 1:
            ok &= (parity_xy == 2) & ((sum_xy + z) % 4 == 3)
        else:
            ok &= (parity_xy == 0) & ((sum_xy + z) % 4 == 0)
        if not ok.any():
            continue
        m = np.empty((int(ok.sum()), 3), dtype=np.int32)
        m[:, 0] = xx[ok]
        m[:, 1] = yy[ok]
        m[:, 2] = z
        chunks.append(m)
    if not chunks:
        return np.zeros((0, 3), dtype=np.int32)
    return np.vstack(chunks)


def _sorted_by_distance(coords: np.ndarray) -> np.ndarray:
    d2 = (coords.astype(np.int64) ** 2).sum(axis=1)
    order = np.lexsort((coords[:, 2], coords[:, 1], coords[:, 0], d2))
    return coords[order]


def enumerate_sites(spec: LatticeSpec) -> list[Site]:
    """Every lattice site inside the bounding sphere, origin included.

    Sites are ordered by distance from the origin, ties broken
    lexicographically, and indexed in that order.
    """
    coords = _sorted_by_distance(_integer_sites(spec.lattice_constant, spec.bounding_radius))
    scale = spec.lattice_constant / 4.0
    return [
        Site(position=coords[i].astype(float) * scale, index=i)
        for i in range(coords.shape[0])
    ]


def sphere_count_report(spec: LatticeSpec) -> dict:
    """Site count plus the metadata needed to interpret it.

    Reports the discrete enumeration alongside the continuum estimate
    rho*V with rho = 8/a0^3, and states the center convention explicitly.
    """
    count = _integer_sites(spec.lattice_constant, spec.bounding_radius).shape[0]
    volume = 4.0 / 3.0 * math.pi * spec.bounding_radius**3
    density = 8.0 / spec.lattice_constant**3
    return {
        "bounding_radius_angstrom": spec.bounding_radius,
        "lattice_constant_angstrom": spec.lattice_constant,
        "enumerated_count": int(count),
        "continuum_estimate": density * volume,
        "convention": "sphere centred on a lattice site; the center site is counted",
    }


def _shell_offsets(n_shells: int) -> tuple[list[int], list[np.ndarray]]:
    """Offsets (integer units, from a sublattice-A site) for the first shells.

    Returns (squared distances, offset arrays), one entry per shell. Offsets
    from a sublattice-B site are the negatives of these; even shells are
    inversion-symmetric so the sign only matters for the odd ones.
    """
    # 3 cells in every direction is plenty for the shells this library uses
    # (first five shells reach sqrt(11)/4 a0 < 1 a0).
    if n_shells > 12:
        raise InsufficientRegionError("shell offsets tabulated up to 12 shells")
    probe = _integer_sites(1.0, 3.0)
    d2 = (probe.astype(np.int64) ** 2).sum(axis=1)
    keep = d2 > 0
    probe, d2 = probe[keep], d2[keep]
    levels = np.unique(d2)
    if len(levels) < n_shells:
        raise InsufficientRegionError("probe region too small for shell table")
    dists = []
    offsets = []
    for lv in levels[:n_shells]:
        dists.append(int(lv))
        offsets.append(probe[d2 == lv])
    return dists, offsets


def shell_sizes(spec: LatticeSpec, n_shells: int) -> ShellTable:
    """Distances and exact counts of the first n_shells neighbor shells."""
    if n_shells < 1:
        raise InvalidSpecError("n_shells must be >= 1")
    coords = _integer_sites(spec.lattice_constant, spec.bounding_radius)
    d2 = (coords.astype(np.int64) ** 2).sum(axis=1)
    d2 = d2[d2 > 0]
    levels, counts = np.unique(d2, return_counts=True)
    if len(levels) < n_shells:
        raise InsufficientRegionError(
            f"region of radius {spec.bounding_radius} A holds only "
            f"{len(levels)} complete shells; {n_shells} requested"
        )
    scale = spec.lattice_constant / 4.0
    shells = tuple(
        (scale * math.sqrt(float(levels[i])), int(counts[i])) for i in range(n_shells)
    )
    return ShellTable(shells=shells)


def _pack(coords: np.ndarray) -> np.ndarray:
    """Pack int coordinate triples into sortable int64 keys."""
    c = coords.astype(np.int64) + (1 << 20)
    return (c[:, 0] << 42) | (c[:, 1] << 21) | c[:, 2]


def place_dopants(
    spec: LatticeSpec,
    concentration: float,
    species_mix,
    seed: int,
) -> DopedRegion:
    """Independent Bernoulli occupation of every site at the given fraction.

    species_mix maps species id -> fraction (fractions sum to 1). Placement
    is reproducible: a fixed enumeration order and a single rng stream mean
    identical (spec, concentration, seed) give identical regions.
    """
    if not (0.0 < concentration < 1.0):
        raise InvalidSpecError("concentration must lie strictly between 0 and 1")
    mix = dict(species_mix)
    fractions = np.array(list(mix.values()), dtype=float)
    if fractions.min() < 0 or abs(fractions.sum() - 1.0) > 1e-9:
        raise InvalidSpecError("species fractions must be non-negative and sum to 1")
    names = list(mix.keys())

    coords = _integer_sites(spec.lattice_constant, spec.bounding_radius)
    rng = np.random.default_rng(seed)
    occupied = rng.random(coords.shape[0]) < concentration
    site_ids = np.flatnonzero(occupied)
    picked = coords[occupied]
    species = rng.choice(len(names), size=picked.shape[0], p=fractions)

    scale = spec.lattice_constant / 4.0
    placements = tuple(
        (
            Site(position=picked[i].astype(float) * scale, index=int(site_ids[i])),
            names[species[i]],
        )
        for i in range(picked.shape[0])
    )
    return DopedRegion(
        spec=spec,
        placements=placements,
        concentration=concentration,
        seed=seed,
        n_sites=int(coords.shape[0]),
    )


@dataclass(frozen=True)
class NeighborStatistics:
    """Observed and analytic dopants-per-neighborhood distributions."""

    empirical: dict
    analytic: dict
    shell_sites: int
    dopants_counted: int


def _binomial_pmf(m: int, p: float) -> dict:
    pmf = {}
    for k in range(m + 1):
        pmf[k] = math.comb(m, k) * p**k * (1.0 - p) ** (m - k)
    return pmf


def neighbor_statistics(region: DopedRegion, n_shells: int = 5) -> NeighborStatistics:
    """P(k other dopants within the first n_shells) across the region.

    Only dopants whose full shell neighborhood fits inside the bounding
    sphere are counted, so truncated neighborhoods at the surface cannot
    bias the distribution. The analytic reference is the binomial over the
    enumerated shell-site count at the region's concentration.
    """
    if not region.placements:
        raise InvalidSpecError("region holds no dopants")
    dists, offsets_by_shell = _shell_offsets(n_shells)
    offsets = np.vstack(offsets_by_shell)
    m_sites = offsets.shape[0]

    scale = region.spec.lattice_constant / 4.0
    coords = np.array(
        [np.rint(site.position / scale).astype(np.int64) for site, _ in region.placements],
        dtype=np.int64,
    ).reshape(-1, 3)

    keys = np.sort(_pack(coords))

    # interior = full neighborhood inside the sphere
    r_shell = math.sqrt(float(dists[-1])) * scale
    radii = np.sqrt((coords.astype(float) ** 2).sum(axis=1)) * scale
    interior = radii <= region.spec.bounding_radius - r_shell
    inner = coords[interior]
    if inner.shape[0] == 0:
        raise InvalidSpecError(
            "no dopant has a complete neighborhood inside the region; "
            "increase bounding_radius"
        )

    # sublattice A (even coords) sees +offsets, B sees -offsets
    sub_a = (inner[:, 0] & 1) == 0
    counts = np.zeros(inner.shape[0], dtype=np.int64)
    for sign, mask in ((1, sub_a), (-1, ~sub_a)):
        pts = inner[mask]
        if pts.shape[0] == 0:
            continue
        acc = np.zeros(pts.shape[0], dtype=np.int64)
        for off in offsets:
            probe_keys = _pack(pts + sign * off)
            pos = np.searchsorted(keys, probe_keys)
            pos[pos >= keys.shape[0]] = keys.shape[0] - 1
            acc += keys[pos] == probe_keys
        counts[mask] = acc

    ks, freq = np.unique(counts, return_counts=True)
    empirical = {int(k): float(f) / inner.shape[0] for k, f in zip(ks, freq)}
    analytic = _binomial_pmf(m_sites, region.concentration)
    return NeighborStatistics(
        empirical=empirical,
        analytic=analytic,
        shell_sites=m_sites,
        dopants_counted=int(inner.shape[0]),
    )
