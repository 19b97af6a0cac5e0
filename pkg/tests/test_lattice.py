"""Diamond lattice enumeration against a brute-force reconstruction.

The oracle below rebuilds the lattice from its definition (fcc plus the
(1/4,1/4,1/4) basis) with nothing shared with the package except numpy, and
the shell table asserts are taken from its histogram, not from literature
tables.
"""

import math

import numpy as np
import pytest

from donorgate import (
    InsufficientRegionError,
    InvalidSpecError,
    LatticeSpec,
    enumerate_sites,
    neighbor_statistics,
    place_dopants,
    shell_sizes,
    sphere_count_report,
)

A0 = 3.567


def _brute_diamond(radius: float, a0: float = A0) -> np.ndarray:
    """All diamond sites with |r| <= radius, one atom at the origin."""
    n = int(np.ceil(radius / a0)) + 2
    cells = np.arange(-n, n + 1)
    grid = np.stack(np.meshgrid(cells, cells, cells, indexing="ij"), axis=-1).reshape(-1, 3)
    fcc = np.array([[0, 0, 0], [0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    basis = np.concatenate([fcc, fcc + 0.25])
    pts = (grid[:, None, :] + basis[None, :, :]).reshape(-1, 3) * a0
    keep = np.einsum("ij,ij->i", pts, pts) <= radius**2 + 1e-9
    return pts[keep]


def _brute_shell_histogram(n_shells: int) -> list[tuple[float, int]]:
    pts = _brute_diamond(4.0 * A0)
    d = np.sqrt(np.einsum("ij,ij->i", pts, pts))
    d = np.sort(d[d > 1e-9])
    shells = []
    for dist in d:
        if shells and abs(dist - shells[-1][0]) < 1e-6:
            shells[-1] = (shells[-1][0], shells[-1][1] + 1)
        else:
            shells.append((dist, 1))
    return shells[:n_shells]


def test_enumerated_counts_match_brute_force():
    for radius in (4.0, 7.5, 11.0):
        spec = LatticeSpec(radius)
        assert len(enumerate_sites(spec)) == len(_brute_diamond(radius))


def test_sites_unique_and_inside_sphere():
    spec = LatticeSpec(9.0)
    sites = enumerate_sites(spec)
    pos = np.array([s.position for s in sites])
    assert len(np.unique(np.round(pos, 6), axis=0)) == len(sites)
    assert np.all(np.einsum("ij,ij->i", pos, pos) <= 9.0**2 + 1e-6)
    # origin site present under the atom-centered convention
    assert np.min(np.einsum("ij,ij->i", pos, pos)) < 1e-12


def test_count_report_fields_and_continuum_estimate():
    spec = LatticeSpec(10.0)
    rep = sphere_count_report(spec)
    assert rep["bounding_radius_angstrom"] == 10.0
    assert rep["lattice_constant_angstrom"] == A0
    assert rep["enumerated_count"] == len(enumerate_sites(spec))
    want = 8.0 / A0**3 * 4.0 / 3.0 * np.pi * 10.0**3
    assert rep["continuum_estimate"] == pytest.approx(want, rel=1e-12)
    assert "convention" in rep


def test_shell_table_matches_brute_force():
    table = shell_sizes(LatticeSpec(16.0), 8)
    brute = _brute_shell_histogram(8)
    assert len(table.shells) == 8
    for (dist, count), (bd, bc) in zip(table.shells, brute):
        assert dist == pytest.approx(bd, abs=1e-9)
        assert count == bc


def test_first_shell_is_the_bond_length():
    table = shell_sizes(LatticeSpec(12.0), 1)
    dist, count = table.shells[0]
    assert dist == pytest.approx(np.sqrt(3.0) / 4.0 * A0, rel=1e-12)
    assert count == 4


def test_shell_table_needs_enough_region():
    with pytest.raises(InsufficientRegionError):
        shell_sizes(LatticeSpec(2.0), 8)
    with pytest.raises(InvalidSpecError):
        shell_sizes(LatticeSpec(12.0), 0)


def test_spec_validation():
    with pytest.raises(InvalidSpecError):
        LatticeSpec(10.0, lattice_constant=-1.0)
    with pytest.raises(InvalidSpecError):
        LatticeSpec(-5.0)
    with pytest.raises(InvalidSpecError):
        LatticeSpec(10.0, origin_convention="bond_centered")


def test_placement_reproducible_and_complete():
    spec = LatticeSpec(14.0)
    r1 = place_dopants(spec, 0.02, {"P": 0.75, "N": 0.25}, seed=7)
    r2 = place_dopants(spec, 0.02, {"P": 0.75, "N": 0.25}, seed=7)
    key = lambda region: [(site.index, name) for site, name in region.placements]
    assert key(r1) == key(r2)
    assert r1.n_sites == len(enumerate_sites(spec))
    names = {name for _, name in r1.placements}
    assert names <= {"P", "N"}


def test_placement_respects_concentration_and_mix():
    spec = LatticeSpec(22.0)
    region = place_dopants(spec, 0.05, {"P": 0.8, "N": 0.2}, seed=3)
    n = len(region.placements)
    # ~4400 draws at p = 0.05: allow 4 sigma
    mean = region.n_sites * 0.05
    sigma = np.sqrt(region.n_sites * 0.05 * 0.95)
    assert abs(n - mean) < 4 * sigma
    n_p = sum(1 for _, name in region.placements if name == "P")
    assert abs(n_p / n - 0.8) < 4 * np.sqrt(0.8 * 0.2 / n)


def test_placement_validation():
    spec = LatticeSpec(8.0)
    with pytest.raises(InvalidSpecError):
        place_dopants(spec, 0.0, {"P": 1.0}, seed=1)
    with pytest.raises(InvalidSpecError):
        place_dopants(spec, 0.02, {"P": 0.5, "N": 0.2}, seed=1)


def test_neighbor_statistics_against_binomial():
    # one region is a noisy estimator (overlapping neighborhoods correlate),
    # so pool a few seeds before comparing to the binomial
    pooled, weights = {}, 0
    stats = None
    for seed in range(4):
        region = place_dopants(LatticeSpec(26.0), 0.03, {"P": 1.0}, seed=seed)
        stats = neighbor_statistics(region, n_shells=4)
        for k, v in stats.empirical.items():
            pooled[k] = pooled.get(k, 0.0) + v * stats.dopants_counted
        weights += stats.dopants_counted
    m = stats.shell_sites
    for k, analytic in stats.analytic.items():
        want = math.comb(m, k) * 0.03**k * 0.97 ** (m - k)
        assert analytic == pytest.approx(want, rel=1e-9)
    assert abs(sum(stats.analytic.values()) - 1.0) < 1e-12
    assert abs(sum(stats.empirical.values()) - 1.0) < 1e-9
    for k in (0, 1, 2):
        assert abs(pooled.get(k, 0.0) / weights - stats.analytic[k]) < 0.05


def test_neighbor_statistics_needs_dopants():
    # fixed seed, ~1300 sites at 1e-9: no site is occupied
    region = place_dopants(LatticeSpec(10.0), 1e-9, {"P": 1.0}, seed=2)
    assert not region.placements
    with pytest.raises(InvalidSpecError):
        neighbor_statistics(region)
