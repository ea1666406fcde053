import numpy as np
import pytest

from cpbounds import DisplacementBox, TorusLattice, box_sites, displacement_offset_table


def test_d1_periodic_wrap():
    lat = TorusLattice(1, 4)
    assert sorted(lat.index_to_coords(n)[0] for n in lat.neighbors(0)) == [1, 3]


def test_d3_origin_neighbors_are_unit_steps():
    lat = TorusLattice(3, 6)
    got = {lat.index_to_coords(n) for n in lat.neighbors(lat.coords_to_index((0, 0, 0)))}
    want = {(1, 0, 0), (5, 0, 0), (0, 1, 0), (0, 5, 0), (0, 0, 1), (0, 0, 5)}
    assert got == want


def test_d2_neighbor_symmetry_exhaustive():
    lat = TorusLattice(2, 4)
    for x in range(lat.n_sites):
        for y in lat.neighbors(x):
            assert x in lat.neighbors(int(y))


@pytest.mark.parametrize("d,side", [(1, 4), (2, 4), (2, 6), (3, 4), (3, 6), (4, 4)])
def test_neighbor_counts_and_no_self(d, side):
    lat = TorusLattice(d, side)
    for x in range(lat.n_sites):
        nb = lat.neighbors(x)
        assert len(set(int(n) for n in nb)) == 2 * d
        assert x not in nb


@pytest.mark.parametrize("d,side", [(1, 6), (2, 4), (3, 4)])
def test_coords_roundtrip_exhaustive(d, side):
    lat = TorusLattice(d, side)
    for site in range(lat.n_sites):
        assert lat.coords_to_index(lat.index_to_coords(site)) == site


def test_out_of_range_site_rejected():
    lat = TorusLattice(2, 4)
    with pytest.raises(ValueError):
        lat.neighbors(16)
    with pytest.raises(ValueError):
        lat.neighbors(-1)


@pytest.mark.parametrize("d,side", [(3, 3), (3, 5), (3, 2), (0, 4)])
def test_lattice_validation(d, side):
    with pytest.raises(ValueError):
        TorusLattice(d, side)


def test_box_counts_radius_1():
    flags = list(box_sites(DisplacementBox(3, 1)))
    assert len(flags) == 27
    assert sum(b for _, b in flags) == 26
    assert [x for x, b in flags if not b] == [(0, 0, 0)]


def test_box_counts_radius_2():
    flags = list(box_sites(DisplacementBox(3, 2)))
    assert len(flags) == 125
    assert sum(not b for _, b in flags) == 27


def test_box_negation_closure():
    box = DisplacementBox(2, 3)
    disp = set(box.displacements())
    assert all((-x, -y) in disp for x, y in disp)


def test_box_permutation_closure():
    box = DisplacementBox(3, 2)
    disp = set(box.displacements())
    assert all((z, x, y) in disp for x, y, z in disp)


def test_box_indexing_and_flags():
    box = DisplacementBox(3, 2)
    assert box.origin_index == box.index((0, 0, 0))
    assert box.index(box.unit_vector(0)) == box.index((1, 0, 0))
    assert box.is_boundary((2, 0, 0)) and not box.is_boundary((1, 1, 1))
    with pytest.raises(ValueError):
        box.index((3, 0, 0))
    with pytest.raises(ValueError):
        DisplacementBox(3, 0)


def test_offset_table_matches_shift_index():
    lat = TorusLattice(2, 6)
    disp = [(1, 0), (-1, 2), (3, 3)]
    table = displacement_offset_table(lat, disp)
    for j, delta in enumerate(disp):
        for u in (0, 7, 35):
            assert table[j, u] == lat.shift_index(u, delta)
