import math
import random
import time

import pytest
from hypothesis import given, strategies as st

from micromotor.config import AnnulusSegment, MaterialProps, MotorConfig, RotorGeometry
from micromotor.errors import DomainError
from micromotor.inertia import inertia_axial, torque_from_spinup

from oracles import shell_inertia, shell_mass

STEEL = MaterialProps("steel", 193e9, 7980.0)


def rotor(*segs, bore=0.1e-3):
    return RotorGeometry(tuple(AnnulusSegment(*s) for s in segs), bore, STEEL)


def test_solid_disk_limit():
    rep = inertia_axial(rotor((1e-3, 0.0, 2e-3)))
    assert rep.inertia_axial == 0.5 * rep.mass * (1e-3) ** 2


def test_single_annulus_example():
    rep = inertia_axial(rotor((0.5e-3, 0.3e-3, 1e-3)))
    seg = [(0.5e-3, 0.3e-3, 1e-3)]
    assert rep.mass == pytest.approx(4.01e-6, rel=1e-3)
    assert rep.mass == pytest.approx(shell_mass(seg, 7980.0), rel=1e-12)
    assert rep.inertia_axial == pytest.approx(6.8e-13, rel=5e-3)
    assert rep.inertia_axial == pytest.approx(shell_inertia(seg, 7980.0), rel=1e-12)


def test_random_rotors_match_shell_oracle():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    for _ in range(100):
        segs = []
        for _ in range(rng.randint(1, 6)):
            ro = rng.uniform(0.1e-3, 10e-3)
            segs.append((ro, rng.uniform(0.0, 0.95) * ro, rng.uniform(0.05e-3, 5e-3)))
        got = inertia_axial(rotor(*segs)).inertia_axial
        assert got == pytest.approx(shell_inertia(segs, 7980.0), rel=1e-9)
    assert time.perf_counter() - t0 < 1.0


def test_splitting_segment_is_additive():
    whole = inertia_axial(rotor((0.5e-3, 0.3e-3, 1e-3)))
    halves = inertia_axial(rotor((0.5e-3, 0.3e-3, 0.5e-3), (0.5e-3, 0.3e-3, 0.5e-3)))
    assert halves.mass == pytest.approx(whole.mass, rel=1e-15)
    assert halves.inertia_axial == pytest.approx(whole.inertia_axial, rel=1e-15)


seg_st = st.tuples(st.floats(0.1e-3, 5e-3), st.floats(0.0, 0.95), st.floats(0.05e-3, 3e-3)).map(
    lambda s: (s[0], s[0] * s[1], s[2]))


@given(st.lists(seg_st, min_size=1, max_size=6), st.randoms())
def test_bounds_and_permutation(segs, rnd):
    rep = inertia_axial(rotor(*segs))
    r_in = min(s[1] for s in segs)
    r_out = max(s[0] for s in segs)
    assert 0.5 * rep.mass * r_in**2 <= rep.inertia_axial * (1 + 1e-12)
    # a thin ring at the largest radius is the upper limit
    assert rep.inertia_axial <= rep.mass * r_out**2 * (1 + 1e-12)
    shuffled = list(segs)
    rnd.shuffle(shuffled)
    other = inertia_axial(rotor(*shuffled))
    assert other.mass == pytest.approx(rep.mass, rel=1e-14)
    assert other.inertia_axial == pytest.approx(rep.inertia_axial, rel=1e-14)


def test_spinup_torque_from_published_numbers():
    omega = 882 * 2 * math.pi / 60
    assert torque_from_spinup(6.8e-13, omega, 0.4) == pytest.approx(1.57e-10, rel=2e-3)
    assert torque_from_spinup(6.8e-13, 0.0, 0.4) == 0.0
    assert torque_from_spinup(2 * 6.8e-13, omega, 0.4) == 2 * torque_from_spinup(6.8e-13, omega, 0.4)
    with pytest.raises(DomainError):
        torque_from_spinup(1e-12, 1.0, 0.0)


def test_default_rotor_report_format():
    rep = inertia_axial(MotorConfig.from_dict().rotor)
    text = rep.format()
    assert len(text.splitlines()) == 5
    assert len({len(line) for line in text.splitlines()}) == 1
    rows = rep.csv_rows()
    assert rows[0][0] == "segment" and rows[-1][0] == "total" and len(rows) == 5
