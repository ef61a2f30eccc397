import pytest

from micromotor.cli import main


def test_inertia_table(capsys, tmp_path):
    assert main(["inertia", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "I [kg m^2]" in out and "sum" in out
    assert (tmp_path / "inertia.csv").exists()


def test_orbit_csv_and_summary(capsys, tmp_path):
    assert main(["orbit", "--preset", "desk", "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "orbit.csv").read_text().splitlines()
    assert lines[0] == "t_s,x_m,y_m,vx_m_s,vy_m_s" and len(lines) == 257
    assert "direction=CCW" in capsys.readouterr().out
    assert main(["orbit", "--preset", "desk", "--reverse"]) == 0
    assert "direction=CW" in capsys.readouterr().out


def test_simulate_columns_and_ledger(tmp_path):
    code = main(["simulate", "--preset", "desk", "--set", "sim.duration=0.02", "--out", str(tmp_path)])
    assert code == 0
    text = (tmp_path / "simulate.csv").read_text().splitlines()
    assert text[0] == ("t_s,cx_m,cy_m,vx_m_s,vy_m_s,psi_rad,omega_rad_s,N_newton,Ft_newton,"
                       "vslip_m_s,contact_flag")
    assert any(line.startswith("# work_in=") for line in text)
    assert any(line.startswith("# residual_J=") for line in text)


def test_modal_with_sweep(capsys, tmp_path):
    assert main(["modal", "--f-lo", "0", "--f-hi", "100000", "--points", "501", "--out", str(tmp_path),
                 "--format", "both"]) == 0
    assert (tmp_path / "modes.csv").exists() and (tmp_path / "resonance.csv").exists()
    assert (tmp_path / "resonance.svg").exists()
    assert "resonance (x)" in capsys.readouterr().out


def test_steady_and_spinup(capsys, tmp_path):
    args = ["--preset", "desk", "--set", "sim.warmup_cycles=40", "--set", "sim.average_cycles=20"]
    assert main(["steady", *args, "--solver", "averaged"]) == 0
    assert "averaged: omega_ss=" in capsys.readouterr().out
    assert main(["spinup", *args, "--solver", "averaged", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "torque_curve.csv").read_text().startswith("omega_rad_s,torque_nm")
    assert (tmp_path / "spinup.csv").exists()


def test_sweep_command(tmp_path):
    code = main(["sweep", "--preset", "desk", "--param", "voltage", "--grid", "0,800", "--solver", "transient",
                 "--set", "sim.duration=0.1", "--out", str(tmp_path), "--format", "both"])
    assert code == 0
    assert (tmp_path / "desk_voltage.csv").exists() and (tmp_path / "desk_voltage.svg").exists()
    assert (tmp_path / "summary.json").exists()


@pytest.mark.parametrize("argv", [
    ["modal", "--set", "stator.nope=1"],
    ["modal", "--preset", "no_such_preset"],
    ["simulate", "--set", "rotor.bore_radius=0.2e-3"],
    ["sweep", "--param", "voltage"],
])
def test_errors_exit_one(argv, capsys):
    assert main(argv) == 1
    assert "error:" in capsys.readouterr().err
