"""Command-line entry point: ``micromotor <command> [options]``.

Exit status is 0 on success, 2 when a property check fails and 1 on error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

from . import __version__
from .averaged import spinup_curve, steady_state_speed, torque_speed_curve
from .config import RAD_S_TO_RPM, load_config, preset_meta, validate_config
from .contact import energy_audit, rise_time, simulate, steady_speed
from .errors import MicromotorError
from .harness import (
    SweepSpec,
    emit_report,
    evaluate_properties,
    run_battery,
    run_resonance_experiment,
    run_sweep,
)
from .inertia import inertia_axial, torque_from_spinup
from .modal import bending_modes
from .orbit import ellipse_params, reverse, sample_period, synthesize_orbit

EXIT_OK, EXIT_ERROR, EXIT_CHECK_FAILED = 0, 1, 2
COMMANDS = ("modal", "orbit", "simulate", "steady", "spinup", "sweep", "inertia", "report")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="micromotor", description="Centripetal-friction piezo micromotor model")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="YAML config file (merged over defaults and preset)")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config value, e.g. drive.amplitude=200 (repeatable)")
    p.add_argument("--preset", help="named preset (desk, stator_response, voltage_speed, ...)")
    p.add_argument("--out", help="output directory; tables go to stdout when omitted")
    p.add_argument("--solver", choices=("transient", "averaged", "both"), default=None)
    p.add_argument("--format", dest="fmt", choices=("csv", "svg", "both"), default="csv")
    p.add_argument("--param", help="sweep parameter (voltage, frequency, tilt_deg, load_torque, clearance)")
    p.add_argument("--grid", help="comma-separated sweep values")
    p.add_argument("--f-lo", type=float, help="modal: start of a response sweep, Hz")
    p.add_argument("--f-hi", type=float, help="modal: end of a response sweep, Hz")
    p.add_argument("--points", type=int, default=1001, help="modal: sweep points")
    p.add_argument("--axis", choices=("x", "y"), default="x")
    p.add_argument("--reverse", action="store_true", help="orbit/simulate: traverse the orbit the other way")
    return p


def _config(args):
    return validate_config(load_config(args.config, args.overrides, args.preset))


def _csv_text(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit(args, name: str, text: str) -> None:
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / name).write_text(text)
        print(f"wrote {out / name}")
    else:
        sys.stdout.write(text)


def _solver(args, default: str = "averaged") -> str:
    if args.solver:
        return args.solver
    if args.preset:
        return preset_meta(args.preset).get("solver", default)
    return default


def cmd_modal(args) -> int:
    vc = _config(args)
    rows = [["axis", "order", "eigenvalue", "frequency_hz", "modal_mass_kg", "forcing_m_s2_per_v"]]
    for axis in ("x", "y"):
        for m in bending_modes(vc, axis):
            rows.append([axis, m.order, repr(m.eigenvalue), repr(m.frequency_hz), repr(m.modal_mass), repr(m.forcing)])
    _emit(args, "modes.csv", _csv_text(rows))
    if args.f_lo is not None and args.f_hi is not None:
        res = run_resonance_experiment(vc, args.f_lo, args.f_hi, args.points, axis=args.axis)
        if args.out:
            emit_report([res], args.out, fmt=args.fmt, summary_name="resonance_summary.json")
        print(f"resonance ({args.axis}): {res.f_res:.6g} Hz")
    return EXIT_OK


def cmd_orbit(args) -> int:
    vc = _config(args)
    orbit = synthesize_orbit(vc)
    if args.reverse:
        orbit = reverse(orbit)
    t, x, y, vx, vy = sample_period(orbit, 256)
    rows = [["t_s", "x_m", "y_m", "vx_m_s", "vy_m_s"]]
    rows += [[repr(float(a)) for a in r] for r in zip(t, x, y, vx, vy)]
    _emit(args, "orbit.csv", _csv_text(rows))
    e = ellipse_params(orbit)
    print(f"# semi_major_m={e.semi_major:.6e} semi_minor_m={e.semi_minor:.6e} "
          f"orientation_rad={e.orientation:.6f} direction={e.direction.value}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    vc = _config(args)
    orbit = synthesize_orbit(vc)
    if args.reverse:
        orbit = reverse(orbit)
    r = simulate(vc, orbit)
    rows = [["t_s", "cx_m", "cy_m", "vx_m_s", "vy_m_s", "psi_rad", "omega_rad_s",
             "N_newton", "Ft_newton", "vslip_m_s", "contact_flag"]]
    for i in range(len(r)):
        rows.append([repr(float(r.t[i])), repr(float(r.cx[i])), repr(float(r.cy[i])), repr(float(r.vx[i])),
                     repr(float(r.vy[i])), repr(float(r.psi[i])), repr(float(r.omega[i])),
                     repr(float(r.normal_force[i])), repr(float(r.friction_force[i])),
                     repr(float(r.slip_velocity[i])), int(r.contact[i])])
    footer = "".join(f"# {k}={v!r}\n" for k, v in sorted(r.ledger.items()))
    footer += f"# residual_J={energy_audit(r)!r}\n# config_hash={r.config_hash}\n"
    _emit(args, "simulate.csv", _csv_text(rows) + footer)
    s = steady_speed(r)
    print(f"# omega_ss={s['omega_ss']:.6g} rad/s ({s['omega_ss'] * RAD_S_TO_RPM:.6g} rpm) steady={s['achieved']}")
    return EXIT_OK


def cmd_steady(args) -> int:
    vc = _config(args)
    solver = _solver(args)
    if solver in ("transient", "both"):
        s = steady_speed(simulate(vc))
        print(f"transient: omega_ss={s['omega_ss']:.6g} rad/s ({s['omega_ss'] * RAD_S_TO_RPM:.6g} rpm) "
              f"steady={s['achieved']}")
    if solver in ("averaged", "both"):
        ss = steady_state_speed(vc)
        print(f"averaged: omega_ss={ss.omega_ss:.6g} rad/s ({ss.omega_ss * RAD_S_TO_RPM:.6g} rpm) "
              f"stalled={ss.stalled} converged={ss.converged} bound={ss.bound:.6g} rad/s")
    return EXIT_OK


def cmd_spinup(args) -> int:
    vc = _config(args)
    solver = _solver(args)
    if solver in ("transient", "both"):
        r = simulate(vc)
        w = steady_speed(r)["omega_ss"]
        t95 = rise_time(r, omega_ss=w)
        torque = torque_from_spinup(vc.rotor_inertia, abs(w), t95 / 0.95) if t95 > 0 else math.nan
        print(f"transient: omega_ss={w:.6g} rad/s t_95={t95:.6g} s torque_estimate={torque:.6g} N*m")
    if solver in ("averaged", "both"):
        sp = spinup_curve(vc)
        rows = [["t_s", "omega_rad_s"]] + [[repr(float(a)), repr(float(b))] for a, b in zip(sp.t, sp.omega)]
        _emit(args, "spinup.csv", _csv_text(rows))
        tc = torque_speed_curve(vc)
        rows = [["omega_rad_s", "torque_nm"]] + [[repr(float(a)), repr(float(b))] for a, b in zip(tc.omega, tc.torque)]
        _emit(args, "torque_curve.csv", _csv_text(rows))
        print(f"averaged: omega_ss={sp.omega_ss:.6g} rad/s t_95={sp.t_95:.6g} s "
              f"net_torque_at_rest={sp.torque_at_rest:.6g} N*m")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = load_config(args.config, args.overrides, args.preset)
    solver = _solver(args)
    if args.param:
        if not args.grid:
            raise MicromotorError("--param needs --grid")
        specs = [(args.param, [float(v) for v in args.grid.split(",")])]
    elif args.preset:
        specs = list((preset_meta(args.preset).get("sweeps") or {}).items())
    else:
        raise MicromotorError("give --param/--grid or a --preset with declared sweeps")
    stem = args.preset or "sweep"
    results = [run_sweep(SweepSpec(p, tuple(g), solver), cfg, name=f"{stem}_{p}") for p, g in specs]
    if args.out:
        emit_report(results, args.out, fmt=args.fmt)
        print(f"wrote {len(results)} sweep(s) to {args.out}")
    else:
        for r in results:
            sys.stdout.write(r.to_csv())
    return EXIT_OK


def cmd_inertia(args) -> int:
    vc = _config(args)
    rep = inertia_axial(vc.config.rotor)
    print(rep.format())
    if args.out:
        _emit(args, "inertia.csv", _csv_text(rep.csv_rows()))
    return EXIT_OK


def cmd_report(args) -> int:
    out = args.out or "micromotor_report"
    first = run_battery()
    checks = evaluate_properties(first, run_battery())
    emit_report(first.results, out, checks=checks, fmt=args.fmt if args.fmt != "csv" else "both")
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_CHECK_FAILED


HANDLERS = {
    "modal": cmd_modal, "orbit": cmd_orbit, "simulate": cmd_simulate, "steady": cmd_steady,
    "spinup": cmd_spinup, "sweep": cmd_sweep, "inertia": cmd_inertia, "report": cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return HANDLERS[args.command](args)
    except (MicromotorError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
