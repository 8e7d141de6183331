"""Command-line front end.

Exit codes: 0 success, 1 a validation check failed, 2 a numerical routine
failed, 64 bad usage (unknown flag or out-of-range parameter), 74 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import annulus, bifurcate, holo, lift, radial, spectrum
from .io import OUT_ENV, default_out_dir, dumps, write_csv, write_json

log = logging.getLogger("semistiff")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 64, 74

NUMERICAL_ERRORS = (spectrum.SpectrumError, bifurcate.BifurcationError, holo.PoleError,
                    FloatingPointError, np.linalg.LinAlgError)


class UsageError(Exception):
    pass


class ArgParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid_dims(text):
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like NRxNT, got {text!r}")


def _complex(text):
    try:
        return complex(text.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}")


def _require(cond, msg):
    if not cond:
        raise UsageError(msg)


def _rho(args):
    _require(0 < args.rho < 1, f"--rho must lie in (0, 1), got {args.rho}")


class Run:
    """Collects artifacts and the summary of one command."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out) if args.out else default_out_dir()
        self.summary = {"command": args.command}
        self.files = []
        self.status = EXIT_OK

    def path(self, name):
        self.out.mkdir(parents=True, exist_ok=True)
        p = self.out / name
        self.files.append(str(p))
        return p

    def fail(self, what):
        self.status = max(self.status, EXIT_VALIDATION)
        self.summary.setdefault("failed", []).append(what)


# ---------------------------------------------------------------------------
# commands


def cmd_radial(run):
    a = run.args
    _rho(a)
    _require(a.p != 0, "--p must be nonzero")
    n_r, n_t = a.grid
    sol = radial.RadialSolution(a.p, a.rho, a.kind, a.alpha)
    grid = annulus.AnnulusGrid(a.rho, n_r, n_t)
    f = sol.field()
    E = annulus.dirichlet_energy(f, grid)
    hop = annulus.hopf_constant_check(f, grid)
    rows = [["energy_closed_form", sol.energy()], ["energy_quadrature", E],
            ["hopf_c_closed_form", sol.hopf_constant()], ["hopf_c_estimate", hop.c_estimate],
            ["hopf_max_imag", hop.max_imag_part],
            ["half_annulus_dr", radial.half_annulus_reduction_check(a.p, a.rho, sol.kind)]]
    if abs(a.p) >= 2:
        rows.append(["rho_prime", radial.threshold_rho_prime(abs(a.p))])
        rows.append(["minimality", radial.minimality_test(abs(a.p), a.rho).value])
    write_csv(run.path(f"radial_p{a.p}_rho{a.rho}_{sol.kind}.csv"), rows, ["quantity", "value"])
    run.summary.update({r[0]: r[1] for r in rows})
    if abs(E / sol.energy() - 1) > 1e-6:
        run.fail("energy")


def cmd_thresholds(run):
    a = run.args
    _require(a.pmax >= 2, "--pmax must be >= 2")
    rows = [[p, radial.threshold_rho_prime(p)] for p in range(2, a.pmax + 1)]
    write_csv(run.path("thresholds.csv"), rows, ["p", "rho_prime"])
    run.summary["rho_prime"] = {str(p): v for p, v in rows}
    if any(rows[i][1] >= rows[i + 1][1] for i in range(len(rows) - 1)):
        run.fail("monotonicity")


def _parse_seeds(text):
    if not text:
        return None
    return [_complex(s.strip()) for s in text.split(";") if s.strip()]


def cmd_holo(run):
    a = run.args
    _rho(a)
    _require(a.p > 0 > a.q, "need --p > 0 > --q")
    seeds = _parse_seeds(a.seeds)
    if seeds is None and a.random_seeds:
        rng = np.random.default_rng(a.seed)
        n = a.p - a.q
        mod = a.rho ** rng.uniform(0.2, 0.8, n)
        seeds = list(mod * np.exp(2j * np.pi * rng.random(n)))
    try:
        zs = holo.make_zero_set(a.p, a.q, a.rho, seeds)
    except holo.InfeasibleZeroSet as exc:
        raise UsageError(str(exc))
    u = holo.build_solution(zs, a.eps)
    n_r, n_t = a.grid
    rep = holo.validate_solution(u, annulus.AnnulusGrid(a.rho, n_r, n_t))
    write_json(run.path("zeroset.json"), zs.to_json())
    write_csv(run.path("holo_validation.csv"), list(rep.rows())[1:], list(rep.rows())[0])
    run.summary.update({c.name: c.value for c in rep.checks})
    run.summary["constraint_residual"] = zs.constraint_residual
    for c in rep.checks:
        if c.passed is False:
            run.fail(c.name)


def cmd_spectrum(run):
    a = run.args
    _require(a.t > 0, "--t must be positive")
    _require(a.grid >= 201 and a.grid % 2 == 1, "--grid must be odd and >= 201")
    _require(a.p >= 1, "--p must be >= 1")
    res = spectrum.radial_spectrum(a.p, a.t, a.eigs, a.grid, vectors=False)
    rows = [[k + 1, mu, err] for k, (mu, err) in enumerate(zip(res.mus, res.errors))]
    write_csv(run.path(f"spectrum_p{a.p}_t{a.t}.csv"), rows, ["index", "mu", "refinement_estimate"])
    run.summary["mus"] = list(res.mus)
    if np.any(np.diff(res.mus) <= 0):
        run.fail("simplicity")


def cmd_instants(run):
    a = run.args
    _require(a.p >= 1, "--p must be >= 1")
    rows = []
    for k in range(a.p):
        t = spectrum.bifurcation_instant(a.p, k, n_grid=a.grid)
        rows.append([k, t, spectrum.first_eigenvalue(a.p, t, a.grid) + k * k])
    write_csv(run.path(f"instants_p{a.p}.csv"), rows, ["k", "t_k", "mu1_plus_k2"])
    run.summary["instants"] = [r[1] for r in rows]
    if a.p >= 2:
        t1 = rows[1][1]
        run.summary["transversality"] = spectrum.transversality(a.p, t1, n_grid=a.grid)
        run.summary["mu2_positive"] = spectrum.mu2_positive_check(a.p, t1, a.grid)
        if not run.summary["mu2_positive"]:
            run.fail("mu2_positive")


def _branch(run, p, amp, steps, grid, tol):
    n_r, n_t = grid
    _require(p >= 2, "bifurcating branches need --p >= 2")
    _require(n_r >= 9 and n_t >= 8, "grid too coarse")
    start = bifurcate.branch_switch(p, amp, tol, n_r, n_t)
    states = [start] + (bifurcate.continue_branch(start, steps, tol=tol)[1:] if steps else [])
    floor = bifurcate.trivial_noise_floor(p, start.t, n_r, n_t)
    rows = bifurcate.branch_rows(states, floor)
    write_csv(run.path(f"branch_p{p}.csv"), rows,
              ["step", "t", "amplitude", "residual", "nonsymmetry"])
    return states, floor


def cmd_bifurcate(run):
    a = run.args
    states, floor = _branch(run, a.p, a.amp, a.steps, a.grid, a.tol)
    last = states[-1]
    lift.export_mesh(bifurcate.state_mesh(last), run.path(f"surface_p{a.p}.{a.format}"))
    run.files.append(run.files[-1] + ".json")
    ns = bifurcate.nonsymmetry_metric(last, floor)
    bc = bifurcate.boundary_cover_check(last)
    run.summary.update({"t": last.t, "amplitude": last.amplitude, "residual": last.residual_norm,
                        "nonsymmetry": ns.metric, "noise_floor": floor,
                        "both_signs": ns.both_signs, "boundary_ok": bc.passed})
    if not (ns.significant and ns.both_signs and bc.passed):
        run.fail("branch_checks")


def cmd_lift(run):
    a = run.args
    _rho(a)
    n_r, n_t = a.grid
    sol = radial.RadialSolution(a.p, a.rho, a.kind)
    grid = annulus.AnnulusGrid(a.rho, n_r, n_t)
    f = sol.field()
    if sol.kind == "catenoidal":
        mesh = lift.lift_catenoid_type(f, grid)
        h = lift.catenoid_height(mesh.metadata["c"])
        run.summary["plane_symmetry"] = lift.plane_symmetry_check(mesh, mesh.metadata["z0"])
        run.summary["resolution"] = mesh.resolution()
        if run.summary["plane_symmetry"] >= run.summary["resolution"]:
            run.fail("plane_symmetry")
    else:
        mesh = lift.lift_helicoid_type(f, grid)
        h = lift.helicoid_height(mesh.metadata["c"])
    mesh.metadata["p"] = a.p
    res = lift.conformality_residual(f, h, grid)
    run.summary["conformality_residual"] = res
    if res > 1e-6:
        run.fail("conformality")
    lift.export_mesh(mesh, run.path(f"lift_p{a.p}_{sol.kind}.{a.format}"))


def _suite_radial(rho):
    grid = annulus.AnnulusGrid(rho, 201, 64)
    out = []
    for p in (1, 2, 3):
        for kind in radial.KINDS:
            f = radial.RadialSolution(p, rho, kind).field()
            E = annulus.dirichlet_energy(f, grid)
            out.append((f"energy p={p} {kind}", abs(E / radial.radial_energy(p, rho, kind) - 1) < 1e-6))
            h = annulus.hopf_constant_check(f, grid)
            out.append((f"hopf p={p} {kind}",
                        abs(h.c_estimate - radial.radial_hopf_constant(p, rho, kind)) < 1e-8
                        and h.max_imag_part < 1e-8))
        out.append((f"E(u~_p) > E(u_p) p={p}",
                    radial.radial_energy(p, rho, "hel") > radial.radial_energy(p, rho)))
        out.append((f"dr u_p = 0 at sqrt(rho) p={p}",
                    radial.half_annulus_reduction_check(p, rho) < 1e-12))
    for p in range(2, 7):
        rp = radial.threshold_rho_prime(p)
        if abs(rho - rp) < 1e-9:
            continue  # rho sits on the threshold itself (rho'_3 = 1/2)
        gap = radial.comparison_gap(p, rho)
        out.append((f"comparison sign p={p}", (gap > 0) == (rho < rp)))
    return out


def _suite_holo(rho):
    out = []
    grid = annulus.AnnulusGrid(rho, 201, 128)
    for p, q in ((1, -1), (2, -1), (2, -2)):
        u = holo.build_solution(holo.make_zero_set(p, q, rho))
        out.append((f"holo ({p},{q})", holo.validate_solution(u, grid).passed))
    return out


def _suite_spectrum(_rho_unused):
    x = spectrum.xtanh_root()
    out = []
    for p in (1, 2, 3):
        out.append((f"p t0 p={p}", abs(p * spectrum.bifurcation_instant(p, 0) - x) < 1e-5))
    t1 = spectrum.bifurcation_instant(2, 1)
    out.append(("mu2(t1) > 0", spectrum.mu2_positive_check(2, t1)))
    out.append(("transversality < 0", spectrum.transversality(2, t1) < 0))
    return out


def _suite_lift(rho):
    grid = annulus.AnnulusGrid(rho, 101, 64)
    out = []
    for kind, make in (("catenoidal", lift.catenoid_height), ("helicoidal", lift.helicoid_height)):
        sol = radial.RadialSolution(1, rho, kind)
        res = lift.conformality_residual(sol.field(), make(sol.hopf_constant()), grid)
        out.append((f"conformality {kind}", res < 1e-6))
    return out


SUITES = {"radial": _suite_radial, "holo": _suite_holo, "spectrum": _suite_spectrum,
          "lift": _suite_lift}


def cmd_verify(run):
    a = run.args
    _rho(a)
    names = list(SUITES) if a.suite == "all" else [a.suite]
    rows = []
    for name in names:
        for check, ok in SUITES[name](a.rho):
            rows.append([name, check, "pass" if ok else "fail"])
            if not ok:
                run.fail(f"{name}: {check}")
    write_csv(run.path(f"verify_{a.suite}.csv"), rows, ["suite", "check", "result"])
    run.summary["checks"] = len(rows)
    run.summary["passed"] = sum(r[2] == "pass" for r in rows)


def cmd_repro(run):
    a = run.args
    if a.figure != "bifurcation-p2":
        raise UsageError(f"unknown figure {a.figure!r}")
    p = 2
    states, floor = _branch(run, p, a.amp, a.steps, a.grid, a.tol)
    last = states[-1]
    cat = bifurcate.PerturbationGrid.zeros(p, states[0].t, *a.grid)
    lift.export_mesh(bifurcate.state_mesh(cat, {"role": "catenoid at t_1"}),
                     run.path(f"catenoid_p{p}.{a.format}"))
    lift.export_mesh(bifurcate.state_mesh(last, {"role": "bifurcated surface"}),
                     run.path(f"bifurcated_p{p}.{a.format}"))
    th = last.u.theta
    write_csv(run.path(f"mid_parallel_p{p}.csv"),
              [[t, 1.0 + u, u] for t, u in zip(th, last.u.u[0])],
              ["theta", "axis_distance", "u"])
    ns = bifurcate.nonsymmetry_metric(last, floor)
    bc = bifurcate.boundary_cover_check(last)
    run.summary.update({"t": last.t, "amplitude": last.amplitude, "residual": last.residual_norm,
                        "nonsymmetry": ns.metric, "noise_floor": floor,
                        "both_signs": ns.both_signs, "boundary_ok": bc.passed})
    if not (ns.significant and ns.both_signs and bc.passed):
        run.fail("branch_checks")


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or .)")
    common.add_argument("--json", action="store_true", help="print a JSON summary line")
    common.add_argument("--seed", type=int, default=0, help="random seed")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = ArgParser(prog="semistiff", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=ArgParser)

    s = sub.add_parser("radial", parents=[common],
                       help="energy and Hopf constant of the rotationally equivariant solutions",
                       description="Closed-form and quadrature energy, Hopf constant and "
                                   "non-minimality threshold of u_p / u~_p.")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--kind", choices=["cat", "hel", "catenoidal", "helicoidal"], default="cat")
    s.add_argument("--alpha", type=_complex, default=1.0)
    s.add_argument("--grid", type=_grid_dims, default=(401, 256))
    s.set_defaults(func=cmd_radial)

    s = sub.add_parser("thresholds", parents=[common],
                       help="table of the non-minimality radii rho'_p",
                       description="Roots of g_p(rho) = (p-1) rho^p + p rho^(p-1) - 1 for p = 2..pmax.")
    s.add_argument("--pmax", type=int, default=8)
    s.set_defaults(func=cmd_thresholds)

    s = sub.add_parser("holo", parents=[common],
                       help="build and validate a holomorphic minimizer of degrees (p, q)",
                       description="Product-formula minimizer with prescribed zeros; writes the "
                                   "zero set (JSON) and a validation report (CSV).")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--seeds", help="semicolon-separated complex seeds, e.g. '0.7+0.1j;-0.6j'")
    s.add_argument("--random-seeds", action="store_true", help="draw seeds with --seed")
    s.add_argument("--eps", type=float, default=1e-14)
    s.add_argument("--grid", type=_grid_dims, default=(201, 128))
    s.set_defaults(func=cmd_holo)

    s = sub.add_parser("spectrum", parents=[common],
                       help="radial Jacobi eigenvalues of the p-covered catenoid",
                       description="Lowest eigenvalues of -w'' - 2p^2 sech^2(pr) w = mu w on "
                                   "[-t, t] with Dirichlet ends, Richardson-corrected.")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--eigs", type=int, default=3)
    s.add_argument("--grid", type=int, default=spectrum.DEFAULT_GRID)
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("instants", parents=[common],
                       help="bifurcation instants t_0 .. t_{p-1}",
                       description="Instants where the first radial eigenvalue equals -k^2.")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--grid", type=int, default=spectrum.DEFAULT_GRID)
    s.set_defaults(func=cmd_instants)

    branch_opts = argparse.ArgumentParser(add_help=False)
    branch_opts.add_argument("--amp", type=float, default=1e-2)
    branch_opts.add_argument("--steps", type=int, default=10)
    branch_opts.add_argument("--grid", type=_grid_dims, default=(65, 64))
    branch_opts.add_argument("--tol", type=float, default=1e-10)
    branch_opts.add_argument("--format", choices=["obj", "ply"], default="obj")

    s = sub.add_parser("bifurcate", parents=[common, branch_opts],
                       help="switch to and continue the non-rotational branch at t_1",
                       description="Newton/pseudo-arclength solution of H(X_t + u N_t) = 0 in the "
                                   "even-even symmetry class; writes a branch CSV and a mesh.")
    s.add_argument("--p", type=int, default=2)
    s.set_defaults(func=cmd_bifurcate)

    s = sub.add_parser("lift", parents=[common],
                       help="mesh of the minimal surface lifted from u_p or u~_p",
                       description="Adds the height coordinate fixed by the Hopf constant and "
                                   "exports an OBJ/PLY mesh with a JSON sidecar.")
    s.add_argument("--p", type=int, default=1)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--kind", choices=["cat", "hel", "catenoidal", "helicoidal"], default="cat")
    s.add_argument("--grid", type=_grid_dims, default=(101, 128))
    s.add_argument("--format", choices=["obj", "ply"], default="obj")
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("verify", parents=[common],
                       help="run a suite of invariant checks",
                       description="Checks closed forms against quadrature and spectral oracles.")
    s.add_argument("--suite", choices=list(SUITES) + ["all"], default="all")
    s.add_argument("--rho", type=float, default=0.5)
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("repro", parents=[common, branch_opts],
                       help="regenerate a figure's data",
                       description="bifurcation-p2: branch CSV, catenoid and bifurcated meshes, "
                                   "and the mid-parallel profile.")
    s.add_argument("--figure", required=True, choices=["bifurcation-p2"])
    s.set_defaults(func=cmd_repro)
    return ap


def dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    run = Run(args)
    t0 = time.perf_counter()
    try:
        args.func(run)
    except UsageError as exc:
        print(f"semistiff {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"semistiff {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NUMERICAL_ERRORS as exc:
        print(f"semistiff {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"semistiff {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    run.summary["status"] = "ok" if run.status == EXIT_OK else "validation_failed"
    run.summary["files"] = run.files
    run.summary["seconds"] = round(time.perf_counter() - t0, 3)
    if args.json:
        print(dumps(run.summary))
    else:
        keys = [k for k in run.summary if k not in ("files", "command")]
        brief = ", ".join(f"{k}={_short(run.summary[k])}" for k in keys[:8])
        print(f"{args.command}: {brief}")
    return run.status


def _short(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, dict)) and len(str(v)) > 60:
        return f"<{len(v)} items>"
    return str(v)


def main(argv=None):
    sys.exit(dispatch(argv))


if __name__ == "__main__":
    main()
