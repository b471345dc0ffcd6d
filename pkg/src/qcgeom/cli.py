"""Command line front end.

Exit status: 0 when every check is within tolerance, 1 when a check fails
or a module precondition is not met, 2 for usage or schema errors.
"""

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from . import classify as cls
from . import comparison as cmp
from . import curvature as cur
from . import io
from . import lie
from . import myers
from . import torsion as tl
from .config import DEFAULT, Tolerances
from .errors import QCError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.2e}"
    return str(v)


def _table(rows):
    rows = list(rows)
    if not rows:
        return ""
    w = max(len(str(k)) for k, _ in rows)
    return "\n".join(f"{str(k):<{w}}  {_fmt(v)}" for k, v in rows)


class Run:
    """Collects named residuals and the first failing check."""

    def __init__(self, command, tol):
        self.command = command
        self.tol = tol
        self.results = {}
        self.checks = []  # (name, value, limit)

    def check(self, name, value, limit):
        self.checks.append((name, float(value), float(limit)))

    @property
    def first_failure(self):
        for name, v, lim in self.checks:
            if not v <= lim:
                return name
        return None

    def finish(self, args):
        passed = self.first_failure is None
        rep = io.make_report(self.command, self.results, self.tol, passed, self.first_failure)
        rep["checks"] = {n: {"value": v, "limit": lim} for n, v, lim in self.checks}
        if getattr(args, "json", None):
            with open(args.json, "w") as fh:
                fh.write(io.dumps(rep) + "\n")
        if getattr(args, "format", "table") == "json":
            print(io.dumps(rep))
        else:
            print(_table([(n, v) for n, v, _ in self.checks] +
                         [(k, v) for k, v in self.results.items() if np.isscalar(v)]))
            print("PASS" if passed else f"FAIL: {self.first_failure}")
        return EXIT_OK if passed else EXIT_FAIL


def _model(label):
    if label.startswith("qh:"):
        try:
            n = int(label[3:])
        except ValueError:
            raise UsageError(f"bad model label {label!r}; expected qh:N or a file path") from None
        return lie.qh_model(n)
    try:
        return io.load_model(label)
    except FileNotFoundError:
        raise UsageError(f"model file not found: {label}") from None


def _lambdas(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"bad lambda list {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise UsageError("lambda values must be positive")
    return vals


def _write(path, doc):
    text = io.dumps(doc)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# --- subcommands ------------------------------------------------------------

def cmd_validate(args, tol):
    p = io.load_packet(args.packet)
    run = Run("validate", tol)
    rep = tl.validate_packet(p, tol.admissible)
    for k, v in rep.residuals.items():
        run.check(k, v, tol.admissible)
    if rep.admissible:
        s = tl.torsion_scalars(p, tol)
        run.results.update({"Tbar": s.Tbar, "Tplus": s.Tplus, "tau": p.tau})
    return run.finish(args)


def cmd_sample(args, tol):
    p = tl.sample_admissible(args.n, seed=args.seed, sigma=args.sigma, skew=args.skew, tau=args.tau)
    _write(args.output, io.packet_to_dict(p))
    return EXIT_OK


def cmd_model(args, tol):
    if args.which == "qh":
        m = lie.qh_model(args.n)
    else:
        m = _model(args.path)
    if args.output or args.which == "qh":
        _write(args.output, io.model_to_dict(m))
        if args.which == "qh":
            return EXIT_OK
    run = Run("model", tol)
    rep = lie.qc_admissibility(m, tol.admissible)
    run.check("jacobi", rep.jacobi, tol.algebraic)
    run.check("square_residual", rep.square_residual, tol.admissible)
    run.check("gram_defect", rep.gram_defect, tol.admissible)
    run.check("triple_mismatch", rep.triple_mismatch, tol.admissible)
    if rep.duchemin is not None:
        run.check("duchemin", rep.duchemin, tol.admissible)
    run.results.update({"bracket_generating": bool(rep.bracket_generating),
                        "vertical_integrable": bool(rep.vertical_integrable)})
    return run.finish(args)


def cmd_biquard(args, tol):
    m = _model(args.model)
    conn, p = lie.solve_biquard(m, tol)
    run = Run("biquard", tol)
    run.check("solve_residual", conn.solve_residual, tol.solver)
    for k, v in cur.verify_biquard_axioms(m, conn).items():
        run.check("axiom_" + k, v, tol.derived)
    run.results.update({"uniqueness_gap": conn.uniqueness_gap, "tau": p.tau,
                        "TSigma_norm": float(np.linalg.norm(p.TSigma)),
                        "To_norm": float(np.linalg.norm(p.To))})
    run.results["connection"] = conn.to_dict()
    run.results["packet"] = io.packet_to_dict(p)
    return run.finish(args)


def cmd_curvature(args, tol):
    m = _model(args.model)
    conn, p = lie.solve_biquard(m, tol)
    run = Run("curvature", tol)
    if args.lam is None:
        R = cur.biquard_curvature(m, conn)
        RcH, RcV = cur.ricci_blocks(R)
        run.check("mixed_blocks", R.mixed_block_norm(), tol.algebraic)
        run.results.update({"ricci_H": RcH, "ricci_V": RcV,
                            "ricci_H_min_eig": float(np.linalg.eigvalsh(RcH[:m.h, :m.h]).min())})
    else:
        Rb = cmp.levi_civita_curvature(m, args.lam, tol)
        for k, v in cmp.riemann_symmetry_residuals(Rb.R).items():
            run.check(k, v, 1e-10)
        g = cmp.WeightedMetric(args.lam).diag(m.h)
        Ric = np.einsum("aija,a->ij", Rb.R, 1.0 / g)
        s = 1.0 / np.sqrt(g)
        Ric_on = Ric * np.outer(s, s)
        run.results.update({"lambda": args.lam, "ricci_orthonormal": Ric_on,
                            "ricci_min_eig": float(np.linalg.eigvalsh(Ric_on).min())})
    return run.finish(args)


def cmd_crosscheck(args, tol):
    m = _model(args.model)
    conn, p = lie.solve_biquard(m, tol)
    rep = cmp.cross_validate(m, conn, _lambdas(args.lambdas), tol=tol)
    run = Run("crosscheck", tol)
    for lam in rep.lambdas:
        run.check(f"connection[lambda={lam:g}]", rep.connection[lam], tol.derived)
        for k, v in rep.blocks[lam].items():
            run.check(f"{k}[lambda={lam:g}]", v, tol.derived)
    run.results["oracle_checks"] = rep.oracle_checks
    return run.finish(args)


def cmd_identities(args, tol):
    m = _model(args.model)
    conn, p = lie.solve_biquard(m, tol)
    rep = cur.identity_suite(m, conn, tol=tol)
    run = Run("identities", tol)
    for k, v in rep.residuals.items():
        run.check(k, v, tol.derived)
    run.results["skipped"] = rep.skipped
    return run.finish(args)


def cmd_myers(args, tol):
    if args.bounds:
        b, rho0 = io.load_bounds(args.bounds)
        rho0 = args.rho0 if args.rho0 is not None else rho0
    else:
        if None in (args.h, args.ua, args.ub, args.uc):
            raise UsageError("myers needs --h --ua --ub --uc (or --bounds FILE)")
        b, rho0 = myers.MyersBounds(args.h, args.ua, args.ub, args.uc), args.rho0
    if rho0 is None:
        raise UsageError("myers needs --rho0")
    cert = myers.myers_certificate(rho0, b, tol)
    return _certificate_out("myers", cert, args, tol)


def cmd_aqc_myers(args, tol):
    cert = myers.aqc_myers(args.h, args.tau, args.tplus, tol)
    return _certificate_out("aqc-myers", cert, args, tol)


def _certificate_out(name, cert, args, tol):
    run = Run(name, tol)
    run.results.update(cert.to_dict())
    # the verdict is the check: 0 when certified, 1 otherwise
    run.check("certificate", 0.0 if cert.certified else 1.0, 0.0)
    return run.finish(args)


def cmd_classify(args, tol):
    p = io.load_packet(args.packet)
    r = cls.classify(p, args.lam, tol)
    run = Run("classify", tol)
    run.results.update(r.to_dict())
    return run.finish(args)


# --- sweep ------------------------------------------------------------------

def _sweep_packet(job):
    n, seed, tol_dict = job
    tol = Tolerances(**tol_dict)
    rng = np.random.default_rng(seed)
    sigma, skew = (float(x) for x in rng.uniform(0, 2, 2))
    try:
        p = tl.sample_admissible(n, seed=seed, sigma=sigma, skew=skew, tau=float(rng.normal()))
        res = dict(tl.validate_packet(p, tol.admissible).residuals)
        res.update(cmp.synthetic_identity_residuals(p, tol))
        return {"seed": seed, "h": 4 * n, "residuals": res, "error": None}
    except QCError as exc:
        return {"seed": seed, "h": 4 * n, "residuals": {}, "error": str(exc)}


def _sweep_model(job):
    n, mode, seed, tol_dict = job
    from .search import search_torsion_models
    tol = Tolerances(**tol_dict)
    out = []
    for r in search_torsion_models(n, mode, seed, trials=1, max_nfev=100):
        try:
            conn, _ = lie.solve_biquard(r.model, tol)
            rep = cur.identity_suite(r.model, conn, tol=tol)
            out.append({"seed": seed, "name": r.model.name, "residuals": rep.residuals,
                        "model": io.model_to_dict(r.model), "error": None})
        except QCError as exc:
            out.append({"seed": seed, "name": r.model.name, "residuals": {},
                        "model": io.model_to_dict(r.model), "error": str(exc)})
    return out


def cmd_sweep(args, tol):
    run = Run("sweep", tol)
    td = tol.to_dict()
    jobs = [(n, args.seed + i, td) for i in range(args.count) for n in args.quaternionic]
    if args.workers > 1:
        with ProcessPoolExecutor(args.workers) as ex:
            outs = list(ex.map(_sweep_packet, jobs))
    else:
        outs = [_sweep_packet(j) for j in jobs]
    if args.models:
        mjobs = [(1, "sigma", args.seed + i, td) for i in range(args.models)]
        if args.workers > 1:
            with ProcessPoolExecutor(args.workers) as ex:
                mouts = list(ex.map(_sweep_model, mjobs))
        else:
            mouts = [_sweep_model(j) for j in mjobs]
        outs += [o for group in mouts for o in group]
    worst, failures = {}, []
    for o in sorted(outs, key=lambda o: (o.get("h", 0), o["seed"], o.get("name", ""))):
        if o["error"]:
            failures.append(o)
            continue
        for k, v in o["residuals"].items():
            base = k.split("(")[0]
            worst[base] = max(worst.get(base, 0.0), v)
            lim = tol.admissible if "(" in k else tol.derived
            if v > lim:
                failures.append(o)
    for k in sorted(worst):
        run.check(k, worst[k], tol.admissible if k in _LAW_NAMES else tol.derived)
    run.check("errors", len([f for f in failures if f["error"]]), 0)
    run.results.update({"evaluations": len(outs), "failures": len(failures)})
    if failures and args.dump:
        with open(args.dump, "w") as fh:
            fh.write(io.dumps({"failures": failures}) + "\n")
    return run.finish(args)


_LAW_NAMES = {"symmetry", "tracefree", "aminus", "sigma_law", "skewness", "aplus", "tperp",
              "skew_law", "anticomm", "norm_equality", "jto_equality", "vertical_torsion_H"}


# --- parser -----------------------------------------------------------------

def build_parser():
    ap = argparse.ArgumentParser(prog="qcgeom", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--json", metavar="PATH", help="also write the full report to PATH")
    ap.add_argument("--format", choices=("table", "json"), default="table")
    for k, v in DEFAULT.to_dict().items():
        ap.add_argument(f"--tol-{k.replace('_', '-')}", dest=f"tol_{k}", type=float, default=v)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a packet against the torsion laws")
    p.add_argument("packet")

    p = sub.add_parser("sample", help="draw an admissible packet")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--skew", type=float, default=1.0)
    p.add_argument("--tau", type=float, default=0.0)
    p.add_argument("-o", "--output")

    p = sub.add_parser("model", help="emit or check a Lie model")
    msub = p.add_subparsers(dest="which", required=True)
    q = msub.add_parser("qh")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("-o", "--output")
    q = msub.add_parser("load")
    q.add_argument("path")
    q.add_argument("-o", "--output")

    for name, hlp in (("biquard", "solve for the Biquard connection"),
                      ("identities", "direct curvature versus torsion formulas")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("model", help="model file or qh:N")
    p = sub.add_parser("curvature", help="Biquard or weighted Levi-Civita curvature")
    p.add_argument("model")
    p.add_argument("--lambda", dest="lam", type=float)
    p = sub.add_parser("crosscheck", help="predicted versus Koszul Levi-Civita geometry")
    p.add_argument("model")
    p.add_argument("--lambdas", default="0.5,1,2")

    p = sub.add_parser("myers", help="compactness certificate from Ricci bounds")
    p.add_argument("--h", type=int)
    p.add_argument("--ua", type=float)
    p.add_argument("--ub", type=float)
    p.add_argument("--uc", type=float)
    p.add_argument("--rho0", type=float)
    p.add_argument("--bounds", help="bounds JSON file")

    p = sub.add_parser("aqc-myers", help="aqc compactness margin")
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--tplus", type=float, required=True)

    p = sub.add_parser("classify", help="classify a packet")
    p.add_argument("packet")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)

    p = sub.add_parser("sweep", help="randomized property sweep")
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--quaternionic", type=int, nargs="+", default=[1, 2],
                   help="quaternionic dimensions n (h = 4n) to sample")
    p.add_argument("--models", type=int, default=0,
                   help="also search this many h=4 torsion models and run the identity suite")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dump", help="write failing cases to this JSON file")
    return ap


COMMANDS = {"validate": cmd_validate, "sample": cmd_sample, "model": cmd_model,
            "biquard": cmd_biquard, "curvature": cmd_curvature, "crosscheck": cmd_crosscheck,
            "identities": cmd_identities, "myers": cmd_myers, "aqc-myers": cmd_aqc_myers,
            "classify": cmd_classify, "sweep": cmd_sweep}


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        tol = Tolerances(**{k: getattr(args, f"tol_{k}") for k in DEFAULT.to_dict()})
        if args.command == "sample":
            if args.h % 4 or args.h < 4:
                raise UsageError("--h must be a positive multiple of 4")
            args.n = args.h // 4
        return COMMANDS[args.command](args, tol)
    except (UsageError, io.SchemaValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (QCError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


def run():
    sys.exit(main())


if __name__ == "__main__":
    sys.exit(main())
