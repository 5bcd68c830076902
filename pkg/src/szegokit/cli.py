"""Command line interface.

::

    szegokit domain validate CFG
    szegokit solve szego CFG --a RE,IM [--out FILE]
    szegokit ahlfors CFG --w RE,IM [--at RE,IM ...]
    szegokit verify CFG [--suite all|szego|potential|propermap] [--out FILE]
    szegokit export CFG --what W --grid NXxNY --out FILE [--point RE,IM]
    szegokit fit CFG --target T [--out FILE]

Every command accepts ``--threads N`` to cap BLAS threads.  Exit codes:
0 success (all checks passed), 1 a residual check failed, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS", "BLIS_NUM_THREADS",
                "VECLIB_MAXIMUM_THREADS", "NUMEXPR_NUM_THREADS")

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def parse_complex(text: str) -> complex:
    """``"RE,IM"`` or ``"RE"`` to a complex number."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected RE,IM but got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None, help="cap BLAS/OpenMP threads")

    p = argparse.ArgumentParser(prog="szegokit", description=__doc__.split("\n\n")[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    dom = sub.add_parser("domain", help="domain utilities", parents=[common])
    dsub = dom.add_subparsers(dest="action", required=True)
    dv = dsub.add_parser("validate", help="check a domain config", parents=[common])
    dv.add_argument("config")

    solve = sub.add_parser("solve", help="kernel solves", parents=[common])
    ssub = solve.add_subparsers(dest="kernel", required=True)
    sz = ssub.add_parser("szego", help="boundary trace of S(., a) and L(., a)", parents=[common])
    sz.add_argument("config")
    sz.add_argument("--a", type=parse_complex, required=True, metavar="RE,IM")
    sz.add_argument("--out", default=None, help="write JSON here instead of stdout")

    ah = sub.add_parser("ahlfors", help="Ahlfors map f_w: zeros, properness, values", parents=[common])
    ah.add_argument("config")
    ah.add_argument("--w", type=parse_complex, required=True, metavar="RE,IM")
    ah.add_argument("--at", type=parse_complex, action="append", default=[], metavar="RE,IM",
                    help="evaluate f_w here (repeatable)")

    ver = sub.add_parser("verify", help="run verification suites", parents=[common])
    ver.add_argument("config")
    ver.add_argument("--suite", choices=("all", "szego", "potential", "propermap"), default="all")
    ver.add_argument("--out", default=None, help="JSON report path")

    ex = sub.add_parser("export", help="sample a field on a grid to CSV", parents=[common])
    ex.add_argument("config")
    ex.add_argument("--what", required=True,
                    choices=("caratheodory", "green", "poisson", "szego", "bergman", "ahlfors"))
    ex.add_argument("--grid", required=True, metavar="NXxNY")
    ex.add_argument("--out", required=True)
    ex.add_argument("--point", type=parse_complex, default=None, metavar="RE,IM",
                    help="second argument (pole or base point)")

    fit = sub.add_parser("fit", help="rational-model evidence", parents=[common])
    fit.add_argument("config")
    fit.add_argument("--target", required=True, choices=("fb_over_fa", "bergman_factors", "caratheodory"))
    fit.add_argument("--out", default=None)
    return p


def _emit(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, indent=2, sort_keys=True)
    if out:
        with open(out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _run(args) -> int:
    # heavy imports happen after the thread environment is set
    import numpy as np

    from . import harness
    from .ahlfors import ahlfors, fiber, properness_report
    from .geometry import boundary_grid, domain_from_dict
    from .szego import szego_solution

    if args.command == "domain":
        rep = harness.check_config_domain(args.config)
        _emit(rep, None)
        return EXIT_OK if rep["ok"] else EXIT_INVALID

    if args.command == "verify":
        rep = harness.verify_suite(args.config, args.suite)
        for line in rep.summary_lines():
            print(line, file=sys.stderr)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(rep.to_json() + "\n")
        else:
            print(rep.to_json())
        return EXIT_OK if rep.passed else EXIT_FAIL

    if args.command == "export":
        path = harness.export_field(args.config, args.what, args.grid, args.out, point=args.point)
        print(path)
        return EXIT_OK

    if args.command == "fit":
        res = harness.fit_target(args.config, args.target)
        _emit(res, args.out)
        return EXIT_OK if res.get("ok") else EXIT_FAIL

    cfg = harness.load_config(args.config)
    grid = boundary_grid(domain_from_dict(cfg["domain"]), cfg["nodes"])

    if args.command == "solve":
        a = args.a
        if not grid.contains(a)[0]:
            raise harness.ConfigError(f"a = {a} is not inside the domain")
        sol = szego_solution(grid, a)
        _emit(harness._clean({"a": a, "domain": grid.domain.name, "nodes": grid.nodes,
                              "S": sol.S.values, "L": sol.L.values}), args.out)
        return EXIT_OK

    if args.command == "ahlfors":
        w = args.w
        if not grid.contains(w)[0]:
            raise harness.ConfigError(f"w = {w} is not inside the domain")
        f = ahlfors(grid, w)
        rep = properness_report(f)
        rep["zeros"] = fiber(f, 0.0)
        rep["values"] = {f"{z.real},{z.imag}": f(z) for z in args.at}
        rep["derivative_at_w"] = f.derivative(w)
        _emit(harness._clean(rep), None)
        return EXIT_OK if rep["ok"] else EXIT_FAIL

    del np
    return EXIT_INVALID


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return EXIT_INVALID
        for var in _THREAD_VARS:
            os.environ[var] = str(args.threads)
    from .geometry import GeometryError
    from .harness import ConfigError

    try:
        return _run(args)
    except (ConfigError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
