"""Command-line front end.

Exit codes: 0 success, 1 invalid parameters, 2 verification failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from .linalg import NotPositiveDefinite, hs_norm
from .parameters import DeformationFamily, InvalidFamily, lex_step_coefficients
from .recurrence import eval_matrix_polys, eval_vector_poly, jacobi_operator, total_degree_coeffs

EXIT_OK, EXIT_INVALID, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def matrix_json(a) -> dict:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return {"rows": int(a.shape[0]), "cols": int(a.shape[1]), "data": [float(v) for v in a.ravel()]}


def matrix_from_json(doc: dict) -> np.ndarray:
    return np.asarray(doc["data"], dtype=float).reshape(doc["rows"], doc["cols"])


def _family(args) -> DeformationFamily:
    return DeformationFamily.from_name(args.family, args.s11, args.s10).check()


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--family", default="chebyshev", choices=["chebyshev", "one-param", "two-param", "one_param", "two_param"])
    p.add_argument("--s11", type=float)
    p.add_argument("--s10", type=float)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--z0", type=float)
    p.add_argument("--grid", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cheb2d", description="Deformed bivariate Chebyshev polynomials")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name, help_ in [
        ("coeffs", "recurrence coefficient tables"),
        ("measure", "density on a grid (--matrix for matrix slices)"),
        ("moments", "moment table h[i, j]"),
        ("darboux", "mass-point transform of the block Jacobi operator"),
        ("verify", "identity and orthonormality suite"),
        ("eval", "vector polynomial at seeded points"),
    ]:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        if name == "measure":
            p.add_argument("--matrix", action="store_true")
    return parser


# -- subcommands ------------------------------------------------------------------


def cmd_coeffs(args, fam) -> tuple[dict, int]:
    op = jacobi_operator(fam, args.m)
    top = max(op.tail_index, args.n)
    doc = {
        "family": fam.tag,
        "m": args.m,
        "tail_index": op.tail_index,
        "A": [{"n": n, "matrix": matrix_json(op.A(n))} for n in range(1, top + 1)],
        "B": [{"n": n, "matrix": matrix_json(op.B(n))} for n in range(top)],
    }
    if args.m >= 1 and args.n >= 1:
        step = lex_step_coefficients(fam, args.n, args.m)
        doc["K"] = matrix_json(step.K)
        doc["J1"] = matrix_json(step.J1)
        doc["J2"] = matrix_json(step.J2)
    td = [total_degree_coeffs(fam, n) for n in range(args.n + 1)]
    doc["total_degree"] = [
        {"n": t.n, "Ax": matrix_json(t.Ax), "Ay": matrix_json(t.Ay), "Bx": matrix_json(t.Bx), "By": matrix_json(t.By)}
        for t in td
    ]
    return doc, EXIT_OK


def cmd_measure(args, fam) -> tuple[dict, int]:
    from .measures import line_mass_matrix, matrix_measure_slice, measure_for_family

    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        mu = measure_for_family(fam)
    notes = [str(w.message) for w in caught]
    g = np.cos((np.arange(args.grid) + 0.5) * np.pi / args.grid)[::-1]
    if args.matrix:
        op = jacobi_operator(fam, args.m)
        if fam.tag == "two_param":
            c = op.y_basis
            mats = c @ matrix_measure_slice(mu, args.m, g, args.nodes) @ c.T
            source = "density slice"
        else:
            from .scattering import matrix_weight

            mats = matrix_weight(op, g)
            source = "jost"
        doc = {
            "family": fam.tag,
            "m": args.m,
            "source": source,
            "grid": [float(v) for v in g],
            "sigma": [matrix_json(s) for s in mats],
        }
        if fam.tag == "two_param":
            c = op.y_basis
            doc["line"] = {"x0": mu.lines[0].x0, "mass": matrix_json(c @ line_mass_matrix(mu, args.m, 0, args.nodes) @ c.T)}
    else:
        X, Y = np.meshgrid(g, g, indexing="ij")
        doc = {"family": fam.tag, "grid": [float(v) for v in g], "density": matrix_json(mu.ac_density(X, Y))}
        if mu.lines:
            doc["lines"] = [{"x0": ln.x0, "density": [float(v) for v in mu.line_density(k, g)]} for k, ln in enumerate(mu.lines)]
    if notes:
        doc["notes"] = notes
    return doc, EXIT_OK


def cmd_moments(args, fam) -> tuple[dict, int]:
    from .measures import measure_for_family, moments

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = measure_for_family(fam)
    h = moments(mu, 2 * args.n, 2 * args.m, args.nodes)
    return {"family": fam.tag, "h": matrix_json(h)}, EXIT_OK


def _seq_residuals(pair, cfg, op, count, length, rng):
    d = op.size
    pq = qp = 0.0
    for _ in range(count):
        f = rng.standard_normal((length, d, d))
        f[-2:] = 0
        pq = max(pq, hs_norm(pair.apply_L(f) - cfg.x0 * f - pair.apply_P(pair.apply_Q(f))))
        qp = max(qp, hs_norm(pair.apply_Lhat(f) - cfg.x0 * f - pair.apply_Q(pair.apply_P(f))))
    return pq, qp


def cmd_darboux(args, fam) -> tuple[dict, int]:
    from .darboux import DarbouxConfig, factor_operators, hat_measure, hat_operator, hat_operator_from_coefficients, hat_polynomials
    from .scattering import check_assumtwo, jost_fplus

    if args.z0 is None:
        raise UsageError("darboux needs --z0")
    cfg = DarbouxConfig(args.z0)
    op = jacobi_operator(fam, args.m)
    ck = check_assumtwo(jost_fplus(op))
    if not ck.passed:
        raise InvalidFamily(f"f_+ has {ck.zero_count} zero(s) in the unit disk; the mass-point transform needs none")
    nmax = max(args.n, op.tail_index + 3)
    hop = hat_operator(op, cfg, nmax)
    pair = factor_operators(op, cfg, 20)
    rng = np.random.default_rng(args.seed)
    pq, qp = _seq_residuals(pair, cfg, op, 20, 21, rng)
    alt = hat_operator_from_coefficients(op, cfg, nmax - 1)
    routes = max(
        max(hs_norm(hop.A[k] - alt.A[k]) for k in range(nmax - 1)), max(hs_norm(hop.B[k] - alt.B[k]) for k in range(nmax - 1))
    )
    hm = hat_measure(op, cfg)
    gram = hm.as_matrix_measure().gram(lambda x: hat_polynomials(op, cfg, 6, x), N=args.nodes)
    eye = np.eye(op.size)
    ortho = max(hs_norm(gram[i, j] - (eye if i == j else 0)) for i in range(7) for j in range(7))
    half = 0.5 * eye
    tail = max(
        max(hs_norm(hop.A[n - 1] - half) for n in range(op.tail_index + 1, nmax + 1)),
        max(hs_norm(hop.B[n]) for n in range(op.tail_index, nmax)),
    )
    report = {
        "factor_PQ": _check(pq, 1e-11),
        "factor_QP": _check(qp, 1e-11),
        "hat_coefficient_routes": _check(routes, args.tol),
        "hat_orthonormality": _check(ortho, 1e-7),
        "hat_tail": _check(tail, 1e-12),
    }
    doc = {
        "family": fam.tag,
        "m": args.m,
        "z0": cfg.z0,
        "x0": cfg.x0,
        "r_hat": matrix_json(hm.r_hat),
        "r_hat_min_eig": hm.admissibility(),
        "A_hat": [{"n": n, "matrix": matrix_json(a)} for n, a in enumerate(hop.A, start=1)],
        "B_hat": [{"n": n, "matrix": matrix_json(b)} for n, b in enumerate(hop.B)],
        "report": report,
    }
    return doc, EXIT_OK if all(r["pass"] for r in report.values()) else EXIT_VERIFY


def _check(value: float, tol: float) -> dict:
    return {"max_residual": float(value), "tolerance": tol, "pass": bool(value <= tol)}


def verify_suite(fam: DeformationFamily, n: int, m: int, N: int = 512, tol: float = 1e-8, seed: int = 0) -> dict:
    """Identity and orthonormality residuals for one family at levels up to ``(n, m)``."""
    from .measures import measure_for_family
    from .oracle import LexOracle, check_level, phi_identity_check, vector_gram
    from .recurrence import vector_poly_coeffs
    from .scattering import check_assumtwo, check_unit_circle_identities, jost_fplus

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        mu = measure_for_family(fam)
    out = {}
    ortho = 0.0
    for mm in range(m + 1):
        G = vector_gram(jacobi_operator(fam, mm), mu, n, N)
        G = G.transpose(0, 2, 1, 3).reshape((n + 1) * (mm + 1), -1)
        ortho = max(ortho, float(np.abs(G - np.eye(len(G))).max()))
    out["orthonormality"] = _check(ortho, max(tol, 1e-7))

    oracle = LexOracle(mu, n, m, N)
    gs = 0.0
    for mm in range(m + 1):
        op = jacobi_operator(fam, mm)
        for k in range(n + 1):
            gs = max(gs, float(np.abs(oracle.P(k, mm) - vector_poly_coeffs(op, k)).max()))
    out["gram_schmidt_oracle"] = _check(gs, tol)

    rec = {}
    step = 0.0
    for k in range(1, n + 1):
        for mm in range(1, m + 1):
            coeffs, res = check_level(oracle, k, mm, seed=seed)
            for key, v in res.items():
                rec[key] = max(rec.get(key, 0.0), v)
            cf = lex_step_coefficients(fam, k, mm)
            step = max(step, float(np.abs(coeffs["K"] - cf.K).max()), float(np.abs(coeffs["J1"] - cf.J1).max()), float(np.abs(coeffs["J2"]).max()))
    for key, v in rec.items():
        out[f"lex_{key}"] = _check(v, tol)
    if n >= 1 and m >= 1:
        out["lex_step_closed_form"] = _check(step, tol)

    for mm in range(m + 1):
        op = jacobi_operator(fam, mm)
        if not check_assumtwo(jost_fplus(op)).passed:
            continue
        zs = np.exp(2j * np.pi * (np.arange(64) + 0.5) / 64)
        ids = check_unit_circle_identities(op, zs, nmax=max(n, 4))
        for key, v in ids.items():
            name = f"scattering_{key}"
            prev = out.get(name, {"max_residual": 0.0})["max_residual"]
            out[name] = _check(max(prev, v), 1e-10)

    if fam.tag == "one_param" and m >= 1:
        rng = np.random.default_rng(seed)
        z = np.exp(1j * rng.uniform(0, 2 * np.pi, 100))
        y = rng.uniform(-1, 1, 100)
        worst = max(max(v for k, v in phi_identity_check(fam.s11, mm, z, y).items() if k != "terms") for mm in range(1, m + 1))
        out["phi_identities"] = _check(worst, 1e-10)
    return out


def cmd_verify(args, fam) -> tuple[dict, int]:
    report = verify_suite(fam, args.n, args.m, args.nodes, args.tol, args.seed)
    ok = all(r["pass"] for r in report.values())
    return {"family": fam.tag, "n": args.n, "m": args.m, "pass": ok, "report": report}, EXIT_OK if ok else EXIT_VERIFY


def cmd_eval(args, fam) -> tuple[dict, int]:
    op = jacobi_operator(fam, args.m)
    rng = np.random.default_rng(args.seed)
    pts = rng.uniform(-1, 1, (args.grid, 2))
    vals = eval_vector_poly(op, args.n, pts[:, 0], pts[:, 1]).value
    return {"family": fam.tag, "n": args.n, "m": args.m, "points": matrix_json(pts), "values": matrix_json(vals)}, EXIT_OK


COMMANDS = {
    "coeffs": cmd_coeffs,
    "measure": cmd_measure,
    "moments": cmd_moments,
    "darboux": cmd_darboux,
    "verify": cmd_verify,
    "eval": cmd_eval,
}


# -- output -----------------------------------------------------------------------


def _flatten(doc, prefix=""):
    """``(path, i, j, value)`` rows for every matrix and scalar in ``doc``."""
    if isinstance(doc, dict) and {"rows", "cols", "data"} <= doc.keys():
        cols = doc["cols"]
        for k, v in enumerate(doc["data"]):
            yield prefix, k // cols, k % cols, v
    elif isinstance(doc, dict):
        for key, v in doc.items():
            yield from _flatten(v, f"{prefix}.{key}" if prefix else str(key))
    elif isinstance(doc, list):
        for k, v in enumerate(doc):
            yield from _flatten(v, f"{prefix}[{k}]")
    else:
        yield prefix, "", "", doc


def render(doc: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(doc, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["key", "row", "col", "value"])
    for row in _flatten(doc):
        w.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def render_density_csv(doc: dict) -> str:
    """``x,y,value`` rows of the a.c. density grid; singular lines append rows with their ``x0``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "value"])
    g = doc["grid"]
    dens = matrix_from_json(doc["density"])
    for i, x in enumerate(g):
        for j, y in enumerate(g):
            w.writerow([repr(x), repr(y), repr(float(dens[i, j]))])
    for line in doc.get("lines", []):
        for y, v in zip(g, line["density"]):
            w.writerow([repr(line["x0"]), repr(y), repr(v)])
    return buf.getvalue()


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_help())
        fam = _family(args)
        if args.m < 0 or args.n < 0 or args.nodes < 1 or args.grid < 1:
            raise InvalidFamily("--n, --m must be >= 0 and --nodes, --grid >= 1")
        doc, code = COMMANDS[args.command](args, fam)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except (InvalidFamily, NotPositiveDefinite, ValueError) as exc:
        print(f"cheb2d: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.command == "measure" and args.format == "csv" and not args.matrix:
        text = render_density_csv(doc)
    else:
        text = render(doc, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())
