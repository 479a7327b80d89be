"""Command line front-end: ``frobpen {validate|build|check|basis|demo}``.

JSON goes to stdout; ``--pretty`` adds a human report on stderr.  Exit codes:
0 all requested certificates pass, 1 some certificate fails, 2 bad input.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

from frobpen import corpus
from frobpen.assemble import ConditionsError, assemble, warped_sum_form
from frobpen.blocks import make_block, pencil_matrix
from frobpen.certificate import Certificate
from frobpen.exactcas import RMatrix, SingularMatrix, scalar, scalar_str
from frobpen.forest import (ForestError, ForestSpec, PencilSpec, derive_order, load_spec, pencil_basis,
                            polys_from_json, validate_conditions)
from frobpen.frobalg import AlgebraWithForms, build_h, check_frobenius, check_pencil_compat, sample_m
from frobpen.frobmap import (affine_change, decompose_assembled, frobenius_map, pushforward,
                             pushforward_source, transform_operator)
from frobpen.riemann import MetricRep, is_flat, nijenhuis_torsion, poisson_compatible

SUITES = ("flat", "frobenius", "compat", "algebra")
DEMOS = ("aff2", "aff3", "example1", "fig1")


class UsageError(Exception):
    pass


@dataclass
class CheckResult:
    name: str
    certificate: Certificate
    seconds: float

    def to_json(self, timings: bool = False) -> dict:
        out = {"check": self.name, **self.certificate.to_json()}
        if timings:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass
class RunReport:
    command: str
    fingerprint: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.certificate.passed for c in self.checks)

    def run(self, name: str, fn: Callable[[], Certificate]) -> Certificate:
        t0 = time.perf_counter()
        cert = fn()
        self.checks.append(CheckResult(name, cert, time.perf_counter() - t0))
        return cert

    def to_json(self, timings: bool = False) -> dict:
        return {"command": self.command, "fingerprint": self.fingerprint,
                "status": "pass" if self.ok else "fail",
                "checks": [c.to_json(timings) for c in self.checks]}

    def pretty(self) -> str:
        lines = [f"{self.command} [{self.fingerprint}]"]
        for c in self.checks:
            lines.append(f"  {c.certificate.status:4}  {c.name:<22} {c.seconds:8.3f}s")
            if not c.certificate.passed:
                lines.append(f"        witness: {json.dumps(c.certificate.witness)}")
        lines.append("PASS" if self.ok else "FAIL")
        return "\n".join(lines)


def fingerprint(spec, *extra) -> str:
    blob = json.dumps([spec.to_json(), *[str(e) for e in extra]], sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def max_n() -> int:
    return int(os.environ.get("FROBPEN_MAX_N", "6"))


def _guard(f: ForestSpec):
    if f.n > max_n():
        raise UsageError(f"dimension {f.n} exceeds FROBPEN_MAX_N={max_n()}")


def default_chart(n: int) -> str:
    return "x" if n <= 4 else "y"


# ---------------------------------------------------------------------------
# suites


def _assembled_or_fail(p: PencilSpec, chart: str):
    try:
        return assemble(p, chart, unchecked=True), None
    except ZeroDivisionError as exc:
        return None, Certificate.fail("assemble", {"reason": str(exc)})


def _flat(p: PencilSpec, chart: str) -> Certificate:
    am, bad = _assembled_or_fail(p, chart)
    if bad:
        return bad
    try:
        return is_flat(am.g)
    except SingularMatrix:
        return Certificate.fail("flat", {"reason": "metric is degenerate"})


def _decompose(p: PencilSpec):
    am, bad = _assembled_or_fail(p, "y")
    if bad:
        return None, bad
    try:
        r = decompose_assembled(am)
    except SingularMatrix as exc:
        return None, Certificate.fail("affine", {"reason": str(exc)})
    return r.data, r.certificate


def _compat(p: PencilSpec, q: PencilSpec, chart: str) -> tuple[Certificate, Certificate]:
    a1, bad = _assembled_or_fail(p, chart)
    a2, bad2 = _assembled_or_fail(q, chart)
    if bad or bad2:
        return bad or bad2, bad or bad2
    try:
        pc = poisson_compatible(a1.g, a2.g)
        R = a2.g.contravariant @ a1.g.covariant
    except SingularMatrix:
        fail = Certificate.fail("poisson_compatible", {"reason": "metric is degenerate"})
        return fail, fail
    return pc, nijenhuis_torsion(R, a1.vars).certificate


def run_suites(p: PencilSpec, suites: Sequence[str], report: RunReport, *, second: PencilSpec | None = None,
               m0=None, m=None, seed: int = 0, chart: str | None = None) -> RunReport:
    f = p.forest
    chart = chart or default_chart(f.n)
    rng = random.Random(seed)
    report.run("conditions", lambda: validate_conditions(p))
    if "flat" in suites:
        report.run("flat", lambda: _flat(p, chart))
    data = None
    if "frobenius" in suites or "algebra" in suites:
        holder = {}

        def aff():
            holder["d"], cert = _decompose(p)
            return cert
        report.run("affine", aff)
        data = holder.get("d")
        if "frobenius" in suites and data is not None:
            report.run("frobenius-algebra", lambda: check_frobenius(AlgebraWithForms.from_data(data)))
    if "compat" in suites or "algebra" in suites:
        q = second if second is not None else corpus.random_member(pencil_basis(f), rng)
    if "compat" in suites:
        res = {}

        def pc():
            res["pc"], res["nij"] = _compat(p, q, chart)
            return res["pc"]
        report.run("poisson-compatible", pc)
        report.run("nijenhuis", lambda: res["nij"])
    if "algebra" in suites and data is not None:
        second_data = {}

        def aff2():
            second_data["d"], cert = _decompose(q)
            return cert
        report.run("affine-second", aff2)
        d2 = second_data.get("d")
        if d2 is not None:
            if m0 is None or m is None:
                m0_, m_ = sample_m(f.n, rng, data)
                m0 = m0_ if m0 is None else m0
                m = m_ if m is None else m
            if len(m) != f.n:
                raise UsageError(f"--m needs {f.n} values")
            h1, h2 = build_h(data, m0, m), build_h(d2, m0, m)
            report.run("frobenius-h", lambda: check_frobenius(AlgebraWithForms.from_data(data, h1)))
            report.run("pencil-compat", lambda: check_pencil_compat((data, h1), (d2, h2)))
    return report


# ---------------------------------------------------------------------------
# commands


def _load(path: str):
    try:
        spec = load_spec(path)
    except FileNotFoundError:
        raise UsageError(f"no such file: {path}") from None
    _guard(spec.forest if isinstance(spec, PencilSpec) else spec)
    return spec


def _pencil(spec) -> PencilSpec:
    return spec if isinstance(spec, PencilSpec) else pencil_basis(spec).generic()


def _emit(obj, out) -> None:
    out.write(json.dumps(obj, indent=2) + "\n")


def cmd_validate(args, out, err) -> int:
    spec = _load(args.spec)
    if isinstance(spec, ForestSpec):
        report = RunReport("validate", fingerprint(spec))
        report.run("forest", lambda: Certificate.ok("forest", blocks=spec.B, n=spec.n))
    else:
        report = RunReport("validate", fingerprint(spec))
        report.run("forest", lambda: Certificate.ok("forest", blocks=spec.forest.B, n=spec.forest.n))
        report.run("conditions", lambda: validate_conditions(spec))
    return _finish(report, args, out, err)


def cmd_build(args, out, err) -> int:
    p = _pencil(_load(args.spec))
    chart = args.chart
    try:
        if chart == "u":
            am = assemble(p, "y")
            m = frobenius_map(am)
            g = pushforward(am.g, m)
            _emit({**g.to_json(), "map": m.strings()}, out)
        else:
            _emit(assemble(p, chart).g.to_json(), out)
    except ConditionsError as exc:
        _emit({"status": "fail", "witness": exc.certificate.witness}, out)
        return 1
    return 0


def _parse_m(text: str | None):
    if text is None:
        return None
    try:
        return [scalar(x) for x in text.split(",") if x.strip()]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad --m value: {exc}") from None


def cmd_check(args, out, err) -> int:
    p = _pencil(_load(args.spec))
    second = None
    if args.second:
        try:
            with open(args.second) as fh:
                second = PencilSpec(p.forest, polys_from_json(json.load(fh), p.forest))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read --second: {exc}") from None
    suites = SUITES if args.suite == "all" else (args.suite,)
    m0 = scalar(args.m0) if args.m0 is not None else None
    m = _parse_m(args.m)
    fp = fingerprint(p, args.suite, args.seed, second.to_json() if second else None, m0, m, args.chart)
    report = RunReport(f"check {args.suite}", fp)
    run_suites(p, suites, report, second=second, m0=m0, m=m, seed=args.seed, chart=args.chart)
    return _finish(report, args, out, err)


def cmd_basis(args, out, err) -> int:
    spec = _load(args.spec)
    f = spec.forest if isinstance(spec, PencilSpec) else spec
    _emit(pencil_basis(f).to_json(), out)
    return 0


def _finish(report: RunReport, args, out, err) -> int:
    _emit(report.to_json(getattr(args, "timings", False)), out)
    if getattr(args, "pretty", False):
        err.write(report.pretty() + "\n")
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------
# demos


def _block(title: str, M: RMatrix) -> list[str]:
    return [f"{title}:"] + ["  " + line for line in str(M).splitlines()]


def demo_aff(n: int) -> list[str]:
    u = tuple(f"u{i}" for i in range(1, n + 1))
    blk = make_block(n, u, tuple(f"x{i}" for i in range(1, n + 1)))
    lines = [f"AFF pencil, n = {n}, Frobenius coordinates {', '.join(u)}"]
    lines += _block("L", blk.L("y"))
    for i in range(n + 1):
        coeffs = [0] * (n + 2)
        coeffs[i] = 1
        lines += _block(f"g{i} = L^{i} g0", pencil_matrix(blk, coeffs, "y"))
    lines += _block("g_LC (diagonal chart)", blk.g0("x"))
    return lines


def example1_charts():
    """Assembled generic two-block (2, 2) pencil, its coordinate map and the sign-flipped chart."""
    f = corpus.example1()
    am = assemble(pencil_basis(f).generic(), "y")
    m = frobenius_map(am)
    flip = affine_change(m, [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, -1, 0], [0, 0, 0, -1]])
    return am, m, flip


def example1_matrices(am, m) -> dict[str, RMatrix]:
    Z = RMatrix.zeros(2)
    b1, b2 = am.blocks
    J = m.jacobian()
    g1 = RMatrix.block_diag([b1.g0("y"), Z])
    g2 = RMatrix.block_diag([Z, b2.g0("y").scale(am.warps[1])])
    return {
        "g": pushforward_source(am.g, m).map(m.to_target),
        "L1": transform_operator(RMatrix.block_diag([b1.L("y"), Z]), m),
        "L2": transform_operator(RMatrix.block_diag([Z, b2.L("y")]), m),
        "g1_LC": (J @ g1 @ J.T).map(m.to_target),
        "g2_LC": (J @ g2 @ J.T).map(m.to_target),
    }


def demo_example1() -> list[str]:
    f = corpus.example1()
    pb = pencil_basis(f)
    amx = assemble(pb.generic(), "x")
    am, m, flip = example1_charts()
    mx = frobenius_map(amx)
    lines = ["Two blocks of size 2, block 2 attached to block 1 with mark 0",
             f"free parameters: {', '.join(pb.free)}"]
    lines += _block("g in diagonal coordinates", amx.g.contravariant)
    lines.append("Frobenius coordinates:")
    lines += [f"  {k} = {v}" for k, v in mx.strings().items()]
    lines += _block("g in these coordinates", example1_matrices(am, m)["g"])
    mats = example1_matrices(am, flip)
    lines.append("chart (u1, u2, -u3, -u4):")
    for name in ("g", "L1", "L2", "g1_LC", "g2_LC"):
        lines += _block(f"{name}", mats[name])
    return lines


def demo_fig1() -> list[str]:
    f = corpus.fig1_upper()
    o = derive_order(f)
    pb = pencil_basis(f)
    am = assemble(pb.generic(), "y")
    lines = ["Tree 2 -> 1 (mark 2), 3 -> 2 (mark 3), 4 -> 2 (mark 4), all blocks of size 1",
             "precedes: " + ", ".join(f"{a}<{b}" for a, b in o.pairs()),
             "lambda: " + ", ".join(f"l({a},{b})={scalar_str(o.lam(a, b))}" for a, b in o.pairs()),
             f"pencil dimension {pb.dimension}, free parameters: {', '.join(pb.free)}"]
    lines += str(warped_sum_form(am)).splitlines()
    lines.append("Frobenius coordinates:")
    lines += [f"  {k} = {v}" for k, v in frobenius_map(am).strings().items()]
    return lines


def _demo_forest(name: str) -> ForestSpec:
    return {"aff2": corpus.single(2), "aff3": corpus.single(3), "example1": corpus.example1(),
            "fig1": corpus.fig1_upper()}[name]


def demo_text(name: str) -> list[str]:
    if name == "aff2":
        return demo_aff(2)
    if name == "aff3":
        return demo_aff(3)
    if name == "example1":
        return demo_example1()
    return demo_fig1()


def cmd_demo(args, out, err) -> int:
    for line in demo_text(args.name):
        out.write(line + "\n")
    f = _demo_forest(args.name)
    rng = random.Random(args.seed)
    p = corpus.random_member(pencil_basis(f), rng)
    report = RunReport(f"demo {args.name}", fingerprint(p, args.seed))
    run_suites(p, SUITES, report, seed=args.seed)
    out.write("suite (seeded member):\n")
    for c in report.checks:
        out.write(f"  {c.certificate.status}  {c.name}\n")
    if args.pretty:
        err.write(report.pretty() + "\n")
    return 0 if report.ok else 1


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frobpen", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--pretty", action="store_true", help="human-readable report on stderr")
        p.add_argument("--timings", action="store_true", help="include wall times in the JSON report")

    p = sub.add_parser("validate", help="forest validity and conditions (i)-(iii)")
    p.add_argument("spec")
    common(p)
    p = sub.add_parser("build", help="assembled metric as JSON")
    p.add_argument("spec")
    p.add_argument("--chart", choices=("x", "y", "u"), default="y")
    p = sub.add_parser("check", help="run certificate suites")
    p.add_argument("spec")
    p.add_argument("--suite", choices=(*SUITES, "all"), default="all")
    p.add_argument("--second", help="polys-only JSON for the second pencil member")
    p.add_argument("--m0")
    p.add_argument("--m", help="comma separated m^1..m^n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--chart", choices=("x", "y"), default=None)
    common(p)
    p = sub.add_parser("basis", help="pencil dimension and basis")
    p.add_argument("spec")
    p = sub.add_parser("demo", help="worked examples")
    p.add_argument("name", choices=DEMOS)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pretty", action="store_true")
    return ap


COMMANDS = {"validate": cmd_validate, "build": cmd_build, "check": cmd_check, "basis": cmd_basis, "demo": cmd_demo}


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return COMMANDS[args.command](args, out, err)
    except (UsageError, ForestError, ValueError) as exc:
        err.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
