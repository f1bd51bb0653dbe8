"""``spinscape`` command line: validate, spin, branchable, move, selftest.

Exit codes: 0 success, 1 domain failure, 2 I/O problem, 3 search guard hit.
JSON output carries a ``schema`` field and is deterministic for a given
input and seed.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

from . import algebra as alg
from .branching import (
    GuardExceeded,
    PreBranching,
    WeakBranching,
    enumerate_decorations,
    enumerate_pre_branchings,
    find_pre_branching,
    find_weak_branching,
    global_branching_exists,
    type_symbol,
    z2_taut,
)
from .calculus import admissible_chain, fuse_in_order, non_associativity_witness, random_order
from .obstruction import ObstructionError, ObstructionNotBoundary, alpha_bar, alpha_spine, solve_spin
from .triangulation import ParseError, Triangulation, TriangulationError, load_triangulation, validate

SCHEMA = "spinscape/1"
EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_GUARD = 0, 1, 2, 3
COMMANDS = ("validate", "spin", "branchable", "move", "selftest")


@dataclass(frozen=True)
class RunConfig:
    command: str
    path: str | None
    guard: int = 6
    fmt: str = "text"
    seed: int = 0
    cross_check: bool = False
    script: str | None = None


class CliFailure(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def bundled_fixtures() -> dict[str, Path]:
    root = resources.files("spinscape") / "fixtures"
    return {Path(str(p)).stem: Path(str(p)) for p in root.iterdir() if str(p).endswith(".tri")}


def resolve_input(path: str) -> Path:
    """A file path, or the stem of a bundled fixture such as ``figure_eight``."""
    p = Path(path)
    if p.exists():
        return p
    fixtures = bundled_fixtures()
    if path in fixtures:
        return fixtures[path]
    raise CliFailure(EXIT_IO, f"cannot read {path}: no such file")


def read_triangulation(path: str | None) -> Triangulation:
    if path is None:
        raise CliFailure(EXIT_IO, "no input file given")
    p = resolve_input(path)
    try:
        return load_triangulation(p)
    except OSError as exc:
        raise CliFailure(EXIT_IO, f"cannot read {path}: {exc.strerror}") from None
    except ParseError as exc:
        raise CliFailure(EXIT_DOMAIN, f"{path}: {exc}", {"valid": False, "violations": [str(exc)]}) from None
    except TriangulationError as exc:
        violations = list(getattr(exc, "violations", [str(exc)]))
        raise CliFailure(EXIT_DOMAIN, f"{path}: invalid triangulation", {"valid": False, "violations": violations}) from None
    except (ValueError, KeyError) as exc:
        raise CliFailure(EXIT_DOMAIN, f"{path}: {exc}", {"valid": False, "violations": [str(exc)]}) from None


# -- commands ---------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> tuple[int, dict, list[str]]:
    try:
        tri = read_triangulation(cfg.path)
    except CliFailure as exc:
        if exc.code != EXIT_DOMAIN:
            raise
        lines = ["valid: no"] + [f"  {v}" for v in exc.payload.get("violations", [])]
        return EXIT_DOMAIN, exc.payload, lines
    problems = validate(tri)
    data = {
        "valid": not problems,
        "violations": problems,
        "tetrahedra": tri.n,
        "edge_classes": len(tri.edge_classes),
    }
    if problems:
        return EXIT_DOMAIN, data, ["valid: no"] + [f"  {v}" for v in problems]
    return EXIT_OK, data, [f"valid: yes ({tri.n} tetrahedra, {len(tri.edge_classes)} edge classes)"]


def decorate(tri: Triangulation, guard: int) -> WeakBranching:
    """Canonical pre-branching first; enumerate the others only if it carries no weak branching."""
    omega = find_pre_branching(tri.gluing_graph())
    wb = find_weak_branching(tri, omega)
    if wb is not None:
        return wb
    try:
        candidates = enumerate_pre_branchings(tri.gluing_graph(), guard=guard)
    except GuardExceeded as exc:
        raise CliFailure(EXIT_GUARD, f"undecided (guard): {exc}") from None
    for omega in candidates:
        wb = find_weak_branching(tri, omega)
        if wb is not None:
            return wb
    raise CliFailure(EXIT_DOMAIN, "no pre-branching carries a weak branching")


def _branching_json(tri: Triangulation, wb: WeakBranching) -> dict:
    return {
        "omega": list(wb.omega.directions),
        "orders": [list(b.order) for b in wb.branchings],
        "indices": list(wb.indices()),
        "edge_types": [type_symbol(t) for t in wb.edge_types(tri)],
    }


def cmd_spin(cfg: RunConfig) -> tuple[int, dict, list[str]]:
    tri = read_triangulation(cfg.path)
    wb = decorate(tri, cfg.guard)
    try:
        chain = alpha_bar(tri, wb)
        classes = solve_spin(tri, wb)
    except (ObstructionError, ObstructionNotBoundary) as exc:
        raise CliFailure(EXIT_DOMAIN, str(exc)) from None
    data = {
        "decoration": _branching_json(tri, wb),
        "alpha": chain.to_json(),
        "spin_classes": classes.count,
        "homology_rank": classes.homology_rank,
        "representatives": [list(r.beta.support) for r in classes.representatives],
    }
    lines = ["omega:"] + ["  " + s for s in wb.omega.to_text().splitlines()]
    lines += ["branching:"] + ["  " + s for s in wb.to_text().splitlines()]
    lines.append("edge types: " + " ".join(type_symbol(t) for t in wb.edge_types(tri)))
    lines.append("alpha ledger:")
    for row in chain.to_json():
        lines.append(
            f"  edge {row['edge']}: first [{' '.join(row['first_type'])}]"
            f" second [{' '.join(row['second_type'])}] -> {row['value']}"
        )
    lines.append(f"spin classes: {classes.count}")
    for i, r in enumerate(classes.representatives):
        lines.append(f"  beta[{i}] = {{{', '.join(map(str, r.beta.support))}}}")
    code = EXIT_OK
    if cfg.cross_check:
        other = alpha_spine(tri, wb)
        agree = other.values == chain.values
        data["cross_check"] = {"alpha_spine": list(other.values), "agree": agree}
        lines.append(f"cross-check alpha_spine: {'agree' if agree else 'DISAGREE'}")
        if not agree:
            code = EXIT_DOMAIN
    return code, data, lines


def cmd_branchable(cfg: RunConfig) -> tuple[int, dict, list[str]]:
    tri = read_triangulation(cfg.path)
    report = global_branching_exists(tri, guard=cfg.guard)
    data = {"branchable": report.branchable, "refuted": report.refuted, "total": report.total}
    if report.branchable is None:
        return EXIT_GUARD, data, [f"branchable: undecided (guard): {tri.n} tetrahedra > {cfg.guard}"]
    if report.branchable:
        data["witness"] = [list(b.order) for b in report.witness]
        lines = ["branchable: yes"] + [f"  tet {t} order {list(b.order)}" for t, b in enumerate(report.witness)]
        return EXIT_OK, data, lines
    return EXIT_OK, data, [f"branchable: no ({report.refuted}/{report.total} refuted)"]


def cmd_move(cfg: RunConfig) -> tuple[int, dict, list[str]]:
    from .moves import ScriptError, descriptor_for, parse_script, verify_invariance

    tri = read_triangulation(cfg.path)
    text = ""
    if cfg.script is not None:
        try:
            text = Path(cfg.script).read_text(encoding="utf-8")
        except OSError as exc:
            raise CliFailure(EXIT_IO, f"cannot read {cfg.script}: {exc.strerror}") from None
    wb = decorate(tri, cfg.guard)
    try:
        report = verify_invariance(descriptor_for(tri, wb), parse_script(text))
    except ScriptError as exc:
        raise CliFailure(EXIT_DOMAIN, f"invalid move at {exc}", {"failed_line": exc.line}) from None
    data = report.to_json()
    lines = []
    if not report.steps:
        lines.append("identity (no moves)")
    for s in report.steps:
        mark = "ok" if s.certified else "FAILED"
        faces = ",".join(map(str, s.weighted_faces)) or "-"
        lines.append(f"line {s.line}: {s.step}  certificate {mark}  weighted faces {faces}  classes {s.classes_before}->{s.classes_after}")
    lines.append(f"spin preserved: {'yes' if report.spin_preserved else 'no'}")
    code = EXIT_OK if report.spin_preserved and all(s.certified for s in report.steps) else EXIT_DOMAIN
    return code, data, lines


# -- selftest ---------------------------------------------------------------


def _suite_psi() -> dict:
    out = {}
    for name, table in (("section", alg.SECTION_TABLE), ("alternate", alg.ALTERNATE_SECTION_TABLE)):
        failures = alg.homomorphism_failures(table)
        out[name] = {"checked": len(alg.S3) ** 2, "failures": [[list(x), list(y)] for x, y in failures]}
    return {"passed": all(not v["failures"] for v in out.values()), **out}


def _suite_a4(rng: random.Random) -> dict:
    from .weighted import pi_minus_check, relation_report

    check = pi_minus_check(rng)
    relations = relation_report()
    passed = (
        check["closure_size"] == 12
        and all(check[k] for k in ("alpha^2", "beta^3", "(alpha.beta)^3", "alpha.beta = II.Mbar"))
        and all(s["agree"] for s in check["well_defined"])
        and all(relations.values())
    )
    return {
        "passed": passed,
        "closure_size": check["closure_size"],
        "relations": relations,
        "presentation": {k: check[k] for k in ("alpha^2", "beta^3", "(alpha.beta)^3", "alpha.beta = II.Mbar")},
    }


def _suite_fusion(rng: random.Random, samples: int = 200, orders: int = 10) -> dict:
    bad = 0
    for _ in range(samples):
        chain, expected = admissible_chain(rng, 12)
        results = {fuse_in_order(chain, random_order(len(chain), rng)) for _ in range(orders)}
        if len(results) != 1 or next(iter(results)).weight != expected:
            bad += 1
    return {"passed": bad == 0, "samples": samples, "orders": orders, "failures": bad}


def _suite_witness() -> dict:
    left, right = non_associativity_witness()
    return {"passed": left != right, "left_first": str(left), "right_first": str(right)}


def _suite_taut(guard: int) -> dict:
    per_fixture = {}
    for name, path in sorted(bundled_fixtures().items()):
        tri = load_triangulation(path)
        by_omega: dict[PreBranching, frozenset] = {}
        count, ok = 0, True
        for wb in enumerate_decorations(tri, guard=20):
            count += 1
            try:
                neg = z2_taut(tri, wb, cross_check=False).negative_edges()
            except AssertionError:
                ok = False
                continue
            if by_omega.setdefault(wb.omega, neg) != neg:
                ok = False
        per_fixture[name] = {"decorations": count, "passed": ok}
    return {"passed": all(v["passed"] for v in per_fixture.values()), "fixtures": per_fixture}


def _suite_circuit_table() -> dict:
    from .patch_obstruction import CIRCUIT_DELTA_ALPHA, circuit_delta_alpha_table

    got = circuit_delta_alpha_table()
    return {"passed": got == CIRCUIT_DELTA_ALPHA, "entries": 4 * len(got)}


def cmd_selftest(cfg: RunConfig) -> tuple[int, dict, list[str]]:
    rng = random.Random(cfg.seed)
    suites: dict[str, Callable[[], dict]] = {
        "psi_homomorphism": _suite_psi,
        "a4_closure": lambda: _suite_a4(rng),
        "fusion_order_independence": lambda: _suite_fusion(rng),
        "non_associativity_witness": _suite_witness,
        "taut_parity": lambda: _suite_taut(cfg.guard),
        "circuit_delta_alpha": _suite_circuit_table,
    }
    results = {name: run() for name, run in suites.items()}
    lines = []
    for name, r in results.items():
        detail = ""
        if name == "psi_homomorphism":
            detail = f" ({r['section']['checked']} products per table)"
        elif name == "a4_closure":
            detail = f" (closure size {r['closure_size']})"
        elif name == "fusion_order_independence":
            detail = f" ({r['samples']} chains x {r['orders']} orders)"
        elif name == "non_associativity_witness":
            detail = f" ({r['left_first']} vs {r['right_first']})"
        lines.append(f"{name}: {'pass' if r['passed'] else 'FAIL'}{detail}")
    passed = all(r["passed"] for r in results.values())
    lines.append("selftest: " + ("all suites pass" if passed else "FAILED"))
    return (EXIT_OK if passed else EXIT_DOMAIN), {"seed": cfg.seed, "suites": results, "passed": passed}, lines


HANDLERS = {
    "validate": cmd_validate,
    "spin": cmd_spin,
    "branchable": cmd_branchable,
    "move": cmd_move,
    "selftest": cmd_selftest,
}


# -- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spinscape", description="Spin structures on decorated triangulations.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("file", nargs="?", help="triangulation file, or the name of a bundled fixture")
    ap.add_argument("--guard", type=int, default=6, help="largest tetrahedron count searched exhaustively")
    ap.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--cross-check", action="store_true", help="also evaluate the obstruction along attaching circles")
    ap.add_argument("--script", help="move script for the move command")
    return ap


def emit(cfg: RunConfig, code: int, data: dict, lines: list[str], out=None) -> None:
    out = out or sys.stdout
    if cfg.fmt == "json":
        doc = {"schema": SCHEMA, "command": cfg.command, "exit_code": code, **data}
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


def run(cfg: RunConfig, out=None) -> int:
    try:
        code, data, lines = HANDLERS[cfg.command](cfg)
    except CliFailure as exc:
        code, data, lines = exc.code, {"error": str(exc), **exc.payload}, [f"error: {exc}"]
        if cfg.fmt == "text":
            print(f"spinscape: {exc}", file=sys.stderr)
            lines = [str(exc)] if code == EXIT_GUARD else []
    if lines or cfg.fmt == "json":
        emit(cfg, code, data, lines, out)
    return code


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig(ns.command, ns.file, ns.guard, ns.fmt, ns.seed, ns.cross_check, ns.script)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
