"""Command line front end.

Exit codes: 0 success, 1 usage error, 2 witness verification failure,
3 predicate/oracle disagreement (or an APN input escaping the classification).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from kimgold import ddt
from kimgold import equiv
from kimgold import kimtype as kt
from kimgold import linmap as lm
from kimgold.gf2field import FieldError, make_field, parse_element

log = logging.getLogger("kimgold")

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DISAGREE = 0, 1, 2, 3
DDT_BATCH = 256


class UsageError(Exception):
    pass


@dataclass
class OracleMode:
    positives: bool = False
    full: bool = False
    sample: int = 0

    @classmethod
    def parse(cls, text: str) -> OracleMode:
        mode = cls()
        for part in filter(None, (p.strip() for p in text.split(","))):
            if part == "off":
                continue
            if part == "positives":
                mode.positives = True
            elif part == "full":
                mode.full = True
            elif part.startswith("sample="):
                mode.sample = int(part.split("=", 1)[1])
            else:
                raise UsageError(f"unknown oracle mode {part!r}")
        return mode

    @property
    def active(self) -> bool:
        return self.positives or self.full or self.sample > 0


@dataclass
class RunConfig:
    m: int | None
    fq_poly: int | None = None
    nu: int | None = None
    fmt: str = "json"
    jobs: int = 1
    out: str | None = None
    oracle: OracleMode = field(default_factory=OracleMode)

    def ctx(self):
        if self.m is None:
            raise UsageError("--m is required")
        return make_field(self.m, self.fq_poly, self.nu)


def _seed() -> int:
    return int(os.environ.get("KIMGOLD_SEED", "0"))


def _emit(config: RunConfig, payload: dict, stream=None) -> None:
    stream = stream or sys.stdout
    if config.fmt == "text":
        for key, val in payload.items():
            stream.write(f"{key}: {json.dumps(val) if isinstance(val, (dict, list)) else val}\n")
    else:
        stream.write(json.dumps(payload, indent=2) + "\n")


def _write_payload(config: RunConfig, payload: dict) -> None:
    if config.out:
        with open(config.out, "w") as fh:
            _emit(config, payload, fh)
    else:
        _emit(config, payload)


# -- enumerate

def _sweep_slice(args):
    """Predicate flags for a fixed a1 over all (a2, a3), or a2 = 0 only."""
    fc, a1, a2_zero = args
    ctx = make_field(fc["m"], fc["fq_poly"], fc["nu"])
    N = ctx.size
    if a2_zero:
        a3 = np.arange(N, dtype=np.int64)
        a2 = np.zeros_like(a3)
    else:
        a2 = np.repeat(np.arange(N, dtype=np.int64), N)
        a3 = np.tile(np.arange(N, dtype=np.int64), N)
    a1s = np.full_like(a2, a1)
    rep = kt.gamma_report(ctx, a1s, a2, a3)
    apn = kt.apn_mask(ctx, rep)
    return a1, a2, a3, rep.gamma1, rep.gamma2, apn


def oracle_check(ctx, a1, a2, a3) -> np.ndarray:
    """DDT verdict for each triple, in batches."""
    out = np.zeros(len(a1), dtype=bool)
    for s in range(0, len(a1), DDT_BATCH):
        sl = slice(s, s + DDT_BATCH)
        out[sl] = ddt.batch_is_apn(ddt.kim_tables(ctx, a1[sl], a2[sl], a3[sl]))
    return out


def sample_negatives(ctx, n: int, rng: np.random.Generator, a2_zero: bool = False):
    """n uniformly drawn triples (a1 in F_q) on which the predicate is false."""
    got = [[], [], []]
    have = 0
    while have < n:
        k = max(2 * (n - have), 64)
        a1 = rng.integers(0, ctx.q, k)
        a2 = np.zeros(k, dtype=np.int64) if a2_zero else rng.integers(0, ctx.size, k)
        a3 = rng.integers(0, ctx.size, k)
        neg = ~kt.is_apn_by_theorem_array(ctx, a1, a2, a3)
        for lst, arr in zip(got, (a1, a2, a3)):
            lst.append(arr[neg])
        have += int(neg.sum())
    return tuple(np.concatenate(lst)[:n] for lst in got)


def cmd_enumerate(config: RunConfig, a2_zero: bool = False, positives_only: bool = False) -> int:
    ctx = config.ctx()
    if ctx.m < 4:
        raise UsageError("enumerate needs m >= 4; use the `ddt` subcommand for smaller fields")
    started = time.time()
    fc = ctx.to_json()
    tasks = [(fc, a1, a2_zero) for a1 in range(ctx.q)]

    rows_out = None
    if config.fmt == "csv":
        fh = open(config.out, "w", newline="") if config.out else sys.stdout
        rows_out = csv.writer(fh)
        rows_out.writerow(["a1", "a2", "a3", "gamma1", "gamma2", "apn"])

    counts = {"triples": 0, "gamma1": 0, "gamma2": 0, "apn": 0}
    disagreements = []
    checked = {"positive": 0, "negative": 0}

    def record_oracle(a1, a2, a3, predicted):
        verdict = oracle_check(ctx, a1, a2, a3)
        bad = np.flatnonzero(verdict != predicted)
        for i in bad[:20]:
            disagreements.append({"a1": int(a1[i]), "a2": int(a2[i]), "a3": int(a3[i]),
                                  "predicate": bool(predicted[i]), "ddt": bool(verdict[i])})
        if len(bad) > 20:
            disagreements.append({"more": int(len(bad) - 20)})
        checked["positive"] += int(predicted.sum())
        checked["negative"] += int((~predicted).sum())
        return len(bad)

    n_bad = 0
    if config.jobs > 1:
        pool = ProcessPoolExecutor(config.jobs)
        results = pool.map(_sweep_slice, tasks)
    else:
        pool = None
        results = map(_sweep_slice, tasks)
    try:
        for a1, a2, a3, g1, g2, apn in results:
            counts["triples"] += len(a2)
            counts["gamma1"] += int(g1.sum())
            counts["gamma2"] += int(g2.sum())
            counts["apn"] += int(apn.sum())
            a1s = np.full_like(a2, a1)
            if rows_out is not None:
                sel = apn if positives_only else slice(None)
                for row in zip(a1s[sel].tolist(), a2[sel].tolist(), a3[sel].tolist(),
                               g1[sel].astype(int).tolist(), g2[sel].astype(int).tolist(),
                               apn[sel].astype(int).tolist()):
                    rows_out.writerow(row)
            if config.oracle.full:
                n_bad += record_oracle(a1s, a2, a3, apn)
            elif config.oracle.positives and apn.any():
                n_bad += record_oracle(a1s[apn], a2[apn], a3[apn], apn[apn])
    finally:
        if pool is not None:
            pool.shutdown()
    if config.oracle.sample and not config.oracle.full:
        rng = np.random.default_rng(_seed())
        s1, s2, s3 = sample_negatives(ctx, config.oracle.sample, rng, a2_zero)
        n_bad += record_oracle(s1, s2, s3, np.zeros(len(s1), dtype=bool))

    summary = {
        "field_ctx": fc,
        "stratum": "a2=0" if a2_zero else "all",
        **counts,
        "oracle": {
            "positives": config.oracle.positives,
            "full": config.oracle.full,
            "sample": config.oracle.sample,
            "checked_positive": checked["positive"],
            "checked_negative": checked["negative"],
            "disagreements": n_bad,
            "examples": disagreements,
        },
        "seconds": round(time.time() - started, 3),
    }
    if rows_out is not None:
        if config.out:
            fh.close()
            _emit(RunConfig(None, fmt="json"), summary, sys.stdout)
        else:
            _emit(RunConfig(None, fmt="json"), summary, sys.stderr)
    else:
        _write_payload(config, summary)
    return EXIT_DISAGREE if n_bad else EXIT_OK


# -- single triples

def _coeffs(args) -> kt.KimCoeffs:
    return kt.KimCoeffs(*(parse_element(a) for a in (args.a1, args.a2, args.a3)))


def _check_range(ctx, k: kt.KimCoeffs):
    for name, v in zip(("a1", "a2", "a3"), k):
        if not 0 <= v < ctx.size:
            raise UsageError(f"{name}={v} is not an element of F_(2^{2 * ctx.m})")


def check_report(ctx, k: kt.KimCoeffs, oracle: bool = False) -> dict:
    report = {"field_ctx": ctx.to_json(), "input": k.to_json()}
    norm, _, _ = kt.normalize_a1(ctx, k)
    if norm != k:
        report["normalized"] = norm.to_json()
    rep = kt.gamma_report(ctx, *norm)
    th = rep.thetas
    report.update({
        "theta1": th.t1, "theta2": th.t2, "theta3": th.t3, "theta4": th.t4,
        "trace_ok": bool(rep.trace_ok),
        "gamma1": bool(rep.gamma1), "gamma2": bool(rep.gamma2),
        "apn": bool(kt.apn_mask(ctx, rep)),
    })
    if oracle:
        report["ddt_apn"] = ddt.is_apn_bruteforce(ddt.table_of_kim(ctx, k))
    return report


def cmd_check(config: RunConfig, k: kt.KimCoeffs) -> int:
    ctx = config.ctx()
    if ctx.m < 4:
        raise UsageError("check needs m >= 4; use `ddt kim:a1,a2,a3` for smaller fields")
    _check_range(ctx, k)
    report = check_report(ctx, k, config.oracle.active)
    _write_payload(config, report)
    if "ddt_apn" in report and report["ddt_apn"] != report["apn"]:
        return EXIT_DISAGREE
    return EXIT_OK


def cmd_witness(config: RunConfig, k: kt.KimCoeffs) -> int:
    ctx = config.ctx()
    if ctx.m < 4:
        raise UsageError("witness needs m >= 4")
    _check_range(ctx, k)
    try:
        res = equiv.classify(ctx, k)
    except equiv.InvariantViolation as exc:
        log.error("invariant violation: %s", exc)
        return EXIT_DISAGREE
    payload = res.to_json(ctx)
    payload["source"] = k.to_json()
    _write_payload(config, payload)
    return EXIT_OK


def verify_payload(data: dict) -> tuple[bool, str]:
    """Re-check a witness (bare or wrapped in a classify result)."""
    if "witness" in data:
        if data.get("status") != "APN" or data["witness"] is None:
            return False, "no witness in file"
        data = data["witness"]
    try:
        w = lm.EquivWitness.from_json(data)
    except (KeyError, ValueError, TypeError, FieldError) as exc:
        return False, f"malformed witness: {exc}"
    ctx = w.L1.ctx
    if not lm.verify_witness(ctx, w):
        return False, "witness does not verify"
    return True, "ok"


def cmd_verify(config: RunConfig, path: str) -> int:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read witness file: {exc}") from exc
    ok, reason = verify_payload(data)
    _emit(config, {"file": path, "valid": ok, "reason": reason})
    return EXIT_OK if ok else EXIT_VERIFY


# -- tables

def parse_function_spec(config: RunConfig, spec: str):
    kind, _, arg = spec.partition(":")
    if kind == "file":
        return None, ddt.FunctionTable.load(arg)
    ctx = config.ctx()
    if kind == "exp":
        return ctx, ddt.table_of_exponent(ctx, parse_element(arg))
    if kind == "kim":
        parts = arg.split(",")
        if len(parts) != 3:
            raise UsageError("kim spec needs three coefficients: kim:a1,a2,a3")
        k = kt.KimCoeffs(*(parse_element(p) for p in parts))
        _check_range(ctx, k)
        return ctx, ddt.table_of_kim(ctx, k)
    raise UsageError(f"unknown function spec {spec!r}; use kim:a1,a2,a3, exp:e or file:path")


def ddt_report(t: ddt.FunctionTable) -> dict:
    table = ddt.ddt(t)[1:]
    values, counts = np.unique(table, return_counts=True)
    delta = int(values.max())
    return {
        "n": t.n,
        "differential_uniformity": delta,
        "apn": delta == 2,
        "spectrum": {str(int(v)): int(c) for v, c in zip(values, counts)},
    }


def cmd_ddt(config: RunConfig, spec: str, table_out: str | None = None) -> int:
    ctx, t = parse_function_spec(config, spec)
    if table_out:
        if table_out.lower().endswith(".csv"):
            t.write_csv(table_out)
        else:
            Path(table_out).write_bytes(t.to_bytes())
    report = ddt_report(t)
    if ctx is not None:
        report["field_ctx"] = ctx.to_json()
    _write_payload(config, report)
    return EXIT_OK


def cmd_gold(config: RunConfig) -> int:
    ctx = config.ctx()
    report = {"field_ctx": ctx.to_json(), "n": 2 * ctx.m}
    for name in lm.TARGETS:
        e = lm.target_exponent(ctx, name)
        report[name] = {
            "exponent": e,
            "differential_uniformity": ddt.differential_uniformity(ddt.table_of_exponent(ctx, e)),
        }
    if ctx.m == 3:
        report["kim_function_apn_units"] = ddt.kim_function_apn_units(ctx)
    _write_payload(config, report)
    return EXIT_OK


def cmd_selftest(config: RunConfig) -> int:
    ctx = make_field(4) if config.m is None else config.ctx()
    results = []

    def check(name, cond):
        results.append((name, bool(cond)))

    check("x^3 is APN", ddt.differential_uniformity(ddt.table_of_exponent(ctx, 3)) == 2)
    check("conjugation is an involution",
          np.array_equal(ctx.frobenius_q(ctx.frobenius_q(ctx.elements())), ctx.elements()))
    check("|U| = q + 1", len(ctx.unit_circle()) == ctx.q + 1)
    if ctx.m >= 4:
        rng = np.random.default_rng(_seed())
        for _ in range(20):
            k = kt.KimCoeffs(int(rng.integers(ctx.q)), int(rng.integers(ctx.size)), int(rng.integers(ctx.size)))
            pred = kt.is_apn_by_theorem(ctx, k)
            check(f"predicate vs DDT {k.to_json()}", pred == ddt.is_apn_bruteforce(ddt.table_of_kim(ctx, k)))
        res = equiv.classify(ctx, kt.KimCoeffs(0, 0, 0))
        check("x^3q witness verifies", res.status == "APN" and lm.verify_witness(ctx, res.witness))
    for name, ok in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if all(ok for _, ok in results) else EXIT_DISAGREE


# -- argument handling

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--m", type=int, help="half the extension degree, q = 2^m")
    common.add_argument("--fq-poly", type=lambda s: int(s, 0), help="defining polynomial of F_q as a bitmask")
    common.add_argument("--nu", type=lambda s: int(s, 0), help="F_q element with Tr(nu) = 1")
    common.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default="json")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--oracle", default="off",
                        help="comma list of off, positives, sample=N, full")
    common.add_argument("-v", "--verbose", action="store_true")

    p = _Parser(prog="kimgold", description="Kim-type APN functions and their Gold equivalents")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate", parents=[common], help="sweep the APN predicate")
    e.add_argument("--a2-zero", action="store_true", help="restrict the sweep to a2 = 0")
    e.add_argument("--positives-only", action="store_true", help="stream only APN rows")

    for name, text in (("check", "theta constants and Gamma flags"),
                       ("witness", "classify and emit a verified witness")):
        s = sub.add_parser(name, parents=[common], help=text)
        for a in ("a1", "a2", "a3"):
            s.add_argument(a)

    v = sub.add_parser("verify", parents=[common], help="re-verify a witness file")
    v.add_argument("path")

    d = sub.add_parser("ddt", parents=[common], help="differential analysis of a table")
    d.add_argument("spec", help="kim:a1,a2,a3 | exp:e | file:path")
    d.add_argument("--table-out", help="also write the truth table (.csv or binary)")

    sub.add_parser("gold", parents=[common], help="differential uniformity of G1 and G2")
    sub.add_parser("selftest", parents=[common], help="quick consistency battery")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        config = RunConfig(args.m, args.fq_poly, args.nu, args.fmt, max(1, args.jobs),
                           args.out, OracleMode.parse(args.oracle))
        if args.command == "enumerate":
            return cmd_enumerate(config, args.a2_zero, args.positives_only)
        if args.command == "check":
            return cmd_check(config, _coeffs(args))
        if args.command == "witness":
            return cmd_witness(config, _coeffs(args))
        if args.command == "verify":
            return cmd_verify(config, args.path)
        if args.command == "ddt":
            return cmd_ddt(config, args.spec, args.table_out)
        if args.command == "gold":
            return cmd_gold(config)
        return cmd_selftest(config)
    except (UsageError, FieldError, ValueError) as exc:
        print(f"kimgold: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
