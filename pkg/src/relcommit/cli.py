"""Batch runner and report emitter.

    relcommit run --config configs/reference.ini --out out/
    relcommit bounds --config configs/reference.ini
    relcommit boundary --delta 0.05 --out boundary.csv
    relcommit oracle-check --max-n 4

Exit codes: 0 success, 1 error, 2 when most commitments were rejected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from . import adversary
from .config import MODES, ExperimentConfig, load_config
from .protocol import run_protocol, run_three_agent_variant, transcript_records
from .security import SecurityReport, asymptotic_rhs, coin_guess_max, security_report
from .states import bb84_family, lambda1_of

REFERENCE_OPERATING_POINT = (0.05, 0.0032)
EXIT_OK, EXIT_ERROR, EXIT_ABORTS = 0, 1, 2

ROW_FIELDS = ("index", "b", "a", "m", "p_det", "n_sifted", "n_err", "qber", "accepted", "reason")


@dataclass
class RunSummary:
    rows: List[dict]
    report: SecurityReport
    mode: str
    config_digest: str
    transcripts: List[List[dict]] = field(default_factory=list, repr=False)

    @property
    def aggregates(self) -> dict:
        return aggregates_from_rows(self.rows, self.mode)


def aggregates_from_rows(rows: Sequence[dict], mode: str = "honest") -> dict:
    n = len(rows)
    if mode == "multiphoton_attack":
        wins = sum(bool(r["success"]) for r in rows)
        return {"n_commitments": n, "attack_successes": wins, "attack_success_rate": wins / n}
    qbers = [float(r["qber"]) for r in rows if int(r["n_sifted"]) > 0]
    return {
        "n_commitments": n,
        "mean_p_det": math.fsum(float(r["p_det"]) for r in rows) / n,
        "mean_qber": math.fsum(qbers) / len(qbers) if qbers else float("nan"),
        "acceptance_rate": sum(_truthy(r["accepted"]) for r in rows) / n,
    }


def _truthy(v) -> bool:
    return v if isinstance(v, bool) else str(v).lower() == "true"


def _run_one(job: Tuple[ExperimentConfig, int, np.random.SeedSequence]):
    cfg, index, seq = job
    rng = np.random.default_rng(seq)
    if cfg.mode == "multiphoton_attack":
        ok = bool(adversary.simulate_multiphoton_attack(cfg.params, rng, trials=1)[0])
        return {"index": index, "success": ok}, []
    if cfg.mode == "three_agent":
        t = run_three_agent_variant(cfg.params, cfg.layout, cfg.j_index, rng, n_preshared=cfg.n_preshared)
    else:
        # alternate bases like the 50/50 split of the reference experiment
        t = run_protocol(cfg.params, cfg.layout, rng, b=index % 2)
    v = t.verdict
    row = {
        "index": index,
        "b": t.b,
        "a": t.a,
        "m": t.m,
        "p_det": t.p_det,
        "n_sifted": v.n_sifted,
        "n_err": v.n_err,
        "qber": v.observed_qber,
        "accepted": v.accepted,
        "reason": v.reason.value,
    }
    return row, transcript_records(t)


def run_experiment(config: ExperimentConfig, write: bool = True) -> RunSummary:
    """Run every commitment of ``config`` and (optionally) write the outputs.

    Commitment ``i`` draws from the i-th child of the config's seed
    sequence, so results do not depend on the number of workers.
    """
    streams = config.seed_sequence().spawn(config.n_commitments)
    jobs = [(config, i, s) for i, s in enumerate(streams)]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    summary = RunSummary(
        rows=[r for r, _ in results],
        report=security_report(config.params),
        mode=config.mode,
        config_digest=config.digest(),
        transcripts=[t for _, t in results],
    )
    if write:
        write_outputs(summary, config)
    return summary


def _digest_line(digest: str) -> str:
    return f"# config_sha256={digest}\n"


def _write_csv(path: Path, digest: str, header: Sequence[str], rows) -> None:
    with open(path, "w", newline="") as fp:
        fp.write(_digest_line(digest))
        w = csv.writer(fp, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[h]) for h in header])


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_outputs(summary: RunSummary, config: ExperimentConfig) -> Path:
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    digest = summary.config_digest

    if summary.mode == "multiphoton_attack":
        _write_csv(out / "commitments.csv", digest, ("index", "success"), summary.rows)
    else:
        _write_csv(out / "commitments.csv", digest, ROW_FIELDS, summary.rows)
        # raw values for histogramming, split by basis downstream
        _write_csv(out / "hist_p_det.csv", digest, ("b", "p_det"), summary.rows)
        _write_csv(out / "hist_qber.csv", digest, ("b", "qber"), [r for r in summary.rows if r["n_sifted"] > 0])
        with open(out / "transcripts.jsonl", "w") as fp:
            fp.write(json.dumps({"phase": "config", "config_sha256": digest}) + "\n")
            for i, recs in enumerate(summary.transcripts):
                for rec in recs:
                    fp.write(json.dumps({"commitment": i, **rec}, sort_keys=True) + "\n")

    report = {"config_sha256": digest, **summary.report.to_dict()}
    (out / "security_report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    agg = {"config_sha256": digest, "mode": summary.mode, **summary.aggregates}
    (out / "summary.json").write_text(json.dumps(agg, indent=2, sort_keys=True) + "\n")

    p = config.params
    rows, _ = boundary_rows(default_mu_grid(), p.delta, p.lambda1)
    with open(out / "boundary.csv", "w") as fp:
        fp.write(_digest_line(digest))
        emit_boundary_csv(rows, fp, operating_point=REFERENCE_OPERATING_POINT, delta=p.delta, lambda1=p.lambda1)
    return out


def default_mu_grid(mu_max: float = 0.2, steps: int = 200) -> np.ndarray:
    return np.linspace(mu_max / steps, mu_max, steps)


def boundary_rows(mu_grid, delta: float, lambda1: float, operating_point=REFERENCE_OPERATING_POINT):
    """(mu, minimum secure p_det) rows and whether ``operating_point`` is secure."""
    rows = [(float(mu), asymptotic_rhs(float(mu), delta, lambda1)) for mu in mu_grid]
    mu0, pdet0 = operating_point
    return rows, pdet0 > asymptotic_rhs(mu0, delta, lambda1)


def emit_boundary_csv(rows, fp, operating_point=REFERENCE_OPERATING_POINT, delta=0.05, lambda1=None) -> None:
    lambda1 = lambda1_of(bb84_family()) if lambda1 is None else lambda1
    mu0, pdet0 = operating_point
    inside = pdet0 > asymptotic_rhs(mu0, delta, lambda1)
    fp.write(f"# operating_point mu={mu0!r} p_det={pdet0!r} secure={'true' if inside else 'false'}\n")
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(("mu", "p_det_boundary"))
    for mu, bound in rows:
        w.writerow((repr(mu), "inf" if math.isinf(bound) else repr(bound)))


def emit_boundary(mu_grid, delta: float, lambda1: float, operating_point=REFERENCE_OPERATING_POINT) -> str:
    """Secure/insecure boundary as CSV text (columns mu, p_det_boundary)."""
    rows, _ = boundary_rows(mu_grid, delta, lambda1, operating_point)
    buf = io.StringIO()
    emit_boundary_csv(rows, buf, operating_point, delta, lambda1)
    return buf.getvalue()


def oracle_check(max_n: int = 4, out=sys.stdout) -> bool:
    """Dense-matrix and coin-game oracles against the closed forms."""
    fam = bb84_family()
    all_ok = True
    for n in range(1, max_n + 1):
        for k in range(n + 1):
            delta = k / n
            ok = adversary.cheat_bound_check(n, delta, fam)
            all_ok &= ok
            print(f"{'PASS' if ok else 'FAIL'} cross-game n={n} delta={k}/{n}", file=out)
    table = [[Fraction(3, 4), Fraction(2, 5)], [Fraction(1, 4), Fraction(3, 5)]]
    for n in range(1, min(max_n, 6) + 1):
        brute = adversary.coin_guess_bruteforce(table, n)
        for k in range(n + 1):
            got = coin_guess_max(table, n, Fraction(k, n))
            want = brute[k]
            ok = got == want
            all_ok &= ok
            print(f"{'PASS' if ok else 'FAIL'} coin-game n={n} delta={k}/{n} value={got}", file=out)
    return all_ok


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relcommit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd", required=True)

    r = sub.add_parser("run", help="run commitments from a config file")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int, default=None, help="replace the config's seed list")
    r.add_argument("--out", default=None, help="output directory")
    r.add_argument("--mode", choices=MODES, default=None)
    r.add_argument("--workers", type=int, default=None)

    b = sub.add_parser("bounds", help="print the security report for a config")
    b.add_argument("--config", required=True)

    bd = sub.add_parser("boundary", help="emit the secure-region boundary as CSV")
    bd.add_argument("--config", default=None)
    bd.add_argument("--delta", type=float, default=None, help="error rate plugged in (default: config delta or 0.05)")
    bd.add_argument("--mu-max", type=float, default=0.2)
    bd.add_argument("--steps", type=int, default=200)
    bd.add_argument("--out", default=None)

    o = sub.add_parser("oracle-check", help="compare brute-force oracles with closed forms")
    o.add_argument("--max-n", type=int, default=4)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "run":
            cfg = load_config(args.config).with_overrides(args.seed, args.out, args.mode, args.workers)
            summary = run_experiment(cfg)
            agg = summary.aggregates
            print(json.dumps({"output_dir": cfg.output_dir, **agg}, sort_keys=True))
            if cfg.mode != "multiphoton_attack" and agg["acceptance_rate"] < 0.5:
                return EXIT_ABORTS
            return EXIT_OK

        if args.cmd == "bounds":
            cfg = load_config(args.config)
            rep = security_report(cfg.params)
            print(json.dumps({"config_sha256": cfg.digest(), **rep.to_dict()}, indent=2, sort_keys=True))
            return EXIT_OK

        if args.cmd == "boundary":
            delta, lam1 = 0.05, lambda1_of(bb84_family())
            if args.config:
                cfg = load_config(args.config)
                delta, lam1 = cfg.params.delta, cfg.params.lambda1
            if args.delta is not None:
                delta = args.delta
            text = emit_boundary(default_mu_grid(args.mu_max, args.steps), delta, lam1)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK

        if args.cmd == "oracle-check":
            return EXIT_OK if oracle_check(args.max_n) else EXIT_ERROR
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
