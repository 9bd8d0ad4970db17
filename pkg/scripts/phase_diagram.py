"""gamma x dphi phase diagram through the CLI, plus a label census and a
coarse text map (T/t: topological stable/unstable, ./x: trivial stable/unstable, ?: gapless)."""

import argparse
import csv
import io
import os
import tempfile

from parachain.cli import run

MARK = {"topological-stable": "T", "topological-unstable": "t", "trivial-stable": ".",
        "trivial-unstable": "x", "boundary": "?"}


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=os.path.join(here, "..", "configs", "phase_diagram.json"))
    ap.add_argument("--out", default=None, help="CSV path (default: temporary file)")
    ap.add_argument("--threads", default="4")
    args = ap.parse_args()
    out = args.out or os.path.join(tempfile.mkdtemp(), "phase_diagram.csv")
    code = run(["phase-diagram", "--config", args.config, "--out", out, "--threads", args.threads])
    if code:
        raise SystemExit(code)
    with open(out, encoding="utf-8") as fh:
        body = io.StringIO("".join(l for l in fh if not l.startswith("#")))
    rows = list(csv.DictReader(body))
    census = {}
    for r in rows:
        census[r["label"]] = census.get(r["label"], 0) + 1
    print(f"{len(rows)} points written to {out}")
    for k, v in sorted(census.items()):
        print(f"  {k:22s} {v}")
    gammas = sorted({float(r["gamma"]) for r in rows})
    by_gamma = {}
    for r in rows:
        by_gamma.setdefault(float(r["gamma"]), []).append(MARK[r["label"]])
    print("rows: gamma (top = largest); columns: dphi from -pi to pi")
    for g in reversed(gammas):
        print(f"{g:6.3f} " + "".join(by_gamma[g]))


if __name__ == "__main__":
    main()
