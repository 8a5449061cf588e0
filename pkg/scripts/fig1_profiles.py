"""FBD profile at time t next to an averaged Frozen Random Walk profile.

Writes ``site,fbd_mass,frw_fraction`` and prints the total variation between
the two.  With ``--plot`` a PNG with both profiles is saved as well.

    python3 scripts/fig1_profiles.py --steps 100 --n 100000 --trials 50 -o out/fig1.csv --plot
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from fbd.cli import write_csv
from fbd.engine import run_fbd
from fbd.frw import frw_average


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--steps", type=int, default=100)
    ap.add_argument("--n", type=int, default=100_000)
    ap.add_argument("--trials", type=int, default=50)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("-o", "--output", default="fig1_profiles.csv")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)

    state = run_fbd(args.alpha, args.steps, [args.steps]).final_state
    prof = frw_average(args.n, args.alpha, args.steps, args.trials, args.seed, jobs=args.jobs)
    frw = prof.as_dict()
    lo = min(-state.max_site, int(prof.sites[0]))
    sites = np.arange(lo, -lo + 1)
    fbd_m = np.array([state.mass_at(int(x)) for x in sites])
    frw_m = np.array([frw.get(int(x), 0.0) for x in sites])
    tv = 0.5 * np.abs(fbd_m - frw_m).sum()

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        write_csv(fh, ("site", "fbd_mass", "frw_fraction"), zip(sites, fbd_m, frw_m))
    print(f"alpha={args.alpha} t={args.steps} n={args.n} trials={args.trials} TV={tv:.5f} -> {out}")

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7, 3.5))
        ax.plot(sites, fbd_m, "k-", lw=1, label="FBD")
        ax.plot(sites, frw_m, "r.", ms=3, label=f"FRW, n={args.n}, {args.trials} trials")
        ax.set_xlabel("site")
        ax.set_ylabel("mass")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out.with_suffix(".png"), dpi=150)


if __name__ == "__main__":
    main()
