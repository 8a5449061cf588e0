"""Rescaled boundary beta_t / sqrt(t) against t for several alpha.

Output columns: ``alpha,t,beta,beta_scaled,q_alpha,deviation``.  The optional
plot draws each curve on a log t axis with q_alpha as a dashed line.

    python3 scripts/fig2_boundary.py --alpha 0.25 --alpha 0.5 --alpha 0.75 --steps 100000 --plot
"""
from __future__ import annotations

import argparse
from pathlib import Path

from fbd.analysis import solve_q
from fbd.cli import write_csv
from fbd.engine import geometric_schedule, run_fbd


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, action="append")
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("-o", "--output", default="fig2_boundary.csv")
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args(argv)
    alphas = args.alpha or [0.5]

    # denser than powers of two so the lattice jitter is visible
    sched = sorted({int(round(1.25**i)) for i in range(200) if 1.25**i <= args.steps} | {args.steps})
    rows, curves = [], {}
    for a in alphas:
        q = solve_q(a).q
        tr = run_fbd(a, args.steps, sched)
        curves[a] = (q, [(r.t, r.beta_scaled) for r in tr.rows])
        for r in tr.rows:
            rows.append((a, r.t, r.beta, r.beta_scaled, q, r.beta_scaled - q))
        last = tr.rows[-1]
        print(f"alpha={a}: q={q:.6f} beta/sqrt(t) at t={last.t}: {last.beta_scaled:.6f}")

    out = Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w") as fh:
        write_csv(fh, ("alpha", "t", "beta", "beta_scaled", "q_alpha", "deviation"), rows)

    if args.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 4))
        for a, (q, pts) in curves.items():
            ts, bs = zip(*pts)
            (line,) = ax.semilogx(ts, bs, lw=1, label=f"alpha={a}")
            ax.axhline(q, color=line.get_color(), ls="--", lw=0.8)
        ax.set_xlabel("t")
        ax.set_ylabel("beta_t / sqrt(t)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out.with_suffix(".png"), dpi=150)


if __name__ == "__main__":
    main()
