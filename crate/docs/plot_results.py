"""Plot a results.csv written by `cache-mimo sweep-rho0` or `sweep-cache`.

    python docs/plot_results.py results/results.csv out.png
"""

import sys

import matplotlib.pyplot as plt
import pandas as pd

STYLE = {"mrt": "o", "zf": "s", "rzf": "^"}


def main(path, out):
    with open(path) as f:
        schema = f.readline().strip()
    if schema != "#schema=1":
        sys.exit(f"unsupported schema line: {schema!r}")
    df = pd.read_csv(path, comment="#")
    df = df[df.status == "ok"]
    axis = df.axis.iloc[0]
    fig, ax = plt.subplots(figsize=(6, 4))
    for (precoder, mode), g in df.groupby(["precoder", "mode"]):
        ax.plot(
            g.axis_value,
            g.rate,
            marker=STYLE.get(precoder, "x"),
            linestyle="-" if mode == "proposed" else "--",
            label=f"{precoder.upper()} {mode}",
        )
    ax.set_xlabel({"rho0": "antennas per user M/K", "cache_size": "cache size L_u"}.get(axis, axis))
    ax.set_ylabel("rate per user [bits/s/Hz]")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out, dpi=150)


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2] if len(sys.argv) > 2 else "rates.png")
