"""Encode the bundled ECG-like clip per 1 s window, decode, and plot one window.

    python demos/ecg_round_trip.py [out.svg]
"""

import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from spikelet.decoder import decode
from spikelet.harness import bundled_path, load_signal, windows, z_score
from spikelet.spike_codec import encode
from spikelet.wavelets import analyze, make_bank


def main(out="ecg_round_trip.svg"):
    sig = load_signal(bundled_path("ecg_like.csv"))
    bank = make_bank("dot", 2 * sig.dt, 2.0, 8, sig.dt, theta=0.1)
    errs, first = [], None
    for w in windows(sig, 1.0):
        x = z_score(w)
        d = analyze(x, bank)
        trains = encode(d)
        rep = decode(trains, bank, d, original=x)
        ident = decode(trains, bank, None, "identity", original=x)
        errs.append((rep.nrmse, ident.nrmse, sum(len(t) for t in trains)))
        if first is None:
            first = (x, rep, ident, trains)
    e = np.array(errs)
    print(f"{len(e)} windows  least-squares nRMSE {e[:, 0].mean():.4f} +/- {e[:, 0].std():.4f}"
          f"  identity {e[:, 1].mean():.3f}  spikes/window {e[:, 2].mean():.0f}")

    x, rep, ident, trains = first
    t = np.arange(len(x)) * x.dt
    fig, (ax, ax2) = plt.subplots(2, 1, figsize=(7, 5), sharex=True,
                                  gridspec_kw={"height_ratios": [2, 1]})
    ax.plot(t, x.samples, "k", lw=1, label="input (z-scored)")
    ax.plot(t, rep.reconstructed.samples, "C0", lw=1,
            label=f"least squares, nRMSE {rep.nrmse:.3f}")
    ax.plot(t, ident.reconstructed.samples, "C1", lw=0.8, alpha=0.7,
            label=f"identity weights, nRMSE {ident.nrmse:.3f}")
    ax.legend(fontsize=8)
    for tr in trains:
        tt = tr.times * tr.dt
        ax2.scatter(tt, np.full(tt.size, tr.channel), c=np.where(tr.polarity > 0, "C3", "C0"),
                    s=3, marker="|")
    ax2.set_ylabel("channel")
    ax2.set_xlabel("time (s)")
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    print("wrote", out)


if __name__ == "__main__":
    main(*sys.argv[1:])
