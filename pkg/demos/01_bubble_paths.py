"""Simulating super-exponential bubble paths and their random end times.

The bubble price follows p(t) = [n*mu*(t_c - t) - n*sigma*W_t]^(-1/n): a
finite-time singularity whose arrival time is random because the Brownian
path keeps shifting the denominator's zero crossing. This script draws a few
paths, then checks the distribution of simulated end times against the
inverse-Gaussian law they should follow.
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np
from scipy import stats

from sinet import deterministic_fts_price, ig_params, simulate_sa_path

P0, MU, SIGMA, N = 1.0, 0.05, 0.1, 1.0
DT = 1e-3

# --- a few sample paths -----------------------------------------------------
print("five seeded paths (p0=1, mu=0.05, sigma=0.1, n=1):")
for seed in range(5):
    path = simulate_sa_path(P0, MU, SIGMA, N, dt=DT, max_steps=150_000, seed=seed)
    print(f"  seed {seed}: singularity at t = {path.critical_time:8.3f} "
          f"after {path.critical_time_index} steps, "
          f"peak log price {path.log_prices.max():.2f}")

# the noise-free path has a fixed critical time t_c = p0^{-n} / (n mu) = 20
det = simulate_sa_path(P0, MU, 0.0, N, dt=DT, max_steps=150_000, seed=0)
print(f"\nnoise-free path hits t_c at t = {det.critical_time:.3f} "
      f"(closed form gives {1.0 / (N * MU):.3f})")
print(f"price at t = 19.0: simulated {np.exp(det.log_prices[19_000]):.4f}, "
      f"closed form {deterministic_fts_price(19.0, P0, MU, N):.4f}")

# --- end-time law -----------------------------------------------------------
print("\nsampling 2000 end times and comparing with the inverse-Gaussian law...")
times = np.array([
    simulate_sa_path(P0, MU, SIGMA, N, dt=DT, max_steps=150_000, seed=s).critical_time
    for s in range(2000)
])
mean, shape = ig_params(P0, MU, SIGMA, N)
law = stats.invgauss(mu=mean / shape, scale=shape)
result = stats.kstest(times, law.cdf)
print(f"  theoretical mean {mean:.2f}, sample mean {times.mean():.2f}")
print(f"  theoretical std  {np.sqrt(mean**3 / shape):.2f}, sample std {times.std():.2f}")
print(f"  Kolmogorov-Smirnov p-value: {result.pvalue:.3f}")

out = Path(__file__).resolve().parent / "out"
out.mkdir(exist_ok=True)
hist, edges = np.histogram(times, bins=40, density=True)
centers = 0.5 * (edges[1:] + edges[:-1])
lines = ["end_time,empirical_density,inverse_gaussian_density"]
for c, h in zip(centers, hist):
    lines.append(f"{c},{h},{law.pdf(c)}")
(out / "end_time_histogram.csv").write_text("\n".join(lines) + "\n")
print(f"\nplot-ready histogram written to {out / 'end_time_histogram.csv'}")
