"""Brute-force fine-grid Monte Carlo oracles (numpy, independent of the C++ code).

Usage: python3 mc_oracles.py [name ...]
"""
import sys

import numpy as np

rng = np.random.default_rng(20240611)


def last_zero_mean(dt=1e-5, n=4000, batch=500):
    # E sigma_B: last sign change before the first exit of (-1, 1)
    out = []
    sq = np.sqrt(dt)
    for _ in range(n // batch):
        x = np.zeros(batch)
        alive = np.ones(batch, bool)
        last = np.zeros(batch)
        i = 0
        while alive.any():
            i += 1
            step = rng.standard_normal(batch) * sq
            nx = x + step
            cross = alive & (np.sign(nx) != np.sign(x)) & (np.abs(nx) < 1)
            last[cross] = (i - 1) * dt
            hit = alive & (np.abs(nx) >= 1)
            alive &= ~hit
            x = nx
        out.append(last)
    v = np.concatenate(out)
    return v.mean(), v.std() / np.sqrt(v.size)


def bessel_hit_mean(dt=1e-5, n=4000, batch=1000):
    out = []
    sq = np.sqrt(dt)
    for _ in range(n // batch):
        x = np.zeros((batch, 3))
        alive = np.ones(batch, bool)
        t = np.zeros(batch)
        i = 0
        while alive.any():
            i += 1
            x += rng.standard_normal((batch, 3)) * sq
            hit = alive & (np.linalg.norm(x, axis=1) >= 1)
            t[hit] = i * dt
            alive &= ~hit
        out.append(t)
    v = np.concatenate(out)
    return v.mean(), v.std() / np.sqrt(v.size)


def windowed_mean(y, dt=1e-4, n=2000, batch=500, power=1.0, tmax=2000.0):
    w = int(round(1 / dt))
    sq = np.sqrt(dt)
    out = []
    for _ in range(n // batch):
        hist = np.zeros((batch, w + 1))
        hist[:, 1:] = np.cumsum(rng.standard_normal((batch, w)) * sq, axis=1)
        ring = hist.copy()
        cur = hist[:, -1].copy()
        # D at t = 1
        d_prev = cur - ring[:, 0]
        t = np.full(batch, np.nan)
        hit0 = d_prev == y
        t[hit0] = 1.0
        alive = ~hit0
        pos = 0  # ring index holding B_{t-1} for the next step
        i = w
        ring = ring[:, :w + 1]
        buf = np.concatenate([ring[:, 1:], np.zeros((batch, 0))], axis=1)
        # circular buffer of the last w values B_{i-w+1..i}
        circ = ring[:, 1:].copy()
        while alive.any() and i * dt < tmax:
            i += 1
            cur = cur + rng.standard_normal(batch) * sq
            old = circ[:, pos].copy()  # B_{i-w}
            circ[:, pos] = cur
            pos = (pos + 1) % w
            d = cur - old
            hit = alive & (((d_prev - y) * (d - y) < 0) | (d == y))
            t[hit] = i * dt
            alive &= ~hit
            d_prev = d
        out.append(t)
    v = np.concatenate(out)
    v = v[~np.isnan(v)] ** power
    return v.mean(), v.std() / np.sqrt(v.size)


def lil_fraction(pieces=10000, paths=2000, thr=1.1):
    t = np.arange(1, pieces + 1, dtype=float)
    mask = t > 10
    good = 0
    for _ in range(paths):
        x = np.cumsum(rng.standard_normal(pieces))
        r = x[mask] / np.sqrt(2 * t[mask] * np.log(np.log(t[mask])))
        good += r.max() <= thr
    return good / paths


if __name__ == "__main__":
    names = sys.argv[1:] or ["lil", "bessel", "lastzero", "window05", "window1"]
    for name in names:
        if name == "lil":
            print("lil fraction (BM at integer times, 1e4 pieces):", lil_fraction())
        elif name == "bessel":
            print("E tau Bessel-3 to 1, dt=1e-5:", bessel_hit_mean())
        elif name == "lastzero":
            print("E sigma_B, dt=1e-5:", last_zero_mean())
        elif name == "window05":
            print("E T windowed y=0.5, dt=1e-4:", windowed_mean(0.5))
        elif name.startswith("window:"):
            y = float(name.split(":")[1])
            print(f"E T windowed y={y}, dt=1e-4:", windowed_mean(y))
        elif name == "window1":
            print("E T windowed y=1, dt=1e-4:", windowed_mean(1.0))
        sys.stdout.flush()
