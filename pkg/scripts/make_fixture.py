"""Generate the seven-asset synthetic fixture used by the CLI and the
end-to-end determinism checks: per-asset OHLCV CSVs, tweet files, and a
run config wired to the sample lexicon.

Run from the repository root:

    python3 scripts/make_fixture.py

Regeneration is deterministic; the files under tests/fixtures/fleet are
committed, so this only needs to run when the recipe changes.
"""

from __future__ import annotations

import csv
from datetime import date, timedelta
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
FLEET = ROOT / "tests" / "fixtures" / "fleet"

N_DAYS = 240
START = date(2021, 1, 4)

POSITIVE_POSTS = [
    "Great quarter, strong profits and solid momentum",
    "Bullish here, love the upgrade and the gains",
    "Amazing rally today, very confident in this one",
    "Excellent earnings, promising outlook, happy to hold",
    "Undervalued opportunity with strength everywhere",
]
NEGATIVE_POSTS = [
    "Terrible guidance, bearish and worried about losses",
    "This is a disaster, awful downgrade, expect a plunge",
    "Weak numbers again, hate the risky balance sheet",
    "Horrible day, the crash wiped out the gains",
    "Overvalued garbage, trouble and weakness ahead",
]
NEUTRAL_POSTS = [
    "Volume was in line with the ten day average",
    "Earnings call scheduled for next Thursday",
    "No change to the analyst consensus this week",
]


def trading_days(n):
    days = []
    d = START
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += timedelta(days=1)
    return days


def close_path(kind, rng, n=N_DAYS):
    t = np.arange(n)
    if kind == "trend":
        return 80.0 + 0.15 * t + np.cumsum(rng.normal(0, 0.6, n))
    if kind == "meanrev":
        z = np.zeros(n)
        for i in range(1, n):
            z[i] = 0.9 * z[i - 1] + rng.normal(0, 1.0)
        return 120.0 + z
    if kind == "sine_trend":
        return 60.0 + 0.08 * t + 6.0 * np.sin(2 * np.pi * t / 40.0) + rng.normal(0, 0.4, n)
    if kind == "walk":
        return 200.0 + np.cumsum(rng.normal(0.05, 1.2, n))
    if kind == "volatile":
        return 40.0 * np.exp(np.cumsum(rng.normal(0, 0.02, n)))
    if kind == "decline":
        return 150.0 - 0.1 * t + np.cumsum(rng.normal(0, 0.8, n))
    # jumpy: level shifts arrive in clusters
    base = 90.0 + np.cumsum(rng.normal(0, 0.5, n))
    jumps = np.cumsum(rng.choice([0.0, 4.0, -4.0], size=n, p=[0.94, 0.03, 0.03]))
    return np.maximum(base + jumps, 5.0)


def write_ohlcv(path, days, close, rng):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", "open", "high", "low", "close", "adj_close", "volume"])
        for d, c in zip(days, close):
            o = c * (1.0 + rng.normal(0, 0.004))
            hi = max(o, c) * (1.0 + abs(rng.normal(0, 0.004)))
            lo = min(o, c) * (1.0 - abs(rng.normal(0, 0.004)))
            vol = float(rng.integers(4_000_000, 40_000_000))
            row = [d.isoformat()] + [f"{v:.4f}" for v in (o, hi, lo, c, c)] + [f"{vol:.0f}"]
            writer.writerow(row)


def write_tweets(path, days, rng, mood_bias):
    """A handful of posts on roughly 60% of trading days, plus a few
    weekend posts that must roll forward onto the next session."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["timestamp", "text"])
        for d in days:
            if rng.uniform() > 0.6:
                continue
            for _ in range(int(rng.integers(1, 5))):
                u = rng.uniform()
                if u < 0.3 + mood_bias:
                    text = POSITIVE_POSTS[rng.integers(len(POSITIVE_POSTS))]
                elif u < 0.65:
                    text = NEGATIVE_POSTS[rng.integers(len(NEGATIVE_POSTS))]
                else:
                    text = NEUTRAL_POSTS[rng.integers(len(NEUTRAL_POSTS))]
                hour = int(rng.integers(8, 20))
                writer.writerow([f"{d.isoformat()}T{hour:02d}:00:00", text])
        # weekend chatter before the second week
        writer.writerow([f"{(days[4] + timedelta(days=1)).isoformat()}T12:00:00",
                         POSITIVE_POSTS[0]])


ASSETS = [
    ("ALPHA", "trend", 0.25),
    ("BRAVO", "meanrev", 0.0),
    ("CHARLIE", "sine_trend", 0.15),
    ("DELTA", "walk", -0.1),
    ("ECHO", "volatile", 0.05),
    ("FOXTROT", "decline", -0.2),
    ("GOLF", "jumpy", 0.1),
]


def main():
    FLEET.mkdir(parents=True, exist_ok=True)
    days = trading_days(N_DAYS)
    config_assets = []
    for i, (symbol, kind, bias) in enumerate(ASSETS):
        rng = np.random.default_rng(1000 + i)
        close = close_path(kind, rng)
        assert np.all(close > 0), symbol
        write_ohlcv(FLEET / f"{symbol}.csv", days, close, rng)
        if symbol != "DELTA":  # one asset deliberately has no tweet file
            write_tweets(FLEET / f"{symbol}_tweets.csv", days, rng, bias)
            config_assets.append(
                f'  - {{symbol: {symbol}, ohlcv: {symbol}.csv, tweets: {symbol}_tweets.csv}}'
            )
        else:
            config_assets.append(f"  - {{symbol: {symbol}, ohlcv: {symbol}.csv}}")
    config = "\n".join(
        [
            "seed: 7",
            "window_length: 20",
            "lexicon: ../sample_lexicon.txt",
            "output_dir: out",
            "assets:",
            *config_assets,
            "lstm:",
            "  max_epochs: 60",
            "gan:",
            "  epochs: 80",
            "  gen_hidden: [64, 32]",
            "  disc_hidden: [32, 16]",
            "",
        ]
    )
    (FLEET / "config.yaml").write_text(config)
    print(f"fixture written to {FLEET}")


if __name__ == "__main__":
    main()
