"""Desk-scale uncertainty sweep with a small text chart.

Runs the bundled mission across the standard uncertainty levels and
charts how mission success and redirect activity respond as the human
gets harder to predict.  Episode count is adjustable for quick runs.

Run:  python3 demos/uncertainty_report.py [episodes_per_level]
"""

import sys

from risknav import (EpisodeConfig, HeatParams, load_default_environment,
                     load_default_mission, run_sweep, summarize)
from risknav.sim import DEFAULT_LEVELS

SEED = 7


def bar(value, top, width=30):
    filled = 0 if top == 0 else round(width * value / top)
    return "#" * filled + "." * (width - filled)


def main():
    episodes = int(sys.argv[1]) if len(sys.argv) > 1 else 500
    g = load_default_environment()
    mission = load_default_mission(g)
    base = EpisodeConfig(g, mission, HeatParams(), 0.0, SEED)

    print(f"sweep: {episodes} episodes x {len(DEFAULT_LEVELS)} levels, "
          f"seed {SEED}", file=sys.stderr)
    report = run_sweep(base, DEFAULT_LEVELS, episodes)

    print(summarize(report))
    print("success rate by uncertainty:")
    for row in report.rows:
        print(f"  u={row.uncertainty:<4g} {bar(row.success_percent, 100)} "
              f"{row.success_percent:6.2f}%")
    top = max(r.redirect_episode_percent for r in report.rows)
    print("episodes with at least one redirect:")
    for row in report.rows:
        print(f"  u={row.uncertainty:<4g} "
              f"{bar(row.redirect_episode_percent, top)} "
              f"{row.redirect_episode_percent:6.2f}%")


if __name__ == "__main__":
    main()
