"""Tour of the bundled apartment map.

Prints the risk table with per-crossing effective success, the labelled
waypoints, and the two candidate routes between the task nodes of the
bundled mission, so you can see what the planners trade off.

Run:  python3 demos/map_tour.py
"""

from risknav import (effective_success, load_default_environment,
                     load_default_mission, max_success_path,
                     shortest_distance_path)


def main():
    g = load_default_environment()
    mission = load_default_mission(g)

    print(f"bundled map: {g.node_count} nodes, {len(g.edges)} edges")
    print("\nrisk classes (per-crossing effective success under retries):")
    order = sorted(g.risk_table,
                   key=lambda name: -g.risk_table[name].p_success)
    for name in order:
        p = g.risk_table[name]
        count = sum(1 for e in g.edges.values() if e.risk == name)
        print(f"  {name:<8} success {p.p_success:.3f}  retry "
              f"{p.p_retry:.5f}  -> effective {effective_success(p):.6f}"
              f"  ({count} edges)")

    print("\nlabelled waypoints:")
    for node in sorted(g.labels):
        print(f"  {node:>2}  {g.labels[node]}")

    print(f"\nmission: tasks {list(mission.tasks)}, end {mission.end}, "
          f"threshold {mission.threshold}, safe spots "
          f"{list(mission.safe_locations)}")

    print("\nplanner trade-offs between consecutive tasks:")
    stops = list(mission.tasks) + [mission.end]
    for a, b in zip(stops, stops[1:]):
        short = shortest_distance_path(g, a, b)
        safe = max_success_path(g, a, b)
        mark = "same" if short.nodes == safe.nodes else "differ"
        print(f"  {a:>2} -> {b:<2} shortest {short.total_distance:6.2f}m "
              f"at r={short.success_probability:.4f} | safest "
              f"r={safe.success_probability:.4f} over "
              f"{safe.total_distance:6.2f}m  [{mark}]")


if __name__ == "__main__":
    main()
