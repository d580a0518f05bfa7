"""
How a branch is placed
======================

A branch is the tree of switches and terminals hanging off one bus.  Its
longest path continues straight away from the bus and every other subtree
steps to the right.  This script builds a small branch by hand and prints
the columns the placer chooses, together with the dry-run width that sizes
the bus before anything is drawn.
"""

from olnd import LayoutConfig, build_graph, parse_cime
from olnd.layout import dry_run_branch_width, place_branch
from olnd.topology import Direction, find_branches, iter_sub_branches

text = """\
<Bus>
@ id name volt node st
# 1 B1 110 1 F
</Bus>
<Disconnector>
@ id name volt node_i node_j point st
# 1 head 110 1 2 1 F
# 2 line_side 110 3 4 1 F
# 3 load_side 110 2 5 1 F
</Disconnector>
<Breaker>
@ id name volt node_i node_j point st
# 1 CB 110 2 3 1 F
</Breaker>
<ACLine>
@ id name volt node_i node_j st
# 1 L1 110 4 NULL F
</ACLine>
<Load>
@ id name volt node st
# 1 LD 110 5 F
</Load>
"""

graph = build_graph(parse_cime(text).records)
(branch,) = find_branches(graph, "Bus#1")
branch.direction = Direction.UP

for sub in iter_sub_branches(branch.tree):
    print(sub.placement_slot, sub.members)

config = LayoutConfig()
print("dry-run width:", dry_run_branch_width(graph, branch, config))

placements, connectors = place_branch(graph, branch, 0.0, 0.0, config)
for p in placements:
    print(f"{p.component_id:<16} x={p.x:6.1f} y={p.y:6.1f}")
print(len(connectors), "connectors")
