"""
Decency over a random corpus
============================

Generate a seeded batch of random substations, lay every one out, and
summarise the validator results with numpy.  Crossings are not a failure
condition, but their distribution tells us where the heuristics struggle.
"""

import time

import numpy as np

from olnd import build_graph, layout_substation, list_substations, parse_cime, query_substation
from olnd import synth
from olnd.validate import corpus_report, validate

text, info = synth.generate_corpus(200, seed=2024)
store = parse_cime(text)

reports, seconds, levels = [], [], []
for name, meta in zip(list_substations(store), info):
    t0 = time.perf_counter()
    diagram = layout_substation(build_graph(query_substation(store, name)), name=name)
    reports.append((name, validate(diagram)))
    seconds.append(time.perf_counter() - t0)
    levels.append(len(meta["levels"]))

summary = corpus_report(reports)
print(summary.to_dict())

# %%
# Crossings grow with the number of voltage levels
crossings = np.array([r.crossing_count for _, r in reports])
levels = np.array(levels)
for n in np.unique(levels):
    sel = crossings[levels == n]
    print(f"{n} level(s): {sel.size:3d} stations, median crossings {np.median(sel):5.1f}, max {sel.max()}")

seconds = np.array(seconds)
print(f"layout time: mean {seconds.mean() * 1e3:.1f} ms, slowest {seconds.max() * 1e3:.1f} ms")
