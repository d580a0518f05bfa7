"""
Laying out a three-level substation
===================================

A 500 kV breaker-and-a-half yard and a 220 kV double bus are joined by two
three-winding transformers whose 35 kV windings feed compensators.  We parse
the CIM/E text, look at what topology analysis finds, lay it out and write
both the layout document and an SVG next to this script.
"""

from pathlib import Path

from olnd import build_graph, layout_substation, parse_cime, query_substation
from olnd import synth
from olnd.emit import emit_layout_json, emit_svg
from olnd.validate import validate

# the fixture is plain CIM/E text, exactly what a model export would hold
text = synth.fixture_three_level()
print(text[:300], "...")

store = parse_cime(text)
graph = build_graph(query_substation(store, "F"))
print(len(graph), "components")

# %%
# Lay out and inspect the voltage regions
diagram = layout_substation(graph, name="F")
for region in diagram.regions:
    print(f"{region.level_kv:g} kV  {region.scheme.value:<24} frame {region.bbox}")

for bus in diagram.buses:
    print(bus.bus_id, "y =", bus.y, "length =", bus.length)

# %%
# Check the drawing the same way the corpus run does
report = validate(diagram)
print("passed:", report.passed, " crossings:", report.crossing_count)

out = Path(__file__).with_name("three_level")
out.mkdir(exist_ok=True)
(out / "F.layout.json").write_bytes(emit_layout_json(diagram))
(out / "F.svg").write_bytes(emit_svg(diagram))
print("wrote", sorted(p.name for p in out.iterdir()))
