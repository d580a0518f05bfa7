import pytest

from olnd import build_graph, layout_substation, parse_cime, query_substation
from olnd.diagram import LayoutConfig


def graph_of(text: str, name: str = "F"):
    return build_graph(query_substation(parse_cime(text), name))


def layout_of(text: str, name: str = "F", config: LayoutConfig | None = None):
    return layout_substation(graph_of(text, name), config, name=name)


def cime(*blocks: tuple[str, str, list[str]]) -> str:
    """Assemble CIM/E text from (kind, header, rows) triples."""
    out = []
    for kind, header, rows in blocks:
        out.append(f"<{kind}>")
        out.append(f"@ {header}")
        out.extend(f"# {r}" for r in rows)
        out.append(f"</{kind}>")
    return "\n".join(out) + "\n"


BUS = "id name volt node st"
SWITCH = "id name volt node_i node_j point st"
ONE = "id name volt node st"
LINE = "id name volt node_i node_j st"
T2W = "id name volt_h volt_l node_h node_l st"
T3W = "id name volt_h volt_m volt_l node_h node_m node_l st"


@pytest.fixture
def config():
    return LayoutConfig()
