"""Automatic one-line diagram layout for substations described in CIM/E."""

from .cime import ModelStore, list_substations, parse_cime, query_substation
from .diagram import LayoutConfig, LayoutDiagram, parse_config_text
from .graph import SubstationGraph, build_graph
from .layout import layout_substation

__all__ = [
    "LayoutConfig",
    "LayoutDiagram",
    "ModelStore",
    "SubstationGraph",
    "build_graph",
    "layout_substation",
    "list_substations",
    "parse_cime",
    "parse_config_text",
    "query_substation",
]
