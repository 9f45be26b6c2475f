# src/services/dot_export.py
import logging
from pathlib import Path
from typing import Any, Dict, FrozenSet, List, Optional, Tuple

from jinja2 import Environment, FileSystemLoader

from src.models.decomposition import DMComponent, DMDecomposition
from src.models.graph import BipartiteEdge, BipartiteGraph, SystemDigraph, Vertex, VertexKind, sorted_vertices
from src.models.system import StructuredSystem

logger = logging.getLogger(__name__)

SHAPES = {
    VertexKind.STATE: "circle",
    VertexKind.INPUT: "box",
    VertexKind.OUTPUT: "doublecircle",
}


class DotExporter:
    def __init__(self, template_dir: Optional[Path] = None):
        """Initialize the exporter with the DOT templates"""
        self.template_dir = template_dir or Path(__file__).parent.parent / "templates"
        self.env = Environment(
            loader=FileSystemLoader(str(self.template_dir)),
            autoescape=False,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["node_id"] = self._node_id
        self.env.filters["shape"] = self._shape
        self.env.filters["edge_style"] = self._edge_style

    def _node_id(self, vertex: Vertex, side: str = "") -> str:
        """DOT identifier of a vertex, suffixed with its bipartite side"""
        return f"{vertex.label}_{side}" if side else vertex.label

    def _shape(self, vertex: Vertex) -> str:
        return SHAPES[vertex.kind]

    def _edge_style(self, edge: BipartiteEdge, matched: FrozenSet[Tuple[Vertex, Vertex]]) -> str:
        attributes = []
        if edge.s_edge:
            attributes.append("style=dashed")
        if (edge.left, edge.right) in matched:
            attributes.append("penwidth=2")
        return f" [{', '.join(attributes)}]" if attributes else ""

    def render_digraph(self, system: StructuredSystem, name: str = "G") -> str:
        """Render G(V, E) with states as circles, inputs as boxes and outputs as double circles"""
        digraph = SystemDigraph.from_system(system)
        edges = sorted(digraph.edges, key=lambda e: (e[0].sort_key, e[1].sort_key))
        template = self.env.get_template("digraph.dot.j2")
        dot = template.render(name=name, vertices=digraph.vertices, edges=edges)
        logger.debug(f"Rendered digraph with {len(digraph.vertices)} vertices and {len(edges)} edges")
        return dot

    def _block(self, component: DMComponent, key: str, flagged: bool) -> Dict[str, Any]:
        return {
            "key": key,
            "label": component.label,
            "flagged": flagged,
            "left": sorted_vertices(component.left),
            "right": sorted_vertices(component.right),
        }

    def render_decomposition(
        self, graph: BipartiteGraph, decomposition: DMDecomposition, name: str = "DM"
    ) -> str:
        """Render a DM-decomposition: one cluster per block, s-edges dashed, flagged blocks filled

        Args:
            graph: The bipartite graph that was decomposed
            decomposition: Its decomposition

        Returns:
            DOT source with the ≺ relation drawn between cluster anchors
        """
        blocks: List[Dict[str, Any]] = []
        if decomposition.has_horizontal:
            blocks.append(self._block(decomposition.horizontal, "b0", False))
        for component in decomposition.components:
            blocks.append(self._block(component, str(component.index), component.has_s_edge))
        if decomposition.has_vertical:
            blocks.append(self._block(decomposition.vertical, "binf", False))

        anchors = {
            c.index: self._node_id(sorted_vertices(c.left)[0], "l") for c in decomposition.components
        }
        edges = sorted(graph.edges, key=lambda e: (e.left.sort_key, e.right.sort_key))
        template = self.env.get_template("dm.dot.j2")
        dot = template.render(
            name=name,
            blocks=blocks,
            edges=edges,
            matched=decomposition.matching.pairs,
            order=sorted(decomposition.order),
            anchors=anchors,
        )
        logger.debug(f"Rendered decomposition with {decomposition.k} middle block(s)")
        return dot


def create_dot_exporter(template_dir: Optional[Path] = None) -> DotExporter:
    return DotExporter(template_dir)
