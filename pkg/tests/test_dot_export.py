import pytest

from src.models.graph import BipartiteEdge, BipartiteGraph, u, x, y
from src.services.dm import dm_decompose
from src.services.dot_export import DotExporter, create_dot_exporter


@pytest.fixture
def exporter():
    """Fixture to create a DotExporter instance"""
    return create_dot_exporter()


def _clusters(dot: str) -> dict:
    """Cluster key -> body of its subgraph"""
    bodies = {}
    for chunk in dot.split("subgraph cluster_")[1:]:
        key, _, body = chunk.partition(" {")
        bodies[key] = body.split("  }")[0]
    return bodies


def test_initialization(exporter):
    """Test proper initialization of DotExporter"""
    assert exporter.env is not None
    assert exporter.template_dir.exists()
    assert (exporter.template_dir / "digraph.dot.j2").exists()
    assert (exporter.template_dir / "dm.dot.j2").exists()
    assert {"node_id", "shape", "edge_style"} <= set(exporter.env.filters)


def test_filters(exporter):
    """Test the node, shape and edge filters"""
    assert exporter._node_id(x(3)) == "x3"
    assert exporter._node_id(u(1), "l") == "u1_l"
    assert exporter._shape(x(1)) == "circle"
    assert exporter._shape(u(1)) == "box"
    assert exporter._shape(y(1)) == "doublecircle"
    edge = BipartiteEdge(x(2), x(2), structural=False, s_edge=True)
    assert exporter._edge_style(edge, frozenset()) == " [style=dashed]"
    assert exporter._edge_style(edge, frozenset({(x(2), x(2))})) == " [style=dashed, penwidth=2]"
    assert exporter._edge_style(BipartiteEdge(u(1), x(1)), frozenset()) == ""


def test_render_digraph(exporter, measured_plant):
    """Test the system digraph of the measured plant"""
    dot = exporter.render_digraph(measured_plant, name="plant")
    assert dot.startswith("digraph plant {")
    assert '  x1 [label="x1", shape=circle];' in dot
    assert '  u1 [label="u1", shape=box];' in dot
    assert '  y1 [label="y1", shape=doublecircle];' in dot
    assert "  u1 -> x1;" in dot
    assert "  x1 -> x1;" in dot
    assert "  x5 -> y1;" in dot
    assert dot.count("->") == 10


def test_render_decomposition(exporter, measured_plant):
    """Test clusters, flags, matched edges and the block order"""
    graph = BipartiteGraph.from_system(measured_plant, with_s_edges=True)
    dot = exporter.render_decomposition(graph, dm_decompose(graph))
    clusters = _clusters(dot)
    assert sorted(clusters) == ["1", "2", "3", "4"]
    assert 'label="B_2"' in clusters["2"]
    assert "fillcolor" in clusters["2"] and "fillcolor" in clusters["3"]
    assert "fillcolor" not in clusters["1"] and "fillcolor" not in clusters["4"]
    assert "u1_l" in clusters["1"] and "x1_r" in clusters["1"]
    assert "  u1_l -> x1_r [penwidth=2];" in dot
    assert "  x5_l -> y1_r [penwidth=2];" in dot
    assert "  x1_l -> x1_r [style=dashed];" in dot
    assert "  x1_l -> u1_l [ltail=cluster_2, lhead=cluster_1, color=blue, style=bold];" in dot
    assert dot.count("ltail=") == 3


def test_render_horizontal_block(exporter, plant):
    """Test that the unmeasured plant gets a B_0 cluster"""
    graph = BipartiteGraph.from_system(plant, with_s_edges=True)
    clusters = _clusters(exporter.render_decomposition(graph, dm_decompose(graph)))
    assert "b0" in clusters
    assert 'label="B_0"' in clusters["b0"]
    assert "x5_l" in clusters["b0"]


def test_custom_template_dir(tmp_path, plant):
    """Test loading templates from another directory"""
    (tmp_path / "digraph.dot.j2").write_text("{{ name }}:{{ vertices | length }}")
    exporter = DotExporter(template_dir=tmp_path)
    assert exporter.render_digraph(plant, name="tiny") == "tiny:6"
