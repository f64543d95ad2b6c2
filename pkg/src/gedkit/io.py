"""GXL graphs and IAM-style collection files."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError
from .graph import LabeledGraph

# Elements without attributes carry this constant label.
DEFAULT_LABEL = 1

_TYPES = {"string": str, "int": int, "float": float}


def _value(attr: ET.Element, where: str):
    children = list(attr)
    if len(children) != 1:
        raise ParseError("attr must hold exactly one typed value", where)
    typed = children[0]
    conv = _TYPES.get(typed.tag)
    if conv is None:
        raise ParseError(f"unsupported value type <{typed.tag}>", where)
    text = (typed.text or "").strip()
    try:
        return conv(text) if conv is not str else (typed.text or "")
    except ValueError:
        raise ParseError(f"cannot read {text!r} as {typed.tag}", where) from None


def _label(elem: ET.Element, where: str):
    """One attribute gives a bare value, several give a tuple in document order."""
    values = []
    for attr in elem.findall("attr"):
        if "name" not in attr.attrib:
            raise ParseError("attr without a name", where)
        values.append(_value(attr, f"{where}/attr[@name={attr.attrib['name']!r}]"))
    if not values:
        return DEFAULT_LABEL
    return values[0] if len(values) == 1 else tuple(values)


def parse_gxl(data: bytes | str, source: str = "<gxl>", graph_id: str | None = None,
              class_tag: str | None = None) -> LabeledGraph:
    """Parse a GXL document holding one undirected graph."""
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc}", f"{source}:{line}:{col}") from None
    graphs = root.findall("graph") if root.tag != "graph" else [root]
    if len(graphs) != 1:
        raise ParseError(f"expected one graph element, found {len(graphs)}", source)
    g = graphs[0]
    mode = g.attrib.get("edgemode", "undirected")
    if mode != "undirected":
        raise ParseError(f"edgemode {mode!r} is not supported", f"{source}/graph")
    index: dict[str, int] = {}
    labels = []
    for t, node in enumerate(g.findall("node")):
        where = f"{source}/node[{t}]"
        nid = node.attrib.get("id")
        if nid is None:
            raise ParseError("node without an id", where)
        if nid in index:
            raise ParseError(f"duplicate node id {nid!r}", where)
        index[nid] = len(labels)
        labels.append(_label(node, where))
    edges = {}
    for t, edge in enumerate(g.findall("edge")):
        where = f"{source}/edge[{t}]"
        a, b = edge.attrib.get("from"), edge.attrib.get("to")
        if a not in index or b not in index:
            raise ParseError(f"edge endpoint {a if a not in index else b!r} is not a node", where)
        i, k = index[a], index[b]
        if i == k:
            raise ParseError(f"self-loop at node {a!r}", where)
        key = (min(i, k), max(i, k))
        if key in edges:
            raise ParseError(f"duplicate edge {a!r}-{b!r}", where)
        edges[key] = _label(edge, where)
    gid = graph_id if graph_id is not None else g.attrib.get("id", "")
    return LabeledGraph(tuple(labels), edges, gid, class_tag)


@dataclass(frozen=True)
class GraphCollection:
    graphs: tuple[LabeledGraph, ...]
    classes: dict = field(default_factory=dict)
    sources: tuple[str, ...] = ()

    def __post_init__(self):
        ids = [g.graph_id for g in self.graphs]
        if len(set(ids)) != len(ids):
            raise ParseError("duplicate graph id in collection")
        missing = set(self.classes) - set(ids)
        if missing:
            raise ParseError(f"class tags for unknown graphs {sorted(missing)}")

    def __len__(self) -> int:
        return len(self.graphs)

    def by_id(self, graph_id: str) -> LabeledGraph:
        for g in self.graphs:
            if g.graph_id == graph_id:
                return g
        raise KeyError(graph_id)


def load_collection(path: str | Path) -> GraphCollection:
    """Read a collection file whose <print> or <graph> entries name GXL files and classes.

    Graph ids are the file entries as written in the collection.
    """
    path = Path(path)
    try:
        root = ET.parse(path).getroot()
    except FileNotFoundError:
        raise ParseError("collection file not found", str(path)) from None
    except ET.ParseError as exc:
        line, col = exc.position
        raise ParseError(f"malformed XML: {exc}", f"{path}:{line}:{col}") from None
    graphs, classes, sources = [], {}, []
    seen = set()
    for t, entry in enumerate(e for e in root.iter() if e.tag in ("print", "graph") and "file" in e.attrib):
        name = entry.attrib["file"]
        where = f"{path}/entry[{t}]"
        if name in seen:
            raise ParseError(f"duplicate graph id {name!r}", where)
        seen.add(name)
        file = path.parent / name
        try:
            data = file.read_bytes()
        except OSError:
            raise ParseError(f"graph file {name!r} not found", where) from None
        tag = entry.attrib.get("class")
        graphs.append(parse_gxl(data, str(file), graph_id=name, class_tag=tag))
        sources.append(str(file))
        if tag is not None:
            classes[name] = tag
    return GraphCollection(tuple(graphs), classes, tuple(sources))


def write_gxl(G: LabeledGraph, attr_names: tuple[str, ...] = ("label",)) -> str:
    """Serialize a graph; tuple labels use one attr per component."""

    def add_attrs(elem: ET.Element, label) -> None:
        values = label if isinstance(label, tuple) else (label,)
        names = attr_names if len(attr_names) == len(values) else tuple(f"a{t}" for t in range(len(values)))
        for name, v in zip(names, values):
            kind = "float" if isinstance(v, float) else "int" if isinstance(v, int) and not isinstance(v, bool) \
                else "string"
            typed = ET.SubElement(ET.SubElement(elem, "attr", name=name), kind)
            typed.text = repr(v) if kind == "float" else str(v)

    root = ET.Element("gxl")
    g = ET.SubElement(root, "graph", id=G.graph_id, edgemode="undirected")
    for i, lab in enumerate(G.node_labels):
        add_attrs(ET.SubElement(g, "node", id=f"_{i}"), lab)
    for (i, k), lab in sorted(G.edge_labels.items()):
        add_attrs(ET.SubElement(g, "edge", {"from": f"_{i}", "to": f"_{k}"}), lab)
    return ET.tostring(root, encoding="unicode")
