"""Build an OWL ontology from a decision tree.

Every distinct decision node becomes an ``owl:Class`` and an
``owl:DatatypeProperty`` named ``<node>Value``. The property's domains are
the node's class plus one class per outgoing branch (``<node>_<label>``).
Leaves become individuals typed by the class of the branch that enters
them.

Tree files are indented text. The first line names the root node; every
other line is a branch below the nearest less-indented line::

    Outlook
      sunny -> Humidity
        high = no
        normal = yes
      overcast = yes

``label -> Name`` leads to a decision node, ``label = class`` to a leaf. A
tree whose root is a leaf is written as a single ``= class`` line.
"""

from __future__ import annotations

import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, NamedTuple

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"

for _prefix, _uri in (("rdf", RDF_NS), ("rdfs", RDFS_NS), ("owl", OWL_NS)):
    ET.register_namespace(_prefix, _uri)

_UNSAFE = re.compile(r"[^A-Za-z0-9]")


class TreeError(ValueError):
    pass


class TreeParseError(TreeError):
    def __init__(self, message: str, lineno: int, source: str = "<tree>"):
        self.lineno = lineno
        super().__init__(f"{source}:{lineno}: {message}")


@dataclass(eq=False)
class DecisionNode:
    name: str
    branches: list[tuple[str, "DecisionNode"]] = field(default_factory=list)
    class_label: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.class_label is not None

    @classmethod
    def leaf(cls, class_label: str) -> "DecisionNode":
        return cls(class_label, [], class_label)


class Branch(NamedTuple):
    parent: str
    label: str
    child: DecisionNode


@dataclass
class OwlDocument:
    classes: list[str] = field(default_factory=list)
    datatype_properties: list[tuple[str, list[str]]] = field(default_factory=list)
    individuals: list[tuple[str, str | None]] = field(default_factory=list)


def sanitize(text: str) -> str:
    return _UNSAFE.sub("_", text)


# ---------------------------------------------------------------------------
# Tree helpers
# ---------------------------------------------------------------------------


def iter_nodes(tree: DecisionNode) -> Iterator[DecisionNode]:
    """Pre-order traversal."""
    stack = [tree]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(child for _, child in reversed(node.branches))


def validate_tree(tree: DecisionNode):
    seen = set()
    for node in iter_nodes(tree):
        if node.is_leaf == bool(node.branches):
            raise TreeError(f"node {node.name!r}: a node is a leaf exactly when it has no branches")
        if not node.is_leaf:
            if node.name in seen:
                raise TreeError(f"duplicate decision node name {node.name!r}")
            seen.add(node.name)


def _find(tree: DecisionNode, node_name: str) -> DecisionNode:
    for node in iter_nodes(tree):
        if node.name == node_name and not node.is_leaf:
            return node
    for node in iter_nodes(tree):
        if node.name == node_name:
            return node
    raise KeyError(f"no node named {node_name!r}")


def get_branches(tree: DecisionNode, node_name: str) -> list[Branch]:
    node = _find(tree, node_name)
    return [Branch(node.name, label, child) for label, child in node.branches]


def get_leaf_branch(tree: DecisionNode, leaf: DecisionNode) -> Branch:
    if not leaf.is_leaf:
        raise TreeError(f"{leaf.name!r} is not a leaf")
    if leaf is tree:
        raise TreeError("the root has no incoming branch")
    for node in iter_nodes(tree):
        for label, child in node.branches:
            if child is leaf:
                return Branch(node.name, label, child)
    raise TreeError(f"leaf {leaf.name!r} is not part of this tree")


def get_class(branch: Branch) -> str:
    return sanitize(f"{branch.parent}_{branch.label}")


def create_individual(tree: DecisionNode, leaf: DecisionNode, ordinals: dict[str, int] | None = None) -> tuple[str, str | None]:
    """Make ``(individual_id, class_id)`` for a leaf.

    ``ordinals`` tracks how many individuals each class label has produced
    so far and is updated in place; repeated labels get ``_0``, ``_1``, ...
    A leaf standing alone as the whole tree has no typing class.
    """
    if not leaf.is_leaf:
        raise TreeError(f"{leaf.name!r} is not a leaf")
    if ordinals is None:
        ordinals = {}
    label = sanitize(leaf.class_label)
    n = ordinals.get(label, 0)
    ordinals[label] = n + 1
    class_id = None if leaf is tree else get_class(get_leaf_branch(tree, leaf))
    return f"{label}_{n}", class_id


def tree_to_owl(tree: DecisionNode) -> OwlDocument:
    validate_tree(tree)
    doc = OwlDocument()
    for node in iter_nodes(tree):
        if node.is_leaf:
            continue
        class_id = sanitize(node.name)
        domains = [class_id]
        domains.extend(get_class(b) for b in get_branches(tree, node.name))
        doc.classes.append(class_id)
        doc.datatype_properties.append((class_id + "Value", domains))

    # Second pass: one individual per leaf.
    ordinals: dict[str, int] = {}
    for node in iter_nodes(tree):
        if node.is_leaf:
            doc.individuals.append(create_individual(tree, node, ordinals))

    for kind, ids in (("class", doc.classes), ("individual", [i for i, _ in doc.individuals])):
        if len(set(ids)) != len(ids):
            raise TreeError(f"{kind} ids collide after sanitizing: {ids}")
    return doc


# ---------------------------------------------------------------------------
# Tree file parsing
# ---------------------------------------------------------------------------

_BRANCH_RE = re.compile(r"^(?P<label>.+?)\s*(?P<op>->|=)\s*(?P<target>.+?)\s*$")


def parse_tree(text: str, source: str = "<tree>") -> DecisionNode:
    lines = [(n, line.rstrip()) for n, line in enumerate(text.splitlines(), 1)]
    lines = [(n, line) for n, line in lines if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise TreeParseError("empty tree", 1, source)

    first_no, first = lines[0]
    if first[0].isspace():
        raise TreeParseError("the root line must not be indented", first_no, source)
    if first.startswith("="):
        root = DecisionNode.leaf(first[1:].strip())
        if len(lines) > 1:
            raise TreeParseError("a leaf root cannot have branches", lines[1][0], source)
        return root
    root = DecisionNode(first.strip())

    # stack of (indent, node) for the open decision nodes
    stack: list[tuple[int, DecisionNode]] = [(0, root)]
    child_indent: dict[int, int] = {}
    for lineno, line in lines[1:]:
        if "\t" in line[: len(line) - len(line.lstrip())]:
            raise TreeParseError("tabs are not allowed in indentation", lineno, source)
        indent = len(line) - len(line.lstrip())
        while stack and indent <= stack[-1][0]:
            stack.pop()
        if not stack:
            raise TreeParseError("branch is not indented below any node", lineno, source)
        parent_indent, parent = stack[-1]
        if parent.is_leaf:
            raise TreeParseError("a leaf cannot have branches", lineno, source)
        expected = child_indent.setdefault(id(parent), indent)
        if indent != expected:
            raise TreeParseError(f"inconsistent indentation (expected {expected} spaces, got {indent})", lineno, source)
        m = _BRANCH_RE.match(line.strip())
        if not m:
            raise TreeParseError("expected '<label> -> <node>' or '<label> = <class>'", lineno, source)
        label, op, target = m.group("label"), m.group("op"), m.group("target")
        child = DecisionNode(target) if op == "->" else DecisionNode.leaf(target)
        parent.branches.append((label, child))
        stack.append((indent, child))

    for node in iter_nodes(root):
        if not node.is_leaf and not node.branches:
            raise TreeError(f"decision node {node.name!r} has no branches")
    validate_tree(root)
    return root


def load_tree(path: str | Path) -> DecisionNode:
    path = Path(path)
    return parse_tree(path.read_text(encoding="utf-8"), source=str(path))


# ---------------------------------------------------------------------------
# OWL / RDF-XML
# ---------------------------------------------------------------------------


def _q(ns: str, tag: str) -> str:
    return f"{{{ns}}}{tag}"


def serialize_owl(doc: OwlDocument) -> str:
    root = ET.Element(_q(RDF_NS, "RDF"))
    for class_id in doc.classes:
        ET.SubElement(root, _q(OWL_NS, "Class"), {_q(RDF_NS, "ID"): class_id})
    for prop_id, domains in doc.datatype_properties:
        prop = ET.SubElement(root, _q(OWL_NS, "DatatypeProperty"), {_q(RDF_NS, "ID"): prop_id})
        for d in domains:
            ET.SubElement(prop, _q(RDFS_NS, "domain"), {_q(RDF_NS, "resource"): "#" + d})
    for ind_id, class_id in doc.individuals:
        ind = ET.SubElement(root, _q(OWL_NS, "NamedIndividual"), {_q(RDF_NS, "ID"): ind_id})
        if class_id is not None:
            ET.SubElement(ind, _q(RDF_NS, "type"), {_q(RDF_NS, "resource"): "#" + class_id})
    # ElementTree only declares prefixes it uses; declare the rest by hand.
    if not doc.datatype_properties:
        root.set("xmlns:rdfs", RDFS_NS)
    if not (doc.classes or doc.datatype_properties or doc.individuals):
        root.set("xmlns:owl", OWL_NS)
    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=True) + "\n"


def _ref(value: str) -> str:
    return value[1:] if value.startswith("#") else value


def parse_owl(text: str) -> OwlDocument:
    """Read back an OWL document written by :func:`serialize_owl`."""
    root = ET.fromstring(text)
    doc = OwlDocument()
    rdf_id = _q(RDF_NS, "ID")
    resource = _q(RDF_NS, "resource")
    for el in root:
        if el.tag == _q(OWL_NS, "Class"):
            doc.classes.append(el.get(rdf_id))
        elif el.tag == _q(OWL_NS, "DatatypeProperty"):
            domains = [_ref(d.get(resource)) for d in el.findall(_q(RDFS_NS, "domain"))]
            doc.datatype_properties.append((el.get(rdf_id), domains))
        elif el.tag == _q(OWL_NS, "NamedIndividual"):
            t = el.find(_q(RDF_NS, "type"))
            doc.individuals.append((el.get(rdf_id), None if t is None else _ref(t.get(resource))))
    return doc
