"""Canonical printer for specs; ``parse(serialize(s, i))`` gives back ``(s, i)``."""
from typing import List, Optional

from src.dsl.parser import shorthand_ids
from src.model.expr import Arith, AttrRef, Compare, IntLit, Logical, Node, Sum, SymLit
from src.model.types import (
    BinaryConnectionDef, Cardinality, ComponentClass, InstanceSpec, OneToManyConnectionDef,
    ProblemSpec, RequiredAtom, Value,
)

_PRECEDENCE = {"or": 1, "and": 2, "+": 4, "-": 4, "*": 5}
_COMPARE = 3
_ATOM = 6


def _precedence(node: Node) -> int:
    if isinstance(node, (Logical, Arith)):
        return _PRECEDENCE[node.op]
    if isinstance(node, Compare):
        return _COMPARE
    return _ATOM


def _wrap(node: Node, minimum: int) -> str:
    text = format_expr(node)
    return f"({text})" if _precedence(node) < minimum else text


def format_expr(node: Node) -> str:
    """Print an expression with the fewest parentheses that keep its shape."""
    if isinstance(node, IntLit):
        return str(node.value)
    if isinstance(node, SymLit):
        return node.name
    if isinstance(node, AttrRef):
        return f"{node.side.value}.{node.attr}"
    if isinstance(node, Sum):
        return f"sum({node.side.value}.{node.attr})"
    if isinstance(node, Compare):
        return f"{_wrap(node.left, _COMPARE + 1)} {node.op} {_wrap(node.right, _COMPARE + 1)}"
    if isinstance(node, (Arith, Logical)):
        prec = _PRECEDENCE[node.op]
        # operators are left-associative: the right operand binds tighter
        return f"{_wrap(node.left, prec)} {node.op} {_wrap(node.right, prec + 1)}"
    raise TypeError(f"not an expression node: {node!r}")


def _card(card: Cardinality) -> str:
    upper = "*" if card.upper is None else str(card.upper)
    return f"[{card.lower},{upper}]"


def _value(value: Value) -> str:
    return str(value)


def _connection(conn: BinaryConnectionDef) -> str:
    parts = [f"connect {conn.left} - {conn.right} forward {_card(conn.forward)}"]
    if conn.forward_constraint is not None:
        parts.append(f"where {format_expr(conn.forward_constraint)}")
    if conn.backward is not None:
        parts.append(f"backward {_card(conn.backward)}")
        if conn.backward_constraint is not None:
            parts.append(f"where {format_expr(conn.backward_constraint)}")
    return " ".join(parts)


def _one_to_many(otm: OneToManyConnectionDef) -> str:
    mode = "exclusive" if otm.exclusive else "inclusive"
    return f"connect-one-to-many {otm.left} -> {{{', '.join(otm.rights)}}} {_card(otm.card)} {mode}"


def _require(atom: RequiredAtom) -> str:
    args = [atom.id] + ["_" if b is None else _value(b) for b in atom.bindings]
    return f"require {atom.kind}({', '.join(args)})"


def _instance_lines(spec: ProblemSpec, inst: InstanceSpec) -> List[str]:
    lines: List[str] = []
    order = {name: i for i, name in enumerate(spec.kind_names)}
    for kind in sorted(inst.input_domains, key=lambda k: (order.get(k, len(order)), k)):
        ids = inst.input_domains[kind]
        if ids == shorthand_ids(kind, len(ids)):
            lines.append(f"input {kind} = {len(ids)}")
        else:
            lines.append(f"input {kind} = {{{', '.join(ids)}}}")
    for kind in sorted(inst.both_assignments, key=lambda k: (order.get(k, len(order)), k)):
        if inst.both_assignments[kind] is ComponentClass.GENERATED:
            lines.append(f"generated {kind}")
    lines.extend(_require(atom) for atom in inst.required_atoms)
    for lit in inst.connection_literals:
        verb = "assert" if lit.positive else "deny"
        lines.append(f"{verb} {lit.connection}({lit.left_id}, {lit.right_id})")
    return lines


def serialize(spec: ProblemSpec, inst: Optional[InstanceSpec] = None) -> str:
    """Render a well-formed spec pair in canonical DSL form.

    Output is deterministic, so its hash identifies the spec.
    """
    blocks: List[str] = []
    if spec.attribute_types:
        blocks.append("\n".join(
            f"type {t.name} = {{{', '.join(_value(v) for v in t.values)}}}"
            for t in spec.attribute_types))

    kind_lines: List[str] = []
    for kind in spec.kinds:
        line = f"component {kind.name} class {kind.clazz.value}"
        if kind.attributes:
            attrs = ", ".join(f"{name}: {type_name}" for name, type_name in kind.attributes)
            line += f" attributes ({attrs})"
        kind_lines.append(line)
        if kind.catalogue is not None:
            rows = "; ".join(
                "(" + ", ".join(_value(v) for v in row.values) + ")" for row in kind.catalogue)
            kind_lines.append(f"catalogue {kind.name} {{{rows}}}")
    if kind_lines:
        blocks.append("\n".join(kind_lines))

    conn_lines = [_connection(c) for c in spec.binary_connections]
    conn_lines += [_one_to_many(o) for o in spec.one_to_many]
    if conn_lines:
        blocks.append("\n".join(conn_lines))

    if inst is not None:
        lines = _instance_lines(spec, inst)
        if lines:
            blocks.append("instance {\n" + "\n".join(f"  {line}" for line in lines) + "\n}")
    return "\n\n".join(blocks) + "\n"
