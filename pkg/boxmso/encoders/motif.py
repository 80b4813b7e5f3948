"""Graph motif: a connected vertex set with prescribed color multiplicities."""

import logging
from collections import Counter
from collections.abc import Mapping
from fractions import Fraction

from boxmso.core.errors import InvalidInstanceError, SignatureMismatchError
from boxmso.encoders.base import (
    EncodedInstance,
    compile_query,
    connected,
    exactly,
    graph_expression,
    size,
)
from boxmso.models.answer import Witness
from boxmso.models.expression import CwExpression
from boxmso.models.graph import EDGE_COLOR, Graph

logger = logging.getLogger(__name__)


def vertex_color(g: Graph) -> dict[int, str]:
    """The unique color of every vertex."""
    owned: dict[int, str] = {}
    for v, colors in g.vertex_colors.items():
        colors = colors - {EDGE_COLOR}
        if len(colors) != 1:
            raise InvalidInstanceError(
                f"vertex {v} must carry exactly one color, has {len(colors)}", vertex=v
            )
        [owned[v]] = colors
    return owned


def encode_graph_motif(
    g: Graph, expression: CwExpression | None, motif: Mapping[str, int]
) -> EncodedInstance:
    """
    A connected ``X`` holding exactly ``M(c)`` vertices of color ``c``.

    Colors of ``g`` missing from ``M`` have multiplicity 0.
    """
    expression = graph_expression(g, expression)
    for color, count in motif.items():
        if color not in g.color_sets:
            raise SignatureMismatchError(f"graph has no color {color!r}", color=color)
        if count < 0:
            raise InvalidInstanceError(f"multiplicity of {color!r} is negative", color=color)
    coloring = vertex_color(g)
    palette = sorted(set(coloring.values()))
    wanted = {c: int(motif.get(c, 0)) for c in palette}
    classes = {c: f"X{i + 1}" for i, c in enumerate(palette)}

    split = " ".join(
        f"(or (and (in x {name}) (in x X) (color {c} x))"
        f" (and (not (in x {name})) (or (not (in x X)) (not (color {c} x)))))"
        for c, name in classes.items()
    )
    counts = " ".join(exactly(size(name), wanted[c]) for c, name in classes.items())
    body = f"(and {connected('X')} (forall x (and {split})) {counts})"
    for name in reversed(classes.values()):
        body = f"(exists-set {name} {body})"
    query = compile_query(["X"], body)

    def decode(witness: Witness, slack: Fraction) -> dict:
        chosen = sorted(witness.get("X", frozenset()))
        found = Counter(coloring[v] for v in chosen)
        return {"vertices": chosen, "colors": {c: found.get(c, 0) for c in palette}}

    return EncodedInstance(
        problem="graph-motif",
        graph=g,
        expression=expression,
        query=query,
        decoder=decode,
        note=(
            "conservative: a connected set matching M exactly, or none exists; "
            "eager: a connected set whose color counts lie within [M(c)/(1+eps), (1+eps)M(c)]"
        ),
        parameters={"motif": wanted},
    )
