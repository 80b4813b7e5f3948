"""Problem encoders: combinatorial problems compiled to boxed queries."""

from boxmso.encoders.base import EncodedInstance
from boxmso.encoders.capacitated import encode_cds, encode_cvc
from boxmso.encoders.deletion import encode_bdvd
from boxmso.encoders.formats import LOADERS, load_instance
from boxmso.encoders.motif import encode_graph_motif
from boxmso.encoders.numbers import encode_knapsack, encode_md_subset_sum, encode_subset_sum
from boxmso.encoders.partitions import (
    encode_equitable_coloring,
    encode_equitable_connected_partition,
    encode_equitable_connected_partition_edges,
)

__all__ = [
    "EncodedInstance",
    "LOADERS",
    "load_instance",
    "encode_subset_sum",
    "encode_knapsack",
    "encode_md_subset_sum",
    "encode_equitable_coloring",
    "encode_equitable_connected_partition",
    "encode_equitable_connected_partition_edges",
    "encode_bdvd",
    "encode_cds",
    "encode_cvc",
    "encode_graph_motif",
]
