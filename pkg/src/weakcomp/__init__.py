"""Exact arithmetic for weakly computable reals and continuous functions on [0, 1]."""

from .core import IndexedSequence, Name, constant_name, dotminus, perturbed_name, prefix
from .functions import (
    FunctionClass,
    Mode,
    PolygonSequence,
    StreamTransformer,
    classify_constant,
    lsc_to_machine,
    machine_to_lsc,
    machine_to_lsc_sequence,
    machine_to_uwc_polyseq,
    max_of_lsc,
    usc_to_machine,
    uwc_polyseq_to_machine,
    wc_from_difference,
    wc_machine_to_difference,
)
from .polygons import Polygon, pointwise_max, pointwise_min, sup_distance
from .sequences import (
    CertifiedSequence,
    Decreasing,
    Effective,
    HBounded,
    Increasing,
    Plain,
    WeaklyEffective,
    audit,
    certified_add,
    certified_mul,
    divergence_count,
    monotone_envelope,
    tail_drop,
    variation_prefix,
    variation_split,
)

__version__ = "0.1.0"
