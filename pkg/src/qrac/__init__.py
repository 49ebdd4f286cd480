"""Quantum random access codings: construction, evaluation, geometry and search."""

from .cloning import buzek_hillery_clone, example3_effective_povms, example3_scheme
from .core import (
    BinaryPovm,
    BlochVector,
    DensityMatrix,
    PureState,
    bloch_to_density,
    density_to_bloch,
    gell_mann_basis,
    measure_prob,
    partial_trace,
    povm_canonical_form,
    tensor,
)
from .geometry import Halfspace, bloch_radius, max_regions, no_go_certificate, povm_to_halfspace, realized_patterns
from .optimizer import SeeSawConfig, ascent_trace_check, optimal_povm_for_bit, optimal_state_for_bits, see_saw
from .schemefile import load_scheme, save_scheme
from .schemes import (
    EvaluationReport,
    QracScheme,
    encode_ambainis2,
    encode_chuang3,
    encode_hinry7,
    evaluate_scheme,
    nayak_bound,
    standard_scheme,
)

__version__ = "0.1.0"
