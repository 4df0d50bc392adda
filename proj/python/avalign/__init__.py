"""Audiovisual alignment tensor scoring.

Thin wrapper around the C++ extension module; see the project README for the
file formats and the `avalign` CLI.
"""

from ._avalign import (
    AlignmentTensor,
    DataError,
    alignment_score_object,
    alignment_score_word,
    build_alignment_tensor,
    decode_mask_rle,
    encode_mask_rle,
    glancing_score_object,
    glancing_score_word,
    normalize_per_frame,
    normalize_per_pixel,
    random_baseline_tensor,
    read_avt,
    recall_at_k,
    score_pair,
    score_pair_coarse,
    softmax_space,
    softmax_time,
    span_to_frames,
    upsample,
    write_avt,
)

__all__ = [
    "AlignmentTensor",
    "DataError",
    "alignment_score_object",
    "alignment_score_word",
    "build_alignment_tensor",
    "decode_mask_rle",
    "encode_mask_rle",
    "glancing_score_object",
    "glancing_score_word",
    "normalize_per_frame",
    "normalize_per_pixel",
    "random_baseline_tensor",
    "read_avt",
    "recall_at_k",
    "score_pair",
    "score_pair_coarse",
    "softmax_space",
    "softmax_time",
    "span_to_frames",
    "upsample",
    "write_avt",
]
