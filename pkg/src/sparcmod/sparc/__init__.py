"""Numerical core: code parameters, design operators, encoder, AMP and state evolution."""

from sparcmod.sparc.amp import DecodeReport, DecoderConfig, StopStatistic, decode
from sparcmod.sparc.base_matrix import BaseKind, BaseMatrix, build_flat, build_pa_exp, build_sc
from sparcmod.sparc.channel import add_awgn
from sparcmod.sparc.design import DesignOperator, OperatorKind, build_operator
from sparcmod.sparc.encoder import BitPayload, MessageVector, bits_to_message, encode, message_to_bits
from sparcmod.sparc.metrics import FrameResult, ValueErrorConvention, evaluate_frame
from sparcmod.sparc.params import SparcParams, derive_code_length, ebn0_to_sigma2
from sparcmod.sparc.state_evolution import MCConfig, run_se

__all__ = [
    "DecodeReport",
    "DecoderConfig",
    "StopStatistic",
    "decode",
    "BaseKind",
    "BaseMatrix",
    "build_flat",
    "build_pa_exp",
    "build_sc",
    "add_awgn",
    "DesignOperator",
    "OperatorKind",
    "build_operator",
    "BitPayload",
    "MessageVector",
    "bits_to_message",
    "encode",
    "message_to_bits",
    "FrameResult",
    "ValueErrorConvention",
    "evaluate_frame",
    "SparcParams",
    "derive_code_length",
    "ebn0_to_sigma2",
    "MCConfig",
    "run_se",
]
