"""Quantum private information retrieval from MDS- and LRC-coded storage."""
from .codes import LinearCode, LrcProfile, dual, grs_generator, lrc_generator, rs_4_2_self_dual, spc_3_2
from .finite_field import FieldElement, FieldSpec, field
from .lrc_protocol import LrcConfig, LrcRetrievalPlan, lrc_rate, plan_lrc_retrieval, run_lrc_retrieval
from .protocol import DssConfig, ResourceReport, RetrievalTranscript, prepare_entanglement, rate, run_retrieval
from .quantum import WeylLabel, make_register

__version__ = "0.1.0"

__all__ = [
    "DssConfig",
    "FieldElement",
    "FieldSpec",
    "LinearCode",
    "LrcConfig",
    "LrcProfile",
    "LrcRetrievalPlan",
    "ResourceReport",
    "RetrievalTranscript",
    "WeylLabel",
    "dual",
    "field",
    "grs_generator",
    "lrc_generator",
    "lrc_rate",
    "make_register",
    "plan_lrc_retrieval",
    "prepare_entanglement",
    "rate",
    "rs_4_2_self_dual",
    "run_lrc_retrieval",
    "run_retrieval",
    "spc_3_2",
]
