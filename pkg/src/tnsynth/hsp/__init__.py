"""Hidden-subgroup algorithms on a two-register dense simulator."""

from tnsynth.hsp.circuit import HSPInstance, OracleTable, apply_oracle, build_oracle, measure_output, prepare_registers, qft
from tnsynth.hsp.numtheory import convergents, extract_period, factors_from_period, mod_exp
from tnsynth.hsp.shor import FactoringTranscript, shor_factor
from tnsynth.hsp.template import TemplateTranscript, run_template

__all__ = [
    "HSPInstance",
    "OracleTable",
    "apply_oracle",
    "build_oracle",
    "measure_output",
    "prepare_registers",
    "qft",
    "convergents",
    "extract_period",
    "factors_from_period",
    "mod_exp",
    "FactoringTranscript",
    "shor_factor",
    "TemplateTranscript",
    "run_template",
]
