"""Executable joint source-channel coding schemes and their evaluators."""

from .base import BlockLaw, EvalReport, KappaError, NonEnumerableError, Scheme
from .concat import ConcatScheme, concatenate
from .evaluate import converse_audit, evaluate_exact, evaluate_mc
from .kernel import KernelScheme, random_kernel_scheme, uncoded_scheme, zero_rate_realism_scheme
from .pipeline import SeparatedPipeline, separated_pipeline
from .sfrl import (
    SharedStream,
    SfrlScheme,
    StreamExhausted,
    conditional_law_pvalue,
    cr_synthesis_scheme,
    elias_gamma_length,
    plugin_entropy,
    sfrl_bound,
    sfrl_decode_batch,
    sfrl_encode,
    sfrl_encode_batch,
)
from .sourcecode import (
    BitPipeScheme,
    SourceCode,
    dithered_quantizer_code,
    huffman_lengths,
    quantize_restore_scheme,
    quantizer_code,
)
