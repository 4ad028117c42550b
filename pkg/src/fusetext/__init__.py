"""fusetext: multi-level transformer fusion classifier for short abusive texts.

Library layers, bottom up: a minimal autodiff tensor core, the text
preprocessing pipeline, auxiliary feature extraction (sentiment lexicon,
Gibbs-sampled topic model, mean word vectors), a small transformer encoder
with dual attention pooling and a gated two-task head, plus training,
evaluation, and a command-line interface.
"""

__version__ = "0.1.0"

from .autodiff import GradReport, Tensor, backward, grad_check, parameter, tensor

__all__ = [
    "GradReport",
    "Tensor",
    "backward",
    "grad_check",
    "parameter",
    "tensor",
    "__version__",
]
