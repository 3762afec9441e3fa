"""Minimal neural core: dense + LSTM blocks, softmax cross-entropy, Adam,
and finite-difference gradient checking. Hot elementwise kernels come from
the compiled extension when built, with a numpy fallback."""

from .backend import available_backends, backend_name, load_kernels
from .gradcheck import GradCheckReport, gradient_check
from .layers import Dense, LstmLayer, LstmStack
from .losses import batch_softmax_xent, softmax, softmax_xent
from .optim import Adam

__all__ = [
    "Adam",
    "Dense",
    "GradCheckReport",
    "LstmLayer",
    "LstmStack",
    "available_backends",
    "backend_name",
    "batch_softmax_xent",
    "gradient_check",
    "load_kernels",
    "softmax",
    "softmax_xent",
]
