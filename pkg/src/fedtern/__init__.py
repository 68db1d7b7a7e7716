"""Threshold additive ElGamal aggregation of ternary-quantized gradients.

Core layers, bottom up:

* :mod:`fedtern.group`    group parameters and modular arithmetic;
* :mod:`fedtern.sharing`  committed polynomial secret sharing;
* :mod:`fedtern.fkg`      dealer-free federated key generation;
* :mod:`fedtern.ahe`      additive ElGamal, threshold decryption, recovery;
* :mod:`fedtern.codec`    fixed-point encoding into Z_q;
* :mod:`fedtern.quant`    ternary gradient quantization;
* :mod:`fedtern.flsim`    deterministic federated learning simulator;
* :mod:`fedtern.cli`      command-line front end.
"""

from . import ahe, codec, errors, fkg, group, quant, sharing, wire
from .group import GroupParams, generate_params, preset_params, toy_params

__version__ = "0.1.0"

__all__ = [
    "ahe", "codec", "errors", "fkg", "group", "quant", "sharing", "wire",
    "GroupParams", "generate_params", "preset_params", "toy_params",
    "__version__",
]
