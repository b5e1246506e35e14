"""Non-signalling and quantum key distribution analyses."""

import json as _json

from ._nlst import *  # noqa: F401,F403
from ._nlst import NlstError, simulate as _simulate


def simulate(n=10000, rho=0.0, seed=0, adversary="ns"):
    """Protocol run on the Ekert-type source; the report as a dict."""
    return _json.loads(_simulate(n, rho, seed, adversary))


__all__ = [name for name in dir() if not name.startswith("_")]
