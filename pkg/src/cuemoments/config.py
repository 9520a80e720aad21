"""Default resource limits and their environment overrides.

Every limit can be overridden from the environment with the ``CUEMOM_``
prefix (``CUEMOM_K_MAX=25``); command line flags override both.
"""

from __future__ import annotations

import dataclasses
import os
from typing import Mapping

ENV_PREFIX = "CUEMOM_"

K_MAX = 20
K_COMB_MAX = 10
HUGHES_K_MAX = 6
AK_DIGITS = 50
SHIFT_DIGITS = 60
PRIME_CAP = 10**8
TRIAL_BOUND = 10**6
MC_CHAINS = 256
MC_BURN_IN = 1000
JOBS = 1


@dataclasses.dataclass(frozen=True)
class Limits:
    k_max: int = K_MAX
    k_comb_max: int = K_COMB_MAX
    hughes_k_max: int = HUGHES_K_MAX
    ak_digits: int = AK_DIGITS
    shift_digits: int = SHIFT_DIGITS
    prime_cap: int = PRIME_CAP
    trial_bound: int = TRIAL_BOUND
    mc_chains: int = MC_CHAINS
    mc_burn_in: int = MC_BURN_IN
    jobs: int = JOBS

    @classmethod
    def from_env(cls, environ: Mapping[str, str] | None = None) -> "Limits":
        environ = os.environ if environ is None else environ
        values = {}
        for field in dataclasses.fields(cls):
            raw = environ.get(ENV_PREFIX + field.name.upper())
            if raw is not None:
                values[field.name] = int(float(raw)) if "e" in raw.lower() else int(raw)
        return cls(**values)
