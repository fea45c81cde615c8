"""Data linkage dynamics with shedding."""

from .dla import (
    PSO,
    SSO,
    DataLinkage,
    FieldLink,
    LinkageError,
    PartialFieldLink,
    SpotLink,
    Universe,
    ValueAssoc,
    Variant,
    normalize,
    parse_term,
)
from .dld import effect, fgc, fresh, parse_action
from .services import dlds, dldsm, dldss, run, use_step
from .shedding import shok_member, shok_prime
from .threads import ThreadGraph, build, parse_thread

__version__ = "0.1.0"
