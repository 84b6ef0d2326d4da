"""Dataclass configs for the alignment pipeline and the losses."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from .errors import InvalidParameter

PAD_REPEAT_LAST = "pad_repeat_last"
TRUNCATE = "truncate"
PRE_ENCODER = "pre_encoder"
POST_ENCODER = "post_encoder"

_PAD_POLICIES = (PAD_REPEAT_LAST, TRUNCATE)
_PLACEMENTS = (PRE_ENCODER, POST_ENCODER)
_LOSS_NORMALIZATIONS = ("raw", "per_frame")


@dataclass(frozen=True)
class AASConfig:
    """Knobs of the automatic alignment search pipeline.

    ``alpha`` (objective weight on the two alignment losses) and ``k``
    (source reduction factor) default to the reference operating point;
    ``omega`` scales the diagonal beta-binomial prior and has no
    canonical value, so it is fully configurable.
    """

    omega: float = 1.0
    use_prior: bool = True
    viterbi_on_linear: bool = False
    alpha: float = 2.0
    k: int = 4
    pad_policy: str = PAD_REPEAT_LAST
    loss_normalization: str = "raw"

    def __post_init__(self) -> None:
        if not self.omega > 0:
            raise InvalidParameter(f"omega must be > 0, got {self.omega}")
        if self.alpha < 0:
            raise InvalidParameter(f"alpha must be >= 0, got {self.alpha}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameter(f"k must be a positive integer, got {self.k}")
        if self.pad_policy not in _PAD_POLICIES:
            raise InvalidParameter(f"pad_policy must be one of {_PAD_POLICIES}")
        if self.loss_normalization not in _LOSS_NORMALIZATIONS:
            raise InvalidParameter(
                f"loss_normalization must be one of {_LOSS_NORMALIZATIONS}"
            )

    @classmethod
    def from_mapping(cls, mapping: dict) -> "AASConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(mapping) - known
        if unknown:
            raise InvalidParameter(f"unknown config keys: {sorted(unknown)}")
        return cls(**mapping)

    @classmethod
    def from_json_file(cls, path) -> "AASConfig":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        if not isinstance(payload, dict):
            raise InvalidParameter("config file must contain a JSON object")
        return cls.from_mapping(payload)


@dataclass(frozen=True)
class ObjectiveWeights:
    """Weight applied to the forward-sum and KL alignment losses."""

    alpha: float = 2.0

    def __post_init__(self) -> None:
        if self.alpha < 0:
            raise InvalidParameter(f"alpha must be >= 0, got {self.alpha}")


@dataclass(frozen=True)
class ReductionConfig:
    """Source-length reduction by stacking ``k`` adjacent frames.

    ``placement`` is pipeline metadata only (the tensor operation is the
    same before or after an encoder); it is carried through so reports
    can distinguish the two configurations.
    """

    k: int = 4
    pad_policy: str = PAD_REPEAT_LAST
    placement: str = POST_ENCODER

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise InvalidParameter(f"k must be a positive integer, got {self.k}")
        if self.pad_policy not in _PAD_POLICIES:
            raise InvalidParameter(f"pad_policy must be one of {_PAD_POLICIES}")
        if self.placement not in _PLACEMENTS:
            raise InvalidParameter(f"placement must be one of {_PLACEMENTS}")
