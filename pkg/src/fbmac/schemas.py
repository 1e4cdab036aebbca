"""Input file schemas for the command-line tools."""

from __future__ import annotations

import math
from typing import Any, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .discrete import AuxKernels, ChannelSpec
from .gaussian import SchemeParams
from .geometry import SweepConfig
from .info import FactorKernel



def _numeric_table(v):
    try:
        a = np.asarray(v, dtype=float)
    except (TypeError, ValueError):
        raise ValueError("table must be a rectangular nested array of numbers") from None
    if a.ndim == 0 or not np.isfinite(a).all():
        raise ValueError("table must be a finite nested array")
    return v


class GaussParamsFile(BaseModel):
    """Scheme parameters; ``null`` private variances mean no private feedback."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    P: float
    sigma2: float
    alpha: float
    beta: float
    theta: float
    lam: float = Field(alias="lambda")
    sigma12_sq: float
    sigma1_sq: Optional[float] = None
    sigma2_sq: Optional[float] = None
    Rfb: Optional[float] = None

    def to_params(self) -> SchemeParams:
        def inf(x):
            return math.inf if x is None else x

        return SchemeParams(self.P, self.sigma2, self.alpha, self.beta, self.theta, self.lam,
                            self.sigma12_sq, inf(self.sigma1_sq), inf(self.sigma2_sq),
                            inf(self.Rfb))


class KernelEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    outputs: List[str]
    parents: List[str] = []
    table: Any

    _table = field_validator("table")(_numeric_table)

    def to_kernel(self) -> FactorKernel:
        table = np.asarray(self.table, dtype=float)
        return FactorKernel(tuple(self.outputs), tuple(self.parents), table)


class ChannelFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    outputs: List[str] = ["Y"]
    parents: List[str] = ["X1", "X2"]
    table: Any

    _table = field_validator("table")(_numeric_table)

    @field_validator("outputs")
    @classmethod
    def _y(cls, v):
        if v != ["Y"]:
            raise ValueError('channel outputs must be ["Y"]')
        return v

    @field_validator("parents")
    @classmethod
    def _x(cls, v):
        if sorted(v) != ["X1", "X2"]:
            raise ValueError('channel parents must be X1 and X2')
        return v

    def to_channel(self) -> ChannelSpec:
        k = KernelEntry(outputs=self.outputs, parents=self.parents, table=self.table).to_kernel()
        if k.parents != ("X1", "X2"):
            k = FactorKernel(("Y",), ("X1", "X2"), np.transpose(k.table, (1, 0, 2)))
        return ChannelSpec(k)


class KernelsFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kernels: List[KernelEntry]
    probes: List[List[float]] = []
    Rfb: Optional[float] = None

    @field_validator("probes")
    @classmethod
    def _pairs(cls, v):
        for p in v:
            if len(p) != 2 or min(p) < 0:
                raise ValueError("each probe must be a nonnegative [R1, R2] pair")
        return v

    def to_aux(self) -> AuxKernels:
        return AuxKernels.from_kernels([k.to_kernel() for k in self.kernels])


class SweepFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    alphas: Optional[List[float]] = None
    betas: Optional[List[float]] = None
    thetas: Optional[List[float]] = None
    lam_fracs: Optional[List[float]] = None
    sigma12_sqs: Optional[List[float]] = None
    sigma1_sqs: Optional[List[Optional[float]]] = None
    sigma2_sqs: Optional[List[Optional[float]]] = None
    refine_iters: Optional[int] = None
    restarts: Optional[int] = None
    seed: Optional[int] = None

    def to_config(self, seed: int | None = None) -> SweepConfig:
        kw = {}
        for name, v in self.model_dump(exclude_none=True).items():
            if isinstance(v, list):
                v = tuple(math.inf if x is None else float(x) for x in v)
            kw[name] = v
        if seed is not None:
            kw["seed"] = seed
        return SweepConfig(**kw)


class ScanFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    snr: List[float]
    Rfb: List[float]
    sigma2: float = 1.0
