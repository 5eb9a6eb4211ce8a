"""Scenario files: YAML on disk, validated by pydantic before anything runs."""

from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
import yaml

from .behavior import Behavior

PROVIDER = "P"
CUSTOMER = "C"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PathConfig(_Strict):
    fees: list[int] = Field(min_length=0, description="relay fee per hop, in hop order")
    relayers: list[str] | None = Field(None, description="relayer names; default R<k>.<i>")
    job: list[int] | None = Field(None, description="1-based chunk ids carried by this path")

    @field_validator("fees")
    @classmethod
    def _positive(cls, fees):
        if any(f <= 0 for f in fees):
            raise ValueError("relay fees must be positive")
        return fees

    @model_validator(mode="after")
    def _names_align(self):
        if self.relayers is not None and len(self.relayers) != len(self.fees):
            raise ValueError("one relayer name per fee")
        return self


class ContentConfig(_Strict):
    chunk_size: int = Field(65536, gt=0)
    chunk_count: int = Field(8, gt=0)
    length: int | None = Field(None, description="content bytes; the last chunk is zero-padded")

    @model_validator(mode="after")
    def _fits(self):
        if self.length is not None and not (
            (self.chunk_count - 1) * self.chunk_size < self.length <= self.chunk_count * self.chunk_size
        ):
            raise ValueError("length must fill exactly chunk_count chunks")
        return self

    @property
    def total(self) -> int:
        return self.length if self.length is not None else self.chunk_size * self.chunk_count


class JudgeConfig(_Strict):
    b_max: int = Field(gt=0)
    slashing: bool = False
    slash_fraction: float = Field(0.5, ge=0, le=1)


class FundingConfig(_Strict):
    channel: int | None = Field(None, description="payer-side balance of every channel; default 2*b_max")
    deposit: int | None = Field(None, description="on-chain balance of every party; default 2*b_max")


class TimingConfig(_Strict):
    delivery_deadline: int | None = Field(None, description="T_1; default 5 + longest path")


class Expectation(_Strict):
    outcome: str | None = None
    judge_ops: dict[str, int] | None = Field(None, description="exact per-operation judge counts")
    protected: list[str] = Field(default_factory=list, description="relayers that must end protected")


class ScenarioConfig(_Strict):
    name: str
    description: str = ""
    seed: int = 0
    mode: Literal["multi", "single"] = "multi"
    price: int = Field(gt=0)
    content: ContentConfig = Field(default_factory=ContentConfig)
    paths: list[PathConfig] = Field(min_length=1)
    judge: JudgeConfig
    funding: FundingConfig = Field(default_factory=FundingConfig)
    timing: TimingConfig = Field(default_factory=TimingConfig)
    adversary: dict[str, str] = Field(default_factory=dict, description="party name -> behavior")
    expect: Expectation = Field(default_factory=Expectation)

    @model_validator(mode="after")
    def _consistent(self):
        if self.mode == "single" and len(self.paths) != 1:
            raise ValueError("single mode takes exactly one path")
        if self.mode == "single" and not self.paths[0].fees:
            raise ValueError("single mode needs at least one relayer")
        names = self.relayer_names()
        flat = [r for p in names for r in p]
        if len(set(flat)) != len(flat) or {PROVIDER, CUSTOMER} & set(flat):
            raise ValueError("relayer names must be unique and distinct from P and C")
        jobs = self.jobs()
        ids = sorted(j for job in jobs for j in job)
        if ids != list(range(1, self.content.chunk_count + 1)):
            raise ValueError("jobs must partition chunk ids 1..chunk_count")
        if any(not job for job in jobs):
            raise ValueError("every path needs a non-empty job")
        fees = sum(f for p in self.paths for f in p.fees)
        if not (self.judge.b_max > self.price and self.judge.b_max > fees):
            raise ValueError("b_max must exceed the price and the total relay fees")
        if self.price < fees:
            raise ValueError("price must cover the relay fees")
        known = {PROVIDER, CUSTOMER, *flat}
        longest = max(len(p.fees) for p in self.paths)
        if self.timing.delivery_deadline is not None and self.timing.delivery_deadline < 5 + longest:
            raise ValueError("delivery deadline earlier than the longest path can deliver")
        for party, text in self.adversary.items():
            if party not in known:
                raise ValueError(f"adversary names unknown party {party!r}")
            b = Behavior.parse(text)
            if b.partner is not None and b.partner not in known:
                raise ValueError(f"unknown wormhole partner {b.partner!r}")
        return self

    def relayer_names(self) -> list[list[str]]:
        return [p.relayers or [f"R{k}.{i}" for i in range(1, len(p.fees) + 1)] for k, p in enumerate(self.paths, 1)]

    def jobs(self) -> list[list[int]]:
        """Explicit jobs, or contiguous blocks split as evenly as possible."""
        if all(p.job is not None for p in self.paths):
            return [list(p.job) for p in self.paths]
        if any(p.job is not None for p in self.paths):
            raise ValueError("give a job for every path or for none")
        n, k = self.content.chunk_count, len(self.paths)
        out, start = [], 1
        for i in range(k):
            size = n // k + (1 if i < n % k else 0)
            out.append(list(range(start, start + size)))
            start += size
        return out

    def behaviors(self) -> dict[str, Behavior]:
        return {u: Behavior.parse(t) for u, t in self.adversary.items()}

    def with_adversary(self, adversary: dict[str, str], name: str | None = None) -> "ScenarioConfig":
        data = self.model_dump()
        data["adversary"] = adversary
        data["expect"] = {}
        if name:
            data["name"] = name
        return ScenarioConfig.model_validate(data)


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path) as fh:
        return ScenarioConfig.model_validate(yaml.safe_load(fh))


def dump_config(config: ScenarioConfig) -> str:
    return yaml.safe_dump(config.model_dump(exclude_none=True), sort_keys=False)


def config_schema() -> dict:
    return ScenarioConfig.model_json_schema()
