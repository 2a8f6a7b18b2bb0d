"""Wire-protocol models. Field names are part of the protocol; do not rename."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

# client -> server


class CommandMsg(BaseModel):
    type: Literal["command"]
    v: list[float]


class StartMsg(BaseModel):
    type: Literal["start"]
    task_hint: Optional[str] = None


class EndMsg(BaseModel):
    type: Literal["end"]


class SetMethodMsg(BaseModel):
    type: Literal["set_method"]
    name: Literal["ours", "bayes", "noassist"]


# server -> client


class FrameMsg(BaseModel):
    type: Literal["frame"] = "frame"
    tick: int
    state: list[float]
    a_h: list[float]
    a_r: list[float]
    beta: float
    bundle: int


class PropModel(BaseModel):
    name: str
    kind: str
    points: list[list[float]]
    radius: float


class SceneMsg(BaseModel):
    type: Literal["scene"] = "scene"
    workspace: dict
    props: list[PropModel]
    start: list[float]
    dt: float
    beta_max: float


class StatusMsg(BaseModel):
    type: Literal["status"] = "status"
    mode: str
    bundle: int
    dataset_size: int
    method: str
    detail: Optional[str] = None


# REST


class HealthResponse(BaseModel):
    status: str = "ok"


class ServerState(BaseModel):
    mode: str
    bundle_version: int
    dataset_size: int
    sessions: int
    retrain_cadence: int


class RetrainResponse(BaseModel):
    ok: bool
    bundle_version: int
    detail: Optional[str] = None


def parse_client_message(data: dict):
    kind = data.get("type")
    if kind == "command":
        return CommandMsg.model_validate(data)
    if kind == "start":
        return StartMsg.model_validate(data)
    if kind == "end":
        return EndMsg.model_validate(data)
    if kind == "set_method":
        return SetMethodMsg.model_validate(data)
    raise ValueError(f"unknown message type {kind!r}")
