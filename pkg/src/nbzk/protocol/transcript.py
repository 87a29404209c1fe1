"""Session transcripts and their JSON-lines form.

One header line, one line per frame, one end line::

    {"type": "header", "protocol": "zk", "config": {...}, "config_hash": "...",
     "seed": 7, "session": 0, "x": "<hex>", "simulated": false, "meta": {...}}
    {"type": "frame", "step": "2a", "role": "V", "raw_len": 812, "abort": false, "payload": "<hex>"}
    {"type": "end", "status": "accept", "abort_step": null, "abort_role": null, "cause": null}

Payloads are stored after length normalization; ``raw_len`` keeps the length
actually sent. An abort frame has an empty payload and ``abort: true``.
The ``status`` field is authoritative for the session outcome.
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional

from ..npstmt import ColoringInstance

ACCEPT, REJECT, ABORT, FAIL = "accept", "reject", "abort", "fail"


@dataclass(frozen=True)
class Frame:
    step: str
    role: str
    payload: bytes
    raw_len: int
    abort: bool = False

    def to_json(self) -> dict:
        return {"type": "frame", "step": self.step, "role": self.role, "raw_len": self.raw_len,
                "abort": self.abort, "payload": self.payload.hex()}

    @classmethod
    def from_json(cls, d: dict) -> "Frame":
        return cls(d["step"], d["role"], bytes.fromhex(d["payload"]), d["raw_len"], d["abort"])


@dataclass
class Transcript:
    protocol: str
    config: dict
    config_hash: str
    seed: object
    x: Optional[ColoringInstance] = None
    frames: List[Frame] = field(default_factory=list)
    status: str = FAIL
    abort_step: Optional[str] = None
    abort_role: Optional[str] = None
    cause: Optional[str] = None
    session: int = 0
    simulated: bool = False
    meta: dict = field(default_factory=dict)

    def payload(self, step: str) -> Optional[bytes]:
        for f in self.frames:
            if f.step == step and not f.abort:
                return f.payload
        return None

    def steps(self):
        return [f.step for f in self.frames]

    @property
    def accepted(self) -> bool:
        return self.status == ACCEPT

    def finish(self, status, abort_step=None, abort_role=None, cause=None) -> "Transcript":
        self.status, self.abort_step, self.abort_role, self.cause = status, abort_step, abort_role, cause
        return self

    def lines(self) -> List[str]:
        head = {"type": "header", "protocol": self.protocol, "config": self.config,
                "config_hash": self.config_hash, "seed": self.seed, "session": self.session,
                "x": self.x.to_bytes().hex() if self.x is not None else None,
                "simulated": self.simulated, "meta": self.meta}
        end = {"type": "end", "status": self.status, "abort_step": self.abort_step,
               "abort_role": self.abort_role, "cause": self.cause}
        return [json.dumps(d, sort_keys=True) for d in [head] + [f.to_json() for f in self.frames] + [end]]

    def to_jsonl(self) -> str:
        return "\n".join(self.lines()) + "\n"

    @classmethod
    def from_lines(cls, lines) -> "Transcript":
        recs = [json.loads(ln) for ln in lines if ln.strip()]
        if not recs or recs[0].get("type") != "header" or recs[-1].get("type") != "end":
            raise ValueError("transcript needs a header line and an end line")
        h, e = recs[0], recs[-1]
        x = ColoringInstance.from_bytes(bytes.fromhex(h["x"])) if h.get("x") else None
        t = cls(h["protocol"], h["config"], h["config_hash"], h["seed"], x,
                [Frame.from_json(r) for r in recs[1:-1]], session=h.get("session", 0),
                simulated=h.get("simulated", False), meta=h.get("meta", {}))
        return t.finish(e["status"], e["abort_step"], e["abort_role"], e["cause"])


def write_transcripts(path, transcripts) -> None:
    with open(path, "w") as fh:
        for t in transcripts:
            fh.write(t.to_jsonl())


def read_transcripts(path) -> List[Transcript]:
    out, cur = [], []
    with open(path) as fh:
        for ln in fh:
            if not ln.strip():
                continue
            cur.append(ln)
            if json.loads(ln).get("type") == "end":
                out.append(Transcript.from_lines(cur))
                cur = []
    if cur:
        raise ValueError("truncated transcript file")
    return out
