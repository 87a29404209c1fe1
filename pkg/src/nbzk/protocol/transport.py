"""Framed duplex channels and the generic two-party session driver.

Wire frame: ``u32 BE payload length || step byte || role byte || payload``.
An abort frame sets the high bit of the role byte and carries no payload; it
is tagged with the step at which the aborting party would next have spoken.
"""

import queue
import socket
import struct
import threading
from typing import Dict, List, Sequence, Tuple

from .config import normalize_message
from .transcript import Frame

ABORT_BIT = 0x80
TIMEOUT = 120.0


class PartyAbort(Exception):
    """Raised by a party's send() to end the session at that step."""


class TransportError(RuntimeError):
    pass


def _record_sent(party, step, norm):
    # the sender's view of its own message is what the peer received
    hook = getattr(party, "sent", None)
    if hook is not None:
        hook(step, norm)


def encode_frame(step_byte: int, role_byte: int, payload: bytes) -> bytes:
    return struct.pack(">IBB", len(payload), step_byte, role_byte) + payload


class Channel:
    def send(self, data: bytes) -> None:
        raise NotImplementedError

    def recv(self) -> Tuple[int, int, bytes]:
        raise NotImplementedError

    def close(self) -> None:
        pass


class QueueChannel(Channel):
    """One end of an in-process duplex queue; frames still go through the byte format."""

    def __init__(self, inbox: queue.Queue, outbox: queue.Queue, timeout: float = TIMEOUT):
        self.inbox, self.outbox, self.timeout = inbox, outbox, timeout

    @classmethod
    def pair(cls):
        a, b = queue.Queue(), queue.Queue()
        return cls(a, b), cls(b, a)

    def send(self, data: bytes) -> None:
        self.outbox.put(data)

    def recv(self):
        try:
            data = self.inbox.get(timeout=self.timeout)
        except queue.Empty as exc:
            raise TransportError("receive timed out") from exc
        n, step, role = struct.unpack_from(">IBB", data)
        return step, role, data[6:6 + n]


class SocketChannel(Channel):
    """TCP binding with the same frame format."""

    def __init__(self, sock: socket.socket, timeout: float = TIMEOUT):
        self.sock = sock
        sock.settimeout(timeout)

    @classmethod
    def pair(cls):
        srv = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        srv.bind(("127.0.0.1", 0))
        srv.listen(1)
        cli = socket.create_connection(srv.getsockname())
        conn, _ = srv.accept()
        srv.close()
        return cls(conn), cls(cli)

    def send(self, data: bytes) -> None:
        try:
            self.sock.sendall(data)
        except OSError as exc:
            raise TransportError(str(exc)) from exc

    def _read(self, n: int) -> bytes:
        buf = bytearray()
        while len(buf) < n:
            try:
                chunk = self.sock.recv(min(1 << 20, n - len(buf)))
            except OSError as exc:
                raise TransportError(str(exc)) from exc
            if not chunk:
                raise TransportError("connection closed")
            buf += chunk
        return bytes(buf)

    def recv(self):
        n, step, role = struct.unpack(">IBB", self._read(6))
        return step, role, self._read(n)

    def close(self) -> None:
        try:
            self.sock.close()
        except OSError:
            pass


def channel_pair(transport: str):
    if transport in ("queue", "inproc"):
        return QueueChannel.pair()
    if transport in ("tcp", "socket"):
        return SocketChannel.pair()
    raise ValueError("unknown transport %r" % transport)


def run_role(party, role: str, channel: Channel, schedule: Sequence[Tuple[str, str]],
             lengths: Dict[str, int], step_byte: Dict[str, int], role_byte: Dict[str, int]) -> List[Frame]:
    """Drive one party through the schedule; returns the frames it saw, in order."""
    step_of = {v: k for k, v in step_byte.items()}
    role_of = {v: k for k, v in role_byte.items()}
    log: List[Frame] = []
    pending = None
    for step, sender in schedule:
        if sender == role:
            try:
                if pending is not None:
                    raise PartyAbort(pending)
                payload = bytes(party.send(step))
            except PartyAbort:
                channel.send(encode_frame(step_byte[step], role_byte[role] | ABORT_BIT, b""))
                log.append(Frame(step, role, b"", 0, True))
                return log
            channel.send(encode_frame(step_byte[step], role_byte[role], payload))
            norm = normalize_message(payload, lengths[step])
            _record_sent(party, step, norm)
            log.append(Frame(step, role, norm, len(payload)))
        else:
            sb, rb, payload = channel.recv()
            got_step, got_role = step_of.get(sb), role_of.get(rb & ~ABORT_BIT)
            if rb & ABORT_BIT:
                log.append(Frame(got_step, got_role, b"", 0, True))
                return log
            if got_step != step or got_role != sender:
                raise TransportError("out-of-order frame: got %s/%s, expected %s/%s"
                                     % (got_step, got_role, step, sender))
            norm = normalize_message(payload, lengths[step])
            log.append(Frame(step, sender, norm, len(payload)))
            if pending is None:
                try:
                    party.receive(step, norm)
                except Exception as exc:  # the party ends communication at its next turn
                    pending = "%s while processing %s" % (type(exc).__name__, step)
    return log


def run_two_party(parties: Dict[str, object], schedule, lengths, step_byte, role_byte,
                  transport: str = "queue"):
    """Run both roles in threads; returns (frames, error) with the longest frame log."""
    roles = list(parties)
    chans = channel_pair(transport)
    logs, errors = {}, {}

    def work(role, ch):
        try:
            logs[role] = run_role(parties[role], role, ch, schedule, lengths, step_byte, role_byte)
        except Exception as exc:
            errors[role] = "%s: %s" % (type(exc).__name__, exc)
            ch.close()

    threads = [threading.Thread(target=work, args=(r, c), daemon=True) for r, c in zip(roles, chans)]
    for th in threads:
        th.start()
    for th in threads:
        th.join()
    for ch in chans:
        ch.close()
    frames = max(logs.values(), key=len) if logs else []
    err = "; ".join("%s: %s" % kv for kv in sorted(errors.items())) or None
    return frames, err


def run_direct(parties: Dict[str, object], schedule, lengths) -> List[Frame]:
    """Single-threaded alternation with the same semantics, used by Monte Carlo loops."""
    log: List[Frame] = []
    pending = {r: None for r in parties}
    for step, sender in schedule:
        try:
            if pending[sender] is not None:
                raise PartyAbort(pending[sender])
            payload = bytes(parties[sender].send(step))
        except PartyAbort:
            log.append(Frame(step, sender, b"", 0, True))
            return log
        norm = normalize_message(payload, lengths[step])
        _record_sent(parties[sender], step, norm)
        log.append(Frame(step, sender, norm, len(payload)))
        for r, p in parties.items():
            if r != sender and pending[r] is None:
                try:
                    p.receive(step, norm)
                except Exception as exc:
                    pending[r] = "%s while processing %s" % (type(exc).__name__, step)
    return log


__all__ = ["PartyAbort", "TransportError", "QueueChannel", "SocketChannel", "Channel", "channel_pair",
           "run_role", "run_two_party", "run_direct", "encode_frame"]
