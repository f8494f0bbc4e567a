"""Binary episode stream format (version 1), shared with the accelerated
rollout engine.

Layout, all little-endian:

  magic   4 bytes  b"PREC"
  version u16      1
  env_id  u8       1 = pacman, 2 = falling digit
  flags   u8       bit 0: per-step frames present
  seed    u64      base seed of the episode generator
  steps   u32      number of steps
  then per step:
    action u8
    reward f32
    done   u8
    frame  H*W*3 bytes, row-major RGB (only if the frame flag is set)

The stored frame is the observation the policy acted on (pre-action); the
terminal observation is not stored. Frame dimensions are fixed by env_id.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"PREC"
VERSION = 1
FLAG_FRAMES = 1

ENV_PACMAN = 1
ENV_FALLING = 2
FRAME_SHAPES = {ENV_PACMAN: (64, 64, 3), ENV_FALLING: (128, 128, 3)}

_HEADER = struct.Struct("<4sHBBQI")
_STEP_FIXED = struct.Struct("<BfB")


@dataclass
class EpisodeRecord:
    env_id: int
    seed: int
    actions: np.ndarray  # u8 [T]
    rewards: np.ndarray  # f32 [T]
    dones: np.ndarray  # u8 [T]
    frames: np.ndarray | None  # u8 [T, H, W, 3] or None

    @property
    def has_frames(self) -> bool:
        return self.frames is not None

    def episode_return(self) -> float:
        return float(self.rewards.sum())


def encode_record(record: EpisodeRecord) -> bytes:
    flags = FLAG_FRAMES if record.has_frames else 0
    n = len(record.actions)
    out = bytearray()
    out += _HEADER.pack(MAGIC, VERSION, record.env_id, flags, record.seed, n)
    for t in range(n):
        out += _STEP_FIXED.pack(
            int(record.actions[t]), float(record.rewards[t]), int(record.dones[t])
        )
        if record.has_frames:
            out += record.frames[t].tobytes()
    return bytes(out)


def decode_record(raw: bytes) -> EpisodeRecord:
    if len(raw) < _HEADER.size:
        raise ValueError("record truncated before header")
    magic, version, env_id, flags, seed, n = _HEADER.unpack_from(raw, 0)
    if magic != MAGIC:
        raise ValueError("not an episode record (bad magic)")
    if version != VERSION:
        raise ValueError(f"unsupported record version {version}")
    if env_id not in FRAME_SHAPES:
        raise ValueError(f"unknown env id {env_id}")
    with_frames = bool(flags & FLAG_FRAMES)
    h, w, c = FRAME_SHAPES[env_id]
    frame_bytes = h * w * c if with_frames else 0
    step_bytes = _STEP_FIXED.size + frame_bytes
    if len(raw) != _HEADER.size + n * step_bytes:
        raise ValueError(
            f"record length mismatch: header promises {n} steps "
            f"({_HEADER.size + n * step_bytes} bytes), file has {len(raw)}"
        )

    actions = np.empty(n, dtype=np.uint8)
    rewards = np.empty(n, dtype=np.float32)
    dones = np.empty(n, dtype=np.uint8)
    frames = np.empty((n, h, w, c), dtype=np.uint8) if with_frames else None
    offset = _HEADER.size
    for t in range(n):
        a, r, d = _STEP_FIXED.unpack_from(raw, offset)
        offset += _STEP_FIXED.size
        actions[t], rewards[t], dones[t] = a, r, d
        if with_frames:
            frames[t] = np.frombuffer(raw, np.uint8, frame_bytes, offset).reshape(h, w, c)
            offset += frame_bytes
    return EpisodeRecord(env_id=env_id, seed=seed, actions=actions, rewards=rewards,
                         dones=dones, frames=frames)


def write_record(path: str, record: EpisodeRecord) -> None:
    with open(path, "wb") as f:
        f.write(encode_record(record))


def read_record(path: str) -> EpisodeRecord:
    with open(path, "rb") as f:
        return decode_record(f.read())


def decode_record_stream(raw: bytes) -> list[EpisodeRecord]:
    """Decode a shard: one or more records concatenated back to back,
    ordered by episode index."""
    records = []
    offset = 0
    while offset < len(raw):
        if len(raw) - offset < _HEADER.size:
            raise ValueError("shard truncated inside a record header")
        magic, version, env_id, flags, _, n = _HEADER.unpack_from(raw, offset)
        if magic != MAGIC:
            raise ValueError(f"bad magic at shard offset {offset}")
        if env_id not in FRAME_SHAPES:
            raise ValueError(f"unknown env id {env_id} at shard offset {offset}")
        h, w, c = FRAME_SHAPES[env_id]
        frame_bytes = h * w * c if flags & FLAG_FRAMES else 0
        size = _HEADER.size + n * (_STEP_FIXED.size + frame_bytes)
        records.append(decode_record(raw[offset : offset + size]))
        offset += size
    return records


def write_record_stream(path: str, records: list[EpisodeRecord]) -> None:
    """Write a shard of records in the given (episode) order."""
    with open(path, "wb") as f:
        for record in records:
            f.write(encode_record(record))


def read_record_stream(path: str) -> list[EpisodeRecord]:
    with open(path, "rb") as f:
        return decode_record_stream(f.read())


def rollout_record(env, policy_fn, rng, seed: int, with_frames: bool = True,
                   max_steps: int = 10_000) -> EpisodeRecord:
    """Run one episode and capture it as a record.

    ``policy_fn(env, obs)`` picks the action for the pre-action observation
    ``obs`` (a StepResult).
    """
    obs = env.reset(rng)
    actions, rewards, dones, frames = [], [], [], []
    while not obs.done and len(actions) < max_steps:
        action = policy_fn(env, obs)
        if with_frames:
            frames.append(obs.frame.copy())
        result = env.step(action)
        actions.append(action)
        rewards.append(result.reward)
        dones.append(1 if result.done else 0)
        obs = result
    return EpisodeRecord(
        env_id=env.env_id,
        seed=seed,
        actions=np.array(actions, dtype=np.uint8),
        rewards=np.array(rewards, dtype=np.float32),
        dones=np.array(dones, dtype=np.uint8),
        frames=np.stack(frames) if with_frames else None,
    )
