"""
乱数ストリームの導出

(master_seed, command) から blake2b で 128 ビットの Philox キーを作り、
ブロック番号 b をカウンタ上位 128 ビットに置く。1 ブロックが使う乱数は 2^128 個に
遠く及ばないため、ブロック間でストリームは重ならない。
"""

import hashlib
from typing import NamedTuple

import numpy as np

from ..exceptions import ConfigError

SEED_BITS = 64


def command_key(master_seed: int, command: str) -> int:
    """(master_seed, command) の 128 ビットキー"""
    if not 0 <= master_seed < 2**SEED_BITS:
        raise ConfigError(f"master_seed は 64 ビット符号なし整数: {master_seed}")
    digest = hashlib.blake2b(f"{master_seed}:{command}".encode("utf-8"), digest_size=16).digest()
    return int.from_bytes(digest, "little")


def stream(master_seed: int, command: str, index: int) -> np.random.Generator:
    """ストリーム index（ブロック番号または反復番号）の Generator"""
    if index < 0:
        raise ConfigError(f"index は非負: {index}")
    bit_generator = np.random.Philox(key=command_key(master_seed, command), counter=index << 128)
    return np.random.Generator(bit_generator)


def block_ranges(replicas: int, block_size: int):
    """反復 0..replicas-1 を固定サイズのブロックに分けた (block_index, size) の列"""
    if replicas < 1 or block_size < 1:
        raise ConfigError(f"replicas={replicas}, block_size={block_size} が不正")
    return [(b, min(block_size, replicas - b * block_size)) for b in range((replicas + block_size - 1) // block_size)]


class AuditResult(NamedTuple):
    streams: int
    duplicates: int

    @property
    def passed(self) -> bool:
        return self.duplicates == 0


def fingerprint(gen: np.random.Generator, outputs: int = 64) -> bytes:
    return hashlib.blake2b(gen.integers(0, 2**64, outputs, dtype=np.uint64).tobytes(), digest_size=16).digest()


def collision_audit(master_seed: int, command: str, count: int, outputs: int = 64) -> AuditResult:
    """先頭 outputs 個の出力の指紋が count 本のストリームで重複しないか"""
    seen = set()
    duplicates = 0
    for i in range(count):
        fp = fingerprint(stream(master_seed, command, i), outputs)
        if fp in seen:
            duplicates += 1
        seen.add(fp)
    return AuditResult(count, duplicates)
