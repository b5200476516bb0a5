"""Binary container for learned kernels and 24-kernel banks.

Exact byte layout is documented in docs/FORMATS.md.  Serialization is fully
deterministic (little-endian float64, sorted JSON metadata), so a training
run with a fixed seed produces a bitwise-identical bank file.
"""

import hashlib
import json
from dataclasses import dataclass, replace
import struct

import numpy as np

from .errors import InvalidInputError
from .linalg import VEC_LEN
from .modes import ModeGroupTable, N_KERNELS, canonical_mode_group_table
from .transforms import SaabKernel, round_kernel

BANK_MAGIC = b"SBNK"
KERNEL_MAGIC = b"SKRN"
BANK_VERSION = 1

_KIND_CODES = {"dct": 0, "klt": 1, "saab1": 2}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}


def kernel_to_bytes(kernel):
    if kernel.kind not in _KIND_CODES:
        raise InvalidInputError(f"cannot serialize kernel kind {kernel.kind!r}")
    group = tuple(kernel.trained_mode_group)
    digits = -1 if kernel.decimal_digits is None else kernel.decimal_digits
    head = KERNEL_MAGIC + struct.pack(
        "<BhB", _KIND_CODES[kernel.kind], digits, len(group)
    )
    head += bytes(group)
    body = kernel.matrix.astype("<f8").tobytes() + kernel.bias.astype("<f8").tobytes()
    return head + body


def kernel_from_bytes(buf, offset=0):
    if buf[offset : offset + 4] != KERNEL_MAGIC:
        raise InvalidInputError("bad kernel record magic")
    kind_code, digits, group_len = struct.unpack_from("<BhB", buf, offset + 4)
    offset += 8
    group = tuple(buf[offset : offset + group_len])
    offset += group_len
    matrix = np.frombuffer(buf, dtype="<f8", count=VEC_LEN * VEC_LEN, offset=offset)
    offset += VEC_LEN * VEC_LEN * 8
    bias = np.frombuffer(buf, dtype="<f8", count=VEC_LEN, offset=offset)
    offset += VEC_LEN * 8
    kernel = SaabKernel(
        matrix=matrix.reshape(VEC_LEN, VEC_LEN).copy(),
        bias=bias.copy(),
        kind=_KIND_NAMES[kind_code],
        trained_mode_group=group,
        decimal_digits=None if digits < 0 else digits,
    )
    return kernel, offset


@dataclass(frozen=True)
class KernelBank:
    """The 24 mode-dependent Saab kernels plus grouping table and provenance."""

    kernels: tuple
    table: ModeGroupTable
    meta: dict

    def kernel_for_mode(self, mode):
        return self.kernels[self.table.kernel_for_mode(mode)]

    def to_bytes(self):
        meta = dict(self.meta)
        meta["apply_map"] = list(self.table.apply_map)
        meta["train_groups"] = [sorted(g) for g in self.table.train_groups]
        meta_bytes = json.dumps(meta, sort_keys=True).encode()
        out = BANK_MAGIC + struct.pack("<III", BANK_VERSION, len(self.kernels), len(meta_bytes))
        out += meta_bytes
        for kernel in self.kernels:
            out += kernel_to_bytes(kernel)
        return out

    @classmethod
    def from_bytes(cls, buf):
        if buf[:4] != BANK_MAGIC:
            raise InvalidInputError("not a kernel bank file")
        version, count, meta_len = struct.unpack_from("<III", buf, 4)
        if version != BANK_VERSION:
            raise InvalidInputError(f"unsupported bank version {version}")
        offset = 16
        meta = json.loads(buf[offset : offset + meta_len].decode())
        offset += meta_len
        kernels = []
        for _ in range(count):
            kernel, offset = kernel_from_bytes(buf, offset)
            kernels.append(kernel)
        apply_map = meta.pop("apply_map", None)
        train_groups = meta.pop("train_groups", None)
        if apply_map is not None and train_groups is not None:
            table = ModeGroupTable(
                apply_map=tuple(apply_map),
                train_groups=tuple(frozenset(g) for g in train_groups),
            )
        else:
            table = canonical_mode_group_table()
        return cls(kernels=tuple(kernels), table=table, meta=meta)

    def digest(self):
        """16-byte content digest; the bitstream header pins this."""
        return hashlib.sha256(self.to_bytes()).digest()[:16]

    def save(self, path):
        with open(path, "wb") as f:
            f.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            return cls.from_bytes(f.read())

    def rounded(self, decimal_digits):
        """Bank with every kernel's matrix and bias rounded to d decimal digits."""
        if decimal_digits is None:
            return self
        meta = dict(self.meta)
        meta["decimal_digits"] = decimal_digits
        return replace(
            self,
            kernels=tuple(round_kernel(k, decimal_digits) for k in self.kernels),
            meta=meta,
        )

    def export_text(self, path):
        """Human-readable dump of the bank for inspection."""
        with open(path, "w") as f:
            f.write(f"kernel bank: {len(self.kernels)} kernels\n")
            f.write(f"meta: {json.dumps(self.meta, sort_keys=True)}\n")
            for i, k in enumerate(self.kernels):
                f.write(
                    f"\n# kernel {i} kind={k.kind} modes={sorted(k.trained_mode_group)} "
                    f"decimal_digits={k.decimal_digits}\n"
                )
                for row in k.matrix:
                    f.write(" ".join(f"{v:.17g}" for v in row) + "\n")
                f.write("bias " + " ".join(f"{v:.17g}" for v in k.bias) + "\n")

    def validate(self):
        if len(self.kernels) != N_KERNELS:
            raise InvalidInputError(f"expected {N_KERNELS} kernels, got {len(self.kernels)}")
        for k in self.kernels:
            if k.matrix.shape != (VEC_LEN, VEC_LEN):
                raise InvalidInputError("bad kernel matrix shape")
        return self
