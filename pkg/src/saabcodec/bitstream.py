"""MSB-first bit packing with order-0 exp-Golomb codes."""

import numpy as np

from .errors import BitstreamError


class BitWriter:
    def __init__(self):
        self._buf = bytearray()
        self._acc = 0
        self._n = 0

    @property
    def bit_length(self):
        return 8 * len(self._buf) + self._n

    def write_bit(self, bit):
        self._acc = (self._acc << 1) | (1 if bit else 0)
        self._n += 1
        if self._n == 8:
            self._buf.append(self._acc)
            self._acc = 0
            self._n = 0

    def write_bits(self, value, n):
        value = int(value)
        if value < 0 or (n < 64 and value >> n):
            raise BitstreamError(f"value {value} does not fit in {n} bits")
        for i in range(n - 1, -1, -1):
            self.write_bit((value >> i) & 1)

    def write_ue(self, value):
        """Order-0 exp-Golomb: value v >= 0 coded as (b-1) zeros then v+1 in b bits."""
        n = int(value) + 1
        b = n.bit_length()
        for _ in range(b - 1):
            self.write_bit(0)
        self.write_bits(n, b)

    def getvalue(self):
        """Byte-aligned contents; pads the tail with zero bits."""
        out = bytearray(self._buf)
        if self._n:
            out.append(self._acc << (8 - self._n))
        return bytes(out)


class BitReader:
    def __init__(self, data):
        self._data = data
        self._pos = 0

    @property
    def position(self):
        return self._pos

    def read_bit(self):
        byte = self._pos >> 3
        if byte >= len(self._data):
            raise BitstreamError("read past end of stream", bit_offset=self._pos)
        bit = (self._data[byte] >> (7 - (self._pos & 7))) & 1
        self._pos += 1
        return bit

    def read_bits(self, n):
        v = 0
        for _ in range(n):
            v = (v << 1) | self.read_bit()
        return v

    def read_ue(self):
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
            if zeros > 64:
                raise BitstreamError("runaway exp-Golomb prefix", bit_offset=self._pos)
        return ((1 << zeros) | self.read_bits(zeros)) - 1


def ue_bit_length(values):
    """Vectorized code length of write_ue for non-negative integers."""
    n = np.asarray(values, dtype=np.int64) + 1
    _, exp = np.frexp(n.astype(np.float64))
    return 2 * (exp - 1) + 1
