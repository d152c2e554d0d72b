"""Tensor container walk-through: write, inspect, reload, and what happens
when a file lies about its shape.

Every array the pipeline exchanges on disk travels in one fixed binary
layout (magic, version, dtype, extents, float32 payload), so the feature
extractor and the engine agree byte for byte.
"""

import os
import struct
import tempfile

import numpy as np

from ccfloc import errors
from ccfloc.tensor_store import load_tensor, peek_tensor_dims, save_tensor

workdir = tempfile.mkdtemp(prefix="ccfloc_demo_")
path = os.path.join(workdir, "demo.ccft")

arr = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
save_tensor(path, arr)
print(f"wrote {arr.shape} float32 tensor -> {path} ({os.path.getsize(path)} bytes)")

print("header dims (no payload read):", peek_tensor_dims(path))

back = load_tensor(path)
print("round-trip byte-identical:", back.tobytes() == arr.tobytes())

# corrupt the declared extents: readers must refuse, never pad or truncate
raw = bytearray(open(path, "rb").read())
struct.pack_into("<I", raw, 8, 99)
bad = os.path.join(workdir, "bad.ccft")
open(bad, "wb").write(bytes(raw))
try:
    load_tensor(bad)
except errors.DimMismatch as exc:
    print("corrupt extents rejected:", exc)
