"""Deterministic random-number substreams.

Every Monte Carlo routine draws from generators derived here.  A stream is
identified by the user seed plus a tuple of small integer tags (stream kind,
chunk index, shell index, ...), so the sample consumed by one chunk or one
shell never depends on how many workers run or which other shells are
enabled.  Reductions always happen in chunk order, which makes results
byte-identical for a fixed seed regardless of parallelism.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

import numpy as np

# Fixed chunk size for x-samples; results must not depend on worker count,
# so the chunking itself is never derived from it.
CHUNK = 8192

# Stream kind tags.
STREAM_REGION = 1
STREAM_SPHERE = 2
STREAM_PAIR_X = 3
STREAM_PAIR_SHELL = 4
STREAM_PAIR_TAIL = 5
STREAM_RESAMPLE = 6
STREAM_DERIVE = 7

# Offset applied to indices that may be negative (annulus indices).
_TAG_OFFSET = 1 << 20


def _key(tags: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(t) + _TAG_OFFSET for t in tags)


def substream(seed: int, *tags: int) -> np.random.Generator:
    """Generator for the stream identified by ``(seed, *tags)``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_key(tags))
    return np.random.Generator(np.random.PCG64(ss))


def derive_seed(seed: int, *tags: int) -> int:
    """A 64-bit seed deterministically derived from ``(seed, *tags)``.

    Used to give independent sub-computations (per-annulus energies, sweep
    cells) their own top-level seeds.
    """
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=_key((STREAM_DERIVE,) + tags))
    return int(ss.generate_state(1, np.uint64)[0])


def n_chunks(n_samples: int) -> int:
    return (int(n_samples) + CHUNK - 1) // CHUNK


def chunk_sizes(n_samples: int) -> list[int]:
    full, rem = divmod(int(n_samples), CHUNK)
    sizes = [CHUNK] * full
    if rem:
        sizes.append(rem)
    return sizes


def map_chunks(fn: Callable[[int], object], count: int, workers: int = 1) -> list:
    """Apply ``fn`` to chunk indices ``0..count-1``, results in index order.

    With ``workers > 1`` the chunks run on a thread pool; the returned order
    (and therefore any reduction over it) is identical to the serial one.
    """
    if workers <= 1 or count <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=int(workers)) as ex:
        return list(ex.map(fn, range(count)))
