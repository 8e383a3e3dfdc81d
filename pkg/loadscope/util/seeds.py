import hashlib
from typing import Hashable

SEED_MODULUS = 2**32


def task_seed(global_seed: int, *keys: Hashable) -> int:
    """Derive a stable per-task seed from the global seed and task keys

    Uses a cryptographic digest of the keys' string forms, so the seed does
    not depend on the interpreter's hash randomization nor on the order in
    which tasks are scheduled.
    """
    payload = '|'.join([str(int(global_seed)), *map(str, keys)])
    digest = hashlib.sha256(payload.encode('utf-8')).digest()
    return int.from_bytes(digest[:8], 'little') % SEED_MODULUS
