#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import numpy as np

logger = logging.getLogger(__name__)

# Independent random streams derived from one experiment seed.
STREAM_INIT        = 0
STREAM_NOISE       = 1
STREAM_LAMBDA      = 2
STREAM_TEST_POINTS = 3


def make_rng(seed, stream = 0):
    """
    Counter-based generator (Philox) keyed by (seed, stream).  Streams keep
    the draws of one purpose independent of how many draws another made.
    """
    if seed is None or int(seed) < 0:
        raise ValueError(f"seed must be a non-negative integer, got {seed!r}")
    seed_seq = np.random.SeedSequence([int(seed), int(stream)])
    return np.random.Generator(np.random.Philox(seed_seq))
