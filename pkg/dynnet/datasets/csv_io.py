#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
CSV tables with optional `# key=value` provenance lines above the header.
Floats are written with 17 significant digits so files round-trip exactly.
"""

import csv
import logging
import os

import numpy as np

logger = logging.getLogger(__name__)


def format_value(value):
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_table(path, header, rows, meta = None):
    drc = os.path.dirname(path)
    if drc:
        os.makedirs(drc, exist_ok = True)

    with open(path, 'w', newline = '') as fh:
        if meta:
            fh.write('# ' + ' '.join(f"{k}={format_value(v)}" for k, v in meta.items()) + '\n')
        writer = csv.writer(fh, lineterminator = '\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow([ format_value(v) for v in row ])

    logger.debug(f"Wrote {path}")
    return path


def read_table(path):
    """ Returns (meta, header, rows) with cells as strings. """
    meta = {}
    with open(path, 'r', newline = '') as fh:
        lines = fh.read().splitlines()

    body = []
    for line in lines:
        if line.startswith('#'):
            for item in line[1:].split():
                if '=' in item:
                    k, v = item.split('=', 1)
                    meta[k] = v
        elif line.strip():
            body.append(line)

    reader = list(csv.reader(body))
    if not reader:
        raise ValueError(f"{path} holds no table")
    return meta, reader[0], reader[1:]


def write_series(path, times, values, columns, meta = None, time_column = 't'):
    values = np.asarray(values, dtype = np.float64)
    rows   = [ [t] + list(v) for t, v in zip(np.asarray(times, dtype = np.float64), values) ]
    return write_table(path, [time_column] + list(columns), rows, meta)


def read_series(path):
    """ Returns (meta, columns, times, values). """
    meta, header, rows = read_table(path)
    data = np.array([ [ float(v) for v in row ] for row in rows ], dtype = np.float64).reshape(len(rows), len(header))
    return meta, header[1:], data[:, 0], data[:, 1:]
