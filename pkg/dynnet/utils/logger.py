#!/usr/bin/env python
# -*- coding: utf-8 -*-

import logging
import os

from datetime import datetime

logger = logging.getLogger(__name__)

LOG_LEVELS = {
    'debug'   : logging.DEBUG,
    'info'    : logging.INFO,
    'warning' : logging.WARNING,
    'error'   : logging.ERROR,
}


def init_logger(fl_prefix = None, drc_log = "logs", level = 'info'):
    """
    Route every logger of the run to `{fl_prefix}.{timestamp}.log` under
    `drc_log`.  Returns (timestamp, path of the log file).
    """
    if level not in LOG_LEVELS:
        raise ValueError(f"unknown log level '{level}', expected one of {sorted(LOG_LEVELS)}")

    timestamp = datetime.now().strftime("%Y_%m%d_%H%M_%S")
    fl_log    = f"{timestamp}.log" if fl_prefix is None else f"{fl_prefix}.{timestamp}.log"
    os.makedirs(drc_log, exist_ok = True)
    path_log  = os.path.join(drc_log, fl_log)

    # force: a second run in the same process starts a new file
    logging.basicConfig( filename = path_log,
                         filemode = 'w',
                         format   = "%(asctime)s %(levelname)s %(name)s\n%(message)s",
                         datefmt  = "%m/%d/%Y %H:%M:%S",
                         level    = LOG_LEVELS[level],
                         force    = True, )

    return timestamp, path_log


def flatten_entries(entries, prefix = ''):
    """ Nested dicts as (dotted key, value) pairs in insertion order. """
    for k, v in entries.items():
        key = f"{prefix}.{k}" if prefix else str(k)
        if isinstance(v, dict):
            yield from flatten_entries(v, key)
        else:
            yield key, v


def log_run_header(timestamp, entries):
    """ One `key : value` line per resolved setting, under the run timestamp. """
    logger.info(f"___/ run {timestamp} \\___")
    for key, value in flatten_entries(entries):
        logger.info(f"KV - {key:32s} : {value}")
