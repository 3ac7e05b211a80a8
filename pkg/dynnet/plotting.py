#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
SVG figures: solution plots with observed points as markers, the exact
solution as a solid line and predictions dashed; stability plots draw each
boundary locus as a closed polyline in the complex plane.  Output bytes
depend only on the input series.
"""

import logging
import os

from dataclasses import dataclass, field
from typing      import Dict, Optional, Sequence

import numpy as np

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt

logger = logging.getLogger(__name__)

KIND_STYLES = {
    'observed' : dict(linestyle = 'none', marker = 'o', markersize = 3, alpha = 0.6),
    'exact'    : dict(linestyle = '-'   , linewidth = 1.5),
    'predicted': dict(linestyle = '--'  , linewidth = 1.5),
    'boundary' : dict(linestyle = '-'   , linewidth = 1.0),
}


@dataclass
class Series:
    label: str
    x    : np.ndarray
    y    : np.ndarray
    kind : str = 'predicted'

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype = np.float64).reshape(-1)
        self.y = np.asarray(self.y, dtype = np.float64).reshape(-1)
        if self.x.size != self.y.size:
            raise ValueError(f"series '{self.label}': {self.x.size} x values for {self.y.size} y values")
        if self.x.size == 0:
            raise ValueError(f"series '{self.label}' is empty")
        if self.kind not in KIND_STYLES:
            raise ValueError(f"series '{self.label}': unknown kind '{self.kind}', expected one of {sorted(KIND_STYLES)}")


@dataclass
class PlotStyle:
    title       : Optional[str]  = None
    xlabel      : str            = 't'
    ylabel      : Optional[str]  = None
    equal_aspect: bool           = False
    figsize     : Sequence       = (6.0, 4.0)
    extra       : Dict           = field(default_factory = dict)


def emit_plot(series, style, path):
    """ One SVG with every series of the bundle, legend entries in input order. """
    series = list(series)
    if not series:
        raise ValueError("nothing to plot: empty series bundle")
    style = PlotStyle() if style is None else style

    drc = os.path.dirname(path)
    if drc:
        os.makedirs(drc, exist_ok = True)

    with plt.rc_context({ 'svg.hashsalt': 'dynnet', 'svg.fonttype': 'path' }):
        fig, ax = plt.subplots(figsize = tuple(style.figsize))
        for i, s in enumerate(series):
            line, = ax.plot(s.x, s.y, label = s.label, **KIND_STYLES[s.kind])
            line.set_gid(f"series{i}")

        if style.title is not None: ax.set_title(style.title)
        ax.set_xlabel(style.xlabel)
        if style.ylabel is not None: ax.set_ylabel(style.ylabel)
        if style.equal_aspect:
            ax.set_aspect('equal', adjustable = 'datalim')
            ax.axhline(0.0, color = 'gray', linewidth = 0.5)
            ax.axvline(0.0, color = 'gray', linewidth = 0.5)
        ax.legend(loc = 'best', fontsize = 'small')
        fig.tight_layout()
        fig.savefig(path, format = 'svg', metadata = { 'Date': None })
        plt.close(fig)

    logger.debug(f"Wrote {path} with {len(series)} series.")
    return path


def boundary_series(region):
    """ The boundary locus as a polyline, closed back to its first point. """
    z = np.asarray(region.z)
    if z.size and not region.is_closed:
        z = np.append(z, z[0])
    return Series(region.scheme.name, z.real, z.imag, kind = 'boundary')


def emit_stability_plot(regions, path, title = None):
    style = PlotStyle(title = title, xlabel = 'Re(z)', ylabel = 'Im(z)', equal_aspect = True, figsize = (5.0, 5.0))
    return emit_plot([ boundary_series(r) for r in regions ], style, path)


def emit_state_plots(state_names, obs_times, obs_states, true_times, true_states, pred_times, pred_states, path_prefix, title = None):
    """ One figure per state; returns the written paths. """
    paths = []
    for i, name in enumerate(state_names):
        series = []
        if obs_states is not None:
            series.append(Series(f"{name} observed", obs_times, np.asarray(obs_states)[:, i], kind = 'observed'))
        series.append(Series(f"{name} exact", true_times, np.asarray(true_states)[:, i], kind = 'exact'))
        series.append(Series(f"{name} predicted", pred_times, np.asarray(pred_states)[:, i], kind = 'predicted'))
        style = PlotStyle(title = title, ylabel = name)
        paths.append(emit_plot(series, style, f"{path_prefix}_{name}.svg"))
    return paths


def emit_loss_plot(losses, path, title = None):
    """ Total loss per epoch on a log scale. """
    epochs = np.array([ l.epoch for l in losses ], dtype = np.float64)
    totals = np.array([ max(l.total, np.finfo(np.float64).tiny) for l in losses ])
    style  = PlotStyle(title = title, xlabel = 'epoch', ylabel = 'log10 total loss')
    return emit_plot([Series('total', epochs, np.log10(totals), kind = 'exact')], style, path)
