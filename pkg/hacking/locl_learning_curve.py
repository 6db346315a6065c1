#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

"""Plot training and validation loss per epoch from locl_pretrain/locl_protocol JSONL logs."""

from __future__ import (absolute_import, division, print_function)
__metaclass__ = type

import argparse
import os

try:
    import pandas as pd
except ImportError:
    raise SystemExit('pandas is required for this script to work')

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    raise SystemExit('matplotlib is required for this script to work')


def load_epochs(filename):
    """Epoch events of one log as a DataFrame; one curve per (cell, fold) when present."""
    frame = pd.read_json(filename, lines=True)
    if frame.empty or '_event' not in frame:
        raise SystemExit('%s holds no events' % filename)
    frame = frame[frame['_event'] == 'epoch'].copy()
    for column in ('cell', 'fold'):
        if column not in frame:
            frame[column] = None
    frame['run'] = [run_label(filename, cell, fold) for cell, fold in zip(frame['cell'], frame['fold'])]
    return frame


def run_label(filename, cell, fold):
    parts = [os.path.basename(filename)]
    if isinstance(cell, str):
        parts.append(cell)
    if not pd.isna(fold):
        parts.append('fold %d' % fold)
    return ' '.join(parts)


def best_epochs(frame):
    rows = frame.loc[frame.groupby('run')['val_loss'].idxmin()]
    return rows[['run', 'epoch', 'val_loss']]


def create_graph(frame, width=11.0, height=8.0, filename='out.png', title=None, reconstruction=False):
    fig, ax1 = plt.subplots(figsize=(width, height), dpi=150)
    ax1.grid(linestyle='dashed', color='lightgray')

    for run, curve in frame.groupby('run', sort=True):
        line, = ax1.plot(curve['epoch'], curve['l_total'], '-', label='%s train' % run)
        ax1.plot(curve['epoch'], curve['val_loss'], '--', color=line.get_color(), label='%s val' % run)
    for _index, row in best_epochs(frame).iterrows():
        ax1.plot(row['epoch'], row['val_loss'], 'k*', markersize=8)

    if title:
        ax1.set_title(title)
    ax1.set_xlabel('Epoch')
    ax1.set_ylabel('Loss')

    if reconstruction:
        ax2 = ax1.twinx()
        for _run, curve in frame.groupby('run', sort=True):
            ax2.plot(curve['epoch'], curve['l_reconstruction'], ':', color='gray')
        ax2.set_ylabel('Reconstruction loss', color='gray')

    ax1.legend(fontsize='small', loc='upper right')
    fig.tight_layout()
    fig.savefig(filename, format='png')


def parse_args():
    parser = argparse.ArgumentParser()
    parser.add_argument('files', nargs='+', help='JSONL logs written by locl_pretrain or locl_protocol')
    parser.add_argument('--output', default='out.png', help='output path of PNG file. Default %(default)s')
    parser.add_argument('--width', type=float, default=11.0,
                        help='Width of output image in inches. Default %(default)s')
    parser.add_argument('--height', type=float, default=8.0,
                        help='Height of output image in inches. Default %(default)s')
    parser.add_argument('--reconstruction', default=False, action='store_true',
                        help='Also plot the reconstruction term on a second axis')
    parser.add_argument('--title', help='Title for graph')
    return parser.parse_args()


def main():
    args = parse_args()
    frame = pd.concat([load_epochs(f) for f in args.files], ignore_index=True)
    if frame.empty:
        raise SystemExit('no epoch events in %s' % ', '.join(args.files))
    create_graph(frame, width=args.width, height=args.height, filename=args.output, title=args.title,
                 reconstruction=args.reconstruction)
    print(best_epochs(frame).to_string(index=False))
    print('Graph written to %s' % os.path.abspath(args.output))


if __name__ == '__main__':
    main()
