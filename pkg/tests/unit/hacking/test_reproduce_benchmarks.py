from __future__ import absolute_import, division, print_function

__metaclass__ = type

import numpy as np
import pytest

from ansible_collections.tabular.locl.hacking import reproduce_benchmarks as rb
from ansible_collections.tabular.locl.plugins.module_utils.evaluation import EvalReport
from ansible_collections.tabular.locl.tests.unit.plugins.module_utils.utils import synthetic_dataset


@pytest.mark.parametrize('name, mean, missed', [
    ('diabetes', 0.60, False),
    ('diabetes', 0.71, False),
    ('diabetes', 0.5999, True),
    ('wall-following', 0.95, False),
    ('wall-following', 0.69, True),
    ('gas', 0.9825 + 0.015, False),
    ('gas', 0.9825 - 0.03, True),
    ('mnist', 0.9540 + 0.03, True),
])
def test_reproduction_floors_and_bands(name, mean, missed):
    assert bool(rb.reproduction_misses([(name, mean)], 0.02)) is missed


def test_floor_ignores_the_tolerance():
    assert rb.reproduction_misses([('diabetes', 0.80)], 0.0) == []


@pytest.mark.parametrize('per_seed, failures', [
    ([(0.80, 0.78), (0.81, 0.79), (0.77, 0.78)], 0),
    ([(0.80, 0.78), (0.77, 0.78), (0.76, 0.78)], 1),
    ([(0.70, 0.78), (0.71, 0.79), (0.72, 0.78)], 2),
    ([(0.775, 0.78), (0.781, 0.78), (0.782, 0.78)], 0),
])
def test_ablation_verdict(per_seed, failures):
    assert len(rb.ablation_verdict(per_seed, margin=0.01)) == failures


def test_ablation_cells_exist():
    names = [name for name, _changes in rb.evaluation.ABLATION_CELLS]
    assert rb.MST_CELL in names
    assert rb.RANDOM_CELL in names


def run(accuracies, Z):
    report = EvalReport(accuracies, 'abc')
    return report, rb.render_report('diabetes', rb.config.resolve({}), fake_dataset(), [report]), Z


def fake_dataset():
    return synthetic_dataset(n=12, m=3)


def test_identical_runs_have_no_diffs():
    Z = np.arange(6.0).reshape(3, 2)
    assert rb.determinism_diffs('diabetes', run([0.5, 0.75], Z), run([0.5, 0.75], Z.copy())) == []


def test_determinism_reports_every_difference():
    Z = np.arange(6.0).reshape(3, 2)
    other = Z.copy()
    other[0, 0] = np.nextafter(0.0, 1.0)
    diffs = rb.determinism_diffs('diabetes', run([0.5, 0.75], Z), run([0.5, 0.7500001], other))
    assert len(diffs) == 3
    assert 'accuracies' in diffs[0]
    assert 'report bytes' in diffs[1]
    assert 'embeddings' in diffs[2]


def test_modes_are_exclusive():
    with pytest.raises(SystemExit):
        rb.parse_args(['diabetes=d.csv', '--ablations', '--determinism'])


def test_default_seeds():
    args = rb.parse_args(['diabetes=d.csv:class', '--ablations'])
    assert args.seeds == [0, 1, 2]
    assert args.datasets == [('diabetes', 'd.csv', 'class')]
