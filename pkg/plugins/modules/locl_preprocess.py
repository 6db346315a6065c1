#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_preprocess
short_description: Turn a CSV table into a normalized dataset artifact
description:
    - Reads a comma separated file with a header row, one-hot encodes categorical
      columns, normalizes numeric ones and drops constant columns.
    - Writes the dataset artifact, a JSON preprocessing report and, optionally, a
      stratified fold plan for the evaluation modules.
version_added: "1.0.0"
author:
    - tabular.locl contributors
options:
  src:
    description:
      - Path of the CSV file.
    type: path
    required: true
  label:
    description:
      - Name of the label column.
    type: str
    required: true
  mode:
    description:
      - Normalization of numeric columns.
    type: str
    choices: [ zscore, minmax ]
    default: zscore
  schema_hint:
    description:
      - Map of column name to V(numeric) or V(categorical), overriding type inference.
    type: dict
    default: {}
  dest:
    description:
      - Path of the dataset artifact to write.
    type: path
    required: true
  report:
    description:
      - Path of the JSON preprocessing report. Defaults to O(dest) with C(.preprocess.json) appended.
    type: path
  folds_dest:
    description:
      - When set, also write a stratified fold plan (JSON) to this path.
    type: path
  k:
    description:
      - Number of folds of the fold plan.
    type: int
    default: 5
  unlabeled_fraction:
    description:
      - Share of every training partition treated as unlabeled.
    type: float
    default: 0.9
  seed:
    description:
      - Seed of the fold plan.
    type: int
    default: 0
notes:
  - Requires C(numpy), C(pandas) and C(scikit-learn) on the target host.
'''

EXAMPLES = r'''
- name: Preprocess the income table
  tabular.locl.locl_preprocess:
    src: /data/income.csv
    label: income
    mode: zscore
    dest: /runs/income/dataset.locl
    folds_dest: /runs/income/folds.json

- name: Force a zip code column to be categorical
  tabular.locl.locl_preprocess:
    src: /data/houses.csv
    label: sold
    schema_hint:
      zip: categorical
    dest: /runs/houses/dataset.locl
'''

RETURN = r'''
dataset_fingerprint:
    description: SHA-256 of feature names, values and labels of the dataset.
    returned: success
    type: str
n_rows:
    description: Number of rows.
    returned: success
    type: int
    sample: 1151
n_features:
    description: Number of features after one-hot expansion and dropping.
    returned: success
    type: int
    sample: 19
classes:
    description: Original label values, indexed by class id.
    returned: success
    type: list
    sample: ['0', '1']
dropped:
    description: Columns dropped because they are constant.
    returned: success
    type: list
    sample: ['quality']
report:
    description: Path of the preprocessing report.
    returned: success
    type: str
'''

import os
from traceback import format_exc

from ansible.module_utils.basic import AnsibleModule, missing_required_lib
from ansible.module_utils.common.text.converters import to_native

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, data
from ansible_collections.tabular.locl.plugins.module_utils.errors import LoclError


def main():
    module = AnsibleModule(
        argument_spec=dict(
            src=dict(type='path', required=True),
            label=dict(type='str', required=True),
            mode=dict(type='str', default='zscore', choices=['zscore', 'minmax']),
            schema_hint=dict(type='dict', default={}),
            dest=dict(type='path', required=True),
            report=dict(type='path'),
            folds_dest=dict(type='path'),
            k=dict(type='int', default=5),
            unlabeled_fraction=dict(type='float', default=0.9),
            seed=dict(type='int', default=0),
        ),
        supports_check_mode=True,
    )

    if not data.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=data.NUMPY_IMPORT_ERROR)
    if not data.HAS_PANDAS:
        module.fail_json(msg=missing_required_lib('pandas'), exception=data.PANDAS_IMPORT_ERROR)
    if not data.HAS_SKLEARN:
        module.fail_json(msg=missing_required_lib('scikit-learn'), exception=data.SKLEARN_IMPORT_ERROR)

    p = module.params
    report_path = p['report'] or p['dest'] + '.preprocess.json'

    try:
        table = data.load_csv(p['src'], p['schema_hint'])
        dataset = data.preprocess(table, p['label'], p['mode'])
        fingerprint = data.dataset_fingerprint(dataset)

        report = dict(dataset.report, src=p['src'], dataset_fingerprint=fingerprint)
        changed = artifacts.write_artifact(module, p['dest'], data.dump_dataset(dataset))
        changed |= artifacts.write_artifact(module, report_path, artifacts.dumps(report, indent=2) + '\n')
        outputs = [p['dest'], report_path]

        if p['folds_dest']:
            plan = data.make_folds(dataset, p['k'], p['unlabeled_fraction'], p['seed'])
            data.audit_leakage(plan)
            folds = dict(plan.to_dict(), dataset_fingerprint=fingerprint)
            changed |= artifacts.write_artifact(module, p['folds_dest'], artifacts.dumps(folds) + '\n')
            outputs.append(p['folds_dest'])

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_preprocess', outputs, dataset_fingerprint=fingerprint, seed=p['seed'])
        changed |= manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    for name in dataset.report['dropped']:
        module.warn('column %s is constant and was dropped' % name)
    module.log('locl_preprocess: %d rows, %d features from %s' % (dataset.n_rows, dataset.n_features, p['src']))

    module.exit_json(
        changed=changed,
        dataset_fingerprint=fingerprint,
        n_rows=dataset.n_rows,
        n_features=dataset.n_features,
        classes=list(dataset.classes),
        dropped=list(dataset.report['dropped']),
        report=report_path,
    )


if __name__ == '__main__':
    main()
