#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_ablate
short_description: Compare encoder and feature ordering variants
description:
    - Runs the cross-validated protocol for the convolutional model with correlation
      ordering and for four variants, each changing one factor, on one shared fold plan.
    - "The variants are: dense layers instead of convolutions, random ordering,
      original column order and interleaved order."
version_added: "1.0.0"
author:
    - tabular.locl contributors
options:
  dataset:
    description:
      - Path of a dataset artifact.
    type: path
    required: true
  folds:
    description:
      - Fold plan shared by all variants. When omitted a plan with O(k) folds is drawn from O(seed).
    type: path
  k:
    description:
      - Number of folds when no O(folds) plan is given.
    type: int
    default: 5
  fold_local_stats:
    description:
      - Recompute the normalization of numeric features from the training rows of each fold.
    type: bool
    default: false
  dest:
    description:
      - Path of the report to write, conventionally C(*.report.json).
    type: path
    required: true
  log:
    description:
      - JSON-lines training log of every variant. Defaults to O(dest) with C(.jsonl) appended.
    type: path
  force:
    description:
      - Rerun even when the report is up to date.
    type: bool
    default: false
extends_documentation_fragment:
  - tabular.locl.train_config
'''

EXAMPLES = r'''
- name: Ablation table for the wall-following data
  tabular.locl.locl_ablate:
    dataset: /runs/wall/dataset.locl
    folds: /runs/wall/folds.json
    dest: /runs/wall/ablation.report.json
'''

RETURN = r'''
variants:
    description: Mean and standard deviation per variant, in table order.
    returned: success
    type: list
    elements: dict
    sample: [{"name": "LoCL", "mean": 0.8254, "std": 0.012}]
table:
    description: The report rendered as a text table.
    returned: success
    type: str
'''

import os
from traceback import format_exc

from ansible.module_utils.basic import AnsibleModule, missing_required_lib
from ansible.module_utils.common.text.converters import to_native

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, config, data, evaluation
from ansible_collections.tabular.locl.plugins.module_utils.errors import LoclError


def summarize(reports):
    return [dict(name=r.name, mean=r.mean, std=r.std) for r in reports]


def main():
    argument_spec = config.train_config_argument_spec()
    argument_spec.update(
        dataset=dict(type='path', required=True),
        folds=dict(type='path'),
        k=dict(type='int', default=5),
        fold_local_stats=dict(type='bool', default=False),
        dest=dict(type='path', required=True),
        log=dict(type='path'),
        force=dict(type='bool', default=False),
    )
    module = AnsibleModule(argument_spec=argument_spec, supports_check_mode=True)

    if not evaluation.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=evaluation.NUMPY_IMPORT_ERROR)
    if not data.HAS_SKLEARN:
        module.fail_json(msg=missing_required_lib('scikit-learn'), exception=data.SKLEARN_IMPORT_ERROR)

    p = module.params
    log_path = p['log'] or p['dest'] + '.jsonl'

    try:
        cfg = config.resolve_module_config(module)
        dataset, fingerprint = artifacts.read_dataset(p['dataset'])
        if p['folds']:
            plan = artifacts.read_fold_plan(p['folds'], fingerprint)
        else:
            plan = data.make_folds(dataset, p['k'], seed=cfg.seed)

        key = artifacts.run_key(command='locl_ablate', config=cfg.to_dict(), dataset=fingerprint,
                                plan=artifacts.sha256(artifacts.dumps(plan.to_dict())),
                                fold_local_stats=p['fold_local_stats'])
        if not p['force'] and artifacts.is_current(p['dest'], key):
            reports = [evaluation.EvalReport.from_dict(r) for r in artifacts.load_json(p['dest'])['reports']]
            module.exit_json(changed=False, variants=summarize(reports), table=evaluation.format_table(reports))
        if module.check_mode:
            module.exit_json(changed=True)

        log = artifacts.JsonlLog(log_path)
        reports = evaluation.run_ablations(dataset, cfg, plan.k, cfg.seed, plan=plan,
                                           fold_local_stats=p['fold_local_stats'],
                                           workers=config.worker_count(), on_event=log)
        artifacts.write_reports(module, p['dest'], 'Ablation', reports,
                                run_key=key, dataset_fingerprint=fingerprint, config=cfg.to_dict())
        log.flush(module)

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_ablate', [p['dest'], log_path], config=cfg.to_dict(), config_path=p['config_file'],
                        dataset_fingerprint=fingerprint, seed=cfg.seed)
        manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.exit_json(changed=True, variants=summarize(reports), table=evaluation.format_table(reports))


if __name__ == '__main__':
    main()
