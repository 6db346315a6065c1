#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_protocol
short_description: Run the cross-validated pretrain and probe protocol
description:
    - For every fold, pretrains on the unlabeled share of the training rows, embeds all
      rows, trains a linear probe on the labeled share and scores the held-out fold.
    - Reports mean and standard deviation of the fold accuracies.
    - A report already produced with the same inputs is left untouched.
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
      - Fold plan to use. When omitted a plan with O(k) folds is drawn from O(seed).
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
  search_reg:
    description:
      - Select the probe L2 weight by CV on the labeled rows instead of using C(0.001).
    type: bool
    default: true
  name:
    description:
      - Row name of the report.
    type: str
    default: LoCL
  dest:
    description:
      - Path of the report to write, conventionally C(*.report.json).
    type: path
    required: true
  log:
    description:
      - JSON-lines training log of all folds. Defaults to O(dest) with C(.jsonl) appended.
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
- name: Five-fold protocol on the diabetes data
  tabular.locl.locl_protocol:
    dataset: /runs/diabetes/dataset.locl
    folds: /runs/diabetes/folds.json
    latent_dim: 64
    dest: /runs/diabetes/protocol.report.json
  environment:
    LOCL_WORKERS: 5
'''

RETURN = r'''
accuracies:
    description: Test accuracy per fold.
    returned: success
    type: list
    sample: [0.6609, 0.6087, 0.6739, 0.6, 0.6696]
mean:
    description: Mean fold accuracy.
    returned: success
    type: float
std:
    description: Population standard deviation of the fold accuracies.
    returned: success
    type: float
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


def main():
    argument_spec = config.train_config_argument_spec()
    argument_spec.update(
        dataset=dict(type='path', required=True),
        folds=dict(type='path'),
        k=dict(type='int', default=5),
        fold_local_stats=dict(type='bool', default=False),
        search_reg=dict(type='bool', default=True),
        name=dict(type='str', default='LoCL'),
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

        key = artifacts.run_key(command='locl_protocol', config=cfg.to_dict(), dataset=fingerprint,
                                plan=artifacts.sha256(artifacts.dumps(plan.to_dict())),
                                fold_local_stats=p['fold_local_stats'], search_reg=p['search_reg'], name=p['name'])
        if not p['force'] and artifacts.is_current(p['dest'], key):
            report = evaluation.EvalReport.from_dict(artifacts.load_json(p['dest'])['reports'][0])
            module.exit_json(changed=False, accuracies=report.accuracies, mean=report.mean, std=report.std,
                             table=evaluation.format_table([report]))
        if module.check_mode:
            module.exit_json(changed=True)

        log = artifacts.JsonlLog(log_path)
        report = evaluation.run_protocol(dataset, cfg, seed=cfg.seed, plan=plan,
                                         fold_local_stats=p['fold_local_stats'], search_reg=p['search_reg'],
                                         workers=config.worker_count(), on_event=log, name=p['name'])
        artifacts.write_reports(module, p['dest'], 'Cross-validated linear probe', [report],
                                run_key=key, dataset_fingerprint=fingerprint, config=cfg.to_dict())
        log.flush(module)

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_protocol', [p['dest'], log_path], config=cfg.to_dict(), config_path=p['config_file'],
                        dataset_fingerprint=fingerprint, seed=cfg.seed)
        manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.log('locl_protocol: %s %.4f +- %.4f' % (report.name, report.mean, report.std))
    module.exit_json(changed=True, accuracies=report.accuracies, mean=report.mean, std=report.std,
                     table=evaluation.format_table([report]))


if __name__ == '__main__':
    main()
