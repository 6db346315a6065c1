#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_sweep
short_description: Select alpha and kernel size by cross-validation
description:
    - Runs the cross-validated protocol for every combination of O(alphas) and O(kernels)
      on one shared fold plan and reports the combination with the best mean accuracy.
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
      - Fold plan shared by all cells. When omitted a plan with O(k) folds is drawn from O(seed).
    type: path
  k:
    description:
      - Number of folds when no O(folds) plan is given.
    type: int
    default: 5
  alphas:
    description:
      - Reconstruction weights to try.
    type: list
    elements: float
    default: [0.1, 0.5, 1.0, 2.0, 5.0]
  kernels:
    description:
      - Kernel sizes to try. Ignored for dense encoders.
    type: list
    elements: int
    default: [3, 5, 7]
  dest:
    description:
      - Path of the report to write, conventionally C(*.report.json).
    type: path
    required: true
  log:
    description:
      - JSON-lines training log of every cell. Defaults to O(dest) with C(.jsonl) appended.
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
- name: Sweep alpha only
  tabular.locl.locl_sweep:
    dataset: /runs/diabetes/dataset.locl
    alphas: [0.5, 1, 2]
    kernels: [3]
    dest: /runs/diabetes/sweep.report.json
'''

RETURN = r'''
best:
    description: The winning cell.
    returned: success
    type: dict
    sample: {"alpha": 1.0, "kernel_size": 3, "mean": 0.6438, "std": 0.037}
table:
    description: Every cell rendered as a text table.
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
        alphas=dict(type='list', elements='float', default=list(evaluation.ALPHA_GRID)),
        kernels=dict(type='list', elements='int', default=list(evaluation.KERNEL_GRID)),
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

        key = artifacts.run_key(command='locl_sweep', config=cfg.to_dict(), dataset=fingerprint,
                                plan=artifacts.sha256(artifacts.dumps(plan.to_dict())),
                                alphas=p['alphas'], kernels=p['kernels'])
        if not p['force'] and artifacts.is_current(p['dest'], key):
            document = artifacts.load_json(p['dest'])
            reports = [evaluation.EvalReport.from_dict(r) for r in document['reports']]
            module.exit_json(changed=False, best=document['best'], table=evaluation.format_table(reports))
        if module.check_mode:
            module.exit_json(changed=True)

        log = artifacts.JsonlLog(log_path)
        reports, best = evaluation.run_sweep(dataset, cfg, p['alphas'], p['kernels'], plan.k, cfg.seed, plan=plan,
                                             workers=config.worker_count(), on_event=log)
        winner = dict(best.params, mean=best.mean, std=best.std)
        artifacts.write_reports(module, p['dest'], 'Hyper-parameter sweep', reports,
                                run_key=key, dataset_fingerprint=fingerprint, config=cfg.to_dict(), best=winner)
        log.flush(module)

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_sweep', [p['dest'], log_path], config=cfg.to_dict(), config_path=p['config_file'],
                        dataset_fingerprint=fingerprint, seed=cfg.seed)
        manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.log('locl_sweep: best alpha=%g kernel_size=%d' % (winner['alpha'], winner['kernel_size']))
    module.exit_json(changed=True, best=winner, table=evaluation.format_table(reports))


if __name__ == '__main__':
    main()
