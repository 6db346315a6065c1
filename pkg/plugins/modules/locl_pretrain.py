#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_pretrain
short_description: Pretrain the twin autoencoders on unlabeled rows
description:
    - Orders and splits the features, then trains two denoising autoencoders with a
      cross-correlation objective on their embeddings, keeping the checkpoint with the
      lowest validation loss.
    - Writes the checkpoint, the resolved config next to it (C(<dest>.cfg)) and a
      JSON-lines training log.
    - A checkpoint already trained with the same data, rows and config is left untouched.
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
      - Fold plan; when set, only the unlabeled training rows of O(fold) are used.
    type: path
  fold:
    description:
      - Fold to pretrain for when O(folds) is set.
    type: int
    default: 0
  ordering:
    description:
      - Ordering file written by M(tabular.locl.locl_order) for the same dataset.
      - When set, its permutation and feature split are used instead of computing them, and
        O(ordering_variant) and O(overlap_fraction) do not apply.
    type: path
  dest:
    description:
      - Path of the checkpoint to write.
    type: path
    required: true
  log:
    description:
      - Path of the JSON-lines training log. Defaults to O(dest) with C(.jsonl) appended.
    type: path
  force:
    description:
      - Retrain even when the checkpoint is up to date.
    type: bool
    default: false
extends_documentation_fragment:
  - tabular.locl.train_config
'''

EXAMPLES = r'''
- name: Pretrain on fold 0 with a smaller embedding
  tabular.locl.locl_pretrain:
    dataset: /runs/diabetes/dataset.locl
    folds: /runs/diabetes/folds.json
    fold: 0
    latent_dim: 32
    dest: /runs/diabetes/fold0.ckpt

- name: Reuse an ordering computed once for fold 0
  tabular.locl.locl_pretrain:
    dataset: /runs/diabetes/dataset.locl
    folds: /runs/diabetes/folds.json
    fold: 0
    ordering: /runs/diabetes/fold0.order.json
    dest: /runs/diabetes/fold0.ckpt

- name: Replay a run from its saved config
  tabular.locl.locl_pretrain:
    dataset: /runs/diabetes/dataset.locl
    config_file: /runs/diabetes/fold0.ckpt.cfg
    dest: /runs/diabetes/fold0-replay.ckpt
'''

RETURN = r'''
best_epoch:
    description: Epoch of the restored checkpoint.
    returned: changed
    type: int
    sample: 41
epochs:
    description: Epochs run before stopping.
    returned: changed
    type: int
stopped_early:
    description: Whether early stopping ended the run.
    returned: changed
    type: bool
config:
    description: The resolved training configuration.
    returned: success
    type: dict
log:
    description: Path of the training log.
    returned: success
    type: str
'''

import os
from traceback import format_exc

from ansible.module_utils.basic import AnsibleModule, missing_required_lib
from ansible.module_utils.common.text.converters import to_native

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, config, pipeline
from ansible_collections.tabular.locl.plugins.module_utils.errors import LoclError


def describe_rows(fold):
    return 'every row' if fold is None else 'the unlabeled rows of fold %d' % fold


def checkpoint_run_key(path):
    if not os.path.exists(path):
        return None
    try:
        return pipeline.load_checkpoint(artifacts.read_artifact(path, 'checkpoint'))[1].get('run_key')
    except LoclError:
        return None


def main():
    argument_spec = config.train_config_argument_spec()
    argument_spec.update(
        dataset=dict(type='path', required=True),
        folds=dict(type='path'),
        fold=dict(type='int', default=0),
        ordering=dict(type='path'),
        dest=dict(type='path', required=True),
        log=dict(type='path'),
        force=dict(type='bool', default=False),
    )
    module = AnsibleModule(argument_spec=argument_spec, supports_check_mode=True)

    if not pipeline.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=pipeline.NUMPY_IMPORT_ERROR)

    p = module.params
    log_path = p['log'] or p['dest'] + '.jsonl'
    cfg_path = p['dest'] + '.cfg'
    result = dict(changed=False, log=log_path)

    try:
        cfg = config.resolve_module_config(module)
        result['config'] = cfg.to_dict()
        dataset, fingerprint = artifacts.read_dataset(p['dataset'])

        rows = None
        fold = None
        if p['folds']:
            plan = artifacts.read_fold_plan(p['folds'], fingerprint)
            fold = p['fold']
            rows = plan.partition(fold)[1]

        feature_order = split = None
        if p['ordering']:
            feature_order, split, ordering_fold = artifacts.read_ordering(p['ordering'], fingerprint,
                                                                          dataset.feature_names)
            if ordering_fold != fold:
                module.warn('ordering %s was computed on %s, pretraining uses %s'
                            % (p['ordering'], describe_rows(ordering_fold), describe_rows(fold)))

        key = artifacts.run_key(config=cfg.to_dict(), dataset=fingerprint, fold=fold,
                                folds=artifacts.file_sha256(p['folds']) if p['folds'] else None,
                                ordering=artifacts.file_sha256(p['ordering']) if p['ordering'] else None)
        if not p['force'] and checkpoint_run_key(p['dest']) == key:
            result['changed'] = artifacts.write_artifact(module, cfg_path, config.dump_config(cfg))
            module.exit_json(**result)

        if module.check_mode:
            result['changed'] = True
            module.exit_json(**result)

        log = artifacts.JsonlLog(log_path)
        trained = pipeline.pretrain(dataset, cfg, rows, on_event=log, feature_order=feature_order, split=split)
        extra = {'run_key': key, 'fold': fold, 'best_epoch': trained.best_epoch}

        artifacts.write_artifact(module, p['dest'], pipeline.save_checkpoint(trained.model, extra))
        artifacts.write_artifact(module, cfg_path, config.dump_config(cfg))
        log.flush(module)

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_pretrain', [p['dest'], cfg_path, log_path], config=cfg.to_dict(),
                        config_path=p['config_file'], dataset_fingerprint=fingerprint, seed=cfg.seed)
        manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.log('locl_pretrain: best epoch %s of %d' % (trained.best_epoch, len(trained.history)))
    result.update(
        changed=True,
        best_epoch=trained.best_epoch,
        epochs=len(trained.history),
        stopped_early=trained.stopped_early,
    )
    module.exit_json(**result)


if __name__ == '__main__':
    main()
