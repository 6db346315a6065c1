#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_probe
short_description: Score frozen embeddings with a linear probe
description:
    - Trains a multinomial logistic regression on the labeled training rows of each
      fold and reports its accuracy on the held-out rows.
    - Embeddings pretrained for one fold are only scored on that fold.
version_added: "1.0.0"
author:
    - tabular.locl contributors
options:
  embeddings:
    description:
      - Path of an embedding file written by M(tabular.locl.locl_embed).
    type: path
    required: true
  dataset:
    description:
      - Dataset artifact holding the labels.
    type: path
    required: true
  folds:
    description:
      - Fold plan written for the same dataset.
    type: path
    required: true
  fold:
    description:
      - Score only this fold. Ignored when the embeddings were pretrained for a fold.
    type: int
  reg:
    description:
      - L2 weight of the probe. When omitted it is selected by 3-fold CV on the labeled rows.
    type: float
  name:
    description:
      - Row name of the report.
    type: str
    default: LoCL
  dest:
    description:
      - Path of the report to write; name it C(*.report.json) for M(tabular.locl.locl_report).
    type: path
    required: true
notes:
  - Requires C(numpy) and C(scikit-learn) on the target host.
'''

EXAMPLES = r'''
- name: Score the fold 0 embeddings
  tabular.locl.locl_probe:
    embeddings: /runs/diabetes/fold0.emb
    dataset: /runs/diabetes/dataset.locl
    folds: /runs/diabetes/folds.json
    dest: /runs/diabetes/fold0.report.json
'''

RETURN = r'''
accuracies:
    description: Test accuracy of every scored fold.
    returned: success
    type: list
    sample: [0.6522]
mean:
    description: Mean accuracy.
    returned: success
    type: float
std:
    description: Population standard deviation of the accuracies.
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

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, data, evaluation, pipeline
from ansible_collections.tabular.locl.plugins.module_utils.errors import ArtifactError, LoclError


def main():
    module = AnsibleModule(
        argument_spec=dict(
            embeddings=dict(type='path', required=True),
            dataset=dict(type='path', required=True),
            folds=dict(type='path', required=True),
            fold=dict(type='int'),
            reg=dict(type='float'),
            name=dict(type='str', default='LoCL'),
            dest=dict(type='path', required=True),
        ),
        supports_check_mode=True,
    )

    if not evaluation.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=evaluation.NUMPY_IMPORT_ERROR)
    if not data.HAS_SKLEARN:
        module.fail_json(msg=missing_required_lib('scikit-learn'), exception=data.SKLEARN_IMPORT_ERROR)

    p = module.params
    try:
        dataset, fingerprint = artifacts.read_dataset(p['dataset'])
        plan = artifacts.read_fold_plan(p['folds'], fingerprint)
        embedding, info = pipeline.load_embeddings(artifacts.read_artifact(p['embeddings'], 'embeddings'))
        artifacts.check_fingerprint(info.get('dataset_fingerprint'), fingerprint, 'embeddings %s' % p['embeddings'])

        folds = None
        if info.get('fold') is not None:
            folds = [info['fold']]
        elif p['fold'] is not None:
            folds = [p['fold']]
        else:
            module.warn('embeddings were pretrained on every row; test rows of each fold were seen without labels')

        if sorted(embedding.row_ids.tolist()) != list(range(dataset.n_rows)):
            raise ArtifactError('embeddings %s do not cover the %d dataset rows' % (p['embeddings'], dataset.n_rows))
        Z = embedding.Z[embedding.row_ids.argsort()]
        outcomes = evaluation.probe_embeddings(Z, dataset.labels, plan, folds, p['reg'], plan.seed, dataset.n_classes)
        report = evaluation.EvalReport([o['accuracy'] for o in outcomes], info.get('config_fingerprint'),
                                       p['name'], outcomes)

        changed = artifacts.write_reports(module, p['dest'], 'Linear probe', [report],
                                          dataset_fingerprint=fingerprint)
        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_probe', [p['dest']], dataset_fingerprint=fingerprint, seed=plan.seed)
        changed |= manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.exit_json(changed=changed, accuracies=report.accuracies, mean=report.mean, std=report.std,
                     table=evaluation.format_table([report]))


if __name__ == '__main__':
    main()
