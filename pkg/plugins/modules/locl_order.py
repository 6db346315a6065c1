#!/usr/bin/python
# -*- coding: utf-8 -*-

# Copyright: Contributors to the tabular.locl collection
# GNU General Public License v3.0+ (see COPYING or https://www.gnu.org/licenses/gpl-3.0.txt)

from __future__ import absolute_import, division, print_function
__metaclass__ = type


DOCUMENTATION = r'''
---
module: locl_order
short_description: Compute the feature ordering and twin split of a dataset
description:
    - Orders the features of a dataset artifact so correlated features are adjacent
      and cuts the ordering into the two branch subsets.
    - With O(folds) the ordering is computed on the unlabeled training rows of O(fold) only.
version_added: "1.0.0"
author:
    - tabular.locl contributors
options:
  dataset:
    description:
      - Path of a dataset artifact written by M(tabular.locl.locl_preprocess).
    type: path
    required: true
  variant:
    description:
      - Ordering to compute. V(mst) is the correlation tree walk, the others are ablation orderings.
    type: str
    choices: [ mst, random, original, interleaved ]
    default: mst
  overlap_fraction:
    description:
      - Share of the features given to both subsets, in [0, 0.5].
    type: float
    default: 0.0
  seed:
    description:
      - Seed of the V(random) ordering.
    type: int
    default: 0
  folds:
    description:
      - Fold plan written by M(tabular.locl.locl_preprocess).
    type: path
  fold:
    description:
      - Fold whose unlabeled rows are used when O(folds) is set.
    type: int
    default: 0
  dest:
    description:
      - Path of the ordering JSON to write.
    type: path
    required: true
'''

EXAMPLES = r'''
- name: Correlation ordering of the whole dataset
  tabular.locl.locl_order:
    dataset: /runs/diabetes/dataset.locl
    dest: /runs/diabetes/ordering.json

- name: Interleaved ablation ordering
  tabular.locl.locl_order:
    dataset: /runs/diabetes/dataset.locl
    variant: interleaved
    dest: /runs/diabetes/ordering-interleaved.json
'''

RETURN = r'''
permutation:
    description: Feature indices in visiting order.
    returned: success
    type: list
    sample: [0, 2, 4, 1, 3]
subset1:
    description: Feature indices fed to the first branch.
    returned: success
    type: list
subset2:
    description: Feature indices fed to the second branch.
    returned: success
    type: list
adjacency_score:
    description: Mean absolute correlation of consecutive features in the ordering.
    returned: success
    type: float
'''

import os
from traceback import format_exc

from ansible.module_utils.basic import AnsibleModule, missing_required_lib
from ansible.module_utils.common.text.converters import to_native

from ansible_collections.tabular.locl.plugins.module_utils import artifacts, ordering
from ansible_collections.tabular.locl.plugins.module_utils.errors import LoclError


def main():
    module = AnsibleModule(
        argument_spec=dict(
            dataset=dict(type='path', required=True),
            variant=dict(type='str', default=ordering.MST, choices=list(ordering.VARIANTS)),
            overlap_fraction=dict(type='float', default=0.0),
            seed=dict(type='int', default=0),
            folds=dict(type='path'),
            fold=dict(type='int', default=0),
            dest=dict(type='path', required=True),
        ),
        supports_check_mode=True,
    )

    if not ordering.HAS_NUMPY:
        module.fail_json(msg=missing_required_lib('numpy'), exception=ordering.NUMPY_IMPORT_ERROR)

    p = module.params
    try:
        dataset, fingerprint = artifacts.read_dataset(p['dataset'])
        X = dataset.X
        if p['folds']:
            plan = artifacts.read_fold_plan(p['folds'], fingerprint)
            X = X[plan.partition(p['fold'])[1]]

        result = ordering.order_features(X, p['variant'], p['seed'])
        split = ordering.split_features(result, p['overlap_fraction'])
        score = ordering.adjacency_score(result, ordering.pearson_matrix(X))

        document = {
            'dataset_fingerprint': fingerprint,
            'fold': p['fold'] if p['folds'] else None,
            'feature_names': list(dataset.feature_names),
            'ordering': result.to_dict(),
            'split': split.to_dict(),
            'adjacency_score': score,
        }
        changed = artifacts.write_artifact(module, p['dest'], artifacts.dumps(document, indent=2) + '\n')

        manifest = artifacts.RunManifest.for_directory(os.path.dirname(p['dest']))
        manifest.record('locl_order', [p['dest']], dataset_fingerprint=fingerprint, seed=p['seed'])
        changed |= manifest.save(module)
    except LoclError as e:
        module.fail_json(msg=to_native(e), exception=format_exc())

    module.exit_json(
        changed=changed,
        permutation=list(result.permutation),
        subset1=list(split.subset1),
        subset2=list(split.subset2),
        adjacency_score=score,
    )


if __name__ == '__main__':
    main()
