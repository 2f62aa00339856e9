#pragma once

#include <vector>

#include "mectrust/manifest.hpp"
#include "mectrust/trust_model.hpp"

namespace mectrust {

enum class BaselineKind { global, local };

struct GlobalBaseline {
  TrustModel model;
  // One round per training record shipped to the cloud.
  long long rounds = 0;
};

// GLB-TBM: a single soft-margin SVM over every node's pooled training set.
GlobalBaseline train_global(const PartitionManifest& manifest, const SvmParams& svm, double tol,
                            int max_epochs = 100000);

// LO-TBM: one independent SVM per node. Nodes without training data get the
// zero model. No cross-node communication.
std::vector<TrustModel> train_local(const PartitionManifest& manifest, const SvmParams& svm, double tol,
                                    int max_epochs = 100000, int workers = 1);

}  // namespace mectrust
