#ifndef CHIRPLAB_LOSSES_HPP
#define CHIRPLAB_LOSSES_HPP

#include <string>

#include "chirplab/matrix.hpp"

namespace chirplab::losses {

struct AslParams {
    double gamma_pos = 1.0;  // focusing exponent on positives
    double gamma_neg = 4.0;  // focusing exponent on negatives
    double margin = 0.05;    // probability shift m in [0,1); p_m = max(p - m, 0)
};

struct SigmoidF1Params {
    double beta = 1.0;  // slope; the sweep convention is S = -beta
    double eta = 0.0;   // offset; E = eta
};

/// Batch-mean loss value and its gradient with respect to the logits.
struct LossResult {
    double value = 0.0;
    Matrix grad_logits;
};

enum class LossKind { Bce, Asl, SigmoidF1 };

/// Config-file loss selection: kind plus whichever parameter block applies.
struct LossSpec {
    LossKind kind = LossKind::Bce;
    AslParams asl;
    SigmoidF1Params f1;
};

std::string loss_name(LossKind kind);

/// Mean over rows of the per-row class sums of stable binary cross-entropy
/// on logits. Gradient: (sigmoid(x) - y) / N.
LossResult bce_loss(const Matrix& logits, const Matrix& labels);

/// Asymmetric loss: -[y (1-p)^g+ log p + (1-y) p_m^g- log(1-p_m)] with
/// p_m = max(p - m, 0), batch-mean over rows. Sub-gradient 0 on the clamped
/// branch of the margin.
LossResult asl_loss(const Matrix& logits, const Matrix& labels, const AslParams& params);

/// 1 - F1~ where F1~ is built from sigmoid-relaxed confusion counts summed
/// over the whole batch. Rejects batches with no positive label.
LossResult sigmoidf1_loss(const Matrix& logits, const Matrix& labels, const SigmoidF1Params& params);

/// Dispatch on a LossSpec.
LossResult compute_loss(const LossSpec& spec, const Matrix& logits, const Matrix& labels);

}  // namespace chirplab::losses

#endif
