#include "chirplab/losses.hpp"

#include <cmath>
#include <string>

#include "chirplab/common.hpp"

namespace chirplab::losses {

namespace {

double stable_sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// log(1 + e^x) without overflow; equals x for large x, e^x for very negative x.
double softplus(double x) {
    if (x > 0.0) return x + std::log1p(std::exp(-x));
    return std::log1p(std::exp(x));
}

void check_pair(const Matrix& logits, const Matrix& labels, const char* op) {
    if (!logits.same_shape(labels)) {
        throw ValidationError(std::string(op) + ": logits are " + std::to_string(logits.rows) +
                              "x" + std::to_string(logits.cols) + " but labels are " +
                              std::to_string(labels.rows) + "x" + std::to_string(labels.cols));
    }
    if (logits.rows == 0 || logits.cols == 0) {
        throw ValidationError(std::string(op) + ": empty batch");
    }
    for (double y : labels.data) {
        if (y != 0.0 && y != 1.0) {
            throw ValidationError(std::string(op) + ": labels must be 0 or 1, got " +
                                  format_double(y));
        }
    }
}

}  // namespace

std::string loss_name(LossKind kind) {
    switch (kind) {
        case LossKind::Bce: return "bce";
        case LossKind::Asl: return "asl";
        case LossKind::SigmoidF1: return "sigmoidf1";
    }
    return "unknown";
}

LossResult bce_loss(const Matrix& logits, const Matrix& labels) {
    check_pair(logits, labels, "bce_loss");
    const double inv_n = 1.0 / static_cast<double>(logits.rows);
    LossResult result;
    result.grad_logits = Matrix(logits.rows, logits.cols);
    double total = 0.0;
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
        const double x = logits.data[i];
        const double y = labels.data[i];
        // max(x,0) - x*y + log(1 + e^-|x|): stable for |x| up to ~1e308.
        total += std::max(x, 0.0) - x * y + std::log1p(std::exp(-std::fabs(x)));
        result.grad_logits.data[i] = (stable_sigmoid(x) - y) * inv_n;
    }
    result.value = total * inv_n;
    return result;
}

LossResult asl_loss(const Matrix& logits, const Matrix& labels, const AslParams& params) {
    check_pair(logits, labels, "asl_loss");
    if (params.margin < 0.0 || params.margin >= 1.0) {
        throw ValidationError("asl_loss: margin must lie in [0,1), got " +
                              format_double(params.margin));
    }
    if (params.gamma_pos < 0.0 || params.gamma_neg < 0.0) {
        throw ValidationError("asl_loss: focusing exponents must be non-negative");
    }
    const double gp = params.gamma_pos;
    const double gn = params.gamma_neg;
    const double m = params.margin;
    const double inv_n = 1.0 / static_cast<double>(logits.rows);

    LossResult result;
    result.grad_logits = Matrix(logits.rows, logits.cols);
    double total = 0.0;
    for (std::size_t i = 0; i < logits.data.size(); ++i) {
        const double x = logits.data[i];
        const double p = stable_sigmoid(x);
        const double one_minus_p = stable_sigmoid(-x);
        const double log_p = -softplus(-x);

        if (labels.data[i] == 1.0) {
            const double focus = std::pow(one_minus_p, gp);
            total += -focus * log_p;
            // d/dx[-(1-p)^gp log p] = -( (1-p)^(gp+1) - gp * p * (1-p)^gp * log p )
            double grad = -(std::pow(one_minus_p, gp + 1.0));
            if (gp != 0.0) grad += gp * p * focus * log_p;
            result.grad_logits.data[i] = grad * inv_n;
        } else {
            const double pm = std::max(p - m, 0.0);
            if (pm == 0.0) {
                // Clamped branch: easy negative fully down-weighted; sub-gradient 0.
                continue;
            }
            const double one_minus_pm = one_minus_p + m;  // exact: 1-(p-m) = (1-p)+m
            const double log_1mpm = (m == 0.0) ? -softplus(x) : std::log(one_minus_pm);
            const double focus = std::pow(pm, gn);
            total += -focus * log_1mpm;
            // d/dx[-(pm)^gn log(1-pm)] with dp/dx = p(1-p):
            //   term1 = gn * pm^(gn-1) * log(1-pm) * p(1-p)
            //   term2 = pm^gn / (1-pm) * p(1-p); for m=0 this reduces to p^(gn+1)
            double term1 = 0.0;
            if (gn != 0.0) {
                term1 = gn * std::pow(pm, gn - 1.0) * log_1mpm * p * one_minus_p;
            }
            const double term2 = (m == 0.0) ? std::pow(p, gn + 1.0)
                                            : p * one_minus_p * focus / one_minus_pm;
            result.grad_logits.data[i] = -(term1 - term2) * inv_n;
        }
    }
    result.value = total * inv_n;
    return result;
}

LossResult sigmoidf1_loss(const Matrix& logits, const Matrix& labels, const SigmoidF1Params& params) {
    check_pair(logits, labels, "sigmoidf1_loss");
    if (!(params.beta > 0.0)) {
        throw ValidationError("sigmoidf1_loss: beta must be positive, got " +
                              format_double(params.beta));
    }
    bool any_positive = false;
    for (double y : labels.data) {
        if (y == 1.0) {
            any_positive = true;
            break;
        }
    }
    if (!any_positive) {
        throw ValidationError("sigmoidf1_loss: batch has no positive label; F1 is undefined");
    }

    const std::size_t n = logits.data.size();
    std::vector<double> s(n);
    double tp = 0.0, fp = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = stable_sigmoid(params.beta * (logits.data[i] + params.eta));
        const double y = labels.data[i];
        tp += s[i] * y;
        fp += s[i] * (1.0 - y);
        fn += (1.0 - s[i]) * y;
    }
    const double denom = 2.0 * tp + fn + fp;
    const double f1 = 2.0 * tp / denom;

    LossResult result;
    result.value = 1.0 - f1;
    result.grad_logits = Matrix(logits.rows, logits.cols);
    const double inv_d2 = 1.0 / (denom * denom);
    for (std::size_t i = 0; i < n; ++i) {
        const double y = labels.data[i];
        const double df_ds = 2.0 * (y * denom - tp) * inv_d2;
        result.grad_logits.data[i] = -df_ds * params.beta * s[i] * (1.0 - s[i]);
    }
    return result;
}

LossResult compute_loss(const LossSpec& spec, const Matrix& logits, const Matrix& labels) {
    switch (spec.kind) {
        case LossKind::Bce: return bce_loss(logits, labels);
        case LossKind::Asl: return asl_loss(logits, labels, spec.asl);
        case LossKind::SigmoidF1: return sigmoidf1_loss(logits, labels, spec.f1);
    }
    throw ValidationError("compute_loss: unknown loss kind");
}

}  // namespace chirplab::losses
