#include "odte/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "odte/random.hpp"

namespace odte {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double power_int(double base, int exponent) {
    double result = 1.0;
    for (int i = 0; i < exponent; ++i) result *= base;
    return result;
}

void validate_kernel(const KernelSpec& kernel) {
    if (kernel.kind != KernelKind::linear && !(kernel.gamma > 0.0)) {
        throw std::invalid_argument("svm: gamma must be positive");
    }
    if (kernel.kind == KernelKind::polynomial && kernel.degree < 1) {
        throw std::invalid_argument("svm: degree must be at least 1");
    }
}

void validate_training_inputs(const Matrix& X, const std::vector<int>& y,
                              const SvmParams& params) {
    if (X.rows == 0 || X.cols == 0) {
        throw std::invalid_argument("svm: empty training matrix");
    }
    if (y.size() != X.rows) {
        throw std::invalid_argument("svm: label count does not match row count");
    }
    if (!(params.C > 0.0)) {
        throw std::invalid_argument("svm: C must be positive");
    }
    if (params.max_iter < 1) {
        throw std::invalid_argument("svm: max_iter must be at least 1");
    }
    if (params.tol < 0.0) {
        throw std::invalid_argument("svm: tol must be positive");
    }
    validate_kernel(params.kernel);
    bool has_pos = false, has_neg = false;
    for (const int label : y) {
        if (label == 1) {
            has_pos = true;
        } else if (label == -1) {
            has_neg = true;
        } else {
            throw std::invalid_argument("svm: labels must be +1 or -1");
        }
    }
    if (!has_pos || !has_neg) {
        throw std::invalid_argument("svm: single-class input");
    }
    for (const double v : X.data) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("svm: non-finite feature value");
        }
    }
}

// Lazily filled kernel row cache for SMO.  Full rows are cached for problems
// with at most kCacheLimit rows; larger problems recompute on demand.
class KernelRows {
public:
    static constexpr std::size_t kCacheLimit = 2048;

    KernelRows(const Matrix& X, const KernelSpec& kernel)
        : X_(X), kernel_(kernel), cache_enabled_(X.rows <= kCacheLimit) {
        if (cache_enabled_) rows_.resize(X.rows);
        scratch_.resize(X.rows);
    }

    std::span<const double> row(std::size_t i) {
        if (cache_enabled_) {
            auto& cached = rows_[i];
            if (cached.empty()) {
                cached.resize(X_.rows);
                fill(i, cached.data());
            }
            return cached;
        }
        fill(i, scratch_.data());
        return scratch_;
    }

private:
    void fill(std::size_t i, double* out) {
        const auto xi = X_.row(i);
        for (std::size_t j = 0; j < X_.rows; ++j) {
            out[j] = kernel_eval(kernel_, xi, X_.row(j));
        }
    }

    const Matrix& X_;
    const KernelSpec& kernel_;
    bool cache_enabled_;
    std::vector<std::vector<double>> rows_;
    std::vector<double> scratch_;
};

}  // namespace

double kernel_eval(const KernelSpec& kernel, std::span<const double> x,
                   std::span<const double> z) {
    if (x.size() != z.size()) {
        throw std::invalid_argument("kernel_eval: dimension mismatch");
    }
    switch (kernel.kind) {
        case KernelKind::linear:
            return dot(x, z);
        case KernelKind::polynomial:
            return power_int(kernel.gamma * dot(x, z) + kernel.coef0, kernel.degree);
        case KernelKind::rbf: {
            double sq = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - z[i];
                sq += d * d;
            }
            return std::exp(-kernel.gamma * sq);
        }
    }
    throw std::logic_error("kernel_eval: unknown kernel kind");
}

SvmModel SvmModel::linear(std::vector<double> weights, double bias) {
    SvmModel model;
    model.is_linear_ = true;
    model.weights_ = std::move(weights);
    model.bias_ = bias;
    return model;
}

SvmModel SvmModel::kernelized(KernelSpec kernel, Matrix support_rows,
                              std::vector<double> alphas_signed, double bias) {
    if (support_rows.rows != alphas_signed.size()) {
        throw std::invalid_argument("svm: support row / alpha count mismatch");
    }
    SvmModel model;
    model.is_linear_ = false;
    model.kernel_ = kernel;
    model.support_rows_ = std::move(support_rows);
    model.alphas_signed_ = std::move(alphas_signed);
    model.bias_ = bias;
    return model;
}

std::size_t SvmModel::input_dimension() const {
    return is_linear_ ? weights_.size() : support_rows_.cols;
}

double SvmModel::decision_value(std::span<const double> x) const {
    if (is_linear_) {
        if (x.size() != weights_.size()) {
            throw std::invalid_argument("svm: dimension mismatch in decision_value");
        }
        return dot(weights_, x) + bias_;
    }
    if (support_rows_.rows > 0 && x.size() != support_rows_.cols) {
        throw std::invalid_argument("svm: dimension mismatch in decision_value");
    }
    double value = bias_;
    for (std::size_t s = 0; s < support_rows_.rows; ++s) {
        value += alphas_signed_[s] * kernel_eval(kernel_, support_rows_.row(s), x);
    }
    return value;
}

SvmModel train_linear_svm(const Matrix& X, const std::vector<int>& y,
                          const SvmParams& params) {
    validate_training_inputs(X, y, params);
    const double tol = params.tol > 0.0 ? params.tol : kLinearTolDefault;
    const std::size_t t = X.rows;
    const std::size_t n = X.cols;
    const double C = params.C;

    // Squared norms of the augmented rows (the +1 accounts for the constant
    // bias feature); these are the diagonal of the dual Hessian.
    std::vector<double> q_diag(t);
    for (std::size_t i = 0; i < t; ++i) {
        q_diag[i] = dot(X.row(i), X.row(i)) + 1.0;
    }

    std::vector<double> alpha(t, 0.0);
    std::vector<double> w(n + 1, 0.0);  // last entry is the bias coordinate
    std::vector<std::size_t> active(t);
    std::iota(active.begin(), active.end(), std::size_t{0});
    Rng rng(params.seed);

    // Coordinate descent with shrinking: coordinates stuck at a box bound
    // whose gradient lies beyond the previous epoch's violation range are
    // dropped from the pass.  The stopping decision uses the maximal
    // projected-gradient violation of an epoch; apparent convergence on a
    // shrunken set is confirmed by a full pass before stopping.
    SvmDiagnostics diag;
    diag.converged = false;
    std::size_t epoch = 0;
    double violation = std::numeric_limits<double>::infinity();
    double bound_up = std::numeric_limits<double>::infinity();
    double bound_low = -std::numeric_limits<double>::infinity();
    for (; epoch < params.max_iter; ++epoch) {
        rng.shuffle(active);
        double pg_max = 0.0;  // most positive violation this epoch
        double pg_min = 0.0;  // most negative violation this epoch
        for (std::size_t s = 0; s < active.size();) {
            const std::size_t i = active[s];
            const double* xi = X.row(i).data();
            const double yi = double(y[i]);
            double wx = w[n];  // constant bias feature
            for (std::size_t c = 0; c < n; ++c) wx += w[c] * xi[c];
            const double g = yi * wx - 1.0;

            // Projected gradient: zero when the box constraint is active and
            // pushes outward; shrink coordinates pushing well past the bound.
            double pg = g;
            if (alpha[i] <= 0.0) {
                if (g > bound_up) {
                    active[s] = active.back();
                    active.pop_back();
                    continue;
                }
                if (g > 0.0) pg = 0.0;
            } else if (alpha[i] >= C) {
                if (g < bound_low) {
                    active[s] = active.back();
                    active.pop_back();
                    continue;
                }
                if (g < 0.0) pg = 0.0;
            }
            pg_max = std::max(pg_max, pg);
            pg_min = std::min(pg_min, pg);
            if (pg != 0.0) {
                const double old = alpha[i];
                alpha[i] = std::min(std::max(old - g / q_diag[i], 0.0), C);
                const double delta = (alpha[i] - old) * yi;
                if (delta != 0.0) {
                    for (std::size_t c = 0; c < n; ++c) w[c] += delta * xi[c];
                    w[n] += delta;
                }
            }
            ++s;
        }
        violation = std::max(pg_max, -pg_min);
        if (violation < tol) {
            if (active.size() == t) {
                diag.converged = true;
                ++epoch;
                break;
            }
            // Converged on the shrunken set: re-activate everything and
            // verify on a full pass.
            active.resize(t);
            std::iota(active.begin(), active.end(), std::size_t{0});
            bound_up = std::numeric_limits<double>::infinity();
            bound_low = -std::numeric_limits<double>::infinity();
        } else {
            bound_up = pg_max <= 0.0 ? std::numeric_limits<double>::infinity() : pg_max;
            bound_low = pg_min >= 0.0 ? -std::numeric_limits<double>::infinity() : pg_min;
        }
    }
    diag.iterations = epoch;
    diag.max_violation = violation;

    SvmModel model;
    model.is_linear_ = true;
    model.weights_.assign(w.begin(), w.begin() + std::ptrdiff_t(n));
    model.bias_ = w[n];
    model.alphas_ = std::move(alpha);
    model.diagnostics_ = diag;
    return model;
}

SvmModel train_kernel_svm(const Matrix& X, const std::vector<int>& y,
                          const SvmParams& params) {
    validate_training_inputs(X, y, params);
    const double tol = params.tol > 0.0 ? params.tol : kKernelTolDefault;
    const std::size_t t = X.rows;
    const double C = params.C;
    constexpr double kTau = 1e-12;

    KernelRows kernel_rows(X, params.kernel);
    std::vector<double> alpha(t, 0.0);
    std::vector<double> grad(t, -1.0);  // gradient of ½αᵀQα − eᵀα at α = 0

    SvmDiagnostics diag;
    diag.converged = false;
    std::size_t updates = 0;
    double gap = std::numeric_limits<double>::infinity();
    double m_up = 0.0, m_low = 0.0;
    while (true) {
        // Maximal violating pair: i maximizes −yᵢGᵢ over I_up, j minimizes
        // −yⱼGⱼ over I_low.
        std::ptrdiff_t i = -1, j = -1;
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < t; ++s) {
            const double v = -double(y[s]) * grad[s];
            const bool in_up = (y[s] == 1 && alpha[s] < C) || (y[s] == -1 && alpha[s] > 0.0);
            const bool in_low = (y[s] == 1 && alpha[s] > 0.0) || (y[s] == -1 && alpha[s] < C);
            if (in_up && v > m_up) {
                m_up = v;
                i = std::ptrdiff_t(s);
            }
            if (in_low && v < m_low) {
                m_low = v;
                j = std::ptrdiff_t(s);
            }
        }
        gap = m_up - m_low;
        if (i < 0 || j < 0 || gap <= tol) {
            diag.converged = true;
            break;
        }
        if (updates >= params.max_iter) break;

        const auto ki = kernel_rows.row(std::size_t(i));
        const auto kj = kernel_rows.row(std::size_t(j));
        const double yi = double(y[std::size_t(i)]);
        const double yj = double(y[std::size_t(j)]);
        // Curvature along the feasible direction is K_ii + K_jj - 2K_ij for
        // either label configuration: the direction flips with the labels and
        // the sign cancels.
        double quad = ki[std::size_t(i)] + kj[std::size_t(j)] - 2.0 * ki[std::size_t(j)];
        if (quad <= 0.0) quad = kTau;

        const double old_i = alpha[std::size_t(i)];
        const double old_j = alpha[std::size_t(j)];
        double& ai = alpha[std::size_t(i)];
        double& aj = alpha[std::size_t(j)];
        if (yi != yj) {
            const double delta = (-grad[std::size_t(i)] - grad[std::size_t(j)]) / quad;
            const double diff = ai - aj;
            ai += delta;
            aj += delta;
            if (diff > 0.0) {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = diff;
                }
                if (ai > C) {
                    ai = C;
                    aj = C - diff;
                }
            } else {
                if (ai < 0.0) {
                    ai = 0.0;
                    aj = -diff;
                }
                if (aj > C) {
                    aj = C;
                    ai = C + diff;
                }
            }
        } else {
            const double delta = (grad[std::size_t(i)] - grad[std::size_t(j)]) / quad;
            const double sum = ai + aj;
            ai -= delta;
            aj += delta;
            if (sum > C) {
                if (ai > C) {
                    ai = C;
                    aj = sum - C;
                }
                if (aj > C) {
                    aj = C;
                    ai = sum - C;
                }
            } else {
                if (aj < 0.0) {
                    aj = 0.0;
                    ai = sum;
                }
                if (ai < 0.0) {
                    ai = 0.0;
                    aj = sum;
                }
            }
        }

        const double di = (ai - old_i) * yi;
        const double dj = (aj - old_j) * yj;
        for (std::size_t s = 0; s < t; ++s) {
            grad[s] += double(y[s]) * (di * ki[s] + dj * kj[s]);
        }
        ++updates;
    }
    diag.iterations = updates;
    diag.max_violation = gap;

    // Bias from the KKT conditions: for free support vectors b = −yᵢGᵢ, so the
    // midpoint of the violating-pair bounds serves both the converged and the
    // capped case.
    const double bias = (m_up + m_low) / 2.0;

    std::size_t n_support = 0;
    for (const double a : alpha) {
        if (a > 0.0) ++n_support;
    }
    Matrix support(n_support, X.cols);
    std::vector<double> alphas_signed;
    alphas_signed.reserve(n_support);
    std::size_t out = 0;
    for (std::size_t s = 0; s < t; ++s) {
        if (alpha[s] > 0.0) {
            std::copy_n(X.row(s).data(), X.cols, support.row(out).data());
            alphas_signed.push_back(alpha[s] * double(y[s]));
            ++out;
        }
    }

    SvmModel model;
    model.is_linear_ = false;
    model.kernel_ = params.kernel;
    model.support_rows_ = std::move(support);
    model.alphas_signed_ = std::move(alphas_signed);
    model.bias_ = bias;
    model.alphas_ = std::move(alpha);
    model.diagnostics_ = diag;
    return model;
}

}  // namespace odte
