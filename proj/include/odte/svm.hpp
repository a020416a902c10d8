#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "odte/matrix.hpp"

namespace odte {

enum class KernelKind { linear, polynomial, rbf };

struct KernelSpec {
    KernelKind kind = KernelKind::linear;
    double gamma = 1.0;  // poly/rbf
    int degree = 3;      // poly
    double coef0 = 0.0;  // poly
};

double kernel_eval(const KernelSpec& kernel, std::span<const double> x,
                   std::span<const double> z);

struct SvmParams {
    double C = 1.0;
    KernelSpec kernel;
    std::size_t max_iter = 100000;  // epochs (linear) / pair updates (kernel)
    double tol = 0.0;               // 0 → solver default: 1e-4 linear, 1e-3 kernel
    std::uint64_t seed = 0;
};

inline constexpr double kLinearTolDefault = 1e-4;
inline constexpr double kKernelTolDefault = 1e-3;

struct SvmDiagnostics {
    std::size_t iterations = 0;
    bool converged = true;
    double max_violation = 0.0;  // final stopping-criterion value
};

// A trained binary decision function.  Linear models store weights and bias
// (f(x) = w·x + b); kernel models store the support expansion
// (f(x) = Σ αᵢyᵢ K(sᵢ, x) + b).  Immutable once trained.
class SvmModel {
public:
    SvmModel() = default;

    static SvmModel linear(std::vector<double> weights, double bias);
    static SvmModel kernelized(KernelSpec kernel, Matrix support_rows,
                               std::vector<double> alphas_signed, double bias);

    bool is_linear() const { return is_linear_; }
    double decision_value(std::span<const double> x) const;

    const std::vector<double>& weights() const { return weights_; }
    double bias() const { return bias_; }
    const Matrix& support_rows() const { return support_rows_; }
    const std::vector<double>& alphas_signed() const { return alphas_signed_; }
    const KernelSpec& kernel() const { return kernel_; }

    // Raw dual variables over the training rows (diagnostic; not serialized).
    const std::vector<double>& alphas() const { return alphas_; }
    const SvmDiagnostics& diagnostics() const { return diagnostics_; }

    std::size_t input_dimension() const;

private:
    friend SvmModel train_linear_svm(const Matrix&, const std::vector<int>&,
                                     const SvmParams&);
    friend SvmModel train_kernel_svm(const Matrix&, const std::vector<int>&,
                                     const SvmParams&);

    bool is_linear_ = true;
    std::vector<double> weights_;
    double bias_ = 0.0;
    Matrix support_rows_;
    std::vector<double> alphas_signed_;
    KernelSpec kernel_;
    std::vector<double> alphas_;
    SvmDiagnostics diagnostics_;
};

// Trains a soft-margin linear SVM by dual coordinate descent on the L1-hinge
// dual with randomized epoch permutations.  The bias is handled by augmenting
// each row with a constant 1 (regularized bias), which keeps the dual purely
// box-constrained.  y entries must be ±1 with both labels present.
SvmModel train_linear_svm(const Matrix& X, const std::vector<int>& y,
                          const SvmParams& params);

// Trains a kernel SVM by SMO with maximal-violating-pair working-set
// selection on the standard equality-constrained dual.
SvmModel train_kernel_svm(const Matrix& X, const std::vector<int>& y,
                          const SvmParams& params);

}  // namespace odte
