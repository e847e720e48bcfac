#pragma once

#include <Eigen/Cholesky>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bsvm/types.hpp"

namespace bsvm {

enum class KernelFamily {
  Exponential,         // exp(-||x - x'|| / theta^2), the "RBF" with an unsquared distance
  SquaredExponential,  // exp(-||x - x'||^2 / (2 theta^2))
  Linear,              // <x, x'>
  WeightedSum,         // sum_j gamma_j k_j(x, x', theta_j)
};

std::string_view to_string(KernelFamily family);
KernelFamily kernel_family_from_string(std::string_view name);

struct KernelComponent {
  KernelFamily family = KernelFamily::Exponential;
  double theta = 1.0;  // length scale; unused by Linear
  double gamma = 1.0;  // weight; fixed at 1 outside a weighted sum

  bool operator==(const KernelComponent &) const = default;
};

struct KernelConfig {
  KernelFamily family = KernelFamily::Exponential;
  // Exactly one entry unless family == WeightedSum.
  std::vector<KernelComponent> components{KernelComponent{}};
  // Initial diagonal jitter for K_mm, relative to mean(diag K_mm).
  double jitter = 1e-8;

  static KernelConfig exponential(double theta);
  static KernelConfig squared_exponential(double theta);
  static KernelConfig linear();
  static KernelConfig weighted_sum(std::vector<KernelComponent> components);

  /// Throws InputError on a violated invariant.
  void validate() const;

  bool operator==(const KernelConfig &) const = default;
};

/// Identifies one differentiable hyperparameter of a KernelConfig.
struct HyperParam {
  enum class Kind { Theta, Gamma };
  Kind kind = Kind::Theta;
  std::size_t component = 0;

  bool operator==(const HyperParam &) const = default;
};

std::string to_string(const HyperParam &which);

/// All hyperparameters the kernel depends on, in a stable order.
std::vector<HyperParam> hyperparameters(const KernelConfig &cfg);

/// Throws InputError when `which` does not name a hyperparameter of cfg.
double hyperparameter_value(const KernelConfig &cfg, const HyperParam &which);
void set_hyperparameter(KernelConfig &cfg, const HyperParam &which, double value);

double eval_kernel(std::span<const double> x1, std::span<const double> x2,
                   const KernelConfig &cfg);

/// Dense k(A_i, B_j) for row-major inputs; rows are assembled independently.
Matrix cross_kernel(const RowMatrix &a, const RowMatrix &b, const KernelConfig &cfg);

/// diag k(A_i, A_i) without forming the full Gram matrix.
Vector kernel_diag(const RowMatrix &a, const KernelConfig &cfg);

struct GramMatrices {
  Matrix K_mm;         // with jitter on the diagonal
  Matrix K_nm;         // n x m
  Vector Ktilde_diag;  // diag(K_nn - K_nm K_mm^{-1} K_mn), clamped at 0
  std::vector<bool> Ktilde_clamped;  // entries that were negative before clamping
  Eigen::LLT<Matrix> chol;           // factorization of K_mm
  double jitter = 0.0;               // absolute value added to diag K_mm
  double jitter_factor = 0.0;        // jitter / mean(raw diag K_mm)

  Index n() const { return K_nm.rows(); }
  Index m() const { return K_mm.rows(); }
};

/// Jitter starts at cfg.jitter * mean(diag K_mm) and escalates x10 on
/// factorization failure up to 1e-2 * mean(diag); beyond that NumericalError.
GramMatrices build_gram(const RowMatrix &x, const RowMatrix &z, const KernelConfig &cfg);

struct KernelGrad {
  Matrix J_mm;
  Matrix J_nm;
  Vector J_nn_diag;
};

/// Elementwise derivatives of the raw (unjittered) kernel blocks.
KernelGrad kernel_grad(const RowMatrix &x, const RowMatrix &z, const KernelConfig &cfg,
                       const HyperParam &which);

}  // namespace bsvm
