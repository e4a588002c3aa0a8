#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kbr/kernels.hpp"
#include "kbr/numerics.hpp"

namespace kbr {

/// Weighted atoms (gamma_j, U_j) whose kernel mean sum_j gamma_j k(., U_j)
/// stands in for the prior. General use imposes no sum constraint on the
/// weights.
template <class Input>
struct PriorMixture {
  Vector weights;
  std::vector<Input> atoms;

  void validate() const {
    if (weights.size() == 0 || static_cast<std::size_t>(weights.size()) != atoms.size()) {
      throw InvalidInput("prior mixture: weights and atoms must have equal nonzero length");
    }
    if (!weights.allFinite()) throw InvalidInput("prior mixture: non-finite weight");
  }
};

/// mu = (G_X + n eps I)^{-1} m_pi.
struct KbrWeights {
  Vector mu;
  double epsilon = 0.0;
  Eigen::Index n = 0;
};

struct RidgeMethod {
  double delta = 0.0;
};

struct PinvMethod {
  PinvParams params;
};

using OperatorMethod = std::variant<RidgeMethod, PinvMethod>;

/// The n x n matrix R with posterior mean sum_i (R k_Y(y))_i k_X(., X_i),
/// plus the parameters that produced it.
struct PosteriorOperator {
  Matrix matrix;
  OperatorMethod method;
  std::optional<double> epsilon;  // ridge flavour only
  KernelDescriptor y_kernel;

  std::string describe() const;
};

/// Component i is sum_j gamma_j k(anchors[i], U_j).
template <Kernel K>
Vector prior_mean_vector(const PriorMixture<typename K::input_type>& prior,
                         std::span<const typename K::input_type> anchors, const K& kernel) {
  prior.validate();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(anchors.size()));
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < prior.atoms.size(); ++j) {
      acc += prior.weights(static_cast<Eigen::Index>(j)) * kernel(anchors[i], prior.atoms[j]);
    }
    out(static_cast<Eigen::Index>(i)) = acc;
  }
  return out;
}

/// Solves (G_X + n eps I) mu = m_pi. The ridge term is n * eps.
KbrWeights kbr_weights(const GramMatrix& gx, const Vector& m_pi, double epsilon);

/// R = Lambda G_Y ((Lambda G_Y)^2 + delta I)^{-1} Lambda with
/// Lambda = diag(mu). delta is used unscaled; delta = 0 is allowed and
/// fails with SingularMatrix when Lambda G_Y is singular.
PosteriorOperator posterior_operator_ridge(const KbrWeights& weights, const GramMatrix& gy, double delta);

/// R' = (Lambda' G_Y)^+ Lambda' with Lambda' = diag(G_X^+ m_pi).
PosteriorOperator posterior_operator_pinv(const GramMatrix& gx, const Vector& m_pi, const GramMatrix& gy,
                                          const PinvParams& params = {});

/// f^T R k_Y(y).
double posterior_expectation(const Vector& f_values, const PosteriorOperator& op, const Vector& ky_at_y);

/// R k_Y(y): coefficients of the posterior mean in the basis k_X(., X_i).
Vector posterior_embedding_weights(const PosteriorOperator& op, const Vector& ky_at_y);

/// (G_X + n eps I)^{-1} k_X(x): coefficients of the regularized conditional
/// embedding of Y given X = x in the basis k_Y(., Y_i).
Vector conditional_embedding_weights(const GramMatrix& gx, const Vector& kx_at_x, double epsilon);

}  // namespace kbr
