#include "gradcaps/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "gradcaps/errors.hpp"

namespace gradcaps {

void Adam::step(const std::vector<Tensor2*>& params,
                const std::vector<const Tensor2*>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("Adam::step: params/grads count mismatch");
  if (m_.empty()) {
    for (const Tensor2* p : params) {
      m_.emplace_back(p->rows(), p->cols());
      v_.emplace_back(p->rows(), p->cols());
    }
  }
  if (m_.size() != params.size())
    throw std::invalid_argument("Adam::step: parameter count changed");

  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t k = 0; k < params.size(); ++k) {
    Tensor2& p = *params[k];
    const Tensor2& g = *grads[k];
    if (!p.same_shape(g) || !p.same_shape(m_[k]))
      throw std::invalid_argument("Adam::step: shape mismatch");
    double* pm = m_[k].data();
    double* pv = v_[k].data();
    double* pp = p.data();
    const double* pg = g.data();
    for (size_t i = 0; i < p.size(); ++i) {
      pm[i] = cfg_.beta1 * pm[i] + (1.0 - cfg_.beta1) * pg[i];
      pv[i] = cfg_.beta2 * pv[i] + (1.0 - cfg_.beta2) * pg[i] * pg[i];
      const double mhat = pm[i] / bc1;
      const double vhat = pv[i] / bc2;
      pp[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
    p.ensure_finite("Adam::step updated parameters");
  }
}

}  // namespace gradcaps
